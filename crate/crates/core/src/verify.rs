//! Exact verification suites over random small cubes.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cube::{q, qr, random_event, random_function, random_monotone, BiFunction, CubeEvent, CubeFunction, MAX_BI_DIM};
use crate::error::{Error, Result};
use crate::noise::{
    check_holley_noised, check_interpolation_identity, check_lemma1, check_prop3, check_remark4, default_grid,
    verify_prop1, CoordPartition,
};
use crate::witness::{check_dual_reimer, check_lemma2, check_prop2_with, check_reimer, check_strong_bk, MAX_WITNESS_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Cube,
    Reimer,
    Noise,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cube" => Ok(Suite::Cube),
            "reimer" => Ok(Suite::Reimer),
            "noise" => Ok(Suite::Noise),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidParameter(format!("unknown suite {s}; valid suites: cube, reimer, noise, all"))),
        }
    }
}

/// Deliberate faults for confirming that the suites can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutant {
    /// Negates D_i F in the quantitative Reimer check.
    FlipDSign,
}

impl FromStr for Mutant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flip-d-sign" => Ok(Mutant::FlipDSign),
            _ => Err(Error::InvalidParameter(format!("unknown mutant {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Upper bound on the cube dimension of every family.
    pub n_max: Option<usize>,
    /// Multiplies every instance count; 1.0 gives the full suite.
    pub scale: f64,
    pub quad_points: usize,
    pub tol: f64,
    pub mutant: Option<Mutant>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 1, n_max: None, scale: 1.0, quad_points: 129, tol: 1e-8, mutant: None }
    }
}

/// Pass/fail tally of one identity over its instances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    /// Instances with a singular integrand, where only the exact part applies.
    pub skipped: usize,
    pub first_failure: Option<String>,
}

impl CheckOutcome {
    fn new(name: &str) -> Self {
        CheckOutcome { name: name.into(), instances: 0, failures: 0, skipped: 0, first_failure: None }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.instances > 0
    }

    pub fn line(&self) -> String {
        let status = if self.passed() { "pass" } else { "FAIL" };
        let mut s = format!("[{status}] {}: {}/{} instances", self.name, self.instances - self.failures, self.instances);
        if self.skipped > 0 {
            s.push_str(&format!(" ({} singular, exact part only)", self.skipped));
        }
        if let Some(f) = &self.first_failure {
            s.push_str(&format!("; first failure: {f}"));
        }
        s
    }
}

struct Plan<'a> {
    cfg: &'a VerifyConfig,
}

impl Plan<'_> {
    fn count(&self, base: usize) -> usize {
        ((base as f64 * self.cfg.scale).ceil() as usize).max(1)
    }

    /// Dimension of instance i, cycling through 1..=min(top, n_max).
    fn dim(&self, top: usize, i: usize, min: usize) -> usize {
        let top = self.cfg.n_max.map_or(top, |m| m.min(top)).max(min);
        min + i % (top - min + 1)
    }

    fn seed(&self, family: u64, i: usize) -> u64 {
        self.cfg.seed.wrapping_mul(1_000_003).wrapping_add(family << 32).wrapping_add(i as u64)
    }
}

fn random_bi(n: usize, seed: u64) -> Result<BiFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BiFunction::from_fn(n, |_, _| qr(rng.gen_range(-8..=8), 4))
}

fn nonneg(kind: usize, n: usize, seed: u64) -> Result<CubeFunction> {
    match kind {
        0 => random_monotone(n, seed)?.to_function().add(&random_monotone(n, seed ^ 0x55)?.to_function().scale(&qr(1, 2))),
        1 => random_monotone(n, seed)?.complement_image().to_function().add(&CubeFunction::constant(n, qr(1, 3))?),
        _ => random_function(n, 0, 3, seed),
    }
}

/// Up-set generated by one to three random non-empty configurations.
fn generated_upset(n: usize, seed: u64) -> Result<CubeEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = (1usize << n) - 1;
    let gens: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=full)).collect();
    CubeEvent::from_fn(n, |x| gens.iter().any(|&g| g & !x.index() == 0))
}

/// A monotone event on 2·|coords| variables read through per-coordinate orientations.
fn oriented_bi(n: usize, coords: &[(usize, bool)], seed: u64) -> Result<BiFunction> {
    let m = random_monotone((2 * coords.len()).max(1), seed)?;
    BiFunction::from_fn(n, |x, y| {
        let mut bits = 0usize;
        for (j, &(i, up)) in coords.iter().enumerate() {
            let (xi, yi) = (x.get(i).expect("in range"), y.get(i).expect("in range"));
            bits |= ((xi == up) as usize) << (2 * j) | ((yi == up) as usize) << (2 * j + 1);
        }
        q(m.members()[bits] as i64)
    })
}

fn cube_suite(p: &Plan) -> Result<Vec<CheckOutcome>> {
    let mut interp = CheckOutcome::new("interpolation_identity");
    for i in 0..p.count(100) {
        let n = p.dim(6, i, 1);
        let f = random_bi(n, p.seed(1, i))?;
        interp.record(check_interpolation_identity(&f)?, || format!("random BiFunction n={n} #{i}"));
    }
    let mut lemma1 = CheckOutcome::new("lemma1_coupling");
    for n in 1..=p.cfg.n_max.unwrap_or(6).min(6) {
        lemma1.record(check_lemma1(n)?, || format!("n={n}"));
    }
    Ok(vec![interp, lemma1])
}

fn noise_suite(p: &Plan) -> Result<Vec<CheckOutcome>> {
    let mut exact = CheckOutcome::new("prop1_exact");
    let mut quad = CheckOutcome::new("prop1_quadrature");
    let mut attempt = 0;
    for i in 0..p.count(200) {
        let n = p.dim(8, i, 1);
        let (kf, kg) = [(0, 0), (0, 1), (1, 1), (2, 2), (0, 2)][i % 5];
        let r = loop {
            let f = nonneg(kf, n, p.seed(2, attempt))?;
            let g = nonneg(kg, n, p.seed(3, attempt))?;
            attempt += 1;
            match verify_prop1(&f, &g, p.cfg.quad_points, p.cfg.tol) {
                Err(Error::Precondition(_)) if attempt < 100 * p.count(200) => continue,
                other => break other?,
            }
        };
        exact.record(r.exact_ok(), || format!("pair n={n} #{i}: endpoints {}/{}, ode {}", r.endpoint_zero, r.endpoint_half, r.ode));
        match r.quad_error {
            Some(e) => quad.record(e <= p.cfg.tol, || format!("pair n={n} #{i}: error {e:.3e}")),
            None => quad.skipped += 1,
        }
    }
    let mut remark4 = CheckOutcome::new("remark4_monotone");
    for i in 0..p.count(100) {
        let n = p.dim(6, i, 1);
        let f = random_function(n, -3, 3, p.seed(4, i))?;
        remark4.record(check_remark4(&f, &default_grid())?, || format!("n={n} #{i}"));
    }
    let mut holley = CheckOutcome::new("holley_noised");
    for i in 0..p.count(60) {
        let n = p.dim(4, i, 1);
        let up = i % 2 == 0;
        let coords: Vec<(usize, bool)> = (1..=n).map(|c| (c, up)).collect();
        let f = oriented_bi(n, &coords, p.seed(5, i))?;
        let g = oriented_bi(n, &coords, p.seed(6, i))?;
        holley.record(check_holley_noised(&f, &g, &default_grid())?, || format!("n={n} #{i}"));
    }
    let mut prop3 = CheckOutcome::new("prop3_supports");
    for i in 0..p.count(60) {
        let n = p.dim(4, i, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed(7, i));
        let mut part = CoordPartition::default();
        for c in 1..=n {
            match rng.gen_range(0..5) {
                0 => part.a.push(c),
                1 => part.b.push(c),
                2 => part.s.push(c),
                3 => part.t.push(c),
                _ => {}
            }
        }
        let orient = |own: &[usize], rng: &mut ChaCha8Rng| -> Vec<(usize, bool)> {
            let mut v: Vec<(usize, bool)> = own.iter().map(|&c| (c, rng.gen_bool(0.5))).collect();
            v.extend(part.s.iter().map(|&c| (c, true)));
            v.extend(part.t.iter().map(|&c| (c, false)));
            v
        };
        let f = oriented_bi(n, &orient(&part.a, &mut rng), p.seed(8, i))?;
        let g = oriented_bi(n, &orient(&part.b, &mut rng), p.seed(9, i))?;
        prop3.record(check_prop3(&part, &f, &g, &default_grid())?, || format!("n={n} #{i} partition {part:?}"));
    }
    Ok(vec![exact, quad, remark4, holley, prop3])
}

fn reimer_suite(p: &Plan) -> Result<Vec<CheckOutcome>> {
    let mut lemma2 = CheckOutcome::new("lemma2_witness");
    let mut strong = CheckOutcome::new("strong_bk");
    let mut dual = CheckOutcome::new("dual_reimer");
    for i in 0..p.count(100) {
        let n = p.dim(6, i, 1);
        let (a, b) = (random_event(n, p.seed(10, i))?, random_event(n, p.seed(11, i))?);
        dual.record(check_dual_reimer(&a, &b)?, || format!("n={n} #{i}"));
        let (ma, mb) = (generated_upset(n, p.seed(12, i))?, generated_upset(n, p.seed(13, i))?);
        lemma2.record(check_lemma2(&ma, &mb)?, || format!("n={n} #{i}"));
        strong.record(check_strong_bk(&ma, &mb)?, || format!("n={n} #{i}"));
    }
    let mut reimer = CheckOutcome::new("reimer");
    for i in 0..p.count(500) {
        let n = p.dim(10, i, 1);
        let (a, b) = (random_event(n, p.seed(14, i))?, random_event(n, p.seed(15, i))?);
        reimer.record(check_reimer(&a, &b)?, || format!("n={n} #{i}"));
    }
    let mut exact = CheckOutcome::new("prop2_exact");
    let mut quad = CheckOutcome::new("prop2_quadrature");
    let flip = p.cfg.mutant == Some(Mutant::FlipDSign);
    let mut i = 0;
    let mut attempt = 0;
    while i < p.count(100) {
        let n = p.dim(6, i, 2);
        let (a, b) = (generated_upset(n, p.seed(16, attempt))?, generated_upset(n, p.seed(17, attempt))?);
        attempt += 1;
        let r = match check_prop2_with(&a, &b, p.cfg.quad_points, p.cfg.tol, flip) {
            Ok(r) => r,
            Err(Error::Precondition(_)) if attempt < 100 * p.count(100) => continue,
            Err(e) => return Err(e),
        };
        exact.record(r.exact_ok(), || {
            format!(
                "pair n={n} #{i}: pointwise {}, endpoints {}/{}, ode {}, J ≥ 0 {}",
                r.pointwise_identity, r.endpoint_zero, r.endpoint_one, r.ode, r.j_nonnegative
            )
        });
        quad.record(r.quad_ok(), || format!("pair n={n} #{i}: error {:.3e}", r.quad_error));
        i += 1;
    }
    Ok(vec![lemma2, strong, dual, reimer, exact, quad])
}

/// Runs a suite; every returned outcome names its identity.
pub fn run_verify(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<CheckOutcome>> {
    if !(cfg.scale > 0.0) {
        return Err(Error::InvalidParameter("scale must be positive".into()));
    }
    let cap = match suite {
        Suite::Reimer => MAX_WITNESS_DIM,
        _ => MAX_BI_DIM,
    };
    if let Some(n) = cfg.n_max {
        if n > cap {
            return Err(Error::DimensionCap { n, cap });
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n_max must be ≥ 1".into()));
        }
    }
    let p = Plan { cfg };
    let mut out = vec![];
    if matches!(suite, Suite::Cube | Suite::All) {
        out.extend(cube_suite(&p)?);
    }
    if matches!(suite, Suite::Noise | Suite::All) {
        out.extend(noise_suite(&p)?);
    }
    if matches!(suite, Suite::Reimer | Suite::All) {
        out.extend(reimer_suite(&p)?);
    }
    Ok(out)
}
