//! Exact law of the noise coupling (ω, ω_t).
//!
//! E[F(ω, ω_t)] = 2^{-n} Σ_{x,y} F(x,y) t^{d(x,y)} (1−t)^{n−d(x,y)}, so every
//! coupled expectation is a polynomial in t and derivative identities become
//! coefficient identities.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::cube::{expectation, q, qr, BiFunction, BitConfig, CubeFunction, MAX_BI_DIM, Q};
use crate::error::{Error, Result};
use crate::poly::RationalPoly;
use crate::quad;

/// One draw of the coupling: ω_t = ω XOR η.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseCoupling {
    pub t: Q,
    pub base: BitConfig,
    pub mask: BitConfig,
}

impl NoiseCoupling {
    pub fn new(t: Q, base: BitConfig, mask: BitConfig) -> Result<Self> {
        if t.is_negative() || t > Q::one() {
            return Err(Error::InvalidParameter(format!("noise parameter {t} outside [0,1]")));
        }
        if base.n() != mask.n() {
            return Err(Error::DimensionMismatch { expected: base.n(), got: mask.n() });
        }
        Ok(NoiseCoupling { t, base, mask })
    }

    pub fn sample<R: Rng>(n: usize, t: f64, rng: &mut R) -> Result<Self> {
        let base = (0..n).fold(0u64, |acc, j| acc | (rng.gen_bool(0.5) as u64) << j);
        let mask = (0..n).fold(0u64, |acc, j| acc | (rng.gen_bool(t) as u64) << j);
        let tq = Q::from_float(t).ok_or_else(|| Error::InvalidParameter(format!("bad t {t}")))?;
        NoiseCoupling::new(tq, BitConfig::new(n, base)?, BitConfig::new(n, mask)?)
    }

    pub fn noised(&self) -> BitConfig {
        BitConfig::new(self.base.n(), self.base.bits() ^ self.mask.bits()).expect("same dimension")
    }

    /// Probability of this (ω, η) pair under the coupling.
    pub fn weight(&self) -> Q {
        let n = self.base.n();
        let k = self.mask.bits().count_ones() as usize;
        let one_minus = Q::one() - &self.t;
        pow(&self.t, k) * pow(&one_minus, n - k) / q(1i64 << n)
    }
}

fn pow(x: &Q, k: usize) -> Q {
    (0..k).fold(Q::one(), |acc, _| acc * x)
}

/// Weights `w_d` with E[F(ω, ω_t)] = Σ_d w_d t^d (1−t)^{n−d}.
#[derive(Clone, Debug, PartialEq)]
pub struct Bernstein {
    weights: Vec<Q>,
}

impl Bernstein {
    pub fn n(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn to_poly(&self) -> RationalPoly {
        let n = self.n();
        let t = RationalPoly::t();
        let s = RationalPoly::one_minus_t();
        let mut out = RationalPoly::zero();
        for (d, w) in self.weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let basis = &t.pow(d) * &s.pow(n - d);
            out = &out + &basis.scale(w);
        }
        out
    }

    pub fn add(&self, other: &Bernstein) -> Bernstein {
        Bernstein { weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, c: &Q) -> Bernstein {
        Bernstein { weights: self.weights.iter().map(|w| w * c).collect() }
    }

    pub fn to_f64(&self) -> BernsteinF64 {
        BernsteinF64 { weights: self.weights.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect() }
    }
}

/// Floating-point evaluator of a [`Bernstein`] form; stable on [0, 1].
#[derive(Clone, Debug)]
pub struct BernsteinF64 {
    weights: Vec<f64>,
}

impl BernsteinF64 {
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.weights.len() - 1;
        let s = 1.0 - t;
        self.weights.iter().enumerate().map(|(d, w)| w * t.powi(d as i32) * s.powi((n - d) as i32)).sum()
    }
}

/// Hamming-distance bucket sums of F, scaled by 2^{-n}.
pub fn joint_bernstein(f: &BiFunction) -> Result<Bernstein> {
    let n = f.n();
    if n > MAX_BI_DIM {
        return Err(Error::DimensionCap { n, cap: MAX_BI_DIM });
    }
    let size = 1usize << n;
    let mut buckets = vec![Q::zero(); n + 1];
    if let Some((fx, gy)) = f.as_product() {
        // h[x][d] = Σ_{y : d(x,y) = d} g(y), built one coordinate at a time.
        let mut h: Vec<Vec<Q>> = (0..size)
            .map(|y| {
                let mut v = vec![Q::zero(); n + 1];
                v[0] = gy.at(y).clone();
                v
            })
            .collect();
        for j in 0..n {
            let m = 1usize << j;
            for x in (0..size).filter(|x| x & m == 0) {
                let (lo, hi) = (h[x].clone(), h[x | m].clone());
                for d in 0..=n {
                    let shifted_hi = if d > 0 { hi[d - 1].clone() } else { Q::zero() };
                    let shifted_lo = if d > 0 { lo[d - 1].clone() } else { Q::zero() };
                    h[x][d] = &lo[d] + shifted_hi;
                    h[x | m][d] = &hi[d] + shifted_lo;
                }
            }
        }
        for (x, hx) in h.iter().enumerate() {
            let fv = fx.at(x);
            if fv.is_zero() {
                continue;
            }
            for d in 0..=n {
                buckets[d] += fv * &hx[d];
            }
        }
    } else {
        for y in 0..size {
            for x in 0..size {
                let v = f.at(x, y);
                if !v.is_zero() {
                    buckets[(x ^ y).count_ones() as usize] += v;
                }
            }
        }
    }
    let scale = qr(1, 1i64 << n);
    Ok(Bernstein { weights: buckets.into_iter().map(|b| b * &scale).collect() })
}

/// E[F(ω, ω_t)] as an exact polynomial in t.
pub fn joint_poly(f: &BiFunction) -> Result<RationalPoly> {
    Ok(joint_bernstein(f)?.to_poly())
}

fn lemma1_grid() -> Vec<Q> {
    vec![q(0), qr(1, 4), qr(1, 3), qr(1, 2), qr(2, 3), qr(3, 4), q(1)]
}

/// Marginal of ω_t is uniform for every grid t, and (ω, ω_{1/2}) is uniform on pairs.
pub fn check_lemma1(n: usize) -> Result<bool> {
    if n == 0 || n > MAX_BI_DIM {
        return Err(Error::DimensionCap { n, cap: MAX_BI_DIM });
    }
    let size = 1usize << n;
    let uniform = qr(1, size as i64);
    for t in lemma1_grid() {
        let mut marginal = vec![Q::zero(); size];
        let mut joint = if t == qr(1, 2) { Some(vec![Q::zero(); size * size]) } else { None };
        for eta in 0..size {
            let w = NoiseCoupling::new(t.clone(), BitConfig::from_index(n, 0), BitConfig::from_index(n, eta))?
                .weight();
            if w.is_zero() {
                continue;
            }
            for omega in 0..size {
                let y = omega ^ eta;
                marginal[y] += &w;
                if let Some(j) = joint.as_mut() {
                    j[omega * size + y] += &w;
                }
            }
        }
        if marginal.iter().any(|m| *m != uniform) {
            return Ok(false);
        }
        if let Some(j) = joint {
            let atom = qr(1, (size * size) as i64);
            if j.iter().any(|p| *p != atom) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// d/dt E[F(ω,ω_t)] = −½ Σ_i E[∇_ii F(ω,ω_t)] as a polynomial identity.
pub fn check_interpolation_identity(f: &BiFunction) -> Result<bool> {
    let lhs = joint_poly(f)?.derivative();
    let rhs = grad2_sum(f)?.to_poly().scale(&qr(-1, 2));
    Ok(lhs == rhs)
}

/// Σ_i E[∇_ii F(ω, ω_t)] in Bernstein form.
fn grad2_sum(f: &BiFunction) -> Result<Bernstein> {
    let mut acc: Option<Bernstein> = None;
    for i in 1..=f.n() {
        let b = joint_bernstein(&f.grad2_function(i)?)?;
        acc = Some(match acc {
            Some(a) => a.add(&b),
            None => b,
        });
    }
    acc.ok_or_else(|| Error::InvalidParameter("empty cube".into()))
}

/// Outcome of the quantitative Harris-FKG check.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop1Report {
    /// φ(0) = E[fg].
    pub endpoint_zero: bool,
    /// φ(1/2) = E[f]E[g].
    pub endpoint_half: bool,
    /// φ′ = −½ Σ_i E[∇_i f(ω) ∇_i g(ω_t)] coefficientwise.
    pub ode: bool,
    pub e_fg: Q,
    pub ef_eg: Q,
    /// log(E[fg] / (E[f]E[g])); −∞ when E[fg] = 0.
    pub log_ratio: f64,
    /// Quadrature value of I; `None` when the integrand is singular at t = 0.
    pub integral: Option<f64>,
    pub quad_error: Option<f64>,
    pub tol: f64,
}

impl Prop1Report {
    pub fn exact_ok(&self) -> bool {
        self.endpoint_zero && self.endpoint_half && self.ode
    }

    pub fn quad_ok(&self) -> bool {
        self.quad_error.is_none_or(|e| e <= self.tol)
    }

    pub fn passed(&self) -> bool {
        self.exact_ok() && self.quad_ok()
    }
}

/// Quantitative Harris-FKG: E[fg] = E[f]E[g] e^I.
pub fn verify_prop1(f: &CubeFunction, g: &CubeFunction, quad_points: usize, tol: f64) -> Result<Prop1Report> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), got: g.n() });
    }
    if !f.is_nonnegative() || !g.is_nonnegative() {
        return Err(Error::Precondition("f and g must be non-negative".into()));
    }
    let (ef, eg) = (expectation(f), expectation(g));
    if ef.is_zero() || eg.is_zero() {
        return Err(Error::Precondition("f and g must have positive means".into()));
    }
    let e_fg = expectation(&f.mul(g)?);
    let ef_eg = &ef * &eg;

    let phi_b = joint_bernstein(&BiFunction::product(f, g)?)?;
    let phi = phi_b.to_poly();
    let endpoint_zero = phi.eval(&Q::zero()) == e_fg;
    let endpoint_half = phi.eval(&qr(1, 2)) == ef_eg;

    let mut grads: Option<Bernstein> = None;
    for i in 1..=f.n() {
        let b = joint_bernstein(&BiFunction::product(&f.grad_function(i)?, &g.grad_function(i)?)?)?;
        grads = Some(match grads {
            Some(a) => a.add(&b),
            None => b,
        });
    }
    let half_grads = grads.expect("n ≥ 1").scale(&qr(1, 2));
    let ode = phi.derivative() == -&half_grads.to_poly();

    let log_ratio = ratio_ln(&e_fg, &ef_eg);
    let (integral, quad_error) = if e_fg.is_zero() {
        (None, None)
    } else {
        let num = half_grads.to_f64();
        let den = phi_b.to_f64();
        for k in 1..=64 {
            if den.eval(k as f64 / 128.0) <= 0.0 {
                return Err(Error::SingularIntegrand("φ vanishes on (0, 1/2]".into()));
            }
        }
        let res = quad::integrate(|t| num.eval(t) / den.eval(t), 0.0, 0.5, quad_points, tol)?;
        (Some(res.value), Some((res.value - log_ratio).abs()))
    };
    Ok(Prop1Report { endpoint_zero, endpoint_half, ode, e_fg, ef_eg, log_ratio, integral, quad_error, tol })
}

/// ln(a / b) for positive rationals, robust to huge numerators and denominators.
pub(crate) fn ratio_ln(a: &Q, b: &Q) -> f64 {
    if a.is_zero() {
        return f64::NEG_INFINITY;
    }
    let r = a / b;
    big_ln(r.numer()) - big_ln(r.denom())
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Default rational grid on [0, 1/2]: k/64 for k = 0..=32.
pub fn default_grid() -> Vec<Q> {
    (0..=32).map(|k| qr(k, 64)).collect()
}

fn check_half_grid(grid: &[Q]) -> Result<()> {
    let half = qr(1, 2);
    if let Some(t) = grid.iter().find(|t| t.is_negative() || **t > half) {
        return Err(Error::InvalidParameter(format!("grid point {t} outside [0, 1/2]")));
    }
    Ok(())
}

/// t ↦ E[f(ω) f(ω_t)] is non-increasing at every grid point.
pub fn check_remark4(f: &CubeFunction, grid: &[Q]) -> Result<bool> {
    check_half_grid(grid)?;
    let deriv = joint_poly(&BiFunction::product(f, f)?)?.derivative();
    Ok(grid.iter().all(|t| !deriv.eval(t).is_positive()))
}

/// Noised FKG: E[FG] ≥ E[F]E[G] at each grid t for F, G both increasing or both decreasing.
pub fn check_holley_noised(f: &BiFunction, g: &BiFunction, grid: &[Q]) -> Result<bool> {
    check_half_grid(grid)?;
    let both_inc = f.is_increasing() && g.is_increasing();
    let both_dec = f.is_decreasing() && g.is_decreasing();
    if !both_inc && !both_dec {
        return Err(Error::Precondition("F and G must be both increasing or both decreasing".into()));
    }
    correlation_on_grid(f, g, grid)
}

fn correlation_on_grid(f: &BiFunction, g: &BiFunction, grid: &[Q]) -> Result<bool> {
    let pfg = joint_poly(&f.mul(g)?)?;
    let pf = joint_poly(f)?;
    let pg = joint_poly(g)?;
    Ok(grid.iter().all(|t| pfg.eval(t) >= pf.eval(t) * pg.eval(t)))
}

/// Pairwise disjoint coordinate sets (1-based) for the noised FKG with supports.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoordPartition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
}

impl CoordPartition {
    fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n + 1];
        for &i in self.a.iter().chain(&self.b).chain(&self.s).chain(&self.t) {
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if seen[i] {
                return Err(Error::Precondition(format!("coordinate {i} appears in two sets")));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

fn insensitive(f: &BiFunction, i: usize) -> bool {
    let size = 1usize << f.n();
    let m = 1usize << (i - 1);
    (0..size).all(|x| (0..size).all(|y| f.at(x, y) == f.at(x ^ m, y) && f.at(x, y) == f.at(x, y ^ m)))
}

fn monotone_in(f: &BiFunction, i: usize, increasing: bool) -> bool {
    let size = 1usize << f.n();
    let m = 1usize << (i - 1);
    (0..size).all(|x| {
        (0..size).all(|y| {
            let (ux, dx) = (f.at(x | m, y), f.at(x & !m, y));
            let (uy, dy) = (f.at(x, y | m), f.at(x, y & !m));
            if increasing {
                ux >= dx && uy >= dy
            } else {
                ux <= dx && uy <= dy
            }
        })
    })
}

/// E[FG] ≥ E[F]E[G] on the grid under the support and monotonicity conditions.
pub fn check_prop3(partition: &CoordPartition, f: &BiFunction, g: &BiFunction, grid: &[Q]) -> Result<bool> {
    let n = f.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.n() });
    }
    check_half_grid(grid)?;
    partition.validate(n)?;
    let in_set = |set: &[&Vec<usize>], i: usize| set.iter().any(|s| s.contains(&i));
    for i in 1..=n {
        if !in_set(&[&partition.a, &partition.s, &partition.t], i) && !insensitive(f, i) {
            return Err(Error::Precondition(format!("F depends on coordinate {i} outside A∪S∪T")));
        }
        if !in_set(&[&partition.b, &partition.s, &partition.t], i) && !insensitive(g, i) {
            return Err(Error::Precondition(format!("G depends on coordinate {i} outside B∪S∪T")));
        }
    }
    for &i in &partition.s {
        for (name, h) in [("F", f), ("G", g)] {
            if !monotone_in(h, i, true) {
                return Err(Error::Precondition(format!("{name} is not increasing in coordinate {i} of S")));
            }
        }
    }
    for &i in &partition.t {
        for (name, h) in [("F", f), ("G", g)] {
            if !monotone_in(h, i, false) {
                return Err(Error::Precondition(format!("{name} is not decreasing in coordinate {i} of T")));
            }
        }
    }
    correlation_on_grid(f, g, grid)
}
