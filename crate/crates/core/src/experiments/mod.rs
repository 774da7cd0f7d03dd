//! Monte Carlo estimators and the named experiments.

mod named;
mod oracle;
mod point;
mod report;
mod runner;
mod store;

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use oracle::{oracle_exact, ORACLE_MAX_HEXES};
pub use point::Point;
pub use report::{report, Report};
pub use runner::{run_samples, Budget, MultiCounts, Outcome, SamplePlan};
pub use store::{
    read_store, write_records_csv, ConfigRecord, EstimateRecord, ResultsStore, StoreLine, Table, CSV_COLUMNS, VERSION,
};

use crate::error::{Error, Result};
use crate::lattice::{Coord, Lattice};
use crate::perco::{apply_noise, sample, ArmSpec, Colour, PercoConfig, RngStream};
use crate::stats::FitResult;

/// Every experiment accepted by [`run_experiment`].
pub const NAMES: [&str; 9] = [
    "theorem1",
    "theorem2",
    "rsw",
    "four_arm",
    "noise_stability",
    "separation",
    "pivotal_sum",
    "interlaced",
    "dynamic_disjoint",
];

/// Sample counts proportional to 1/p̂ from a pilot run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSchedule {
    pub target_successes: u64,
    pub min: u64,
    pub max: u64,
}

/// Parameters of an experiment run; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub replicas: usize,
    /// Lattice extent used for every point instead of the smallest sufficient one.
    pub lattice_n: Option<i64>,
    /// Hexagon pitch in lattice units, as a rational string such as "1" or "1/2".
    pub pitch: String,
    pub samples: u64,
    pub schedule: Option<InverseSchedule>,
    pub n_grid: Vec<i64>,
    pub lambdas: Vec<f64>,
    pub scales: Vec<i64>,
    pub pairs: Vec<[i64; 2]>,
    pub sum_grid: Vec<i64>,
    pub stability_grid: Vec<i64>,
    pub k_grid: Vec<i64>,
    pub pivotal_points: Vec<[i64; 2]>,
    pub interlaced_grid: Vec<i64>,
    pub dynamic_grid: Vec<i64>,
    /// Fixed noise parameter overriding the t̂ policy.
    pub t: Option<f64>,
    /// Multiplier applied to t̂ when `t` is unset.
    pub t_factor: f64,
    /// Known four-arm probabilities α̂ by scale; missing scales are measured by a pilot run.
    pub alpha: BTreeMap<i64, f64>,
    pub pilot_samples: u64,
    pub budget_seconds: Option<f64>,
    /// Cost guard for the expensive experiments, in hexagon visits.
    pub max_cost: f64,
    pub node_budget: u64,
    pub unknown_limit: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            replicas: 1,
            lattice_n: None,
            pitch: "1".into(),
            samples: 100_000,
            schedule: None,
            n_grid: vec![8, 16, 32, 64],
            lambdas: vec![1.0, 2.0],
            scales: vec![1, 2, 4, 8, 16, 32, 64],
            pairs: vec![[4, 32], [8, 32], [8, 64]],
            sum_grid: vec![16, 32, 64],
            stability_grid: vec![16, 32, 64],
            k_grid: vec![8, 16, 32],
            pivotal_points: vec![[4, 40], [8, 80]],
            interlaced_grid: vec![2, 4, 8],
            dynamic_grid: vec![4, 8],
            t: None,
            t_factor: 1.0,
            alpha: BTreeMap::new(),
            pilot_samples: 20_000,
            budget_seconds: None,
            max_cost: 2e11,
            node_budget: 100_000,
            unknown_limit: 0.01,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn pitch(&self) -> Result<Coord> {
        let p = Coord::from_str(self.pitch.trim()).map_err(|_| Error::InvalidParameter(format!("bad pitch {}", self.pitch)))?;
        if *p.numer() <= 0 {
            return Err(Error::InvalidParameter(format!("pitch {p} must be positive")));
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.pitch()?;
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.samples == 0 {
            return bad("samples must be ≥ 1");
        }
        if self.replicas == 0 {
            return bad("replicas must be ≥ 1");
        }
        if self.lambdas.iter().any(|&l| !(l >= 1.0) || !l.is_finite()) {
            return bad("every λ must be ≥ 1");
        }
        if let Some(t) = self.t {
            if !(0.0..=1.0).contains(&t) {
                return bad("t must lie in [0, 1]");
            }
        }
        if !(self.t_factor > 0.0) {
            return bad("t_factor must be positive");
        }
        if self.budget_seconds.is_some_and(|b| !(b > 0.0)) {
            return bad("budget_seconds must be positive");
        }
        if let Some(s) = &self.schedule {
            if s.min == 0 || s.min > s.max {
                return bad("schedule needs 1 ≤ min ≤ max");
            }
        }
        let grids = [&self.n_grid, &self.scales, &self.sum_grid, &self.stability_grid, &self.k_grid];
        if grids.iter().any(|g| g.iter().any(|&n| n < 1)) {
            return bad("scales must be ≥ 1");
        }
        if self.alpha.values().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return bad("α̂ values must lie in (0, 1]");
        }
        Ok(())
    }
}

/// A pass/fail observation attached to an experiment output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything an experiment produces.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub name: String,
    pub config: ExperimentConfig,
    pub records: Vec<EstimateRecord>,
    pub table: Table,
    pub fits: BTreeMap<String, FitResult>,
    /// Chained inputs such as α̂_k and t̂_k.
    pub chain: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

impl ExperimentOutput {
    pub fn summary(&self) -> String {
        let mut s = format!("experiment {} (seed {})\n{}\n", self.name, self.config.seed, self.table.render());
        for (k, f) in &self.fits {
            let (lo, hi) = f.slope_ci();
            s.push_str(&format!("fit {k}: slope {:.5} (95% CI [{lo:.5}, {hi:.5}], residual se {:.5})\n", f.slope, f.stderr_slope));
        }
        for (k, v) in &self.chain {
            s.push_str(&format!("chain {k} = {v:.6}\n"));
        }
        for c in &self.checks {
            s.push_str(&format!("[{}] {}: {}\n", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail));
        }
        s
    }

    /// Writes `<name>.csv` (records) and `<name>_table.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_records_csv(&self.records, &dir.join(format!("{}.csv", self.name)))?;
        self.table.write_csv(&dir.join(format!("{}_table.csv", self.name)))
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs a named experiment, writing its configuration to `store` before sampling and its records after.
pub fn run_experiment(name: &str, cfg: &ExperimentConfig, store: Option<&ResultsStore>) -> Result<ExperimentOutput> {
    if !NAMES.contains(&name) {
        return Err(Error::InvalidParameter(format!("unknown experiment {name}; valid names: {}", NAMES.join(", "))));
    }
    cfg.validate()?;
    if let Some(s) = store {
        s.write_config(name, serde_json::to_value(cfg)?, cfg.seed)?;
    }
    let mut ctx = Ctx::new(name, cfg)?;
    let out = match name {
        "theorem1" => named::theorem1(&mut ctx),
        "theorem2" => named::theorem2(&mut ctx),
        "rsw" => named::rsw(&mut ctx),
        "four_arm" => named::four_arm(&mut ctx),
        "noise_stability" => named::noise_stability(&mut ctx),
        "separation" => named::separation(&mut ctx),
        "pivotal_sum" => named::pivotal_sum(&mut ctx),
        "interlaced" => named::interlaced(&mut ctx),
        _ => named::dynamic_disjoint(&mut ctx),
    }?;
    if let Some(s) = store {
        s.append(&out.records)?;
    }
    Ok(out)
}

/// Shared state of one experiment run.
pub(crate) struct Ctx {
    pub name: String,
    pub cfg: ExperimentConfig,
    pub budget: Budget,
    pub pitch: Coord,
    pub records: Vec<EstimateRecord>,
    pub chain: BTreeMap<String, f64>,
}

/// Stream offset of pilot runs, above every regular point index.
const PILOT_POINT: u64 = 1 << 20;

impl Ctx {
    fn new(name: &str, cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Ctx {
            name: name.to_string(),
            cfg: cfg.clone(),
            budget: Budget::new(cfg.budget_seconds),
            pitch: cfg.pitch()?,
            records: Vec::new(),
            chain: BTreeMap::new(),
        })
    }

    pub fn lattice(&self, required: i64) -> Result<Lattice> {
        let extent = self.cfg.lattice_n.unwrap_or(required);
        if extent < required {
            return Err(Error::InvalidParameter(format!("lattice extent {extent} is below the required {required}")));
        }
        Lattice::new(extent, self.pitch)
    }

    /// Runs one parameter point, applying the inverse-probability schedule if configured.
    pub fn measure<F>(&self, point: u64, events: &[&str], sites: usize, f: F) -> Result<MultiCounts>
    where
        F: Fn(&mut rand_chacha::ChaCha8Rng, &mut crate::perco::Workspace, &mut Vec<u64>) -> Outcome + Sync,
    {
        let template = MultiCounts::new(events, sites);
        let context = format!("{} point {point}", self.name);
        let samples = match &self.cfg.schedule {
            None => self.cfg.samples,
            Some(s) => {
                let pilot_n = self.cfg.pilot_samples.max(1);
                let plan = SamplePlan::for_point(self.cfg.seed, PILOT_POINT + point, pilot_n, self.cfg.replicas);
                let pilot = run_samples(plan, &template, &self.budget, &context, &f)?;
                let rarest = (0..events.len())
                    .map(|j| (pilot.count(j).max(1)) as f64 / pilot.samples.max(1) as f64)
                    .fold(1.0f64, f64::min);
                ((s.target_successes as f64 / rarest).ceil() as u64).clamp(s.min, s.max)
            }
        };
        let plan = SamplePlan::for_point(self.cfg.seed, point, samples, self.cfg.replicas);
        run_samples(plan, &template, &self.budget, &context, f)
    }

    /// α̂_k from the configuration, or from a pilot four-arm run recorded in the store.
    pub fn alpha(&mut self, k: i64) -> Result<f64> {
        if let Some(&a) = self.cfg.alpha.get(&k) {
            self.chain.insert(format!("alpha_{k}"), a);
            return Ok(a);
        }
        let lat = self.lattice(k)?;
        let det = ArmSpec::FourArm { k: 0, n: k }.compile(&lat)?;
        let template = MultiCounts::new(&["alpha"], 0);
        let plan = SamplePlan::for_point(self.cfg.seed, 2 * PILOT_POINT + k as u64, self.cfg.pilot_samples.max(1), self.cfg.replicas);
        let counts = run_samples(plan, &template, &self.budget, "four-arm pilot", |rng, ws, _| {
            Outcome::from_flags(&[det.eval(&sample(&lat, rng), ws)])
        })?;
        let mut params = BTreeMap::new();
        params.insert("n".into(), Value::from(k));
        let rec = EstimateRecord::new(&format!("{}/alpha_pilot", self.name), params, counts.count(0), counts.samples, 0, self.cfg.seed)?;
        if rec.successes == 0 {
            return Err(Error::InvalidParameter(format!("four-arm pilot at scale {k} saw no successes")));
        }
        let a = rec.p_hat;
        self.records.push(rec);
        self.chain.insert(format!("alpha_{k}"), a);
        Ok(a)
    }

    /// The noise parameter for scale k: `t` if set, otherwise t_factor · min(1/(2k²α̂_k), 1/4).
    pub fn noise_t(&mut self, k: i64) -> Result<f64> {
        let t = match self.cfg.t {
            Some(t) => t,
            None => {
                let a = self.alpha(k)?;
                let t_hat = t_hat(k, a);
                self.chain.insert(format!("t_hat_{k}"), t_hat);
                (self.cfg.t_factor * t_hat).min(1.0)
            }
        };
        self.chain.insert(format!("t_{k}"), t);
        Ok(t)
    }

    pub fn finish_owned(&mut self, table: Table, fits: BTreeMap<String, FitResult>, checks: Vec<Check>) -> ExperimentOutput {
        ExperimentOutput {
            name: self.name.clone(),
            config: self.cfg.clone(),
            records: std::mem::take(&mut self.records),
            table,
            fits,
            chain: std::mem::take(&mut self.chain),
            checks,
        }
    }
}

/// t̂_n = min(1/(2n²α̂_n), 1/4).
pub fn t_hat(n: i64, alpha: f64) -> f64 {
    (1.0 / (2.0 * (n * n) as f64 * alpha)).min(0.25)
}

/// Colour source for [`estimate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampler {
    Fair,
    /// Every hexagon takes this colour; for testing impossible events.
    Forced(Colour),
}

/// A static event, or a pair of events read in ω and ω_t.
#[derive(Clone, Debug, PartialEq)]
pub enum EstimateSpec {
    Static(ArmSpec),
    Dynamic { first: ArmSpec, second: ArmSpec, t: f64 },
}

/// Monte Carlo frequency of `spec` with a Wilson interval.
pub fn estimate(
    lat: &Lattice,
    spec: &EstimateSpec,
    sampler: Sampler,
    plan: SamplePlan,
    budget: &Budget,
) -> Result<EstimateRecord> {
    if plan.samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be ≥ 1".into()));
    }
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| match sampler {
        Sampler::Fair => sample(lat, rng),
        Sampler::Forced(c) => PercoConfig::uniform(lat, c),
    };
    let template = MultiCounts::new(&["event"], 0);
    let (name, counts) = match spec {
        EstimateSpec::Static(s) => {
            let det = s.compile(lat)?;
            let counts = run_samples(plan, &template, budget, "estimate", |rng, ws, _| {
                Outcome::from_flags(&[det.eval(&draw(rng), ws)])
            })?;
            ("estimate/static", counts)
        }
        EstimateSpec::Dynamic { first, second, t } => {
            let (d0, d1) = (first.compile(lat)?, second.compile(lat)?);
            if !(0.0..=1.0).contains(t) {
                return Err(Error::InvalidParameter(format!("noise parameter {t} outside [0, 1]")));
            }
            let counts = run_samples(plan, &template, budget, "estimate", |rng, ws, _| {
                let w = draw(rng);
                let wt = apply_noise(&w, *t, rng).expect("t checked");
                Outcome::from_flags(&[d0.eval(&w, ws) && d1.eval(&wt, ws)])
            })?;
            ("estimate/dynamic", counts)
        }
    };
    let mut params = BTreeMap::new();
    params.insert("spec".into(), serde_json::to_value(match spec {
        EstimateSpec::Static(s) => serde_json::to_value(s)?,
        EstimateSpec::Dynamic { first, second, t } => serde_json::json!({"first": first, "second": second, "t": t}),
    })?);
    params.insert("lattice_n".into(), Value::from(lat.n_max()));
    EstimateRecord::new(name, params, counts.count(0), counts.samples, counts.unknown, plan.seed)
}

/// Seed-keyed stream helper for callers outside the runner.
pub fn stream(seed: u64, index: u64) -> RngStream {
    RngStream::new(seed, index)
}
