use std::collections::BTreeMap;
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perco::{RngStream, Workspace};

/// Result of one Monte Carlo sample: a bit per event plus an optional count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub bits: u64,
    pub unknown: bool,
    pub value: u64,
}

impl Outcome {
    pub fn from_flags(flags: &[bool]) -> Self {
        let bits = flags.iter().enumerate().fold(0u64, |acc, (j, &f)| acc | (f as u64) << j);
        Outcome { bits, unknown: false, value: 0 }
    }

    pub fn unknown() -> Self {
        Outcome { bits: 0, unknown: true, value: 0 }
    }
}

/// Joint event counts over the decided samples; merging is plain addition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiCounts {
    pub events: Vec<String>,
    pub samples: u64,
    pub unknown: u64,
    pub patterns: BTreeMap<u64, u64>,
    pub value_sum: u128,
    pub value_sq_sum: u128,
    pub value_by_event: Vec<u128>,
    pub sites: Vec<u64>,
}

impl MultiCounts {
    pub fn new(events: &[&str], sites: usize) -> Self {
        MultiCounts {
            events: events.iter().map(|s| s.to_string()).collect(),
            value_by_event: vec![0; events.len()],
            sites: vec![0; sites],
            ..Default::default()
        }
    }

    pub fn push(&mut self, o: Outcome) {
        if o.unknown {
            self.unknown += 1;
            return;
        }
        self.samples += 1;
        *self.patterns.entry(o.bits).or_default() += 1;
        let v = o.value as u128;
        self.value_sum += v;
        self.value_sq_sum += v * v;
        for (j, acc) in self.value_by_event.iter_mut().enumerate() {
            if o.bits >> j & 1 == 1 {
                *acc += v;
            }
        }
    }

    pub fn merge(&mut self, other: &MultiCounts) {
        self.samples += other.samples;
        self.unknown += other.unknown;
        for (k, v) in &other.patterns {
            *self.patterns.entry(*k).or_default() += v;
        }
        self.value_sum += other.value_sum;
        self.value_sq_sum += other.value_sq_sum;
        for (a, b) in self.value_by_event.iter_mut().zip(&other.value_by_event) {
            *a += b;
        }
        for (a, b) in self.sites.iter_mut().zip(&other.sites) {
            *a += b;
        }
    }

    pub fn index(&self, event: &str) -> Result<usize> {
        self.events
            .iter()
            .position(|e| e == event)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown event {event}")))
    }

    /// Samples in which every event of `mask` occurred.
    pub fn count_all(&self, mask: u64) -> u64 {
        self.patterns.iter().filter(|(k, _)| *k & mask == mask).map(|(_, v)| v).sum()
    }

    pub fn count(&self, j: usize) -> u64 {
        self.count_all(1 << j)
    }

    pub fn joint(&self, j: usize, l: usize) -> u64 {
        self.count_all(1 << j | 1 << l)
    }
}

/// Wall-clock guard for a whole run.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    start: Instant,
    seconds: Option<f64>,
}

impl Budget {
    pub fn new(seconds: Option<f64>) -> Self {
        Budget { start: Instant::now(), seconds }
    }

    pub fn unlimited() -> Self {
        Budget::new(None)
    }

    pub fn check(&self, context: &str) -> Result<()> {
        match self.seconds {
            Some(s) if self.start.elapsed().as_secs_f64() > s => {
                Err(Error::BudgetExceeded { budget_seconds: s, context: context.to_string() })
            }
            _ => Ok(()),
        }
    }
}

/// Which RNG streams a batch of samples uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplePlan {
    pub seed: u64,
    /// Sample i draws from stream `stream_base + i`.
    pub stream_base: u64,
    pub samples: u64,
    pub replicas: usize,
}

impl SamplePlan {
    /// Disjoint stream ranges for parameter points.
    pub fn for_point(seed: u64, point: u64, samples: u64, replicas: usize) -> Self {
        SamplePlan { seed, stream_base: (point + 1) << 36, samples, replicas }
    }
}

const CHECK_EVERY: u64 = 1024;

/// Runs `f` on every sample of the plan; replicas take contiguous index ranges and their counts are summed.
pub fn run_samples<F>(plan: SamplePlan, template: &MultiCounts, budget: &Budget, context: &str, f: F) -> Result<MultiCounts>
where
    F: Fn(&mut ChaCha8Rng, &mut Workspace, &mut Vec<u64>) -> Outcome + Sync,
{
    let replicas = plan.replicas.max(1) as u64;
    let chunk = plan.samples.div_ceil(replicas).max(1);
    let ranges: Vec<(u64, u64)> =
        (0..replicas).map(|r| (r * chunk, ((r + 1) * chunk).min(plan.samples))).filter(|(a, b)| a < b).collect();
    let parts: Vec<Result<MultiCounts>> = ranges
        .par_iter()
        .map(|&(a, b)| {
            let mut counts = template.clone();
            let mut ws = Workspace::new();
            let mut sites = std::mem::take(&mut counts.sites);
            for i in a..b {
                if (i - a) % CHECK_EVERY == 0 {
                    budget.check(context)?;
                }
                let mut rng = RngStream::new(plan.seed, plan.stream_base + i).rng();
                let o = f(&mut rng, &mut ws, &mut sites);
                counts.push(o);
            }
            counts.sites = sites;
            Ok(counts)
        })
        .collect();
    let mut total = template.clone();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}
