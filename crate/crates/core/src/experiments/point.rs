use std::collections::BTreeMap;

use serde_json::Value;

use super::runner::MultiCounts;
use super::store::EstimateRecord;
use crate::error::{Error, Result};
use crate::stats::delta_se;

/// Event and pairwise-joint counts of one parameter point, sufficient for delta-method errors.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub samples: u64,
    pub unknown: u64,
    counts: BTreeMap<String, u64>,
}

fn pair_key(a: &str, b: &str) -> String {
    format!("{a}&{b}")
}

impl Point {
    pub fn from_counts(c: &MultiCounts) -> Self {
        let mut counts = BTreeMap::new();
        for (j, a) in c.events.iter().enumerate() {
            counts.insert(a.clone(), c.count(j));
            for (l, b) in c.events.iter().enumerate().skip(j + 1) {
                counts.insert(pair_key(a, b), c.joint(j, l));
            }
        }
        Point { samples: c.samples, unknown: c.unknown, counts }
    }

    /// Rebuilds a point from stored records of one experiment and parameter set.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a EstimateRecord>) -> Result<Self> {
        let mut samples = None;
        let mut unknown = 0;
        let mut counts = BTreeMap::new();
        for r in records {
            if samples.is_some_and(|s| s != r.samples) {
                return Err(Error::InvalidParameter(format!("record {} has a different sample count", r.name)));
            }
            samples = Some(r.samples);
            unknown = r.unknown;
            counts.insert(r.event().to_string(), r.successes);
        }
        Ok(Point { samples: samples.unwrap_or(0), unknown, counts })
    }

    pub fn count(&self, event: &str) -> Result<u64> {
        self.counts.get(event).copied().ok_or_else(|| Error::InvalidParameter(format!("no count for event {event}")))
    }

    pub fn p(&self, event: &str) -> Result<f64> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("point has no samples".into()));
        }
        Ok(self.count(event)? as f64 / self.samples as f64)
    }

    fn joint_p(&self, a: &str, b: &str) -> Result<f64> {
        if a == b {
            return self.p(a);
        }
        let c = self.counts.get(&pair_key(a, b)).or_else(|| self.counts.get(&pair_key(b, a)));
        match c {
            Some(&c) => Ok(c as f64 / self.samples as f64),
            None => Err(Error::InvalidParameter(format!("no joint count for {a} and {b}"))),
        }
    }

    /// Covariance matrix of the estimated proportions of `events`.
    pub fn cov(&self, events: &[&str]) -> Result<Vec<Vec<f64>>> {
        let n = self.samples as f64;
        let p: Vec<f64> = events.iter().map(|e| self.p(e)).collect::<Result<_>>()?;
        let mut m = vec![vec![0.0; events.len()]; events.len()];
        for a in 0..events.len() {
            for b in 0..events.len() {
                m[a][b] = (self.joint_p(events[a], events[b])? - p[a] * p[b]) / n;
            }
        }
        Ok(m)
    }

    /// g(p̂) and its delta-method standard error.
    pub fn estimate(&self, events: &[&str], g: impl Fn(&[f64]) -> f64) -> Result<(f64, f64)> {
        let p: Vec<f64> = events.iter().map(|e| self.p(e)).collect::<Result<_>>()?;
        let cov = self.cov(events)?;
        Ok((g(&p), delta_se(&p, &cov, &g)))
    }

    /// Records for every event and every pair of events.
    pub fn to_records(&self, experiment: &str, events: &[String], params: &BTreeMap<String, Value>, seed: u64) -> Result<Vec<EstimateRecord>> {
        let mut out = Vec::new();
        for (j, a) in events.iter().enumerate() {
            out.push(EstimateRecord::new(&format!("{experiment}/{a}"), params.clone(), self.count(a)?, self.samples, self.unknown, seed)?);
            for b in events.iter().skip(j + 1) {
                let key = pair_key(a, b);
                out.push(EstimateRecord::new(&format!("{experiment}/{key}"), params.clone(), self.counts[&key], self.samples, self.unknown, seed)?);
            }
        }
        Ok(out)
    }
}
