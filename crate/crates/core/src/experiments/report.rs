use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::point::Point;
use super::store::{EstimateRecord, StoreLine, Table};
use crate::error::Result;
use crate::stats::{fit_exponent, FitResult};

/// One-arm and polychromatic two-arm exponents used as reference slopes.
pub const ONE_ARM_ANCHOR: f64 = -5.0 / 48.0;
pub const TWO_ARM_ANCHOR: f64 = -0.25;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesFit {
    pub series: String,
    pub fit: FitResult,
    pub anchor: Option<f64>,
}

/// Records of one experiment under one seed, with the fits recomputed from them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportGroup {
    pub experiment: String,
    pub seed: u64,
    pub records: usize,
    pub fits: Vec<SeriesFit>,
    pub gaps: Vec<SeriesFit>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub groups: Vec<ReportGroup>,
    pub configs: usize,
}

fn anchor(experiment: &str, event: &str) -> Option<f64> {
    match (experiment, event) {
        ("theorem1", "b" | "w") => Some(ONE_ARM_ANCHOR),
        ("theorem1", "bw") | ("theorem2", "bw") => Some(TWO_ARM_ANCHOR),
        _ => None,
    }
}

fn scale_of(r: &EstimateRecord) -> Option<f64> {
    r.params.get("n").and_then(Value::as_f64).filter(|&n| n > 0.0)
}

/// Parameters other than n, serialized, so that series run along n only.
fn series_key(r: &EstimateRecord) -> String {
    let rest: BTreeMap<&String, &Value> = r.params.iter().filter(|(k, _)| k.as_str() != "n").collect();
    serde_json::to_string(&rest).unwrap_or_default()
}

fn fit_series(name: String, pts: &[(f64, f64, f64)], anchor: Option<f64>) -> Option<SeriesFit> {
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let vs: Vec<f64> = pts.iter().map(|p| p.2).collect();
    fit_exponent(&xs, &ys, Some(&vs)).ok().map(|fit| SeriesFit { series: name, fit, anchor })
}

/// Gap ratio across n rebuilt from stored counts: numerator events over the product of denominator events.
fn gap_fit(records: &[&EstimateRecord], label: &str, num: &[&str], den: &[&str]) -> Option<SeriesFit> {
    let mut by_n: BTreeMap<i64, Vec<&EstimateRecord>> = BTreeMap::new();
    for r in records {
        if let Some(n) = scale_of(r) {
            by_n.entry(n as i64).or_default().push(r);
        }
    }
    let mut pts = vec![];
    let mut events: Vec<&str> = num.to_vec();
    events.extend_from_slice(den);
    for (n, recs) in by_n {
        let pt = Point::from_records(recs).ok()?;
        let split = num.len();
        let (v, se) = pt
            .estimate(&events, |p| p[..split].iter().product::<f64>() / p[split..].iter().product::<f64>())
            .ok()?;
        if v > 0.0 && v.is_finite() {
            pts.push((n as f64, v, (se / v).powi(2)));
        }
    }
    fit_series(label.to_string(), &pts, None)
}

/// Groups stored records by experiment and seed and refits every n-indexed series.
pub fn report(lines: &[StoreLine]) -> Result<Report> {
    let mut groups: BTreeMap<(String, u64), Vec<&EstimateRecord>> = BTreeMap::new();
    let mut configs = 0;
    for line in lines {
        match line {
            StoreLine::Estimate(r) => groups.entry((r.experiment().to_string(), r.seed)).or_default().push(r),
            StoreLine::Config(_) => configs += 1,
        }
    }
    let mut out = Report { groups: vec![], configs };
    for ((experiment, seed), recs) in groups {
        let mut series: BTreeMap<(String, String), Vec<(f64, f64, f64)>> = BTreeMap::new();
        for r in &recs {
            let event = r.event();
            if event.contains('&') || r.samples == 0 {
                continue;
            }
            if let Some(n) = scale_of(r) {
                let p = r.p_hat;
                let var = if p > 0.0 { (1.0 - p) / (r.samples as f64 * p) } else { 0.0 };
                series.entry((event.to_string(), series_key(r))).or_default().push((n, p, var));
            }
        }
        let mut fits = vec![];
        for ((event, _), pts) in series {
            if let Some(f) = fit_series(event.clone(), &pts, anchor(&experiment, &event)) {
                fits.push(f);
            }
        }
        let mut gaps = vec![];
        if experiment == "theorem1" {
            gaps.extend(gap_fit(&recs, "r", &["bw"], &["b", "w"]));
        }
        if experiment == "theorem2" {
            gaps.extend(gap_fit(&recs, "s", &["dis"], &["bw"]));
        }
        out.groups.push(ReportGroup { experiment, seed, records: recs.len(), fits, gaps });
    }
    Ok(out)
}

impl Report {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["experiment", "seed", "kind", "series", "slope", "slope_lo", "slope_hi", "anchor", "diff"]);
        for g in &self.groups {
            for (kind, list) in [("fit", &g.fits), ("gap", &g.gaps)] {
                for f in list {
                    let (lo, hi) = f.fit.slope_ci();
                    let (a, d) = match f.anchor {
                        Some(a) => (format!("{a}"), format!("{}", f.fit.slope - a)),
                        None => (String::new(), String::new()),
                    };
                    t.push(vec![
                        g.experiment.clone(),
                        g.seed.to_string(),
                        kind.into(),
                        f.series.clone(),
                        format!("{}", f.fit.slope),
                        format!("{lo}"),
                        format!("{hi}"),
                        a,
                        d,
                    ]);
                }
            }
        }
        t
    }

    pub fn render(&self) -> String {
        let mut s = format!("{} experiment groups, {} config records\n", self.groups.len(), self.configs);
        for g in &self.groups {
            s.push_str(&format!("{} (seed {}): {} records\n", g.experiment, g.seed, g.records));
        }
        if self.groups.iter().any(|g| !g.fits.is_empty() || !g.gaps.is_empty()) {
            s.push_str(&self.table().render());
            s.push('\n');
        }
        s
    }
}
