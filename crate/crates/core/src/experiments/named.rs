use std::collections::BTreeMap;

use num_rational::Ratio;
use serde_json::{json, Value};

use super::point::Point;
use super::runner::{run_samples, MultiCounts, Outcome, SamplePlan};
use super::store::{EstimateRecord, Table};
use super::{Check, Ctx, ExperimentOutput};
use crate::error::{Error, Result};
use crate::lattice::{coord, Rect, Region};
use crate::perco::pivotal::{chain_pivotals, forced_grad};
use crate::perco::{
    apply_noise, sample, ArmSpec, Colour, Direction, DynamicDisjoint, Interlaced, SeparatedVariant, Tri, Workspace,
};
use crate::stats::{delta_se, fit_exponent, wilson, FitResult, Z95};

const FIT_COLS: [&str; 4] = ["slope", "slope_lo", "slope_hi", "resid_se"];

fn table(cols: &[&str]) -> Table {
    let mut all = vec!["row"];
    all.extend_from_slice(cols);
    all.extend_from_slice(&FIT_COLS);
    Table::new(&all)
}

fn point_row(t: &mut Table, vals: Vec<String>) {
    let mut row = vec!["point".to_string()];
    row.extend(vals);
    row.resize(t.columns.len(), String::new());
    t.push(row);
}

fn fit_row(t: &mut Table, label: &str, f: &FitResult) {
    let mut row = vec![format!("fit:{label}")];
    row.resize(t.columns.len() - FIT_COLS.len(), String::new());
    let (lo, hi) = f.slope_ci();
    row.extend([f.slope, lo, hi, f.stderr_slope].map(num));
    t.push(row);
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

fn params(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Log-log fit of `vals` against `xs` with sampling variances (se/val)²; failures become checks.
fn log_fit(
    label: &str,
    xs: &[f64],
    vals: &[f64],
    ses: &[f64],
    fits: &mut BTreeMap<String, FitResult>,
    checks: &mut Vec<Check>,
) -> Option<FitResult> {
    let var: Vec<f64> = vals.iter().zip(ses).map(|(v, s)| (s / v).powi(2)).collect();
    match fit_exponent(xs, vals, Some(&var)) {
        Ok(f) => {
            fits.insert(label.to_string(), f.clone());
            Some(f)
        }
        Err(e) => {
            checks.push(check(&format!("fit_{label}"), false, e.to_string()));
            None
        }
    }
}

/// Binomial standard error of a proportion.
fn binom_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n.max(1) as f64).sqrt()
}

fn ratio_fn(p: &[f64]) -> f64 {
    p[0] / p[1]
}

/// Records the counts of one point and returns it.
fn record(ctx: &mut Ctx, counts: &MultiCounts, p: BTreeMap<String, Value>) -> Result<Point> {
    let pt = Point::from_counts(counts);
    let name = ctx.name.clone();
    ctx.records.extend(pt.to_records(&name, &counts.events, &p, ctx.cfg.seed)?);
    Ok(pt)
}

pub(super) fn theorem1(ctx: &mut Ctx) -> Result<ExperimentOutput> {
    let grid = ctx.cfg.n_grid.clone();
    let mut t = table(&["n", "samples", "p_b", "p_w", "p_bw", "r", "r_se", "r_lo", "r_hi"]);
    let (mut xs, mut rs, mut r_ses) = (vec![], vec![], vec![]);
    let mut series: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut checks = vec![];
    let (mut fkg_ok, mut sym_ok) = (true, true);
    for (i, &n) in grid.iter().enumerate() {
        let lat = ctx.lattice(n)?;
        let black = ArmSpec::OneArm { colour: Colour::Black, n }.compile(&lat)?;
        let white = ArmSpec::OneArm { colour: Colour::White, n }.compile(&lat)?;
        let counts = ctx.measure(i as u64, &["b", "w", "bw"], 0, |rng, ws, _| {
            let c = sample(&lat, rng);
            let b = black.eval(&c, ws);
            let w = white.eval(&c, ws);
            Outcome::from_flags(&[b, w, b && w])
        })?;
        let pt = record(ctx, &counts, params(&[("n", json!(n))]))?;
        let (r, se) = pt.estimate(&["bw", "b", "w"], |p| p[0] / (p[1] * p[2]))?;
        let ps = [pt.p("b")?, pt.p("w")?, pt.p("bw")?];
        for (e, p) in ["b", "w", "bw"].into_iter().zip(ps) {
            let s = series.entry(e).or_default();
            s.0.push(p);
            s.1.push(binom_se(p, counts.samples));
        }
        fkg_ok &= r - Z95 * se <= 1.0;
        let (wb, ww) = (wilson(pt.count("b")?, counts.samples), wilson(pt.count("w")?, counts.samples));
        sym_ok &= wb.0 <= ww.1 && ww.0 <= wb.1;
        point_row(
            &mut t,
            vec![n.to_string(), counts.samples.to_string(), num(ps[0]), num(ps[1]), num(ps[2]), num(r), num(se), num(r - Z95 * se), num(r + Z95 * se)],
        );
        xs.push(n as f64);
        rs.push(r);
        r_ses.push(se);
    }
    let mut fits = BTreeMap::new();
    for (e, (ps, ses)) in &series {
        if let Some(f) = log_fit(e, &xs, ps, ses, &mut fits, &mut checks) {
            fit_row(&mut t, e, &f);
        }
    }
    checks.push(check("r_le_one", fkg_ok, "every r_n − 1.96·se ≤ 1".into()));
    checks.push(check("colour_symmetry", sym_ok, "Wilson intervals of p_b and p_w overlap at every n".into()));
    if let Some(f) = log_fit("r", &xs, &rs, &r_ses, &mut fits, &mut checks) {
        fit_row(&mut t, "r", &f);
        let (lo, hi) = f.slope_ci();
        checks.push(check("r_slope_negative", hi < 0.0, format!("slope {:.5}, CI [{lo:.5}, {hi:.5}]", f.slope)));
    }
    Ok(ctx.finish_owned(t, fits, checks))
}

pub(super) fn theorem2(ctx: &mut Ctx) -> Result<ExperimentOutput> {
    let grid = ctx.cfg.n_grid.clone();
    let mut t = table(&["n", "samples", "p_bw", "p_dis", "s", "s_se", "s_lo", "s_hi"]);
    let (mut xs, mut ss, mut s_ses) = (vec![], vec![], vec![]);
    let mut checks = vec![];
    let mut reimer_ok = true;
    for (i, &n) in grid.iter().enumerate() {
        let lat = ctx.lattice(n)?;
        let two = ArmSpec::TwoArmPoly { n }.compile(&lat)?;
        let dis = ArmSpec::DisjointTwoBlack { n }.compile(&lat)?;
        let counts = ctx.measure(i as u64, &["bw", "dis"], 0, |rng, ws, _| {
            let c = sample(&lat, rng);
            Outcome::from_flags(&[two.eval(&c, ws), dis.eval(&c, ws)])
        })?;
        let pt = record(ctx, &counts, params(&[("n", json!(n))]))?;
        let (s, se) = pt.estimate(&["dis", "bw"], ratio_fn)?;
        reimer_ok &= s - Z95 * se <= 1.0;
        point_row(
            &mut t,
            vec![
                n.to_string(),
                counts.samples.to_string(),
                num(pt.p("bw")?),
                num(pt.p("dis")?),
                num(s),
                num(se),
                num(s - Z95 * se),
                num(s + Z95 * se),
            ],
        );
        xs.push(n as f64);
        ss.push(s);
        s_ses.push(se);
    }
    let mut fits = BTreeMap::new();
    checks.push(check("s_le_one", reimer_ok, "every s_n − 1.96·se ≤ 1".into()));
    if let Some(f) = log_fit("s", &xs, &ss, &s_ses, &mut fits, &mut checks) {
        fit_row(&mut t, "s", &f);
        let (lo, hi) = f.slope_ci();
        checks.push(check("s_slope_negative", hi < 0.0, format!("slope {:.5}, CI [{lo:.5}, {hi:.5}]", f.slope)));
    }
    Ok(ctx.finish_owned(t, fits, checks))
}

/// [−λn/2, λn/2] × [−n/2, n/2].
fn centred_rect(lambda: f64, n: i64) -> Result<Rect> {
    let l = Ratio::<i64>::approximate_float(lambda)
        .ok_or_else(|| Error::InvalidParameter(format!("λ = {lambda} is not representable")))?;
    let half_w = l * coord(n) / coord(2);
    let half_h = coord(n) / coord(2);
    Rect::new(-half_w, half_w, -half_h, half_h)
}

pub(super) fn rsw(ctx: &mut Ctx) -> Result<ExperimentOutput> {
    let (lambdas, grid) = (ctx.cfg.lambdas.clone(), ctx.cfg.n_grid.clone());
    let mut t = table(&["lambda", "n", "samples", "p", "wilson_lo", "wilson_hi"]);
    let mut checks = vec![];
    let mut by_point: BTreeMap<(usize, i64), (f64, f64, f64)> = BTreeMap::new();
    let mut point = 0u64;
    for (li, &lambda) in lambdas.iter().enumerate() {
        for &n in &grid {
            let rect = centred_rect(lambda, n)?;
            let extent = (rect.x1.ceil().to_integer()).max(rect.y1.ceil().to_integer());
            let lat = ctx.lattice(extent)?;
            let det = ArmSpec::Crossing { rect, dir: Direction::LeftRight, colour: Colour::Black }.compile(&lat)?;
            let counts = ctx.measure(point, &["lr"], 0, |rng, ws, _| Outcome::from_flags(&[det.eval(&sample(&lat, rng), ws)]))?;
            point += 1;
            let pt = record(ctx, &counts, params(&[("lambda", json!(lambda)), ("n", json!(n))]))?;
            let (lo, hi) = wilson(pt.count("lr")?, counts.samples);
            let p = pt.p("lr")?;
            by_point.insert((li, n), (p, lo, hi));
            point_row(&mut t, vec![num(lambda), n.to_string(), counts.samples.to_string(), num(p), num(lo), num(hi)]);
        }
    }
    for (li, &lambda) in lambdas.iter().enumerate() {
        let ps: Vec<f64> = grid.iter().map(|&n| by_point[&(li, n)].0).collect();
        if lambda == 1.0 {
            let ok = ps.iter().all(|p| (0.4..=0.6).contains(p));
            checks.push(check("square_band", ok, format!("λ = 1 crossing estimates {ps:?} in [0.4, 0.6]")));
        }
        if lambda == 2.0 {
            let ok = ps.iter().all(|&p| p >= 0.1);
            checks.push(check("long_lower_bound", ok, format!("λ = 2 crossing estimates {ps:?} ≥ 0.1")));
        }
        let collapsed = ps.iter().any(|&p| p < 0.01);
        checks.push(check(&format!("no_collapse_lambda_{lambda}"), !collapsed, format!("min estimate {:.4}", ps.iter().cloned().fold(1.0, f64::min))));
    }
    let mut mono = true;
    for (li, &l1) in lambdas.iter().enumerate() {
        for (lj, &l2) in lambdas.iter().enumerate() {
            if l2 > l1 {
                for &n in &grid {
                    mono &= by_point[&(lj, n)].1 <= by_point[&(li, n)].2;
                }
            }
        }
    }
    checks.push(check("monotone_in_lambda", mono, "longer rectangles never cross significantly more often".into()));
    Ok(ctx.finish_owned(t, BTreeMap::new(), checks))
}

/// Geometric interpolation of α̂ at integer scale i from the measured scales.
fn interp_alpha(scales: &[i64], alphas: &[f64], i: i64) -> f64 {
    if let Some(j) = scales.iter().position(|&s| s == i) {
        return alphas[j];
    }
    let j = scales.iter().position(|&s| s > i).expect("scale within range");
    let (s0, s1) = (scales[j - 1] as f64, scales[j] as f64);
    let w = ((i as f64).ln() - s0.ln()) / (s1.ln() - s0.ln());
    (alphas[j - 1].ln() * (1.0 - w) + alphas[j].ln() * w).exp()
}

/// Σ_{i ≤ n} i·α̃_i / (n²·α̂_n).
fn weighted_sum_ratio(scales: &[i64], alphas: &[f64], n: i64) -> f64 {
    let sum: f64 = (1..=n).map(|i| i as f64 * interp_alpha(scales, alphas, i)).sum();
    sum / ((n * n) as f64 * interp_alpha(scales, alphas, n))
}

pub(super) fn four_arm(ctx: &mut Ctx) -> Result<ExperimentOutput> {
    let mut scales = ctx.cfg.scales.clone();
    scales.sort_unstable();
    scales.dedup();
    let pairs = ctx.cfg.pairs.clone();
    let sum_grid = ctx.cfg.sum_grid.clone();
    for &[k, n] in &pairs {
        if !(1 <= k && k < n) || !scales.contains(&k) || !scales.contains(&n) {
            return Err(Error::InvalidParameter(format!("pair ({k}, {n}) needs k < n with both in the scale list")));
        }
    }
    if !sum_grid.is_empty() && (scales.first() != Some(&1) || sum_grid.iter().any(|n| !scales.contains(n))) {
        return Err(Error::InvalidParameter("the Σ iα_i check needs scale 1 and every grid n among the scales".into()));
    }
    let top = *scales.last().ok_or_else(|| Error::InvalidParameter("empty scale list".into()))?;
    let lat = ctx.lattice(top)?;
    let mut names: Vec<String> = scales.iter().map(|s| format!("a{s}")).collect();
    let mut dets = Vec::new();
    for &s in &scales {
        dets.push(ArmSpec::FourArm { k: 0, n: s }.compile(&lat)?);
    }
    for &[k, n] in &pairs {
        names.push(format!("a{k}_{n}"));
        dets.push(ArmSpec::FourArm { k, n }.compile(&lat)?);
    }
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let counts = ctx.measure(0, &name_refs, 0, |rng, ws, _| {
        let c = sample(&lat, rng);
        let flags: Vec<bool> = dets.iter().map(|d| d.eval(&c, ws)).collect();
        Outcome::from_flags(&flags)
    })?;
    let pt = record(ctx, &counts, params(&[("lattice_n", json!(lat.n_max()))]))?;
    let mut t = table(&["quantity", "k", "n", "samples", "value", "se", "lo", "hi"]);
    let mut checks = vec![];
    let mut fits = BTreeMap::new();
    let mut alphas = vec![];
    for (s, name) in scales.iter().zip(&names) {
        let p = pt.p(name)?;
        let (lo, hi) = wilson(pt.count(name)?, counts.samples);
        alphas.push(p);
        ctx.chain.insert(format!("alpha_{s}"), p);
        point_row(&mut t, vec!["alpha".into(), "0".into(), s.to_string(), counts.samples.to_string(), num(p), num(binom_se(p, counts.samples)), num(lo), num(hi)]);
    }
    let (mut upper_ok, mut window_ok) = (true, true);
    for &[k, n] in &pairs {
        let ev = [format!("a{k}"), format!("a{k}_{n}"), format!("a{n}")];
        let evr: Vec<&str> = ev.iter().map(String::as_str).collect();
        let pa = pt.p(&ev[1])?;
        let (lo, hi) = wilson(pt.count(&ev[1])?, counts.samples);
        point_row(&mut t, vec!["alpha_annulus".into(), k.to_string(), n.to_string(), counts.samples.to_string(), num(pa), num(binom_se(pa, counts.samples)), num(lo), num(hi)]);
        let (q, qse) = pt.estimate(&evr, |p| p[0] * p[1] / p[2])?;
        let (inv, ise) = pt.estimate(&evr, |p| p[2] / (p[0] * p[1]))?;
        point_row(&mut t, vec!["qm".into(), k.to_string(), n.to_string(), counts.samples.to_string(), num(q), num(qse), num(q - Z95 * qse), num(q + Z95 * qse)]);
        point_row(&mut t, vec!["qm_inverse".into(), k.to_string(), n.to_string(), counts.samples.to_string(), num(inv), num(ise), num(inv - Z95 * ise), num(inv + Z95 * ise)]);
        upper_ok &= inv - Z95 * ise <= 1.0;
        window_ok &= inv >= 0.05 && inv <= 1.0 + Z95 * ise;
    }
    if !pairs.is_empty() {
        checks.push(check("qm_upper", upper_ok, "α̂_n ≤ α̂_k·α̂_{k,n} within CI for every pair".into()));
        checks.push(check("qm_window", window_ok, "α̂_n/(α̂_k·α̂_{k,n}) ∈ [0.05, 1 + CI] for every pair".into()));
    }
    let mut sum_ok = true;
    for &n in &sum_grid {
        let used: Vec<usize> = (0..scales.len()).filter(|&j| scales[j] <= n).collect();
        let sub_scales: Vec<i64> = used.iter().map(|&j| scales[j]).collect();
        let evs: Vec<&str> = used.iter().map(|&j| names[j].as_str()).collect();
        let (v, se) = pt.estimate(&evs, |p| weighted_sum_ratio(&sub_scales, p, n))?;
        sum_ok &= (0.2..=5.0).contains(&v);
        point_row(&mut t, vec!["weighted_sum".into(), "1".into(), n.to_string(), counts.samples.to_string(), num(v), num(se), num(v - Z95 * se), num(v + Z95 * se)]);
    }
    if !sum_grid.is_empty() {
        checks.push(check("sum_window", sum_ok, "Σ_{i≤n} i·α̂_i/(n²·α̂_n) ∈ [0.2, 5] for every grid n".into()));
    }
    let fit_idx: Vec<usize> = (0..scales.len()).filter(|&j| scales[j] >= 4).collect();
    if fit_idx.len() >= 3 {
        let xs: Vec<f64> = fit_idx.iter().map(|&j| scales[j] as f64).collect();
        let ps: Vec<f64> = fit_idx.iter().map(|&j| alphas[j]).collect();
        let ses: Vec<f64> = ps.iter().map(|&p| binom_se(p, counts.samples)).collect();
        if let Some(f) = log_fit("alpha", &xs, &ps, &ses, &mut fits, &mut checks) {
            fit_row(&mut t, "alpha", &f);
        }
    }
    Ok(ctx.finish_owned(t, fits, checks))
}

pub(super) fn noise_stability(ctx: &mut Ctx) -> Result<ExperimentOutput> {
    let grid = ctx.cfg.stability_grid.clone();
    let mut t = table(&["n", "samples", "alpha", "t_hat", "t1", "t2", "ratio1", "ratio1_se", "ratio2", "ratio2_se"]);
    let mut checks = vec![];
    let (mut bound_ok, mut mono_ok) = (true, true);
    let mut at_2t = vec![];
    for (i, &n) in grid.iter().enumerate() {
        let t1 = ctx.noise_t(n)?;
        let t2 = (2.0 * t1).min(1.0);
        let lat = ctx.lattice(n)?;
        let det = ArmSpec::FourArm { k: 0, n }.compile(&lat)?;
        let counts = ctx.measure(i as u64, &["s", "j1", "j2"], 0, |rng, ws, _| {
            let c = sample(&lat, rng);
            if !det.eval(&c, ws) {
                return Outcome::from_flags(&[false, false, false]);
            }
            let c1 = apply_noise(&c, t1, rng).expect("t in range");
            let c2 = apply_noise(&c, t2, rng).expect("t in range");
            Outcome::from_flags(&[true, det.eval(&c1, ws), det.eval(&c2, ws)])
        })?;
        let pt = record(ctx, &counts, params(&[("n", json!(n)), ("t1", json!(t1)), ("t2", json!(t2))]))?;
        let (r1, se1) = pt.estimate(&["j1", "s"], ratio_fn)?;
        let (r2, se2) = pt.estimate(&["j2", "s"], ratio_fn)?;
        bound_ok &= r2 >= 0.3;
        at_2t.push(format!("n = {n}: {r2:.4}"));
        mono_ok &= r1 - Z95 * se1 <= 1.0 && r2 - Z95 * se2 <= r1 + Z95 * se1;
        point_row(
            &mut t,
            vec![
                n.to_string(),
                counts.samples.to_string(),
                num(pt.p("s")?),
                num(ctx.chain.get(&format!("t_hat_{n}")).copied().unwrap_or(f64::NAN)),
                num(t1),
                num(t2),
                num(r1),
                num(se1),
                num(r2),
                num(se2),
            ],
        );
    }
    checks.push(check("ratio_at_2t", bound_ok, format!("P̂[ω, ω_t ∈ A]/α̂_n ≥ 0.3 at t = 2t̂_n; measured {}", at_2t.join(", "))));
    checks.push(check("decreasing_in_t", mono_ok, "1 ≥ ratio(t̂) ≥ ratio(2t̂) within CI".into()));
    Ok(ctx.finish_owned(t, BTreeMap::new(), checks))
}

pub(super) fn separation(ctx: &mut Ctx) -> Result<ExperimentOutput> {
    let grid = ctx.cfg.k_grid.clone();
    let mut t = table(&["k", "samples", "t", "phi", "phi_sep", "phi_static", "ratio", "ratio_se", "ratio_lo", "ratio_hi"]);
    let mut checks = vec![];
    let (mut xs, mut rs, mut ses) = (vec![], vec![], vec![]);
    for (i, &k) in grid.iter().enumerate() {
        let tk = ctx.noise_t(k)?;
        let lat = ctx.lattice(3 * k)?;
        let b = ArmSpec::OneArm { colour: Colour::Black, n: k }.compile(&lat)?;
        let w = ArmSpec::OneArm { colour: Colour::White, n: k }.compile(&lat)?;
        let sep = |colour| ArmSpec::Separated { colour, k, n: 3 * k, variant: SeparatedVariant::Short }.compile(&lat);
        let (sb, sw) = (sep(Colour::Black)?, sep(Colour::White)?);
        let counts = ctx.measure(i as u64, &["phi", "sep", "static"], 0, |rng, ws, _| {
            let c = sample(&lat, rng);
            let b0 = b.eval(&c, ws);
            let s0 = sb.eval(&c, ws);
            let st = b0 && w.eval(&c, ws);
            if !b0 && !s0 {
                return Outcome::from_flags(&[false, false, st]);
            }
            let ct = apply_noise(&c, tk, rng).expect("t in range");
            Outcome::from_flags(&[b0 && w.eval(&ct, ws), s0 && sw.eval(&ct, ws), st])
        })?;
        let pt = record(ctx, &counts, params(&[("k", json!(k)), ("t", json!(tk))]))?;
        let (r, se) = pt.estimate(&["sep", "phi"], ratio_fn)?;
        point_row(
            &mut t,
            vec![
                k.to_string(),
                counts.samples.to_string(),
                num(tk),
                num(pt.p("phi")?),
                num(pt.p("sep")?),
                num(pt.p("static")?),
                num(r),
                num(se),
                num(r - Z95 * se),
                num(r + Z95 * se),
            ],
        );
        xs.push(k as f64);
        rs.push(r);
        ses.push(se);
    }
    let min = rs.iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(check("ratio_lower_bound", min >= 0.01, format!("min φ̂^sep/φ̂ = {min:.5}")));
    let mut fits = BTreeMap::new();
    if xs.len() >= 3 {
        if let Some(f) = log_fit("ratio", &xs, &rs, &ses, &mut fits, &mut checks) {
            fit_row(&mut t, "ratio", &f);
            let (lo, hi) = f.slope_ci();
            checks.push(check("no_decreasing_trend", hi >= 0.0, format!("slope {:.5}, CI [{lo:.5}, {hi:.5}]", f.slope)));
        }
    } else {
        checks.push(check("no_decreasing_trend", false, "needs at least 3 scales".into()));
    }
    Ok(ctx.finish_owned(t, fits, checks))
}

fn cost_guard(ctx: &Ctx, what: &str, cost: f64) -> Result<()> {
    if cost > ctx.cfg.max_cost {
        return Err(Error::InvalidParameter(format!(
            "{what}: estimated cost {cost:.3e} exceeds max_cost {:.3e}",
            ctx.cfg.max_cost
        )));
    }
    Ok(())
}

/// Samples of the plan on which fast pivotals are compared with forced evaluations.
const FORCED_CHECKS: u64 = 3;

pub(super) fn pivotal_sum(ctx: &mut Ctx) -> Result<ExperimentOutput> {
    let points = ctx.cfg.pivotal_points.clone();
    let mut t = table(&["k", "n", "samples", "t", "annulus", "sum", "sum_se", "alpha_k", "phi", "ratio", "ratio_se", "sites_hit"]);
    let mut checks = vec![];
    let (mut ratio_ok, mut sign_ok, mut forced_ok) = (true, true, true);
    for (i, &[k, n]) in points.iter().enumerate() {
        if k < 1 || 10 * k > n {
            return Err(Error::InvalidParameter(format!("pivotal sum needs 10k ≤ n, got ({k}, {n})")));
        }
        let tk = ctx.noise_t(k)?;
        let lat = ctx.lattice(n)?;
        cost_guard(ctx, "pivotal_sum", ctx.cfg.samples as f64 * lat.len() as f64)?;
        let f = ArmSpec::OneArm { colour: Colour::Black, n }.compile(&lat)?;
        let g = ArmSpec::OneArm { colour: Colour::White, n }.compile(&lat)?;
        let four = ArmSpec::FourArm { k: 0, n: k }.compile(&lat)?;
        let annulus = lat.hexes_meeting(&Region::annulus(k, 3 * k)?)?;
        let ann_ids: Vec<u32> = annulus.iter().collect();
        let mut local = vec![u32::MAX; lat.len()];
        for (j, &id) in ann_ids.iter().enumerate() {
            local[id as usize] = j as u32;
        }
        let (fc, fch) = f.single_chain().expect("one-arm chain");
        let (gc, gch) = g.single_chain().expect("one-arm chain");
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            let c = sample(&lat, rng);
            let ct = apply_noise(&c, tk, rng).expect("t in range");
            (c, ct)
        };
        let counts = ctx.measure(i as u64, &["f", "phi", "alpha"], ann_ids.len(), |rng, ws, sites| {
            let (c, ct) = draw(rng);
            let fv = f.eval(&c, ws);
            let phi = fv && g.eval(&ct, ws);
            let alpha = four.eval(&c, ws);
            let pf = chain_pivotals(&lat, &c, fc, fch, ws).intersection(&annulus);
            let mut x = 0;
            if !pf.is_empty() {
                let both = chain_pivotals(&lat, &ct, gc, gch, ws).intersection(&pf);
                for id in both.iter() {
                    sites[local[id as usize] as usize] += 1;
                    x += 1;
                }
            }
            let mut o = Outcome::from_flags(&[fv, phi, alpha]);
            o.value = x;
            o
        })?;
        // Dual route: forced two-evaluation gradients on the first samples of the same streams.
        let plan = SamplePlan::for_point(ctx.cfg.seed, i as u64, FORCED_CHECKS.min(counts.samples), 1);
        let template = MultiCounts::new(&["agree", "signed"], 0);
        let forced = run_samples(plan, &template, &ctx.budget, "pivotal forced check", |rng, ws, _| {
            let (c, ct) = draw(rng);
            let pf = chain_pivotals(&lat, &c, fc, fch, ws);
            let pg = chain_pivotals(&lat, &ct, gc, gch, ws);
            let (mut agree, mut signed) = (true, true);
            for &id in &ann_ids {
                let df = forced_grad(&f, &c, id, ws);
                let dg = forced_grad(&g, &ct, id, ws);
                agree &= (df != 0) == pf.contains(id) && (dg != 0) == pg.contains(id);
                signed &= df >= 0 && dg <= 0;
            }
            Outcome::from_flags(&[agree, signed])
        })?;
        forced_ok &= forced.count(0) == forced.samples;
        sign_ok &= forced.count(1) == forced.samples;
        let nf = counts.samples as f64;
        let pt = record(ctx, &counts, params(&[("k", json!(k)), ("n", json!(n)), ("t", json!(tk))]))?;
        let pair_params = params(&[("k", json!(k)), ("n", json!(n)), ("t", json!(tk)), ("annulus", json!(ann_ids.len()))]);
        let trials = counts.samples * ann_ids.len() as u64;
        let sum_total = u64::try_from(counts.value_sum).map_err(|_| Error::InvalidParameter("pivotal count overflow".into()))?;
        ctx.records.push(EstimateRecord::new(&format!("{}/site_pairs", ctx.name), pair_params, sum_total, trials, counts.unknown, ctx.cfg.seed)?);
        let mean = counts.value_sum as f64 / nf;
        let var_x = (counts.value_sq_sum as f64 / nf - mean * mean).max(0.0) / nf;
        let (ia, ip) = (counts.index("alpha")?, counts.index("phi")?);
        let p = [mean, pt.p("alpha")?, pt.p("phi")?];
        let cov_p = pt.cov(&["alpha", "phi"])?;
        let cx = |j: usize, pj: f64| (counts.value_by_event[j] as f64 / nf - mean * pj) / nf;
        let cov = vec![
            vec![var_x, cx(ia, p[1]), cx(ip, p[2])],
            vec![cx(ia, p[1]), cov_p[0][0], cov_p[0][1]],
            vec![cx(ip, p[2]), cov_p[1][0], cov_p[1][1]],
        ];
        let kk = (k * k) as f64;
        let g_ratio = |q: &[f64]| q[0] / (kk * q[1] * q[2]);
        let ratio = g_ratio(&p);
        let ratio_se = delta_se(&p, &cov, g_ratio);
        let hit = counts.sites.iter().filter(|&&s| s > 0).count();
        ratio_ok &= ratio >= 0.01;
        ctx.chain.insert(format!("ratio_{k}_{n}"), ratio);
        point_row(
            &mut t,
            vec![
                k.to_string(),
                n.to_string(),
                counts.samples.to_string(),
                num(tk),
                ann_ids.len().to_string(),
                num(mean),
                num(var_x.sqrt()),
                num(p[1]),
                num(p[2]),
                num(ratio),
                num(ratio_se),
                hit.to_string(),
            ],
        );
    }
    checks.push(check("summands_nonnegative", sign_ok, "forced gradients satisfy ∇f ≥ 0 and ∇g ≤ 0 at every annulus hexagon".into()));
    checks.push(check("fast_matches_forced", forced_ok, format!("fast pivotal sets equal forced evaluations on {FORCED_CHECKS} samples per point")));
    checks.push(check("ratio_lower_bound", ratio_ok, "sum/(k²·α̂_k·φ̂_n(t)) ≥ 0.01 at every point".into()));
    Ok(ctx.finish_owned(t, BTreeMap::new(), checks))
}

pub(super) fn interlaced(ctx: &mut Ctx) -> Result<ExperimentOutput> {
    let grid = ctx.cfg.interlaced_grid.clone();
    let mut t = table(&["k", "samples", "t", "alpha", "joint", "union", "joint_ratio", "joint_ratio_se", "union_ratio", "union_ratio_se"]);
    let mut checks = vec![];
    let (mut jr, mut ur) = (vec![], vec![]);
    for (i, &k) in grid.iter().enumerate() {
        let tk = ctx.noise_t(k)?;
        let lat = ctx.lattice(7 * k)?;
        let il = Interlaced::new(&lat, k)?;
        cost_guard(ctx, "interlaced", ctx.cfg.samples as f64 * lat.len() as f64 * il.b_prime_hexes().count() as f64 / 16.0)?;
        let four = ArmSpec::FourArm { k: 0, n: k }.compile(&lat)?;
        let (x, y) = il.centre_pair()?;
        let counts = ctx.measure(i as u64, &["alpha", "joint", "union"], 0, |rng, ws, _| {
            let c = sample(&lat, rng);
            let ct = apply_noise(&c, tk, rng).expect("t in range");
            let o = il.outcome(&c, &ct, x, y, ws).expect("centres lie in the boxes");
            Outcome::from_flags(&[four.eval(&c, ws), o.joint, o.union])
        })?;
        let pt = record(ctx, &counts, params(&[("k", json!(k)), ("t", json!(tk))]))?;
        let (j, jse) = pt.estimate(&["joint", "alpha"], |p| p[0] / (p[1] * p[1]))?;
        let (u, use_) = pt.estimate(&["union", "alpha"], ratio_fn)?;
        jr.push(j);
        ur.push(u);
        point_row(
            &mut t,
            vec![
                k.to_string(),
                counts.samples.to_string(),
                num(tk),
                num(pt.p("alpha")?),
                num(pt.p("joint")?),
                num(pt.p("union")?),
                num(j),
                num(jse),
                num(u),
                num(use_),
            ],
        );
    }
    let positive = jr.iter().chain(&ur).all(|&r| r > 0.0 && r.is_finite());
    checks.push(check("ratios_positive", positive, format!("joint/α̂² = {jr:?}, union/α̂ = {ur:?}")));
    let spread = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
    let stable = positive && spread(&jr) <= 10.0 && spread(&ur) <= 10.0;
    checks.push(check("ratios_stable", stable, "max/min of each ratio across k ≤ 10".into()));
    Ok(ctx.finish_owned(t, BTreeMap::new(), checks))
}

pub(super) fn dynamic_disjoint(ctx: &mut Ctx) -> Result<ExperimentOutput> {
    let grid = ctx.cfg.dynamic_grid.clone();
    let budget = ctx.cfg.node_budget;
    let mut t = table(&["n", "samples", "unknown", "unknown_rate", "t", "psi", "psi_lo", "psi_hi", "b0", "b1"]);
    let mut checks = vec![];
    let mut valid = true;
    for (i, &n) in grid.iter().enumerate() {
        let tn = ctx.noise_t(n)?;
        let lat = ctx.lattice(n)?;
        cost_guard(ctx, "dynamic_disjoint", ctx.cfg.samples as f64 * budget as f64)?;
        let det = DynamicDisjoint::new(&lat, n, budget)?;
        let arm = ArmSpec::OneArm { colour: Colour::Black, n }.compile(&lat)?;
        let counts = ctx.measure(i as u64, &["psi", "b0", "b1"], 0, |rng, ws: &mut Workspace, _| {
            let c = sample(&lat, rng);
            let ct = apply_noise(&c, tn, rng).expect("t in range");
            let (b0, b1) = (arm.eval(&c, ws), arm.eval(&ct, ws));
            match det.eval(&c, &ct, ws).expect("same lattice") {
                Tri::Yes => Outcome::from_flags(&[true, b0, b1]),
                Tri::No => Outcome::from_flags(&[false, b0, b1]),
                Tri::Unknown => Outcome::unknown(),
            }
        })?;
        let pt = record(ctx, &counts, params(&[("n", json!(n)), ("t", json!(tn)), ("node_budget", json!(budget))]))?;
        let total = counts.samples + counts.unknown;
        let rate = counts.unknown as f64 / total.max(1) as f64;
        valid &= rate <= ctx.cfg.unknown_limit;
        let (lo, hi) = wilson(pt.count("psi")?, counts.samples);
        point_row(
            &mut t,
            vec![
                n.to_string(),
                counts.samples.to_string(),
                counts.unknown.to_string(),
                num(rate),
                num(tn),
                num(pt.p("psi")?),
                num(lo),
                num(hi),
                num(pt.p("b0")?),
                num(pt.p("b1")?),
            ],
        );
    }
    checks.push(check("unknown_rate", valid, format!("Unknown outcomes ≤ {} of samples", ctx.cfg.unknown_limit)));
    Ok(ctx.finish_owned(t, BTreeMap::new(), checks))
}
