//! One runner per subcommand. Each writes its tables, then `summary.json`
//! with the resolved scenario under `config`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use toda_kdv::actions::hill_action_targets;
use toda_kdv::asymptotics::{
    action_convergence, discriminant_convergence, edge_study, eigen_floor, kappa_convergence, quasimode_convergence,
    ActionStudy, ConvergenceReport, DiscriminantTarget, Edge, Sample,
};
use toda_kdv::hill::{build_hill, hill_spectrum, scaled_edge_values, EdgeSpectra, HillOperator, ScalingMode, Sign};
use toda_kdv::kdv::{conserved_quantities, kdv_evolve, spectral_distance, KdvState, PairFlow};
use toda_kdv::quasimodes::FourierSymbol;
use toda_kdv::toda::{build_jacobi, dense_spectrum, discriminant_roots};
use toda_kdv::PeriodicProfile;

use crate::error::CliError;
use crate::output::{Sink, Table};
use crate::row;
use crate::scenario::{EdgeSelection, Resolved};
use crate::Study;

type Res<T> = Result<T, CliError>;

pub fn run(r: &Resolved, sink: &mut Sink) -> Res<()> {
    log::info!("running {:?} with N_list {:?}", r.study, r.n_list);
    let body = match r.study {
        Study::Spectrum => spectrum(r, sink)?,
        Study::Hill => hill(r, sink)?,
        Study::Discriminant => discriminant(r, sink)?,
        Study::Actions => actions(r, sink)?,
        Study::Kdv => kdv(r, sink)?,
        Study::Quasimode => quasimode(r, sink)?,
        Study::Converge => converge(r, sink)?,
    };
    sink.summary(json!({ "study": r.study, "config": r, "results": body }))
}

fn edges(sel: EdgeSelection) -> Vec<Edge> {
    match sel {
        EdgeSelection::Bottom => vec![Edge::Bottom],
        EdgeSelection::Top => vec![Edge::Top],
        EdgeSelection::Both => vec![Edge::Bottom, Edge::Top],
    }
}

fn sign_label(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

fn report_json(rep: &ConvergenceReport) -> Value {
    json!({
        "slope": rep.slope(),
        "rate": rep.rate,
        "floor_limited": rep.floor_limited(),
        "terminal_error": rep.terminal_error(),
        "strictly_decreasing": rep.strictly_decreasing(),
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_profile(rng: &mut ChaCha8Rng, degree: usize, amp: f64) -> Res<PeriodicProfile> {
    let mut draw = || (0..degree).map(|_| rng.gen_range(-amp..=amp)).collect::<Vec<f64>>();
    let (c, s) = (draw(), draw());
    Ok(PeriodicProfile::from_fourier(0.0, c, s)?)
}

fn spectrum(r: &Resolved, sink: &mut Sink) -> Res<Value> {
    let mut per_n = Vec::new();
    for &n in &r.n_list {
        let j = build_jacobi(&r.alpha, &r.beta, n)?;
        let (dense, roots) = rayon::join(|| dense_spectrum(&j), || discriminant_roots(&j));
        let (dense, roots) = (dense?, roots?);
        dense.check_interlacing()?;
        let mut t = Table::new(&["j", "lambda"]);
        for (i, v) in dense.values.iter().enumerate() {
            t.push(row![i, *v]);
        }
        sink.table(&format!("spectrum_N{n}"), &t)?;
        per_n.push(json!({
            "N": n,
            "max_dual_difference": max_abs_diff(&dense.values, &roots.values),
            "kappa": j.kappa(),
            "eigen_tolerance": j.eigen_tolerance(),
        }));
    }
    let mut body = json!({ "spectra": per_n });
    if let Some(rp) = r.random {
        let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
        let cases = (0..rp.count)
            .map(|_| {
                Ok((
                    random_profile(&mut rng, rp.degree, rp.amplitude)?,
                    random_profile(&mut rng, rp.degree, rp.amplitude)?,
                ))
            })
            .collect::<Res<Vec<_>>>()?;
        let jobs: Vec<(usize, usize)> = (0..cases.len()).flat_map(|c| r.n_list.iter().map(move |&n| (c, n))).collect();
        let diffs = jobs
            .par_iter()
            .map(|&(c, n)| {
                let j = build_jacobi(&cases[c].0, &cases[c].1, n)?;
                Ok(max_abs_diff(&dense_spectrum(&j)?.values, &discriminant_roots(&j)?.values))
            })
            .collect::<Res<Vec<f64>>>()?;
        let mut t = Table::new(&["case", "N", "max_difference"]);
        for (&(c, n), d) in jobs.iter().zip(&diffs) {
            t.push(row![c, n, *d]);
        }
        sink.table("dual_solver", &t)?;
        body["dual_solver_max"] = json!(diffs.iter().copied().fold(0.0, f64::max));
    }
    Ok(body)
}

fn hill(r: &Resolved, sink: &mut Sink) -> Res<Value> {
    let modes = r.mode.modes();
    let count = r.hill_count;
    let mut out = serde_json::Map::new();
    for edge in edges(r.edge) {
        let sign = edge.sign();
        let h = build_hill(&r.alpha, &r.beta, sign);
        let spectra = EdgeSpectra::compute(&h, count)?;
        let per_mode = modes.iter().map(|&m| scaled_edge_values(&spectra, m, count)).collect::<Result<Vec<_>, _>>()?;
        let mut header = vec!["j".to_string(), "mu_combined".to_string()];
        header.extend(modes.iter().map(|m| format!("lambda_mode{}", m.label())));
        let mut t = Table::new(&header);
        for j in 0..count {
            let mut row = row![j, spectra.direct.combined[j]];
            row.extend(per_mode.iter().map(|v| v[j].into()));
            t.push(row);
        }
        sink.table(&format!("hill_{}", sign_label(sign)), &t)?;
        let mut gaps = Table::new(&["n", "left", "right", "width"]);
        for n in 1..=(count - 1) / 2 {
            let g = spectra.direct.gap(n)?;
            gaps.push(row![n, g.left, g.right, g.right - g.left]);
        }
        sink.table(&format!("hill_{}_gaps", sign_label(sign)), &gaps)?;
        out.insert(
            sign_label(sign).into(),
            json!({
                "galerkin_difference": max_abs_diff(&spectra.direct.combined, &spectra.direct.galerkin_combined),
                "potential": h.potential(),
            }),
        );
    }
    Ok(Value::Object(out))
}

fn discriminant(r: &Resolved, sink: &mut Sink) -> Res<Value> {
    let grid = r.grid.values();
    let mut out = serde_json::Map::new();
    for edge in edges(r.edge) {
        let study = discriminant_convergence(&r.alpha, &r.beta, &r.n_list, &grid, edge)?;
        let mut header = vec!["N".to_string(), "lambda".to_string(), "toda".to_string()];
        header.extend(DiscriminantTarget::ALL.iter().map(|t| format!("target_{}", t.label())));
        let mut pts = Table::new(&header);
        for p in &study.points {
            pts.push(row![p.n, p.lambda, p.toda, p.targets[0], p.targets[1], p.targets[2]]);
        }
        sink.table(&format!("discriminant_{}", edge.label()), &pts)?;
        sink.table(&format!("discriminant_{}_convergence", edge.label()), &discriminant_table(&study.reports))?;
        let reports: serde_json::Map<String, Value> =
            DiscriminantTarget::ALL.iter().map(|&t| (t.label().to_string(), report_json(study.report(t)))).collect();
        out.insert(edge.label().into(), Value::Object(reports));
    }
    Ok(Value::Object(out))
}

fn discriminant_table(reports: &[ConvergenceReport]) -> Table {
    let mut header = vec!["N".to_string()];
    header.extend(DiscriminantTarget::ALL.iter().map(|t| format!("error_{}", t.label())));
    let mut t = Table::new(&header);
    for i in 0..reports[0].samples.len() {
        let mut row = row![reports[0].samples[i].n];
        row.extend(reports.iter().map(|rep| rep.samples[i].error.into()));
        t.push(row);
    }
    t
}

/// Mode with the smallest summed score among those selected.
fn best_of(modes: &[ScalingMode], score: impl Fn(ScalingMode) -> f64) -> ScalingMode {
    *modes.iter().min_by(|a, b| score(**a).total_cmp(&score(**b))).expect("at least one mode")
}

fn action_section(r: &Resolved, sink: &mut Sink, study: &ActionStudy) -> Res<Value> {
    let modes = r.mode.modes();
    let mut t = Table::new(&["gap", "edge", "mode", "N", "value", "target", "error", "relative_error"]);
    let mut series = Vec::new();
    for s in study.series.iter().filter(|s| modes.contains(&s.mode)) {
        for (smp, a) in s.report.samples.iter().zip(study.samples.iter().filter(|a| a.gap == s.gap)) {
            let value = if s.edge == Edge::Bottom { a.bottom } else { a.top };
            t.push(row![
                s.gap,
                s.edge.label(),
                s.mode.label(),
                smp.n,
                value,
                s.target,
                smp.error,
                smp.error / s.target.abs()
            ]);
        }
        let mut j = report_json(&s.report);
        j["gap"] = json!(s.gap);
        j["edge"] = json!(s.edge.label());
        j["mode"] = json!(s.mode.label());
        j["target"] = json!(s.target);
        j["terminal_relative_error"] = json!(s.report.terminal_error() / s.target.abs());
        series.push(j);
    }
    sink.table("actions_convergence", &t)?;
    let best = best_of(&modes, |m| {
        study.series.iter().filter(|s| s.mode == m).map(|s| s.report.terminal_error() / s.target.abs()).sum()
    });
    Ok(json!({ "mode": best.label(), "series": series }))
}

fn actions(r: &Resolved, sink: &mut Sink) -> Res<Value> {
    let modes = r.mode.modes();
    let minus = build_hill(&r.alpha, &r.beta, Sign::Minus);
    let plus = build_hill(&r.alpha, &r.beta, Sign::Plus);
    let (tm, tp) = rayon::join(|| hill_action_targets(&minus, r.n_max), || hill_action_targets(&plus, r.n_max));
    let (tm, tp) = (tm?, tp?);
    let study = action_convergence(&r.alpha, &r.beta, &r.n_list, r.n_max)?;
    let study_body = action_section(r, sink, &study)?;
    let mut header = vec!["N".to_string(), "n".to_string(), "I_toda_scaled_bottom".to_string()];
    header.extend(modes.iter().map(|m| format!("target_minus_{}", m.label())));
    header.push("I_toda_scaled_top".into());
    header.extend(modes.iter().map(|m| format!("target_plus_{}", m.label())));
    let mut t = Table::new(&header);
    for s in &study.samples {
        let mut row = row![s.n, s.gap, s.bottom];
        row.extend(modes.iter().map(|&m| tm[s.gap - 1].get(m).into()));
        row.push(s.top.into());
        row.extend(modes.iter().map(|&m| tp[s.gap - 1].get(m).into()));
        t.push(row);
    }
    sink.table("actions", &t)?;
    Ok(study_body)
}

/// Evolves `u/scale` in snapshots and returns the physical profiles.
fn evolve_snapshots(u: &PeriodicProfile, scale: f64, r: &Resolved) -> Res<Vec<(f64, KdvState)>> {
    let mut s = KdvState::from_profile(&u.scale(scale), r.kdv.grid)?;
    let chunk = r.t_final / r.kdv.samples as f64;
    let mut out = vec![(0.0, s.clone())];
    for i in 1..=r.kdv.samples {
        s = kdv_evolve(&s, chunk, r.kdv.dt)?;
        out.push((chunk * i as f64, s.clone()));
    }
    Ok(out)
}

fn kdv(r: &Resolved, sink: &mut Sink) -> Res<Value> {
    let flow: PairFlow = r.flow.into();
    let scale = match flow {
        PairFlow::Literal => 1.0,
        PairFlow::EdgeScaled => 0.25,
    };
    let plus = r.alpha.combine(-2.0, &r.beta, -1.0);
    let minus = r.alpha.combine(-2.0, &r.beta, 1.0);
    let (sp, sm) = rayon::join(|| evolve_snapshots(&plus, scale, r), || evolve_snapshots(&minus, scale, r));
    let (sp, sm) = (sp?, sm?);
    let mut body = serde_json::Map::new();
    body.insert("evolved_scale".into(), json!(scale));
    let count = r.hill_count;
    for (sign, snaps) in [(Sign::Plus, &sp), (Sign::Minus, &sm)] {
        let mut t = Table::new(&["t", "m1", "m2", "h"]);
        // invariants of the field KdV actually evolves, u/4 for the edge-scaled flow
        let physical: Vec<_> = snaps.iter().map(|(t, s)| (*t, conserved_quantities(s))).collect();
        for (time, inv) in &physical {
            t.push(row![*time, inv.m1, inv.m2, inv.h]);
        }
        sink.table(&format!("kdv_{}", sign_label(sign)), &t)?;
        let i0 = physical[0].1;
        let drift = |f: fn(&toda_kdv::kdv::Invariants) -> f64| {
            physical.iter().map(|(_, i)| (f(i) - f(&i0)).abs()).fold(0.0, f64::max)
        };
        // the flow is isospectral for the operator it evolves
        let h0 = HillOperator::from_potential(snaps[0].1.to_profile()?, sign);
        let s0 = hill_spectrum(&h0, count)?;
        let hill_drift = snaps[1..]
            .par_iter()
            .map(|(_, s)| {
                let h = HillOperator::from_potential(s.to_profile()?, sign);
                Ok(max_abs_diff(&s0.combined, &hill_spectrum(&h, count)?.combined))
            })
            .collect::<Res<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        body.insert(
            sign_label(sign).into(),
            json!({
                "m1_drift": drift(|i| i.m1),
                "m2_drift": drift(|i| i.m2),
                "h_drift": drift(|i| i.h),
                "hill_spectrum_drift": hill_drift,
            }),
        );
    }
    let profiles = sp
        .iter()
        .zip(&sm)
        .map(|((t, up), (_, um))| {
            let (up, um) = (up.to_profile()?.scale(1.0 / scale), um.to_profile()?.scale(1.0 / scale));
            Ok((*t, um.combine(-0.25, &up, -0.25), um.combine(0.5, &up, -0.5)))
        })
        .collect::<Res<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (1..profiles.len()).flat_map(|i| r.n_list.iter().map(move |&n| (i, n))).collect();
    let drifts = jobs
        .par_iter()
        .map(|&(i, n)| Ok(spectral_distance(&r.alpha, &r.beta, &profiles[i].1, &profiles[i].2, n)?))
        .collect::<Res<Vec<f64>>>()?;
    let mut t = Table::new(&["t", "N", "max_drift"]);
    for (&(i, n), d) in jobs.iter().zip(&drifts) {
        t.push(row![profiles[i].0, n, *d]);
    }
    sink.table("drift", &t)?;
    let last = profiles.len() - 1;
    let samples = jobs
        .iter()
        .zip(&drifts)
        .filter(|((i, _), _)| *i == last)
        .map(|(&(_, n), &d)| Ok(Sample { n, error: d, floor: eigen_floor(&build_jacobi(&r.alpha, &r.beta, n)?) }))
        .collect::<Res<Vec<_>>>()?;
    body.insert("drift_at_t_final".into(), report_json(&ConvergenceReport::new(samples)));
    Ok(Value::Object(body))
}

fn quasimode(r: &Resolved, sink: &mut Sink) -> Res<Value> {
    let pairs: Vec<(i64, Complex64)> = r.mu.iter().map(|m| (m.l, Complex64::new(m.re, m.im))).collect();
    let mu = FourierSymbol::from_pairs(&pairs);
    let rep = quasimode_convergence(r.k, &mu, &r.alpha, &r.beta, &r.n_list)?;
    let mut t = Table::new(&["N", "k", "residual", "eps", "eps_cubed"]);
    for s in &rep.samples {
        let eps = 1.0 / (2 * s.n) as f64;
        t.push(row![s.n, r.k, s.error, eps, eps.powi(3)]);
    }
    sink.table("quasimode", &t)?;
    let mut body = report_json(&rep);
    // residual ~ ε^p with ε = 1/2N, so the ε-rate is minus the N-slope
    body["rate_in_eps"] = json!(rep.slope().map(|s| -s));
    Ok(body)
}

fn converge(r: &Resolved, sink: &mut Sink) -> Res<Value> {
    let modes = r.mode.modes();
    let study = edge_study(&r.alpha, &r.beta, &r.n_list)?;

    let mut header = vec!["N".to_string(), "edge".to_string(), "j".to_string(), "toda".to_string()];
    for m in &modes {
        header.push(format!("prediction_{}", m.label()));
        header.push(format!("error_{}", m.label()));
    }
    let mut t = Table::new(&header);
    for rep in &study.reports {
        for row in &rep.rows {
            let mut cells = row![rep.n, row.edge.label(), row.j, row.toda];
            for &m in &modes {
                cells.push(row.predictions[m as usize].into());
                cells.push(row.errors[m as usize].into());
            }
            t.push(cells);
        }
    }
    sink.table("edges", &t)?;

    let mut series = Table::new(&["edge", "j", "mode", "slope", "terminal_error", "floor_limited"]);
    for s in study.series.iter().filter(|s| modes.contains(&s.mode)) {
        series.push(row![
            s.edge.label(),
            s.j,
            s.mode.label(),
            s.report.slope().unwrap_or(f64::NAN),
            s.report.terminal_error(),
            s.report.floor_limited()
        ]);
    }
    sink.table("edge_series", &series)?;

    let best = best_of(&modes, |m| {
        study.series.iter().filter(|s| s.mode == m && s.j >= 1).map(|s| s.report.terminal_error()).sum()
    });
    // the worst slope over j ≥ 1 decides the verdict
    let best_series: Vec<_> = study.series.iter().filter(|s| s.mode == best && s.j >= 1).collect();
    let worst = best_series.iter().map(|s| s.report.slope().unwrap_or(f64::NAN)).fold(f64::NEG_INFINITY, f64::max);
    let edges_body = json!({
        "mode": best.label(),
        "slope": worst,
        "floor_limited": best_series.iter().any(|s| s.report.floor_limited()),
        "per_j": best_series.iter().map(|s| json!({"edge": s.edge.label(), "j": s.j, "slope": s.report.slope()})).collect::<Vec<_>>(),
    });

    let mut bulk = Table::new(&["N", "error", "floor_limited"]);
    for s in &study.bulk.samples {
        bulk.push(row![s.n, s.error, s.floor_limited()]);
    }
    sink.table("bulk", &bulk)?;

    let grid = r.grid.values();
    let mut disc = serde_json::Map::new();
    for edge in edges(r.edge) {
        let d = discriminant_convergence(&r.alpha, &r.beta, &r.n_list, &grid, edge)?;
        sink.table(&format!("discriminant_{}_convergence", edge.label()), &discriminant_table(&d.reports))?;
        let reports: serde_json::Map<String, Value> =
            DiscriminantTarget::ALL.iter().map(|&t| (t.label().to_string(), report_json(d.report(t)))).collect();
        disc.insert(edge.label().into(), Value::Object(reports));
    }

    let actions_body = action_section(r, sink, &action_convergence(&r.alpha, &r.beta, &r.n_list, r.n_max)?)?;

    let kappa = kappa_convergence(&r.alpha, &r.beta, &r.n_list)?;
    let mut kt = Table::new(&["N", "error"]);
    for s in &kappa.samples {
        kt.push(row![s.n, s.error]);
    }
    sink.table("kappa", &kt)?;

    Ok(json!({
        "edges": edges_body,
        "bulk": report_json(&study.bulk),
        "discriminant": disc,
        "actions": actions_body,
        "kappa": report_json(&kappa),
    }))
}
