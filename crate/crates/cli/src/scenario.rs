//! Scenario pipeline: integrate, check, write artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dyadic_core::diagnostics::{energy_report, flux_profile};
use dyadic_core::envelope::{
    bounding_sequence, envelope_dominates, product_bound_excess, summability_report, vanishing_report, BoundingSequence,
};
use dyadic_core::shell_model::reduce::shell_balance;
use dyadic_core::{integrate, integrate_averaged, BlowUp, Error, ModelParams, StepControl, Trajectory};
use serde_json::{json, Value};

use crate::checks::{is_blow_up, ladder_report, run_check, CheckContext, Verdict};
use crate::compare::{output_rows, shell_amplitudes};
use crate::config::ScenarioConfig;
use crate::plot::{render, Chart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    ChecksFailed,
    BlowUp,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::ChecksFailed => 2,
            Outcome::BlowUp => 3,
        }
    }

    fn status(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::ChecksFailed => "fail",
            Outcome::BlowUp => "blowup",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub name: String,
    pub dir: PathBuf,
    pub outcome: Outcome,
    pub verdicts: Vec<Verdict>,
    pub message: Option<String>,
}

/// Integrate the configured model with `shells` shells.
pub fn integrate_config(cfg: &ScenarioConfig, shells: usize, step: &StepControl) -> Result<Trajectory> {
    let p = cfg.params_with_shells(shells)?;
    let tr = if cfg.is_averaged() {
        integrate_averaged(&cfg.averaged_state(shells)?, &p, cfg.t_end, step)?
    } else {
        integrate(&cfg.scalar_state(shells)?, &p, cfg.t_end, step)?
    };
    Ok(tr)
}

fn blow_up_json(b: &BlowUp) -> Value {
    json!({
        "reason": format!("{:?}", b.reason),
        "t": b.t,
        "dt": b.dt,
        "accepted_steps": b.stats.accepted,
        "rejected_steps": b.stats.rejected,
        "state": b.state,
    })
}

fn blow_up_of(e: &anyhow::Error) -> Option<&BlowUp> {
    match e.downcast_ref::<Error>() {
        Some(Error::SuspectedBlowUp(b)) => Some(b),
        _ => None,
    }
}

/// Full pipeline for one scenario. Configuration and IO problems are errors;
/// check failures and blow-ups are outcomes with a report on disk.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunSummary> {
    let dir = cfg.output_dir();
    fs::create_dir_all(dir.join("plots")).with_context(|| format!("creating {}", dir.display()))?;
    let params = cfg.params()?;
    let x0 = cfg.x0.amplitudes(cfg.shells)?;
    let bounding = bounding_sequence(&x0, &params)?;

    let traj = match integrate_config(cfg, cfg.shells, &cfg.step) {
        Ok(t) => t,
        Err(e) => {
            let Some(b) = blow_up_of(&e) else { return Err(e) };
            let message = format!("{e:#}");
            let report = report_json(cfg, Outcome::BlowUp, None, &[], Some(blow_up_json(b)), &[]);
            write_json(&dir.join("report.json"), &report)?;
            return Ok(RunSummary {
                name: cfg.name.clone(),
                dir,
                outcome: Outcome::BlowUp,
                verdicts: vec![],
                message: Some(message),
            });
        }
    };

    let ctx = CheckContext { config: cfg, params: &params, traj: Some(&traj), bounding: &bounding };
    let mut verdicts = Vec::new();
    let mut blow_up = None;
    for &name in &cfg.checks {
        match run_check(name, &ctx) {
            Ok(v) => verdicts.push(v),
            Err(e) if is_blow_up(&e) => {
                blow_up = Some((name, e));
                break;
            }
            Err(e) => return Err(e),
        }
    }

    write_trajectory(&dir.join("trajectory.csv"), &traj)?;
    write_energy(&dir.join("energy.csv"), &traj)?;
    write_json(&dir.join("envelope.json"), &envelope_json(&ctx))?;
    write_plots(&dir.join("plots"), cfg, &params, &traj)?;

    let (outcome, blow_json, message) = match &blow_up {
        Some((name, e)) => {
            (Outcome::BlowUp, blow_up_of(e).map(blow_up_json), Some(format!("check `{}`: {e:#}", name.name())))
        }
        None if verdicts.iter().all(|v| v.pass) => (Outcome::Pass, None, None),
        None => (Outcome::ChecksFailed, None, None),
    };
    let report = report_json(cfg, outcome, Some(&traj), &verdicts, blow_json, &[]);
    write_json(&dir.join("report.json"), &report)?;
    Ok(RunSummary { name: cfg.name.clone(), dir, outcome, verdicts, message })
}

/// Static checks on the bounding sequence only; no integration.
pub fn run_envelope(cfg: &ScenarioConfig) -> Result<RunSummary> {
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let params = cfg.params()?;
    let bounding = bounding_sequence(&cfg.x0.amplitudes(cfg.shells)?, &params)?;
    let ctx = CheckContext { config: cfg, params: &params, traj: None, bounding: &bounding };
    let mut verdicts = Vec::new();
    let mut skipped = Vec::new();
    for &name in &cfg.checks {
        if name.needs_trajectory() {
            skipped.push(name.name());
        } else {
            verdicts.push(run_check(name, &ctx)?);
        }
    }
    write_json(&dir.join("envelope.json"), &envelope_json(&ctx))?;
    let outcome = if verdicts.iter().all(|v| v.pass) { Outcome::Pass } else { Outcome::ChecksFailed };
    write_json(&dir.join("report.json"), &report_json(cfg, outcome, None, &verdicts, None, &skipped))?;
    let message = (!skipped.is_empty()).then(|| format!("skipped (need a trajectory): {}", skipped.join(", ")));
    Ok(RunSummary { name: cfg.name.clone(), dir, outcome, verdicts, message })
}

/// `k, n_k, 2^{-sk} theta` and the ladder margin where it is defined.
pub fn subsequence_table(cfg: &ScenarioConfig) -> Result<String> {
    let params = cfg.params()?;
    let bounding = bounding_sequence(&cfg.x0.amplitudes(cfg.shells)?, &params)?;
    let ctx = CheckContext { config: cfg, params: &params, traj: None, bounding: &bounding };
    let (sub, report) = ladder_report(&ctx)?;
    let mut out = String::new();
    let _ = writeln!(out, "n0 = {}, theta = {}, s = {}", sub.n0, sub.theta, sub.s);
    let _ = writeln!(out, "{:>4}  {:>10}  {:>24}  {:>24}", "k", "n_k", "threshold", "sup y - 2^(-2sk)");
    for (k, level) in report.levels.iter().enumerate() {
        let threshold = (-sub.s * k as f64).exp2() * sub.theta;
        let margin = if level.beyond_truncation {
            format!("{:.6e} (tail)", -level.margin())
        } else {
            format!("{:.6e}", -level.margin())
        };
        let _ = writeln!(out, "{k:>4}  {:>10}  {threshold:>24.16e}  {margin:>24}", level.n_k);
    }
    Ok(out)
}

fn report_json(
    cfg: &ScenarioConfig,
    outcome: Outcome,
    traj: Option<&Trajectory>,
    verdicts: &[Verdict],
    blow_up: Option<Value>,
    skipped: &[&str],
) -> Value {
    json!({
        "scenario": cfg.name,
        "model": if cfg.is_averaged() { "averaged" } else { "scalar" },
        "beta": cfg.beta,
        "shells": cfg.shells,
        "t_end": cfg.t_end,
        "s": cfg.s,
        "g_family": cfg.g.name(),
        "status": outcome.status(),
        "steps": traj.map(|t| json!({
            "accepted": t.stats.accepted,
            "rejected": t.stats.rejected,
            "min_dt": t.stats.min_dt,
            "max_dt": t.stats.max_dt,
        })),
        "blowup": blow_up,
        "checks": verdicts,
        "skipped": skipped,
    })
}

fn envelope_json(ctx: &CheckContext) -> Value {
    let y: &BoundingSequence = ctx.bounding;
    let ladder = match ladder_report(ctx) {
        Ok((sub, report)) => json!({
            "n0": sub.n0,
            "theta": sub.theta,
            "s": sub.s,
            "n_k": sub.indices,
            "min_margin": report.min_margin(),
            "y_bounded_from_n0": report.y_bounded_from_n0,
            "levels": report.levels.iter().map(|l| json!({
                "k": l.k,
                "n_k": l.n_k,
                "sup_y": l.sup_y,
                "bound": l.bound,
                "margin": l.margin(),
                "beyond_truncation": l.beyond_truncation,
            })).collect::<Vec<_>>(),
        }),
        Err(e) => json!({ "error": format!("{e:#}") }),
    };
    let dominance = ctx.traj.map(|tr| {
        let d = envelope_dominates(tr, y, ctx.config.envelope.slack);
        json!({
            "checked": d.checked,
            "violation_count": d.violation_count,
            "max_excess": d.max_excess,
            "slack": d.slack,
            "violations": d.violations.iter().map(|v| json!({"t": v.t, "n": v.n, "value": v.value, "bound": v.bound})).collect::<Vec<_>>(),
        })
    });
    let sm = summability_report(y, ctx.config.s);
    let va = vanishing_report(y);
    json!({
        "y": y.y,
        "f": y.f,
        "c": y.c,
        "ladder": ladder,
        "dominance": dominance,
        "summability": {
            "total": sm.total,
            "last_quarter_share": sm.last_quarter_share,
            "c_decreasing": sm.c_decreasing,
        },
        "vanishing": { "max_y": va.max_y, "tail_max": va.tail_max, "ratio": va.ratio },
        "product_bound_excess": product_bound_excess(y),
    })
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Round-trip decimal: 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=traj.shells()).map(|n| format!("X{n}")));
    w.write_record(&header)?;
    for j in output_rows(traj) {
        let mut row = vec![num(traj.times[j])];
        row.extend(shell_amplitudes(traj, j).into_iter().map(num));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_energy(path: &Path, traj: &Trajectory) -> Result<()> {
    let r = energy_report(traj);
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["t", "E", "r", "sum_delta"])?;
    for j in output_rows(traj) {
        w.write_record([num(r.times[j]), num(r.energy[j]), num(r.residual[j]), num(r.dissipation[j])])?;
    }
    w.flush()?;
    Ok(())
}

fn write_plots(dir: &Path, cfg: &ScenarioConfig, params: &ModelParams, traj: &Trajectory) -> Result<()> {
    let rows = output_rows(traj);
    let r = energy_report(traj);
    let energy = vec![
        Series { label: "E(t)".into(), points: rows.iter().map(|&j| (r.times[j], r.energy[j])).collect() },
        Series { label: "sum D_n(t)".into(), points: rows.iter().map(|&j| (r.times[j], r.dissipation[j])).collect() },
    ];
    let chart = Chart { title: &format!("{}: energy", cfg.name), x_label: "t", y_label: "energy", log_y: true };
    fs::write(dir.join("energy.svg"), render(&chart, &energy))?;

    let picks = cfg.snapshots.max(1).min(rows.len());
    let spectrum: Vec<Series> = (0..picks)
        .map(|i| {
            let j = rows[if picks == 1 { rows.len() - 1 } else { i * (rows.len() - 1) / (picks - 1) }];
            let e = traj.shell_energies(j);
            Series {
                label: format!("t = {:.3}", traj.times[j]),
                points: e.iter().enumerate().map(|(n, v)| ((n + 1) as f64, *v)).collect(),
            }
        })
        .collect();
    let chart = Chart { title: &format!("{}: shell spectrum", cfg.name), x_label: "n", y_label: "X_n^2", log_y: true };
    fs::write(dir.join("spectrum.svg"), render(&chart, &spectrum))?;

    let last = traj.len() - 1;
    let flux: Vec<f64> = if traj.is_scalar() {
        flux_profile(&traj.shell_state(last), params)?.flux
    } else {
        let state = traj.averaged_state(last).context("averaged state")?;
        shell_balance(&state, params)?.outflow.iter().map(|v| 2.0 * v).collect()
    };
    let series = [Series {
        label: format!("t = {:.3}", traj.times[last]),
        points: flux.iter().enumerate().map(|(n, v)| ((n + 1) as f64, *v)).collect(),
    }];
    let chart = Chart { title: &format!("{}: energy flux", cfg.name), x_label: "n", y_label: "Pi_n", log_y: false };
    fs::write(dir.join("flux.svg"), render(&chart, &series))?;
    Ok(())
}

/// Run scenarios concurrently, one thread each.
pub fn run_batch(configs: &[ScenarioConfig]) -> Vec<Result<RunSummary>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs.iter().map(|cfg| scope.spawn(move || run_scenario(cfg))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("scenario thread panicked"))))
            .collect()
    })
}
