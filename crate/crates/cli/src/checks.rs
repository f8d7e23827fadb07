//! Named checks and their verdicts.

use anyhow::{anyhow, bail, Result};
use dyadic_core::diagnostics::{energy_report, smoothed_norm_sup, tao_audit, tao_quantities, CounterexampleG};
use dyadic_core::envelope::{
    adjacent_pair_growth, dn_recursion_audit, envelope_dominates, product_bound_excess, select_ladder_parameters,
    special_subsequence, summability_report, vanishing_report, verify_decay_ladder, BoundingSequence, LadderReport,
    SpecialSubsequence,
};
use dyadic_core::integrator::picard_local_solve_with;
use dyadic_core::shell_model::reduce::{reduce_averaged_to_scalar, step_identity_residuals};
use dyadic_core::{integrate, GFamily, ModelParams, StepControl, Trajectory};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::scenario::integrate_config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckName {
    EnergyEquality,
    EnergyInequality,
    Envelope,
    DnRecursion,
    DecayLadder,
    AdjacentPairs,
    Summability,
    Vanishing,
    ProductBound,
    Picard,
    Reduction,
    Smoothing,
    Tao,
    Counterexample,
    Galerkin,
    Tolerance,
}

/// Which model a check accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applies {
    Any,
    ScalarOnly,
    AveragedOnly,
}

pub const REGISTRY: &[(&str, CheckName)] = &[
    ("energy_equality", CheckName::EnergyEquality),
    ("energy_inequality", CheckName::EnergyInequality),
    ("envelope", CheckName::Envelope),
    ("dn_recursion", CheckName::DnRecursion),
    ("decay_ladder", CheckName::DecayLadder),
    ("adjacent_pairs", CheckName::AdjacentPairs),
    ("summability", CheckName::Summability),
    ("vanishing", CheckName::Vanishing),
    ("product_bound", CheckName::ProductBound),
    ("picard", CheckName::Picard),
    ("reduction", CheckName::Reduction),
    ("smoothing", CheckName::Smoothing),
    ("tao", CheckName::Tao),
    ("counterexample", CheckName::Counterexample),
    ("galerkin", CheckName::Galerkin),
    ("tolerance", CheckName::Tolerance),
];

impl CheckName {
    pub fn lookup(name: &str) -> Option<CheckName> {
        REGISTRY.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
    }

    pub fn name(self) -> &'static str {
        REGISTRY.iter().find(|(_, c)| *c == self).map(|(n, _)| *n).unwrap()
    }

    /// Checks that read the integrated trajectory.
    pub fn needs_trajectory(self) -> bool {
        !matches!(
            self,
            CheckName::DecayLadder
                | CheckName::AdjacentPairs
                | CheckName::Summability
                | CheckName::Vanishing
                | CheckName::ProductBound
                | CheckName::Counterexample
        )
    }

    pub fn applies(self) -> Applies {
        match self {
            CheckName::EnergyEquality
            | CheckName::EnergyInequality
            | CheckName::Galerkin
            | CheckName::Tolerance
            | CheckName::DecayLadder
            | CheckName::AdjacentPairs
            | CheckName::Summability
            | CheckName::Vanishing
            | CheckName::ProductBound
            | CheckName::Counterexample => Applies::Any,
            CheckName::Reduction => Applies::AveragedOnly,
            _ => Applies::ScalarOnly,
        }
    }
}

/// Outcome of one check. `measured` is compared against `bound + slack`
/// unless `detail` says otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    pub detail: String,
}

impl Verdict {
    fn upper(name: CheckName, measured: f64, bound: f64, slack: f64, detail: String) -> Self {
        Verdict { name: name.name().into(), pass: measured <= bound + slack, measured, bound, slack, detail }
    }

    fn failed(name: CheckName, detail: String) -> Self {
        Verdict { name: name.name().into(), pass: false, measured: f64::NAN, bound: f64::NAN, slack: 0.0, detail }
    }
}

/// Everything a check may look at.
pub struct CheckContext<'a> {
    pub config: &'a ScenarioConfig,
    pub params: &'a ModelParams,
    pub traj: Option<&'a Trajectory>,
    pub bounding: &'a BoundingSequence,
}

/// Ladder parameters from the config, or selected from the data.
pub fn ladder_subsequence(ctx: &CheckContext) -> Result<SpecialSubsequence> {
    let cfg = ctx.config;
    let (n0, theta) = match (cfg.envelope.n0, cfg.envelope.theta) {
        (Some(n0), Some(theta)) => (n0, theta),
        (n0, theta) => {
            let lp = select_ladder_parameters(ctx.bounding, cfg.s)?;
            (n0.unwrap_or(lp.n0), theta.unwrap_or(lp.theta))
        }
    };
    let g = cfg.g.table(cfg.beta, cfg.envelope.table_len)?;
    Ok(special_subsequence(&g, n0, theta, cfg.s, cfg.envelope.levels)?)
}

pub fn ladder_report(ctx: &CheckContext) -> Result<(SpecialSubsequence, LadderReport)> {
    let sub = ladder_subsequence(ctx)?;
    let report = verify_decay_ladder(ctx.bounding, &sub)?;
    Ok((sub, report))
}

/// Run one check. Blow-ups in auxiliary integrations are returned as
/// errors; every other failure becomes a failing verdict.
pub fn run_check(name: CheckName, ctx: &CheckContext) -> Result<Verdict> {
    match evaluate(name, ctx) {
        Ok(v) => Ok(v),
        Err(e) if is_blow_up(&e) => Err(e),
        Err(e) => Ok(Verdict::failed(name, format!("{e:#}"))),
    }
}

pub fn is_blow_up(e: &anyhow::Error) -> bool {
    matches!(e.downcast_ref::<dyadic_core::Error>(), Some(dyadic_core::Error::SuspectedBlowUp(_)))
}

fn trajectory<'a>(ctx: &CheckContext<'a>) -> Result<&'a Trajectory> {
    ctx.traj.ok_or_else(|| anyhow!("needs an integrated trajectory"))
}

fn evaluate(name: CheckName, ctx: &CheckContext) -> Result<Verdict> {
    let cfg = ctx.config;
    let set = &cfg.settings;
    Ok(match name {
        CheckName::EnergyEquality => {
            let r = energy_report(trajectory(ctx)?);
            let detail = format!("max |r| = {:e}, E(0) = {:e}", r.max_abs_residual, r.energy[0]);
            Verdict::upper(name, r.relative_residual(), set.energy_tol, 0.0, detail)
        }
        CheckName::EnergyInequality => {
            let r = energy_report(trajectory(ctx)?);
            let e0 = r.energy[0].max(cfg.step.atol);
            let worst = r.residual.iter().copied().fold(f64::NEG_INFINITY, f64::max) / e0;
            Verdict::upper(name, worst, 0.0, set.energy_tol, "max r(t) / E(0)".into())
        }
        CheckName::Envelope => {
            let d = envelope_dominates(trajectory(ctx)?, ctx.bounding, cfg.envelope.slack);
            let detail = format!("{} violations over {} comparisons", d.violation_count, d.checked);
            let mut v = Verdict::upper(name, d.violation_count as f64, 0.0, 0.0, detail);
            v.slack = cfg.envelope.slack;
            v.pass = d.holds();
            v
        }
        CheckName::DnRecursion => {
            let a = dn_recursion_audit(trajectory(ctx)?)?;
            let detail = format!("max d_n^2 / d_1^2(0) excess {:e}", a.max_over_initial);
            Verdict::upper(name, a.max_excess, 0.0, set.dn_slack, detail)
        }
        CheckName::DecayLadder => {
            let (sub, report) = ladder_report(ctx)?;
            let ratio = report.levels.iter().map(|l| l.sup_y / l.bound).fold(0.0, f64::max);
            let detail = format!("n0 = {}, theta = {}, n_k = {:?}", sub.n0, sub.theta, sub.indices);
            let mut v = Verdict::upper(name, ratio, 1.0, 0.0, detail);
            v.pass = report.holds();
            v
        }
        CheckName::AdjacentPairs => {
            let e = &cfg.envelope;
            let len = e.table_len;
            let g = cfg.g.table(cfg.beta, len)?;
            let r = adjacent_pair_growth(
                &g,
                cfg.g.reciprocal_sum_diverges(),
                e.pair_n0,
                e.pair_theta,
                e.pair_s,
                &e.pair_levels,
            )?;
            let last = r.counts.last().and_then(|c| c.1).map_or(f64::NAN, |c| c as f64);
            let detail = format!("{}; counts {:?}", r.message, r.counts);
            Verdict { name: name.name().into(), pass: r.pass(), measured: last, bound: 1.0, slack: 0.0, detail }
        }
        CheckName::Summability => {
            let r = summability_report(ctx.bounding, cfg.s);
            let detail = format!("c decreasing across decades: {}", r.c_decreasing);
            let mut v = Verdict::upper(name, r.last_quarter_share, set.summability_share, 0.0, detail);
            v.pass = r.last_quarter_share < set.summability_share && r.c_decreasing;
            v
        }
        CheckName::Vanishing => {
            let r = vanishing_report(ctx.bounding);
            let detail = format!("max y = {:e}, tail max = {:e}", r.max_y, r.tail_max);
            Verdict::upper(name, r.ratio, set.vanishing_ratio, 0.0, detail)
        }
        CheckName::ProductBound => {
            let excess = product_bound_excess(ctx.bounding);
            Verdict::upper(name, excess, 0.0, set.product_slack, "relative excess over the product bound".into())
        }
        CheckName::Picard => picard_check(ctx)?,
        CheckName::Reduction => {
            let tr = trajectory(ctx)?;
            let balances = reduce_averaged_to_scalar(&tr.averaged_states(), ctx.params)?;
            let worst = step_identity_residuals(&balances).into_iter().fold(0.0, f64::max);
            Verdict::upper(name, worst, set.reduction_tol, 0.0, format!("{} steps", balances.len() - 1))
        }
        CheckName::Smoothing => {
            let tr = trajectory(ctx)?;
            let s2 = set.smoothing_s2.unwrap_or(1.25 * cfg.s);
            let coarse = smoothed_norm_sup(tr, cfg.s, s2)?;
            let fine_tr = integrate_config(cfg, 2 * cfg.shells, &cfg.step)?;
            let fine = smoothed_norm_sup(&fine_tr, cfg.s, s2)?;
            let rel = (fine.sup - coarse.sup).abs() / coarse.sup;
            let detail = format!(
                "sup = {:.6} at t = {} (N = {}), {:.6} (N = {})",
                coarse.sup,
                coarse.t_at_sup,
                cfg.shells,
                fine.sup,
                2 * cfg.shells
            );
            let mut v = Verdict::upper(name, rel, set.smoothing_rel, 0.0, detail);
            v.pass &= coarse.sup.is_finite() && fine.sup.is_finite();
            v
        }
        CheckName::Tao => {
            let tr = trajectory(ctx)?;
            let mut worst = 0.0_f64;
            for &j in &tr.sample_indices {
                let q = tao_quantities(&tr.shell_state(j), ctx.params, cfg.s)?;
                let a = tao_audit(&q, ctx.params);
                worst = worst.max(a.l_ratio).max(a.h_ratio);
            }
            Verdict::upper(name, worst, 1.0, set.tao_slack, "largest L and H ratio to their bounds".into())
        }
        CheckName::Counterexample => {
            let GFamily::Counterexample { n1, levels } = cfg.g else {
                bail!("needs the counterexample g family");
            };
            let c = CounterexampleG::build(cfg.beta, n1, levels)?;
            let ratios = c.plateau_ratios();
            let worst = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
            Verdict::upper(name, worst, 0.0, 0.0, format!("n g_n / k_n at plateau starts: {ratios:?}"))
        }
        CheckName::Galerkin => {
            if cfg.step.sample_dt.is_none() {
                bail!("needs [step] sample_dt so both truncations share sample times");
            }
            let tr = trajectory(ctx)?;
            let fine = integrate_config(cfg, 2 * cfg.shells, &cfg.step)?;
            let a = crate::compare::RunTables::from_trajectory(tr, cfg.is_averaged());
            let b = crate::compare::RunTables::from_trajectory(&fine, cfg.is_averaged());
            let d = crate::compare::compare_runs(&a, &b)?;
            let detail = format!("N = {} vs {} over {} common times", cfg.shells, 2 * cfg.shells, d.common_times);
            Verdict::upper(name, d.energy_sup, set.galerkin_tol, 0.0, detail)
        }
        CheckName::Tolerance => {
            let tr = trajectory(ctx)?;
            let half = StepControl { rtol: cfg.step.rtol / 2.0, atol: cfg.step.atol / 2.0, ..cfg.step };
            let fine = integrate_config(cfg, cfg.shells, &half)?;
            let a = crate::compare::RunTables::from_trajectory(tr, cfg.is_averaged());
            let b = crate::compare::RunTables::from_trajectory(&fine, cfg.is_averaged());
            let d = crate::compare::compare_runs(&a, &b)?;
            let detail = format!("final-state l2 difference at t = {}", d.final_time);
            Verdict::upper(name, d.final_l2, cfg.step.rtol, 0.0, detail)
        }
    })
}

/// Picard iterate against the adaptive integrator on `[0, eta]`.
fn picard_check(ctx: &CheckContext) -> Result<Verdict> {
    let cfg = ctx.config;
    let set = &cfg.settings;
    let x0 = cfg.scalar_state(cfg.shells)?;
    let sol = picard_local_solve_with(&x0, ctx.params, &set.picard)?;
    let pieces = 16;
    if !set.picard.grid_intervals.is_multiple_of(pieces) {
        bail!("Picard grid must be divisible by {pieces}");
    }
    let ctrl = StepControl {
        rtol: cfg.step.rtol.min(1e-10),
        atol: cfg.step.atol.min(1e-14),
        dt_init: cfg.step.dt_init.min(1e-6),
        sample_dt: Some(sol.eta / pieces as f64),
        ..cfg.step
    };
    let tr = integrate(&x0, ctx.params, sol.eta, &ctrl)?;
    let stride = set.picard.grid_intervals / pieces;
    let mut worst = 0.0_f64;
    for (k, &j) in tr.sample_indices.iter().enumerate() {
        let picard = &sol.values[(k * stride).min(sol.values.len() - 1)];
        let d: f64 = tr.states[j].iter().zip(picard).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        worst = worst.max(d);
    }
    let rate_ok = sol.contraction_rate <= set.picard.theta + set.picard_rate_slack;
    let detail = format!(
        "eta = {:e}, {} iterations, contraction rate {:.4} (limit {})",
        sol.eta,
        sol.iterations,
        sol.contraction_rate,
        set.picard.theta + set.picard_rate_slack
    );
    let mut v = Verdict::upper(CheckName::Picard, worst, set.picard_tol, 0.0, detail);
    v.pass &= rate_ok;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trip() {
        for (n, c) in REGISTRY {
            assert_eq!(CheckName::lookup(n), Some(*c));
            assert_eq!(c.name(), *n);
        }
        assert_eq!(CheckName::lookup("nope"), None);
    }
}
