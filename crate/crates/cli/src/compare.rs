//! Differences between two runs at their common sample times.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dyadic_core::Trajectory;
use serde::Serialize;

/// Sampled tables of one run: shell amplitudes and total energy.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTables {
    pub averaged: bool,
    pub times: Vec<f64>,
    pub shells: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
}

/// Rows that go to disk: the sample grid when one is set, otherwise every
/// accepted step.
pub fn output_rows(traj: &Trajectory) -> Vec<usize> {
    if traj.control.sample_dt.is_some() {
        traj.sample_indices.clone()
    } else {
        (0..traj.len()).collect()
    }
}

/// `X_n` for the scalar model, `sqrt(sum_i X_{i,n}^2)` for the averaged one.
pub fn shell_amplitudes(traj: &Trajectory, j: usize) -> Vec<f64> {
    if traj.is_scalar() {
        traj.states[j].clone()
    } else {
        traj.shell_energies(j).into_iter().map(f64::sqrt).collect()
    }
}

impl RunTables {
    pub fn from_trajectory(traj: &Trajectory, averaged: bool) -> Self {
        let rows = output_rows(traj);
        RunTables {
            averaged,
            times: rows.iter().map(|&j| traj.times[j]).collect(),
            shells: rows.iter().map(|&j| shell_amplitudes(traj, j)).collect(),
            energy: rows.iter().map(|&j| traj.energy(j)).collect(),
        }
    }

    /// Read `trajectory.csv` and `energy.csv` next to a `report.json`.
    pub fn load(report: &Path) -> Result<Self> {
        let dir = report.parent().unwrap_or(Path::new("."));
        let text = std::fs::read_to_string(report).with_context(|| format!("reading {}", report.display()))?;
        let json: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", report.display()))?;
        let averaged = json["model"].as_str() == Some("averaged");

        let mut times = Vec::new();
        let mut shells = Vec::new();
        for row in read_rows(&dir.join("trajectory.csv"))? {
            times.push(row[0]);
            shells.push(row[1..].to_vec());
        }
        let energy_rows = read_rows(&dir.join("energy.csv"))?;
        if energy_rows.len() != times.len() || energy_rows.iter().zip(&times).any(|(r, t)| r[0] != *t) {
            bail!("energy.csv and trajectory.csv in {} do not share rows", dir.display());
        }
        let energy = energy_rows.iter().map(|r| r[1]).collect();
        Ok(RunTables { averaged, times, shells, energy })
    }
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            rec.iter()
                .map(|v| v.parse::<f64>().with_context(|| format!("bad number {v:?} in {}", path.display())))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub common_times: usize,
    /// `sup_t |X_n^a - X_n^b|`; the shorter run is padded with zeros.
    pub shell_sup: Vec<f64>,
    pub energy_sup: f64,
    pub final_time: f64,
    /// l2 norm of the state difference at the last common time.
    pub final_l2: f64,
}

impl Divergence {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "common sample times  {}", self.common_times);
        let _ = writeln!(out, "{:>6}  {:>24}", "shell", "sup |dX_n|");
        for (n, d) in self.shell_sup.iter().enumerate() {
            let _ = writeln!(out, "{:>6}  {:>24.16e}", n + 1, d);
        }
        let _ = writeln!(out, "{:>6}  {:>24.16e}", "E", self.energy_sup);
        let _ = writeln!(out, "final state l2 difference at t = {}: {:.16e}", self.final_time, self.final_l2);
        out
    }
}

/// Shellwise and energy sup differences over the times both runs sampled.
pub fn compare_runs(a: &RunTables, b: &RunTables) -> Result<Divergence> {
    if a.averaged != b.averaged {
        bail!("cannot compare a scalar run with an averaged run");
    }
    let width = a.shells.first().map_or(0, Vec::len).max(b.shells.first().map_or(0, Vec::len));
    let mut shell_sup = vec![0.0_f64; width];
    let mut energy_sup = 0.0_f64;
    let mut last = None;
    let mut common = 0;
    let (mut i, mut j) = (0, 0);
    while i < a.times.len() && j < b.times.len() {
        if a.times[i] < b.times[j] {
            i += 1;
        } else if b.times[j] < a.times[i] {
            j += 1;
        } else {
            for (n, sup) in shell_sup.iter_mut().enumerate() {
                let d = shell(&a.shells[i], n) - shell(&b.shells[j], n);
                *sup = sup.max(d.abs());
            }
            energy_sup = energy_sup.max((a.energy[i] - b.energy[j]).abs());
            last = Some((i, j));
            common += 1;
            i += 1;
            j += 1;
        }
    }
    let Some((i, j)) = last else { bail!("the runs share no sample times") };
    let final_l2 =
        (0..width).map(|n| shell(&a.shells[i], n) - shell(&b.shells[j], n)).map(|d| d * d).sum::<f64>().sqrt();
    Ok(Divergence { common_times: common, shell_sup, energy_sup, final_time: a.times[i], final_l2 })
}

fn shell(row: &[f64], n: usize) -> f64 {
    row.get(n).copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables(times: &[f64], rows: &[&[f64]]) -> RunTables {
        RunTables {
            averaged: false,
            times: times.to_vec(),
            shells: rows.iter().map(|r| r.to_vec()).collect(),
            energy: rows.iter().map(|r| r.iter().map(|v| v * v).sum()).collect(),
        }
    }

    #[test]
    fn identical_runs_give_zero_table() {
        let a = tables(&[0.0, 0.5, 1.0], &[&[1.0, 0.0, 0.0], &[0.8, 0.1, 0.0], &[0.6, 0.2, 0.01]]);
        let d = compare_runs(&a, &a).unwrap();
        assert_eq!(d.common_times, 3);
        assert!(d.shell_sup.iter().all(|v| *v == 0.0));
        assert_eq!((d.energy_sup, d.final_l2), (0.0, 0.0));
    }

    #[test]
    fn pads_and_matches_times() {
        let a = tables(&[0.0, 1.0], &[&[1.0, 0.0], &[0.5, 0.5]]);
        let b = tables(&[0.0, 0.5, 1.0], &[&[1.0, 0.0, 0.0], &[0.7, 0.3, 0.1], &[0.5, 0.5, 0.25]]);
        let d = compare_runs(&a, &b).unwrap();
        assert_eq!(d.common_times, 2);
        assert_eq!(d.shell_sup, vec![0.0, 0.0, 0.25]);
        assert_eq!(d.final_l2, 0.25);
    }

    #[test]
    fn mismatches_are_errors() {
        let a = tables(&[0.0], &[&[1.0]]);
        let mut b = tables(&[0.5], &[&[1.0]]);
        assert!(compare_runs(&a, &b).is_err());
        b.times[0] = 0.0;
        b.averaged = true;
        assert!(compare_runs(&a, &b).is_err());
    }
}
