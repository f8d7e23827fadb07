use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::BoundingSequence;
use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// Indices `n_0 < n_1 < ... < n_K` where the partial sums of `1/g_j`,
/// restarted after each index, first reach `2^{-sk} theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialSubsequence {
    pub n0: usize,
    pub theta: f64,
    pub s: f64,
    pub indices: Vec<usize>,
}

impl SpecialSubsequence {
    /// Number of constructed levels `K`.
    pub fn levels(&self) -> usize {
        self.indices.len() - 1
    }
}

/// Build `K` levels of the special subsequence from `g` (`g[0] = g_1`).
pub fn special_subsequence(g: &[f64], n0: usize, theta: f64, s: f64, levels: usize) -> Result<SpecialSubsequence> {
    if n0 == 0 {
        return Err(Error::InvalidParameter { name: "n0", reason: "shells are numbered from 1" });
    }
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::InvalidParameter { name: "theta", reason: "must be positive" });
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter { name: "s", reason: "must be positive" });
    }
    if g.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter { name: "g", reason: "must be positive" });
    }
    let mut indices = vec![n0];
    let mut current = n0;
    for k in 0..levels {
        let threshold = libm::exp2(-s * k as f64) * theta;
        let mut acc = NeumaierSum::new();
        let mut n = current + 2;
        loop {
            if n > g.len() {
                return Err(Error::SubsequenceExhausted { level_reached: k, requested: levels });
            }
            acc.add(1.0 / g[n - 1]);
            if acc.value() >= threshold {
                break;
            }
            n += 1;
        }
        indices.push(n);
        current = n;
    }
    Ok(SpecialSubsequence { n0, theta, s, indices })
}

/// Number of `k < K` with `n_{k+1} = n_k + 2`.
pub fn count_adjacent_pairs(sub: &SpecialSubsequence) -> usize {
    sub.indices.windows(2).filter(|w| w[1] == w[0] + 2).count()
}

/// Whether the divergence of `sum 1/g_n` holds for the family in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    Holds,
    Violated,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjacentPairsReport {
    /// `(K, count)`; `None` when the table ran out before level `K`.
    pub counts: Vec<(usize, Option<usize>)>,
    pub monotone: bool,
    pub at_least_one: bool,
    pub exhausted_at: Option<usize>,
    pub hypothesis: Hypothesis,
    pub message: String,
}

impl AdjacentPairsReport {
    pub fn pass(&self) -> bool {
        self.hypothesis != Hypothesis::Violated && self.exhausted_at.is_none() && self.monotone && self.at_least_one
    }
}

/// Count adjacent pairs for every `K` in `ks` and check that the count grows.
/// `diverges` states whether `sum 1/g_n` diverges for the family, if known.
pub fn adjacent_pair_growth(
    g: &[f64],
    diverges: Option<bool>,
    n0: usize,
    theta: f64,
    s: f64,
    ks: &[usize],
) -> Result<AdjacentPairsReport> {
    let mut counts = Vec::with_capacity(ks.len());
    let mut exhausted_at = None;
    for &k in ks {
        match special_subsequence(g, n0, theta, s, k) {
            Ok(sub) => counts.push((k, Some(count_adjacent_pairs(&sub)))),
            Err(Error::SubsequenceExhausted { level_reached, .. }) => {
                exhausted_at.get_or_insert(level_reached);
                counts.push((k, None));
            }
            Err(e) => return Err(e),
        }
    }
    let done: Vec<usize> = counts.iter().filter_map(|c| c.1).collect();
    let monotone = done.windows(2).all(|w| w[1] >= w[0]);
    let at_least_one = done.first().is_some_and(|c| *c >= 1);
    let hypothesis = match (diverges, exhausted_at) {
        (Some(true), _) => Hypothesis::Holds,
        (Some(false), _) => Hypothesis::Violated,
        (None, Some(_)) => Hypothesis::Violated,
        (None, None) => Hypothesis::Unknown,
    };
    let message = match (hypothesis, exhausted_at) {
        (Hypothesis::Violated, Some(k)) => {
            alloc::format!("hypothesis violated: sum 1/g_n converges, table exhausted at level {k}")
        }
        (Hypothesis::Violated, None) => String::from("hypothesis violated: sum 1/g_n converges"),
        (_, Some(k)) => alloc::format!("table exhausted at level {k}; increase N"),
        _ if !monotone => String::from("adjacent-pair count decreased"),
        _ if !at_least_one => String::from("no adjacent pair"),
        _ => String::from("ok"),
    };
    Ok(AdjacentPairsReport { counts, monotone, at_least_one, exhausted_at, hypothesis, message })
}

/// Parameters of the decay ladder chosen from the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderParameters {
    pub n0: usize,
    pub theta: f64,
    pub eta: f64,
}

/// Smallest `n0` with `y_n <= 1` and `h_n <= eta 2^{-2sn}` for all
/// `n >= n0`, then the smallest power of two `theta` with
/// `2^{2s} (1 + theta / ||phi||)^{-1} + eta <= 2^{-2s}`.
///
/// `eta = min(1/4, 2^{-2s}/2)` so that the second condition is satisfiable.
pub fn select_ladder_parameters(bs: &BoundingSequence, s: f64) -> Result<LadderParameters> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter { name: "s", reason: "must be positive" });
    }
    let n_shells = bs.shells();
    let target = libm::exp2(-2.0 * s);
    let eta = f64::min(0.25, 0.5 * target);

    let mut n0 = n_shells + 1;
    for n in (1..=n_shells).rev() {
        let ok = bs.y(n) <= 1.0 && bs.h[n - 1] <= eta * libm::exp2(-2.0 * s * n as f64);
        if !ok {
            break;
        }
        n0 = n;
    }
    if n0 > n_shells {
        return Err(Error::Unverifiable("no n0 within the truncation satisfies y_n <= 1 and h_n <= eta 2^{-2sn}"));
    }

    let phi = bs.phi_sup;
    let holds = |theta: f64| libm::exp2(2.0 * s) / (1.0 + theta / phi) + eta <= target;
    let mut exponent: i32 = -60;
    while !holds(libm::exp2(exponent as f64)) {
        exponent += 1;
        if exponent > 1000 {
            return Err(Error::Unverifiable("no representable theta satisfies the ladder condition"));
        }
    }
    Ok(LadderParameters { n0, theta: libm::exp2(exponent as f64), eta })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderLevel {
    pub k: usize,
    pub n_k: usize,
    pub sup_y: f64,
    pub bound: f64,
    /// `n_k > N`; `sup_y` is then the bound `max(y_{N-1}, y_N)`.
    pub beyond_truncation: bool,
}

impl LadderLevel {
    pub fn margin(&self) -> f64 {
        self.bound - self.sup_y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderReport {
    pub levels: Vec<LadderLevel>,
    /// `y_n <= 1` for every `n >= n0` inside the truncation.
    pub y_bounded_from_n0: bool,
}

impl LadderReport {
    pub fn holds(&self) -> bool {
        self.levels.iter().all(|l| l.sup_y <= l.bound)
    }

    pub fn min_margin(&self) -> f64 {
        self.levels.iter().map(LadderLevel::margin).fold(f64::INFINITY, f64::min)
    }
}

/// Check `sup_{j >= n_k} y_j <= 2^{-2sk}` for every constructed level.
///
/// Past the truncation the data vanish, so `y_{n+2} = c_{n+2} y_n <= y_n`
/// and `max(y_{N-1}, y_N)` bounds every later term; levels with `n_k > N`
/// are checked against that bound.
pub fn verify_decay_ladder(y: &BoundingSequence, sub: &SpecialSubsequence) -> Result<LadderReport> {
    let n_shells = y.shells();
    if sub.n0 > n_shells {
        return Err(Error::Unverifiable("n0 lies beyond the truncation"));
    }
    let mut suffix_max = y.y.clone();
    for n in (0..n_shells.saturating_sub(1)).rev() {
        suffix_max[n] = suffix_max[n].max(suffix_max[n + 1]);
    }
    let tail_bound = suffix_max[n_shells.saturating_sub(2)];
    let levels = sub
        .indices
        .iter()
        .enumerate()
        .map(|(k, &n_k)| {
            let beyond_truncation = n_k > n_shells;
            LadderLevel {
                k,
                n_k,
                sup_y: if beyond_truncation { tail_bound } else { suffix_max[n_k - 1] },
                bound: libm::exp2(-2.0 * sub.s * k as f64),
                beyond_truncation,
            }
        })
        .collect();
    let y_bounded_from_n0 = y.y[sub.n0 - 1..].iter().all(|v| *v <= 1.0);
    Ok(LadderReport { levels, y_bounded_from_n0 })
}
