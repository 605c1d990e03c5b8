//! Structural risk minimization over the margin.
//!
//! The objective at margin `gamma` is the fraction of points removed by the
//! inner routine plus
//!
//! ```text
//! pen(n, gamma) = (4/gamma) (c_dim/n)^(1/(2(ddim+1)))
//!               + sqrt( ((c1/(ddim+1)) ln(n/c_dim) + 2 c1 ln ln(2e/gamma)) / n )
//! ```
//!
//! The surrogate loss and stratification grid below are diagnostics used to
//! check that the penalty dominates the deviation terms of the grid.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::condense::{CondensedModel, CoverMode, MarginSweep};
use crate::error::{Error, Result};
use crate::io::fmt_g17;
use crate::metric::LabeledSample;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyParams {
    pub c1: f64,
    pub c_dim: f64,
    pub ddim: f64,
}

impl Default for PenaltyParams {
    /// `c1 = 2`, `c_dim = 1`, `ddim = 2` (the plane).
    fn default() -> Self {
        PenaltyParams {
            c1: 2.0,
            c_dim: 1.0,
            ddim: 2.0,
        }
    }
}

impl PenaltyParams {
    pub fn new(c1: f64, c_dim: f64, ddim: f64) -> Result<PenaltyParams> {
        let p = PenaltyParams { c1, c_dim, ddim };
        p.validate()?;
        Ok(p)
    }

    /// Default constants with `ddim` set to a Euclidean dimension.
    pub fn for_dimension(dim: usize) -> PenaltyParams {
        PenaltyParams {
            ddim: dim.max(1) as f64,
            ..PenaltyParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c1", self.c1), ("c_dim", self.c_dim), ("ddim", self.ddim)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn exponent(&self) -> f64 {
        1.0 / (2.0 * (self.ddim + 1.0))
    }
}

/// The complexity penalty. Requires `gamma` in (0, 1] and `n > max(1, c_dim)`.
pub fn penalty(n: usize, gamma: f64, p: &PenaltyParams) -> Result<f64> {
    p.validate()?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::input(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    let nf = n as f64;
    if n < 2 || nf <= p.c_dim {
        return Err(Error::input(format!(
            "penalty needs n >= 2 and n > c_dim = {}, got n = {n}",
            p.c_dim
        )));
    }
    let first = 4.0 / gamma * (p.c_dim / nf).powf(p.exponent());
    let loglog = (2.0 * std::f64::consts::E / gamma).ln().ln();
    let inside = (p.c1 / (p.ddim + 1.0) * (nf / p.c_dim).ln() + 2.0 * p.c1 * loglog) / nf;
    Ok(first + inside.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SrmRow {
    pub gamma: f64,
    pub removed: usize,
    pub empirical: f64,
    pub penalty: f64,
    pub objective: f64,
}

/// One row per candidate margin, ascending in gamma.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SrmTrace {
    pub rows: Vec<SrmRow>,
    /// `None` when there were no candidates.
    pub chosen: Option<usize>,
}

impl SrmTrace {
    pub fn chosen_row(&self) -> Option<&SrmRow> {
        self.chosen.map(|i| &self.rows[i])
    }

    /// CSV with header `gamma,removed,empirical,penalty,objective,chosen`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "gamma,removed,empirical,penalty,objective,chosen")?;
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_g17(r.gamma),
                r.removed,
                fmt_g17(r.empirical),
                fmt_g17(r.penalty),
                fmt_g17(r.objective),
                u8::from(self.chosen == Some(i))
            )?;
        }
        Ok(())
    }
}

/// Builds the trace from per-candidate removal counts and picks the minimum
/// objective, preferring the larger gamma on ties.
pub fn trace_from_counts(
    n: usize,
    candidates: &[f64],
    removed: &[usize],
    p: &PenaltyParams,
) -> Result<SrmTrace> {
    let mut rows: Vec<SrmRow> = Vec::with_capacity(candidates.len());
    let mut chosen: Option<usize> = None;
    for (i, (&gamma, &removed)) in candidates.iter().zip(removed).enumerate() {
        let empirical = removed as f64 / n as f64;
        let pen = penalty(n, gamma, p)?;
        let objective = empirical + pen;
        if chosen.map_or(true, |c: usize| objective <= rows[c].objective) {
            chosen = Some(i);
        }
        rows.push(SrmRow {
            gamma,
            removed,
            empirical,
            penalty: pen,
            objective,
        });
    }
    Ok(SrmTrace { rows, chosen })
}

/// Minimizes the penalized margin risk over every candidate margin.
///
/// A single-class sample has no candidates; the result is the whole sample
/// as a constant classifier (`gamma = 1`) and an empty trace.
pub fn srm_select(
    s: &LabeledSample,
    p: &PenaltyParams,
    mode: CoverMode,
) -> Result<(CondensedModel, SrmTrace)> {
    p.validate()?;
    if s.is_empty() {
        return Err(Error::input("cannot select a margin for an empty sample"));
    }
    let sweep = MarginSweep::new(s);
    if sweep.candidates().is_empty() {
        return Ok((sweep.condense(1.0, mode)?, SrmTrace::default()));
    }
    let removed = sweep.removed_counts(mode);
    let trace = trace_from_counts(s.len(), sweep.candidates(), &removed, p)?;
    let best = trace.chosen_row().expect("nonempty trace").gamma;
    let model = sweep.condense(best, mode)?;
    debug_assert_eq!(model.removed_count(), trace.chosen_row().unwrap().removed);
    Ok((model, trace))
}

/// Ramp loss: 1 up to `gamma (1 - xi)`, 0 from `gamma` on, linear between.
pub fn surrogate_loss(u: f64, gamma: f64, xi: f64) -> f64 {
    if u <= gamma * (1.0 - xi) {
        1.0
    } else if u >= gamma {
        0.0
    } else {
        (gamma - u) / (gamma * xi)
    }
}

/// Mean ramp loss of `y * f` over `(f, y)` pairs.
pub fn empirical_surrogate_risk(
    values: &[(f64, crate::metric::Label)],
    gamma: f64,
    xi: f64,
) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::input("surrogate risk of an empty sequence"));
    }
    let total: f64 = values
        .iter()
        .map(|&(f, y)| surrogate_loss(y.sign() * f, gamma, xi))
        .sum();
    Ok(total / values.len() as f64)
}

/// The geometric margin grid `gamma_l = (1 - xi)^(l-1)` with resolution
/// `xi = 1 / n_dim`, `n_dim = (n / c_dim)^(1/(2(ddim+1)))`, and the deviation
/// levels `eps_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridParams {
    pub n: usize,
    pub n_dim: f64,
    pub xi: f64,
    pub levels: usize,
    /// `gammas[l - 1]` is level `l`.
    pub gammas: Vec<f64>,
    pub epsilons: Vec<f64>,
}

pub fn grid(n: usize, p: &PenaltyParams, levels: usize) -> Result<GridParams> {
    p.validate()?;
    let nf = n as f64;
    let n_dim = (nf / p.c_dim).powf(p.exponent());
    if !(n_dim > 1.0) {
        return Err(Error::input(format!(
            "grid needs n_dim > 1, i.e. n > c_dim = {}; got n = {n} (n_dim = {n_dim})",
            p.c_dim
        )));
    }
    let xi = 1.0 / n_dim;
    let mut gammas = Vec::with_capacity(levels);
    let mut epsilons = Vec::with_capacity(levels);
    let mut gamma = 1.0;
    for l in 1..=levels {
        if l > 1 {
            gamma *= 1.0 - xi;
        }
        let first = 2.0 / (gamma * xi * n_dim * n_dim);
        let inner = 2.0 * p.c1 * ((1.0 / xi) * (std::f64::consts::E / gamma).ln()).ln() / nf;
        gammas.push(gamma);
        epsilons.push(first + inner.sqrt());
    }
    Ok(GridParams {
        n,
        n_dim,
        xi,
        levels,
        gammas,
        epsilons,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominanceRow {
    /// The level `l >= 2`.
    pub level: usize,
    /// `pen(n, gamma_{l-1})`.
    pub penalty: f64,
    /// `eps_l`.
    pub epsilon: f64,
}

impl DominanceRow {
    pub fn holds(&self) -> bool {
        self.penalty >= self.epsilon
    }
}

#[derive(Clone, Debug)]
pub struct DominanceReport {
    pub grid: GridParams,
    pub rows: Vec<DominanceRow>,
    pub first_violation: Option<DominanceRow>,
}

impl DominanceReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks `pen(n, gamma_{l-1}) >= eps_l` for `l = 2..=levels`.
pub fn check_penalty_dominates(
    n: usize,
    p: &PenaltyParams,
    levels: usize,
) -> Result<DominanceReport> {
    let grid = grid(n, p, levels)?;
    let mut rows = Vec::new();
    for l in 2..=levels {
        rows.push(DominanceRow {
            level: l,
            penalty: penalty(n, grid.gammas[l - 2], p)?,
            epsilon: grid.epsilons[l - 1],
        });
    }
    let first_violation = rows.iter().copied().find(|r| !r.holds());
    Ok(DominanceReport {
        grid,
        rows,
        first_violation,
    })
}
