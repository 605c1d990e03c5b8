//! The noisy spiral distribution and its risk oracles.
//!
//! A draw takes `T ~ U[0, 2pi]`, places `x = A sqrt(T) (cos wT, sin wT)` and
//! labels it +1 with probability `eta(T) = (1 + cos wT) / 2`. The generator is
//! [`SplitMix64`]; each draw consumes one double for `T` and then one for the
//! label uniform.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Label, LabeledSample};
use crate::rng::SplitMix64;

/// Conditional probability of +1 given `T`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelLaw {
    /// `(1 + cos wT) / 2`.
    #[default]
    Cosine,
    /// `eta = 1`. Test hook with deterministic labels.
    AlwaysPositive,
    /// `eta = 1/2`. Test hook with pure noise.
    FairCoin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralParams {
    pub amplitude: f64,
    pub frequency: f64,
    pub seed: u64,
    #[serde(default)]
    pub law: LabelLaw,
}

impl Default for SpiralParams {
    fn default() -> Self {
        SpiralParams {
            amplitude: 5.0,
            frequency: 3.0,
            seed: 0,
            law: LabelLaw::Cosine,
        }
    }
}

impl SpiralParams {
    pub fn new(amplitude: f64, frequency: f64, seed: u64) -> Result<SpiralParams> {
        let p = SpiralParams {
            amplitude,
            frequency,
            seed,
            law: LabelLaw::Cosine,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_law(self, law: LabelLaw) -> SpiralParams {
        SpiralParams { law, ..self }
    }

    pub fn with_seed(self, seed: u64) -> SpiralParams {
        SpiralParams { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::input(format!("amplitude must be positive, got {}", self.amplitude)));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::input(format!("frequency must be positive, got {}", self.frequency)));
        }
        Ok(())
    }

    /// `P(Y = +1 | T = t)`.
    pub fn eta(&self, t: f64) -> f64 {
        match self.law {
            LabelLaw::Cosine => 0.5 * (1.0 + (self.frequency * t).cos()),
            LabelLaw::AlwaysPositive => 1.0,
            LabelLaw::FairCoin => 0.5,
        }
    }

    pub fn point_at(&self, t: f64) -> [f64; 2] {
        let r = self.amplitude * t.sqrt();
        let a = self.frequency * t;
        [r * a.cos(), r * a.sin()]
    }
}

/// `n` draws in raw coordinates (scale 1).
pub fn sample_spiral(p: &SpiralParams, n: usize) -> Result<LabeledSample> {
    p.validate()?;
    if n == 0 {
        return Err(Error::input("sample size must be at least 1"));
    }
    let mut rng = SplitMix64::new(p.seed);
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let t = TAU * rng.next_f64();
        let u = rng.next_f64();
        coords.extend(p.point_at(t));
        labels.push(if u < p.eta(t) {
            Label::Positive
        } else {
            Label::Negative
        });
    }
    LabeledSample::from_flat(2, coords, labels)
}

const QUAD_TOL: f64 = 1e-8;

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integral of `f` over `[a, b]` by adaptive Simpson on equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    let h = (b - a) / panels as f64;
    let panel_tol = tol / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            adaptive(&f, lo, hi, fa, fm, fb, simpson(fa, fm, fb, lo, hi), panel_tol, 40)
        })
        .sum()
}

/// Mean of `g(eta(T))` over `T ~ U[0, 2pi]`.
fn mean_over_t<G: Fn(f64) -> f64>(p: &SpiralParams, g: G) -> f64 {
    // Panels short enough that each contains at most a few kinks of |cos wT|.
    let panels = (64.0 * p.frequency.max(1.0)).ceil() as usize;
    integrate(|t| g(p.eta(t)), 0.0, TAU, panels, QUAD_TOL * TAU) / TAU
}

/// Bayes risk `E[min(eta, 1 - eta)]`.
pub fn bayes_risk(p: &SpiralParams) -> f64 {
    mean_over_t(p, |e| e.min(1.0 - e))
}

/// Asymptotic 1-NN risk `E[2 eta (1 - eta)]`.
pub fn one_nn_asymptote(p: &SpiralParams) -> f64 {
    mean_over_t(p, |e| 2.0 * e * (1.0 - e))
}

/// `(1 - 2/pi) / 2`, the Bayes risk of the cosine law at integer frequency.
pub const INTEGER_FREQUENCY_BAYES_RISK: f64 = (1.0 - 2.0 / PI) / 2.0;
