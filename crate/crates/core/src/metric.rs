//! Points, labels, metrics and unit-diameter samples.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A binary class label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_value(v: i64) -> Result<Label> {
        match v {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(Error::input(format!("label must be -1 or 1, got {other}"))),
        }
    }

    /// `sign` with `sign(0) = +1`.
    pub fn from_sign(x: f64) -> Label {
        if x >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn sign(self) -> f64 {
        self.value() as f64
    }

    pub fn opposite(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// A point with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Point> {
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::input(format!("non-finite coordinate {bad}")));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub type DistanceFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// The distance used on raw coordinates. Samples divide it by their scale.
#[derive(Clone, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    /// A caller-supplied metric. It is trusted to satisfy the metric axioms.
    Custom(Arc<DistanceFn>),
}

impl Metric {
    pub fn custom<F>(f: F) -> Metric
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Metric::Custom(Arc::new(f))
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Metric::Euclidean)
    }

    /// Raw distance; callers guarantee equal lengths.
    #[inline]
    pub fn raw(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Custom(f) => f(a, b),
        }
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Euclidean => f.write_str("Euclidean"),
            Metric::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A metric together with the doubling-dimension parameter the penalty uses.
#[derive(Clone, Debug)]
pub struct MetricSpec {
    pub metric: Metric,
    pub ddim: f64,
}

impl MetricSpec {
    pub fn new(metric: Metric, ddim: f64) -> Result<MetricSpec> {
        if !(ddim > 0.0 && ddim.is_finite()) {
            return Err(Error::input(format!("ddim must be positive, got {ddim}")));
        }
        Ok(MetricSpec { metric, ddim })
    }

    /// Euclidean space of dimension `dim`, with `ddim = dim`.
    pub fn euclidean(dim: usize) -> MetricSpec {
        MetricSpec {
            metric: Metric::Euclidean,
            ddim: dim.max(1) as f64,
        }
    }
}

/// Distance between two points under `metric`, without normalization.
pub fn distance(metric: &Metric, a: &Point, b: &Point) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(metric.raw(a.coords(), b.coords()))
}

/// Distance after dividing by a recorded diameter scale.
pub fn scaled_distance(metric: &Metric, a: &Point, b: &Point, scale: f64) -> Result<f64> {
    Ok(distance(metric, a, b)? / scale)
}

/// A labeled sample stored in raw coordinates with a diameter scale.
///
/// All distances handed out by the sample are `metric(a, b) / scale`, so a
/// normalized sample has diameter at most one.
#[derive(Clone, Debug)]
pub struct LabeledSample {
    metric: Metric,
    dim: usize,
    coords: Vec<f64>,
    labels: Vec<Label>,
    scale: f64,
}

impl LabeledSample {
    /// Builds an unnormalized sample (scale 1) under the Euclidean metric.
    pub fn new(raw: Vec<(Point, Label)>) -> Result<LabeledSample> {
        Self::with_metric(raw, Metric::Euclidean)
    }

    pub fn with_metric(raw: Vec<(Point, Label)>, metric: Metric) -> Result<LabeledSample> {
        let dim = raw.first().map_or(0, |(p, _)| p.dim());
        let mut coords = Vec::with_capacity(raw.len() * dim);
        let mut labels = Vec::with_capacity(raw.len());
        for (i, (p, y)) in raw.into_iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::input(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.dim()
                )));
            }
            coords.extend(p.into_coords());
            labels.push(y);
        }
        Ok(LabeledSample {
            metric,
            dim,
            coords,
            labels,
            scale: 1.0,
        })
    }

    /// Builds a sample from flat row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>, labels: Vec<Label>) -> Result<LabeledSample> {
        if coords.len() != dim * labels.len() {
            return Err(Error::input("coordinate count does not match labels"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("non-finite coordinate"));
        }
        Ok(LabeledSample {
            metric: Metric::Euclidean,
            dim,
            coords,
            labels,
            scale: 1.0,
        })
    }

    /// Replaces the scale. Used when loading a serialized model.
    pub fn with_scale(mut self, scale: f64) -> Result<LabeledSample> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::input(format!("scale must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Rescales so that the maximum pairwise distance is one. The new scale
    /// multiplies into the old one, so normalizing twice is a no-op.
    pub fn normalized(mut self) -> LabeledSample {
        let diam = self.diameter();
        if diam > 0.0 {
            self.scale *= diam;
        }
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], Label)> + '_ {
        (0..self.len()).map(move |i| (self.point(i), self.labels[i]))
    }

    /// Normalized distance between two sample points.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.raw(self.point(i), self.point(j)) / self.scale
    }

    /// Normalized distance from sample point `i` to raw coordinates `x`.
    #[inline]
    pub fn distance_to(&self, i: usize, x: &[f64]) -> f64 {
        self.metric.raw(self.point(i), x) / self.scale
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::input(format!(
                "dimension mismatch: query has {}, sample has {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Largest normalized pairwise distance (0 for fewer than two points).
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }

    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&y| y == label).count()
    }

    pub fn has_both_labels(&self) -> bool {
        self.count(Label::Positive) > 0 && self.count(Label::Negative) > 0
    }

    /// The points at `indices`, in that order, keeping metric and scale.
    pub fn subset(&self, indices: &[usize]) -> LabeledSample {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            coords.extend_from_slice(self.point(i));
            labels.push(self.labels[i]);
        }
        LabeledSample {
            metric: self.metric.clone(),
            dim: self.dim,
            coords,
            labels,
            scale: self.scale,
        }
    }

    pub fn to_pairs(&self) -> Vec<(Point, Label)> {
        self.iter()
            .map(|(p, y)| (Point(p.to_vec()), y))
            .collect()
    }
}

/// Builds a Euclidean sample and rescales it to unit diameter.
pub fn normalize_sample(raw: Vec<(Point, Label)>) -> Result<LabeledSample> {
    normalize_sample_with(raw, Metric::Euclidean)
}

pub fn normalize_sample_with(raw: Vec<(Point, Label)>, metric: Metric) -> Result<LabeledSample> {
    if raw.is_empty() {
        return Err(Error::input("cannot normalize an empty sample"));
    }
    Ok(LabeledSample::with_metric(raw, metric)?.normalized())
}

/// Minimum distance between opposite-labeled points; `+inf` when a class is
/// missing.
pub fn margin(s: &LabeledSample) -> f64 {
    let plus = s.indices_of(Label::Positive);
    let minus = s.indices_of(Label::Negative);
    let mut best = f64::INFINITY;
    for &i in &plus {
        for &j in &minus {
            best = best.min(s.distance(i, j));
        }
    }
    best
}
