//! Margin-regularized nearest-neighbor classification.
//!
//! A labeled sample is condensed to a subsample whose opposite-labeled points
//! are at least `gamma` apart by removing a vertex cover of the conflict
//! graph. The margin is chosen by minimizing the fraction of removed points
//! plus a complexity penalty, and the retained points define a 1-NN rule.
//!
//! ```
//! use marginnn::{normalize_sample, srm_select, CoverMode, Label, PenaltyParams, Point, Predictor};
//!
//! let raw = vec![
//!     (Point::new(vec![0.0]).unwrap(), Label::Positive),
//!     (Point::new(vec![0.1]).unwrap(), Label::Positive),
//!     (Point::new(vec![0.9]).unwrap(), Label::Negative),
//!     (Point::new(vec![1.0]).unwrap(), Label::Negative),
//! ];
//! let s = normalize_sample(raw).unwrap();
//! let p = PenaltyParams::new(2.0, 1e-9, 1.0).unwrap();
//! let (model, _trace) = srm_select(&s, &p, CoverMode::Exact).unwrap();
//! assert_eq!(model.removed_count(), 0);
//! assert_eq!(model.predict(&[0.2]).unwrap(), Label::Positive);
//! ```

pub mod classify;
pub mod condense;
pub mod cover;
pub mod error;
pub mod harness;
pub mod io;
pub mod metric;
pub mod rng;
pub mod spiral;
pub mod srm;

pub use classify::{
    cross_validate, evaluate, knn_predict, lipschitz_extension_value, nn1_predict, KnnClassifier,
    LipschitzExtension, Predictor, RiskReport,
};
pub use condense::{candidate_margins, inner, CondensedModel, CoverMode, MarginSweep};
pub use cover::{
    brute_force_min_cover, build_conflict_graph, greedy_cover, koenig_cover, maximum_matching,
    minimum_cover, ConflictGraph, Matching, VertexCover,
};
pub use error::{Error, Result};
pub use metric::{margin, normalize_sample, Label, LabeledSample, Metric, MetricSpec, Point};
pub use spiral::{bayes_risk, one_nn_asymptote, sample_spiral, SpiralParams};
pub use srm::{check_penalty_dominates, penalty, srm_select, PenaltyParams, SrmTrace};
