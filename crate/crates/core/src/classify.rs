//! Prediction, risk evaluation and cross-validation.

use rayon::prelude::*;

use crate::condense::{CondensedModel, CoverMode, MarginSweep};
use crate::error::{Error, Result};
use crate::metric::{margin, Label, LabeledSample, Point};
use crate::rng::SplitMix64;

/// A binary classifier over raw coordinates.
pub trait Predictor: Sync {
    fn predict(&self, x: &[f64]) -> Result<Label>;

    /// Real-valued score whose sign is the prediction, when the predictor has
    /// one.
    fn value(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// Distances from `x` to the nearest +1 and nearest -1 point (`+inf` for an
/// empty class).
fn class_distances(s: &LabeledSample, x: &[f64]) -> (f64, f64) {
    let mut plus = f64::INFINITY;
    let mut minus = f64::INFINITY;
    for i in 0..s.len() {
        let d = s.distance_to(i, x);
        match s.label(i) {
            Label::Positive => plus = plus.min(d),
            Label::Negative => minus = minus.min(d),
        }
    }
    (plus, minus)
}

/// `sign(d_minus - d_plus)` with ties going to +1.
#[inline]
fn nearer_class(d_plus: f64, d_minus: f64) -> Label {
    if d_minus >= d_plus {
        Label::Positive
    } else {
        Label::Negative
    }
}

impl Predictor for CondensedModel {
    fn predict(&self, x: &[f64]) -> Result<Label> {
        let s = self.subsample();
        if s.is_empty() {
            return Err(Error::model("condensed model has no points"));
        }
        s.check_dim(x)?;
        let (p, m) = class_distances(s, x);
        Ok(nearer_class(p, m))
    }
}

/// The 1-NN rule induced by the model's subsample.
pub fn nn1_predict(m: &CondensedModel, x: &Point) -> Result<Label> {
    m.predict(x.coords())
}

/// The midpoint 2-Lipschitz extension of `+gamma` on the retained +1 points
/// and `-gamma` on the retained -1 points.
///
/// Construction checks that both classes are present and that the subsample
/// margin is at least `gamma`.
pub struct LipschitzExtension<'a> {
    model: &'a CondensedModel,
}

impl<'a> LipschitzExtension<'a> {
    pub fn new(model: &'a CondensedModel) -> Result<LipschitzExtension<'a>> {
        let s = model.subsample();
        if !s.has_both_labels() {
            return Err(Error::model("extension needs both classes in the subsample"));
        }
        let marg = margin(s);
        if marg < model.gamma() {
            return Err(Error::model(format!(
                "subsample margin {marg} is below gamma {}",
                model.gamma()
            )));
        }
        Ok(LipschitzExtension { model })
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        let gamma = self.model.gamma();
        let (dp, dm) = class_distances(self.model.subsample(), x);
        let upper = (gamma + 2.0 * dp).min(-gamma + 2.0 * dm);
        let lower = (gamma - 2.0 * dp).max(-gamma - 2.0 * dm);
        0.5 * (upper + lower)
    }
}

impl Predictor for LipschitzExtension<'_> {
    fn predict(&self, x: &[f64]) -> Result<Label> {
        self.model.predict(x)
    }

    fn value(&self, x: &[f64]) -> Option<f64> {
        Some(self.value_at(x))
    }
}

pub fn lipschitz_extension_value(m: &CondensedModel, x: &Point) -> Result<f64> {
    m.subsample().check_dim(x.coords())?;
    Ok(LipschitzExtension::new(m)?.value_at(x.coords()))
}

/// Majority vote of the `k` nearest points, distance ties broken by index.
#[derive(Clone, Copy, Debug)]
pub struct KnnClassifier<'a> {
    sample: &'a LabeledSample,
    k: usize,
}

impl<'a> KnnClassifier<'a> {
    pub fn new(sample: &'a LabeledSample, k: usize) -> Result<KnnClassifier<'a>> {
        if k % 2 == 0 || k == 0 {
            return Err(Error::input(format!("k must be odd and positive, got {k}")));
        }
        if k > sample.len() {
            return Err(Error::input(format!(
                "k = {k} exceeds sample size {}",
                sample.len()
            )));
        }
        Ok(KnnClassifier { sample, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Predictor for KnnClassifier<'_> {
    fn predict(&self, x: &[f64]) -> Result<Label> {
        self.sample.check_dim(x)?;
        let mut d: Vec<(f64, usize)> = (0..self.sample.len())
            .map(|i| (self.sample.distance_to(i, x), i))
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, by_distance);
        }
        let votes: i64 = d[..self.k]
            .iter()
            .map(|&(_, i)| self.sample.label(i).value())
            .sum();
        Ok(Label::from_sign(votes as f64))
    }
}

pub fn knn_predict(s: &LabeledSample, x: &Point, k: usize) -> Result<Label> {
    KnnClassifier::new(s, k)?.predict(x.coords())
}

/// Always predicts one label.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub Label);

impl Predictor for Constant {
    fn predict(&self, _x: &[f64]) -> Result<Label> {
        Ok(self.0)
    }

    fn value(&self, _x: &[f64]) -> Option<f64> {
        Some(self.0.sign())
    }
}

/// Wraps a closure as a predictor.
pub struct FnPredictor<F>(pub F);

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&[f64]) -> Label + Sync,
{
    fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok((self.0)(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskReport {
    /// 0-1 error on the training sample, when one was given.
    pub empirical_error: Option<f64>,
    pub test_error: f64,
    /// `(gamma, fraction with y f(x) < gamma)`, when requested.
    pub margin_risk: Option<(f64, f64)>,
    pub n_train: usize,
    pub n_test: usize,
}

/// Fraction of `s` that `p` misclassifies.
pub fn error_rate<P: Predictor + ?Sized>(p: &P, s: &LabeledSample) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::input("error rate of an empty sample"));
    }
    let wrong = (0..s.len())
        .into_par_iter()
        .map(|i| -> Result<usize> { Ok(usize::from(p.predict(s.point(i))? != s.label(i))) })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(wrong as f64 / s.len() as f64)
}

/// Fraction of `s` with `y f(x) < gamma`. A zero score counts as +1, so the
/// rate at `gamma = 0` is the 0-1 error of `sign(f)`.
pub fn margin_risk<P: Predictor + ?Sized>(p: &P, s: &LabeledSample, gamma: f64) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::input("margin risk of an empty sample"));
    }
    let wrong = (0..s.len())
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let f = p
                .value(s.point(i))
                .ok_or_else(|| Error::model("predictor has no real-valued output"))?;
            let y = s.label(i);
            Ok(usize::from(y.sign() * f < gamma || Label::from_sign(f) != y))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(wrong as f64 / s.len() as f64)
}

pub fn evaluate<P: Predictor + ?Sized>(
    p: &P,
    train: Option<&LabeledSample>,
    test: &LabeledSample,
    gamma: Option<f64>,
) -> Result<RiskReport> {
    let test_error = error_rate(p, test)?;
    let empirical_error = train.map(|t| error_rate(p, t)).transpose()?;
    let margin_risk = gamma
        .map(|g| margin_risk(p, test, g).map(|r| (g, r)))
        .transpose()?;
    Ok(RiskReport {
        empirical_error,
        test_error,
        margin_risk,
        n_train: train.map_or(0, LabeledSample::len),
        n_test: test.len(),
    })
}

/// Fold of each point: shuffle indices with `SplitMix64(seed)`, then deal
/// positions round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    fold
}

/// Which of several equally good candidates wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    First,
    Last,
}

/// Scores every candidate on one train/validation split.
pub trait FoldScorer {
    type Candidate: Copy;

    /// Validation mistakes per candidate.
    fn mistakes(
        &self,
        train: &LabeledSample,
        validation: &LabeledSample,
        candidates: &[Self::Candidate],
    ) -> Result<Vec<usize>>;

    fn tie_break(&self) -> TieBreak;
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvOutcome<C> {
    pub best_index: usize,
    pub best: C,
    /// Mean over folds of the validation error rate, per candidate.
    pub mean_errors: Vec<f64>,
}

/// K-fold cross-validation over `candidates`.
pub fn cross_validate<S: FoldScorer>(
    s: &LabeledSample,
    candidates: &[S::Candidate],
    folds: usize,
    seed: u64,
    scorer: &S,
) -> Result<CvOutcome<S::Candidate>> {
    if folds < 2 {
        return Err(Error::input(format!("need at least 2 folds, got {folds}")));
    }
    if s.len() < folds {
        return Err(Error::input(format!(
            "{} points cannot fill {folds} folds",
            s.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::input("no candidates to cross-validate"));
    }
    let assignment = fold_assignment(s.len(), folds, seed);
    let mut mean_errors = vec![0.0; candidates.len()];
    for f in 0..folds {
        let (val_idx, train_idx): (Vec<usize>, Vec<usize>) =
            (0..s.len()).partition(|&i| assignment[i] == f);
        let train = s.subset(&train_idx);
        let val = s.subset(&val_idx);
        let mistakes = scorer.mistakes(&train, &val, candidates)?;
        for (acc, m) in mean_errors.iter_mut().zip(mistakes) {
            *acc += m as f64 / val.len() as f64;
        }
    }
    for e in &mut mean_errors {
        *e /= folds as f64;
    }
    let tie = scorer.tie_break();
    let mut best_index = 0;
    for (i, &e) in mean_errors.iter().enumerate().skip(1) {
        let better = match tie {
            TieBreak::First => e < mean_errors[best_index],
            TieBreak::Last => e <= mean_errors[best_index],
        };
        if better {
            best_index = i;
        }
    }
    Ok(CvOutcome {
        best_index,
        best: candidates[best_index],
        mean_errors,
    })
}

/// Scores margins by the validation error of the condensed 1-NN rule.
/// Ties go to the larger margin (candidates are ascending).
#[derive(Clone, Copy, Debug)]
pub struct MarginScorer {
    pub mode: CoverMode,
}

impl FoldScorer for MarginScorer {
    type Candidate = f64;

    fn mistakes(
        &self,
        train: &LabeledSample,
        validation: &LabeledSample,
        candidates: &[f64],
    ) -> Result<Vec<usize>> {
        match self.mode {
            CoverMode::Greedy => Ok(greedy_margin_mistakes(train, validation, candidates)),
            CoverMode::Exact => {
                let sweep = MarginSweep::new(train);
                candidates
                    .iter()
                    .map(|&g| {
                        let model = sweep.condense(g, CoverMode::Exact)?;
                        Ok(count_nn1_mistakes(model.subsample(), validation))
                    })
                    .collect()
            }
        }
    }

    fn tie_break(&self) -> TieBreak {
        TieBreak::Last
    }
}

/// 1-NN mistakes of `kept` on `validation`; an empty model answers +1.
fn count_nn1_mistakes(kept: &LabeledSample, validation: &LabeledSample) -> usize {
    validation
        .iter()
        .filter(|&(x, y)| {
            let (p, m) = class_distances(kept, x);
            nearer_class(p, m) != y
        })
        .count()
}

/// Sorted neighbor lists of one class for every validation point, with a
/// cursor at the nearest training point not yet removed.
struct ClassCursor {
    width: usize,
    order: Vec<u32>,
    dist: Vec<f64>,
    cursor: Vec<usize>,
}

impl ClassCursor {
    fn new(train: &LabeledSample, validation: &LabeledSample, members: &[usize]) -> ClassCursor {
        let width = members.len();
        let mut order = Vec::with_capacity(width * validation.len());
        let mut dist = Vec::with_capacity(width * validation.len());
        let mut row: Vec<(f64, u32)> = Vec::with_capacity(width);
        for (x, _) in validation.iter() {
            row.clear();
            row.extend(members.iter().map(|&t| (train.distance_to(t, x), t as u32)));
            row.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            order.extend(row.iter().map(|r| r.1));
            dist.extend(row.iter().map(|r| r.0));
        }
        ClassCursor {
            width,
            order,
            dist,
            cursor: vec![0; validation.len()],
        }
    }

    fn current(&self, v: usize) -> Option<u32> {
        (self.cursor[v] < self.width).then(|| self.order[v * self.width + self.cursor[v]])
    }

    fn distance(&self, v: usize) -> f64 {
        if self.cursor[v] < self.width {
            self.dist[v * self.width + self.cursor[v]]
        } else {
            f64::INFINITY
        }
    }

    fn advance(&mut self, v: usize, removed: &[bool]) -> Option<u32> {
        while self.cursor[v] < self.width && removed[self.order[v * self.width + self.cursor[v]] as usize] {
            self.cursor[v] += 1;
        }
        self.current(v)
    }
}

/// Validation mistakes of the greedy-condensed 1-NN rule at every candidate,
/// in one pass. Greedy removals only accumulate as the margin grows, so each
/// validation point's nearest retained neighbors are tracked with cursors.
fn greedy_margin_mistakes(
    train: &LabeledSample,
    validation: &LabeledSample,
    candidates: &[f64],
) -> Vec<usize> {
    let sweep = MarginSweep::new(train);
    let removals = sweep.greedy_matching();
    let plus = train.indices_of(Label::Positive);
    let minus = train.indices_of(Label::Negative);
    let mut cursors = [
        ClassCursor::new(train, validation, &plus),
        ClassCursor::new(train, validation, &minus),
    ];
    let class_slot = |y: Label| usize::from(y == Label::Negative);
    let mut watchers: Vec<Vec<u32>> = vec![Vec::new(); train.len()];
    for c in &cursors {
        for v in 0..validation.len() {
            if let Some(t) = c.current(v) {
                watchers[t as usize].push(v as u32);
            }
        }
    }
    let predict = |cursors: &[ClassCursor; 2], v: usize| {
        nearer_class(cursors[0].distance(v), cursors[1].distance(v))
    };
    let mut wrong: Vec<bool> = (0..validation.len())
        .map(|v| predict(&cursors, v) != validation.label(v))
        .collect();
    let mut mistakes = wrong.iter().filter(|&&w| w).count();
    let mut removed = vec![false; train.len()];
    let mut next = 0;
    let mut out = Vec::with_capacity(candidates.len());
    for &gamma in candidates {
        while next < removals.len() && removals[next].0 < gamma {
            let (_, a, b) = removals[next];
            next += 1;
            for t in [a as usize, b as usize] {
                removed[t] = true;
                let slot = class_slot(train.label(t));
                for v in std::mem::take(&mut watchers[t]) {
                    let v = v as usize;
                    if let Some(nt) = cursors[slot].advance(v, &removed) {
                        watchers[nt as usize].push(v as u32);
                    }
                    let now_wrong = predict(&cursors, v) != validation.label(v);
                    if now_wrong != wrong[v] {
                        if now_wrong {
                            mistakes += 1;
                        } else {
                            mistakes -= 1;
                        }
                        wrong[v] = now_wrong;
                    }
                }
            }
        }
        out.push(mistakes);
    }
    out
}

/// Scores odd `k` by k-NN validation error. Ties go to the smaller `k`.
#[derive(Clone, Copy, Debug, Default)]
pub struct KnnScorer;

impl FoldScorer for KnnScorer {
    type Candidate = usize;

    fn mistakes(
        &self,
        train: &LabeledSample,
        validation: &LabeledSample,
        candidates: &[usize],
    ) -> Result<Vec<usize>> {
        for &k in candidates {
            if k % 2 == 0 || k == 0 || k > train.len() {
                return Err(Error::input(format!(
                    "k = {k} must be odd and at most the fold size {}",
                    train.len()
                )));
            }
        }
        let max_k = candidates.iter().copied().max().unwrap_or(0);
        let mut out = vec![0; candidates.len()];
        let mut row: Vec<(f64, usize)> = Vec::with_capacity(train.len());
        let mut votes = vec![0i64; max_k + 1];
        for (x, y) in validation.iter() {
            row.clear();
            row.extend((0..train.len()).map(|t| (train.distance_to(t, x), t)));
            row.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for k in 1..=max_k {
                votes[k] = votes[k - 1] + train.label(row[k - 1].1).value();
            }
            for (slot, &k) in out.iter_mut().zip(candidates) {
                if Label::from_sign(votes[k] as f64) != y {
                    *slot += 1;
                }
            }
        }
        Ok(out)
    }

    fn tie_break(&self) -> TieBreak {
        TieBreak::First
    }
}

/// Any closure scoring a single candidate.
pub struct FnScorer<C, F> {
    pub score: F,
    pub tie: TieBreak,
    pub _candidate: std::marker::PhantomData<C>,
}

impl<C, F> FnScorer<C, F> {
    pub fn new(score: F, tie: TieBreak) -> Self {
        FnScorer {
            score,
            tie,
            _candidate: std::marker::PhantomData,
        }
    }
}

impl<C, F> FoldScorer for FnScorer<C, F>
where
    C: Copy,
    F: Fn(&LabeledSample, &LabeledSample, C) -> Result<usize>,
{
    type Candidate = C;

    fn mistakes(
        &self,
        train: &LabeledSample,
        validation: &LabeledSample,
        candidates: &[C],
    ) -> Result<Vec<usize>> {
        candidates
            .iter()
            .map(|&c| (self.score)(train, validation, c))
            .collect()
    }

    fn tie_break(&self) -> TieBreak {
        self.tie
    }
}
