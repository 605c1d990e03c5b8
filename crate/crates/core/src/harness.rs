//! Experiment orchestration and the file-level commands behind the CLI.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    cross_validate, error_rate, KnnClassifier, KnnScorer, MarginScorer, Predictor,
};
use crate::condense::{CondensedModel, CoverMode, MarginSweep};
use crate::error::{Error, Result};
use crate::io::{fmt_g17, read_points_csv, read_sample_file, write_sample_csv};
use crate::metric::{normalize_sample, Label, LabeledSample};
use crate::rng::derive_seed;
use crate::spiral::{bayes_risk, one_nn_asymptote, sample_spiral, SpiralParams};
use crate::srm::{check_penalty_dominates, srm_select, DominanceReport, PenaltyParams};

/// Learners compared by the experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "srm-1nn-exact")]
    SrmExact,
    #[serde(rename = "srm-1nn-greedy")]
    SrmGreedy,
    #[serde(rename = "cv-1nn")]
    Cv1nn,
    #[serde(rename = "kstar-nn")]
    KstarNn,
    #[serde(rename = "plain-1nn")]
    Plain1nn,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::SrmExact,
        Method::SrmGreedy,
        Method::Cv1nn,
        Method::KstarNn,
        Method::Plain1nn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::SrmExact => "srm-1nn-exact",
            Method::SrmGreedy => "srm-1nn-greedy",
            Method::Cv1nn => "cv-1nn",
            Method::KstarNn => "kstar-nn",
            Method::Plain1nn => "plain-1nn",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::input(format!("unknown method {s:?}")))
    }
}

fn default_folds() -> usize {
    5
}

fn default_test_size() -> usize {
    10_000
}

fn default_trials() -> usize {
    1
}

fn default_cv_cover() -> CoverMode {
    CoverMode::Greedy
}

/// Experiment settings, read from JSON. `spiral.seed` is the base seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub sizes: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub spiral: SpiralParams,
    #[serde(default)]
    pub penalty: PenaltyParams,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    /// Cover used inside cv-1nn for every fold and candidate.
    #[serde(default = "default_cv_cover")]
    pub cv_cover: CoverMode,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let c = Self::parse(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Parses without validating, so that command-line overrides can be
    /// applied first.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::input("config lists no methods"));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(Error::input("config lists a method twice"));
        }
        if self.sizes.is_empty() {
            return Err(Error::input("config lists no sample sizes"));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("sample sizes must be strictly ascending"));
        }
        if self.trials == 0 {
            return Err(Error::input("trials must be at least 1"));
        }
        if self.folds < 2 {
            return Err(Error::input("folds must be at least 2"));
        }
        if self.sizes[0] < self.folds.max(2) {
            return Err(Error::input(format!(
                "smallest sample size {} is below the fold count {}",
                self.sizes[0], self.folds
            )));
        }
        if self.test_size == 0 {
            return Err(Error::input("test_size must be at least 1"));
        }
        self.spiral.validate()?;
        self.penalty.validate()?;
        if let Some(&n) = self.sizes.first() {
            if n as f64 <= self.penalty.c_dim {
                return Err(Error::input(format!(
                    "sample size {n} must exceed c_dim = {}",
                    self.penalty.c_dim
                )));
            }
        }
        Ok(())
    }

    pub fn base_seed(&self) -> u64 {
        self.spiral.seed
    }
}

/// One fitted method on one training sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub method: Method,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub test_error: f64,
    pub train_error: f64,
    /// Selected margin for the 1-NN methods, selected `k` for k*-NN.
    pub gamma_or_k: f64,
    pub fit_millis: f64,
}

pub const RESULTS_HEADER: &str = "method,n,trial,seed,test_error,train_error,gamma_or_k";
pub const TIMINGS_HEADER: &str = "method,n,trial,fit_millis";
pub const SUMMARY_HEADER: &str = "method,n,trials,mean_test_error,std_test_error,mean_train_error,std_train_error,bayes_risk,one_nn_asymptote,amplitude,frequency,base_seed,test_size,folds";

impl ExperimentRow {
    fn key(&self) -> (Method, usize, usize) {
        (self.method, self.n, self.trial)
    }

    pub fn results_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.method,
            self.n,
            self.trial,
            self.seed,
            fmt_g17(self.test_error),
            fmt_g17(self.train_error),
            fmt_g17(self.gamma_or_k)
        )
    }

    pub fn timings_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.method,
            self.n,
            self.trial,
            fmt_g17(self.fit_millis)
        )
    }

    fn parse(results: &str, fit_millis: f64) -> Option<ExperimentRow> {
        let f: Vec<&str> = results.split(',').collect();
        if f.len() != 7 {
            return None;
        }
        Some(ExperimentRow {
            method: f[0].parse().ok()?,
            n: f[1].parse().ok()?,
            trial: f[2].parse().ok()?,
            seed: f[3].parse().ok()?,
            test_error: f[4].parse().ok()?,
            train_error: f[5].parse().ok()?,
            gamma_or_k: f[6].parse().ok()?,
            fit_millis,
        })
    }
}

/// Seed of the training sample for `(n, trial)`.
pub fn train_seed(base: u64, n: usize, trial: usize) -> u64 {
    derive_seed(base, &[n as u64, trial as u64])
}

const TEST_STREAM: u64 = u64::MAX;
const FOLD_STREAM: u64 = u64::MAX - 1;

/// Seed of the test set for `trial`, shared by every size and method.
pub fn test_seed(base: u64, trial: usize) -> u64 {
    derive_seed(base, &[TEST_STREAM, trial as u64])
}

/// Odd `k` from 1 to `2 ceil(sqrt(n)) + 1`.
pub fn k_grid(n: usize) -> Vec<usize> {
    let top = 2 * (n as f64).sqrt().ceil() as usize + 1;
    (1..=top).step_by(2).collect()
}

enum Fitted<'a> {
    Condensed(CondensedModel),
    Knn(KnnClassifier<'a>),
}

impl Predictor for Fitted<'_> {
    fn predict(&self, x: &[f64]) -> Result<Label> {
        match self {
            Fitted::Condensed(m) => m.predict(x),
            Fitted::Knn(k) => k.predict(x),
        }
    }
}

fn fit<'a>(
    method: Method,
    train: &'a LabeledSample,
    cfg: &ExperimentConfig,
    fold_seed: u64,
) -> Result<(Fitted<'a>, f64)> {
    match method {
        Method::SrmExact | Method::SrmGreedy => {
            let mode = if method == Method::SrmExact {
                CoverMode::Exact
            } else {
                CoverMode::Greedy
            };
            let (model, _) = srm_select(train, &cfg.penalty, mode)?;
            let g = model.gamma();
            Ok((Fitted::Condensed(model), g))
        }
        Method::Cv1nn => {
            let sweep = MarginSweep::new(train);
            if sweep.candidates().is_empty() {
                let model = CondensedModel::uncondensed(train);
                let g = model.gamma();
                return Ok((Fitted::Condensed(model), g));
            }
            let scorer = MarginScorer { mode: cfg.cv_cover };
            let cv = cross_validate(train, sweep.candidates(), cfg.folds, fold_seed, &scorer)?;
            let model = sweep.condense(cv.best, cfg.cv_cover)?;
            Ok((Fitted::Condensed(model), cv.best))
        }
        Method::KstarNn => {
            // The smallest training fold bounds k.
            let smallest_fold = train.len() - train.len().div_ceil(cfg.folds);
            let ks: Vec<usize> = k_grid(train.len())
                .into_iter()
                .filter(|&k| k <= smallest_fold)
                .collect();
            let cv = cross_validate(train, &ks, cfg.folds, fold_seed, &KnnScorer)?;
            Ok((Fitted::Knn(KnnClassifier::new(train, cv.best)?), cv.best as f64))
        }
        Method::Plain1nn => {
            let model = CondensedModel::uncondensed(train);
            let g = model.gamma();
            Ok((Fitted::Condensed(model), g))
        }
    }
}

/// All configured methods on one `(n, trial)` training sample.
fn run_job(cfg: &ExperimentConfig, n: usize, trial: usize) -> Result<Vec<ExperimentRow>> {
    let base = cfg.base_seed();
    let seed = train_seed(base, n, trial);
    let train = sample_spiral(&cfg.spiral.with_seed(seed), n)?.normalized();
    let test = sample_spiral(&cfg.spiral.with_seed(test_seed(base, trial)), cfg.test_size)?;
    let fold_seed = derive_seed(seed, &[FOLD_STREAM]);
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let start = Instant::now();
        let (fitted, gamma_or_k) = fit(method, &train, cfg, fold_seed)?;
        let fit_millis = start.elapsed().as_secs_f64() * 1e3;
        rows.push(ExperimentRow {
            method,
            n,
            trial,
            seed,
            test_error: error_rate(&fitted, &test)?,
            train_error: error_rate(&fitted, &train)?,
            gamma_or_k,
            fit_millis,
        });
    }
    Ok(rows)
}

/// Where an experiment writes. Timings live apart from the results so that
/// the results file is a pure function of the config.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputPaths {
    pub results: PathBuf,
    pub timings: PathBuf,
    pub summary: PathBuf,
}

impl OutputPaths {
    pub fn for_results(results: &Path) -> OutputPaths {
        let stem = results
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "results".into());
        let sibling = |suffix: &str| results.with_file_name(format!("{stem}.{suffix}.csv"));
        OutputPaths {
            results: results.to_path_buf(),
            timings: sibling("timings"),
            summary: sibling("summary"),
        }
    }
}

/// Rows from an earlier run of the same experiment, keyed by
/// `(method, n, trial)`. Rows without a timing get `fit_millis = NaN`.
fn load_previous(paths: &OutputPaths) -> Result<HashMap<(Method, usize, usize), ExperimentRow>> {
    let mut out = HashMap::new();
    let Ok(text) = fs::read_to_string(&paths.results) else {
        return Ok(out);
    };
    let mut lines = text.lines();
    match lines.next() {
        None => return Ok(out),
        Some(h) if h == RESULTS_HEADER => {}
        Some(_) => {
            return Err(Error::input(format!(
                "{} exists with an unexpected header",
                paths.results.display()
            )))
        }
    }
    let mut timings: HashMap<String, f64> = HashMap::new();
    if let Ok(t) = fs::read_to_string(&paths.timings) {
        for line in t.lines().skip(1) {
            if let Some((key, ms)) = line.rsplit_once(',') {
                if let Ok(ms) = ms.parse() {
                    timings.insert(key.to_string(), ms);
                }
            }
        }
    }
    // A partial final line from an interrupted write has no newline.
    let complete = if text.ends_with('\n') {
        text.lines().count()
    } else {
        text.lines().count() - 1
    };
    for line in text.lines().take(complete).skip(1) {
        let key: String = line.splitn(4, ',').take(3).collect::<Vec<_>>().join(",");
        let ms = timings.get(&key).copied().unwrap_or(f64::NAN);
        if let Some(row) = ExperimentRow::parse(line, ms) {
            out.insert(row.key(), row);
        }
    }
    Ok(out)
}

fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn render(rows: &[ExperimentRow]) -> (String, String) {
    let mut results = String::from(RESULTS_HEADER);
    results.push('\n');
    let mut timings = String::from(TIMINGS_HEADER);
    timings.push('\n');
    for r in rows {
        results.push_str(&r.results_line());
        results.push('\n');
        timings.push_str(&r.timings_line());
        timings.push('\n');
    }
    (results, timings)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub n: usize,
    pub trials: usize,
    pub mean_test_error: f64,
    pub std_test_error: f64,
    pub mean_train_error: f64,
    pub std_train_error: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean and sample standard deviation per `(method, n)`, rows in
/// `(n, method)` order.
pub fn summarize(cfg: &ExperimentConfig, rows: &[ExperimentRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for &n in &cfg.sizes {
        for &method in &cfg.methods {
            let group: Vec<&ExperimentRow> = rows
                .iter()
                .filter(|r| r.n == n && r.method == method)
                .collect();
            if group.is_empty() {
                continue;
            }
            let test: Vec<f64> = group.iter().map(|r| r.test_error).collect();
            let train: Vec<f64> = group.iter().map(|r| r.train_error).collect();
            let (mean_test_error, std_test_error) = mean_std(&test);
            let (mean_train_error, std_train_error) = mean_std(&train);
            out.push(SummaryRow {
                method,
                n,
                trials: group.len(),
                mean_test_error,
                std_test_error,
                mean_train_error,
                std_train_error,
            });
        }
    }
    out
}

fn render_summary(cfg: &ExperimentConfig, summary: &[SummaryRow]) -> String {
    let bayes = bayes_risk(&cfg.spiral);
    let asym = one_nn_asymptote(&cfg.spiral);
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in summary {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.n,
            r.trials,
            fmt_g17(r.mean_test_error),
            fmt_g17(r.std_test_error),
            fmt_g17(r.mean_train_error),
            fmt_g17(r.std_train_error),
            fmt_g17(bayes),
            fmt_g17(asym),
            fmt_g17(cfg.spiral.amplitude),
            fmt_g17(cfg.spiral.frequency),
            cfg.base_seed(),
            cfg.test_size,
            cfg.folds
        )
        .expect("write to string");
    }
    s
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<SummaryRow>,
    pub paths: Option<OutputPaths>,
    /// Rows taken from an earlier run rather than recomputed.
    pub reused: usize,
}

/// Runs every `(method, n, trial)` of the config.
///
/// Trials of one size run in parallel. After each size the results are
/// rewritten in `(n, trial, method)` order, so an interrupted run leaves the
/// finished sizes on disk. A rerun reuses any row already present.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let paths = cfg.output.as_deref().map(OutputPaths::for_results);
    let mut previous = match &paths {
        Some(p) => load_previous(p)?,
        None => HashMap::new(),
    };
    let mut rows: Vec<ExperimentRow> = Vec::new();
    let mut reused = 0;
    for &n in &cfg.sizes {
        let block: Vec<Vec<ExperimentRow>> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let keys: Vec<_> = cfg.methods.iter().map(|&m| (m, n, trial)).collect();
                if keys.iter().all(|k| previous.contains_key(k)) {
                    return Ok(keys.iter().map(|k| previous[k].clone()).collect());
                }
                run_job(cfg, n, trial)
            })
            .collect::<Result<_>>()?;
        for job in block {
            for row in job {
                if previous.remove(&row.key()).is_some() {
                    reused += 1;
                }
                rows.push(row);
            }
        }
        if let Some(p) = &paths {
            // Keep old rows of sizes not reached yet until they are replaced.
            let mut on_disk = rows.clone();
            let mut rest: Vec<ExperimentRow> = previous.values().cloned().collect();
            rest.sort_by_key(|r| (r.n, r.trial, r.method));
            on_disk.extend(rest);
            let (results, timings) = render(&on_disk);
            write_atomically(&p.results, &results)?;
            write_atomically(&p.timings, &timings)?;
        }
    }
    let summary = summarize(cfg, &rows);
    if let Some(p) = &paths {
        let (results, timings) = render(&rows);
        write_atomically(&p.results, &results)?;
        write_atomically(&p.timings, &timings)?;
        write_atomically(&p.summary, &render_summary(cfg, &summary))?;
    }
    Ok(ExperimentOutcome {
        rows,
        summary,
        paths,
        reused,
    })
}

/// What `fit` reports after writing its outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct FitSummary {
    pub gamma: f64,
    pub removed_count: usize,
    pub n: usize,
    pub objective: Option<f64>,
}

/// Penalty constants given on the command line. Missing ones take the
/// defaults, with `ddim` equal to the data dimension.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PenaltyFlags {
    pub c1: Option<f64>,
    pub c_dim: Option<f64>,
    pub ddim: Option<f64>,
}

impl PenaltyFlags {
    pub fn resolve(&self, dim: usize) -> Result<PenaltyParams> {
        let d = PenaltyParams::for_dimension(dim);
        PenaltyParams::new(
            self.c1.unwrap_or(d.c1),
            self.c_dim.unwrap_or(d.c_dim),
            self.ddim.unwrap_or(d.ddim),
        )
    }
}

/// Reads a sample, normalizes it, selects the margin, and writes the model
/// JSON and the trace CSV.
///
/// A sample with only one label is an input error.
pub fn cmd_fit(
    sample_path: &Path,
    penalty: PenaltyFlags,
    mode: CoverMode,
    model_out: &Path,
    trace_out: &Path,
) -> Result<FitSummary> {
    let raw = read_sample_file(sample_path)?;
    if raw.is_empty() {
        return Err(Error::input("sample file has no rows"));
    }
    let s = normalize_sample(raw)?;
    if !s.has_both_labels() {
        return Err(Error::input("sample has a single label; nothing to separate"));
    }
    let p = penalty.resolve(s.dim())?;
    let (model, trace) = srm_select(&s, &p, mode)?;
    fs::write(model_out, model.to_json())?;
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    fs::write(trace_out, buf)?;
    Ok(FitSummary {
        gamma: model.gamma(),
        removed_count: model.removed_count(),
        n: model.n(),
        objective: trace.chosen_row().map(|r| r.objective),
    })
}

/// Predicts each row of a points CSV with a saved model and writes
/// `index,label,f_value`. `f_value` is the extension value when the model
/// has both classes with margin at least gamma, and empty otherwise. An empty
/// points file gives empty output.
pub fn cmd_predict<W: Write>(model_path: &Path, points_path: &Path, mut out: W) -> Result<usize> {
    let model = CondensedModel::from_json(&fs::read_to_string(model_path)?)?;
    let points = read_points_csv(BufReader::new(fs::File::open(points_path)?))?;
    if points.is_empty() {
        return Ok(0);
    }
    let ext = crate::classify::LipschitzExtension::new(&model).ok();
    writeln!(out, "index,label,f_value")?;
    for (i, p) in points.iter().enumerate() {
        let label = model.predict(p.coords())?;
        let f = ext
            .as_ref()
            .map(|e| fmt_g17(e.value_at(p.coords())))
            .unwrap_or_default();
        writeln!(out, "{i},{label},{f}")?;
    }
    Ok(points.len())
}

/// Runs the dominance check and formats one line per level plus a verdict.
pub fn cmd_gridcheck(n: usize, penalty: &PenaltyParams, levels: usize) -> Result<(DominanceReport, String)> {
    if levels == 0 {
        return Err(Error::input("levels must be at least 1"));
    }
    let report = check_penalty_dominates(n, penalty, levels)?;
    let mut text = String::new();
    writeln!(
        text,
        "n = {n}, n_dim = {}, xi = {}, levels = {levels}",
        fmt_g17(report.grid.n_dim),
        fmt_g17(report.grid.xi)
    )
    .expect("write to string");
    writeln!(text, "level,gamma_prev,penalty,epsilon,holds").expect("write to string");
    for r in &report.rows {
        writeln!(
            text,
            "{},{},{},{},{}",
            r.level,
            fmt_g17(report.grid.gammas[r.level - 2]),
            fmt_g17(r.penalty),
            fmt_g17(r.epsilon),
            if r.holds() { "yes" } else { "no" }
        )
        .expect("write to string");
    }
    match &report.first_violation {
        None => writeln!(text, "PASS"),
        Some(v) => writeln!(text, "FAIL at level {}", v.level),
    }
    .expect("write to string");
    Ok((report, text))
}

/// Writes `n` spiral draws as a sample CSV and returns the Bayes risk and
/// the 1-NN asymptote of the law.
pub fn cmd_sample<W: Write>(p: &SpiralParams, n: usize, out: W) -> Result<(f64, f64)> {
    let s = sample_spiral(p, n)?;
    write_sample_csv(out, &s)?;
    Ok((bayes_risk(p), one_nn_asymptote(p)))
}
