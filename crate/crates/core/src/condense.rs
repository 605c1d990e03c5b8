//! Condensing a sample to a gamma-separated subsample, candidate margins, and
//! the model file format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cover::{self, build_conflict_graph};
use crate::error::{Error, Result};
use crate::io::{fmt_g17, parse_json_pair};
use crate::metric::{margin, Label, LabeledSample};

/// How the inner routine covers the conflict graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMode {
    /// Minimum cover from a maximum matching.
    Exact,
    /// Both endpoints of a greedy maximal matching (2-approximation).
    Greedy,
}

impl FromStr for CoverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CoverMode::Exact),
            "greedy" => Ok(CoverMode::Greedy),
            other => Err(Error::input(format!("unknown cover mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for CoverMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CoverMode::Exact => "exact",
            CoverMode::Greedy => "greedy",
        })
    }
}

/// A gamma-separated subsample and its provenance.
#[derive(Clone, Debug)]
pub struct CondensedModel {
    subsample: LabeledSample,
    gamma: f64,
    removed_count: usize,
    n: usize,
    exact: bool,
}

impl CondensedModel {
    pub(crate) fn from_removal(
        s: &LabeledSample,
        removed: &[bool],
        gamma: f64,
        exact: bool,
    ) -> CondensedModel {
        let kept: Vec<usize> = (0..s.len()).filter(|&i| !removed[i]).collect();
        CondensedModel {
            subsample: s.subset(&kept),
            gamma,
            removed_count: s.len() - kept.len(),
            n: s.len(),
            exact,
        }
    }

    /// The full sample as a model (plain 1-NN). `gamma` records the sample
    /// margin clipped to (0, 1].
    pub fn uncondensed(s: &LabeledSample) -> CondensedModel {
        let m = margin(s);
        let gamma = if m > 0.0 { m.min(1.0) } else { f64::MIN_POSITIVE };
        CondensedModel {
            subsample: s.clone(),
            gamma,
            removed_count: 0,
            n: s.len(),
            exact: true,
        }
    }

    pub fn subsample(&self) -> &LabeledSample {
        &self.subsample
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn removed_count(&self) -> usize {
        self.removed_count
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn exact(&self) -> bool {
        self.exact
    }

    pub fn scale(&self) -> f64 {
        self.subsample.scale()
    }

    /// `removed_count / n`.
    pub fn empirical_upper(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.removed_count as f64 / self.n as f64
        }
    }

    /// JSON with every double written to 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        write!(
            out,
            "{{\"gamma\":{},\"scale\":{},\"exact\":{},\"n\":{},\"removed_count\":{},\"points\":[",
            fmt_g17(self.gamma),
            fmt_g17(self.scale()),
            self.exact,
            self.n,
            self.removed_count
        )
        .expect("write to string");
        for (i, (p, y)) in self.subsample.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("[[");
            let coords: Vec<String> = p.iter().map(|&c| fmt_g17(c)).collect();
            out.push_str(&coords.join(","));
            write!(out, "],{y}]").expect("write to string");
        }
        out.push_str("]}\n");
        out
    }

    /// Parses [`CondensedModel::to_json`] output. The metric is Euclidean.
    pub fn from_json(text: &str) -> Result<CondensedModel> {
        let v: Value = serde_json::from_str(text)?;
        let field = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::input(format!("model JSON missing field {k:?}")))
        };
        let num = |k: &str| -> Result<f64> {
            field(k)?
                .as_f64()
                .ok_or_else(|| Error::input(format!("model field {k:?} must be a number")))
        };
        let count = |k: &str| -> Result<usize> {
            field(k)?
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Error::input(format!("model field {k:?} must be a count")))
        };
        let gamma = num("gamma")?;
        if !(gamma > 0.0) {
            return Err(Error::input("model gamma must be positive"));
        }
        let scale = num("scale")?;
        let exact = field("exact")?
            .as_bool()
            .ok_or_else(|| Error::input("model field \"exact\" must be a boolean"))?;
        let n = count("n")?;
        let removed_count = count("removed_count")?;
        let points = field("points")?
            .as_array()
            .ok_or_else(|| Error::input("model field \"points\" must be an array"))?
            .iter()
            .enumerate()
            .map(|(i, p)| parse_json_pair(p, i))
            .collect::<Result<Vec<_>>>()?;
        if removed_count + points.len() != n {
            return Err(Error::input("model counts are inconsistent"));
        }
        let subsample = LabeledSample::new(points)?.with_scale(scale)?;
        Ok(CondensedModel {
            subsample,
            gamma,
            removed_count,
            n,
            exact,
        })
    }
}

/// Removes a vertex cover of the gamma-conflict graph.
///
/// In exact mode the cover is minimum, so `removed_count` is the smallest
/// number of points whose removal leaves a gamma-separated subsample.
pub fn inner(s: &LabeledSample, gamma: f64, mode: CoverMode) -> Result<CondensedModel> {
    if s.is_empty() {
        return Err(Error::input("cannot condense an empty sample"));
    }
    let g = build_conflict_graph(s, gamma)?;
    let c = match mode {
        CoverMode::Exact => cover::minimum_cover(&g),
        CoverMode::Greedy => cover::greedy_cover(&g),
    };
    let mut removed = vec![false; s.len()];
    for &v in &c.vertices {
        removed[v] = true;
    }
    Ok(CondensedModel::from_removal(
        s,
        &removed,
        gamma,
        mode == CoverMode::Exact,
    ))
}

/// Sorted, deduplicated nonzero distances between opposite-labeled points.
/// Empty when a class is missing.
pub fn candidate_margins(s: &LabeledSample) -> Vec<f64> {
    let plus = s.indices_of(Label::Positive);
    let minus = s.indices_of(Label::Negative);
    let mut d: Vec<f64> = plus
        .iter()
        .flat_map(|&i| minus.iter().map(move |&j| s.distance(i, j)))
        .filter(|&d| d > 0.0)
        .collect();
    d.sort_unstable_by(f64::total_cmp);
    d.dedup();
    d
}

#[derive(Clone, Copy, Debug)]
struct OppositePair {
    distance: f64,
    plus: u32,
    minus: u32,
}

/// Every opposite-labeled pair sorted by (distance, plus index, minus index).
///
/// The conflict graph at any gamma is a prefix of this list, which lets the
/// margin sweep evaluate all candidates without rebuilding graphs.
pub struct MarginSweep<'a> {
    sample: &'a LabeledSample,
    pairs: Vec<OppositePair>,
    /// Sample index -> position within its class.
    position: Vec<u32>,
    n_plus: usize,
    n_minus: usize,
    candidates: Vec<f64>,
}

impl<'a> MarginSweep<'a> {
    pub fn new(sample: &'a LabeledSample) -> MarginSweep<'a> {
        let plus = sample.indices_of(Label::Positive);
        let minus = sample.indices_of(Label::Negative);
        let mut position = vec![0u32; sample.len()];
        for (p, &i) in plus.iter().enumerate() {
            position[i] = p as u32;
        }
        for (p, &j) in minus.iter().enumerate() {
            position[j] = p as u32;
        }
        let mut pairs = Vec::with_capacity(plus.len() * minus.len());
        for &i in &plus {
            let x = sample.point(i);
            for &j in &minus {
                pairs.push(OppositePair {
                    distance: sample.metric().raw(x, sample.point(j)) / sample.scale(),
                    plus: i as u32,
                    minus: j as u32,
                });
            }
        }
        pairs.sort_unstable_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then(a.plus.cmp(&b.plus))
                .then(a.minus.cmp(&b.minus))
        });
        let mut candidates: Vec<f64> = pairs
            .iter()
            .map(|p| p.distance.min(1.0))
            .filter(|&d| d > 0.0)
            .collect();
        candidates.dedup();
        MarginSweep {
            sample,
            pairs,
            position,
            n_plus: plus.len(),
            n_minus: minus.len(),
            candidates,
        }
    }

    pub fn sample(&self) -> &LabeledSample {
        self.sample
    }

    /// Candidate margins clipped to (0, 1], ascending and distinct.
    pub fn candidates(&self) -> &[f64] {
        &self.candidates
    }

    fn conflicts_below(&self, gamma: f64) -> &[OppositePair] {
        let end = self.pairs.partition_point(|p| p.distance < gamma);
        &self.pairs[..end]
    }

    /// `removed_count` of [`inner`] at every candidate, in candidate order.
    pub fn removed_counts(&self, mode: CoverMode) -> Vec<usize> {
        match mode {
            CoverMode::Greedy => self.greedy_counts(),
            CoverMode::Exact => self.exact_counts(),
        }
    }

    /// Greedy covers only grow as gamma grows because edges arrive in scan
    /// order, so one pass serves every candidate.
    fn greedy_counts(&self) -> Vec<usize> {
        let mut taken = vec![false; self.sample.len()];
        let mut removed = 0;
        let mut next = 0;
        let mut out = Vec::with_capacity(self.candidates.len());
        for &gamma in &self.candidates {
            while next < self.pairs.len() && self.pairs[next].distance < gamma {
                let p = self.pairs[next];
                let (a, b) = (p.plus as usize, p.minus as usize);
                if !taken[a] && !taken[b] {
                    taken[a] = true;
                    taken[b] = true;
                    removed += 2;
                }
                next += 1;
            }
            out.push(removed);
        }
        out
    }

    /// The greedy matching over all pairs as `(distance, plus, minus)` in scan
    /// order. The greedy cover at gamma is the endpoints of the pairs with
    /// distance below gamma.
    pub(crate) fn greedy_matching(&self) -> Vec<(f64, u32, u32)> {
        let mut taken = vec![false; self.sample.len()];
        let mut out = Vec::new();
        for p in &self.pairs {
            let (a, b) = (p.plus as usize, p.minus as usize);
            if !taken[a] && !taken[b] {
                taken[a] = true;
                taken[b] = true;
                out.push((p.distance, p.plus, p.minus));
            }
        }
        out
    }

    fn adjacency_below(&self, gamma: f64) -> Vec<Vec<u32>> {
        let mut adjacency = vec![Vec::new(); self.n_plus];
        for p in self.conflicts_below(gamma) {
            adjacency[self.position[p.plus as usize] as usize].push(self.position[p.minus as usize]);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        adjacency
    }

    /// Maximum matching at `gamma`, grown from a matching valid at a
    /// smaller margin.
    fn matching_at(&self, gamma: f64, start: Vec<u32>) -> Vec<u32> {
        cover::hopcroft_karp_from(&self.adjacency_below(gamma), self.n_minus, start)
    }

    /// The exact count is a nondecreasing step function of the candidate
    /// index, so bisection between unequal endpoints finds every step. Each
    /// matching is grown from the one at the lower end of its interval.
    fn exact_counts(&self) -> Vec<usize> {
        let c = self.candidates.len();
        if c == 0 {
            return Vec::new();
        }
        let size = |m: &[u32]| m.iter().filter(|&&v| v != u32::MAX).count();
        let mut out = vec![usize::MAX; c];
        let mut mates: HashMap<usize, Vec<u32>> = HashMap::new();
        let first = self.matching_at(self.candidates[0], vec![u32::MAX; self.n_plus]);
        let last = self.matching_at(self.candidates[c - 1], first.clone());
        out[0] = size(&first);
        out[c - 1] = size(&last);
        mates.insert(0, first);
        let mut stack = vec![(0usize, c - 1)];
        while let Some((lo, hi)) = stack.pop() {
            if hi <= lo + 1 {
                continue;
            }
            if out[lo] == out[hi] {
                let v = out[lo];
                out[lo + 1..hi].fill(v);
                continue;
            }
            let mid = lo + (hi - lo) / 2;
            let m = self.matching_at(self.candidates[mid], mates[&lo].clone());
            out[mid] = size(&m);
            mates.insert(mid, m);
            // Depth-first: the upper half first, so the lower one's start
            // matching is still stored when it is popped.
            stack.push((mid, hi));
            stack.push((lo, mid));
        }
        out
    }

    /// Same result as [`inner`] on the swept sample.
    pub fn condense(&self, gamma: f64, mode: CoverMode) -> Result<CondensedModel> {
        if !(gamma > 0.0) {
            return Err(Error::input(format!("gamma must be positive, got {gamma}")));
        }
        let n = self.sample.len();
        let mut removed = vec![false; n];
        let conflicts = self.conflicts_below(gamma);
        match mode {
            CoverMode::Greedy => {
                for p in conflicts {
                    let (a, b) = (p.plus as usize, p.minus as usize);
                    if !removed[a] && !removed[b] {
                        removed[a] = true;
                        removed[b] = true;
                    }
                }
            }
            CoverMode::Exact => {
                let plus = self.sample.indices_of(Label::Positive);
                let minus = self.sample.indices_of(Label::Negative);
                let mut adjacency = vec![Vec::new(); self.n_plus];
                for p in conflicts {
                    adjacency[self.position[p.plus as usize] as usize]
                        .push(self.position[p.minus as usize]);
                }
                for list in &mut adjacency {
                    list.sort_unstable();
                }
                let mate_plus = cover::hopcroft_karp(&adjacency, self.n_minus);
                let mut mate_minus = vec![u32::MAX; self.n_minus];
                for (u, &v) in mate_plus.iter().enumerate() {
                    if v != u32::MAX {
                        mate_minus[v as usize] = u as u32;
                    }
                }
                let (cp, cm) = cover::koenig_from_mates(&adjacency, &mate_plus, &mate_minus);
                for u in cp {
                    removed[plus[u]] = true;
                }
                for v in cm {
                    removed[minus[v]] = true;
                }
            }
        }
        Ok(CondensedModel::from_removal(
            self.sample,
            &removed,
            gamma,
            mode == CoverMode::Exact,
        ))
    }
}
