//! Conflict graphs between opposite-labeled points, maximum matchings and
//! vertex covers.
//!
//! Vertices are identified by sample index throughout the public API. The
//! matching and cover routines work on dense per-side positions internally.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::metric::{Label, LabeledSample};

const FREE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConflictEdge {
    pub plus: usize,
    pub minus: usize,
    pub distance: f64,
}

/// Bipartite graph joining +1 and -1 points closer than `gamma`.
#[derive(Clone, Debug)]
pub struct ConflictGraph {
    plus_nodes: Vec<usize>,
    minus_nodes: Vec<usize>,
    /// Sorted by (plus, minus).
    edges: Vec<ConflictEdge>,
    gamma: f64,
    /// Plus position -> ascending minus positions.
    adjacency: Vec<Vec<u32>>,
}

/// All opposite-labeled pairs at normalized distance strictly below `gamma`.
pub fn build_conflict_graph(s: &LabeledSample, gamma: f64) -> Result<ConflictGraph> {
    if !(gamma > 0.0) {
        return Err(Error::input(format!("gamma must be positive, got {gamma}")));
    }
    let plus_nodes = s.indices_of(Label::Positive);
    let minus_nodes = s.indices_of(Label::Negative);
    let mut edges = Vec::new();
    let mut adjacency = vec![Vec::new(); plus_nodes.len()];
    for (pi, &i) in plus_nodes.iter().enumerate() {
        for (mj, &j) in minus_nodes.iter().enumerate() {
            let d = s.distance(i, j);
            if d < gamma {
                edges.push(ConflictEdge {
                    plus: i,
                    minus: j,
                    distance: d,
                });
                adjacency[pi].push(mj as u32);
            }
        }
    }
    Ok(ConflictGraph {
        plus_nodes,
        minus_nodes,
        edges,
        gamma,
        adjacency,
    })
}

impl ConflictGraph {
    /// Builds a graph from explicit vertex sets and edges, for callers that
    /// do not start from geometry.
    pub fn from_edges(
        plus_nodes: Vec<usize>,
        minus_nodes: Vec<usize>,
        edges: Vec<ConflictEdge>,
        gamma: f64,
    ) -> Result<ConflictGraph> {
        let mut plus_nodes = plus_nodes;
        let mut minus_nodes = minus_nodes;
        plus_nodes.sort_unstable();
        minus_nodes.sort_unstable();
        let plus_pos: HashMap<usize, usize> =
            plus_nodes.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let minus_pos: HashMap<usize, usize> =
            minus_nodes.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        if plus_pos.len() != plus_nodes.len()
            || minus_pos.len() != minus_nodes.len()
            || plus_nodes.iter().any(|v| minus_pos.contains_key(v))
        {
            return Err(Error::input("vertex sets must be distinct and disjoint"));
        }
        let mut edges = edges;
        edges.sort_by(|a, b| (a.plus, a.minus).cmp(&(b.plus, b.minus)));
        edges.dedup_by(|a, b| a.plus == b.plus && a.minus == b.minus);
        let mut adjacency = vec![Vec::new(); plus_nodes.len()];
        for e in &edges {
            let (Some(&p), Some(&m)) = (plus_pos.get(&e.plus), minus_pos.get(&e.minus)) else {
                return Err(Error::input(format!(
                    "edge ({}, {}) does not join a plus and a minus vertex",
                    e.plus, e.minus
                )));
            };
            adjacency[p].push(m as u32);
        }
        Ok(ConflictGraph {
            plus_nodes,
            minus_nodes,
            edges,
            gamma,
            adjacency,
        })
    }

    pub fn plus_nodes(&self) -> &[usize] {
        &self.plus_nodes
    }

    pub fn minus_nodes(&self) -> &[usize] {
        &self.minus_nodes
    }

    pub fn edges(&self) -> &[ConflictEdge] {
        &self.edges
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn vertex_count(&self) -> usize {
        self.plus_nodes.len() + self.minus_nodes.len()
    }

    pub fn has_edge(&self, plus: usize, minus: usize) -> bool {
        self.edges
            .binary_search_by(|e| (e.plus, e.minus).cmp(&(plus, minus)))
            .is_ok()
    }

    fn plus_position(&self, v: usize) -> Option<usize> {
        self.plus_nodes.binary_search(&v).ok()
    }

    fn minus_position(&self, v: usize) -> Option<usize> {
        self.minus_nodes.binary_search(&v).ok()
    }
}

/// Vertex-disjoint edges, as (plus, minus) sample indices sorted by plus.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Every pair is an edge of `g` and no vertex is used twice.
    pub fn is_valid_for(&self, g: &ConflictGraph) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.pairs
            .iter()
            .all(|&(p, m)| g.has_edge(p, m) && seen.insert(p) && seen.insert(m))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexCover {
    /// Ascending sample indices.
    pub vertices: Vec<usize>,
    /// True when produced by an exact minimum-cover routine.
    pub exact: bool,
}

impl VertexCover {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn covers(&self, g: &ConflictGraph) -> bool {
        g.edges
            .iter()
            .all(|e| self.contains(e.plus) || self.contains(e.minus))
    }
}

/// Hopcroft-Karp on position-indexed adjacency. Returns the mate (minus
/// position) of every plus position, or `FREE`.
pub(crate) fn hopcroft_karp(adjacency: &[Vec<u32>], n_minus: usize) -> Vec<u32> {
    hopcroft_karp_from(adjacency, n_minus, vec![FREE; adjacency.len()])
}

/// Hopcroft-Karp grown from an initial matching, which must use only edges
/// of `adjacency`.
pub(crate) fn hopcroft_karp_from(
    adjacency: &[Vec<u32>],
    n_minus: usize,
    mut mate_plus: Vec<u32>,
) -> Vec<u32> {
    let n_plus = adjacency.len();
    let mut mate_minus = vec![FREE; n_minus];
    for (u, &v) in mate_plus.iter().enumerate() {
        if v != FREE {
            mate_minus[v as usize] = u as u32;
        }
    }
    let mut layer = vec![u32::MAX; n_plus];
    let mut queue = VecDeque::new();

    loop {
        // BFS layering from free plus vertices.
        queue.clear();
        for u in 0..n_plus {
            if mate_plus[u] == FREE {
                layer[u] = 0;
                queue.push_back(u);
            } else {
                layer[u] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                let w = mate_minus[v as usize];
                if w == FREE {
                    found = true;
                } else if layer[w as usize] == u32::MAX {
                    layer[w as usize] = layer[u] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        if !found {
            break;
        }
        let mut next_edge = vec![0usize; n_plus];
        for u in 0..n_plus {
            if mate_plus[u] == FREE {
                augment(
                    u,
                    adjacency,
                    &mut mate_plus,
                    &mut mate_minus,
                    &mut layer,
                    &mut next_edge,
                );
            }
        }
    }
    mate_plus
}

/// Layered DFS with an explicit stack. Returns true if `root` was matched.
fn augment(
    root: usize,
    adjacency: &[Vec<u32>],
    mate_plus: &mut [u32],
    mate_minus: &mut [u32],
    layer: &mut [u32],
    next_edge: &mut [usize],
) -> bool {
    let mut stack = vec![root];
    while let Some(&u) = stack.last() {
        let mut advanced = false;
        while next_edge[u] < adjacency[u].len() {
            let v = adjacency[u][next_edge[u]] as usize;
            next_edge[u] += 1;
            let w = mate_minus[v];
            if w == FREE {
                // Flip the path root -> ... -> u -> v.
                let mut v = v;
                while let Some(x) = stack.pop() {
                    let prev = mate_plus[x];
                    mate_plus[x] = v as u32;
                    mate_minus[v] = x as u32;
                    v = prev as usize;
                }
                return true;
            }
            let w = w as usize;
            if layer[w] == layer[u] + 1 {
                stack.push(w);
                advanced = true;
                break;
            }
        }
        if !advanced {
            layer[u] = u32::MAX;
            stack.pop();
        }
    }
    false
}

/// A maximum-cardinality matching (Hopcroft-Karp, O(E sqrt V)).
pub fn maximum_matching(g: &ConflictGraph) -> Matching {
    let mates = hopcroft_karp(&g.adjacency, g.minus_nodes.len());
    let pairs = mates
        .iter()
        .enumerate()
        .filter(|(_, &m)| m != FREE)
        .map(|(p, &m)| (g.plus_nodes[p], g.minus_nodes[m as usize]))
        .collect();
    Matching { pairs }
}

/// König's construction: alternate from unmatched plus vertices, then take
/// the unreached plus vertices and the reached minus vertices.
///
/// Fails with [`Error::Contract`] when `m` is not a maximum matching of `g`.
pub fn koenig_cover(g: &ConflictGraph, m: &Matching) -> Result<VertexCover> {
    if !m.is_valid_for(g) {
        return Err(Error::Contract("matching is not a set of disjoint graph edges".into()));
    }
    let n_plus = g.plus_nodes.len();
    let n_minus = g.minus_nodes.len();
    let mut mate_plus = vec![FREE; n_plus];
    let mut mate_minus = vec![FREE; n_minus];
    for &(p, q) in &m.pairs {
        let (p, q) = (
            g.plus_position(p).expect("validated"),
            g.minus_position(q).expect("validated"),
        );
        mate_plus[p] = q as u32;
        mate_minus[q] = p as u32;
    }
    let vertices = koenig_from_mates(&g.adjacency, &mate_plus, &mate_minus);
    let mut cover: Vec<usize> = vertices
        .0
        .iter()
        .map(|&p| g.plus_nodes[p])
        .chain(vertices.1.iter().map(|&q| g.minus_nodes[q]))
        .collect();
    cover.sort_unstable();
    let cover = VertexCover {
        vertices: cover,
        exact: true,
    };
    if cover.len() != m.len() || !cover.covers(g) {
        return Err(Error::Contract(format!(
            "matching of size {} is not maximum (cover check failed)",
            m.len()
        )));
    }
    Ok(cover)
}

/// Returns (plus positions, minus positions) of the König cover.
pub(crate) fn koenig_from_mates(
    adjacency: &[Vec<u32>],
    mate_plus: &[u32],
    mate_minus: &[u32],
) -> (Vec<usize>, Vec<usize>) {
    let mut seen_plus = vec![false; mate_plus.len()];
    let mut seen_minus = vec![false; mate_minus.len()];
    let mut queue: VecDeque<usize> = (0..mate_plus.len())
        .filter(|&u| mate_plus[u] == FREE)
        .collect();
    for &u in &queue {
        seen_plus[u] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            let v = v as usize;
            if mate_plus[u] == v as u32 || seen_minus[v] {
                continue;
            }
            seen_minus[v] = true;
            let w = mate_minus[v];
            if w != FREE && !seen_plus[w as usize] {
                seen_plus[w as usize] = true;
                queue.push_back(w as usize);
            }
        }
    }
    let plus = (0..mate_plus.len()).filter(|&u| !seen_plus[u]).collect();
    let minus = (0..mate_minus.len()).filter(|&v| seen_minus[v]).collect();
    (plus, minus)
}

/// Minimum vertex cover via maximum matching and König's construction.
pub fn minimum_cover(g: &ConflictGraph) -> VertexCover {
    koenig_cover(g, &maximum_matching(g)).expect("Hopcroft-Karp returns a maximum matching")
}

/// Takes both endpoints of every edge whose endpoints are both uncovered,
/// scanning edges by ascending (distance, plus index, minus index).
///
/// The chosen edges form a maximal matching, so the cover is at most twice
/// the minimum.
pub fn greedy_cover(g: &ConflictGraph) -> VertexCover {
    let mut order: Vec<&ConflictEdge> = g.edges.iter().collect();
    order.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.plus.cmp(&b.plus))
            .then(a.minus.cmp(&b.minus))
    });
    let mut taken = std::collections::HashSet::new();
    let mut vertices = Vec::new();
    for e in order {
        if !taken.contains(&e.plus) && !taken.contains(&e.minus) {
            taken.insert(e.plus);
            taken.insert(e.minus);
            vertices.push(e.plus);
            vertices.push(e.minus);
        }
    }
    vertices.sort_unstable();
    VertexCover {
        vertices,
        exact: false,
    }
}

/// Largest graph [`brute_force_min_cover`] accepts.
pub const BRUTE_FORCE_MAX_VERTICES: usize = 24;

/// Exhaustive minimum vertex cover for small graphs.
///
/// Enumerates every subset of the smaller side; the other side must then
/// contain all neighbors of the unchosen vertices. Independent of matching
/// theory, which makes it a test oracle.
pub fn brute_force_min_cover(g: &ConflictGraph) -> Result<VertexCover> {
    if g.vertex_count() > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::input(format!(
            "brute-force cover limited to {BRUTE_FORCE_MAX_VERTICES} vertices, graph has {}",
            g.vertex_count()
        )));
    }
    // Neighbor bitmasks from the enumerated side.
    let plus_side = g.plus_nodes.len() <= g.minus_nodes.len();
    let (side, other) = if plus_side {
        (&g.plus_nodes, &g.minus_nodes)
    } else {
        (&g.minus_nodes, &g.plus_nodes)
    };
    let mut nbrs = vec![0u32; side.len()];
    for e in &g.edges {
        let (a, b) = if plus_side {
            (g.plus_position(e.plus), g.minus_position(e.minus))
        } else {
            (g.minus_position(e.minus), g.plus_position(e.plus))
        };
        nbrs[a.expect("edge endpoint")] |= 1 << b.expect("edge endpoint");
    }
    let mut best: Option<(u32, u32, u32)> = None;
    for chosen in 0u32..(1u32 << side.len()) {
        let mut forced = 0u32;
        for (a, &nb) in nbrs.iter().enumerate() {
            if chosen & (1 << a) == 0 {
                forced |= nb;
            }
        }
        let size = chosen.count_ones() + forced.count_ones();
        if best.map_or(true, |(s, _, _)| size < s) {
            best = Some((size, chosen, forced));
        }
    }
    let (_, chosen, forced) = best.expect("at least the empty subset");
    let mut vertices: Vec<usize> = (0..side.len())
        .filter(|&a| chosen & (1 << a) != 0)
        .map(|a| side[a])
        .chain((0..other.len()).filter(|&b| forced & (1 << b) != 0).map(|b| other[b]))
        .collect();
    vertices.sort_unstable();
    Ok(VertexCover {
        vertices,
        exact: true,
    })
}
