//! Roof functions and integer class vectors on edges.
//!
//! Class vectors live in `Z^d` with `d = b + N`; the last `N` coordinates are
//! meridian (linking) coordinates around the removed orbits. Classes can be
//! given per edge or through a spanning tree of the underlying undirected
//! graph, in which case only chords carry nonzero values.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph_shift::{fold_lyndon_cycles, CycleBounds, DirectedGraph, EdgeWeights, PrimeCycle};
use crate::lattice::{smith_invariants, EchelonBasis};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSystem {
    betti: usize,
    meridians: usize,
    roof: Vec<f64>,
    // flat, stride dim
    class: Vec<i64>,
    r_min: f64,
}

impl WeightSystem {
    /// Weights aligned with `g.edges()`. `betti + meridians` is the class dimension.
    pub fn new(
        g: &DirectedGraph,
        betti: usize,
        meridians: usize,
        roof: Vec<f64>,
        class: Vec<Vec<i64>>,
    ) -> Result<Self> {
        let d = betti + meridians;
        if d == 0 {
            return Err(Error::InvalidWeights("class dimension must be at least 1".into()));
        }
        for (list_len, what) in [(roof.len(), "roof"), (class.len(), "class")] {
            if list_len < g.edge_count() {
                let (from, to) = g.edges()[list_len];
                return Err(Error::MissingEdgeWeight { from, to });
            }
            if list_len > g.edge_count() {
                return Err(Error::InvalidWeights(format!("{list_len} {what} values for {} edges", g.edge_count())));
            }
        }
        for (e, r) in roof.iter().enumerate() {
            if !(r.is_finite() && *r > 0.0) {
                let (from, to) = g.edges()[e];
                return Err(Error::InvalidWeights(format!("roof must be positive on edge {from}->{to}, found {r}")));
            }
        }
        let mut flat = Vec::with_capacity(d * class.len());
        for c in &class {
            if c.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: c.len() });
            }
            flat.extend_from_slice(c);
        }
        let r_min = roof.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { betti, meridians, roof, class: flat, r_min })
    }

    pub fn dim(&self) -> usize {
        self.betti + self.meridians
    }

    pub fn betti(&self) -> usize {
        self.betti
    }

    pub fn meridians(&self) -> usize {
        self.meridians
    }

    pub fn edge_count(&self) -> usize {
        self.roof.len()
    }

    pub fn roof(&self, edge: usize) -> f64 {
        self.roof[edge]
    }

    pub fn roofs(&self) -> &[f64] {
        &self.roof
    }

    pub fn class(&self, edge: usize) -> &[i64] {
        let d = self.dim();
        &self.class[edge * d..(edge + 1) * d]
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// Same classes, new roof.
    pub fn with_roof(&self, g: &DirectedGraph, roof: Vec<f64>) -> Result<Self> {
        let class = (0..self.edge_count()).map(|e| self.class(e).to_vec()).collect();
        Self::new(g, self.betti, self.meridians, roof, class)
    }

    pub(crate) fn edge_weights(&self) -> EdgeWeights<'_> {
        EdgeWeights { roof: &self.roof, class: &self.class, dim: self.dim() }
    }

    pub(crate) fn check_graph(&self, g: &DirectedGraph) -> Result<()> {
        if self.edge_count() != g.edge_count() {
            return Err(Error::DimensionMismatch { expected: g.edge_count(), found: self.edge_count() });
        }
        Ok(())
    }
}

/// Spanning tree of the undirected graph plus values on the remaining edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ChordAssignment {
    pub tree_edges: Vec<(usize, usize)>,
    pub chord_values: Vec<((usize, usize), Vec<i64>)>,
}

/// Per-edge class vectors induced by a chord assignment: zero on tree edges,
/// the chord value on each chord traversed in its own direction.
pub fn weights_from_chords(g: &DirectedGraph, ca: &ChordAssignment, dim: usize) -> Result<Vec<Vec<i64>>> {
    let k = g.vertex_count();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut is_tree = vec![false; g.edge_count()];
    for &(i, j) in &ca.tree_edges {
        let e = g.edge_index(i, j).ok_or_else(|| Error::InvalidTree(format!("{i}->{j} is not an edge")))?;
        if i == j {
            return Err(Error::InvalidTree(format!("loop {i}->{j} cannot be a tree edge")));
        }
        if is_tree[e] {
            return Err(Error::InvalidTree(format!("{i}->{j} listed twice")));
        }
        let (a, b) = (find(&mut parent, i - 1), find(&mut parent, j - 1));
        if a == b {
            return Err(Error::InvalidTree(format!("{i}->{j} closes a cycle")));
        }
        parent[a] = b;
        is_tree[e] = true;
    }
    if ca.tree_edges.len() + 1 != k {
        return Err(Error::InvalidTree(format!("{} edges for {k} vertices", ca.tree_edges.len())));
    }
    let mut class: Vec<Option<Vec<i64>>> = is_tree.iter().map(|&t| t.then(|| vec![0; dim])).collect();
    for ((i, j), value) in &ca.chord_values {
        let e = g.edge_index(*i, *j).ok_or(Error::MissingEdge { from: *i, to: *j })?;
        if is_tree[e] {
            return Err(Error::InvalidTree(format!("{i}->{j} is both tree edge and chord")));
        }
        if value.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: value.len() });
        }
        class[e] = Some(value.clone());
    }
    class
        .into_iter()
        .enumerate()
        .map(|(e, c)| {
            let (from, to) = g.edges()[e];
            c.ok_or(Error::MissingChordValue { from, to })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffData {
    pub length: f64,
    pub class: Vec<i64>,
}

/// Length and class of a cycle: sums of roof and class over its edges.
pub fn birkhoff(g: &DirectedGraph, c: &PrimeCycle, w: &WeightSystem) -> Result<BirkhoffData> {
    let mut length = 0.0;
    let mut class = vec![0i64; w.dim()];
    for (from, to) in c.edges() {
        let e = g.edge_index(from, to).ok_or(Error::MissingEdge { from, to })?;
        if e >= w.edge_count() {
            return Err(Error::MissingEdgeWeight { from, to });
        }
        length += w.roof(e);
        class.iter_mut().zip(w.class(e)).for_each(|(a, b)| *a += b);
    }
    Ok(BirkhoffData { length, class })
}

/// Linking numbers with the removed orbits: the trailing meridian coordinates.
pub fn linking_numbers(g: &DirectedGraph, c: &PrimeCycle, w: &WeightSystem) -> Result<Vec<i64>> {
    if w.meridians() == 0 {
        return Err(Error::NoMeridians);
    }
    let mut class = birkhoff(g, c, w)?.class;
    Ok(class.split_off(w.betti()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport {
    pub generates: bool,
    pub rank: usize,
    /// Nonzero elementary divisors of the stacked class matrix.
    pub divisors: Vec<i64>,
}

/// Whether classes of prime cycles of period `<= n_probe` generate `Z^d`.
pub fn generation_check(g: &DirectedGraph, w: &WeightSystem, n_probe: usize) -> GenerationReport {
    generation_check_with(g, w, n_probe, Execution::default())
}

pub fn generation_check_with(g: &DirectedGraph, w: &WeightSystem, n_probe: usize, exec: Execution) -> GenerationReport {
    let d = w.dim();
    let basis = fold_lyndon_cycles(
        g,
        Some(w.edge_weights()),
        CycleBounds { max_period: n_probe, max_length: f64::INFINITY },
        &[],
        exec,
        || EchelonBasis::new(d),
        |acc, c| acc.insert(c.class),
        |mut a, b| {
            for row in b.rows() {
                let row: Vec<i64> = row.iter().map(|&x| x as i64).collect();
                a.insert(&row);
            }
            a
        },
    );
    let divisors: Vec<i64> = smith_invariants(&basis.rows()).into_iter().map(|x| x as i64).collect();
    let rank = divisors.len();
    GenerationReport { generates: rank == d && divisors.iter().all(|&x| x == 1), rank, divisors }
}

/// Probe grid used when none is given: 0.1, 0.2, ..., 1.0.
pub fn default_eps_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

const COSET_TOL: f64 = 1e-9;

/// Scales `eps` at which every periodic-orbit length of period `<= n_probe`
/// (iterates included) sits in a single coset `c + eps Z`.
pub fn lattice_length_heuristic(g: &DirectedGraph, w: &WeightSystem, n_probe: usize, eps_grid: &[f64]) -> Vec<f64> {
    let prime: Vec<(usize, f64)> = fold_lyndon_cycles(
        g,
        Some(w.edge_weights()),
        CycleBounds { max_period: n_probe, max_length: f64::INFINITY },
        &[],
        Execution::default(),
        Vec::new,
        |acc: &mut Vec<(usize, f64)>, c| acc.push((c.word.len(), c.length)),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    );
    let mut lengths: Vec<f64> = Vec::new();
    for &(n, l) in &prime {
        lengths.extend((1..=n_probe / n).map(|m| m as f64 * l));
    }
    lengths.sort_by(f64::total_cmp);
    let Some(&base) = lengths.first() else {
        return Vec::new();
    };
    eps_grid
        .iter()
        .copied()
        .filter(|&eps| {
            lengths.iter().all(|&l| {
                let x = l - base;
                (x - eps * (x / eps).round()).abs() <= COSET_TOL
            })
        })
        .collect()
}
