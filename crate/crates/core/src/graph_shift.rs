//! Directed coding graphs and their prime periodic orbits.
//!
//! Vertices are labelled `1..=k` in every public signature. A prime cycle is
//! stored in canonical form: the lexicographically least rotation of a
//! primitive closed walk, which is exactly a Lyndon word over the vertex
//! alphabet that is also a closed walk. Enumeration walks the Lyndon-prefix
//! tree (Fredricksen-Kessler-Maiorana) restricted to walks of the graph, so
//! every cycle is produced once without deduplication.

use crate::error::{Error, Result};
use crate::exec::{fold_tasks, Execution};

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    // 0-based successor lists, sorted by target: (target, edge index)
    succ: Vec<Vec<(usize, usize)>>,
    // first edge index for each ordered pair, row-major over 0-based labels
    index: Vec<Option<usize>>,
}

impl DirectedGraph {
    /// Builds a graph from 1-based edges, keeping their order. Only label
    /// ranges are checked here; structural defects are reported by
    /// [`validate_graph`].
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(i, j) in &edges {
            for v in [i, j] {
                if v == 0 || v > vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: v, vertex_count });
                }
            }
        }
        let mut succ = vec![Vec::new(); vertex_count];
        let mut index = vec![None; vertex_count * vertex_count];
        for (e, &(i, j)) in edges.iter().enumerate() {
            let slot = &mut index[(i - 1) * vertex_count + (j - 1)];
            if slot.is_none() {
                *slot = Some(e);
                succ[i - 1].push((j - 1, e));
            }
        }
        for list in &mut succ {
            list.sort_unstable();
        }
        Ok(Self { vertex_count, edges, succ, index })
    }

    /// The complete graph on `k` vertices including loops, edges in
    /// row-major order.
    pub fn complete(k: usize) -> Self {
        let edges = (1..=k).flat_map(|i| (1..=k).map(move |j| (i, j))).collect();
        Self::new(k, edges).expect("labels in range")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as 1-based ordered pairs, in construction order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Index of the edge `from -> to` (1-based labels).
    pub fn edge_index(&self, from: usize, to: usize) -> Option<usize> {
        if from == 0 || to == 0 || from > self.vertex_count || to > self.vertex_count {
            return None;
        }
        self.index[(from - 1) * self.vertex_count + (to - 1)]
    }

    pub(crate) fn edge_index0(&self, from: usize, to: usize) -> Option<usize> {
        self.index[from * self.vertex_count + to]
    }

    /// 0/1 adjacency pattern as row-major booleans.
    pub fn adjacency_pattern(&self) -> Vec<bool> {
        self.index.iter().map(Option::is_some).collect()
    }
}

/// Structural diagnostics; an empty list means the graph is a valid coding graph.
pub fn validate_graph(g: &DirectedGraph) -> Vec<String> {
    let k = g.vertex_count;
    let mut out = Vec::new();
    if k < 2 {
        out.push(format!("need at least 2 vertices, found {k}"));
    }
    let mut seen = vec![false; k * k];
    for &(i, j) in &g.edges {
        let slot = &mut seen[(i - 1) * k + (j - 1)];
        if *slot {
            out.push(format!("duplicate edge {i}->{j}"));
        }
        *slot = true;
    }
    let mut indeg = vec![0usize; k];
    for v in 0..k {
        for &(w, _) in &g.succ[v] {
            indeg[w] += 1;
        }
    }
    for v in 0..k {
        if g.succ[v].is_empty() {
            out.push(format!("vertex {} has out-degree 0", v + 1));
        }
        if indeg[v] == 0 {
            out.push(format!("vertex {} has in-degree 0", v + 1));
        }
    }
    if k > 0 && !strongly_connected(k, |v| g.succ[v].iter().map(|&(w, _)| w)) {
        out.push("graph is not strongly connected".to_string());
    }
    out
}

fn reach<I: Iterator<Item = usize>>(k: usize, start: usize, next: &dyn Fn(usize) -> I) -> Vec<bool> {
    let mut seen = vec![false; k];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for w in next(v) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

pub(crate) fn strongly_connected<I, F>(k: usize, next: F) -> bool
where
    I: Iterator<Item = usize>,
    F: Fn(usize) -> I,
{
    if k == 0 {
        return false;
    }
    if !reach(k, 0, &next).into_iter().all(|b| b) {
        return false;
    }
    let mut rev = vec![Vec::new(); k];
    for v in 0..k {
        for w in next(v) {
            rev[w].push(v);
        }
    }
    reach(k, 0, &|v: usize| rev[v].clone().into_iter()).into_iter().all(|b| b)
}

/// Period (gcd of cycle lengths) of an irreducible 0/1 pattern given by
/// successor lists, or `None` when the pattern is not strongly connected.
pub(crate) fn pattern_period(succ: &[Vec<usize>]) -> Option<usize> {
    let k = succ.len();
    if !strongly_connected(k, |v| succ[v].iter().copied()) {
        return None;
    }
    let mut level = vec![usize::MAX; k];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &w in &succ[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut period = 0usize;
    for v in 0..k {
        for &w in &succ[v] {
            let diff = (level[v] + 1).abs_diff(level[w]);
            period = num_integer::gcd(period, diff);
        }
    }
    Some(period)
}

/// Whether the gcd of cycle lengths is 1.
pub fn is_aperiodic(g: &DirectedGraph) -> Result<bool> {
    let violations = validate_graph(g);
    if !violations.is_empty() {
        return Err(Error::InvalidGraph(violations));
    }
    let succ: Vec<Vec<usize>> = g.succ.iter().map(|l| l.iter().map(|&(w, _)| w).collect()).collect();
    Ok(pattern_period(&succ) == Some(1))
}

/// A prime periodic orbit of the shift in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimeCycle {
    vertices: Vec<usize>,
}

impl PrimeCycle {
    /// Canonical 1-based vertex sequence.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn period(&self) -> usize {
        self.vertices.len()
    }

    /// Traversed edges as 1-based pairs, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |m| (self.vertices[m], self.vertices[(m + 1) % n]))
    }

    pub(crate) fn from_word0(word: &[usize]) -> Self {
        Self { vertices: word.iter().map(|v| v + 1).collect() }
    }

    pub(crate) fn word0(&self) -> Vec<usize> {
        self.vertices.iter().map(|v| v - 1).collect()
    }
}

impl std::fmt::Display for PrimeCycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Smallest `p` dividing `n` with `word` invariant under rotation by `p`.
fn smallest_period(word: &[usize]) -> usize {
    let n = word.len();
    (1..=n).find(|&p| n.is_multiple_of(p) && (0..n).all(|i| word[i] == word[(i + p) % n])).unwrap_or(n)
}

/// Canonical representative of the periodic point spelled by `sequence`.
pub fn canonical_form(g: &DirectedGraph, sequence: &[usize]) -> Result<PrimeCycle> {
    if sequence.is_empty() {
        return Err(Error::EmptyCycle);
    }
    let n = sequence.len();
    for m in 0..n {
        let (from, to) = (sequence[m], sequence[(m + 1) % n]);
        if g.edge_index(from, to).is_none() {
            if from == 0 || from > g.vertex_count {
                return Err(Error::VertexOutOfRange { vertex: from, vertex_count: g.vertex_count });
            }
            return Err(Error::MissingEdge { from, to });
        }
    }
    let p = smallest_period(sequence);
    if p < n {
        return Err(Error::NotPrimitive { repetitions: n / p });
    }
    let best = (0..n)
        .min_by(|&a, &b| (0..n).map(|i| sequence[(a + i) % n]).cmp((0..n).map(|i| sequence[(b + i) % n])))
        .unwrap_or(0);
    Ok(PrimeCycle { vertices: (0..n).map(|i| sequence[(best + i) % n]).collect() })
}

/// All prime cycles of period `<= n_max`, sorted by period then lexicographically.
pub fn enumerate_prime_cycles(g: &DirectedGraph, n_max: usize) -> Vec<PrimeCycle> {
    enumerate_prime_cycles_with(g, n_max, Execution::default())
}

pub fn enumerate_prime_cycles_with(g: &DirectedGraph, n_max: usize, exec: Execution) -> Vec<PrimeCycle> {
    let bounds = CycleBounds { max_period: n_max, max_length: f64::INFINITY };
    let mut words = fold_lyndon_cycles(
        g,
        None,
        bounds,
        &[],
        exec,
        Vec::new,
        |acc: &mut Vec<Vec<usize>>, c: &CycleView<'_>| acc.push(c.word.to_vec()),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    );
    words.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    words.iter().map(|w| PrimeCycle::from_word0(w)).collect()
}

/// Per-edge weights seen by the enumeration engine.
#[derive(Clone, Copy)]
pub(crate) struct EdgeWeights<'a> {
    pub roof: &'a [f64],
    pub class: &'a [i64],
    pub dim: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CycleBounds {
    pub max_period: usize,
    pub max_length: f64,
}

/// A prime cycle as produced by the engine: 0-based canonical word, the
/// edge indices it traverses (closing edge last), and its Birkhoff sums.
pub(crate) struct CycleView<'a> {
    pub word: &'a [usize],
    pub edges: &'a [usize],
    pub length: f64,
    pub class: &'a [i64],
}

#[derive(Clone)]
struct Frame {
    word: Vec<usize>,
    edges: Vec<usize>,
    p: usize,
    length: f64,
    class: Vec<i64>,
}

struct Engine<'a> {
    g: &'a DirectedGraph,
    weights: Option<EdgeWeights<'a>>,
    bounds: CycleBounds,
    exclude: &'a [Vec<usize>],
    // hop and roof distance from b back to a0 through vertices >= a0,
    // indexed [a0 * k + b]
    hops: Vec<usize>,
    dist: Vec<f64>,
}

const LENGTH_SLACK: f64 = 1e-9;

impl<'a> Engine<'a> {
    fn new(
        g: &'a DirectedGraph,
        weights: Option<EdgeWeights<'a>>,
        bounds: CycleBounds,
        exclude: &'a [Vec<usize>],
    ) -> Self {
        let k = g.vertex_count;
        let mut hops = vec![usize::MAX; k * k];
        let mut dist = vec![f64::INFINITY; k * k];
        for a0 in 0..k {
            // Bellman-Ford style relaxation towards a0 over vertices >= a0
            let h = &mut hops[a0 * k..(a0 + 1) * k];
            let d = &mut dist[a0 * k..(a0 + 1) * k];
            for v in a0..k {
                if let Some(e) = g.edge_index0(v, a0) {
                    h[v] = 1;
                    d[v] = weights.map_or(1.0, |w| w.roof[e]);
                }
            }
            for _ in 0..k {
                for v in a0..k {
                    for &(w, e) in &g.succ[v] {
                        if w <= a0 {
                            continue;
                        }
                        if h[w] != usize::MAX && h[w] + 1 < h[v] {
                            h[v] = h[w] + 1;
                        }
                        let r = weights.map_or(1.0, |ws| ws.roof[e]);
                        if d[w] + r < d[v] {
                            d[v] = d[w] + r;
                        }
                    }
                }
            }
        }
        Self { g, weights, bounds, exclude, hops, dist }
    }

    fn root(&self, a0: usize) -> Frame {
        let dim = self.weights.map_or(0, |w| w.dim);
        Frame { word: vec![a0], edges: Vec::new(), p: 1, length: 0.0, class: vec![0; dim] }
    }

    fn children(&self, f: &Frame) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let n = f.word.len();
        let last = f.word[n - 1];
        let reference = f.word[n - f.p];
        let a0 = f.word[0];
        let k = self.g.vertex_count;
        let base_len = f.length;
        let p = f.p;
        self.g.succ[last].iter().filter_map(move |&(b, e)| {
            if b < reference {
                return None;
            }
            let h = self.hops[a0 * k + b];
            if h == usize::MAX || n + h > self.bounds.max_period {
                return None;
            }
            let r = self.weights.map_or(1.0, |w| w.roof[e]);
            let bound = self.bounds.max_length;
            if base_len + r + self.dist[a0 * k + b] > bound + LENGTH_SLACK * bound.abs().max(1.0) {
                return None;
            }
            let np = if b == reference { p } else { n + 1 };
            Some((b, e, np))
        })
    }

    fn push(&self, f: &mut Frame, b: usize, e: usize, np: usize) -> usize {
        let old = f.p;
        f.word.push(b);
        f.edges.push(e);
        f.p = np;
        if let Some(w) = self.weights {
            f.length += w.roof[e];
            for (c, x) in f.class.iter_mut().zip(&w.class[e * w.dim..(e + 1) * w.dim]) {
                *c += x;
            }
        } else {
            f.length += 1.0;
        }
        old
    }

    fn pop(&self, f: &mut Frame, old_p: usize, old_len: f64) {
        f.word.pop();
        let e = f.edges.pop().expect("non-root frame");
        f.p = old_p;
        f.length = old_len;
        if let Some(w) = self.weights {
            for (c, x) in f.class.iter_mut().zip(&w.class[e * w.dim..(e + 1) * w.dim]) {
                *c -= x;
            }
        }
    }

    fn emit<A, V>(&self, f: &mut Frame, acc: &mut A, visit: &V)
    where
        V: Fn(&mut A, &CycleView<'_>),
    {
        let n = f.word.len();
        if f.p != n || n > self.bounds.max_period {
            return;
        }
        let Some(e) = self.g.edge_index0(f.word[n - 1], f.word[0]) else {
            return;
        };
        let (r, dim) = self.weights.map_or((1.0, 0), |w| (w.roof[e], w.dim));
        let length = f.length + r;
        if length > self.bounds.max_length {
            return;
        }
        if self.exclude.iter().any(|x| x.as_slice() == f.word.as_slice()) {
            return;
        }
        f.edges.push(e);
        if let Some(w) = self.weights {
            for (c, x) in f.class.iter_mut().zip(&w.class[e * dim..(e + 1) * dim]) {
                *c += x;
            }
        }
        visit(acc, &CycleView { word: &f.word, edges: &f.edges, length, class: &f.class });
        f.edges.pop();
        if let Some(w) = self.weights {
            for (c, x) in f.class.iter_mut().zip(&w.class[e * dim..(e + 1) * dim]) {
                *c -= x;
            }
        }
    }

    fn explore<A, V>(&self, f: &mut Frame, acc: &mut A, visit: &V)
    where
        V: Fn(&mut A, &CycleView<'_>),
    {
        self.emit(f, acc, visit);
        for (b, e, np) in self.children(f) {
            let old_len = f.length;
            let old_p = self.push(f, b, e, np);
            self.explore(f, acc, visit);
            self.pop(f, old_p, old_len);
        }
    }
}

const MIN_TASKS: usize = 64;
const MAX_SEED_DEPTH: usize = 8;

/// Visits every prime cycle within `bounds`, excluding the 0-based canonical
/// words in `exclude`, and folds the visits into one accumulator.
#[allow(clippy::too_many_arguments)]
pub(crate) fn fold_lyndon_cycles<A, I, V, M>(
    g: &DirectedGraph,
    weights: Option<EdgeWeights<'_>>,
    bounds: CycleBounds,
    exclude: &[Vec<usize>],
    exec: Execution,
    init: I,
    visit: V,
    merge: M,
) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    V: Fn(&mut A, &CycleView<'_>) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let engine = Engine::new(g, weights, bounds, exclude);
    // Split the prefix tree into independent subtrees. Frames above the
    // frontier only emit themselves; frontier frames own their subtree.
    let mut tasks: Vec<(Frame, bool)> = Vec::new();
    let mut frontier: Vec<Frame> = (0..g.vertex_count).map(|a0| engine.root(a0)).collect();
    let mut depth = 1;
    while depth < MAX_SEED_DEPTH && !frontier.is_empty() && frontier.len() < MIN_TASKS && exec.is_parallel() {
        let mut next = Vec::new();
        for f in frontier {
            for (b, e, np) in engine.children(&f) {
                let mut child = f.clone();
                engine.push(&mut child, b, e, np);
                next.push(child);
            }
            tasks.push((f, false));
        }
        frontier = next;
        depth += 1;
    }
    tasks.extend(frontier.into_iter().map(|f| (f, true)));

    fold_tasks(
        exec,
        tasks,
        &init,
        |mut acc, (mut frame, extend)| {
            if extend {
                engine.explore(&mut frame, &mut acc, &visit);
            } else {
                engine.emit(&mut frame, &mut acc, &visit);
            }
            acc
        },
        &merge,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> DirectedGraph {
        DirectedGraph::new(2, vec![(1, 1), (1, 2), (2, 1)]).unwrap()
    }

    fn cycles(list: &[&[usize]]) -> Vec<Vec<usize>> {
        list.iter().map(|c| c.to_vec()).collect()
    }

    fn as_vecs(cs: &[PrimeCycle]) -> Vec<Vec<usize>> {
        cs.iter().map(|c| c.vertices().to_vec()).collect()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_graph(&DirectedGraph::complete(2)).is_empty());
        let g = DirectedGraph::new(2, vec![(1, 2)]).unwrap();
        let v = validate_graph(&g);
        assert!(v.iter().any(|m| m == "vertex 2 has out-degree 0"), "{v:?}");
        let tri = DirectedGraph::new(3, vec![(1, 2), (2, 3), (3, 1)]).unwrap();
        assert!(validate_graph(&tri).is_empty());
        let dup = DirectedGraph::new(2, vec![(1, 2), (2, 1), (1, 2)]).unwrap();
        assert_eq!(validate_graph(&dup), vec!["duplicate edge 1->2".to_string()]);
        assert!(DirectedGraph::new(2, vec![(1, 3)]).is_err());
    }

    #[test]
    fn aperiodicity_examples() {
        let swap = DirectedGraph::new(2, vec![(1, 2), (2, 1)]).unwrap();
        assert!(!is_aperiodic(&swap).unwrap());
        assert!(is_aperiodic(&DirectedGraph::complete(2)).unwrap());
        assert!(is_aperiodic(&golden()).unwrap());
        let tri = DirectedGraph::new(3, vec![(1, 2), (2, 3), (3, 1)]).unwrap();
        assert!(!is_aperiodic(&tri).unwrap());
        let bad = DirectedGraph::new(2, vec![(1, 2)]).unwrap();
        assert!(matches!(is_aperiodic(&bad), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn canonical_form_examples() {
        let g = DirectedGraph::complete(2);
        assert_eq!(canonical_form(&g, &[2, 1]).unwrap().vertices(), &[1, 2]);
        assert_eq!(canonical_form(&g, &[1, 2, 1, 2]), Err(Error::NotPrimitive { repetitions: 2 }));
        assert_eq!(canonical_form(&g, &[2, 1, 1]).unwrap().vertices(), &[1, 1, 2]);
        assert_eq!(canonical_form(&g, &[1, 1, 2]).unwrap().vertices(), &[1, 1, 2]);
        assert_eq!(canonical_form(&golden(), &[2, 2]), Err(Error::MissingEdge { from: 2, to: 2 }));
        assert_eq!(canonical_form(&g, &[]), Err(Error::EmptyCycle));
    }

    #[test]
    fn enumeration_examples() {
        let full = DirectedGraph::complete(2);
        assert_eq!(as_vecs(&enumerate_prime_cycles(&full, 2)), cycles(&[&[1], &[2], &[1, 2]]));
        let four = enumerate_prime_cycles(&full, 4);
        assert_eq!(four.len(), 8);
        let by_period: Vec<usize> = (1..=4).map(|n| four.iter().filter(|c| c.period() == n).count()).collect();
        assert_eq!(by_period, vec![2, 1, 2, 3]);
        assert_eq!(as_vecs(&enumerate_prime_cycles(&golden(), 3)), cycles(&[&[1], &[1, 2], &[1, 1, 2]]));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = DirectedGraph::complete(3);
        let a = enumerate_prime_cycles_with(&g, 9, Execution::Sequential);
        let b = enumerate_prime_cycles_with(&g, 9, Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn pattern_period_of_cycles() {
        assert_eq!(pattern_period(&[vec![1], vec![2], vec![0]]), Some(3));
        assert_eq!(pattern_period(&[vec![0, 1], vec![0]]), Some(1));
        assert_eq!(pattern_period(&[vec![1], vec![]]), None);
    }
}
