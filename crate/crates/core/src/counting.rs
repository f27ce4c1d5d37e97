//! Exact and predicted counts of prime periodic orbits by length window and
//! class.
//!
//! Exact counts come from the Lyndon enumeration in [`crate::graph_shift`],
//! pruned by length. The predictor is the local limit formula
//!
//! ```text
//! N(T) ~ sqrt|det H(rho)| / (2 pi)^(d/2) * A0 * exp(-<u, alpha>)
//!        * exp(h(rho) T + <u, T rho - floor(T rho)>) / T^(1 + d/2)
//! ```
//!
//! with `H` the entropy Hessian, `u = u(rho)`, `p = p(u)` and
//! `A0 = (1 - exp(-p delta)) / p` for the window `(T - delta, T]`.
//! The fundamental domain for `floor` is `[0, 1)^d`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::graph_shift::{fold_lyndon_cycles, CycleBounds, DirectedGraph, PrimeCycle};
use crate::homology_weights::{generation_check, WeightSystem};
use crate::lattice::EchelonBasis;
use crate::legendre::{solve_u, DirectionData, SolveOptions};
use crate::thermo::{equilibrium_measure, flow_pressure, integrate_observable};

pub const DEFAULT_PERIOD_CAP: usize = 32;
/// Below this `|p|` the window factor takes its continuous limit `delta`.
const SMALL_PRESSURE: f64 = 1e-12;
const GROUP_LIMIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountOptions {
    /// Largest symbolic period `floor(T / r_min)` exact counts may reach.
    pub period_cap: usize,
    pub exec: Execution,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self { period_cap: DEFAULT_PERIOD_CAP, exec: Execution::default() }
    }
}

impl CountOptions {
    fn check(&self, t: f64, w: &WeightSystem) -> Result<()> {
        let needed = (t / w.r_min()).floor();
        if needed > self.period_cap as f64 {
            return Err(Error::BudgetExceeded { needed: needed as usize, cap: self.period_cap });
        }
        Ok(())
    }
}

/// Componentwise `floor(T rho)`.
pub fn floor_class(rho: &[f64], t: f64) -> Vec<i64> {
    rho.iter().map(|r| (t * r).floor() as i64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountQuery {
    pub t: f64,
    pub delta: f64,
    pub rho: Vec<f64>,
    pub alpha: Vec<i64>,
    pub removed: Vec<PrimeCycle>,
}

impl CountQuery {
    /// `floor(T rho) + alpha`.
    pub fn target_class(&self) -> Vec<i64> {
        floor_class(&self.rho, self.t).iter().zip(&self.alpha).map(|(a, b)| a + b).collect()
    }

    fn window(&self) -> Window {
        Window { lo: self.t - self.delta, hi: self.t, class: Some(self.target_class()) }
    }

    fn check(&self, w: &WeightSystem) -> Result<()> {
        for (len, what) in [(self.rho.len(), w.dim()), (self.alpha.len(), w.dim())] {
            if len != what {
                return Err(Error::DimensionMismatch { expected: what, found: len });
            }
        }
        if !(self.delta > 0.0 && self.delta <= self.t) {
            return Err(Error::Validation(vec![format!(
                "window needs 0 < delta <= T, found delta = {}, T = {}",
                self.delta, self.t
            )]));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub t: f64,
    pub delta: f64,
    pub target_class: Vec<i64>,
    pub exact: u64,
    pub predicted: f64,
    /// `exact / predicted` when the prediction is positive.
    pub ratio: Option<f64>,
}

/// Length window `(lo, hi]`, optionally restricted to one class.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub class: Option<Vec<i64>>,
}

fn words0(removed: &[PrimeCycle]) -> Vec<Vec<usize>> {
    removed.iter().map(PrimeCycle::word0).collect()
}

fn length_bounds(hi: f64) -> CycleBounds {
    CycleBounds { max_period: usize::MAX, max_length: hi }
}

/// Exact counts for several windows from a single enumeration. Budget
/// checks are the caller's job.
pub fn count_windows(
    g: &DirectedGraph,
    w: &WeightSystem,
    windows: &[Window],
    removed: &[PrimeCycle],
    exec: Execution,
) -> Vec<u64> {
    let Some(hi) = windows.iter().map(|x| x.hi).reduce(f64::max) else {
        return Vec::new();
    };
    let lo = windows.iter().map(|x| x.lo).fold(f64::INFINITY, f64::min);
    let exclude = words0(removed);
    fold_lyndon_cycles(
        g,
        Some(w.edge_weights()),
        length_bounds(hi),
        &exclude,
        exec,
        || vec![0u64; windows.len()],
        |acc, c| {
            if c.length <= lo {
                return;
            }
            for (slot, win) in acc.iter_mut().zip(windows) {
                if c.length > win.lo && c.length <= win.hi && win.class.as_deref().is_none_or(|k| k == c.class) {
                    *slot += 1;
                }
            }
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    )
}

/// Counts per class of prime cycles with length in `(lo, hi]`.
pub fn class_histogram(
    g: &DirectedGraph,
    w: &WeightSystem,
    lo: f64,
    hi: f64,
    removed: &[PrimeCycle],
    opts: CountOptions,
) -> Result<BTreeMap<Vec<i64>, u64>> {
    opts.check(hi, w)?;
    let exclude = words0(removed);
    Ok(fold_lyndon_cycles(
        g,
        Some(w.edge_weights()),
        length_bounds(hi),
        &exclude,
        opts.exec,
        BTreeMap::new,
        |acc: &mut BTreeMap<Vec<i64>, u64>, c| {
            if c.length > lo {
                *acc.entry(c.class.to_vec()).or_default() += 1;
            }
        },
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        },
    ))
}

/// Prime cycles outside `removed` with length in `(T - delta, T]` and class
/// `floor(T rho) + alpha`.
pub fn exact_window_count(g: &DirectedGraph, w: &WeightSystem, q: &CountQuery, opts: CountOptions) -> Result<u64> {
    w.check_graph(g)?;
    q.check(w)?;
    opts.check(q.t, w)?;
    Ok(count_windows(g, w, &[q.window()], &q.removed, opts.exec)[0])
}

fn mobius(mut n: u64) -> i128 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

type Poly = BTreeMap<Vec<i64>, u128>;

/// Closed-walk generating data for unit-roof models: traces of powers of
/// the class-weighted adjacency matrix with polynomial entries.
#[derive(Debug, Clone)]
pub struct TraceOracle {
    dim: usize,
    // closed[m - 1]: class -> number of closed walks of length m
    closed: Vec<Poly>,
}

impl TraceOracle {
    pub fn new(g: &DirectedGraph, w: &WeightSystem, n_max: usize) -> Result<Self> {
        w.check_graph(g)?;
        if w.roofs().iter().any(|&r| r != 1.0) {
            return Err(Error::RoofNotUnit);
        }
        let k = g.vertex_count();
        let dim = w.dim();
        let mut base = vec![vec![Poly::new(); k]; k];
        for (e, &(i, j)) in g.edges().iter().enumerate() {
            *base[i - 1][j - 1].entry(w.class(e).to_vec()).or_default() += 1;
        }
        let mut power = base.clone();
        let mut closed = Vec::with_capacity(n_max);
        for m in 1..=n_max {
            if m > 1 {
                power = poly_matmul(&power, &base);
            }
            let mut trace = Poly::new();
            for (i, row) in power.iter().enumerate() {
                for (c, n) in &row[i] {
                    *trace.entry(c.clone()).or_default() += n;
                }
            }
            closed.push(trace);
        }
        Ok(Self { dim, closed })
    }

    pub fn n_max(&self) -> usize {
        self.closed.len()
    }

    pub fn closed_walks(&self, m: usize, beta: &[i64]) -> u128 {
        self.closed.get(m.wrapping_sub(1)).and_then(|t| t.get(beta)).copied().unwrap_or(0)
    }

    /// Classes reached by closed walks of length `m`.
    pub fn classes(&self, m: usize) -> Vec<Vec<i64>> {
        self.closed.get(m.wrapping_sub(1)).map(|t| t.keys().cloned().collect()).unwrap_or_default()
    }

    /// Prime cycles of period `n` and class `beta`, by Moebius inversion of
    /// `W(n, beta) = sum_{j | (n, beta)} (n / j) P(n / j, beta / j)`.
    pub fn prime_count(&self, n: usize, beta: &[i64]) -> u128 {
        assert_eq!(beta.len(), self.dim);
        let mut total: i128 = 0;
        for j in 1..=n {
            if !n.is_multiple_of(j) || beta.iter().any(|b| b % j as i64 != 0) {
                continue;
            }
            let mu = mobius(j as u64);
            if mu == 0 {
                continue;
            }
            let reduced: Vec<i64> = beta.iter().map(|b| b / j as i64).collect();
            total += mu * self.closed_walks(n / j, &reduced) as i128;
        }
        debug_assert_eq!(total % n as i128, 0);
        (total / n as i128) as u128
    }
}

fn poly_matmul(a: &[Vec<Poly>], b: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let k = a.len();
    let mut out = vec![vec![Poly::new(); k]; k];
    for i in 0..k {
        for l in 0..k {
            if a[i][l].is_empty() {
                continue;
            }
            for j in 0..k {
                for (ca, na) in &a[i][l] {
                    for (cb, nb) in &b[l][j] {
                        let c: Vec<i64> = ca.iter().zip(cb).map(|(x, y)| x + y).collect();
                        *out[i][j].entry(c).or_default() += na * nb;
                    }
                }
            }
        }
    }
    out
}

/// Prime cycles of period `n` with class `beta`; unit roofs only.
pub fn trace_prime_count(g: &DirectedGraph, w: &WeightSystem, n: usize, beta: &[i64]) -> Result<u128> {
    if beta.len() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), found: beta.len() });
    }
    Ok(TraceOracle::new(g, w, n)?.prime_count(n, beta))
}

/// Window factor: the integral of `exp(p x)` over `(-delta, 0]`.
pub fn window_factor(p: f64, delta: f64) -> f64 {
    if p.abs() > SMALL_PRESSURE {
        -(-p * delta).exp_m1() / p
    } else {
        delta
    }
}

/// Asymptotic count for the query at the solved direction `dd`.
pub fn predict_count(dd: &DirectionData, q: &CountQuery) -> Result<f64> {
    let d = dd.rho.len();
    if q.rho.len() != d || q.alpha.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: q.rho.len().max(q.alpha.len()) });
    }
    if q.rho.iter().zip(&dd.rho).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::Validation(vec!["direction data was solved for a different rho".into()]));
    }
    let det = dd.hessian_h.determinant().abs();
    if !(det.is_finite() && det > 0.0) {
        return Err(Error::SingularHessian);
    }
    let t = q.t;
    let floor = floor_class(&q.rho, t);
    let frac: Vec<f64> = q.rho.iter().zip(&floor).map(|(r, f)| t * r - *f as f64).collect();
    let u_alpha: f64 = dd.u.iter().zip(&q.alpha).map(|(u, a)| u * *a as f64).sum();
    let u_frac: f64 = dd.u.iter().zip(&frac).map(|(u, f)| u * f).sum();
    let half_d = d as f64 / 2.0;
    let prefactor = det.sqrt() / (2.0 * std::f64::consts::PI).powf(half_d);
    let a0 = window_factor(dd.pressure_at_u, q.delta);
    Ok(prefactor * a0 * (-u_alpha).exp() * (dd.entropy * t + u_frac).exp() / t.powf(1.0 + half_d))
}

fn solve_for(g: &DirectedGraph, w: &WeightSystem, rho: &[f64]) -> Result<DirectionData> {
    solve_u(g, w, rho, SolveOptions::default())
}

/// One row per `T`: exact count, prediction and their ratio. Rows beyond the
/// enumeration budget carry their own error.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    g: &DirectedGraph,
    w: &WeightSystem,
    rho: &[f64],
    alpha: &[i64],
    delta: f64,
    t_list: &[f64],
    removed: &[PrimeCycle],
    opts: CountOptions,
) -> Result<Vec<Result<CountResult>>> {
    if t_list.is_empty() {
        return Ok(Vec::new());
    }
    let dd = solve_for(g, w, rho)?;
    sweep_at(g, w, &dd, alpha, delta, t_list, removed, opts)
}

#[allow(clippy::too_many_arguments)]
pub fn sweep_at(
    g: &DirectedGraph,
    w: &WeightSystem,
    dd: &DirectionData,
    alpha: &[i64],
    delta: f64,
    t_list: &[f64],
    removed: &[PrimeCycle],
    opts: CountOptions,
) -> Result<Vec<Result<CountResult>>> {
    w.check_graph(g)?;
    let queries: Vec<CountQuery> = t_list
        .iter()
        .map(|&t| CountQuery { t, delta, rho: dd.rho.clone(), alpha: alpha.to_vec(), removed: removed.to_vec() })
        .collect();
    let mut rows: Vec<Result<CountResult>> = Vec::with_capacity(queries.len());
    let mut windows = Vec::new();
    let mut slots = Vec::new();
    for q in &queries {
        let row = q.check(w).and_then(|_| opts.check(q.t, w)).and_then(|_| predict_count(dd, q));
        match row {
            Ok(predicted) => {
                slots.push(rows.len());
                windows.push(q.window());
                rows.push(Ok(CountResult {
                    t: q.t,
                    delta,
                    target_class: q.target_class(),
                    exact: 0,
                    predicted,
                    ratio: None,
                }));
            }
            Err(e) => rows.push(Err(e)),
        }
    }
    let counts = count_windows(g, w, &windows, removed, opts.exec);
    for (slot, exact) in slots.into_iter().zip(counts) {
        if let Ok(row) = &mut rows[slot] {
            row.exact = exact;
            row.ratio = (row.predicted > 0.0).then(|| exact as f64 / row.predicted);
        }
    }
    Ok(rows)
}

/// Ratio `exact / predicted` averaged over `jitter` evaluations at
/// `T + j delta / jitter`, `j = 0..jitter`.
#[allow(clippy::too_many_arguments)]
pub fn jittered_ratios(
    g: &DirectedGraph,
    w: &WeightSystem,
    dd: &DirectionData,
    alpha: &[i64],
    delta: f64,
    t_list: &[f64],
    jitter: usize,
    removed: &[PrimeCycle],
    opts: CountOptions,
) -> Result<Vec<f64>> {
    let jitter = jitter.max(1);
    let expanded: Vec<f64> =
        t_list.iter().flat_map(|&t| (0..jitter).map(move |j| t + j as f64 * delta / jitter as f64)).collect();
    let rows = sweep_at(g, w, dd, alpha, delta, &expanded, removed, opts)?;
    let mut out = Vec::with_capacity(t_list.len());
    for chunk in rows.chunks(jitter) {
        let mut sum = 0.0;
        for row in chunk {
            let row = row.as_ref().map_err(Clone::clone)?;
            sum += row.ratio.ok_or(Error::SingularHessian)?;
        }
        out.push(sum / jitter as f64);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MargulisReport {
    pub t: f64,
    pub exact: u64,
    /// `exp(hT) / (hT)` with `h` the topological entropy of the flow.
    pub reference: f64,
}

impl MargulisReport {
    pub fn ratio(&self) -> f64 {
        self.exact as f64 / self.reference
    }
}

/// Prime cycles (outside `removed`) of length `<= T` against `exp(hT)/(hT)`.
pub fn margulis_total(
    g: &DirectedGraph,
    w: &WeightSystem,
    removed: &[PrimeCycle],
    t: f64,
    opts: CountOptions,
) -> Result<MargulisReport> {
    w.check_graph(g)?;
    opts.check(t, w)?;
    let h = flow_pressure(g, w, &vec![0.0; w.dim()])?;
    let exact = count_windows(g, w, &[Window { lo: f64::NEG_INFINITY, hi: t, class: None }], removed, opts.exec)[0];
    Ok(MargulisReport { t, exact, reference: (h * t).exp() / (h * t) })
}

/// A finite quotient of the class group, or a permutation representation
/// given by edge labels.
#[derive(Debug, Clone, PartialEq)]
pub enum FiniteQuotient {
    /// `Z^d / L` with `L` spanned by the given generators.
    Lattice {
        generators: Vec<Vec<i64>>,
        basis: EchelonBasis,
    },
    Permutation(PermutationQuotient),
}

impl FiniteQuotient {
    pub fn lattice(generators: Vec<Vec<i64>>, dim: usize) -> Result<Self> {
        let mut basis = EchelonBasis::new(dim);
        for v in &generators {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            basis.insert(v);
        }
        if basis.rank() < dim {
            return Err(Error::InfiniteQuotient(format!("lattice has rank {} < {dim}", basis.rank())));
        }
        let order: i128 = basis.pivots().expect("full rank").iter().product();
        if order > GROUP_LIMIT as i128 {
            return Err(Error::InfiniteQuotient(format!("order {order} exceeds {GROUP_LIMIT}")));
        }
        Ok(Self::Lattice { generators, basis })
    }

    /// `Z^d / m Z^d`.
    pub fn cyclic(dim: usize, modulus: i64) -> Result<Self> {
        let generators = (0..dim).map(|i| (0..dim).map(|j| if i == j { modulus } else { 0 }).collect()).collect();
        Self::lattice(generators, dim)
    }

    /// Permutations of `1..=degree`, one per edge in edge order.
    pub fn permutation(degree: usize, labels: Vec<Vec<usize>>) -> Result<Self> {
        PermutationQuotient::new(degree, labels).map(Self::Permutation)
    }

    pub fn order(&self) -> usize {
        match self {
            Self::Lattice { basis, .. } => basis.pivots().expect("full rank").iter().product::<i128>() as usize,
            Self::Permutation(p) => p.elements.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationQuotient {
    pub degree: usize,
    /// 1-based images, one permutation per edge.
    pub labels: Vec<Vec<usize>>,
    elements: Vec<Vec<usize>>,
    // mul[a][b]: apply a, then b
    mul: Vec<Vec<usize>>,
    edge_element: Vec<usize>,
    class_of: Vec<usize>,
    class_sizes: Vec<usize>,
}

impl PermutationQuotient {
    fn new(degree: usize, labels: Vec<Vec<usize>>) -> Result<Self> {
        let mut gens = Vec::new();
        for l in &labels {
            let mut seen = vec![false; degree];
            if l.len() != degree || l.iter().any(|&x| x == 0 || x > degree || std::mem::replace(&mut seen[x - 1], true))
            {
                return Err(Error::Validation(vec![format!("{l:?} is not a permutation of 1..={degree}")]));
            }
            gens.push(l.iter().map(|x| x - 1).collect::<Vec<usize>>());
        }
        let compose = |a: &[usize], b: &[usize]| -> Vec<usize> { a.iter().map(|&x| b[x]).collect() };
        let identity: Vec<usize> = (0..degree).collect();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(identity.clone(), 0)]);
        let mut elements = vec![identity];
        let mut i = 0;
        while i < elements.len() {
            for gen in &gens {
                let next = compose(&elements[i], gen);
                if !index.contains_key(&next) {
                    if elements.len() >= GROUP_LIMIT {
                        return Err(Error::InfiniteQuotient(format!("generated group exceeds {GROUP_LIMIT} elements")));
                    }
                    index.insert(next.clone(), elements.len());
                    elements.push(next);
                }
            }
            i += 1;
        }
        let n = elements.len();
        let mul: Vec<Vec<usize>> =
            (0..n).map(|a| (0..n).map(|b| index[&compose(&elements[a], &elements[b])]).collect()).collect();
        let inverse: Vec<usize> = (0..n).map(|a| (0..n).find(|&b| mul[a][b] == 0).expect("group")).collect();
        let mut class_of = vec![usize::MAX; n];
        let mut class_sizes = Vec::new();
        for a in 0..n {
            if class_of[a] != usize::MAX {
                continue;
            }
            let id = class_sizes.len();
            let mut size = 0;
            for h in 0..n {
                let c = mul[mul[inverse[h]][a]][h];
                if class_of[c] == usize::MAX {
                    class_of[c] = id;
                    size += 1;
                }
            }
            class_sizes.push(size);
        }
        let edge_element = gens.iter().map(|g| index[g]).collect();
        Ok(Self { degree, labels, elements, mul, edge_element, class_of, class_sizes })
    }

    fn class_label(&self, class: usize) -> String {
        let rep = (0..self.elements.len()).find(|&a| self.class_of[a] == class).expect("nonempty class");
        self.elements[rep].iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassFrequency {
    /// Coset representative (`;`-joined) or a permutation in the conjugacy class.
    pub label: String,
    pub count: u64,
    pub frequency: f64,
    /// Limiting frequency `|C| / |G|`.
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChebotarevReport {
    pub total: u64,
    pub classes: Vec<ClassFrequency>,
    pub warnings: Vec<String>,
}

impl ChebotarevReport {
    pub fn max_deviation(&self) -> f64 {
        self.classes.iter().map(|c| (c.frequency - c.reference).abs()).fold(0.0, f64::max)
    }
}

const CHEBOTAREV_GENERATION_PROBE: usize = 8;

/// Empirical distribution of quotient classes over prime cycles of period
/// `<= n_max` outside `removed`.
pub fn chebotarev_distribution(
    g: &DirectedGraph,
    w: &WeightSystem,
    removed: &[PrimeCycle],
    quot: &FiniteQuotient,
    n_max: usize,
    exec: Execution,
) -> Result<ChebotarevReport> {
    w.check_graph(g)?;
    let exclude = words0(removed);
    let bounds = CycleBounds { max_period: n_max, max_length: f64::INFINITY };
    let mut warnings = Vec::new();
    let (labels, sizes, counts): (Vec<String>, Vec<usize>, Vec<u64>) = match quot {
        FiniteQuotient::Lattice { basis, .. } => {
            let order = quot.order();
            let pivots: Vec<i64> = basis.pivots().expect("full rank").iter().map(|&p| p as i64).collect();
            // coset representatives in the box prod [0, pivot), mixed-radix indexed
            let index_of =
                |rep: &[i64]| rep.iter().zip(&pivots).fold(0usize, |acc, (r, p)| acc * *p as usize + *r as usize);
            let mut labels = vec![String::new(); order];
            for idx in 0..order {
                let mut rest = idx;
                let mut rep = vec![0i64; pivots.len()];
                for c in (0..pivots.len()).rev() {
                    rep[c] = (rest % pivots[c] as usize) as i64;
                    rest /= pivots[c] as usize;
                }
                labels[idx] = rep.iter().map(i64::to_string).collect::<Vec<_>>().join(";");
            }
            let counts = fold_lyndon_cycles(
                g,
                Some(w.edge_weights()),
                bounds,
                &exclude,
                exec,
                || vec![0u64; order],
                |acc, c| {
                    let rep = basis.reduce(c.class).expect("full rank");
                    acc[index_of(&rep)] += 1;
                },
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
            let report = generation_check(g, w, n_max.min(CHEBOTAREV_GENERATION_PROBE));
            if !report.generates {
                warnings.push(format!(
                    "cycle classes up to period {} do not generate Z^{} (rank {}, divisors {:?}); frequencies need not be uniform",
                    n_max.min(CHEBOTAREV_GENERATION_PROBE),
                    w.dim(),
                    report.rank,
                    report.divisors
                ));
            }
            (labels, vec![1; order], counts)
        }
        FiniteQuotient::Permutation(pq) => {
            if pq.edge_element.len() != g.edge_count() {
                return Err(Error::DimensionMismatch { expected: g.edge_count(), found: pq.edge_element.len() });
            }
            let n_classes = pq.class_sizes.len();
            let counts = fold_lyndon_cycles(
                g,
                None,
                bounds,
                &exclude,
                exec,
                || vec![0u64; n_classes],
                |acc, c| {
                    let elem = c.edges.iter().fold(0usize, |x, &e| pq.mul[x][pq.edge_element[e]]);
                    acc[pq.class_of[elem]] += 1;
                },
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
            let labels = (0..n_classes).map(|c| pq.class_label(c)).collect();
            (labels, pq.class_sizes.clone(), counts)
        }
    };
    let total: u64 = counts.iter().sum();
    let order: usize = sizes.iter().sum();
    let classes = labels
        .into_iter()
        .zip(sizes)
        .zip(counts)
        .map(|((label, size), count)| ClassFrequency {
            label,
            count,
            frequency: if total > 0 { count as f64 / total as f64 } else { 0.0 },
            reference: size as f64 / order as f64,
        })
        .collect();
    Ok(ChebotarevReport { total, classes, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquidistReport {
    /// Mean of `(sum of phi over edges) / length` over qualifying cycles.
    pub empirical: f64,
    /// Equilibrium-state average of `phi`.
    pub expected: f64,
    pub cycles: u64,
}

/// Compares the constrained cycle average of `phi` with its equilibrium average.
pub fn equidistribution_test(
    g: &DirectedGraph,
    w: &WeightSystem,
    dd: &DirectionData,
    q: &CountQuery,
    phi: &[f64],
    opts: CountOptions,
) -> Result<EquidistReport> {
    let mut many = equidistribution_many(g, w, dd, q, &[phi.to_vec()], opts)?;
    Ok(many.remove(0))
}

/// [`equidistribution_test`] for several observables from one enumeration.
pub fn equidistribution_many(
    g: &DirectedGraph,
    w: &WeightSystem,
    dd: &DirectionData,
    q: &CountQuery,
    phis: &[Vec<f64>],
    opts: CountOptions,
) -> Result<Vec<EquidistReport>> {
    w.check_graph(g)?;
    q.check(w)?;
    opts.check(q.t, w)?;
    for phi in phis {
        if phi.len() < g.edge_count() {
            return Err(Error::MissingEdgeValue(phi.len()));
        }
    }
    let mm = equilibrium_measure(g, w, &dd.u)?;
    let window = q.window();
    let target = window.class.clone().expect("query window has a class");
    let exclude = words0(&q.removed);
    let (count, sums) = fold_lyndon_cycles(
        g,
        Some(w.edge_weights()),
        length_bounds(window.hi),
        &exclude,
        opts.exec,
        || (0u64, vec![0.0f64; phis.len()]),
        |acc, c| {
            if c.length > window.lo && c.class == target.as_slice() {
                acc.0 += 1;
                for (s, phi) in acc.1.iter_mut().zip(phis) {
                    *s += c.edges.iter().map(|&e| phi[e]).sum::<f64>() / c.length;
                }
            }
        },
        |mut a, b| {
            a.0 += b.0;
            a.1.iter_mut().zip(b.1).for_each(|(x, y)| *x += y);
            a
        },
    );
    if count == 0 {
        return Err(Error::EmptySelection);
    }
    let expected: Vec<f64> = map_ordered(Execution::Sequential, phis, |phi| integrate_observable(&mm, w, phi))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(sums
        .into_iter()
        .zip(expected)
        .map(|(s, expected)| EquidistReport { empirical: s / count as f64, expected, cycles: count })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_shift::canonical_form;

    fn full2() -> (DirectedGraph, WeightSystem) {
        let g = DirectedGraph::complete(2);
        let class = g.edges().iter().map(|&(_, j)| vec![(j == 2) as i64]).collect();
        (g.clone(), WeightSystem::new(&g, 0, 1, vec![1.0; 4], class).unwrap())
    }

    fn query(t: f64, delta: f64, target: i64, removed: Vec<PrimeCycle>) -> CountQuery {
        // rho = 0 makes the target class literal through alpha
        CountQuery { t, delta, rho: vec![0.0], alpha: vec![target], removed }
    }

    #[test]
    fn floor_examples() {
        assert_eq!(floor_class(&[0.3], 10.0), vec![3]);
        assert_eq!(floor_class(&[0.0], 123.4), vec![0]);
        assert_eq!(floor_class(&[0.25, -0.4], 7.0), vec![1, -3]);
    }

    #[test]
    fn window_count_examples() {
        let (g, w) = full2();
        let opts = CountOptions::default();
        assert_eq!(exact_window_count(&g, &w, &query(3.0, 3.0, 1, vec![]), opts).unwrap(), 3);
        assert_eq!(exact_window_count(&g, &w, &query(1.0, 1.0, 0, vec![]), opts).unwrap(), 1);
        let removed = vec![canonical_form(&g, &[2]).unwrap()];
        assert_eq!(exact_window_count(&g, &w, &query(1.0, 1.0, 1, removed), opts).unwrap(), 0);
    }

    #[test]
    fn budget_is_enforced() {
        let (g, w) = full2();
        let err = exact_window_count(&g, &w, &query(40.0, 1.0, 0, vec![]), CountOptions::default());
        assert_eq!(err, Err(Error::BudgetExceeded { needed: 40, cap: 32 }));
    }

    #[test]
    fn trace_examples() {
        let (g, w) = full2();
        assert_eq!(trace_prime_count(&g, &w, 4, &[2]).unwrap(), 1);
        assert_eq!(trace_prime_count(&g, &w, 1, &[0]).unwrap(), 1);
        assert_eq!(trace_prime_count(&g, &w, 2, &[1]).unwrap(), 1);
        let w2 = w.with_roof(&g, vec![2.0; 4]).unwrap();
        assert_eq!(trace_prime_count(&g, &w2, 2, &[1]).unwrap_err(), Error::RoofNotUnit);
    }

    #[test]
    fn mobius_values() {
        let got: Vec<i128> = (1..=12).map(mobius).collect();
        assert_eq!(got, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]);
    }

    #[test]
    fn prediction_example_assembles_from_components() {
        let (g, w) = full2();
        let dd = solve_u(&g, &w, &[0.5], SolveOptions::default()).unwrap();
        let q = CountQuery { t: 10.0, delta: 1.0, rho: vec![0.5], alpha: vec![0], removed: vec![] };
        let ln2 = 2f64.ln();
        // sqrt(4) / sqrt(2 pi) * (1 - 1/2) / ln 2 * 2^10 / 10^1.5
        let expected = 2.0 / (2.0 * std::f64::consts::PI).sqrt() * (0.5 / ln2) * 1024.0 / 10f64.powf(1.5);
        let got = predict_count(&dd, &q).unwrap();
        assert!((got - expected).abs() < 1e-5 * expected);
        assert!((got - 18.6).abs() < 0.05);
        let shifted = CountQuery { alpha: vec![3], ..q.clone() };
        assert!((predict_count(&dd, &shifted).unwrap() - got).abs() < 1e-9 * got);
    }

    #[test]
    fn window_factor_limit() {
        assert_eq!(window_factor(0.0, 0.7), 0.7);
        assert!((window_factor(1e-9, 0.7) - 0.7).abs() < 1e-9);
        assert!((window_factor(2f64.ln(), 1.0) - 0.5 / 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn margulis_examples() {
        let (g, w) = full2();
        let opts = CountOptions::default();
        let r = margulis_total(&g, &w, &[], 4.0, opts).unwrap();
        assert_eq!(r.exact, 8);
        assert!((r.reference - 16.0 / (4.0 * 2f64.ln())).abs() < 1e-9);
        let r1 = margulis_total(&g, &w, &[], 1.0, opts).unwrap();
        assert_eq!(r1.exact, 2);
        assert!((r1.reference - 2.885).abs() < 1e-3);
        let removed = vec![canonical_form(&g, &[1]).unwrap(), canonical_form(&g, &[2]).unwrap()];
        assert_eq!(margulis_total(&g, &w, &removed, 1.0, opts).unwrap().exact, 0);
    }

    #[test]
    fn chebotarev_examples() {
        let (g, w) = full2();
        let z2 = FiniteQuotient::cyclic(1, 2).unwrap();
        let r = chebotarev_distribution(&g, &w, &[], &z2, 4, Execution::default()).unwrap();
        assert_eq!(r.total, 8);
        let freq: Vec<(String, f64, f64)> =
            r.classes.iter().map(|c| (c.label.clone(), c.frequency, c.reference)).collect();
        assert_eq!(freq, vec![("0".into(), 3.0 / 8.0, 0.5), ("1".into(), 5.0 / 8.0, 0.5)]);
        assert!(r.warnings.is_empty());
        let zero = WeightSystem::new(&g, 0, 1, vec![1.0; 4], vec![vec![0]; 4]).unwrap();
        let r0 = chebotarev_distribution(&g, &zero, &[], &z2, 6, Execution::default()).unwrap();
        assert_eq!(r0.classes[0].frequency, 1.0);
        assert_eq!(r0.warnings.len(), 1);
    }

    #[test]
    fn quotient_construction() {
        assert!(matches!(FiniteQuotient::lattice(vec![vec![2, 0]], 2), Err(Error::InfiniteQuotient(_))));
        let q = FiniteQuotient::lattice(vec![vec![2, 0], vec![0, 3]], 2).unwrap();
        assert_eq!(q.order(), 6);
        let s3 = FiniteQuotient::permutation(3, vec![vec![2, 1, 3], vec![2, 3, 1]]).unwrap();
        assert_eq!(s3.order(), 6);
        let FiniteQuotient::Permutation(p) = &s3 else { unreachable!() };
        let mut sizes = p.class_sizes.clone();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2, 3]);
        assert!(FiniteQuotient::permutation(3, vec![vec![1, 1, 2]]).is_err());
    }

    #[test]
    fn permutation_chebotarev_is_rotation_invariant() {
        // labels on the full 2-shift generate S3; class counts are
        // independent of which rotation the enumeration picks
        let (g, w) = full2();
        let labels = vec![vec![2, 1, 3], vec![1, 2, 3], vec![2, 3, 1], vec![1, 3, 2]];
        let q = FiniteQuotient::permutation(3, labels.clone()).unwrap();
        let r = chebotarev_distribution(&g, &w, &[], &q, 10, Execution::default()).unwrap();
        let FiniteQuotient::Permutation(pq) = &q else { unreachable!() };
        let compose = |a: &[usize], b: &[usize]| -> Vec<usize> { a.iter().map(|&x| b[x - 1]).collect() };
        let mut brute = vec![0u64; pq.class_sizes.len()];
        for c in crate::graph_shift::enumerate_prime_cycles(&g, 10) {
            let mut elem: Vec<usize> = (1..=3).collect();
            let v = c.vertices();
            let shift = v.len() / 2;
            // multiply starting from a different rotation
            for m in 0..v.len() {
                let (a, b) = (v[(m + shift) % v.len()], v[(m + shift + 1) % v.len()]);
                elem = compose(&elem, &labels[g.edge_index(a, b).unwrap()]);
            }
            let idx = pq.elements.iter().position(|x| x.iter().map(|y| y + 1).eq(elem.iter().copied())).unwrap();
            brute[pq.class_of[idx]] += 1;
        }
        let got: Vec<u64> = r.classes.iter().map(|c| c.count).collect();
        assert_eq!(got, brute);
        let refs: f64 = r.classes.iter().map(|c| c.reference).sum();
        assert!((refs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equidistribution_examples() {
        let (g, w) = full2();
        let dd = solve_u(&g, &w, &[0.5], SolveOptions::default()).unwrap();
        let q = CountQuery { t: 12.0, delta: 1.0, rho: vec![0.5], alpha: vec![0], removed: vec![] };
        let opts = CountOptions::default();
        let roof = w.roofs().to_vec();
        let r = equidistribution_test(&g, &w, &dd, &q, &roof, opts).unwrap();
        assert!((r.empirical - 1.0).abs() < 1e-12 && (r.expected - 1.0).abs() < 1e-12);
        let class: Vec<f64> = (0..4).map(|e| w.class(e)[0] as f64).collect();
        let r = equidistribution_test(&g, &w, &dd, &q, &class, opts).unwrap();
        assert!((r.expected - 0.5).abs() < 1e-12);
        // cycles of period 12 with class 6 have exactly rho = 1/2
        assert!((r.empirical - 0.5).abs() < 1e-12);
        let one_edge = vec![0.0, 1.0, 0.0, 0.0];
        let r = equidistribution_test(&g, &w, &dd, &q, &one_edge, opts).unwrap();
        assert!((r.expected - 0.25).abs() < 1e-12);
        let empty = CountQuery { t: 1.0, delta: 1.0, rho: vec![0.0], alpha: vec![5], removed: vec![] };
        assert_eq!(equidistribution_test(&g, &w, &dd, &empty, &roof, opts), Err(Error::EmptySelection));
    }

    #[test]
    fn sweep_rows() {
        let (g, w) = full2();
        let opts = CountOptions::default();
        assert!(sweep(&g, &w, &[0.5], &[0], 1.0, &[], &[], opts).unwrap().is_empty());
        let rows = sweep(&g, &w, &[0.5], &[0], 1.0, &[8.0, 10.0, 40.0], &[], opts).unwrap();
        assert_eq!(rows.len(), 3);
        let first = rows[0].as_ref().unwrap();
        assert_eq!(first.target_class, vec![4]);
        // period-8 prime cycles with four 2s: (C(8,4) - C(4,2)) / 8 = 8
        assert_eq!(first.exact, 8);
        assert!(first.ratio.unwrap() > 0.0);
        assert!(matches!(rows[2], Err(Error::BudgetExceeded { .. })));
    }
}
