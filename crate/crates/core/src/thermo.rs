//! Transfer matrices, Perron eigendata, pressure and equilibrium states.
//!
//! For the edge-locally-constant potential `<u, class> - s * roof` the shift
//! pressure is `log` of the Perron eigenvalue of the weighted adjacency
//! matrix. The flow pressure `p(u)` is the unique `s` at which that shift
//! pressure vanishes; it is strictly decreasing in `s` because the roof is
//! positive.
//!
//! All matrices are built in log space and rescaled by their largest entry so
//! that large `|u|` neither overflows nor flushes the whole matrix to zero.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph_shift::{pattern_period, DirectedGraph};
use crate::homology_weights::WeightSystem;

pub const PERRON_TOL: f64 = 1e-12;
const PERRON_STOP: f64 = 1e-15;
const PERRON_PLAIN_ITER: usize = 10_000;
const PERRON_INVERSE_ITER: usize = 50;
const ROOT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct PerronData {
    pub eigenvalue: f64,
    /// Right eigenvector, largest entry 1.
    pub right: DVector<f64>,
    /// Left eigenvector, scaled so that `left . right = 1`.
    pub left: DVector<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_u(w: &WeightSystem, u: &[f64]) -> Result<()> {
    if u.len() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), found: u.len() });
    }
    Ok(())
}

/// `M_ij = exp(<u, class(i->j)> - s * roof(i->j))` on edges, 0 elsewhere.
pub fn transfer_matrix(g: &DirectedGraph, w: &WeightSystem, u: &[f64], s: f64) -> Result<DMatrix<f64>> {
    w.check_graph(g)?;
    check_u(w, u)?;
    let k = g.vertex_count();
    let mut m = DMatrix::zeros(k, k);
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        m[(i - 1, j - 1)] = (dot(u, &class_f64(w, e)) - s * w.roof(e)).exp();
    }
    Ok(m)
}

fn class_f64(w: &WeightSystem, e: usize) -> Vec<f64> {
    w.class(e).iter().map(|&c| c as f64).collect()
}

/// Transfer matrix divided by `exp(log_scale)`.
struct Scaled {
    matrix: DMatrix<f64>,
    log_scale: f64,
}

fn scaled_transfer(g: &DirectedGraph, w: &WeightSystem, u: &[f64], s: f64) -> Scaled {
    let k = g.vertex_count();
    let exps: Vec<f64> = (0..g.edge_count())
        .map(|e| {
            let uc: f64 = u.iter().zip(w.class(e)).map(|(a, &c)| a * c as f64).sum();
            uc - s * w.roof(e)
        })
        .collect();
    let log_scale = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut matrix = DMatrix::zeros(k, k);
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        // keep the support pattern even when an entry underflows
        matrix[(i - 1, j - 1)] = (exps[e] - log_scale).exp().max(f64::MIN_POSITIVE);
    }
    Scaled { matrix, log_scale }
}

fn iterate(m: &DMatrix<f64>) -> Result<(DVector<f64>, f64)> {
    let k = m.nrows();
    let mut v = DVector::from_element(k, 1.0);
    let mut diff = f64::INFINITY;
    for _ in 0..PERRON_PLAIN_ITER {
        let mut y = m * &v;
        let top = y.max();
        if !(top.is_finite() && top > 0.0) {
            return Err(Error::NoConvergence { what: "power iteration", iterations: 0 });
        }
        y /= top;
        diff = (&y - &v).amax();
        v = y;
        if diff <= PERRON_STOP {
            break;
        }
    }
    Ok((v, diff))
}

/// Inverse iteration just above the largest real eigenvalue. Used when the
/// plain iteration stalls on nearly periodic matrices, whose eigenvalues sit
/// close to rotations of the Perron root.
fn inverse_iterate(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let stalled = Error::NoConvergence { what: "power iteration", iterations: PERRON_PLAIN_ITER };
    let root = m
        .clone()
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * z.norm())
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(root.is_finite() && root > 0.0) {
        return Err(stalled);
    }
    let k = m.nrows();
    let lu = (m - DMatrix::identity(k, k) * (root * (1.0 + 1e-12))).lu();
    let mut v = DVector::from_element(k, 1.0);
    for _ in 0..PERRON_INVERSE_ITER {
        let mut y = lu.solve(&v).ok_or(stalled.clone())?;
        let top = y.iter().copied().fold(0.0, |a: f64, x| if x.abs() > a.abs() { x } else { a });
        if !(top.is_finite() && top != 0.0) {
            return Err(stalled);
        }
        y /= top;
        let diff = (&y - &v).amax();
        v = y;
        if diff <= PERRON_STOP {
            break;
        }
    }
    if v.iter().all(|&x| x >= 0.0) && (m * &v - &v * root).amax() <= PERRON_TOL * root {
        Ok(v)
    } else {
        Err(stalled)
    }
}

fn power_iterate(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let (v, diff) = iterate(m)?;
    if diff <= PERRON_STOP {
        return Ok(v);
    }
    inverse_iterate(m).or(if diff <= PERRON_TOL {
        Ok(v)
    } else {
        Err(Error::NoConvergence { what: "power iteration", iterations: PERRON_PLAIN_ITER })
    })
}

/// Dominant eigen-triple of a nonnegative primitive matrix.
pub fn perron(m: &DMatrix<f64>) -> Result<PerronData> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let k = m.nrows();
    let succ: Vec<Vec<usize>> = (0..k).map(|i| (0..k).filter(|&j| m[(i, j)] > 0.0).collect()).collect();
    match pattern_period(&succ) {
        Some(1) => {}
        Some(period) => return Err(Error::ImprimitiveMatrix { period, irreducible: true }),
        None => return Err(Error::ImprimitiveMatrix { period: 0, irreducible: false }),
    }
    let right = power_iterate(m)?;
    let left = power_iterate(&m.transpose())?;
    let lr = left.dot(&right);
    let eigenvalue = left.dot(&(m * &right)) / lr;
    Ok(PerronData { eigenvalue, right, left: left / lr })
}

/// Eigendata of the scaled matrix at (u, s) plus the log of the true eigenvalue.
struct EigenPoint {
    scaled: Scaled,
    perron: PerronData,
    log_lambda: f64,
}

fn eigen_point(g: &DirectedGraph, w: &WeightSystem, u: &[f64], s: f64) -> Result<EigenPoint> {
    let scaled = scaled_transfer(g, w, u, s);
    let perron = perron(&scaled.matrix)?;
    let log_lambda = scaled.log_scale + perron.eigenvalue.ln();
    Ok(EigenPoint { scaled, perron, log_lambda })
}

impl EigenPoint {
    /// `l_i M_ij r_j / (lambda l.r)` for every edge, in edge order.
    fn edge_measure(&self, g: &DirectedGraph) -> Vec<f64> {
        let p = &self.perron;
        let m = &self.scaled.matrix;
        g.edges().iter().map(|&(i, j)| p.left[i - 1] * m[(i - 1, j - 1)] * p.right[j - 1] / p.eigenvalue).collect()
    }
}

/// `log` of the Perron eigenvalue of the transfer matrix at (u, s).
pub fn shift_pressure(g: &DirectedGraph, w: &WeightSystem, u: &[f64], s: f64) -> Result<f64> {
    w.check_graph(g)?;
    check_u(w, u)?;
    Ok(eigen_point(g, w, u, s)?.log_lambda)
}

fn root(g: &DirectedGraph, w: &WeightSystem, u: &[f64]) -> Result<(f64, EigenPoint)> {
    w.check_graph(g)?;
    check_u(w, u)?;
    let r_max = w.roofs().iter().copied().fold(0.0, f64::max);
    let eval = |s: f64| -> Result<(f64, f64, EigenPoint)> {
        let pt = eigen_point(g, w, u, s)?;
        let slope = -dot(&pt.edge_measure(g), w.roofs());
        Ok((pt.log_lambda, slope, pt))
    };
    let (p0, d0, pt0) = eval(0.0)?;
    if p0 == 0.0 {
        return Ok((0.0, pt0));
    }
    // slope lies in [-r_max, -r_min], which pins the root inside this bracket
    let (mut lo, mut hi) = if p0 > 0.0 { (0.0, p0 / w.r_min()) } else { (p0 / r_max, 0.0) };
    let mut width = (hi - lo).max(1.0);
    while eval(hi)?.0 > 0.0 {
        hi += width;
        width *= 2.0;
    }
    while eval(lo)?.0 < 0.0 {
        lo -= width;
        width *= 2.0;
    }
    let mut s = (0.0 - p0 / d0).clamp(lo, hi);
    for _ in 0..ROOT_MAX_ITER {
        let (p, d, pt) = eval(s)?;
        if p == 0.0 {
            return Ok((s, pt));
        }
        if p > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let mut next = s - p / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 4.0 * f64::EPSILON * s.abs().max(1.0) || hi - lo <= f64::EPSILON * s.abs().max(1.0) {
            let pt = if next == s { pt } else { eval(next)?.2 };
            return Ok((next, pt));
        }
        s = next;
    }
    if hi - lo <= 1e-10 {
        let mid = 0.5 * (lo + hi);
        return Ok((mid, eval(mid)?.2));
    }
    Err(Error::NoConvergence { what: "pressure root", iterations: ROOT_MAX_ITER })
}

/// Suspension-flow pressure `p(u)`: the `s` with `shift_pressure(u, s) = 0`.
pub fn flow_pressure(g: &DirectedGraph, w: &WeightSystem, u: &[f64]) -> Result<f64> {
    Ok(root(g, w, u)?.0)
}

/// An equilibrium state realised as a stationary Markov chain on vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    pub stationary: Vec<f64>,
    /// Row-stochastic, supported on edges.
    pub transition: DMatrix<f64>,
    /// `stationary[i] * transition[i][j]` for each edge, in edge order.
    pub edge_measure: Vec<f64>,
}

impl MarkovMeasure {
    /// Kolmogorov-Sinai entropy of the chain for the shift.
    pub fn entropy(&self) -> f64 {
        let k = self.stationary.len();
        let mut h = 0.0;
        for i in 0..k {
            for j in 0..k {
                let p = self.transition[(i, j)];
                if p > 0.0 {
                    h -= self.stationary[i] * p * p.ln();
                }
            }
        }
        h
    }
}

fn markov_from(g: &DirectedGraph, pt: &EigenPoint) -> MarkovMeasure {
    let k = g.vertex_count();
    let p = &pt.perron;
    let m = &pt.scaled.matrix;
    let mut transition = DMatrix::zeros(k, k);
    for &(i, j) in g.edges() {
        let (i, j) = (i - 1, j - 1);
        transition[(i, j)] = m[(i, j)] * p.right[j] / (p.eigenvalue * p.right[i]);
    }
    let norm = p.left.dot(&p.right);
    let stationary: Vec<f64> = (0..k).map(|i| p.left[i] * p.right[i] / norm).collect();
    let edge_measure = g.edges().iter().map(|&(i, j)| stationary[i - 1] * transition[(i - 1, j - 1)]).collect();
    MarkovMeasure { stationary, transition, edge_measure }
}

/// Base measure of the equilibrium state for `<u, class>`.
pub fn equilibrium_measure(g: &DirectedGraph, w: &WeightSystem, u: &[f64]) -> Result<MarkovMeasure> {
    let (_, pt) = root(g, w, u)?;
    Ok(markov_from(g, &pt))
}

/// `sum m(e) phi(e) / sum m(e) roof(e)`: the flow-invariant average of an
/// observable whose fibre integral over edge `e` is `phi[e]`.
pub fn integrate_observable(mm: &MarkovMeasure, w: &WeightSystem, phi: &[f64]) -> Result<f64> {
    if phi.len() < mm.edge_measure.len() {
        return Err(Error::MissingEdgeValue(phi.len()));
    }
    let num = dot(&mm.edge_measure, phi);
    Ok(num / dot(&mm.edge_measure, w.roofs()))
}

/// `grad p(u)`: the class observable averaged under the equilibrium state.
pub fn pressure_gradient(g: &DirectedGraph, w: &WeightSystem, u: &[f64]) -> Result<Vec<f64>> {
    let (_, pt) = root(g, w, u)?;
    let m = pt.edge_measure(g);
    let mean_roof = dot(&m, w.roofs());
    Ok((0..w.dim())
        .map(|c| (0..g.edge_count()).map(|e| m[e] * w.class(e)[c] as f64).sum::<f64>() / mean_roof)
        .collect())
}

pub fn hessian_step(u: &[f64]) -> f64 {
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    1e-5f64.max(1e-5 * norm)
}

/// Central differences of [`pressure_gradient`], symmetrised.
pub fn pressure_hessian(g: &DirectedGraph, w: &WeightSystem, u: &[f64]) -> Result<DMatrix<f64>> {
    check_u(w, u)?;
    let d = w.dim();
    let h = hessian_step(u);
    let mut hess = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut up = u.to_vec();
        let mut down = u.to_vec();
        up[j] += h;
        down[j] -= h;
        let gp = pressure_gradient(g, w, &up)?;
        let gm = pressure_gradient(g, w, &down)?;
        for i in 0..d {
            hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    Ok((&hess + hess.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PHI: f64 = 1.618_033_988_749_895;

    fn full2() -> (DirectedGraph, WeightSystem) {
        let g = DirectedGraph::complete(2);
        let class = g.edges().iter().map(|&(_, j)| vec![(j == 2) as i64]).collect();
        (g.clone(), WeightSystem::new(&g, 0, 1, vec![1.0; 4], class).unwrap())
    }

    fn golden() -> (DirectedGraph, WeightSystem) {
        let g = DirectedGraph::new(2, vec![(1, 1), (1, 2), (2, 1)]).unwrap();
        let w = WeightSystem::new(&g, 1, 0, vec![1.0; 3], vec![vec![0], vec![1], vec![0]]).unwrap();
        (g, w)
    }

    fn bench_like() -> (DirectedGraph, WeightSystem) {
        let g = DirectedGraph::complete(3);
        let primes = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0];
        let class = vec![
            vec![-1, 0],
            vec![0, 0],
            vec![0, 0],
            vec![0, -1],
            vec![-1, 0],
            vec![1, 1],
            vec![-1, 0],
            vec![0, 1],
            vec![0, 1],
        ];
        let w = WeightSystem::new(&g, 0, 2, primes.iter().map(|p| p.ln()).collect(), class).unwrap();
        (g, w)
    }

    #[test]
    fn transfer_matrix_examples() {
        let (g, w) = full2();
        assert_eq!(transfer_matrix(&g, &w, &[0.0], 0.0).unwrap(), DMatrix::from_element(2, 2, 1.0));
        let m = transfer_matrix(&g, &w, &[1.0], 0.0).unwrap();
        let e = 1f64.exp();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, e, 1.0, e]));
        let half = transfer_matrix(&g, &w, &[0.0], 2f64.ln()).unwrap();
        assert!(half.iter().all(|&x| (x - 0.5).abs() < 1e-15));
        assert_eq!(transfer_matrix(&g, &w, &[0.0, 1.0], 0.0), Err(Error::DimensionMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn perron_examples() {
        let p = perron(&DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert_relative_eq!(p.eigenvalue, 2.0, max_relative = 1e-14);
        let p = perron(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((p.eigenvalue - PHI).abs() < 1e-12);
        assert!((p.right.max() - 1.0).abs() < 1e-15);
        assert!((p.left.dot(&p.right) - 1.0).abs() < 1e-14);
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(perron(&swap), Err(Error::ImprimitiveMatrix { period: 2, irreducible: true }));
        let reducible = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(perron(&reducible), Err(Error::ImprimitiveMatrix { irreducible: false, .. })));
    }

    #[test]
    fn perron_nearly_periodic() {
        let eps = 1e-9;
        let m = DMatrix::from_row_slice(3, 3, &[eps, 1.0, eps, eps, eps, 1.0, 1.0, eps, eps]);
        let p = perron(&m).unwrap();
        assert!((p.eigenvalue - (1.0 + 2.0 * eps)).abs() < 1e-12); // every row sums to 1 + 2 eps
        assert!((&m * &p.right - &p.right * p.eigenvalue).amax() < 1e-12);
    }

    #[test]
    fn perron_residuals_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let k = rng.random_range(2..6);
            let m = DMatrix::from_fn(k, k, |_, _| if rng.random_bool(0.7) { rng.random_range(0.01..3.0) } else { 0.0 });
            let Ok(p) = perron(&m) else { continue };
            let r = &m * &p.right - &p.right * p.eigenvalue;
            let l = m.transpose() * &p.left - &p.left * p.eigenvalue;
            assert!(r.amax() <= 1e-10 * p.eigenvalue * p.right.amax());
            assert!(l.amax() <= 1e-10 * p.eigenvalue * p.left.amax());
        }
    }

    #[test]
    fn shift_pressure_examples() {
        let (g, w) = full2();
        assert!((shift_pressure(&g, &w, &[0.0], 0.0).unwrap() - 2f64.ln()).abs() < 1e-14);
        let (gg, gw) = golden();
        assert!((shift_pressure(&gg, &gw, &[0.0], 0.0).unwrap() - PHI.ln()).abs() < 1e-13);
        for t in [-2.0, 0.5, 3.0] {
            let expected = (1.0 + f64::exp(t)).ln();
            assert!((shift_pressure(&g, &w, &[t], 0.0).unwrap() - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn flow_pressure_examples() {
        let (g, w) = full2();
        assert!((flow_pressure(&g, &w, &[0.0]).unwrap() - 2f64.ln()).abs() < 1e-12);
        for t in [-3.0, -1.0, 1.0, 3.0] {
            let expected = (1.0 + f64::exp(t)).ln();
            assert!((flow_pressure(&g, &w, &[t]).unwrap() - expected).abs() < 1e-12);
        }
        let (gg, gw) = golden();
        assert!((flow_pressure(&gg, &gw, &[0.0]).unwrap() - PHI.ln()).abs() < 1e-12);
        // extreme parameters stay finite thanks to log-space scaling
        let far = flow_pressure(&g, &w, &[800.0]).unwrap();
        assert!((far - 800.0).abs() < 1e-9);
    }

    #[test]
    fn flow_pressure_with_roof_two_halves() {
        let (g, w) = full2();
        let w2 = w.with_roof(&g, vec![2.0; 4]).unwrap();
        assert!((flow_pressure(&g, &w2, &[0.0]).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let (g, w) = full2();
        assert!((pressure_gradient(&g, &w, &[0.0]).unwrap()[0] - 0.5).abs() < 1e-13);
        let g4 = pressure_gradient(&g, &w, &[(1.0f64 / 3.0).ln()]).unwrap();
        assert!((g4[0] - 0.25).abs() < 1e-13);
        let zero = WeightSystem::new(&g, 0, 1, vec![1.0; 4], vec![vec![0]; 4]).unwrap();
        for u in [-2.0, 0.0, 1.5] {
            assert_eq!(pressure_gradient(&g, &zero, &[u]).unwrap(), vec![0.0]);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (g, w) = bench_like();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let u = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let grad = pressure_gradient(&g, &w, &u).unwrap();
            let h = 1e-5;
            for c in 0..2 {
                let mut up = u;
                let mut dn = u;
                up[c] += h;
                dn[c] -= h;
                let fd = (flow_pressure(&g, &w, &up).unwrap() - flow_pressure(&g, &w, &dn).unwrap()) / (2.0 * h);
                assert!((fd - grad[c]).abs() <= 1e-6 * grad[c].abs().max(1e-2), "{fd} vs {}", grad[c]);
            }
        }
    }

    #[test]
    fn hessian_examples() {
        let (g, w) = full2();
        let h = pressure_hessian(&g, &w, &[0.0]).unwrap();
        assert!((h[(0, 0)] - 0.25).abs() < 1e-6);
        let zero = WeightSystem::new(&g, 0, 1, vec![1.0; 4], vec![vec![0]; 4]).unwrap();
        assert_eq!(pressure_hessian(&g, &zero, &[0.3]).unwrap()[(0, 0)], 0.0);
        let (gb, wb) = bench_like();
        let hb = pressure_hessian(&gb, &wb, &[0.4, -0.7]).unwrap();
        assert_eq!(&hb - hb.transpose(), DMatrix::zeros(2, 2));
        assert!(hb.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn equilibrium_examples() {
        let (g, w) = full2();
        let mm = equilibrium_measure(&g, &w, &[0.0]).unwrap();
        for p in mm.stationary.iter() {
            assert!((p - 0.5).abs() < 1e-14);
        }
        assert!(mm.transition.iter().all(|p| (p - 0.5).abs() < 1e-14));
        let (gg, gw) = golden();
        let mm = equilibrium_measure(&gg, &gw, &[0.0]).unwrap();
        assert!((mm.transition[(0, 0)] - 1.0 / PHI).abs() < 1e-12);
        assert!((mm.transition[(0, 1)] - 1.0 / (PHI * PHI)).abs() < 1e-12);
        assert!((mm.transition[(1, 0)] - 1.0).abs() < 1e-12);
        // pi proportional to (phi^2, 1)
        let pi1 = PHI * PHI / (PHI * PHI + 1.0);
        assert!((mm.stationary[0] - pi1).abs() < 1e-12);
        assert!((mm.stationary[0] - 0.7236).abs() < 1e-4);
        // large u pushes the stationary mass onto vertex 2
        let far = equilibrium_measure(&g, &w, &[12.0]).unwrap();
        assert!(far.stationary[1] > 0.9999);
    }

    #[test]
    fn equilibrium_is_stationary_and_variational() {
        let (g, w) = bench_like();
        for u in [[0.0, 0.0], [0.7, -0.3], [-1.5, 1.1]] {
            let mm = equilibrium_measure(&g, &w, &u).unwrap();
            let k = g.vertex_count();
            for j in 0..k {
                let flow: f64 = (0..k).map(|i| mm.stationary[i] * mm.transition[(i, j)]).sum();
                assert!((flow - mm.stationary[j]).abs() < 1e-12);
            }
            for i in 0..k {
                assert!((mm.transition.row(i).sum() - 1.0).abs() < 1e-12);
            }
            assert!((mm.edge_measure.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // h_m + int (<u,f> - s r) dm = log lambda = 0 at the root s
            let s = flow_pressure(&g, &w, &u).unwrap();
            let phi: f64 = (0..g.edge_count())
                .map(|e| {
                    let uc: f64 = u.iter().zip(w.class(e)).map(|(a, &c)| a * c as f64).sum();
                    mm.edge_measure[e] * (uc - s * w.roof(e))
                })
                .sum();
            assert!((mm.entropy() + phi).abs() < 1e-12);
        }
    }

    #[test]
    fn observable_examples() {
        let (g, w) = bench_like();
        let u = [0.2, -0.1];
        let mm = equilibrium_measure(&g, &w, &u).unwrap();
        let roof = w.roofs().to_vec();
        assert!((integrate_observable(&mm, &w, &roof).unwrap() - 1.0).abs() < 1e-14);
        let scaled: Vec<f64> = roof.iter().map(|r| 2.5 * r).collect();
        assert!((integrate_observable(&mm, &w, &scaled).unwrap() - 2.5).abs() < 1e-14);
        let grad = pressure_gradient(&g, &w, &u).unwrap();
        for c in 0..2 {
            let phi: Vec<f64> = (0..9).map(|e| w.class(e)[c] as f64).collect();
            assert!((integrate_observable(&mm, &w, &phi).unwrap() - grad[c]).abs() < 1e-13);
        }
        assert_eq!(integrate_observable(&mm, &w, &roof[..3]), Err(Error::MissingEdgeValue(3)));
    }

    #[test]
    fn unit_roof_entropy_is_shift_entropy() {
        let (gg, gw) = golden();
        let adj = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        let h = perron(&adj).unwrap().eigenvalue.ln();
        assert!((flow_pressure(&gg, &gw, &[0.0]).unwrap() - h).abs() < 1e-12);
    }

    #[test]
    fn pressure_is_convex() {
        let (g, w) = bench_like();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let b = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let t: f64 = rng.random_range(0.0..1.0);
            let mid = [t * a[0] + (1.0 - t) * b[0], t * a[1] + (1.0 - t) * b[1]];
            let lhs = flow_pressure(&g, &w, &mid).unwrap();
            let rhs = t * flow_pressure(&g, &w, &a).unwrap() + (1.0 - t) * flow_pressure(&g, &w, &b).unwrap();
            assert!(lhs <= rhs + 1e-10);
        }
    }
}
