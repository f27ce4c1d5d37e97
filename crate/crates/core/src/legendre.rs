//! Legendre duality between the flow pressure and the entropy function.
//!
//! For `rho` in the interior of the direction set, `u(rho)` is the unique
//! minimiser of `p(u) - <u, rho>`, and the entropy is
//! `h(rho) = p(u(rho)) - <u(rho), rho>`. The entropy Hessian is minus the
//! inverse of the pressure Hessian at `u(rho)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph_shift::{fold_lyndon_cycles, CycleBounds, DirectedGraph};
use crate::homology_weights::WeightSystem;
use crate::thermo::{flow_pressure, pressure_gradient, pressure_hessian};

const DEDUP_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-12;
const HULL_TOL: f64 = 1e-9;

/// Normalised cycle classes and their convex hull.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionHull {
    /// Distinct `class / length` points, sorted.
    pub points: Vec<Vec<f64>>,
    /// Extreme points of the hull, sorted.
    pub vertices: Vec<Vec<f64>>,
    /// Affine dimension of the hull.
    pub dimension: usize,
}

impl DirectionHull {
    pub fn from_points(mut points: Vec<Vec<f64>>) -> Self {
        points.sort_by(|a, b| {
            a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        points.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= DEDUP_TOL));
        let dimension = affine_dimension(&points);
        let vertices = if points.len() <= 2 {
            points.clone()
        } else {
            (0..points.len())
                .filter(|&i| {
                    let others: Vec<Vec<f64>> =
                        points.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| p.clone()).collect();
                    !in_convex_hull(&others, &points[i], HULL_TOL)
                })
                .map(|i| points[i].clone())
                .collect()
        };
        Self { points, vertices, dimension }
    }

    /// Closed membership with a small absolute tolerance.
    pub fn contains(&self, p: &[f64]) -> bool {
        !self.vertices.is_empty() && in_convex_hull(&self.vertices, p, HULL_TOL)
    }
}

fn affine_dimension(points: &[Vec<f64>]) -> usize {
    let Some(first) = points.first() else { return 0 };
    if points.len() == 1 {
        return 0;
    }
    let d = first.len();
    let diffs = DMatrix::from_fn(points.len() - 1, d, |r, c| points[r + 1][c] - first[c]);
    let sv = diffs.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * top.max(1.0)).count()
}

/// Phase-one simplex: is `p` a convex combination of `points`?
pub(crate) fn in_convex_hull(points: &[Vec<f64>], p: &[f64], tol: f64) -> bool {
    let n = points.len();
    if n == 0 {
        return false;
    }
    let d = p.len();
    let m = d + 1;
    let cols = n + m + 1;
    let rhs = cols - 1;
    let mut t = vec![vec![0.0; cols]; m];
    for r in 0..m {
        for (j, x) in points.iter().enumerate() {
            t[r][j] = if r < d { x[r] } else { 1.0 };
        }
        t[r][rhs] = if r < d { p[r] } else { 1.0 };
        if t[r][rhs] < 0.0 {
            t[r].iter_mut().for_each(|v| *v = -*v);
        }
        t[r][n + r] = 1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let eps = 1e-12;
    for _ in 0..50 * (n + m) {
        // reduced cost of column j for the objective sum(artificials)
        let entering = (0..n + m).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let cost = if j >= n { 1.0 } else { 0.0 };
            let reduced = cost - (0..m).filter(|&r| basis[r] >= n).map(|r| t[r][j]).sum::<f64>();
            reduced < -eps
        });
        let Some(j) = entering else { break };
        let mut leave: Option<usize> = None;
        for r in 0..m {
            if t[r][j] > eps {
                let ratio = t[r][rhs] / t[r][j];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let best = t[l][rhs] / t[l][j];
                        ratio < best - eps || (ratio <= best + eps && basis[r] < basis[l])
                    }
                };
                if better {
                    leave = Some(r);
                }
            }
        }
        let Some(r) = leave else { break };
        let piv = t[r][j];
        t[r].iter_mut().for_each(|v| *v /= piv);
        for q in 0..m {
            if q != r && t[q][j] != 0.0 {
                let f = t[q][j];
                for c in 0..cols {
                    t[q][c] -= f * t[r][c];
                }
            }
        }
        basis[r] = j;
    }
    let infeasibility: f64 = (0..m).filter(|&r| basis[r] >= n).map(|r| t[r][rhs]).sum();
    infeasibility <= tol
}

/// Hull of `class / length` over prime cycles of period `<= n`.
pub fn direction_hull(g: &DirectedGraph, w: &WeightSystem, n: usize) -> DirectionHull {
    let points = fold_lyndon_cycles(
        g,
        Some(w.edge_weights()),
        CycleBounds { max_period: n, max_length: f64::INFINITY },
        &[],
        Execution::default(),
        Vec::new,
        |acc: &mut Vec<Vec<f64>>, c| acc.push(c.class.iter().map(|&x| x as f64 / c.length).collect()),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    );
    DirectionHull::from_points(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionData {
    pub rho: Vec<f64>,
    /// Dual parameter: `grad p(u) = rho`.
    pub u: Vec<f64>,
    pub entropy: f64,
    pub pressure_at_u: f64,
    pub pressure_hessian: DMatrix<f64>,
    /// Entropy Hessian, `-(pressure_hessian)^-1`.
    pub hessian_h: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub diverge_norm: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, diverge_norm: 1e3 }
    }
}

const ARMIJO_SLOPE: f64 = 1e-4;
const MIN_STEP: f64 = 1e-10;
const REGULARIZATION: f64 = 1e-10;
// FD Hessians carry ~1e-11 noise; curvature below this is treated as flat.
const CURVATURE_FLOOR: f64 = 1e-9;

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Newton solve for `u(rho)` with Armijo backtracking from `u = 0`.
pub fn solve_u(g: &DirectedGraph, w: &WeightSystem, rho: &[f64], opts: SolveOptions) -> Result<DirectionData> {
    let d = w.dim();
    if rho.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.len() });
    }
    let h0 = pressure_hessian(g, w, &vec![0.0; d])?;
    let eig0 = h0.symmetric_eigenvalues();
    let scale = eig0.max().max(1.0);
    if eig0.min() <= CURVATURE_FLOOR * scale {
        return Err(Error::DegenerateModel);
    }
    newton(g, w, rho, opts, h0, scale).map_err(|e| match e {
        Error::NoConvergence { .. } => {
            Error::OutsideCone("transfer matrix underflows along the Newton path; rho is beyond the boundary".into())
        }
        e => e,
    })
}

fn newton(
    g: &DirectedGraph,
    w: &WeightSystem,
    rho: &[f64],
    opts: SolveOptions,
    h0: DMatrix<f64>,
    scale: f64,
) -> Result<DirectionData> {
    let d = w.dim();
    let objective = |u: &[f64]| -> Result<f64> { Ok(flow_pressure(g, w, u)? - dot(u, rho)) };

    let mut u = vec![0.0; d];
    let mut value = objective(&u)?;
    for _ in 0..opts.max_iter {
        let grad: Vec<f64> = pressure_gradient(g, w, &u)?.iter().zip(rho).map(|(a, b)| a - b).collect();
        let hess = if u.iter().all(|&x| x == 0.0) { h0.clone() } else { pressure_hessian(g, w, &u)? };
        let eig = hess.symmetric_eigenvalues();
        if eig.min() <= CURVATURE_FLOOR * scale {
            return Err(Error::OutsideCone(format!(
                "curvature vanished at |u| = {:.3e}; rho is on or beyond the boundary",
                sup_norm(&u)
            )));
        }
        let regularized =
            if eig.max() / eig.min() > 1e10 { &hess + DMatrix::identity(d, d) * REGULARIZATION } else { hess };
        let chol = regularized.cholesky().ok_or(Error::SingularHessian)?;
        let step: Vec<f64> = (-chol.solve(&DVector::from_column_slice(&grad))).iter().copied().collect();
        if sup_norm(&grad) <= opts.tol && sup_norm(&step) <= 1e-4 * (1.0 + sup_norm(&u)) {
            return direction_data(g, w, rho, u);
        }
        let slope = dot(&grad, &step);
        let mut t = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            // far outside the cone the transfer matrix underflows; treat that as a rejected step
            let v = match objective(&trial) {
                Err(Error::NoConvergence { .. }) => f64::INFINITY,
                other => other?,
            };
            if v <= value + ARMIJO_SLOPE * t * slope {
                break Some((trial, v));
            }
            if sup_norm(&grad) <= 1e-6 && t == 1.0 {
                // objective differences are at rounding level; trust the local Newton step
                break Some((trial, v));
            }
            t *= 0.5;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((next, v)) = accepted else {
            return Err(Error::OutsideCone(format!("line search stalled with |grad| = {:.3e}", sup_norm(&grad))));
        };
        u = next;
        value = v;
        if sup_norm(&u) > opts.diverge_norm {
            return Err(Error::OutsideCone(format!("|u| exceeded {}", opts.diverge_norm)));
        }
    }
    Err(Error::OutsideCone(format!("no convergence in {} Newton steps", opts.max_iter)))
}

fn direction_data(g: &DirectedGraph, w: &WeightSystem, rho: &[f64], u: Vec<f64>) -> Result<DirectionData> {
    let pressure_at_u = flow_pressure(g, w, &u)?;
    let pressure_hessian = pressure_hessian(g, w, &u)?;
    let hessian_h = -pressure_hessian.clone().try_inverse().ok_or(Error::SingularHessian)?;
    Ok(DirectionData {
        rho: rho.to_vec(),
        entropy: pressure_at_u - dot(&u, rho),
        u,
        pressure_at_u,
        pressure_hessian,
        hessian_h,
    })
}

/// `-(grad^2 p(u))^-1` at the solved dual parameter.
pub fn entropy_hessian(dd: &DirectionData) -> Result<DMatrix<f64>> {
    let det = dd.pressure_hessian.determinant();
    if !(det.is_finite() && det.abs() > 0.0) {
        return Err(Error::SingularHessian);
    }
    let inv = dd.pressure_hessian.clone().try_inverse().ok_or(Error::SingularHessian)?;
    Ok(-inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    Indeterminate,
}

pub const DEFAULT_HULL_PROBE: usize = 8;

pub fn membership(g: &DirectedGraph, w: &WeightSystem, rho: &[f64]) -> Membership {
    membership_with(g, w, rho, DEFAULT_HULL_PROBE)
}

/// Interior when the dual solve converges; outside only when the solve
/// fails and `rho` also misses the probed hull.
pub fn membership_with(g: &DirectedGraph, w: &WeightSystem, rho: &[f64], n_probe: usize) -> Membership {
    match solve_u(g, w, rho, SolveOptions::default()) {
        Ok(_) => Membership::Inside,
        Err(Error::OutsideCone(_)) | Err(Error::DegenerateModel) => {
            if direction_hull(g, w, n_probe).contains(rho) {
                Membership::Indeterminate
            } else {
                Membership::Outside
            }
        }
        Err(_) => Membership::Indeterminate,
    }
}
