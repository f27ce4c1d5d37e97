//! Integer lattices in `Z^d`: incremental echelon bases, Smith invariants and
//! coset representatives for finite quotients.

use num_integer::Integer;

/// Row-echelon basis of the lattice spanned by the vectors inserted so far.
///
/// Rows are kept upper triangular with positive pivots, so the lattice
/// generated never changes under the unimodular row operations used.
#[derive(Debug, Clone, PartialEq)]
pub struct EchelonBasis {
    dim: usize,
    // rows[c] is the row whose pivot sits in column c, if any
    rows: Vec<Option<Vec<i128>>>,
}

impl EchelonBasis {
    pub fn new(dim: usize) -> Self {
        Self { dim, rows: vec![None; dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn insert(&mut self, v: &[i64]) {
        assert_eq!(v.len(), self.dim);
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for c in 0..self.dim {
            if v[c] == 0 {
                continue;
            }
            match self.rows[c].take() {
                None => {
                    if v[c] < 0 {
                        v.iter_mut().for_each(|x| *x = -*x);
                    }
                    self.rows[c] = Some(v);
                    return;
                }
                Some(mut row) => {
                    // [row; v] <- [[a, b], [-v_c/g, row_c/g]] [row; v] with a*row_c + b*v_c = g
                    let ext = row[c].extended_gcd(&v[c]);
                    let (g, a, b) = (ext.gcd, ext.x, ext.y);
                    let (s, t) = (row[c] / g, v[c] / g);
                    let new_row: Vec<i128> = row.iter().zip(&v).map(|(r, x)| a * r + b * x).collect();
                    let rest: Vec<i128> = row.iter().zip(&v).map(|(r, x)| s * x - t * r).collect();
                    row = new_row;
                    if row[c] < 0 {
                        row.iter_mut().for_each(|x| *x = -*x);
                    }
                    debug_assert_eq!(rest[c], 0);
                    self.rows[c] = Some(row);
                    v = rest;
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }

    /// Basis rows, top to bottom.
    pub fn rows(&self) -> Vec<Vec<i128>> {
        self.rows.iter().flatten().cloned().collect()
    }

    /// Full-rank case only: the canonical representative of `v` modulo the
    /// lattice, lying in the box `prod [0, pivot_c)`.
    pub fn reduce(&self, v: &[i64]) -> Option<Vec<i64>> {
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for c in 0..self.dim {
            let row = self.rows[c].as_ref()?;
            let q = Integer::div_floor(&v[c], &row[c]);
            if q != 0 {
                v.iter_mut().zip(row).for_each(|(x, r)| *x -= q * r);
            }
        }
        Some(v.into_iter().map(|x| x as i64).collect())
    }

    /// Pivots of a full-rank basis; their product is the index of the lattice.
    pub fn pivots(&self) -> Option<Vec<i128>> {
        self.rows.iter().enumerate().map(|(c, r)| r.as_ref().map(|r| r[c])).collect()
    }
}

/// Nonzero elementary divisors of an integer matrix given by rows, in
/// divisibility order.
pub fn smith_invariants(rows: &[Vec<i128>]) -> Vec<i128> {
    let mut a: Vec<Vec<i128>> = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        let p = a[t][t];
        for i in t + 1..m {
            let q = a[i][t] / p;
            if q != 0 {
                for j in t..n {
                    a[i][j] -= q * a[t][j];
                }
            }
            clean &= a[i][t] == 0;
        }
        for j in t + 1..n {
            let q = a[t][j] / p;
            if q != 0 {
                for row in a.iter_mut().skip(t) {
                    row[j] -= q * row[t];
                }
            }
            clean &= a[t][j] == 0;
        }
        if !clean {
            continue;
        }
        // pivot must divide the whole trailing block
        let bad = (t + 1..m).flat_map(|i| (t + 1..n).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % p != 0);
        if let Some((i, _)) = bad {
            for j in t..n {
                a[t][j] += a[i][j];
            }
            continue;
        }
        out.push(p.abs());
        t += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(vs: &[&[i64]]) -> EchelonBasis {
        let mut b = EchelonBasis::new(vs[0].len());
        for v in vs {
            b.insert(v);
        }
        b
    }

    #[test]
    fn echelon_keeps_lattice() {
        let b = basis(&[&[4, 6], &[6, 9], &[2, 1]]);
        assert_eq!(b.rank(), 2);
        // index of span{(4,6),(6,9),(2,1)}: gcd of 2x2 minors = gcd(0, -8, -12) = 4
        let piv = b.pivots().unwrap();
        assert_eq!(piv.iter().product::<i128>(), 4);
    }

    #[test]
    fn smith_examples() {
        assert_eq!(smith_invariants(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]), vec![2, 6, 12]);
        assert_eq!(smith_invariants(&[vec![0, 0]]), Vec::<i128>::new());
        assert_eq!(smith_invariants(&[vec![2], vec![4]]), vec![2]);
        assert_eq!(smith_invariants(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
    }

    #[test]
    fn reduction_is_canonical() {
        let b = basis(&[&[2, 0], &[0, 3]]);
        assert_eq!(b.reduce(&[5, -1]), Some(vec![1, 2]));
        assert_eq!(b.reduce(&[-2, 3]), Some(vec![0, 0]));
        let partial = basis(&[&[1, 0]]);
        assert_eq!(partial.reduce(&[1, 1]), None);
    }
}
