//! Householder QR with optional column pivoting, on column-major storage.

/// Relative tolerance on the diagonal of `R` below which a column counts as
/// linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Qr {
    rows: usize,
    cols: usize,
    /// `R` in the upper triangle, Householder vectors (unit leading entry
    /// implied) below it.
    a: Vec<f64>,
    tau: Vec<f64>,
    /// `perm[k]` is the original index of the column factored at step `k`.
    perm: Vec<usize>,
    rank: usize,
    pivoted: bool,
}

impl Qr {
    /// Factors the `rows × cols` column-major matrix `a`.
    pub fn new(mut a: Vec<f64>, rows: usize, cols: usize, pivot: bool) -> Self {
        assert_eq!(a.len(), rows * cols, "matrix storage does not match its shape");
        let steps = rows.min(cols);
        let mut tau = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..cols).collect();
        let col_norm2 =
            |a: &[f64], k: usize, j: usize| -> f64 { a[j * rows + k..(j + 1) * rows].iter().map(|v| v * v).sum() };
        for k in 0..steps {
            if pivot {
                let (best, _) = (k..cols)
                    .map(|j| (j, col_norm2(&a, k, j)))
                    .fold((k, -1.0), |acc, (j, n)| if n > acc.1 { (j, n) } else { acc });
                if best != k {
                    for i in 0..rows {
                        a.swap(k * rows + i, best * rows + i);
                    }
                    perm.swap(k, best);
                }
            }
            let x0 = a[k * rows + k];
            let norm = col_norm2(&a, k, k).sqrt();
            if norm == 0.0 {
                continue;
            }
            let beta = if x0 >= 0.0 { -norm } else { norm };
            let t = (beta - x0) / beta;
            let scale = 1.0 / (x0 - beta);
            for i in k + 1..rows {
                a[k * rows + i] *= scale;
            }
            a[k * rows + k] = beta;
            tau[k] = t;
            for j in k + 1..cols {
                let (head, tail) = a.split_at_mut(j * rows);
                let v = &head[k * rows..(k + 1) * rows];
                let c = &mut tail[..rows];
                let mut w = c[k];
                for i in k + 1..rows {
                    w += v[i] * c[i];
                }
                w *= t;
                c[k] -= w;
                for i in k + 1..rows {
                    c[i] -= w * v[i];
                }
            }
        }
        let diag: Vec<f64> = (0..steps).map(|k| a[k * rows + k].abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let rank = if max == 0.0 {
            0
        } else if pivot {
            diag.iter().take_while(|&&d| d > max * RANK_TOLERANCE).count()
        } else {
            diag.iter().filter(|&&d| d > max * RANK_TOLERANCE).count()
        };
        Self {
            rows,
            cols,
            a,
            tau,
            perm,
            rank,
            pivoted: pivot,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(i, j)` of the triangular factor, in pivoted column order.
    pub fn r(&self, i: usize, j: usize) -> f64 {
        if i > j {
            0.0
        } else {
            self.a[j * self.rows + i]
        }
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Overwrites `y` with `Qᵀ y`.
    pub fn apply_qt(&self, y: &mut [f64]) {
        assert_eq!(y.len(), self.rows);
        let rows = self.rows;
        for (k, &t) in self.tau.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let v = &self.a[k * rows..(k + 1) * rows];
            let mut w = y[k];
            for i in k + 1..rows {
                w += v[i] * y[i];
            }
            w *= t;
            y[k] -= w;
            for i in k + 1..rows {
                y[i] -= w * v[i];
            }
        }
    }

    /// Residual sum of squares of the least-squares fit of `y`. Needs a
    /// pivoted factorization.
    pub fn rss(&self, y: &[f64]) -> f64 {
        debug_assert!(self.pivoted);
        let mut z = y.to_vec();
        self.apply_qt(&mut z);
        z[self.rank..].iter().map(|v| v * v).sum()
    }

    /// Basic least-squares solution: coefficients of dependent columns are zero.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        debug_assert!(self.pivoted);
        let mut z = y.to_vec();
        self.apply_qt(&mut z);
        let r = self.rank;
        let mut c = vec![0.0; r];
        for i in (0..r).rev() {
            let s: f64 = (i + 1..r).map(|j| self.r(i, j) * c[j]).sum();
            c[i] = (z[i] - s) / self.r(i, i);
        }
        let mut x = vec![0.0; self.cols];
        for (k, v) in c.into_iter().enumerate() {
            x[self.perm[k]] = v;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn colmajor(rows: &[&[f64]]) -> (Vec<f64>, usize, usize) {
        let m = rows.len();
        let n = rows[0].len();
        let mut a = vec![0.0; m * n];
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                a[j * m + i] = *v;
            }
        }
        (a, m, n)
    }

    #[test]
    fn exact_fit() {
        // y = 1 + 2x
        let (a, m, n) = colmajor(&[&[1.0, 0.0], &[1.0, 1.0], &[1.0, 2.0], &[1.0, 3.0]]);
        let y = [1.0, 3.0, 5.0, 7.0];
        for pivot in [false, true] {
            let qr = Qr::new(a.clone(), m, n, pivot);
            assert_eq!(qr.rank(), 2);
            if !pivot {
                continue;
            }
            let x = qr.solve(&y);
            assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
            assert!(qr.rss(&y) < 1e-20);
        }
    }

    #[test]
    fn residual_of_mean_fit() {
        let (a, m, n) = colmajor(&[&[1.0], &[1.0], &[1.0]]);
        let qr = Qr::new(a, m, n, true);
        // deviations from the mean 2: 1 + 0 + 1
        assert!((qr.rss(&[1.0, 2.0, 3.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn detects_rank_deficiency() {
        let (a, m, n) = colmajor(&[&[1.0, 2.0, 1.0], &[1.0, 2.0, 2.0], &[1.0, 2.0, 4.0], &[1.0, 2.0, 8.0]]);
        let qr = Qr::new(a, m, n, true);
        assert_eq!(qr.rank(), 2);
        let y = [3.0, 5.0, 9.0, 17.0]; // 1 + 2*x3
        assert!(qr.rss(&y) < 1e-18);
    }

    #[test]
    fn zero_matrix() {
        let qr = Qr::new(vec![0.0; 6], 3, 2, true);
        assert_eq!(qr.rank(), 0);
        assert!((qr.rss(&[1.0, 1.0, 1.0]) - 3.0).abs() < 1e-12);
    }
}
