//! Small dense linear-algebra kit: vector helpers, a column-major matrix and
//! a one-sided Jacobi SVD.

use crate::error::{check_len, Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Dense real matrix stored column-major: entry `(i, j)` lives at
/// `data[i + j * rows]`. This is the layout used to identify an
/// `rows × cols` matrix with its vectorization.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + j * self.rows] = v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// Singular value decomposition; see [`Svd`].
    pub fn svd(&self) -> Result<Svd> {
        Svd::new(self)
    }
}

/// Thin SVD `A = U diag(σ) Vᵀ` with `p = min(rows, cols)` singular triplets,
/// singular values nonincreasing. Columns of `U` belonging to zero singular
/// values are left at zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

const MAX_SWEEPS: usize = 80;

impl Svd {
    /// One-sided (Hestenes) Jacobi. Orthogonalizes the columns of the tall
    /// orientation of `a` by plane rotations, accumulating them into `V`.
    pub fn new(a: &Matrix) -> Result<Svd> {
        if a.rows() < a.cols() {
            let t = Svd::new(&a.transpose())?;
            return Ok(Svd {
                u: t.v,
                singular_values: t.singular_values,
                v: t.u,
            });
        }
        let (m, n) = (a.rows(), a.cols());
        let mut work = a.clone();
        let mut v = Matrix::from_diag(&vec![1.0; n]);
        let eps = f64::EPSILON;

        let mut converged = n < 2;
        let mut off = 0.0;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = dot(work.col(p), work.col(p));
                    let beta = dot(work.col(q), work.col(q));
                    let gamma = dot(work.col(p), work.col(q));
                    if alpha == 0.0 || beta == 0.0 {
                        continue;
                    }
                    let cosine = gamma.abs() / (alpha * beta).sqrt();
                    off = f64::max(off, cosine);
                    if cosine <= eps * (m as f64).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate(&mut work, p, q, c, s);
                    rotate(&mut v, p, q, c, s);
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence {
                what: "jacobi svd",
                iterations: MAX_SWEEPS,
                residual: off,
            });
        }

        let norms: Vec<f64> = (0..n).map(|j| norm2(work.col(j))).collect();
        let mut order: Vec<usize> = (0..n).collect();
        // stable: equal singular values keep input column order
        order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

        let mut u = Matrix::zeros(m, n);
        let mut vs = Matrix::zeros(n, n);
        let mut sigma = Vec::with_capacity(n);
        for (dst, &src) in order.iter().enumerate() {
            let s = norms[src];
            sigma.push(s);
            if s > 0.0 {
                for (o, w) in u.col_mut(dst).iter_mut().zip(work.col(src)) {
                    *o = w / s;
                }
            }
            vs.col_mut(dst).copy_from_slice(v.col(src));
        }
        Ok(Svd {
            u,
            singular_values: sigma,
            v: vs,
        })
    }

    /// `Σ_{i<rank} σ_i u_i v_iᵀ`.
    pub fn reconstruct(&self, rank: usize) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(m, n);
        for l in 0..rank.min(self.singular_values.len()) {
            let s = self.singular_values[l];
            if s == 0.0 {
                continue;
            }
            let ul = self.u.col(l);
            let vl = self.v.col(l);
            for j in 0..n {
                let w = s * vl[j];
                if w != 0.0 {
                    axpy(w, ul, out.col_mut(j));
                }
            }
        }
        out
    }
}

fn rotate(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = a.rows();
    let (lo, hi) = a.data.split_at_mut(q * rows);
    let cp = &mut lo[p * rows..(p + 1) * rows];
    let cq = &mut hi[..rows];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand_distr::{Distribution, StandardNormal};

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = seeded(seed);
        let data = (0..rows * cols)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Matrix::from_col_major(rows, cols, data).unwrap()
    }

    #[test]
    fn column_major_layout() {
        let m = Matrix::from_col_major(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(m.get(1, 2), 6.0);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.transpose().get(2, 1), 6.0);
    }

    #[test]
    fn svd_reconstructs_tall_and_wide() {
        for &(r, c) in &[(6, 5), (5, 6), (1, 4), (4, 1), (7, 7)] {
            let a = random(r, c, (r * 10 + c) as u64);
            let svd = a.svd().unwrap();
            let back = svd.reconstruct(r.min(c));
            let err = distance(a.as_slice(), back.as_slice());
            assert!(err < 1e-12 * a.frobenius_norm().max(1.0), "{r}x{c}: {err}");
            for w in svd.singular_values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn svd_factors_are_orthonormal() {
        let a = random(9, 6, 3);
        let svd = a.svd().unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(svd.u.col(i), svd.u.col(j)) - want).abs() < 1e-12);
                assert!((dot(svd.v.col(i), svd.v.col(j)) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_of_zero_matrix() {
        let svd = Matrix::zeros(3, 2).svd().unwrap();
        assert_eq!(svd.singular_values, vec![0.0, 0.0]);
        assert_eq!(svd.reconstruct(2), Matrix::zeros(3, 2));
    }
}
