//! Small dense helpers: dot products and a Cholesky factorization for the
//! `d² × d²` systems the estimator solves. Matrices are row-major `Vec<S>`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

pub fn mat_vec<S: Scalar>(a: &[S], n: usize, x: &[S]) -> Vec<S> {
    a.chunks_exact(n).map(|row| dot(row, x)).collect()
}

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<S> {
    n: usize,
    lower: Vec<S>,
}

impl<S: Scalar> Cholesky<S> {
    pub fn factor(a: &[S], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix storage does not match order {n}");
        let mut lower = vec![S::zero(); n * n];
        for j in 0..n {
            let mut diag = a[j * n + j];
            for k in 0..j {
                diag -= lower[j * n + k] * lower[j * n + k];
            }
            if !(diag > S::zero()) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let ljj = diag.sqrt();
            lower[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= lower[i * n + k] * lower[j * n + k];
                }
                lower[i * n + j] = s / ljj;
            }
        }
        Ok(Self { n, lower })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s = dot(row, &y[..i]);
            y[i] = (y[i] - s) / self.lower[i * n + i];
        }
        y
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for (k, &xk) in x.iter().enumerate().skip(i + 1) {
                s -= self.lower[k * n + i] * xk;
            }
            x[i] = s / self.lower[i * n + i];
        }
        x
    }

    /// `vᵀ A⁻¹ v`, computed as `‖L⁻¹ v‖²`.
    pub fn inv_quad(&self, v: &[S]) -> S {
        let y = self.forward(v);
        dot(&y, &y)
    }

    /// Dense `A⁻¹`, column by column.
    pub fn inverse(&self) -> Vec<S> {
        let n = self.n;
        let mut inv = vec![S::zero(); n * n];
        let mut e = vec![S::zero(); n];
        for j in 0..n {
            e[j] = S::one();
            let col = self.solve(&e);
            e[j] = S::zero();
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // [[4,2],[2,3]] x = [2,1] -> x = [0.5, 0]
        let a = [4.0f64, 2.0, 2.0, 3.0];
        let ch = Cholesky::factor(&a, 2).unwrap();
        let x = ch.solve(&[2.0, 1.0]);
        assert!((x[0] - 0.5).abs() < 1e-14 && x[1].abs() < 1e-14);
        let inv = ch.inverse();
        // A⁻¹ = 1/8 [[3,-2],[-2,4]]
        let expected = [0.375, -0.25, -0.25, 0.5];
        for (u, v) in inv.iter().zip(expected) {
            assert!((u - v).abs() < 1e-14);
        }
        assert!((ch.inv_quad(&[1.0, 0.0]) - 0.375).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        assert!(matches!(Cholesky::factor(&a, 2), Err(Error::NotPositiveDefinite { pivot: 1 })));
    }

    #[test]
    fn works_in_single_precision() {
        let a = [2.0f32, 0.0, 0.0, 8.0];
        let ch = Cholesky::factor(&a, 2).unwrap();
        assert_eq!(ch.solve(&[2.0, 8.0]), vec![1.0, 1.0]);
    }
}
