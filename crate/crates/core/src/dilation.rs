//! Polynomial dilation families `rho_t = B_0 + t B_1 + ... + t^m B_m`, their
//! images on the abelianization and the degree bookkeeping along the lower
//! central series.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::NilAlgebra;
use crate::scalar::{rational_to_f64, Rational, Scalar};

pub type RationalMatrix = Vec<Vec<Rational>>;

#[derive(Clone, Debug)]
pub struct DilationFamily {
    dim: usize,
    coeffs: Vec<RationalMatrix>,
    approx: Vec<Vec<Vec<f64>>>,
}

impl DilationFamily {
    pub fn new(dim: usize, coeffs: Vec<RationalMatrix>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidDilation("at least one matrix is required".into()));
        }
        for (j, b) in coeffs.iter().enumerate() {
            if b.len() != dim || b.iter().any(|row| row.len() != dim) {
                return Err(Error::InvalidDilation(format!(
                    "matrix {j} is not {dim}x{dim}"
                )));
            }
        }
        let approx = coeffs
            .iter()
            .map(|b| {
                b.iter()
                    .map(|row| row.iter().map(rational_to_f64).collect())
                    .collect()
            })
            .collect();
        Ok(DilationFamily {
            dim,
            coeffs,
            approx,
        })
    }

    /// `rho_t = t^degree * Id`.
    pub fn scalar_power(dim: usize, degree: usize) -> Self {
        let mut coeffs = vec![zero_matrix(dim); degree + 1];
        for i in 0..dim {
            coeffs[degree][i][i] = Rational::from_i64(1);
        }
        Self::new(dim, coeffs).expect("square by construction")
    }

    /// `rho_t = t * Id`.
    pub fn multiplication(dim: usize) -> Self {
        Self::scalar_power(dim, 1)
    }

    /// `rho_t = diag(t^{w_1}, ..., t^{w_n})`.
    pub fn diagonal_weights(weights: &[usize]) -> Self {
        let dim = weights.len();
        let top = weights.iter().copied().max().unwrap_or(0);
        let mut coeffs = vec![zero_matrix(dim); top + 1];
        for (i, &w) in weights.iter().enumerate() {
            coeffs[w][i][i] = Rational::from_i64(1);
        }
        Self::new(dim, coeffs).expect("square by construction")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[RationalMatrix] {
        &self.coeffs
    }

    /// Highest power of `t` with a nonzero coefficient.
    pub fn top_degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|b| !is_zero_matrix(b))
            .unwrap_or(0)
    }

    pub fn eval_rho(&self, t: f64) -> Vec<Vec<f64>> {
        let n = self.dim;
        let mut out = vec![vec![0.0; n]; n];
        for b in self.approx.iter().rev() {
            for (row, brow) in out.iter_mut().zip(b) {
                for (o, v) in row.iter_mut().zip(brow) {
                    *o = *o * t + v;
                }
            }
        }
        out
    }

    pub fn eval_rho_exact(&self, t: &Rational) -> RationalMatrix {
        let n = self.dim;
        let mut out = zero_matrix(n);
        for b in self.coeffs.iter().rev() {
            for (row, brow) in out.iter_mut().zip(b) {
                for (o, v) in row.iter_mut().zip(brow) {
                    *o = &*o * t + v;
                }
            }
        }
        out
    }

    /// `rho_t v`, by Horner's rule on vectors.
    pub fn apply<S: Scalar>(&self, t: &S, v: &[S]) -> Vec<S> {
        let n = self.dim;
        let mut out = vec![S::zero(); n];
        for b in self.coeffs.iter().rev() {
            for (i, o) in out.iter_mut().enumerate() {
                let mut acc = o.clone() * t.clone();
                for (j, vj) in v.iter().enumerate() {
                    if !b[i][j].is_zero() && !vj.is_zero() {
                        acc = acc + S::from_rational(&b[i][j]) * vj.clone();
                    }
                }
                *o = acc;
            }
        }
        out
    }

    /// Float fast path of [`DilationFamily::apply`].
    pub fn apply_f64(&self, t: f64, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for b in self.approx.iter().rev() {
            for (o, row) in out.iter_mut().zip(b) {
                *o = *o * t + row.iter().zip(v).map(|(a, x)| a * x).sum::<f64>();
            }
        }
        out
    }

    pub fn torus_coefficients(&self, algebra: &NilAlgebra) -> Result<TorusCoefficients> {
        self.check_algebra(algebra)?;
        let m = algebra.abelian_dim();
        let all: Vec<RationalMatrix> = self.coeffs.iter().map(|b| b[..m].to_vec()).collect();
        let d1 = (1..all.len()).rev().find(|&i| !is_zero_matrix(&all[i])).unwrap_or(0);
        let a0_nonzero = !is_zero_matrix(&all[0]);
        Ok(TorusCoefficients {
            a: all.into_iter().take(d1 + 1).collect(),
            d1,
            a0_nonzero,
            degenerate: d1 == 0,
        })
    }

    pub fn degree_data(&self, algebra: &NilAlgebra) -> Result<DegreeData> {
        self.check_algebra(algebra)?;
        let kappa = algebra.kappa();
        let starts = algebra.level_starts();
        let dk: Vec<usize> = (1..=kappa)
            .map(|k| {
                let rows = starts[k];
                self.coeffs
                    .iter()
                    .rposition(|b| b[..rows].iter().any(|r| r.iter().any(|v| !v.is_zero())))
                    .unwrap_or(0)
            })
            .collect();
        let d = combined_degree(&dk, kappa);
        Ok(DegreeData { dk, d })
    }

    /// Whether the quotient by the `k`-th lower-central-series term has
    /// degree at most `k` in `t`, for every `k`.
    pub fn check_graded_condition(&self, algebra: &NilAlgebra) -> Result<bool> {
        let data = self.degree_data(algebra)?;
        Ok(data.dk.iter().enumerate().all(|(i, &d)| d <= i + 1))
    }

    fn check_algebra(&self, algebra: &NilAlgebra) -> Result<()> {
        if algebra.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: algebra.dim(),
                got: self.dim,
            });
        }
        Ok(())
    }
}

/// `dq o rho_t = A_0 + t A_1 + ... + t^{d_1} A_{d_1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusCoefficients {
    /// `A_0, ..., A_{d1}`, each `m x n`.
    pub a: Vec<RationalMatrix>,
    pub d1: usize,
    pub a0_nonzero: bool,
    /// No `A_i` with `i >= 1` is nonzero.
    pub degenerate: bool,
}

impl TorusCoefficients {
    pub fn abelian_dim(&self) -> usize {
        self.a[0].len()
    }

    /// `k^T A_i` for every `i = 0..=d1`.
    pub fn pulled_back(&self, k: &[i64]) -> Vec<Vec<Rational>> {
        self.a
            .iter()
            .map(|ai| crate::linalg::covector_times(k, ai))
            .collect()
    }

    /// `d chi(A_i v)` for every `i = 0..=d1`.
    pub fn phases(&self, k: &[i64], v: &[Rational]) -> Vec<Rational> {
        self.pulled_back(k)
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeData {
    /// `D_1, ..., D_kappa`.
    pub dk: Vec<usize>,
    pub d: usize,
}

/// `max { D_{k_1} + ... + D_{k_r} : k_1 + ... + k_r <= kappa }` over
/// multisets of levels.
pub fn combined_degree(dk: &[usize], kappa: usize) -> usize {
    fn go(dk: &[usize], budget: usize, min_level: usize) -> usize {
        let mut best = 0;
        for level in min_level..=budget.min(dk.len()) {
            best = best.max(dk[level - 1] + go(dk, budget - level, level));
        }
        best
    }
    go(dk, kappa, 1)
}

fn zero_matrix(n: usize) -> RationalMatrix {
    vec![vec![Rational::zero(); n]; n]
}

fn is_zero_matrix(m: &[Vec<Rational>]) -> bool {
    m.iter().all(|r| r.iter().all(Zero::is_zero))
}
