//! Faithful strictly-upper-triangular matrix realizations of small nilpotent
//! algebras. Group products there are plain matrix products, and `exp`/`log`
//! are finite polynomial series, which gives a route to group arithmetic
//! that shares nothing with the Dynkin series.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, NilAlgebra};
use crate::linalg::row_reduce;
use crate::scalar::{Rational, Scalar};

pub type Matrix<S> = Vec<Vec<S>>;

/// A basis of `n` strictly upper triangular `size x size` matrices closed
/// under commutators.
#[derive(Clone, Debug)]
pub struct Realization {
    pub name: &'static str,
    pub size: usize,
    pub generators: Vec<Matrix<Rational>>,
}

fn unit(size: usize, r: usize, c: usize) -> Matrix<Rational> {
    let mut m = zero_matrix::<Rational>(size);
    m[r - 1][c - 1] = Rational::from_i64(1);
    m
}

impl Realization {
    /// `e1 = E12, e2 = E23, e3 = E13`.
    pub fn heisenberg3() -> Self {
        Realization {
            name: "heisenberg3",
            size: 3,
            generators: vec![unit(3, 1, 2), unit(3, 2, 3), unit(3, 1, 3)],
        }
    }

    /// `[e1, e3] = [e2, e4] = e5`.
    pub fn heisenberg5() -> Self {
        Realization {
            name: "heisenberg5",
            size: 4,
            generators: vec![
                unit(4, 1, 2),
                unit(4, 1, 3),
                unit(4, 2, 4),
                unit(4, 3, 4),
                unit(4, 1, 4),
            ],
        }
    }

    /// Standard filiform algebra of dimension `n` in `n x n` matrices:
    /// `e1` is the superdiagonal shift on the first `n - 1` rows and
    /// `e_j = E_{n-j+2, n}` for `j >= 2`.
    pub fn filiform(n: usize) -> Self {
        assert!(n >= 3);
        let mut e1 = zero_matrix::<Rational>(n);
        for i in 1..=(n - 2) {
            e1[i - 1][i] = Rational::from_i64(1);
        }
        let mut generators = vec![e1];
        for j in 2..=n {
            generators.push(unit(n, n - j + 1, n));
        }
        let name = match n {
            4 => "filiform4",
            5 => "filiform5",
            6 => "filiform6",
            _ => "filiform",
        };
        Realization {
            name,
            size: n,
            generators,
        }
    }

    /// All strictly upper triangular 4x4 matrices (dimension 6, class 3),
    /// ordered `E12, E23, E34, E13, E24, E14`.
    pub fn upper_triangular4() -> Self {
        Realization {
            name: "upper_triangular4",
            size: 4,
            generators: vec![
                unit(4, 1, 2),
                unit(4, 2, 3),
                unit(4, 3, 4),
                unit(4, 1, 3),
                unit(4, 2, 4),
                unit(4, 1, 4),
            ],
        }
    }

    pub fn stock() -> Vec<Realization> {
        vec![
            Self::heisenberg3(),
            Self::filiform(4),
            Self::heisenberg5(),
            Self::filiform(5),
            Self::upper_triangular4(),
            Self::filiform(6),
        ]
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Structure constants read off from matrix commutators.
    pub fn algebra(&self) -> Result<NilAlgebra> {
        let n = self.dim();
        let mut c = vec![Rational::zero(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                let comm = commutator(&self.generators[i], &self.generators[j]);
                let coords = self.coordinates_exact(&comm)?;
                for (k, v) in coords.into_iter().enumerate() {
                    c[(i * n + j) * n + k] = v;
                }
            }
        }
        NilAlgebra::new(n, c)
    }

    pub fn to_matrix<S: Scalar>(&self, x: &AlgebraVector<S>) -> Matrix<S> {
        let mut m = zero_matrix::<S>(self.size);
        for (xi, g) in x.0.iter().zip(&self.generators) {
            for r in 0..self.size {
                for c in 0..self.size {
                    if !g[r][c].is_zero() {
                        m[r][c] = m[r][c].clone() + xi.clone() * S::from_rational(&g[r][c]);
                    }
                }
            }
        }
        m
    }

    fn coordinates_exact(&self, m: &Matrix<Rational>) -> Result<Vec<Rational>> {
        // Solve sum_i x_i G_i = M over the flattened entries.
        let n = self.dim();
        let rows: Vec<Vec<Rational>> = (0..self.size * self.size)
            .map(|p| {
                let (r, c) = (p / self.size, p % self.size);
                let mut row: Vec<Rational> =
                    self.generators.iter().map(|g| g[r][c].clone()).collect();
                row.push(m[r][c].clone());
                row
            })
            .collect();
        let red = row_reduce(&rows);
        if red.iter().any(|row| row[..n].iter().all(Zero::is_zero)) {
            return Err(Error::Domain(
                "matrix is not in the span of the realization".into(),
            ));
        }
        let mut x = vec![Rational::zero(); n];
        for row in &red {
            let p = row.iter().position(|v| !v.is_zero()).unwrap();
            x[p] = row[n].clone();
        }
        Ok(x)
    }

    /// Coordinates of a matrix in the span, by the same flattened solve; the
    /// float path uses the pivot pattern of the exact generators.
    pub fn from_matrix<S: Scalar>(&self, m: &Matrix<S>) -> AlgebraVector<S> {
        // Each stock generator has a private entry (a position where it is
        // the only nonzero generator) up to triangular elimination; solve by
        // back substitution in generator order.
        let n = self.dim();
        let pivots = self.pivot_positions();
        let mut residual = m.clone();
        let mut x = vec![S::zero(); n];
        for &(i, r, c) in &pivots {
            let coeff = residual[r][c].clone() / S::from_rational(&self.generators[i][r][c]);
            for rr in 0..self.size {
                for cc in 0..self.size {
                    if !self.generators[i][rr][cc].is_zero() {
                        residual[rr][cc] = residual[rr][cc].clone()
                            - coeff.clone() * S::from_rational(&self.generators[i][rr][cc]);
                    }
                }
            }
            x[i] = coeff;
        }
        AlgebraVector(x)
    }

    /// An elimination order `(generator, row, col)` such that the entry is
    /// nonzero in that generator and zero in every generator later in the
    /// order.
    fn pivot_positions(&self) -> Vec<(usize, usize, usize)> {
        let n = self.dim();
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut order = Vec::new();
        while !remaining.is_empty() {
            let mut found = None;
            'search: for (pos, &i) in remaining.iter().enumerate() {
                for r in 0..self.size {
                    for c in 0..self.size {
                        if self.generators[i][r][c].is_zero() {
                            continue;
                        }
                        let private = remaining
                            .iter()
                            .all(|&j| j == i || self.generators[j][r][c].is_zero());
                        if private {
                            found = Some((pos, i, r, c));
                            break 'search;
                        }
                    }
                }
            }
            let (pos, i, r, c) = found.expect("realization generators admit triangular elimination");
            order.push((i, r, c));
            remaining.remove(pos);
        }
        order
    }

    /// `log(exp(X) exp(Y))` computed with matrices.
    pub fn group_product<S: Scalar>(
        &self,
        x: &AlgebraVector<S>,
        y: &AlgebraVector<S>,
    ) -> AlgebraVector<S> {
        let gx = exp_nilpotent(&self.to_matrix(x));
        let gy = exp_nilpotent(&self.to_matrix(y));
        self.from_matrix(&log_unipotent(&mat_mul(&gx, &gy)))
    }
}

pub fn zero_matrix<S: Scalar>(size: usize) -> Matrix<S> {
    vec![vec![S::zero(); size]; size]
}

pub fn identity_matrix<S: Scalar>(size: usize) -> Matrix<S> {
    let mut m = zero_matrix::<S>(size);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = S::one();
    }
    m
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let n = a.len();
    let mut out = zero_matrix::<S>(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] = out[i][j].clone() + a[i][k].clone() * b[k][j].clone();
            }
        }
    }
    out
}

fn mat_add_scaled<S: Scalar>(acc: &mut Matrix<S>, m: &Matrix<S>, s: &S) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (a, v) in ra.iter_mut().zip(rm) {
            *a = a.clone() + v.clone() * s.clone();
        }
    }
}

pub fn commutator<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let ab = mat_mul(a, b);
    let ba = mat_mul(b, a);
    ab.into_iter()
        .zip(ba)
        .map(|(r1, r2)| r1.into_iter().zip(r2).map(|(x, y)| x - y).collect())
        .collect()
}

/// `exp(N) = sum_{k < size} N^k / k!` for nilpotent `N`.
pub fn exp_nilpotent<S: Scalar>(n: &Matrix<S>) -> Matrix<S> {
    let size = n.len();
    let mut out = identity_matrix::<S>(size);
    let mut power = identity_matrix::<S>(size);
    let mut fact = S::one();
    for k in 1..size {
        power = mat_mul(&power, n);
        fact = fact * S::from_i64(k as i64);
        mat_add_scaled(&mut out, &power, &(S::one() / fact.clone()));
    }
    out
}

/// `log(U) = sum_{k >= 1} (-1)^{k+1} (U - I)^k / k` for unipotent `U`.
pub fn log_unipotent<S: Scalar>(u: &Matrix<S>) -> Matrix<S> {
    let size = u.len();
    let mut nil = u.clone();
    for (i, row) in nil.iter_mut().enumerate() {
        row[i] = row[i].clone() - S::one();
    }
    let mut out = zero_matrix::<S>(size);
    let mut power = identity_matrix::<S>(size);
    for k in 1..size {
        power = mat_mul(&power, &nil);
        let sign = if k % 2 == 1 { 1 } else { -1 };
        mat_add_scaled(&mut out, &power, &(S::from_i64(sign) / S::from_i64(k as i64)));
    }
    out
}
