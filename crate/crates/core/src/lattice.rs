//! The lattice of integer points in coordinates of the second kind, the unit
//! cube as fundamental domain, and Haar integration on the quotient.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement, NilAlgebra};
use crate::parallel::ordered_sum;
use crate::scalar::{Rational, Scalar};

/// Largest number of quadrature nodes accepted by [`haar_integrate`].
pub const HAAR_NODE_BUDGET: u64 = 50_000_000;

/// A point of `G / Gamma`, stored as its representative in the unit cube:
/// `x = exp(t_1 e_1) ... exp(t_n e_n) Gamma` with every `t_i` in `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NilmanifoldPoint<S> {
    pub second_kind: Vec<S>,
}

impl<S: Scalar> NilmanifoldPoint<S> {
    pub fn origin(n: usize) -> Self {
        NilmanifoldPoint {
            second_kind: vec![S::zero(); n],
        }
    }

    pub fn to_f64(&self) -> NilmanifoldPoint<f64> {
        NilmanifoldPoint {
            second_kind: self.second_kind.iter().map(Scalar::to_f64).collect(),
        }
    }
}

/// `Gamma = { exp(m_1 e_1) ... exp(m_n e_n) : m_i in Z }` for an algebra in
/// an adapted basis.
#[derive(Clone, Debug)]
pub struct Nilmanifold {
    algebra: NilAlgebra,
}

impl Nilmanifold {
    /// Accepts the integer points as a lattice after checking that products
    /// and inverses of small generator powers stay integral.
    pub fn integer_points(algebra: NilAlgebra) -> Result<Self> {
        let x = Nilmanifold { algebra };
        x.check_closure()?;
        Ok(x)
    }

    pub fn algebra(&self) -> &NilAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    fn check_closure(&self) -> Result<()> {
        let n = self.dim();
        let powers = [-2i64, -1, 1, 2];
        for i in 0..n {
            for j in 0..n {
                for &a in &powers {
                    for &b in &powers {
                        let gi = self.generator_power::<Rational>(i, &BigInt::from(a));
                        let gj = self.generator_power::<Rational>(j, &BigInt::from(b));
                        let prod = self.algebra.bch_raw(&gi.log_coords.0, &gj.log_coords.0);
                        let t = self.to_second_kind(&GroupElement::exp(AlgebraVector(prod)));
                        if let Some(c) = t.iter().position(|v| !v.is_integer()) {
                            return Err(Error::NotALattice(format!(
                                "exp({a} e{}) exp({b} e{}) has non-integral coordinate {}",
                                i + 1,
                                j + 1,
                                c + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn generator_power<S: Scalar>(&self, i: usize, a: &BigInt) -> GroupElement<S> {
        let mut x = AlgebraVector::<S>::zeros(self.dim());
        x.0[i] = S::from_rational(&Rational::from_integer(a.clone()));
        GroupElement::exp(x)
    }

    /// Coordinates of the second kind: `g = exp(t_1 e_1) ... exp(t_n e_n)`.
    pub fn to_second_kind<S: Scalar>(&self, g: &GroupElement<S>) -> Vec<S> {
        let n = self.dim();
        let mut x = g.log_coords.0.clone();
        let mut t = Vec::with_capacity(n);
        for k in 0..n {
            let tk = x[k].clone();
            if !tk.is_zero() {
                let mut step = vec![S::zero(); n];
                step[k] = -tk.clone();
                x = self.algebra.bch_raw(&step, &x);
            }
            t.push(tk);
        }
        t
    }

    pub fn from_second_kind<S: Scalar>(&self, t: &[S]) -> GroupElement<S> {
        let n = self.dim();
        let mut acc = vec![S::zero(); n];
        for k in (0..n).rev() {
            if t[k].is_zero() {
                continue;
            }
            let mut step = vec![S::zero(); n];
            step[k] = t[k].clone();
            acc = self.algebra.bch_raw(&step, &acc);
        }
        GroupElement::exp(AlgebraVector(acc))
    }

    /// Returns `(r, word)` with `r = g exp(-w_1 e_1) exp(-w_2 e_2) ... exp(-w_n e_n)`
    /// in the unit cube.
    pub fn reduce_mod_lattice<S: Scalar>(
        &self,
        g: &GroupElement<S>,
    ) -> (NilmanifoldPoint<S>, Vec<BigInt>) {
        let n = self.dim();
        let mut current = g.log_coords.0.clone();
        let mut word = Vec::with_capacity(n);
        let mut rep = Vec::with_capacity(n);
        for k in 0..n {
            let t = self.second_kind_coordinate(&current, k);
            let (frac, a) = t.split_floor();
            if !a.is_zero() {
                let mut step = vec![S::zero(); n];
                step[k] = -S::from_rational(&Rational::from_integer(a.clone()));
                current = self.algebra.bch_raw(&current, &step);
            }
            word.push(a);
            rep.push(frac);
        }
        (NilmanifoldPoint { second_kind: rep }, word)
    }

    /// The `k`-th coordinate of the second kind; earlier coordinates are
    /// peeled off on the left.
    fn second_kind_coordinate<S: Scalar>(&self, x: &[S], k: usize) -> S {
        let n = self.dim();
        let mut x = x.to_vec();
        for j in 0..k {
            if x[j].is_zero() {
                continue;
            }
            let mut step = vec![S::zero(); n];
            step[j] = -x[j].clone();
            x = self.algebra.bch_raw(&step, &x);
        }
        x[k].clone()
    }

    /// `exp(w_n e_n) ... exp(w_1 e_1)`, the element with `g = r * word_element(w)`.
    pub fn word_element<S: Scalar>(&self, word: &[BigInt]) -> GroupElement<S> {
        let n = self.dim();
        let mut acc = vec![S::zero(); n];
        for (k, a) in word.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let step = self.generator_power::<S>(k, a);
            acc = self.algebra.bch_raw(&step.log_coords.0, &acc);
        }
        GroupElement::exp(AlgebraVector(acc))
    }

    /// `g x` for a group element acting on a point of the quotient.
    pub fn act<S: Scalar>(&self, g: &GroupElement<S>, x: &NilmanifoldPoint<S>) -> NilmanifoldPoint<S> {
        let base = self.from_second_kind(&x.second_kind);
        let prod = self.algebra.bch_raw(&g.log_coords.0, &base.log_coords.0);
        self.reduce_mod_lattice(&GroupElement::exp(AlgebraVector(prod))).0
    }
}

/// Composite midpoint rule for `f` over the unit cube `[0, 1)^n` with
/// `panels` cells per axis.
pub fn haar_integrate<F>(n: usize, panels: usize, f: F) -> Result<Complex64>
where
    F: Fn(&NilmanifoldPoint<f64>) -> Complex64 + Sync,
{
    if panels == 0 {
        return Err(Error::NonPositivePanels);
    }
    let nodes = (panels as u64)
        .checked_pow(n as u32)
        .filter(|&v| v <= HAAR_NODE_BUDGET)
        .ok_or(Error::BudgetExceeded {
            estimated: (panels as f64).powi(n as i32).min(u64::MAX as f64) as u64,
            budget: HAAR_NODE_BUDGET,
        })?;
    let h = 1.0 / panels as f64;
    let total = ordered_sum(nodes.to_usize().unwrap_or(usize::MAX), |idx| {
        let mut rest = idx;
        let mut coords = vec![0.0; n];
        for c in coords.iter_mut().rev() {
            *c = ((rest % panels) as f64 + 0.5) * h;
            rest /= panels;
        }
        f(&NilmanifoldPoint { second_kind: coords })
    });
    Ok(total / nodes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use std::f64::consts::TAU;

    fn heis() -> Nilmanifold {
        Nilmanifold::integer_points(NilAlgebra::heisenberg(1)).unwrap()
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn torus_reduction() {
        let torus = Nilmanifold::integer_points(NilAlgebra::abelian(2)).unwrap();
        let g = GroupElement::exp(AlgebraVector(vec![1.25, -0.5]));
        let (r, w) = torus.reduce_mod_lattice(&g);
        assert_eq!(r.second_kind, vec![0.25, 0.5]);
        assert_eq!(w, big(&[1, -1]));
        let (r, w) = torus.reduce_mod_lattice(&GroupElement::<f64>::identity(2));
        assert_eq!(r, NilmanifoldPoint::origin(2));
        assert_eq!(w, big(&[0, 0]));
    }

    #[test]
    fn heisenberg_second_kind_closed_form() {
        let x = heis();
        let (a, b, c) = (rat(2, 3), rat(-5, 4), rat(7, 2));
        let g = GroupElement::exp(AlgebraVector(vec![a.clone(), b.clone(), c.clone()]));
        let t = x.to_second_kind(&g);
        assert_eq!(t, vec![a.clone(), b.clone(), c - a * b / int(2)]);
        assert_eq!(x.from_second_kind(&t), g);
    }

    #[test]
    fn heisenberg_reduction_identity() {
        let x = heis();
        let g = x.from_second_kind(&[rat(3, 2), rat(1, 4), rat(27, 10)]);
        let (r, w) = x.reduce_mod_lattice(&g);
        assert!(r.second_kind.iter().all(|v| *v >= int(0) && *v < int(1)));
        let back = x
            .algebra()
            .group_mul(&x.from_second_kind(&r.second_kind), &x.word_element(&w))
            .unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn reduction_is_lattice_invariant() {
        let x = heis();
        let g = x.from_second_kind(&[rat(-7, 3), rat(5, 2), rat(1, 9)]);
        let gamma = x.word_element::<Rational>(&big(&[2, -3, 5]));
        let moved = x.algebra().group_mul(&g, &gamma).unwrap();
        assert_eq!(x.reduce_mod_lattice(&g).0, x.reduce_mod_lattice(&moved).0);
    }

    #[test]
    fn stock_algebras_give_lattices() {
        let scaled_filiform = NilAlgebra::from_brackets(
            4,
            &[
                (0, 1, vec![int(0), int(0), int(2), int(0)]),
                (0, 2, vec![int(0), int(0), int(0), int(2)]),
            ],
        )
        .unwrap();
        for alg in [
            NilAlgebra::heisenberg(2),
            scaled_filiform,
            crate::realization::Realization::upper_triangular4().algebra().unwrap(),
        ] {
            Nilmanifold::integer_points(alg).unwrap();
        }
        // integer structure constants alone are not enough
        assert!(Nilmanifold::integer_points(NilAlgebra::filiform(4).unwrap()).is_err());
        // [e1, e2] = 1/2 e3 makes exp(e1) exp(e2) leave the integer points
        let half = NilAlgebra::from_brackets(3, &[(0, 1, vec![int(0), int(0), rat(1, 2)])]).unwrap();
        assert!(matches!(
            Nilmanifold::integer_points(half),
            Err(Error::NotALattice(_))
        ));
    }

    #[test]
    fn haar_normalization_and_characters() {
        let one = haar_integrate(3, 7, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!((one.re - 1.0).abs() < 1e-15 && one.im == 0.0);
        let chi = haar_integrate(2, 50, |p| Complex64::from_polar(1.0, TAU * p.second_kind[0])).unwrap();
        assert!(chi.norm() < 1e-12);
        let prod = haar_integrate(2, 1000, |p| {
            Complex64::new(p.second_kind[0] * p.second_kind[1], 0.0)
        })
        .unwrap();
        assert!((prod.re - 0.25).abs() < 1e-6);
        assert_eq!(haar_integrate(2, 0, |_| Complex64::new(1.0, 0.0)), Err(Error::NonPositivePanels));
    }
}
