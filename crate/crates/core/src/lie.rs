//! Nilpotent Lie algebras with rational structure constants, and the simply
//! connected group in exponential coordinates of the first kind.

use std::collections::BTreeMap;
use std::ops::Index;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::row_reduce;
use crate::scalar::{Constant, Rational, Scalar};

/// Largest nilpotency class with a precomputed BCH table.
pub const MAX_KAPPA: usize = 6;

/// Coordinates of an element of the Lie algebra in the adapted basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraVector<S>(pub Vec<S>);

impl<S: Scalar> AlgebraVector<S> {
    pub fn zeros(n: usize) -> Self {
        AlgebraVector(vec![S::zero(); n])
    }

    /// The basis vector `e_{i+1}` (0-based index `i`).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = S::one();
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[S] {
        &self.0
    }

    pub fn add(&self, other: &Self) -> Self {
        AlgebraVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        AlgebraVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        )
    }

    pub fn scale(&self, s: &S) -> Self {
        AlgebraVector(self.0.iter().map(|a| a.clone() * s.clone()).collect())
    }

    pub fn neg(&self) -> Self {
        AlgebraVector(self.0.iter().map(|a| -a.clone()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> AlgebraVector<f64> {
        AlgebraVector(self.0.iter().map(Scalar::to_f64).collect())
    }
}

impl<S> Index<usize> for AlgebraVector<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S> From<Vec<S>> for AlgebraVector<S> {
    fn from(v: Vec<S>) -> Self {
        AlgebraVector(v)
    }
}

/// `g = exp(X)`, stored through `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement<S> {
    pub log_coords: AlgebraVector<S>,
}

impl<S: Scalar> GroupElement<S> {
    pub fn exp(x: AlgebraVector<S>) -> Self {
        GroupElement { log_coords: x }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            log_coords: AlgebraVector::zeros(n),
        }
    }

    pub fn to_f64(&self) -> GroupElement<f64> {
        GroupElement {
            log_coords: self.log_coords.to_f64(),
        }
    }
}

#[derive(Clone, Debug)]
struct BracketEntry {
    i: usize,
    j: usize,
    k: usize,
    c: Constant,
}

/// Right-nested bracket words of the Dynkin series, stored as a suffix trie so
/// shared inner brackets are evaluated once.
#[derive(Clone, Debug)]
struct BchTable {
    nodes: Vec<BchNode>,
    roots: Vec<usize>,
}

#[derive(Clone, Debug)]
struct BchNode {
    /// 0 = X, 1 = Y
    letter: u8,
    coeff: Option<Constant>,
    children: Vec<usize>,
}

impl BchTable {
    fn new(kappa: usize) -> Self {
        let words = dynkin_coefficients(kappa);
        let mut table = BchTable {
            nodes: Vec::new(),
            roots: Vec::new(),
        };
        for letter in 0..2u8 {
            table.nodes.push(BchNode {
                letter,
                coeff: None,
                children: Vec::new(),
            });
            table.roots.push(table.nodes.len() - 1);
        }
        for (word, c) in words {
            if c.is_zero() {
                continue;
            }
            // path from the innermost letter outwards
            let mut node = table.roots[*word.last().unwrap() as usize];
            for &letter in word.iter().rev().skip(1) {
                let existing = table.nodes[node]
                    .children
                    .iter()
                    .copied()
                    .find(|&ch| table.nodes[ch].letter == letter);
                node = match existing {
                    Some(ch) => ch,
                    None => {
                        table.nodes.push(BchNode {
                            letter,
                            coeff: None,
                            children: Vec::new(),
                        });
                        let id = table.nodes.len() - 1;
                        table.nodes[node].children.push(id);
                        id
                    }
                };
            }
            table.nodes[node].coeff = Some(Constant::new(c));
        }
        table
    }
}

/// Coefficients of the Dynkin form of `log(exp X exp Y)` on right-nested
/// words `[w1,[w2,[...,[w_{d-1}, w_d]]]]` of length at most `kappa`.
fn dynkin_coefficients(kappa: usize) -> BTreeMap<Vec<u8>, Rational> {
    fn factorial(n: usize) -> BigInt {
        (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
    }

    fn rec(
        kappa: usize,
        pairs: &mut Vec<(usize, usize)>,
        degree: usize,
        out: &mut BTreeMap<Vec<u8>, Rational>,
    ) {
        if !pairs.is_empty() {
            let n = pairs.len();
            let mut word = Vec::with_capacity(degree);
            let mut denom = BigInt::from(n) * BigInt::from(degree);
            for &(r, s) in pairs.iter() {
                word.extend(std::iter::repeat_n(0u8, r));
                word.extend(std::iter::repeat_n(1u8, s));
                denom *= factorial(r) * factorial(s);
            }
            let vanishes = word.len() >= 2 && word[word.len() - 1] == word[word.len() - 2];
            if !vanishes {
                let sign = if n % 2 == 1 { 1 } else { -1 };
                let c = Rational::new(BigInt::from(sign), denom);
                *out.entry(word).or_insert_with(Rational::zero) += c;
            }
        }
        for r in 0..=(kappa - degree) {
            for s in 0..=(kappa - degree - r) {
                if r + s == 0 {
                    continue;
                }
                pairs.push((r, s));
                rec(kappa, pairs, degree + r + s, out);
                pairs.pop();
            }
        }
    }

    let mut out = BTreeMap::new();
    rec(kappa, &mut Vec::new(), 0, &mut out);
    out
}

/// A nilpotent Lie algebra over Q given in a basis adapted to its lower
/// central series: for every `k` the tail `e_{s_k+1}, ..., e_n` spans the
/// `k`-th term, with `s_1 = m` the abelian dimension.
#[derive(Clone, Debug)]
pub struct NilAlgebra {
    dim: usize,
    kappa: usize,
    /// `level_starts[k]` is the 0-based index of the first basis vector of
    /// the `k`-th lower-central-series term, `k = 0..=kappa`.
    level_starts: Vec<usize>,
    constants: Vec<Rational>,
    entries: Vec<BracketEntry>,
    bch: BchTable,
}

impl NilAlgebra {
    /// Builds and validates an algebra from the dense tensor
    /// `c[(i * n + j) * n + k]` with `[e_i, e_j] = sum_k c_ij^k e_k`.
    pub fn new(dim: usize, constants: Vec<Rational>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("algebra dimension must be positive".into()));
        }
        if constants.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                got: constants.len(),
            });
        }
        let idx = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if constants[idx(i, j, k)] != -constants[idx(j, i, k)].clone() {
                        return Err(Error::Antisymmetry {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                    }
                }
            }
        }
        let entries: Vec<BracketEntry> = (0..dim)
            .flat_map(|i| (0..dim).flat_map(move |j| (0..dim).map(move |k| (i, j, k))))
            .filter(|&(i, j, k)| !constants[idx(i, j, k)].is_zero())
            .map(|(i, j, k)| BracketEntry {
                i,
                j,
                k,
                c: Constant::new(constants[idx(i, j, k)].clone()),
            })
            .collect();

        let mut alg = NilAlgebra {
            dim,
            kappa: 1,
            level_starts: vec![0, dim],
            constants,
            entries,
            bch: BchTable::new(1),
        };
        alg.check_jacobi()?;
        let level_starts = alg.lower_central_series()?;
        let kappa = level_starts.len() - 1;
        if kappa > MAX_KAPPA {
            return Err(Error::KappaTooLarge(kappa));
        }
        alg.kappa = kappa;
        alg.level_starts = level_starts;
        alg.bch = BchTable::new(kappa);
        Ok(alg)
    }

    /// Builds from a list of brackets `[e_i, e_j] = sum coeffs[k] e_k`
    /// (0-based indices). The opposite order is implied; listing both orders
    /// inconsistently is an antisymmetry error.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, Vec<Rational>)]) -> Result<Self> {
        let mut c = vec![Rational::zero(); dim * dim * dim];
        let mut set = vec![false; dim * dim];
        let idx = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
        for (i, j, coeffs) in brackets {
            let (i, j) = (*i, *j);
            if i >= dim || j >= dim {
                return Err(Error::Domain(format!(
                    "bracket index out of range: ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            if coeffs.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: coeffs.len(),
                });
            }
            for (k, v) in coeffs.iter().enumerate() {
                let conflict = (set[i * dim + j] && c[idx(i, j, k)] != *v)
                    || (set[j * dim + i] && c[idx(j, i, k)] != -v.clone())
                    || (i == j && !v.is_zero());
                if conflict {
                    return Err(Error::Antisymmetry {
                        i: i + 1,
                        j: j + 1,
                        k: k + 1,
                    });
                }
                c[idx(i, j, k)] = v.clone();
                c[idx(j, i, k)] = -v.clone();
            }
            set[i * dim + j] = true;
            set[j * dim + i] = true;
        }
        Self::new(dim, c)
    }

    pub fn abelian(dim: usize) -> Self {
        Self::new(dim, vec![Rational::zero(); dim * dim * dim]).expect("abelian algebra is valid")
    }

    /// Heisenberg algebra of dimension `2k + 1`: `[e_i, e_{k+i}] = e_{2k+1}`.
    pub fn heisenberg(k: usize) -> Self {
        let dim = 2 * k + 1;
        let brackets: Vec<_> = (0..k)
            .map(|i| {
                let mut v = vec![Rational::zero(); dim];
                v[dim - 1] = Rational::one();
                (i, k + i, v)
            })
            .collect();
        Self::from_brackets(dim, &brackets).expect("Heisenberg algebra is valid")
    }

    /// Standard filiform algebra: `[e_1, e_j] = e_{j+1}` for `2 <= j < n`.
    pub fn filiform(dim: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Domain("filiform algebras need dim >= 3".into()));
        }
        let brackets: Vec<_> = (1..dim - 1)
            .map(|j| {
                let mut v = vec![Rational::zero(); dim];
                v[j + 1] = Rational::one();
                (0, j, v)
            })
            .collect();
        Self::from_brackets(dim, &brackets)
    }

    /// Checks declared class and abelian dimension against the computed ones.
    pub fn check_declared(&self, kappa: Option<usize>, abelian_dim: Option<usize>) -> Result<()> {
        if let Some(k) = kappa {
            if k != self.kappa {
                return Err(Error::KappaMismatch {
                    declared: k,
                    computed: self.kappa,
                });
            }
        }
        if let Some(m) = abelian_dim {
            if m != self.abelian_dim() {
                return Err(Error::AbelianDimMismatch {
                    declared: m,
                    computed: self.abelian_dim(),
                });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// `m = n - dim [g, g]`.
    pub fn abelian_dim(&self) -> usize {
        self.level_starts[1]
    }

    pub fn level_starts(&self) -> &[usize] {
        &self.level_starts
    }

    /// Index sets of the filtration `g^(0) ⊇ g^(1) ⊇ ... ⊇ g^(kappa) = 0`.
    pub fn filtration(&self) -> Vec<std::ops::Range<usize>> {
        self.level_starts.iter().map(|&s| s..self.dim).collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.kappa == 1
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.constants[(i * self.dim + j) * self.dim + k]
    }

    fn check_dim<S>(&self, v: &AlgebraVector<S>) -> Result<()> {
        if v.0.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.0.len(),
            });
        }
        Ok(())
    }

    pub fn bracket<S: Scalar>(
        &self,
        x: &AlgebraVector<S>,
        y: &AlgebraVector<S>,
    ) -> Result<AlgebraVector<S>> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(AlgebraVector(self.bracket_raw(&x.0, &y.0)))
    }

    pub(crate) fn bracket_raw<S: Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim];
        for e in &self.entries {
            if x[e.i].is_zero() || y[e.j].is_zero() {
                continue;
            }
            let term = x[e.i].clone() * y[e.j].clone() * S::from_constant(&e.c);
            out[e.k] = out[e.k].clone() + term;
        }
        out
    }

    /// `log(exp X · exp Y)` via the Dynkin series, exact up to nesting depth
    /// `kappa` (all deeper brackets vanish).
    pub fn bch<S: Scalar>(
        &self,
        x: &AlgebraVector<S>,
        y: &AlgebraVector<S>,
    ) -> Result<AlgebraVector<S>> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(AlgebraVector(self.bch_raw(&x.0, &y.0)))
    }

    pub(crate) fn bch_raw<S: Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let mut out: Vec<S> = x.iter().zip(y).map(|(a, b)| a.clone() + b.clone()).collect();
        if self.kappa == 1 {
            return out;
        }
        let letters = [x, y];
        for &root in &self.bch.roots {
            let node = &self.bch.nodes[root];
            let value = letters[node.letter as usize].to_vec();
            for &child in &node.children {
                self.bch_visit(child, &value, &letters, &mut out);
            }
        }
        out
    }

    fn bch_visit<S: Scalar>(&self, id: usize, inner: &[S], letters: &[&[S]; 2], out: &mut [S]) {
        let node = &self.bch.nodes[id];
        let value = self.bracket_raw(letters[node.letter as usize], inner);
        if value.iter().all(Zero::is_zero) {
            return;
        }
        if let Some(c) = &node.coeff {
            let c = S::from_constant(c);
            for (o, v) in out.iter_mut().zip(&value) {
                *o = o.clone() + c.clone() * v.clone();
            }
        }
        for &child in &node.children {
            self.bch_visit(child, &value, letters, out);
        }
    }

    pub fn group_mul<S: Scalar>(
        &self,
        g: &GroupElement<S>,
        h: &GroupElement<S>,
    ) -> Result<GroupElement<S>> {
        Ok(GroupElement::exp(self.bch(&g.log_coords, &h.log_coords)?))
    }

    pub fn group_inv<S: Scalar>(&self, g: &GroupElement<S>) -> Result<GroupElement<S>> {
        self.check_dim(&g.log_coords)?;
        Ok(GroupElement::exp(g.log_coords.neg()))
    }

    /// Projection onto the abelianization: the first `m` coordinates.
    pub fn dq<S: Scalar>(&self, x: &AlgebraVector<S>) -> Result<Vec<S>> {
        self.check_dim(x)?;
        Ok(x.0[..self.abelian_dim()].to_vec())
    }

    fn check_jacobi(&self) -> Result<()> {
        let n = self.dim;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let e = |a: usize| AlgebraVector::<Rational>::basis(n, a).0;
                    let t1 = self.bracket_raw(&e(i), &self.bracket_raw(&e(j), &e(k)));
                    let t2 = self.bracket_raw(&e(j), &self.bracket_raw(&e(k), &e(i)));
                    let t3 = self.bracket_raw(&e(k), &self.bracket_raw(&e(i), &e(j)));
                    let nonzero = (0..n).any(|c| {
                        !(t1[c].clone() + t2[c].clone() + t3[c].clone()).is_zero()
                    });
                    if nonzero {
                        return Err(Error::Jacobi {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Computes the lower central series and checks that every term is
    /// spanned by a tail of the basis. Returns the level start indices.
    fn lower_central_series(&self) -> Result<Vec<usize>> {
        let n = self.dim;
        let mut starts = vec![0];
        let mut current: Vec<Vec<Rational>> =
            (0..n).map(|i| AlgebraVector::<Rational>::basis(n, i).0).collect();
        loop {
            let mut spanning = Vec::new();
            for i in 0..n {
                let e = AlgebraVector::<Rational>::basis(n, i).0;
                for v in &current {
                    spanning.push(self.bracket_raw(&e, v));
                }
            }
            let next = row_reduce(&spanning);
            let r = next.len();
            if r == current.len() {
                return Err(Error::NotNilpotent);
            }
            let start = n - r;
            if let Some(bad) = next.iter().find(|row| row[..start].iter().any(|x| !x.is_zero())) {
                let idx = bad.iter().position(|x| !x.is_zero()).unwrap_or(0);
                return Err(Error::NotAdapted(format!(
                    "term {} of the lower central series has rank {r} but is not spanned by \
                     e{}..e{n} (component along e{} is nonzero)",
                    starts.len(),
                    start + 1,
                    idx + 1
                )));
            }
            starts.push(start);
            if r == 0 {
                return Ok(starts);
            }
            current = next;
        }
    }
}
