//! Exact linear algebra over Q and Z: echelon forms, rank, and integer kernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::{common_denominator, Rational};

/// Reduced row echelon form; zero rows are dropped.
pub fn row_reduce(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(p) = (pivot_row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, p);
        let inv = m[pivot_row][col].recip();
        for v in m[pivot_row].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&pivot) {
                    *v = &*v - &f * pv;
                }
            }
        }
        pivot_row += 1;
        if pivot_row == m.len() {
            break;
        }
    }
    m.truncate(pivot_row);
    m
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    row_reduce(rows).len()
}

/// Z-basis of `{ k in Z^m : row . k = 0 for every row }`.
///
/// Rows are scaled to integers and eliminated one at a time by unimodular
/// column operations on the current kernel basis, so the result is a basis
/// of the full integer kernel (not just a finite-index sublattice).
pub fn integer_kernel(rows: &[Vec<Rational>], m: usize) -> Vec<Vec<BigInt>> {
    let mut basis: Vec<Vec<BigInt>> = (0..m)
        .map(|i| (0..m).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect();
    for row in rows {
        debug_assert_eq!(row.len(), m);
        let den = common_denominator(row.iter());
        let ints: Vec<BigInt> = row
            .iter()
            .map(|v| (v * Rational::from_integer(den.clone())).to_integer())
            .collect();
        let mut vals: Vec<BigInt> = basis.iter().map(|b| dot_int(&ints, b)).collect();
        // Euclid on the values, mirrored on the basis columns.
        loop {
            let nonzero: Vec<usize> = (0..vals.len()).filter(|&i| !vals[i].is_zero()).collect();
            if nonzero.len() <= 1 {
                if let Some(&i) = nonzero.first() {
                    basis.remove(i);
                    vals.remove(i);
                }
                break;
            }
            let piv = *nonzero.iter().min_by_key(|&&i| vals[i].abs()).unwrap();
            for &i in &nonzero {
                if i == piv {
                    continue;
                }
                let q = vals[i].div_floor(&vals[piv]);
                if q.is_zero() {
                    continue;
                }
                vals[i] = &vals[i] - &q * &vals[piv];
                let pb = basis[piv].clone();
                for (x, p) in basis[i].iter_mut().zip(&pb) {
                    *x = &*x - &q * p;
                }
            }
        }
    }
    size_reduce(&mut basis);
    basis
}

fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cheap pairwise size reduction, enough to keep kernel vectors short for
/// the small dimensions handled here.
fn size_reduce(basis: &mut [Vec<BigInt>]) {
    let norm = |v: &[BigInt]| dot_int(v, v);
    for _ in 0..8 {
        let mut changed = false;
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i == j {
                    continue;
                }
                let nj = norm(&basis[j]);
                if nj.is_zero() {
                    continue;
                }
                let d = dot_int(&basis[i], &basis[j]);
                // nearest integer to d / nj
                let num: BigInt = &d * BigInt::from(2) + &nj;
                let q = num.div_floor(&(&nj * BigInt::from(2)));
                if q.is_zero() {
                    continue;
                }
                let bj = basis[j].clone();
                let candidate: Vec<BigInt> =
                    basis[i].iter().zip(&bj).map(|(x, y)| x - &q * y).collect();
                if norm(&candidate) < norm(&basis[i]) {
                    basis[i] = candidate;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Divides out the content and makes the first nonzero entry positive.
pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let sign = match v.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    v.iter().map(|x| x / &g * &sign).collect()
}

pub fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `k^T M` for an integer row vector `k`.
pub fn covector_times(k: &[i64], m: &[Vec<Rational>]) -> Vec<Rational> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|c| {
            k.iter()
                .zip(m)
                .map(|(ki, row)| Rational::from_integer(BigInt::from(*ki)) * &row[c])
                .sum()
        })
        .collect()
}
