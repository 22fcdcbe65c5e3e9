//! The Cantor staircase `psi(u) = sum over digits a_n(u) = 1 of 3^-n`, the
//! measure it pushes Lebesgue measure to, and the identities that make the
//! dilates `mu_{3^m}` all coincide.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::measures::{cantor_transform, CantorCurve, Curve, MeasureSpec};
use crate::parallel::ordered_sum;
use crate::scalar::{int, is_power_of_three, Rational};

/// Default digit depth for Cantor enumerations.
pub const DEFAULT_DEPTH: u32 = 12;

/// Leading ternary digits of `u` in `[0, 1)`, greedy (a terminating
/// expansion is preferred over one ending in repeated 2s).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TernaryExpansion {
    pub digits: Vec<u8>,
    /// The expansion terminates within `digits`, so nothing was truncated.
    pub exact: bool,
}

impl TernaryExpansion {
    pub fn of_rational(u: &Rational, depth: usize) -> Result<Self> {
        check_unit_interval(u)?;
        let mut x = u.clone();
        let mut digits = Vec::with_capacity(depth);
        for _ in 0..depth {
            let y = &x * int(3);
            let d = y.floor();
            digits.push(d.to_integer().to_u8().unwrap_or(0));
            x = y - d;
        }
        Ok(TernaryExpansion {
            digits,
            exact: x.is_zero(),
        })
    }

    pub fn of_f64(u: f64, depth: usize) -> Self {
        let mut x = u.rem_euclid(1.0);
        let mut digits = Vec::with_capacity(depth);
        for _ in 0..depth {
            let y = 3.0 * x;
            let d = y.floor().clamp(0.0, 2.0);
            digits.push(d as u8);
            x = y - d;
        }
        TernaryExpansion {
            digits,
            exact: x == 0.0,
        }
    }

    /// `sum_{n : a_n = 1} 3^-n` over the stored digits.
    pub fn psi(&self) -> Rational {
        let mut acc = Rational::zero();
        let mut scale = Rational::one();
        let third = Rational::new(BigInt::one(), BigInt::from(3));
        for &d in &self.digits {
            scale = &scale * &third;
            if d == 1 {
                acc += &scale;
            }
        }
        acc
    }
}

fn check_unit_interval(u: &Rational) -> Result<()> {
    if u.is_negative() || *u >= Rational::one() {
        return Err(Error::Domain(format!("{u} is not in [0, 1)")));
    }
    Ok(())
}

/// `psi(u)` for rational `u` in `[0, 1)`, summed exactly over the eventually
/// periodic ternary expansion.
pub fn cantor_psi_exact(u: &Rational) -> Result<Rational> {
    check_unit_interval(u)?;
    if let Some(value) = psi_of_ternary_rational(u) {
        return Ok(value);
    }
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    let mut digits = Vec::new();
    let mut x = u.clone();
    while !seen.contains_key(&x) {
        seen.insert(x.clone(), digits.len());
        let y = &x * int(3);
        let d = y.floor();
        digits.push(d.to_integer().to_u8().unwrap_or(0));
        x = y - d;
    }
    let start = seen[&x];
    let period = digits.len() - start;
    let value_of = |ds: &[u8]| {
        TernaryExpansion {
            digits: ds.to_vec(),
            exact: true,
        }
        .psi()
    };
    let pre = value_of(&digits[..start]);
    let cycle = value_of(&digits[start..]);
    let three_pow = |k: usize| Rational::from_integer(num_traits::pow(BigInt::from(3), k));
    let geometric = three_pow(period) / (three_pow(period) - int(1));
    Ok(pre + cycle * geometric / three_pow(start))
}

/// Integer digit loop for `u = a / 3^k` with `k <= 40`.
fn psi_of_ternary_rational(u: &Rational) -> Option<Rational> {
    let den = u.denom().to_u128()?;
    if den > 3u128.pow(40) || !is_power_of_three(u.denom()) {
        return None;
    }
    let mut x = u.numer().to_u128()?;
    let mut scale = den;
    let mut acc = 0u128;
    while x != 0 {
        scale /= 3;
        let y = 3 * x;
        if y / den == 1 {
            acc += scale;
        }
        x = y % den;
    }
    Some(Rational::new(BigInt::from(acc), BigInt::from(den)))
}

/// `psi(u)` truncated after `depth` digits.
pub fn cantor_psi(u: f64, depth: u32) -> f64 {
    let mut x = u.rem_euclid(1.0);
    let mut acc = 0.0;
    let mut scale = 1.0;
    for _ in 0..depth {
        scale /= 3.0;
        let y = 3.0 * x;
        let d = y.floor().clamp(0.0, 2.0);
        if d == 1.0 {
            acc += scale;
        }
        x = y - d;
    }
    acc
}

/// `3 psi(b/3 + u) - psi(3u)` for a ternary rational `u` in `[0, 1/3)`,
/// which is always an integer.
pub fn verify_self_similarity(u: &Rational, b: u8) -> Result<BigInt> {
    if b > 2 {
        return Err(Error::Domain(format!("digit {b} is not in {{0, 1, 2}}")));
    }
    if u.is_negative() || *u >= Rational::new(BigInt::one(), BigInt::from(3)) || !is_power_of_three(u.denom()) {
        return Err(Error::NotTernaryRational(u.to_string()));
    }
    let shifted = Rational::new(BigInt::from(b), BigInt::from(3)) + u;
    let residue = int(3) * cantor_psi_exact(&shifted)? - cantor_psi_exact(&(u * int(3)))?;
    if !residue.is_integer() {
        return Err(Error::Domain(format!(
            "self-similarity residue {residue} at u = {u}, b = {b} is not an integer"
        )));
    }
    Ok(residue.to_integer())
}

/// Fourier transform of the Cantor staircase measure at an integer
/// frequency, by enumerating the `2^depth` distinct digit-prefix values of
/// `psi` and multiplying by the exact transform of the tail.
pub fn cantor_transform_enumerated(frequency: i64, depth: u32) -> Complex64 {
    let three_n = 3i128.pow(depth);
    let w = frequency as i128;
    let tail = cantor_transform(frequency as f64 / three_n as f64);
    let subsets = 1usize << depth;
    let body = ordered_sum(subsets, |mask| {
        // prefix value s = S / 3^depth where digit n is 1 iff bit n - 1 is set
        let mut s: i128 = 0;
        let mut ones = 0;
        for n in 0..depth {
            if mask >> n & 1 == 1 {
                s += 3i128.pow(depth - 1 - n);
                ones += 1;
            }
        }
        let weight = (1.0 / 3.0f64).powi(ones) * (2.0 / 3.0f64).powi(depth as i32 - ones);
        let phase = (w * s).rem_euclid(three_n) as f64 / three_n as f64;
        Complex64::from_polar(weight, std::f64::consts::TAU * phase)
    });
    body * tail
}

/// `max_{1 <= k <= height} |hat mu_{3^m}(k) - hat mu_1(k)|` for the dilated
/// Cantor measure on the circle.
pub fn verify_selfsimilar_measure(m: u32, height: u32, depth: u32) -> Result<f64> {
    if m == 0 {
        return Ok(0.0);
    }
    if depth < m + 8 {
        return Err(Error::DepthTooShallow { depth, m });
    }
    let scale = 3i64.pow(m);
    let mut worst: f64 = 0.0;
    for k in 1..=height as i64 {
        let dilated = cantor_transform_enumerated(scale * k, depth);
        let base = cantor_transform_enumerated(k, depth);
        worst = worst.max((dilated - base).norm());
    }
    Ok(worst)
}

/// `2^N |q / 2p| / 3^N`, the covering bound for the line slice.
pub fn line_cover_bound(p: i64, q: i64, depth: u32) -> Result<Rational> {
    if p == 0 {
        return Err(Error::Domain("the cover bound needs p != 0".into()));
    }
    Ok(Rational::new(
        BigInt::from(2).pow(depth) * BigInt::from(q.abs()),
        BigInt::from(3).pow(depth) * BigInt::from(2 * p.abs()),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineCover {
    /// Boxes at the final depth that meet the line.
    pub boxes: u64,
    /// Exact length of the projection to the first axis of the line inside
    /// the union of boxes.
    pub measure: Rational,
    pub bound: Rational,
}

/// Exact Lebesgue measure of the first-axis projection of
/// `{p x + q y = z}` intersected with the depth-`N` box cover of the graph
/// of `psi`. Boxes are `[X, X + 1) x [S, S + 1/2]` in units of `3^-n`; the
/// recursion only descends into boxes that meet the line.
pub fn line_cover_measure(p: i64, q: i64, z: &Rational, depth: u32) -> Result<LineCover> {
    let bound = line_cover_bound(p, q, depth)?;
    let zn = z.numer().to_i128().ok_or_else(|| Error::Domain("offset too large".into()))?;
    let zd = z.denom().to_i128().ok_or_else(|| Error::Domain("offset too large".into()))?;
    let (p, q) = (p as i128, q as i128);
    // Scaled equation at level n: 2 zd p X + zd q Y = 2 3^n zn with Y = 2 eta.
    let mut boxes = 0u64;
    let mut total: i128 = 0;
    let mut stack: Vec<(u32, i128, i128)> = vec![(0, 0, 0)];
    while let Some((level, x, s)) = stack.pop() {
        let target = 2 * 3i128.pow(level) * zn;
        let corners = [
            2 * zd * p * x + zd * q * 2 * s,
            2 * zd * p * (x + 1) + zd * q * 2 * s,
            2 * zd * p * x + zd * q * (2 * s + 1),
            2 * zd * p * (x + 1) + zd * q * (2 * s + 1),
        ];
        let lo = *corners.iter().min().unwrap();
        let hi = *corners.iter().max().unwrap();
        if target < lo || target > hi {
            continue;
        }
        if level == depth {
            boxes += 1;
            total += projected_length(p, q, zd, target, x, s);
            continue;
        }
        for a in 0..3i128 {
            stack.push((level + 1, 3 * x + a, 3 * s + i128::from(a == 1)));
        }
    }
    let den = 2 * zd * p.abs() * 3i128.pow(depth);
    Ok(LineCover {
        boxes,
        measure: Rational::new(BigInt::from(total), BigInt::from(den)),
        bound,
    })
}

/// Length, in units of `1 / (2 zd |p|)`, of `[x, x + 1]` intersected with
/// the first-axis range of the line over `eta in [s, s + 1/2]`.
fn projected_length(p: i128, q: i128, zd: i128, target: i128, x: i128, s: i128) -> i128 {
    let mut den = 2 * zd * p;
    let mut a = target - zd * q * 2 * s;
    let mut b = target - zd * q * (2 * s + 1);
    if den < 0 {
        den = -den;
        a = -a;
        b = -b;
    }
    let lo = a.min(b).max(den * x);
    let hi = a.max(b).min(den * (x + 1));
    (hi - lo).max(0)
}

/// Whether a rational in `[0, 1]` lies in the middle-thirds Cantor set.
pub fn in_middle_thirds_cantor(x: &Rational) -> bool {
    if x.is_negative() || *x > Rational::one() {
        return false;
    }
    if x.is_one() {
        return true;
    }
    let mut seen = std::collections::HashSet::new();
    let mut x = x.clone();
    loop {
        if x.is_zero() || !seen.insert(x.clone()) {
            return true;
        }
        let y = &x * int(3);
        let d = y.floor();
        let rest = y - &d;
        if d.is_one() {
            // 0.1 followed by zeros is also 0.0222...
            return rest.is_zero();
        }
        x = rest;
    }
}

/// `u -> (u, psi(u))` in the plane.
pub fn counterexample_curve() -> Curve {
    Curve::Cantor(CantorCurve {
        dim: 2,
        u_dim: 0,
        psi_dim: 1,
        depth: DEFAULT_DEPTH,
    })
}

/// The pushforward of Lebesgue measure on `(0, 1)` under `psi`.
pub fn cantor_measure() -> MeasureSpec {
    MeasureSpec::Cantor1D {
        depth: DEFAULT_DEPTH,
    }
}

/// The `d`-fold product of [`cantor_measure`].
pub fn product_cantor(d: usize) -> Result<MeasureSpec> {
    if d == 0 {
        return Err(Error::InvalidMeasure("product needs at least one factor".into()));
    }
    Ok(MeasureSpec::Product(vec![cantor_measure(); d]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn psi_values() {
        assert_eq!(cantor_psi_exact(&int(0)).unwrap(), int(0));
        assert_eq!(cantor_psi_exact(&rat(1, 2)).unwrap(), rat(1, 2));
        assert_eq!(cantor_psi_exact(&rat(1, 3)).unwrap(), rat(1, 3));
        assert_eq!(cantor_psi_exact(&rat(1, 9)).unwrap(), rat(1, 9));
        // 1/4 = 0.0202...
        assert_eq!(cantor_psi_exact(&rat(1, 4)).unwrap(), int(0));
        // 5/8 = 0.121212...: digits 1 at odd places, 1/3 + 1/27 + ... = 3/8
        assert_eq!(cantor_psi_exact(&rat(5, 8)).unwrap(), rat(3, 8));
        assert!((cantor_psi(0.5, 30) - 0.5).abs() < 1e-14);
        assert!(cantor_psi_exact(&int(1)).is_err());
    }

    #[test]
    fn greedy_expansion_terminates() {
        let e = TernaryExpansion::of_rational(&rat(1, 3), 4).unwrap();
        assert_eq!(e.digits, vec![1, 0, 0, 0]);
        assert!(e.exact);
        let e = TernaryExpansion::of_rational(&rat(1, 2), 3).unwrap();
        assert_eq!(e.digits, vec![1, 1, 1]);
        assert!(!e.exact);
    }

    #[test]
    fn self_similarity_residues() {
        assert_eq!(verify_self_similarity(&int(0), 1).unwrap(), BigInt::one());
        assert_eq!(verify_self_similarity(&rat(1, 9), 0).unwrap(), BigInt::zero());
        assert_eq!(verify_self_similarity(&int(0), 0).unwrap(), BigInt::zero());
        assert!(matches!(
            verify_self_similarity(&rat(1, 2), 0),
            Err(Error::NotTernaryRational(_))
        ));
    }

    #[test]
    fn enumeration_matches_product_formula() {
        for k in [1i64, 2, 7, 81] {
            let a = cantor_transform_enumerated(k, 10);
            let b = cantor_transform(k as f64);
            assert!((a - b).norm() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn selfsimilar_measure_contract() {
        assert_eq!(verify_selfsimilar_measure(0, 3, 4).unwrap(), 0.0);
        assert!(verify_selfsimilar_measure(1, 1, 12).unwrap() <= 1e-9);
        assert!(matches!(
            verify_selfsimilar_measure(5, 1, 12),
            Err(Error::DepthTooShallow { depth: 12, m: 5 })
        ));
    }

    #[test]
    fn middle_thirds_membership() {
        assert!(in_middle_thirds_cantor(&rat(1, 3)));
        assert!(in_middle_thirds_cantor(&rat(1, 4)));
        assert!(in_middle_thirds_cantor(&int(1)));
        assert!(!in_middle_thirds_cantor(&rat(1, 2)));
        assert!(!in_middle_thirds_cantor(&rat(4, 9)));
    }

    fn from_digits(digits: &[u8]) -> Rational {
        digits
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, &d| (acc + int(d as i64)) / int(3))
    }

    #[test]
    fn equal_psi_pairs_differ_by_cantor_points() {
        let depth = 8;
        let mut checked = 0;
        for code in 0..3u32.pow(depth) {
            let mut lower = Vec::with_capacity(depth as usize);
            let mut upper = Vec::with_capacity(depth as usize);
            let mut c = code;
            for _ in 0..depth {
                // 0: both 0, 1: both 1, 2: lower 0 and upper 2
                let (a, b) = [(0, 0), (1, 1), (0, 2)][(c % 3) as usize];
                lower.push(a);
                upper.push(b);
                c /= 3;
            }
            let (u1, u2) = (from_digits(&lower), from_digits(&upper));
            assert_eq!(cantor_psi_exact(&u1).unwrap(), cantor_psi_exact(&u2).unwrap());
            assert!(in_middle_thirds_cantor(&(u2 - u1)));
            checked += 1;
        }
        assert_eq!(checked, 6561);
        for j in 0..3i64.pow(depth) {
            let v = cantor_psi_exact(&rat(j, 3i64.pow(depth))).unwrap();
            assert!(v >= int(0) && v <= rat(1, 2));
        }
        // swapped 0/2 digits keep psi but leave the Cantor set
        let (u1, u2) = (from_digits(&[2, 0]), from_digits(&[0, 2]));
        assert_eq!(cantor_psi_exact(&u1).unwrap(), cantor_psi_exact(&u2).unwrap());
        assert!(!in_middle_thirds_cantor(&(u1 - u2)));
    }

    #[test]
    fn line_cover_respects_bound() {
        for (p, q, z) in [(1, 1, rat(1, 2)), (2, -3, rat(1, 5)), (1, 0, rat(1, 3))] {
            let c = line_cover_measure(p, q, &z, 8).unwrap();
            assert!(c.measure <= c.bound, "({p}, {q}, {z})");
        }
        // vertical line x = 1/3 meets the cover in a set of measure zero
        assert_eq!(line_cover_measure(1, 0, &rat(1, 3), 6).unwrap().measure, int(0));
        assert!(line_cover_measure(0, 1, &rat(1, 3), 6).is_err());
    }
}
