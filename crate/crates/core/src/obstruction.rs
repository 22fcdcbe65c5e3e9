//! Exact decision of the character conditions for (weak) equidistribution.
//!
//! For a nontrivial character `chi` with integer vector `k` the relevant
//! quantities are the phases `d chi(A_i v) = k^T A_i v`, `1 <= i <= d1`. The
//! weak condition asks every slice `{v : k^T A_i v = z_i for all i}` to be
//! `nu`-null; the strong (curve) conditions ask the phases to be
//! non-constant, or to have a non-vanishing derivative almost everywhere.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::dilation::{DilationFamily, TorusCoefficients};
use crate::error::{Error, Result};
use crate::lie::NilAlgebra;
use crate::linalg::{integer_kernel, primitive, rank};
use crate::measures::{cantor_curve_transform, cantor_transform, Curve, MeasureSpec};
use crate::scalar::{format_rational, Rational};

/// Default bound on `max |k_i|` when characters are enumerated.
pub const DEFAULT_HEIGHT: u32 = 20;

/// Most characters examined by one enumeration.
const ENUMERATION_BUDGET: usize = 200_000;

/// A character of the abelianized torus, `chi(y) = e(k . y)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Character(pub Vec<i64>);

impl Character {
    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn height(&self) -> u64 {
        self.0.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    /// `d chi(y) = sum_i k_i y_i`.
    pub fn dchi(&self, y: &[Rational]) -> Rational {
        self.0
            .iter()
            .zip(y)
            .map(|(k, v)| Rational::from_integer(BigInt::from(*k)) * v)
            .sum()
    }

    /// Primitive representative with positive first nonzero entry.
    pub fn canonical(&self) -> Character {
        let v: Vec<BigInt> = self.0.iter().map(|&x| BigInt::from(x)).collect();
        Character(primitive(&v).iter().map(|x| x.to_i64().unwrap_or(0)).collect())
    }

    fn order_key(&self) -> (u64, Vec<i64>) {
        (self.height(), self.0.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    Equidistributed,
    WeaklyEquidistributed,
    Obstructed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Continuous,
    Discrete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Caveat {
    /// `A_0 != 0`: a failing condition does not prove failure.
    SufficientOnly,
}

/// Status of strong equidistribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Strong {
    Certified,
    Refuted {
        reason: String,
        character: Option<Vec<i64>>,
    },
    Undecided,
}

/// A character with a `nu`-heavy slice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub character: Vec<i64>,
    /// The slice constants `z_1, ..., z_{d1}` as exact rationals.
    pub z: Vec<String>,
    /// `nu` mass of the slice.
    pub mass: String,
    /// Period in `n` of `sum_i n^i z_i mod 1` when the parameter is discrete.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_period: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub witness: Option<Witness>,
    pub caveat: Option<Caveat>,
    pub parameter: Parameter,
    pub certificate: String,
    pub strong: Strong,
    pub degenerate: bool,
    /// Height bound used when characters were enumerated.
    pub witness_search_height: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub height: u32,
    pub parameter: Parameter,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            height: DEFAULT_HEIGHT,
            parameter: Parameter::Continuous,
        }
    }
}

/// Outcome of the weak condition for one character.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakCheck {
    pub satisfied: bool,
    /// The heaviest slice when the condition fails.
    pub slice: Option<Slice>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Slice {
    pub z: Vec<Rational>,
    pub mass: Rational,
}

fn check_character(a: &TorusCoefficients, chi: &Character) -> Result<()> {
    if chi.0.len() != a.abelian_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.abelian_dim(),
            got: chi.0.len(),
        });
    }
    if chi.is_trivial() {
        return Err(Error::TrivialCharacter);
    }
    Ok(())
}

/// `k^T A_i` for `i = 1..=d1`.
fn phase_rows(a: &TorusCoefficients, chi: &Character) -> Vec<Vec<Rational>> {
    a.pulled_back(&chi.0).into_iter().skip(1).collect()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Decides whether every slice `{v : d chi(A_i v) = z_i, 1 <= i <= d1}` is
/// `nu`-null, returning the heaviest slice otherwise.
pub fn check_weak_condition(
    spec: &MeasureSpec,
    a: &TorusCoefficients,
    chi: &Character,
) -> Result<WeakCheck> {
    check_character(a, chi)?;
    let slice = heaviest_slice(spec, a, chi)?;
    Ok(WeakCheck {
        satisfied: slice.is_none(),
        slice,
    })
}

fn heaviest_slice(spec: &MeasureSpec, a: &TorusCoefficients, chi: &Character) -> Result<Option<Slice>> {
    let rows = phase_rows(a, chi);
    let heaviest = |groups: BTreeMap<Vec<Rational>, Rational>| {
        groups
            .into_iter()
            .max_by(|x, y| x.1.cmp(&y.1).then_with(|| y.0.cmp(&x.0)))
            .map(|(z, mass)| Slice { z, mass })
    };
    match spec {
        MeasureSpec::Atomic { points, weights } => {
            let mut groups: BTreeMap<Vec<Rational>, Rational> = BTreeMap::new();
            for (p, w) in points.iter().zip(weights) {
                let z: Vec<Rational> = rows.iter().map(|r| dot(r, p)).collect();
                *groups.entry(z).or_insert_with(Rational::zero) += w;
            }
            Ok(heaviest(groups))
        }
        MeasureSpec::CurvePushforward(Curve::Piecewise(c)) => {
            let mut groups: BTreeMap<Vec<Rational>, Rational> = BTreeMap::new();
            for seg in c.segments() {
                let constant = seg
                    .coeffs
                    .iter()
                    .skip(1)
                    .all(|cj| rows.iter().all(|r| dot(r, cj).is_zero()));
                if constant {
                    let z: Vec<Rational> = rows.iter().map(|r| dot(r, &seg.coeffs[0])).collect();
                    *groups.entry(z).or_insert_with(Rational::zero) += seg.length();
                }
            }
            Ok(heaviest(groups))
        }
        MeasureSpec::CurvePushforward(Curve::Cantor(c)) => {
            let killed = rows
                .iter()
                .all(|r| r[c.u_dim].is_zero() && r[c.psi_dim].is_zero());
            Ok(killed.then(|| Slice {
                z: vec![Rational::zero(); rows.len()],
                mass: Rational::one(),
            }))
        }
        MeasureSpec::Cantor1D { .. } => {
            let killed = rows.iter().all(|r| r[0].is_zero());
            Ok(killed.then(|| Slice {
                z: vec![Rational::zero(); rows.len()],
                mass: Rational::one(),
            }))
        }
        MeasureSpec::Product(factors) => product_slice(factors, &rows),
    }
}

/// Atoms of a one-dimensional factor as `(value, mass)`.
fn factor_atoms(f: &MeasureSpec) -> Result<Vec<(Rational, Rational)>> {
    match f {
        MeasureSpec::Atomic { points, weights } => Ok(points
            .iter()
            .zip(weights)
            .map(|(p, w)| (p[0].clone(), w.clone()))
            .collect()),
        MeasureSpec::CurvePushforward(Curve::Piecewise(c)) => {
            let mut atoms: BTreeMap<Rational, Rational> = BTreeMap::new();
            for seg in c.segments() {
                if seg.degree() == 0 {
                    *atoms.entry(seg.coeffs[0][0].clone()).or_insert_with(Rational::zero) +=
                        seg.length();
                }
            }
            Ok(atoms.into_iter().collect())
        }
        MeasureSpec::Cantor1D { .. } => Ok(Vec::new()),
        other => Err(Error::Undecidable(format!(
            "product factor {other:?} is not one-dimensional"
        ))),
    }
}

/// For a product measure, conditioning on the other coordinates pins any
/// coordinate that some phase row involves, so the slice is heavy only
/// through atoms of those coordinates.
fn product_slice(factors: &[MeasureSpec], rows: &[Vec<Rational>]) -> Result<Option<Slice>> {
    let support: Vec<usize> = (0..factors.len())
        .filter(|&c| rows.iter().any(|r| !r[c].is_zero()))
        .collect();
    let mut atoms = Vec::with_capacity(support.len());
    for &c in &support {
        let a = factor_atoms(&factors[c])?;
        if a.is_empty() {
            return Ok(None);
        }
        atoms.push(a);
    }
    let combos: usize = atoms.iter().map(Vec::len).product();
    let mut groups: BTreeMap<Vec<Rational>, Rational> = BTreeMap::new();
    if combos <= ENUMERATION_BUDGET {
        for idx in 0..combos {
            let mut rest = idx;
            let mut y = vec![Rational::zero(); factors.len()];
            let mut mass = Rational::one();
            for (list, &c) in atoms.iter().zip(&support) {
                let (v, w) = &list[rest % list.len()];
                rest /= list.len();
                y[c] = v.clone();
                mass *= w;
            }
            let z: Vec<Rational> = rows.iter().map(|r| dot(r, &y)).collect();
            *groups.entry(z).or_insert_with(Rational::zero) += mass;
        }
    } else {
        // Too many combinations: the heaviest atom in every coordinate still
        // gives a slice of positive mass.
        let mut y = vec![Rational::zero(); factors.len()];
        let mut mass = Rational::one();
        for (list, &c) in atoms.iter().zip(&support) {
            let (v, w) = list.iter().max_by(|x, y| x.1.cmp(&y.1)).unwrap();
            y[c] = v.clone();
            mass *= w;
        }
        groups.insert(rows.iter().map(|r| dot(r, &y)).collect(), mass);
    }
    Ok(groups
        .into_iter()
        .max_by(|x, y| x.1.cmp(&y.1).then_with(|| y.0.cmp(&x.0)))
        .map(|(z, mass)| Slice { z, mass }))
}

/// Whether some `u -> d chi(A_i phi(u))` with `1 <= i <= d1` is non-constant,
/// for a single polynomial piece.
pub fn check_analytic_condition(curve: &Curve, a: &TorusCoefficients, chi: &Character) -> Result<bool> {
    check_character(a, chi)?;
    let c = match curve {
        Curve::Piecewise(c) if c.segments().len() == 1 => c,
        Curve::Piecewise(_) => {
            return Err(Error::NotAnalytic(
                "a curve with several pieces is not analytic; use the tangent condition".into(),
            ))
        }
        Curve::Cantor(_) => {
            return Err(Error::NotAnalytic("the Cantor staircase is not analytic".into()))
        }
    };
    let rows = phase_rows(a, chi);
    let seg = &c.segments()[0];
    Ok(seg
        .coeffs
        .iter()
        .skip(1)
        .any(|cj| rows.iter().any(|r| !dot(r, cj).is_zero())))
}

/// Whether for almost every `u` some `d chi(A_i phi'(u))` is nonzero.
pub fn check_tangent_condition(curve: &Curve, a: &TorusCoefficients, chi: &Character) -> Result<bool> {
    check_character(a, chi)?;
    let rows = phase_rows(a, chi);
    match curve {
        // A derivative polynomial that is not identically zero vanishes at
        // finitely many points only.
        Curve::Piecewise(c) => Ok(c.segments().iter().all(|seg| {
            seg.derivative_coeffs()
                .iter()
                .any(|dj| rows.iter().any(|r| !dot(r, dj).is_zero()))
        })),
        Curve::Cantor(c) => Ok(rows.iter().any(|r| !r[c.u_dim].is_zero())),
    }
}

/// Canonical characters of height at most `h`, ordered by height and then
/// entries; `h` is lowered until the list fits the enumeration budget.
fn enumerate_characters(m: usize, h: u32) -> (Vec<Character>, u32) {
    let mut h = h;
    while h > 1 && (2 * h as usize + 1).checked_pow(m as u32).is_none_or(|c| c > ENUMERATION_BUDGET) {
        h -= 1;
    }
    let side = 2 * h as i64 + 1;
    let total = side.pow(m as u32);
    let mut out: Vec<Character> = (0..total)
        .filter_map(|mut idx| {
            let mut k = vec![0i64; m];
            for v in k.iter_mut().rev() {
                *v = idx % side - h as i64;
                idx /= side;
            }
            let chi = Character(k);
            (!chi.is_trivial() && chi.canonical() == chi).then_some(chi)
        })
        .collect();
    out.sort_by_key(Character::order_key);
    (out, h)
}

/// Primitive integer vectors `k` with `k . r = 0` for every row, as a basis.
fn annihilator_basis(rows: &[Vec<Rational>], m: usize) -> Vec<Character> {
    integer_kernel(rows, m)
        .iter()
        .map(|v| Character(primitive(v).iter().map(|x| x.to_i64().unwrap_or(0)).collect()))
        .collect()
}

/// Rows whose integer annihilator is the set of characters with a heavy slice
/// (everything for atoms).
fn obstruction_rows(spec: &MeasureSpec, a: &TorusCoefficients) -> Result<Vec<Vec<Vec<Rational>>>> {
    // `A_i e_c` as a functional on k, for coordinates c
    let column = |i: usize, c: usize| -> Vec<Rational> { a.a[i].iter().map(|row| row[c].clone()).collect() };
    let d1 = a.d1;
    Ok(match spec {
        MeasureSpec::Atomic { .. } => vec![Vec::new()],
        MeasureSpec::CurvePushforward(Curve::Piecewise(c)) => c
            .segments()
            .iter()
            .map(|seg| {
                let mut rows = Vec::new();
                for i in 1..=d1 {
                    for cj in seg.coeffs.iter().skip(1) {
                        rows.push(
                            a.a[i]
                                .iter()
                                .map(|row| dot(row, cj))
                                .collect::<Vec<Rational>>(),
                        );
                    }
                }
                rows
            })
            .collect(),
        MeasureSpec::CurvePushforward(Curve::Cantor(c)) => {
            let mut rows = Vec::new();
            for i in 1..=d1 {
                rows.push(column(i, c.u_dim));
                rows.push(column(i, c.psi_dim));
            }
            vec![rows]
        }
        MeasureSpec::Cantor1D { .. } => vec![(1..=d1).map(|i| column(i, 0)).collect()],
        MeasureSpec::Product(factors) => {
            let mut rows = Vec::new();
            for (c, f) in factors.iter().enumerate() {
                if factor_atoms(f)?.is_empty() {
                    for i in 1..=d1 {
                        rows.push(column(i, c));
                    }
                }
            }
            vec![rows]
        }
    })
}

/// Decides (weak) equidistribution of the dilated family of `spec`.
pub fn classify(
    spec: &MeasureSpec,
    family: &DilationFamily,
    algebra: &NilAlgebra,
    options: &ClassifyOptions,
) -> Result<Verdict> {
    spec.validate(algebra.dim())?;
    let a = family.torus_coefficients(algebra)?;
    let m = algebra.abelian_dim();
    let caveat = a.a0_nonzero.then_some(Caveat::SufficientOnly);

    if a.degenerate {
        let chi = Character({
            let mut k = vec![0; m];
            k[0] = 1;
            k
        });
        return Ok(Verdict {
            kind: VerdictKind::Obstructed,
            witness: Some(make_witness(&chi, &Slice { z: Vec::new(), mass: Rational::one() }, options.parameter)),
            caveat,
            parameter: options.parameter,
            certificate: "degenerate family: A_i = 0 for every i >= 1, so every character obstructs".into(),
            strong: Strong::Undecided,
            degenerate: true,
            witness_search_height: None,
        });
    }

    let groups = obstruction_rows(spec, &a)?;
    let kernels: Vec<Vec<Character>> = groups.iter().map(|rows| annihilator_basis(rows, m)).collect();
    let obstructed = kernels.iter().any(|k| !k.is_empty());
    let cantor_based = matches!(
        spec,
        MeasureSpec::Cantor1D { .. } | MeasureSpec::CurvePushforward(Curve::Cantor(_))
    ) || matches!(spec, MeasureSpec::Product(f) if f.iter().any(|x| matches!(x, MeasureSpec::Cantor1D { .. })));

    if obstructed {
        let (witness, height) = select_witness(spec, &a, &kernels, options)?;
        let strong = if a.a0_nonzero {
            Strong::Undecided
        } else {
            Strong::Refuted {
                reason: "the weak condition fails and A_0 = 0".into(),
                character: Some(witness.character.clone()),
            }
        };
        let ranks: Vec<String> = groups
            .iter()
            .map(|rows| (rank(rows)).to_string())
            .collect();
        return Ok(Verdict {
            kind: VerdictKind::Obstructed,
            witness: Some(witness),
            caveat,
            parameter: options.parameter,
            certificate: format!(
                "integer annihilator is nontrivial: phase ranks [{}] against torus dimension {m}",
                ranks.join(", ")
            ),
            strong,
            degenerate: false,
            witness_search_height: Some(height),
        });
    }

    let ranks: Vec<String> = groups.iter().map(|rows| rank(rows).to_string()).collect();
    let certificate = format!(
        "phase rank {} equals torus dimension {m} on every piece, so no nonzero integer vector annihilates it",
        ranks.join(", ")
    );
    if cantor_based {
        let (strong, height) = self_similar_refutation(spec, &a, options.height);
        return Ok(Verdict {
            kind: VerdictKind::WeaklyEquidistributed,
            witness: None,
            caveat,
            parameter: options.parameter,
            certificate,
            strong,
            degenerate: false,
            witness_search_height: Some(height),
        });
    }
    let kind = match spec {
        MeasureSpec::CurvePushforward(Curve::Piecewise(_)) => VerdictKind::Equidistributed,
        _ => VerdictKind::WeaklyEquidistributed,
    };
    let strong = if kind == VerdictKind::Equidistributed {
        Strong::Certified
    } else {
        Strong::Undecided
    };
    Ok(Verdict {
        kind,
        witness: None,
        caveat,
        parameter: options.parameter,
        certificate,
        strong,
        degenerate: false,
        witness_search_height: None,
    })
}

fn make_witness(chi: &Character, slice: &Slice, parameter: Parameter) -> Witness {
    let phase_period = (parameter == Parameter::Discrete).then(|| {
        slice
            .z
            .iter()
            .fold(BigInt::one(), |acc, z| acc.lcm(z.denom()))
            .to_string()
    });
    Witness {
        character: chi.0.clone(),
        z: slice.z.iter().map(format_rational).collect(),
        mass: format_rational(&slice.mass),
        phase_period,
    }
}

/// Heaviest slice over candidate characters: annihilator basis vectors and
/// every canonical character up to the height bound. Ties go to the
/// smallest character by height, then entries.
fn select_witness(
    spec: &MeasureSpec,
    a: &TorusCoefficients,
    kernels: &[Vec<Character>],
    options: &ClassifyOptions,
) -> Result<(Witness, u32)> {
    let m = a.abelian_dim();
    let (mut candidates, height) = enumerate_characters(m, options.height);
    candidates.extend(kernels.iter().flatten().map(Character::canonical));
    let mut best: Option<(Character, Slice)> = None;
    for chi in candidates {
        let Some(slice) = heaviest_slice(spec, a, &chi)? else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((bc, bs)) => {
                slice.mass > bs.mass || (slice.mass == bs.mass && chi.order_key() < bc.order_key())
            }
        };
        if better {
            best = Some((chi, slice));
        }
    }
    let (chi, slice) = best.ok_or_else(|| {
        Error::Undecidable("no witness found although the annihilator is nontrivial".into())
    })?;
    Ok((make_witness(&chi, &slice, options.parameter), height))
}

/// Looks for a character whose Fourier coefficient is the same nonzero
/// number along `t = 3^j`: then `mu_{3^j}` cannot converge to Haar measure.
/// This needs `A_0 = 0`, only `A_1` active on the character, and integral
/// frequencies on the Cantor coordinates.
fn self_similar_refutation(spec: &MeasureSpec, a: &TorusCoefficients, height: u32) -> (Strong, u32) {
    let m = a.abelian_dim();
    let (candidates, used) = enumerate_characters(m, height.min(6));
    for chi in candidates {
        let rows = a.pulled_back(&chi.0);
        if rows[0].iter().any(|v| !v.is_zero()) || rows.iter().skip(2).any(|r| r.iter().any(|v| !v.is_zero())) {
            continue;
        }
        let Some(row) = rows.get(1) else { continue };
        let integral = |v: &Rational| v.is_integer();
        let value = match spec {
            MeasureSpec::Cantor1D { .. } if integral(&row[0]) => {
                cantor_transform(row[0].to_integer().to_f64().unwrap_or(0.0))
            }
            MeasureSpec::CurvePushforward(Curve::Cantor(c)) if integral(&row[c.u_dim]) && integral(&row[c.psi_dim]) => {
                let others_zero = (0..c.dim).all(|i| i == c.u_dim || i == c.psi_dim || row[i].is_zero());
                if !others_zero {
                    continue;
                }
                cantor_curve_transform(
                    row[c.u_dim].to_integer().to_f64().unwrap_or(0.0),
                    row[c.psi_dim].to_integer().to_f64().unwrap_or(0.0),
                )
            }
            MeasureSpec::Product(factors) => {
                let mut acc = Complex64::new(1.0, 0.0);
                let mut ok = true;
                for (f, v) in factors.iter().zip(row) {
                    if v.is_zero() {
                        continue;
                    }
                    if !matches!(f, MeasureSpec::Cantor1D { .. }) || !integral(v) {
                        ok = false;
                        break;
                    }
                    acc *= cantor_transform(v.to_integer().to_f64().unwrap_or(0.0));
                }
                if !ok {
                    continue;
                }
                acc
            }
            _ => continue,
        };
        if value.norm() > 1e-6 && row.iter().any(|v| !v.is_zero()) {
            return (
                Strong::Refuted {
                    reason: format!(
                        "the Fourier coefficient is constant along t = 3^j with modulus {:.12}",
                        value.norm()
                    ),
                    character: Some(chi.0),
                },
                used,
            );
        }
    }
    (Strong::Undecided, used)
}

/// Independent recheck of a witness: the slice at the witness constants has
/// positive mass.
pub fn verify_witness(spec: &MeasureSpec, a: &TorusCoefficients, witness: &Witness) -> Result<bool> {
    let chi = Character(witness.character.clone());
    check_character(a, &chi)?;
    let z: Vec<Rational> = witness
        .z
        .iter()
        .map(|s| crate::scalar::parse_rational(s))
        .collect::<Result<_>>()?;
    let rows = phase_rows(a, &chi);
    let mass: Rational = match spec {
        MeasureSpec::Atomic { points, weights } => points
            .iter()
            .zip(weights)
            .filter(|(p, _)| rows.iter().zip(&z).all(|(r, zi)| dot(r, p) == *zi))
            .map(|(_, w)| w.clone())
            .sum(),
        MeasureSpec::CurvePushforward(Curve::Piecewise(c)) => c
            .segments()
            .iter()
            .filter(|seg| {
                // the phase polynomial on the piece equals z identically
                seg.coeffs.iter().enumerate().all(|(j, cj)| {
                    rows.iter()
                        .zip(&z)
                        .all(|(r, zi)| dot(r, cj) == if j == 0 { zi.clone() } else { Rational::zero() })
                })
            })
            .map(|seg| seg.length())
            .sum(),
        _ => heaviest_slice(spec, a, &chi)?
            .filter(|s| s.z == z)
            .map_or_else(Rational::zero, |s| s.mass),
    };
    Ok(mass.is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{CantorCurve, PiecewiseCurve};
    use crate::scalar::{int, rat};

    fn torus2() -> (NilAlgebra, DilationFamily, TorusCoefficients) {
        let alg = NilAlgebra::abelian(2);
        let fam = DilationFamily::multiplication(2);
        let a = fam.torus_coefficients(&alg).unwrap();
        (alg, fam, a)
    }

    fn curve(coeffs: Vec<Vec<Rational>>) -> Curve {
        Curve::Piecewise(PiecewiseCurve::polynomial(coeffs).unwrap())
    }

    #[test]
    fn atoms_always_obstruct() {
        let (_, _, a) = torus2();
        let spec = MeasureSpec::uniform_atoms(vec![vec![rat(1, 2), rat(1, 2)]]);
        let r = check_weak_condition(&spec, &a, &Character(vec![1, 0])).unwrap();
        assert!(!r.satisfied);
        assert_eq!(r.slice.unwrap().z, vec![rat(1, 2)]);
    }

    #[test]
    fn constant_coordinate_obstructs() {
        let (alg, fam, a) = torus2();
        let phi = curve(vec![vec![int(0), rat(1, 2)], vec![int(1), int(0)]]);
        let spec = MeasureSpec::CurvePushforward(phi);
        let r = check_weak_condition(&spec, &a, &Character(vec![0, 1])).unwrap();
        assert_eq!(r.slice.unwrap().z, vec![rat(1, 2)]);
        let v = classify(&spec, &fam, &alg, &ClassifyOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Obstructed);
        let w = v.witness.unwrap();
        assert_eq!(w.character, vec![0, 1]);
        assert_eq!(w.z, vec!["1/2".to_string()]);
        assert!(verify_witness(&spec, &a, &w).unwrap());
    }

    #[test]
    fn parabola_is_equidistributed() {
        let (alg, fam, a) = torus2();
        let phi = curve(vec![vec![int(0), int(0)], vec![int(1), int(0)], vec![int(0), int(1)]]);
        for k in [vec![1, 0], vec![0, 1], vec![3, -2]] {
            assert!(check_analytic_condition(&phi, &a, &Character(k.clone())).unwrap());
            assert!(check_tangent_condition(&phi, &a, &Character(k)).unwrap());
        }
        let v = classify(&MeasureSpec::CurvePushforward(phi), &fam, &alg, &ClassifyOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Equidistributed);
        assert_eq!(v.strong, Strong::Certified);
        assert!(v.certificate.contains("rank 2"));
    }

    #[test]
    fn rational_slope_line_is_obstructed_irrational_free() {
        let (_, _, a) = torus2();
        // phi(u) = (u, alpha u): p + q alpha = 0 has an integer solution
        let phi = curve(vec![vec![int(0), int(0)], vec![int(1), rat(2, 3)]]);
        assert!(!check_analytic_condition(&phi, &a, &Character(vec![2, -3])).unwrap());
        assert!(check_analytic_condition(&phi, &a, &Character(vec![1, 1])).unwrap());
        let diag = curve(vec![vec![int(0), int(0)], vec![int(1), int(1)]]);
        assert!(!check_tangent_condition(&diag, &a, &Character(vec![1, -1])).unwrap());
        let constant = curve(vec![vec![rat(1, 3), rat(1, 5)]]);
        assert!(!check_analytic_condition(&constant, &a, &Character(vec![1, 0])).unwrap());
    }

    #[test]
    fn cantor_inputs_are_weak_only() {
        let alg = NilAlgebra::abelian(1);
        let fam = DilationFamily::multiplication(1);
        let v = classify(&MeasureSpec::Cantor1D { depth: 12 }, &fam, &alg, &ClassifyOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::WeaklyEquidistributed);
        assert!(matches!(v.strong, Strong::Refuted { .. }));

        let (alg, fam, a) = torus2();
        let cc = Curve::Cantor(CantorCurve { dim: 2, u_dim: 0, psi_dim: 1, depth: 12 });
        assert!(!check_tangent_condition(&cc, &a, &Character(vec![0, 1])).unwrap());
        assert!(check_tangent_condition(&cc, &a, &Character(vec![1, 0])).unwrap());
        assert!(check_analytic_condition(&cc, &a, &Character(vec![1, 0])).is_err());
        let v = classify(&MeasureSpec::CurvePushforward(cc), &fam, &alg, &ClassifyOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::WeaklyEquidistributed);
        assert!(matches!(v.strong, Strong::Refuted { .. }));
    }

    #[test]
    fn degenerate_and_trivial_inputs() {
        let alg = NilAlgebra::abelian(2);
        let fam = DilationFamily::scalar_power(2, 0);
        let phi = curve(vec![vec![int(0), int(0)], vec![int(1), int(0)], vec![int(0), int(1)]]);
        let v = classify(&MeasureSpec::CurvePushforward(phi.clone()), &fam, &alg, &ClassifyOptions::default()).unwrap();
        assert!(v.degenerate);
        assert_eq!(v.kind, VerdictKind::Obstructed);
        let (_, _, a) = torus2();
        assert_eq!(
            check_tangent_condition(&phi, &a, &Character(vec![0, 0])),
            Err(Error::TrivialCharacter)
        );
    }

    #[test]
    fn shifted_family_carries_caveat() {
        let alg = NilAlgebra::abelian(2);
        let fam = DilationFamily::new(
            2,
            vec![
                vec![vec![int(1), int(0)], vec![int(0), int(0)]],
                vec![vec![int(0), int(0)], vec![int(1), int(0)]],
            ],
        )
        .unwrap();
        let spec = MeasureSpec::uniform_atoms(vec![vec![rat(1, 3), int(0)]]);
        let v = classify(&spec, &fam, &alg, &ClassifyOptions::default()).unwrap();
        assert_eq!(v.caveat, Some(Caveat::SufficientOnly));
        assert_eq!(v.strong, Strong::Undecided);
    }

    #[test]
    fn discrete_witness_reports_period() {
        let (alg, fam, _) = torus2();
        let phi = curve(vec![vec![int(0), rat(2, 7)], vec![int(1), int(0)]]);
        let opts = ClassifyOptions {
            parameter: Parameter::Discrete,
            ..ClassifyOptions::default()
        };
        let v = classify(&MeasureSpec::CurvePushforward(phi), &fam, &alg, &opts).unwrap();
        assert_eq!(v.witness.unwrap().phase_period.as_deref(), Some("7"));
    }
}
