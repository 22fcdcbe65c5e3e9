//! Curves, measure specifications and the dilated family
//! `f -> integral of f(exp(rho_t y) x_0) d nu(y)` on the nilmanifold.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::counterexamples::cantor_psi;
use crate::dilation::{DilationFamily, TorusCoefficients};
use crate::error::{Error, Result};
use crate::lattice::{Nilmanifold, NilmanifoldPoint};
use crate::lie::{AlgebraVector, GroupElement};
use crate::parallel::ordered_sum;
use crate::scalar::{rational_to_f64, Rational, Scalar};

pub const MAX_CURVE_DEGREE: usize = 12;

/// Largest number of integrand evaluations a single integration may use.
pub const NODE_BUDGET: u64 = 50_000_000;

/// Ternary digits drawn per Cantor sample.
const SAMPLE_DIGITS: usize = 40;

/// One polynomial piece `u -> sum_j c_j u^j` on `[start, end)`, written in
/// the global variable `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub start: Rational,
    pub end: Rational,
    /// `coeffs[j]` is the vector multiplying `u^j`.
    pub coeffs: Vec<Vec<Rational>>,
}

impl Segment {
    pub fn length(&self) -> Rational {
        &self.end - &self.start
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.iter().any(|v| !v.is_zero()))
            .unwrap_or(0)
    }

    pub fn eval_exact(&self, u: &Rational) -> Vec<Rational> {
        let dim = self.coeffs.first().map_or(0, Vec::len);
        let mut out = vec![Rational::zero(); dim];
        for c in self.coeffs.iter().rev() {
            for (o, v) in out.iter_mut().zip(c) {
                *o = &*o * u + v;
            }
        }
        out
    }

    /// Coefficients of the derivative, `(j + 1) c_{j+1}`.
    pub fn derivative_coeffs(&self) -> Vec<Vec<Rational>> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c.iter().map(|v| v * Rational::from_i64(j as i64)).collect())
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct PiecewiseCurve {
    dim: usize,
    segments: Vec<Segment>,
    approx: Vec<(f64, f64, Vec<Vec<f64>>)>,
}

impl PartialEq for PiecewiseCurve {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.segments == other.segments
    }
}

impl PiecewiseCurve {
    pub fn new(dim: usize, segments: Vec<Segment>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidCurve(msg));
        if segments.is_empty() {
            return bad("a curve needs at least one segment".into());
        }
        if !segments[0].start.is_zero() || !segments[segments.len() - 1].end.is_one() {
            return bad("segments must cover (0, 1)".into());
        }
        for (s, seg) in segments.iter().enumerate() {
            if seg.start >= seg.end {
                return bad(format!("segment {} has empty interval", s + 1));
            }
            if s > 0 && segments[s - 1].end != seg.start {
                return bad(format!("segment {} does not start where segment {} ends", s + 1, s));
            }
            if seg.coeffs.is_empty() {
                return bad(format!("segment {} has no coefficients", s + 1));
            }
            if seg.coeffs.len() > MAX_CURVE_DEGREE + 1 {
                return bad(format!(
                    "segment {} has degree above {MAX_CURVE_DEGREE}",
                    s + 1
                ));
            }
            if let Some(c) = seg.coeffs.iter().find(|c| c.len() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
        }
        let approx = segments
            .iter()
            .map(|seg| {
                (
                    rational_to_f64(&seg.start),
                    rational_to_f64(&seg.end),
                    seg.coeffs
                        .iter()
                        .map(|c| c.iter().map(rational_to_f64).collect())
                        .collect(),
                )
            })
            .collect();
        Ok(PiecewiseCurve {
            dim,
            segments,
            approx,
        })
    }

    /// A single polynomial piece on `(0, 1)`.
    pub fn polynomial(coeffs: Vec<Vec<Rational>>) -> Result<Self> {
        let dim = coeffs.first().map_or(0, Vec::len);
        Self::new(
            dim,
            vec![Segment {
                start: Rational::zero(),
                end: Rational::one(),
                coeffs,
            }],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn degree(&self) -> usize {
        self.segments.iter().map(Segment::degree).max().unwrap_or(0)
    }

    fn segment_index(&self, u: f64) -> usize {
        self.approx
            .iter()
            .position(|(_, end, _)| u < *end)
            .unwrap_or(self.approx.len() - 1)
    }

    fn eval_segment(&self, s: usize, u: f64) -> Vec<f64> {
        let coeffs = &self.approx[s].2;
        let mut out = vec![0.0; self.dim];
        for c in coeffs.iter().rev() {
            for (o, v) in out.iter_mut().zip(c) {
                *o = *o * u + v;
            }
        }
        out
    }

    pub fn eval(&self, u: f64) -> Vec<f64> {
        self.eval_segment(self.segment_index(u), u)
    }

    pub fn eval_exact(&self, u: &Rational) -> Vec<Rational> {
        let s = self
            .segments
            .iter()
            .position(|seg| *u < seg.end)
            .unwrap_or(self.segments.len() - 1);
        self.segments[s].eval_exact(u)
    }

    pub fn derivative(&self, u: f64) -> Vec<f64> {
        let s = self.segment_index(u);
        let coeffs = &self.approx[s].2;
        let mut out = vec![0.0; self.dim];
        for (j, c) in coeffs.iter().enumerate().skip(1).rev() {
            for (o, v) in out.iter_mut().zip(c) {
                *o = *o * u + v * j as f64;
            }
        }
        out
    }

    /// Midpoint cells per segment as `(segment, first node, start, width,
    /// count)`: each segment gets a share of `panels` proportional to its
    /// length, and at least one node.
    fn nodes(&self, panels: usize) -> Vec<(usize, usize, f64, f64, usize)> {
        let mut out = Vec::with_capacity(self.approx.len());
        let mut offset = 0;
        for (s, (a, b, _)) in self.approx.iter().enumerate() {
            let count = ((panels as f64 * (b - a)).round() as usize).max(1);
            out.push((s, offset, *a, (b - a) / count as f64, count));
            offset += count;
        }
        out
    }

    /// Composite midpoint rule for `g(phi(u))` over `(0, 1)`.
    fn quadrature<G>(&self, panels: usize, g: G) -> Complex64
    where
        G: Fn(&[f64]) -> Complex64 + Sync,
    {
        let nodes = self.nodes(panels);
        let total = nodes.last().map_or(0, |n| n.1 + n.4);
        ordered_sum(total, |i| {
            let k = nodes.partition_point(|n| n.1 <= i) - 1;
            let (s, offset, a, h, _) = nodes[k];
            let u = a + (i - offset) as f64 * h + 0.5 * h;
            g(&self.eval_segment(s, u)) * h
        })
    }
}

/// `u -> psi(u) e_{psi_dim} + u e_{u_dim}`, with `psi` the Cantor staircase.
#[derive(Clone, Debug, PartialEq)]
pub struct CantorCurve {
    pub dim: usize,
    pub u_dim: usize,
    pub psi_dim: usize,
    pub depth: u32,
}

impl CantorCurve {
    fn validate(&self) -> Result<()> {
        if self.u_dim >= self.dim || self.psi_dim >= self.dim || self.u_dim == self.psi_dim {
            return Err(Error::InvalidCurve(format!(
                "Cantor curve needs two distinct coordinates below {}",
                self.dim
            )));
        }
        if self.depth == 0 || self.depth > 30 {
            return Err(Error::InvalidCurve("Cantor depth must be in 1..=30".into()));
        }
        Ok(())
    }

    pub fn eval(&self, u: f64) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        y[self.u_dim] = u;
        y[self.psi_dim] = cantor_psi(u, 40);
        y
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Curve {
    Piecewise(PiecewiseCurve),
    Cantor(CantorCurve),
}

impl Curve {
    pub fn dim(&self) -> usize {
        match self {
            Curve::Piecewise(c) => c.dim(),
            Curve::Cantor(c) => c.dim,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Curve::Piecewise(c) => c.degree(),
            Curve::Cantor(_) => 1,
        }
    }

    pub fn eval(&self, u: f64) -> Vec<f64> {
        match self {
            Curve::Piecewise(c) => c.eval(u),
            Curve::Cantor(c) => c.eval(u),
        }
    }

    /// Derivative at `u`, defined almost everywhere. The staircase is locally
    /// constant off a null set, so only the `u` coordinate moves.
    pub fn derivative(&self, u: f64) -> Result<Vec<f64>> {
        match self {
            Curve::Piecewise(c) => Ok(c.derivative(u)),
            Curve::Cantor(c) => {
                let mut d = vec![0.0; c.dim];
                d[c.u_dim] = 1.0;
                Ok(d)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureSpec {
    Atomic {
        points: Vec<Vec<Rational>>,
        weights: Vec<Rational>,
    },
    CurvePushforward(Curve),
    /// Independent one-dimensional factors, one per coordinate.
    Product(Vec<MeasureSpec>),
    /// The Cantor staircase measure on the line.
    Cantor1D { depth: u32 },
}

impl MeasureSpec {
    /// Equal weights on the given points.
    pub fn uniform_atoms(points: Vec<Vec<Rational>>) -> Self {
        let w = Rational::new(1.into(), (points.len() as i64).into());
        let weights = vec![w; points.len()];
        MeasureSpec::Atomic { points, weights }
    }

    pub fn dim(&self) -> usize {
        match self {
            MeasureSpec::Atomic { points, .. } => points.first().map_or(0, Vec::len),
            MeasureSpec::CurvePushforward(c) => c.dim(),
            MeasureSpec::Product(f) => f.len(),
            MeasureSpec::Cantor1D { .. } => 1,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            });
        }
        match self {
            MeasureSpec::Atomic { points, weights } => {
                if points.is_empty() || points.len() != weights.len() {
                    return Err(Error::InvalidMeasure(
                        "atoms need one positive weight per point".into(),
                    ));
                }
                if points.iter().any(|p| p.len() != dim) {
                    return Err(Error::InvalidMeasure("atoms have mixed dimensions".into()));
                }
                if weights.iter().any(|w| !w.is_positive()) {
                    return Err(Error::InvalidMeasure("weights must be positive".into()));
                }
                let total: Rational = weights.iter().sum();
                if !total.is_one() {
                    return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
                }
            }
            MeasureSpec::CurvePushforward(Curve::Cantor(c)) => c.validate()?,
            MeasureSpec::CurvePushforward(Curve::Piecewise(_)) => {}
            MeasureSpec::Product(factors) => {
                for f in factors {
                    if matches!(f, MeasureSpec::Product(_)) {
                        return Err(Error::InvalidMeasure("products cannot be nested".into()));
                    }
                    f.validate(1)?;
                }
            }
            MeasureSpec::Cantor1D { depth } => {
                if *depth == 0 || *depth > 30 {
                    return Err(Error::InvalidMeasure("Cantor depth must be in 1..=30".into()));
                }
            }
        }
        Ok(())
    }

    fn curve_degree(&self) -> Option<usize> {
        match self {
            MeasureSpec::CurvePushforward(Curve::Piecewise(c)) => Some(c.degree()),
            MeasureSpec::Product(f) => f.iter().filter_map(MeasureSpec::curve_degree).max(),
            _ => None,
        }
    }

    /// One draw of `y ~ nu`.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            MeasureSpec::Atomic { points, weights } => {
                let r: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = points.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += rational_to_f64(w);
                    if r < acc {
                        pick = i;
                        break;
                    }
                }
                points[pick].iter().map(rational_to_f64).collect()
            }
            MeasureSpec::CurvePushforward(Curve::Piecewise(c)) => c.eval(rng.gen()),
            MeasureSpec::CurvePushforward(Curve::Cantor(c)) => {
                let (u, psi) = random_cantor_digits(rng);
                let mut y = vec![0.0; c.dim];
                y[c.u_dim] = u;
                y[c.psi_dim] = psi;
                y
            }
            MeasureSpec::Product(factors) => factors.iter().map(|f| f.draw(rng)[0]).collect(),
            MeasureSpec::Cantor1D { .. } => vec![random_cantor_digits(rng).1],
        }
    }

    /// Weighted nodes `(y, weight)` for a one-dimensional factor.
    fn factor_nodes(&self, panels: usize) -> Vec<(f64, f64)> {
        match self {
            MeasureSpec::Atomic { points, weights } => points
                .iter()
                .zip(weights)
                .map(|(p, w)| (rational_to_f64(&p[0]), rational_to_f64(w)))
                .collect(),
            MeasureSpec::CurvePushforward(Curve::Piecewise(c)) => {
                let mut out = Vec::new();
                for (s, _, a, h, count) in c.nodes(panels) {
                    for i in 0..count {
                        let u = a + (i as f64 + 0.5) * h;
                        out.push((c.eval_segment(s, u)[0], h));
                    }
                }
                out
            }
            MeasureSpec::Cantor1D { depth } => {
                let resolved = (*depth).min((panels.max(2) as f64).log2().floor() as u32).max(1);
                cantor_prefix_nodes(resolved)
            }
            _ => Vec::new(),
        }
    }
}

fn random_cantor_digits(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut u = 0.0;
    let mut psi = 0.0;
    let mut scale = 1.0;
    for _ in 0..SAMPLE_DIGITS {
        scale /= 3.0;
        let d: u8 = rng.gen_range(0..3);
        u += d as f64 * scale;
        if d == 1 {
            psi += scale;
        }
    }
    (u, psi)
}

/// The `2^depth` distinct values of `psi` on depth-`depth` ternary cells,
/// each placed at the mean of `psi` over its cells, with total weight.
fn cantor_prefix_nodes(depth: u32) -> Vec<(f64, f64)> {
    let cell = 3f64.powi(-(depth as i32));
    (0..1usize << depth)
        .map(|mask| {
            let mut s = 0.0;
            let mut ones = 0;
            let mut scale = 1.0;
            for n in 0..depth {
                scale /= 3.0;
                if mask >> n & 1 == 1 {
                    s += scale;
                    ones += 1;
                }
            }
            let w = (1.0 / 3.0f64).powi(ones) * (2.0 / 3.0f64).powi(depth as i32 - ones);
            (s + cell / 6.0, w)
        })
        .collect()
}

/// `hat nu(w) = prod_{n >= 1} (2 + e(w / 3^n)) / 3` for the Cantor staircase
/// measure `nu`, where `e(x) = exp(2 pi i x)`.
pub fn cantor_transform(w: f64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut x = w;
    loop {
        x /= 3.0;
        if x.abs() < 1e-18 {
            return acc;
        }
        acc *= (Complex64::new(2.0, 0.0) + unit(x)) / 3.0;
    }
}

/// `integral_0^1 e(a u + b psi(u)) du`
/// `= prod_{n >= 1} (1 + e((a + b) / 3^n) + e(2a / 3^n)) / 3`.
pub fn cantor_curve_transform(a: f64, b: f64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut scale = 1.0;
    loop {
        scale *= 3.0;
        if (a.abs() + b.abs()) / scale < 1e-18 {
            return acc;
        }
        let term = Complex64::new(1.0, 0.0) + unit((a + b) / scale) + unit(2.0 * a / scale);
        acc *= term / 3.0;
    }
}

pub(crate) fn unit(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * x.rem_euclid(1.0))
}

/// A measure specification together with the space, the dilation family and
/// the base point `x_0`.
#[derive(Clone, Debug)]
pub struct Model {
    space: Nilmanifold,
    family: DilationFamily,
    spec: MeasureSpec,
    base: Vec<Rational>,
    base_group: GroupElement<f64>,
    torus: TorusCoefficients,
}

impl Model {
    /// `base` holds coordinates of the second kind of `x_0`; it is reduced
    /// into the unit cube.
    pub fn new(
        space: Nilmanifold,
        family: DilationFamily,
        spec: MeasureSpec,
        base: Vec<Rational>,
    ) -> Result<Self> {
        let n = space.dim();
        if base.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: base.len(),
            });
        }
        spec.validate(n)?;
        let torus = family.torus_coefficients(space.algebra())?;
        let g = space.from_second_kind(&base);
        let (rep, _) = space.reduce_mod_lattice(&g);
        let base = rep.second_kind;
        let base_group = space.from_second_kind(&base).to_f64();
        Ok(Model {
            space,
            family,
            spec,
            base,
            base_group,
            torus,
        })
    }

    pub fn space(&self) -> &Nilmanifold {
        &self.space
    }

    pub fn family(&self) -> &DilationFamily {
        &self.family
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn base(&self) -> &[Rational] {
        &self.base
    }

    pub fn torus(&self) -> &TorusCoefficients {
        &self.torus
    }

    pub fn at(&self, t: f64) -> DilatedMeasure<'_> {
        DilatedMeasure { model: self, t }
    }

    /// Handles for every `t` of a nonempty increasing grid.
    pub fn cesaro_family(&self, grid: &[f64]) -> Result<Vec<DilatedMeasure<'_>>> {
        if grid.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("grid has a non-finite value".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("grid is not strictly increasing".into()));
        }
        Ok(grid.iter().map(|&t| self.at(t)).collect())
    }

    /// `ceil(64 (1 + |t|)^{d_max} max(deg, 1))` for curve-based measures,
    /// where `d_max` is the top power of `t` and `deg` the curve degree; zero
    /// when the measure is integrated without quadrature in `u`.
    pub fn oscillation_guard(&self, t: f64) -> usize {
        match self.spec.curve_degree() {
            None => 0,
            Some(deg) => {
                let d = self.family.top_degree() as i32;
                (64.0 * (1.0 + t.abs()).powi(d) * deg.max(1) as f64).ceil() as usize
            }
        }
    }
}

/// Integrands accepted by [`DilatedMeasure::integrate`].
pub enum Integrand<'f> {
    /// `chi o q` for the character with integer vector `k` on the torus.
    Character(Vec<i64>),
    Function(&'f (dyn Fn(&NilmanifoldPoint<f64>) -> Complex64 + Sync)),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Integration {
    pub value: Complex64,
    pub panels: usize,
    pub guard: usize,
    pub warning: Option<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct DilatedMeasure<'a> {
    pub model: &'a Model,
    pub t: f64,
}

impl<'a> DilatedMeasure<'a> {
    /// `exp(rho_t y) x_0` reduced into the unit cube.
    pub fn point(&self, y: &[f64]) -> NilmanifoldPoint<f64> {
        let space = &self.model.space;
        let v = self.model.family.apply_f64(self.t, y);
        let prod = space.algebra().group_mul(
            &GroupElement::exp(AlgebraVector(v)),
            &self.model.base_group,
        );
        let prod = prod.expect("dimensions checked when the model was built");
        space.reduce_mod_lattice(&prod).0
    }

    /// `w_c = sum_i t^i (k^T A_i)_c`, so that `d chi(dq(rho_t y)) = w . y`.
    pub fn frequencies(&self, k: &[i64]) -> Vec<f64> {
        let rows = self.model.torus.pulled_back(k);
        let n = self.model.space.dim();
        let mut w = vec![0.0; n];
        for row in rows.iter().rev() {
            for (wc, v) in w.iter_mut().zip(row) {
                *wc = *wc * self.t + rational_to_f64(v);
            }
        }
        w
    }

    /// `d chi(q(x_0))`, reduced mod 1.
    pub fn base_phase(&self, k: &[i64]) -> f64 {
        let m = self.model.space.algebra().abelian_dim();
        let exact: Rational = k
            .iter()
            .zip(&self.model.base[..m])
            .map(|(ki, b)| Rational::from_i64(*ki) * b)
            .sum();
        rational_to_f64(&(&exact - exact.floor()))
    }

    pub fn integrate(&self, f: &Integrand<'_>, panels: usize) -> Result<Integration> {
        if panels == 0 {
            return Err(Error::NonPositivePanels);
        }
        let guard = self.model.oscillation_guard(self.t);
        let value = match f {
            Integrand::Character(k) => self.integrate_character(k, panels)?,
            Integrand::Function(g) => self.integrate_function(*g, panels)?,
        };
        let warning = (panels < guard).then(|| {
            format!("panel count {panels} is below the oscillation guard {guard} at t = {}", self.t)
        });
        Ok(Integration {
            value,
            panels,
            guard,
            warning,
        })
    }

    fn integrate_character(&self, k: &[i64], panels: usize) -> Result<Complex64> {
        let m = self.model.space.algebra().abelian_dim();
        if k.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: k.len(),
            });
        }
        let w = self.frequencies(k);
        let phase0 = unit(self.base_phase(k));
        let body = match &self.model.spec {
            MeasureSpec::Atomic { points, weights } => points
                .iter()
                .zip(weights)
                .map(|(p, wt)| {
                    let x: f64 = p.iter().zip(&w).map(|(a, b)| rational_to_f64(a) * b).sum();
                    unit(x) * rational_to_f64(wt)
                })
                .sum(),
            MeasureSpec::CurvePushforward(Curve::Piecewise(c)) => {
                c.quadrature(panels, |y| unit(y.iter().zip(&w).map(|(a, b)| a * b).sum()))
            }
            MeasureSpec::CurvePushforward(Curve::Cantor(c)) => {
                cantor_curve_transform(w[c.u_dim], w[c.psi_dim])
            }
            MeasureSpec::Product(factors) => factors
                .iter()
                .zip(&w)
                .map(|(f, &wc)| factor_transform(f, wc, panels))
                .product(),
            MeasureSpec::Cantor1D { .. } => cantor_transform(w[0]),
        };
        Ok(phase0 * body)
    }

    fn integrate_function(
        &self,
        g: &(dyn Fn(&NilmanifoldPoint<f64>) -> Complex64 + Sync),
        panels: usize,
    ) -> Result<Complex64> {
        let eval = |y: &[f64]| g(&self.point(y));
        Ok(match &self.model.spec {
            MeasureSpec::Atomic { points, weights } => points
                .iter()
                .zip(weights)
                .map(|(p, wt)| {
                    let y: Vec<f64> = p.iter().map(rational_to_f64).collect();
                    eval(&y) * rational_to_f64(wt)
                })
                .sum(),
            MeasureSpec::CurvePushforward(Curve::Piecewise(c)) => {
                check_budget(panels as u64)?;
                c.quadrature(panels, eval)
            }
            MeasureSpec::CurvePushforward(Curve::Cantor(c)) => {
                let cells = 3u64.pow(c.depth);
                check_budget(cells)?;
                let cell = 1.0 / cells as f64;
                ordered_sum(cells as usize, |idx| {
                    let (u, psi) = prefix_values(idx, c.depth);
                    let mut y = vec![0.0; c.dim];
                    y[c.u_dim] = u + cell / 2.0;
                    y[c.psi_dim] = psi + cell / 6.0;
                    eval(&y) * cell
                })
            }
            MeasureSpec::Cantor1D { depth } => {
                let nodes = cantor_prefix_nodes(*depth);
                ordered_sum(nodes.len(), |i| eval(&[nodes[i].0]) * nodes[i].1)
            }
            MeasureSpec::Product(factors) => {
                let lists: Vec<Vec<(f64, f64)>> =
                    factors.iter().map(|f| f.factor_nodes(panels)).collect();
                let total = lists
                    .iter()
                    .try_fold(1u64, |acc, l| acc.checked_mul(l.len() as u64))
                    .unwrap_or(u64::MAX);
                check_budget(total)?;
                ordered_sum(total as usize, |idx| {
                    let mut rest = idx;
                    let mut y = vec![0.0; lists.len()];
                    let mut weight = 1.0;
                    for (c, l) in lists.iter().enumerate().rev() {
                        let (v, w) = l[rest % l.len()];
                        rest /= l.len();
                        y[c] = v;
                        weight *= w;
                    }
                    eval(&y) * weight
                })
            }
        })
    }

    /// `count` independent draws, reproducible from `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<NilmanifoldPoint<f64>>> {
        if count == 0 {
            return Err(Error::Domain("sample count must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ys: Vec<Vec<f64>> = (0..count).map(|_| self.model.spec.draw(&mut rng)).collect();
        Ok(ys.par_iter().map(|y| self.point(y)).collect())
    }
}

fn check_budget(nodes: u64) -> Result<()> {
    if nodes > NODE_BUDGET {
        return Err(Error::BudgetExceeded {
            estimated: nodes,
            budget: NODE_BUDGET,
        });
    }
    Ok(())
}

/// `(u, psi(u))` at the left end of the ternary cell with index `idx`.
fn prefix_values(idx: usize, depth: u32) -> (f64, f64) {
    let mut rest = idx;
    let mut u = 0.0;
    let mut psi = 0.0;
    let mut scale = 3f64.powi(-(depth as i32));
    for _ in 0..depth {
        let d = rest % 3;
        rest /= 3;
        u += d as f64 * scale;
        if d == 1 {
            psi += scale;
        }
        scale *= 3.0;
    }
    (u, psi)
}

/// `integral e(w y) d nu_c(y)` for a one-dimensional factor.
fn factor_transform(f: &MeasureSpec, w: f64, panels: usize) -> Complex64 {
    match f {
        MeasureSpec::Atomic { points, weights } => points
            .iter()
            .zip(weights)
            .map(|(p, wt)| unit(rational_to_f64(&p[0]) * w) * rational_to_f64(wt))
            .sum(),
        MeasureSpec::CurvePushforward(Curve::Piecewise(c)) => {
            c.quadrature(panels, |y| unit(y[0] * w))
        }
        MeasureSpec::Cantor1D { .. } => cantor_transform(w),
        _ => Complex64::new(f64::NAN, f64::NAN),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::NilAlgebra;
    use crate::scalar::{int, rat};

    fn circle() -> Nilmanifold {
        Nilmanifold::integer_points(NilAlgebra::abelian(1)).unwrap()
    }

    fn line_model() -> Model {
        let curve = PiecewiseCurve::polynomial(vec![vec![int(0)], vec![int(1)]]).unwrap();
        Model::new(
            circle(),
            DilationFamily::multiplication(1),
            MeasureSpec::CurvePushforward(Curve::Piecewise(curve)),
            vec![int(0)],
        )
        .unwrap()
    }

    #[test]
    fn curve_validation() {
        let seg = |a: Rational, b: Rational| Segment {
            start: a,
            end: b,
            coeffs: vec![vec![int(0)]],
        };
        assert!(PiecewiseCurve::new(1, vec![seg(int(0), rat(1, 2))]).is_err());
        assert!(PiecewiseCurve::new(1, vec![seg(int(0), rat(1, 2)), seg(rat(2, 3), int(1))]).is_err());
        assert!(PiecewiseCurve::new(1, vec![seg(int(0), rat(1, 2)), seg(rat(1, 2), int(1))]).is_ok());
        let too_high = PiecewiseCurve::polynomial(vec![vec![int(1)]; 14]);
        assert!(matches!(too_high, Err(Error::InvalidCurve(_))));
    }

    #[test]
    fn integer_frequencies_on_a_line_vanish() {
        let model = line_model();
        for n in 1..5 {
            let r = model
                .at(n as f64)
                .integrate(&Integrand::Character(vec![1]), 100)
                .unwrap();
            assert!(r.value.norm() < 1e-12);
            assert_eq!(r.guard, 64 * (1 + n));
            assert!(r.warning.is_some());
        }
        let r = model.at(2.0).integrate(&Integrand::Character(vec![1]), 1000).unwrap();
        assert!(r.warning.is_none());
    }

    #[test]
    fn atoms_integrate_exactly() {
        let model = Model::new(
            circle(),
            DilationFamily::multiplication(1),
            MeasureSpec::uniform_atoms(vec![vec![rat(1, 2)]]),
            vec![int(0)],
        )
        .unwrap();
        let r = model.at(3.0).integrate(&Integrand::Character(vec![1]), 1).unwrap();
        assert!((r.value - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let samples = model.at(3.0).sample(5, 1).unwrap();
        assert!(samples.iter().all(|p| (p.second_kind[0] - 0.5).abs() < 1e-15));
    }

    #[test]
    fn function_and_character_routes_agree() {
        let model = line_model();
        let chi = |p: &NilmanifoldPoint<f64>| unit(p.second_kind[0]);
        let m = model.at(2.5);
        let a = m.integrate(&Integrand::Function(&chi), 2000).unwrap().value;
        let b = m.integrate(&Integrand::Character(vec![1]), 2000).unwrap().value;
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn cantor_transform_limits() {
        assert!((cantor_transform(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((cantor_transform(3.0) - cantor_transform(1.0)).norm() < 1e-14);
        assert!((cantor_transform(1.0).norm() - 0.54281809880).abs() < 1e-10);
        // b = 0 leaves the uniform distribution of u
        assert!(cantor_curve_transform(1.0, 0.0).norm() < 1e-14);
    }

    #[test]
    fn sampling_is_reproducible() {
        let model = line_model();
        let a = model.at(1.5).sample(100, 7).unwrap();
        let b = model.at(1.5).sample(100, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, model.at(1.5).sample(100, 8).unwrap());
    }

    #[test]
    fn grids_must_increase() {
        let model = line_model();
        assert_eq!(model.cesaro_family(&[1.0]).unwrap().len(), 1);
        assert!(model.cesaro_family(&[]).is_err());
        assert!(model.cesaro_family(&[2.0, 1.0]).is_err());
    }
}
