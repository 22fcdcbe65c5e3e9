//! Numerical diagnostics of equidistribution: Weyl sums, Cesàro averages of
//! squared pairings, discrepancy, the difference map `psi_t` and
//! shrinking-window averages along a curve.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dilation::DilationFamily;
use crate::error::{Error, Result};
use crate::lattice::{haar_integrate, NilmanifoldPoint};
use crate::lie::{AlgebraVector, NilAlgebra};
use crate::measures::{unit, Curve, Integrand, MeasureSpec, Model, PiecewiseCurve};
use crate::obstruction::Character;
use crate::parallel::{ordered_sum, ordered_sum_real};
use crate::scalar::Rational;

/// Default step of the `t`-grid for continuous Cesàro averages.
pub const DEFAULT_STEP: f64 = 0.5;

/// `|mean|` of a test function under Haar measure above which a Cesàro
/// average gets a warning.
const MEAN_TOLERANCE: f64 = 1e-3;

/// `int chi o q d mu_t`; exactly one for the trivial character.
pub fn weyl_sum(model: &Model, chi: &Character, t: f64, panels: usize) -> Result<Complex64> {
    if chi.is_trivial() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(model.at(t).integrate(&Integrand::Character(chi.0.clone()), panels)?.value)
}

/// `(1/N) sum_{n=1}^{N} e(n alpha)`.
pub fn discrete_weyl_average(alpha: f64, count: u64) -> Complex64 {
    if count == 0 {
        return Complex64::new(0.0, 0.0);
    }
    ordered_sum(count as usize, |i| unit((i as f64 + 1.0) * alpha)) / count as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CesaroAverage {
    pub value: f64,
    /// Grid step in `t`; absent for the discrete average.
    pub step: Option<f64>,
    pub warning: Option<String>,
}

fn mean_warning(model: &Model, f: &Integrand<'_>) -> Result<Option<String>> {
    let mean = match f {
        Integrand::Character(k) => {
            if k.iter().all(|&v| v == 0) {
                Complex64::new(1.0, 0.0)
            } else {
                return Ok(None);
            }
        }
        Integrand::Function(g) => {
            let n = model.space().dim();
            let per_axis = if n <= 3 { 24 } else { 8 };
            haar_integrate(n, per_axis, g)?
        }
    };
    Ok((mean.norm() > MEAN_TOLERANCE).then(|| {
        format!("test function has Haar mean of modulus {:.3e}; the average does not tend to zero", mean.norm())
    }))
}

/// `(1/N) sum_{n=1}^{N} |int f d mu_n|^2`.
pub fn weak_average_discrete(
    model: &Model,
    f: &Integrand<'_>,
    count: u64,
    panels: usize,
) -> Result<CesaroAverage> {
    if count == 0 {
        return Err(Error::InvalidGrid("the average needs at least one term".into()));
    }
    let warning = mean_warning(model, f)?;
    let values: Vec<f64> = (1..=count)
        .into_par_iter()
        .map(|n| Ok(model.at(n as f64).integrate(f, panels)?.value.norm_sqr()))
        .collect::<Result<_>>()?;
    let value = ordered_sum_real(values.len(), |i| values[i]) / count as f64;
    Ok(CesaroAverage {
        value,
        step: None,
        warning,
    })
}

/// `(1/(end - start)) int_start^end |int f d mu_t|^2 dt` by the trapezoid
/// rule on a grid of the given step.
pub fn weak_average_continuous(
    model: &Model,
    f: &Integrand<'_>,
    start: f64,
    end: f64,
    step: f64,
    panels: usize,
) -> Result<CesaroAverage> {
    if !(start.is_finite() && end.is_finite() && end > start) {
        return Err(Error::InvalidGrid(format!("empty interval [{start}, {end}]")));
    }
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidGrid(format!("step {step} is not positive")));
    }
    let warning = mean_warning(model, f)?;
    let intervals = ((end - start) / step).ceil().max(1.0) as usize;
    let h = (end - start) / intervals as f64;
    let values: Vec<f64> = (0..=intervals)
        .into_par_iter()
        .map(|i| {
            let t = start + i as f64 * h;
            Ok(model.at(t).integrate(f, panels)?.value.norm_sqr())
        })
        .collect::<Result<_>>()?;
    let inner = ordered_sum_real(values.len(), |i| {
        if i == 0 || i == intervals {
            0.5 * values[i]
        } else {
            values[i]
        }
    });
    Ok(CesaroAverage {
        value: inner * h / (end - start),
        step: Some(h),
        warning,
    })
}

/// Star discrepancy of points of the circle, taken mod 1.
pub fn star_discrepancy_1d(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Domain("no points".into()));
    }
    let mut xs: Vec<f64> = points.iter().map(|x| x.rem_euclid(1.0)).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let worst = xs
        .iter()
        .enumerate()
        .map(|(i, x)| (x - (2.0 * i as f64 + 1.0) / (2.0 * n)).abs())
        .fold(0.0, f64::max);
    Ok(1.0 / (2.0 * n) + worst)
}

/// Largest `|mean of chi o q|` over nontrivial torus characters of height at
/// most `height`, for points given by coordinates of the second kind whose
/// first `abelian_dim` entries are the torus coordinates.
pub fn character_discrepancy(
    points: &[NilmanifoldPoint<f64>],
    abelian_dim: usize,
    height: u32,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Domain("no points".into()));
    }
    if points.iter().any(|p| p.second_kind.len() < abelian_dim) {
        return Err(Error::DimensionMismatch {
            expected: abelian_dim,
            got: points.iter().map(|p| p.second_kind.len()).min().unwrap_or(0),
        });
    }
    let h = height as i64;
    let side = 2 * h + 1;
    let total = side.pow(abelian_dim as u32);
    let worst = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut k = vec![0i64; abelian_dim];
            for v in k.iter_mut() {
                *v = idx % side - h;
                idx /= side;
            }
            let chi = Character(k);
            if chi.is_trivial() || chi.canonical() != chi {
                return 0.0;
            }
            let s = ordered_sum(points.len(), |i| {
                let x = &points[i].second_kind;
                unit(chi.0.iter().zip(x).map(|(&a, b)| a as f64 * b).sum())
            });
            s.norm() / points.len() as f64
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

fn check_window(u: f64, v: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!("parameters {u} and {v} must lie in (0, 1)")));
    }
    Ok(())
}

/// `log[exp(rho_t phi(u + xi)) exp(-rho_t phi(u))]`.
pub fn psi_t(
    curve: &Curve,
    family: &DilationFamily,
    algebra: &NilAlgebra,
    u: f64,
    xi: f64,
    t: f64,
) -> Result<AlgebraVector<f64>> {
    check_window(u, u + xi)?;
    if curve.dim() != algebra.dim() || family.dim() != algebra.dim() {
        return Err(Error::DimensionMismatch {
            expected: algebra.dim(),
            got: curve.dim(),
        });
    }
    let ahead = AlgebraVector(family.apply_f64(t, &curve.eval(u + xi)));
    let here = AlgebraVector(family.apply_f64(t, &curve.eval(u)));
    algebra.bch(&ahead, &here.neg())
}

/// Exact counterpart of [`psi_t`] for polynomial curves.
pub fn psi_t_exact(
    curve: &PiecewiseCurve,
    family: &DilationFamily,
    algebra: &NilAlgebra,
    u: &Rational,
    xi: &Rational,
    t: &Rational,
) -> Result<AlgebraVector<Rational>> {
    let v = u + xi;
    check_window(crate::scalar::rational_to_f64(u), crate::scalar::rational_to_f64(&v))?;
    if curve.dim() != algebra.dim() || family.dim() != algebra.dim() {
        return Err(Error::DimensionMismatch {
            expected: algebra.dim(),
            got: curve.dim(),
        });
    }
    let ahead = AlgebraVector(family.apply(t, &curve.eval_exact(&v)));
    let here = AlgebraVector(family.apply(t, &curve.eval_exact(u)));
    algebra.bch(&ahead, &here.neg())
}

/// `(t / l) int_{s0}^{s0 + l/t} f(exp(rho_t phi(xi)) x_0) d xi` for a
/// curve-pushforward model, by the midpoint rule.
pub fn shrinking_window_average(
    model: &Model,
    f: &Integrand<'_>,
    s0: f64,
    ell: f64,
    t: f64,
    panels: usize,
) -> Result<Complex64> {
    if panels == 0 {
        return Err(Error::NonPositivePanels);
    }
    let MeasureSpec::CurvePushforward(curve) = model.spec() else {
        return Err(Error::InvalidMeasure("window averages need a curve".into()));
    };
    let width = ell / t;
    if width.is_nan() || width <= 0.0 || s0.is_nan() || s0 <= 0.0 || s0 + width >= 1.0 {
        return Err(Error::Domain(format!(
            "window [{s0}, {}] escapes (0, 1)",
            s0 + width
        )));
    }
    let mu = model.at(t);
    let m = model.space().algebra().abelian_dim();
    let h = width / panels as f64;
    let sum = ordered_sum(panels, |i| {
        let xi = s0 + (i as f64 + 0.5) * h;
        let x = mu.point(&curve.eval(xi));
        match f {
            Integrand::Character(k) => unit(
                k.iter()
                    .zip(&x.second_kind[..m])
                    .map(|(&a, b)| a as f64 * b)
                    .sum(),
            ),
            Integrand::Function(g) => g(&x),
        }
    });
    Ok(sum / panels as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub param: f64,
    pub stat: String,
    pub value: f64,
    pub meta: String,
}

/// Rows of `(parameter, statistic, value, meta)`, kept sorted by parameter.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub metadata: BTreeMap<String, String>,
    pub rows: Vec<Row>,
}

impl ConvergenceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, param: f64, stat: &str, value: f64, meta: impl Into<String>) {
        self.rows.push(Row {
            param,
            stat: stat.to_string(),
            value,
            meta: meta.into(),
        });
    }

    /// Stable sort by parameter; rows at equal parameters keep their order.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,stat,value,meta\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.param, r.stat, r.value, csv_field(&r.meta)));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One labelled integrand of a simulation.
pub struct Probe<'f> {
    pub label: String,
    pub integrand: Integrand<'f>,
}

/// Real part, imaginary part and modulus of every probe at every `t`.
pub fn simulate(model: &Model, probes: &[Probe<'_>], grid: &[f64], panels: usize) -> Result<ConvergenceTable> {
    let measures = model.cesaro_family(grid)?;
    let blocks: Vec<Vec<Row>> = measures
        .par_iter()
        .map(|mu| {
            let mut rows = Vec::with_capacity(3 * probes.len());
            for p in probes {
                let r = mu.integrate(&p.integrand, panels)?;
                let mut meta = format!("measures.integrate probe={} panels={} guard={}", p.label, r.panels, r.guard);
                if r.warning.is_some() {
                    meta.push_str(" below-guard");
                }
                for (stat, v) in [("re", r.value.re), ("im", r.value.im), ("abs", r.value.norm())] {
                    rows.push(Row {
                        param: mu.t,
                        stat: format!("{}:{stat}", p.label),
                        value: v,
                        meta: meta.clone(),
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut table = ConvergenceTable::new().with_meta("panels", panels);
    table.rows = blocks.into_iter().flatten().collect();
    table.sort();
    Ok(table)
}
