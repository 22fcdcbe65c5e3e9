//! JSON experiment configurations. Exact quantities are written as strings
//! such as `"1/3"`; plain JSON integers are accepted too. Basis indices are
//! 1-based.

use std::fmt;

use nilequi::dilation::RationalMatrix;
use nilequi::lattice::Nilmanifold;
use nilequi::measures::{CantorCurve, Segment};
use nilequi::obstruction::{Character, Parameter};
use nilequi::scalar::parse_rational;
use nilequi::{Curve, DilationFamily, Error, MeasureSpec, Model, NilAlgebra, PiecewiseCurve, Rational};
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

/// A rational written as `"p/q"`, `"p"` or a JSON integer.
#[derive(Clone, Debug, PartialEq)]
pub struct Exact(pub Rational);

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exact;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational string like \"1/3\" or an integer")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Exact, E> {
                parse_rational(s).map(Exact).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exact, E> {
                Ok(Exact(Rational::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exact, E> {
                Ok(Exact(Rational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exact, E> {
                Err(E::custom(format!(
                    "{v} is a float; write exact values as strings such as \"1/3\""
                )))
            }
        }
        d.deserialize_any(V)
    }
}

fn exact_vec(v: &[Exact]) -> Vec<Rational> {
    v.iter().map(|x| x.0.clone()).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub algebra: AlgebraConfig,
    #[serde(default = "default_lattice")]
    pub lattice: String,
    pub dilation: DilationConfig,
    pub measure: MeasureConfig,
    #[serde(default)]
    pub base_point: Option<Vec<Exact>>,
    #[serde(default = "default_parameter")]
    pub parameter: String,
    #[serde(default)]
    pub grid: Vec<f64>,
    #[serde(default)]
    pub characters: Vec<Vec<i64>>,
    #[serde(default)]
    pub height: Option<u32>,
    #[serde(default)]
    pub panels: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Points drawn per grid value for the character discrepancy column.
    #[serde(default)]
    pub samples: usize,
    /// Largest number of integrand evaluations `simulate` may spend.
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_lattice() -> String {
    "integer-points".into()
}

fn default_parameter() -> String {
    "continuous".into()
}

fn default_budget() -> u64 {
    2_000_000_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    pub dim: usize,
    #[serde(default)]
    pub kappa: Option<usize>,
    #[serde(default)]
    pub abelian_dim: Option<usize>,
    #[serde(default)]
    pub brackets: Vec<BracketConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketConfig {
    pub i: usize,
    pub j: usize,
    pub coeffs: Vec<Exact>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationConfig {
    #[serde(default)]
    pub matrices: Option<Vec<Vec<Vec<Exact>>>>,
    /// `rho_t = t^p Id`.
    #[serde(default)]
    pub scalar_power: Option<usize>,
    /// `rho_t = diag(t^{w_1}, ..., t^{w_n})`.
    #[serde(default)]
    pub weights: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureConfig {
    Curve {
        segments: Vec<SegmentConfig>,
    },
    CantorCurve {
        u_dim: usize,
        psi_dim: usize,
        #[serde(default = "default_depth")]
        depth: u32,
    },
    Atoms {
        points: Vec<Vec<Exact>>,
        #[serde(default)]
        weights: Option<Vec<Exact>>,
    },
    Cantor {
        #[serde(default = "default_depth")]
        depth: u32,
    },
    Product {
        factors: Vec<MeasureConfig>,
    },
}

fn default_depth() -> u32 {
    nilequi::counterexamples::DEFAULT_DEPTH
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub start: Exact,
    pub end: Exact,
    /// `coeffs[j]` is the vector coefficient of `u^j`.
    pub coeffs: Vec<Vec<Exact>>,
}

/// Everything a command needs, validated.
pub struct Experiment {
    pub name: String,
    pub model: Model,
    pub parameter: Parameter,
    pub grid: Vec<f64>,
    pub characters: Vec<Character>,
    pub height: u32,
    pub panels: Option<usize>,
    pub seed: u64,
    pub samples: usize,
    pub budget: u64,
}

fn config_error(path: &str, e: impl fmt::Display) -> Error {
    Error::Config {
        path: path.to_string(),
        message: e.to_string(),
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig, Error> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        config_error(if path.is_empty() { "." } else { &path }, inner)
    })
}

impl ExperimentConfig {
    pub fn build(self) -> Result<Experiment, Error> {
        let a = &self.algebra;
        let mut brackets = Vec::with_capacity(a.brackets.len());
        for (idx, b) in a.brackets.iter().enumerate() {
            if b.i == 0 || b.j == 0 || b.i > a.dim || b.j > a.dim {
                return Err(config_error(
                    &format!("algebra.brackets[{idx}]"),
                    format!("indices must lie in 1..={}", a.dim),
                ));
            }
            brackets.push((b.i - 1, b.j - 1, exact_vec(&b.coeffs)));
        }
        let algebra = NilAlgebra::from_brackets(a.dim, &brackets)
            .map_err(|e| config_error("algebra.brackets", e))?;
        algebra
            .check_declared(a.kappa, a.abelian_dim)
            .map_err(|e| config_error("algebra", e))?;
        if self.lattice != "integer-points" {
            return Err(config_error("lattice", "only \"integer-points\" is supported"));
        }
        let space = Nilmanifold::integer_points(algebra).map_err(|e| config_error("lattice", e))?;
        let n = space.dim();

        let family = build_dilation(&self.dilation, n)?;
        let spec = build_measure(&self.measure, "measure", n)?;
        let base = match &self.base_point {
            Some(v) => exact_vec(v),
            None => vec![Rational::from_integer(0.into()); n],
        };
        if base.len() != n {
            return Err(config_error("base_point", format!("expected {n} coordinates")));
        }
        let model = Model::new(space, family, spec, base).map_err(|e| config_error("measure", e))?;

        let parameter = match self.parameter.as_str() {
            "continuous" => Parameter::Continuous,
            "discrete" => Parameter::Discrete,
            other => {
                return Err(config_error(
                    "parameter",
                    format!("expected \"continuous\" or \"discrete\", got \"{other}\""),
                ))
            }
        };
        if parameter == Parameter::Discrete
            && self.grid.iter().any(|t| t.fract() != 0.0 || *t < 1.0)
        {
            return Err(config_error("grid", "a discrete parameter takes positive integers"));
        }
        let m = model.space().algebra().abelian_dim();
        let mut characters = Vec::with_capacity(self.characters.len());
        for (idx, k) in self.characters.iter().enumerate() {
            if k.len() != m {
                return Err(config_error(&format!("characters[{idx}]"), format!("expected {m} entries")));
            }
            characters.push(Character(k.clone()));
        }
        if characters.is_empty() {
            let mut k = vec![0; m];
            k[0] = 1;
            characters.push(Character(k));
        }
        if self.panels == Some(0) {
            return Err(config_error("panels", "must be positive"));
        }
        Ok(Experiment {
            name: self.name.unwrap_or_else(|| "experiment".into()),
            model,
            parameter,
            grid: self.grid,
            characters,
            height: self.height.unwrap_or(nilequi::obstruction::DEFAULT_HEIGHT),
            panels: self.panels,
            seed: self.seed,
            samples: self.samples,
            budget: self.budget,
        })
    }
}

fn build_dilation(d: &DilationConfig, n: usize) -> Result<DilationFamily, Error> {
    let given = [d.matrices.is_some(), d.scalar_power.is_some(), d.weights.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(config_error(
            "dilation",
            "give exactly one of \"matrices\", \"scalar_power\" or \"weights\"",
        ));
    }
    if let Some(p) = d.scalar_power {
        return Ok(DilationFamily::scalar_power(n, p));
    }
    if let Some(w) = &d.weights {
        if w.len() != n {
            return Err(config_error("dilation.weights", format!("expected {n} weights")));
        }
        return Ok(DilationFamily::diagonal_weights(w));
    }
    let mats: Vec<RationalMatrix> = d
        .matrices
        .as_ref()
        .unwrap()
        .iter()
        .map(|b| b.iter().map(|row| exact_vec(row)).collect())
        .collect();
    DilationFamily::new(n, mats).map_err(|e| config_error("dilation.matrices", e))
}

fn build_measure(m: &MeasureConfig, path: &str, n: usize) -> Result<MeasureSpec, Error> {
    Ok(match m {
        MeasureConfig::Curve { segments } => {
            let segs = segments
                .iter()
                .map(|s| Segment {
                    start: s.start.0.clone(),
                    end: s.end.0.clone(),
                    coeffs: s.coeffs.iter().map(|c| exact_vec(c)).collect(),
                })
                .collect();
            let c = PiecewiseCurve::new(n, segs).map_err(|e| config_error(&format!("{path}.curve.segments"), e))?;
            MeasureSpec::CurvePushforward(Curve::Piecewise(c))
        }
        MeasureConfig::CantorCurve { u_dim, psi_dim, depth } => {
            if *u_dim == 0 || *psi_dim == 0 || *u_dim > n || *psi_dim > n || u_dim == psi_dim {
                return Err(config_error(&format!("{path}.cantor-curve"), format!("u_dim and psi_dim must be distinct indices in 1..={n}")));
            }
            MeasureSpec::CurvePushforward(Curve::Cantor(CantorCurve {
                dim: n,
                u_dim: u_dim - 1,
                psi_dim: psi_dim - 1,
                depth: *depth,
            }))
        }
        MeasureConfig::Atoms { points, weights } => {
            let pts: Vec<Vec<Rational>> = points.iter().map(|p| exact_vec(p)).collect();
            match weights {
                None => MeasureSpec::uniform_atoms(pts),
                Some(w) => MeasureSpec::Atomic {
                    points: pts,
                    weights: exact_vec(w),
                },
            }
        }
        MeasureConfig::Cantor { depth } => MeasureSpec::Cantor1D { depth: *depth },
        MeasureConfig::Product { factors } => MeasureSpec::Product(
            factors
                .iter()
                .enumerate()
                .map(|(i, f)| build_measure(f, &format!("{path}.product.factors[{i}]"), 1))
                .collect::<Result<_, _>>()?,
        ),
    })
    .and_then(|spec| {
        spec.validate(n).map_err(|e| config_error(path, e))?;
        Ok(spec)
    })
}
