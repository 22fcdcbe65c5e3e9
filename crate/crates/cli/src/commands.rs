use std::path::Path;

use nilequi::counterexamples::{
    cantor_measure, cantor_transform_enumerated, counterexample_curve, product_cantor,
    verify_self_similarity, verify_selfsimilar_measure,
};
use nilequi::diagnostics::{self, CesaroAverage, Probe};
use nilequi::lattice::Nilmanifold;
use nilequi::obstruction::{classify, ClassifyOptions, Parameter, Verdict, VerdictKind};
use nilequi::realization::Realization;
use nilequi::scalar::int;
use nilequi::{AlgebraVector, DilationFamily, Error, Integrand, MeasureSpec, Model, NilAlgebra, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{self, Experiment};
use crate::fixtures;
use crate::Format;

/// Reads a config from a path, falling back to a bundled fixture name.
pub fn load(
    source: &str,
    seed: Option<u64>,
    panels: Option<usize>,
    height: Option<u32>,
) -> Result<Experiment, Error> {
    let text = if Path::new(source).exists() {
        std::fs::read_to_string(source).map_err(|e| Error::Config {
            path: "--config".into(),
            message: format!("{source}: {e}"),
        })?
    } else if let Some(text) = fixtures::stock(source) {
        text.to_string()
    } else {
        let names: Vec<&str> = fixtures::STOCK.iter().map(|(n, _)| *n).collect();
        return Err(Error::Config {
            path: "--config".into(),
            message: format!("{source} is neither a file nor a bundled fixture ({})", names.join(", ")),
        });
    };
    let mut exp = config::parse(&text)?.build()?;
    if let Some(s) = seed {
        exp.seed = s;
    }
    if let Some(p) = panels {
        if p == 0 {
            return Err(Error::Config {
                path: "--panels".into(),
                message: "must be positive".into(),
            });
        }
        exp.panels = Some(p);
    }
    if let Some(h) = height {
        exp.height = h;
    }
    Ok(exp)
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn verdict_of(model: &Model, parameter: Parameter, height: u32) -> Result<Verdict, Error> {
    classify(
        model.spec(),
        model.family(),
        model.space().algebra(),
        &ClassifyOptions { height, parameter },
    )
}

pub fn check(exp: &Experiment) -> Result<String, Error> {
    let model = &exp.model;
    let algebra = model.space().algebra();
    let verdict = verdict_of(model, exp.parameter, exp.height)?;
    let degree = model.family().degree_data(algebra)?;
    let graded = model.family().check_graded_condition(algebra)?;
    Ok(pretty(&json!({
        "name": exp.name,
        "verdict": verdict,
        "degree_data": degree,
        "graded_condition": graded,
        "torus": { "d1": model.torus().d1, "a0_nonzero": model.torus().a0_nonzero },
    })))
}

fn label(k: &[i64]) -> String {
    let parts: Vec<String> = k.iter().map(i64::to_string).collect();
    format!("chi[{}]", parts.join(";"))
}

pub fn simulate(exp: &Experiment, format: Format) -> Result<String, Error> {
    if exp.grid.is_empty() {
        return Err(Error::Config {
            path: "grid".into(),
            message: "simulate needs a nonempty grid".into(),
        });
    }
    let model = &exp.model;
    let guard = exp
        .grid
        .iter()
        .map(|&t| model.oscillation_guard(t))
        .max()
        .unwrap_or(0);
    let panels = exp.panels.unwrap_or(guard.max(1024));
    let per_integral = if guard > 0 { panels as u64 } else { 1 };
    let estimated = per_integral * exp.grid.len() as u64 * exp.characters.len() as u64
        + (exp.samples as u64) * exp.grid.len() as u64;
    if estimated > exp.budget {
        return Err(Error::BudgetExceeded {
            estimated,
            budget: exp.budget,
        });
    }
    let probes: Vec<Probe> = exp
        .characters
        .iter()
        .map(|chi| Probe {
            label: label(&chi.0),
            integrand: Integrand::Character(chi.0.clone()),
        })
        .collect();
    let mut table = diagnostics::simulate(model, &probes, &exp.grid, panels)?;
    if exp.samples > 0 {
        let m = model.space().algebra().abelian_dim();
        let height = exp.height.min(3);
        for &t in &exp.grid {
            let points = model.at(t).sample(exp.samples, exp.seed)?;
            let d = diagnostics::character_discrepancy(&points, m, height)?;
            table.push(
                t,
                "discrepancy",
                d,
                format!(
                    "diagnostics.character_discrepancy samples={} seed={} height={height}",
                    exp.samples, exp.seed
                ),
            );
        }
        table.sort();
    }
    let table = table
        .with_meta("name", &exp.name)
        .with_meta("seed", exp.seed)
        .with_meta(
            "characters",
            exp.characters.iter().map(|c| label(&c.0)).collect::<Vec<_>>().join(" "),
        );
    Ok(match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut s = table.to_json();
            s.push('\n');
            s
        }
    })
}

#[derive(Serialize)]
struct Check {
    name: String,
    passed: bool,
    value: f64,
    bound: f64,
}

#[derive(Serialize)]
struct Report {
    fixture: String,
    checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weak_average: Option<CesaroAverage>,
    passed: bool,
}

fn check_at_most(name: impl Into<String>, value: f64, bound: f64) -> Check {
    Check {
        name: name.into(),
        passed: value <= bound,
        value,
        bound,
    }
}

fn torus_model(spec: MeasureSpec, dim: usize) -> Result<Model, Error> {
    let space = Nilmanifold::integer_points(NilAlgebra::abelian(dim))?;
    Model::new(space, DilationFamily::multiplication(dim), spec, vec![int(0); dim])
}

/// Runs the named counterexample. With neither flag everything runs.
pub fn counterexample(name: &str, m: u32, identities_only: bool, verdict_only: bool) -> Result<(String, bool), Error> {
    let identities = identities_only || !verdict_only;
    let decay = !identities_only && !verdict_only;
    let verdict = verdict_only || !identities_only;
    let mut checks = Vec::new();
    let mut weak_average = None;

    let (spec, dim, expect) = match name {
        "cantor-measure" => (cantor_measure(), 1, VerdictKind::WeaklyEquidistributed),
        "cantor-curve" => (
            MeasureSpec::CurvePushforward(counterexample_curve()),
            2,
            VerdictKind::WeaklyEquidistributed,
        ),
        other => match other.strip_prefix("product-cantor:").and_then(|d| d.parse::<usize>().ok()) {
            Some(d) if d >= 1 => (product_cantor(d)?, d, VerdictKind::WeaklyEquidistributed),
            _ => {
                return Err(Error::Config {
                    path: "name".into(),
                    message: format!(
                        "unknown counterexample {other}; available: {}",
                        fixtures::COUNTEREXAMPLES.join(", ")
                    ),
                })
            }
        },
    };
    let model = torus_model(spec, dim)?;

    if identities {
        match name {
            "cantor-curve" => {
                let depth = 10u32;
                let cells = 3i64.pow(depth - 1);
                let mut failures = 0u64;
                for j in 0..cells {
                    let u = Rational::new(j.into(), 3i64.pow(depth).into());
                    for b in 0..3 {
                        if verify_self_similarity(&u, b).is_err() {
                            failures += 1;
                        }
                    }
                }
                checks.push(check_at_most(
                    format!("self-similarity residues are integers on the depth-{depth} grid"),
                    failures as f64,
                    0.0,
                ));
            }
            _ => {
                let depth = 16.max(m + 8);
                let dev = verify_selfsimilar_measure(m, 5, depth)?;
                checks.push(check_at_most(
                    format!("max |transform at 3^{m} k - transform at k|, k <= 5, depth {depth}"),
                    dev,
                    1e-9,
                ));
                let base = cantor_transform_enumerated(1, depth).norm();
                let spread = (0..=m)
                    .map(|j| (cantor_transform_enumerated(3i64.pow(j), depth).norm() - base).abs())
                    .fold(0.0, f64::max);
                checks.push(check_at_most("modulus at 3^j constant for j <= m", spread, 1e-9));
            }
        }
    }
    if decay {
        let mut k = vec![0i64; dim];
        k[0] = 1;
        let count = if dim == 1 { 3000 } else { 500 };
        let avg = diagnostics::weak_average_discrete(&model, &Integrand::Character(k), count, 1)?;
        checks.push(check_at_most(format!("discrete weak average over n <= {count}"), avg.value, 0.1));
        weak_average = Some(avg);
    }
    let verdict = if verdict {
        let v = verdict_of(&model, Parameter::Discrete, 6)?;
        checks.push(Check {
            name: format!("verdict is {expect:?}"),
            passed: v.kind == expect,
            value: f64::from(u8::from(v.kind == expect)),
            bound: 1.0,
        });
        Some(v)
    } else {
        None
    };
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        fixture: name.to_string(),
        checks,
        verdict,
        weak_average,
        passed,
    };
    Ok((pretty(&report), passed))
}

fn random_element(rng: &mut ChaCha8Rng, n: usize) -> AlgebraVector<Rational> {
    AlgebraVector(
        (0..n)
            .map(|_| Rational::new(rng.gen_range(-6i64..=6).into(), rng.gen_range(1i64..=4).into()))
            .collect(),
    )
}

pub fn bch_selftest(seed: u64, pairs: usize) -> Result<(String, bool), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut all = true;
    for r in Realization::stock() {
        let algebra = r.algebra()?;
        let mut exact_failures = 0;
        let mut float_error: f64 = 0.0;
        for _ in 0..pairs {
            let x = random_element(&mut rng, r.dim());
            let y = random_element(&mut rng, r.dim());
            if algebra.bch(&x, &y)? != r.group_product(&x, &y) {
                exact_failures += 1;
            }
            let fx = algebra.bch(&x.to_f64(), &y.to_f64())?;
            let fy = r.group_product(&x.to_f64(), &y.to_f64());
            for (a, b) in fx.0.iter().zip(&fy.0) {
                float_error = float_error.max((a - b).abs() / (1.0 + b.abs()));
            }
        }
        let passed = exact_failures == 0 && float_error <= 1e-12;
        all &= passed;
        rows.push(json!({
            "realization": r.name,
            "dim": r.dim(),
            "kappa": algebra.kappa(),
            "pairs": pairs,
            "exact_failures": exact_failures,
            "float_max_relative_error": float_error,
            "passed": passed,
        }));
    }
    Ok((pretty(&json!({ "seed": seed, "results": rows, "passed": all })), all))
}
