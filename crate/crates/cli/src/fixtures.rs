//! Configs bundled with the binary, addressable by name.

pub const STOCK: &[(&str, &str)] = &[
    ("torus_parabola", include_str!("../../../fixtures/torus_parabola.json")),
    ("torus_line_rational", include_str!("../../../fixtures/torus_line_rational.json")),
    ("cantor_t1", include_str!("../../../fixtures/cantor_t1.json")),
    ("cantor_curve", include_str!("../../../fixtures/cantor_curve.json")),
    ("heisenberg_parabola", include_str!("../../../fixtures/heisenberg_parabola.json")),
];

pub const COUNTEREXAMPLES: &[&str] = &["cantor-measure", "cantor-curve", "product-cantor:D"];

pub fn stock(name: &str) -> Option<&'static str> {
    STOCK.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
