//! Benchmark fixtures shared by the criterion benches.

use layervdw::{AtomModel, MaterialModel, QuadratureSpec, Resonance};

pub fn atom() -> AtomModel {
    AtomModel::two_level(1.0, 1.0).expect("valid atom")
}

/// Weak electric and strong magnetic response with light damping.
pub fn magnetodielectric() -> MaterialModel {
    MaterialModel::drude_lorentz(
        Resonance::new(0.75, 1.03, 0.001).expect("valid resonance"),
        Resonance::new(2.0, 1.0, 0.001).expect("valid resonance"),
    )
}

pub fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}
