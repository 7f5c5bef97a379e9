//! Figures of merit for the composite protocols: Bell-state preparation
//! followed by Bell measurement, and the heralded CNOT gate.
//!
//! Both are truth-table fidelities: the probability that a basis input ends
//! in the intended basis output.

use crate::chsh::{Decoherence, ScatterRatio};
use crate::cxmat::{Matrix4, ProbabilityMatrix4};
use crate::dephasing::{averaged_sqmod, Stage};
use crate::error::Result;
use crate::gates::{b2_matrix, bell_components, bell_matrix, h1, h2, MotionPhases};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub prob_matrix: ProbabilityMatrix4,
    pub d: Decoherence,
    pub xi: ScatterRatio,
}

/// Residual decoherence after two stages with independent motion, `d − d²/2`.
pub fn two_stage_loss(d: Decoherence) -> f64 {
    let d = d.value();
    d - 0.5 * d * d
}

/// Prepare-then-measure probability matrix in closed form.
pub fn bell_meas_matrix(d: Decoherence, xi: ScatterRatio) -> ProbabilityMatrix4 {
    let f1 = two_stage_loss(d);
    let x = xi.value();
    let diag = 1.0 - f1 + 4.0 * x * x;
    let o = 2.0 * x;
    ProbabilityMatrix4::from_rows([
        [diag, o, o, f1],
        [o, diag, f1, o],
        [o, f1, diag, o],
        [f1, o, o, diag],
    ])
    .scaled(1.0 / (1.0 + 2.0 * x).powi(2))
}

/// Measurement-stage operator: the inverse of the rest-frame Bell matrix,
/// split into the same two emission components.
pub fn measurement_components() -> [Matrix4; 2] {
    bell_components().map(|c| c.transpose())
}

/// Prepare-then-measure matrix propagated branch by branch, with the two
/// stages dephasing independently and all photon-number branches orthogonal.
pub fn bell_meas_matrix_first_principles(d: Decoherence, xi: ScatterRatio) -> ProbabilityMatrix4 {
    let b2 = b2_matrix(xi.value()).expect("validated scatter ratio");
    let prep = Stage::dephased(bell_components().to_vec());
    let meas = Stage::dephased(measurement_components().to_vec());
    let c = d.coherence();
    let total = averaged_sqmod(&[prep.clone(), meas.clone()], c)
        + averaged_sqmod(&[Stage::fixed(b2), meas], c)
        + averaged_sqmod(&[prep, Stage::fixed(b2)], c)
        + (b2 * b2).elementwise_sqmod();
    total.scaled(1.0 / (1.0 + 2.0 * xi.value()).powi(2))
}

/// Diagonal of [`bell_meas_matrix`], `F_B = 1 − (4ξ + d − d²/2)/(1 + 2ξ)²`.
pub fn bell_meas_fidelity(d: Decoherence, xi: ScatterRatio) -> f64 {
    let x = xi.value();
    1.0 - (4.0 * x + two_stage_loss(d)) / (1.0 + 2.0 * x).powi(2)
}

/// The published expression `1 − (4ξ² + d − d²/2)/(1 + 2ξ)²`. It agrees with
/// [`bell_meas_fidelity`] only at `ξ ∈ {0, 1}`.
pub fn bell_meas_fidelity_printed(d: Decoherence, xi: ScatterRatio) -> f64 {
    let x = xi.value();
    1.0 - (4.0 * x * x + two_stage_loss(d)) / (1.0 + 2.0 * x).powi(2)
}

pub fn bell_meas_report(d: Decoherence, xi: ScatterRatio) -> FidelityReport {
    FidelityReport { fidelity: bell_meas_fidelity(d, xi), prob_matrix: bell_meas_matrix(d, xi), d, xi }
}

/// Single-photon and double-excitation branches `(H1·B·H2, H1·B⁽²⁾·H2)`.
pub fn cnot_composite(m: MotionPhases, xi: f64) -> Result<(Matrix4, Matrix4)> {
    let b2 = b2_matrix(xi)?;
    let (l, r) = (h1(), h2());
    Ok(((l * bell_matrix(m)) * r, (l * b2) * r))
}

/// Motion-averaged CNOT truth table built from the composed operators.
pub fn cnot_prob_matrix(d: Decoherence, xi: ScatterRatio) -> ProbabilityMatrix4 {
    let (l, r) = (h1(), h2());
    let single = averaged_sqmod(
        &[Stage::fixed(l), Stage::dephased(bell_components().to_vec()), Stage::fixed(r)],
        d.coherence(),
    );
    let (_, double) = cnot_composite(MotionPhases::REST, xi.value()).expect("validated scatter ratio");
    (single + double.elementwise_sqmod()).scaled(1.0 / (1.0 + 2.0 * xi.value()))
}

/// The block form `½[[1+F, 1−F, 0, 0], [1−F, 1+F, 0, 0], [0, 0, 1−F, 1+F], [0, 0, 1+F, 1−F]]`.
pub fn cnot_prob_matrix_closed(d: Decoherence, xi: ScatterRatio) -> ProbabilityMatrix4 {
    let f = cnot_fidelity(d, xi);
    let (p, m) = (0.5 * (1.0 + f), 0.5 * (1.0 - f));
    ProbabilityMatrix4::from_rows([
        [p, m, 0.0, 0.0],
        [m, p, 0.0, 0.0],
        [0.0, 0.0, m, p],
        [0.0, 0.0, p, m],
    ])
}

/// `F = (1 − d)/(1 + 2ξ)`.
pub fn cnot_fidelity(d: Decoherence, xi: ScatterRatio) -> f64 {
    d.coherence() / (1.0 + 2.0 * xi.value())
}

pub fn cnot_report(d: Decoherence, xi: ScatterRatio) -> FidelityReport {
    FidelityReport { fidelity: cnot_fidelity(d, xi), prob_matrix: cnot_prob_matrix(d, xi), d, xi }
}
