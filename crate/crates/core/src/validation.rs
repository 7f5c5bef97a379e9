//! The self-check suite: operator identities, closed forms against the
//! matrix pipeline, and Monte-Carlo estimates against quadrature.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chsh::{
    chsh_s, correlations, e_gg_scatter, probabilities_closed_form, probabilities_first_principles,
    AnglePattern, Decoherence, PatternKind, ScatterForm, ScatterRatio, TSIRELSON,
};
use crate::cxmat::Basis;
use crate::error::Result;
use crate::gates::{
    bell_matrix, cnot_identity_defect, h1, h2, h2_printed, orthogonality_defect, MotionPhases,
};
use crate::motion::{
    aperture_coefficients, cone_average, d_exact, nu_eff, t_crit, OpticsParams, TrapParams,
};
use crate::oracle::{mc_bell_measurement, mc_decoherence, mc_probabilities, McConfig};
use crate::protocol::{
    bell_meas_fidelity, bell_meas_matrix, bell_meas_matrix_first_principles, cnot_fidelity,
    cnot_prob_matrix, cnot_prob_matrix_closed,
};

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub trap: TrapParams,
    pub optics: OpticsParams,
    pub mc: McConfig,
    /// Substitute the published post-detection layer in the CNOT identity.
    pub use_printed_h2: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            trap: TrapParams::rb87(0.0).expect("default trap"),
            optics: OpticsParams::default(),
            mc: McConfig::default(),
            use_printed_h2: false,
        }
    }
}

/// A Monte-Carlo comparison `(estimate, closed form, standard error)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McTriple {
    pub estimate: f64,
    pub closed_form: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub mc: Vec<McTriple>,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail, mc: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

const DRAWS: usize = 100;
const DRAW_SEED: u64 = 0x00b1_5eed;

fn random_draws(n: usize) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(DRAW_SEED);
    (0..n)
        .map(|_| {
            (
                rng.random::<f64>(),
                rng.random_range(-2.0 * PI..2.0 * PI),
                rng.random_range(-2.0 * PI..2.0 * PI),
            )
        })
        .collect()
}

fn cnot_identity(opts: &ValidationOptions) -> Check {
    let post = if opts.use_printed_h2 { h2_printed() } else { h2() };
    let defect = cnot_identity_defect(&h1(), &bell_matrix(MotionPhases::REST), &post);
    let which = if opts.use_printed_h2 { "printed H2" } else { "H2" };
    Check::new("cnot_identity", defect <= 1e-12, format!("max |H1·B·{which} − CNOT| = {defect:.3e}"))
}

fn printed_h2_erratum() -> Check {
    let p = h2_printed();
    let det = p.determinant().norm();
    let defect = cnot_identity_defect(&h1(), &bell_matrix(MotionPhases::REST), &p);
    Check::new(
        "printed_h2_is_singular",
        det < 1e-12 && defect > 0.1,
        format!("|det| = {det:.3e}, CNOT defect with printed H2 = {defect:.3}"),
    )
}

fn bell_basis() -> Check {
    let b = bell_matrix(MotionPhases::REST);
    let (a, c) = orthogonality_defect(&b);
    let u = b.unitarity_defect();
    Check::new(
        "bell_basis_orthonormal",
        a < 1e-14 && c < 1e-14 && u < 1e-14,
        format!("overlaps {a:.1e}, {c:.1e}; unitarity defect {u:.1e}"),
    )
}

fn critical_temperature(opts: &ValidationOptions) -> Check {
    let o = OpticsParams::default();
    let trap = TrapParams::rb87(0.0).expect("default trap");
    let nu = nu_eff(&trap, &o);
    let t = t_crit(&trap, &o);
    let a = aperture_coefficients(&o);
    let ok = (nu - 55e3).abs() <= 1e3
        && (t - 20e-6).abs() <= 1e-6
        && (a.a_perp - 1.25).abs() <= 0.02
        && (a.a_par - 0.75).abs() <= 0.02;
    let cfg = t_crit(&opts.trap, &opts.optics);
    Check::new(
        "critical_temperature_anchor",
        ok,
        format!(
            "nu_eff = {nu:.1} Hz, T_cr = {:.3} uK, A_perp = {:.4}, A_par = {:.4}; configured T_cr = {:.3} uK",
            t * 1e6,
            a.a_perp,
            a.a_par,
            cfg * 1e6
        ),
    )
}

fn angular_normalization(opts: &ValidationOptions) -> Result<Check> {
    let mut worst = 0.0f64;
    for theta0 in [FRAC_PI_8, std::f64::consts::FRAC_PI_4, FRAC_PI_2, opts.optics.theta0()] {
        let total = cone_average(&OpticsParams::new(theta0)?, |_, _| 1.0)?;
        worst = worst.max((total - 1.0).abs());
    }
    Ok(Check::new("angular_pdf_normalized", worst < 1e-9, format!("max |∫P − 1| = {worst:.2e}")))
}

fn transcription() -> Result<Check> {
    let mut worst = 0.0f64;
    for (d, t1, t2) in random_draws(DRAWS) {
        let d = Decoherence::new(d)?;
        worst = worst.max(probabilities_closed_form(d, t1, t2).max_abs_diff(&probabilities_first_principles(d, t1, t2)));
    }
    Ok(Check::new(
        "closed_form_equals_first_principles",
        worst <= 1e-12,
        format!("{DRAWS} draws, max entry difference {worst:.2e}"),
    ))
}

fn stochasticity() -> Result<Check> {
    let mut worst = 0.0f64;
    for (d, t1, t2) in random_draws(DRAWS) {
        let d = Decoherence::new(d)?;
        let xi = ScatterRatio::new(t1.abs() / 4.0)?;
        worst = worst
            .max(probabilities_closed_form(d, t1, t2).row_sum_defect())
            .max(bell_meas_matrix(d, xi).row_sum_defect())
            .max(cnot_prob_matrix(d, xi).row_sum_defect());
    }
    Ok(Check::new("probability_rows_sum_to_one", worst <= 1e-12, format!("max row defect {worst:.2e}")))
}

fn correlation_pairs() -> Result<Check> {
    let mut worst = 0.0f64;
    for (d, t1, t2) in random_draws(DRAWS) {
        let e = correlations(Decoherence::new(d)?, t1, t2);
        worst = worst.max((e[0] + e[1]).abs()).max((e[2] + e[3]).abs());
    }
    Ok(Check::new(
        "correlation_antisymmetry",
        worst <= 1e-12,
        format!("max |E_gg + E_ge|, |E_ee + E_eg| = {worst:.2e}"),
    ))
}

fn chsh_values() -> Result<Check> {
    let a = AnglePattern::new(FRAC_PI_8, PatternKind::Standard).angles();
    let s0 = chsh_s(Basis::GE, &a, Decoherence::NONE);
    let d = Decoherence::from_temperature_ratio(0.5)?;
    let s1 = chsh_s(Basis::GE, &a, d);
    let expected = TSIRELSON - SQRT_2 * d.value();
    Ok(Check::new(
        "chsh_at_pi_over_8",
        (s0 - TSIRELSON).abs() <= 1e-9 && (s1 - expected).abs() <= 1e-6,
        format!("S_ge = {s0:.10} at d = 0, {s1:.10} at T/T_cr = 0.5"),
    ))
}

fn protocol_consistency() -> Result<Check> {
    let mut worst_b = 0.0f64;
    let mut worst_c = 0.0f64;
    for (d, t1, _) in random_draws(DRAWS) {
        let d = Decoherence::new(d)?;
        let xi = ScatterRatio::new(t1.abs() / 4.0)?;
        worst_b = worst_b.max(bell_meas_matrix(d, xi).max_abs_diff(&bell_meas_matrix_first_principles(d, xi)));
        worst_c = worst_c.max(cnot_prob_matrix(d, xi).max_abs_diff(&cnot_prob_matrix_closed(d, xi)));
    }
    Ok(Check::new(
        "protocol_matrices_match_composition",
        worst_b <= 1e-12 && worst_c <= 1e-12,
        format!("Bell measurement {worst_b:.2e}, CNOT block form {worst_c:.2e}"),
    ))
}

fn fidelity_anchors() -> Result<Check> {
    let f = cnot_fidelity(Decoherence::from_temperature_ratio(1.0)?, ScatterRatio::ZERO);
    let fb1 = bell_meas_fidelity(Decoherence::FULL, ScatterRatio::ZERO);
    let fb2 = bell_meas_fidelity(Decoherence::NONE, ScatterRatio::new(1.0)?);
    let ok = (f - (-1.0f64).exp()).abs() <= 1e-12 && (fb1 - 0.5).abs() <= 1e-12 && (fb2 - 5.0 / 9.0).abs() <= 1e-12;
    Ok(Check::new("fidelity_anchors", ok, format!("F = {f:.12}, F_B = {fb1:.12}, {fb2:.12}")))
}

/// Largest `|E_printed − E_first_principles|` over an angle grid.
pub fn scatter_gap(d: Decoherence, xi: ScatterRatio) -> f64 {
    let n = 64;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let t1 = PI * i as f64 / n as f64;
            let t2 = PI * j as f64 / n as f64;
            let a = e_gg_scatter(d, xi, t1, t2, ScatterForm::Printed);
            let b = e_gg_scatter(d, xi, t1, t2, ScatterForm::FirstPrinciples);
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

fn scatter_discrepancy() -> Result<Check> {
    let d = Decoherence::from_temperature_ratio(0.5)?;
    let xis = [0.05, 0.01, 1e-3, 1e-4, 0.0];
    let gaps = xis.iter().map(|&x| ScatterRatio::new(x).map(|r| scatter_gap(d, r))).collect::<Result<Vec<_>>>()?;
    let shrinking = gaps.windows(2).all(|w| w[1] < w[0] || w[1] <= 1e-15);
    let ok = gaps[0] <= 0.1 && shrinking && gaps[gaps.len() - 1] <= 1e-12;
    let detail = xis
        .iter()
        .zip(&gaps)
        .map(|(x, g)| format!("xi = {x}: {g:.3e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(Check::new("scatter_form_gap", ok, format!("max |ΔE_gg| {detail}")))
}

fn temperatures(opts: &ValidationOptions) -> Result<Vec<(f64, TrapParams)>> {
    let tc = t_crit(&opts.trap, &opts.optics);
    [0.2, 0.5, 1.0]
        .into_iter()
        .map(|r| opts.trap.with_temperature(r * tc).map(|t| (r, t)))
        .collect()
}

fn mc_decoherence_check(opts: &ValidationOptions) -> Result<Check> {
    let mut triples = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, trap) in temperatures(opts)? {
        let est = mc_decoherence(&trap, &opts.optics, &opts.mc)?;
        let exact = d_exact(&trap, &opts.optics, opts.mc.mode)?;
        ok &= est.d.agrees_with(exact, 3.0) && est.imaginary.agrees_with(0.0, 3.0);
        parts.push(format!("T/T_cr = {r}: z = {:.2}", est.d.z_score(exact)));
        triples.push(McTriple { estimate: est.d.mean, closed_form: exact, std_error: est.d.std_error });
    }
    Ok(Check { name: "mc_decoherence_vs_quadrature", passed: ok, detail: parts.join(", "), mc: triples })
}

fn mc_probability_check(opts: &ValidationOptions) -> Result<Check> {
    let angles = crate::gates::RamanAngles::new(0.0, FRAC_PI_8);
    let mut triples = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, trap) in temperatures(opts)? {
        let d = Decoherence::new(d_exact(&trap, &opts.optics, opts.mc.mode)?)?;
        let est = mc_probabilities(&trap, &opts.optics, angles, &opts.mc)?;
        let closed = probabilities_first_principles(d, angles.theta1, angles.theta2);
        ok &= est.agrees_with(&closed, 3.0) && est.max_row_defect <= 1e-12;
        parts.push(format!("T/T_cr = {r}: max z = {:.2}", est.max_z_score(&closed)));
        let e = est.entry(1, 0);
        triples.push(McTriple { estimate: e.mean, closed_form: closed.at(1, 0), std_error: e.std_error });
    }
    Ok(Check { name: "mc_probabilities_vs_first_principles", passed: ok, detail: parts.join(", "), mc: triples })
}

fn mc_bell_measurement_check(opts: &ValidationOptions) -> Result<Check> {
    let mut triples = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, trap) in temperatures(opts)? {
        let d = Decoherence::new(d_exact(&trap, &opts.optics, opts.mc.mode)?)?;
        for xi in [0.0, 0.05] {
            let est = mc_bell_measurement(&trap, &opts.optics, xi, &opts.mc)?;
            let f = bell_meas_fidelity(d, ScatterRatio::new(xi)?);
            let worst = (0..4).map(|i| est.entry(i, i).z_score(f)).fold(0.0, f64::max);
            ok &= (0..4).all(|i| est.entry(i, i).agrees_with(f, 3.0));
            parts.push(format!("T/T_cr = {r}, xi = {xi}: max z = {worst:.2}"));
            let e = est.entry(0, 0);
            triples.push(McTriple { estimate: e.mean, closed_form: f, std_error: e.std_error });
        }
    }
    Ok(Check { name: "mc_bell_measurement_vs_fidelity", passed: ok, detail: parts.join(", "), mc: triples })
}

pub fn run(opts: &ValidationOptions) -> Result<Report> {
    let checks = vec![
        cnot_identity(opts),
        printed_h2_erratum(),
        bell_basis(),
        critical_temperature(opts),
        angular_normalization(opts)?,
        transcription()?,
        stochasticity()?,
        correlation_pairs()?,
        chsh_values()?,
        protocol_consistency()?,
        fidelity_anchors()?,
        scatter_discrepancy()?,
        mc_decoherence_check(opts)?,
        mc_probability_check(opts)?,
        mc_bell_measurement_check(opts)?,
    ];
    Ok(Report { checks })
}
