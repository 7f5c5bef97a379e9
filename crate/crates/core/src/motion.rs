//! Thermal motion of the atoms in harmonic dipole traps and the resulting
//! loss of interference contrast between photons emitted by the two atoms.
//!
//! All motional phases are expressed through the dimensionless products
//! `k·δr`, so the optical wavelength never appears: with the recoil frequency
//! `ν_R = ħk²/(4πm)` the thermal variance along an axis of frequency `ν` is
//! `k²⟨δr²⟩ = 2ν_R·k_B·T / (h·ν²)` in the classical limit and
//! `(ν_R/ν)·coth(hν / 2k_BT)` for the full oscillator.
//!
//! Geometry: the exciting laser propagates along `x` with `|k_L| = |k|`, the
//! detected photon direction `(θ, φ)` is measured from the `z` axis of the
//! collection lens, and the emitting dipole points along `x`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub const THETA0_MIN: f64 = 0.05;
pub const THETA0_MAX: f64 = std::f64::consts::FRAC_PI_2;

/// Convergence target for cone quadratures.
pub const QUADRATURE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams {
    /// Transverse (x, y) oscillation frequency, Hz.
    pub nu_perp: f64,
    /// Longitudinal (z) oscillation frequency, Hz.
    pub nu_par: f64,
    /// Recoil frequency `E_R / h`, Hz.
    pub nu_recoil: f64,
    /// Kelvin.
    pub temperature: f64,
}

impl TrapParams {
    pub fn new(nu_perp: f64, nu_par: f64, nu_recoil: f64, temperature: f64) -> Result<Self> {
        for (name, v) in [("nu_perp", nu_perp), ("nu_par", nu_par), ("nu_recoil", nu_recoil)] {
            if !v.is_finite() {
                return Err(Error::NonFinite { name, value: v });
            }
            if v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "frequencies must be positive",
                });
            }
        }
        if !temperature.is_finite() {
            return Err(Error::NonFinite { name: "temperature", value: temperature });
        }
        if temperature < 0.0 {
            return Err(Error::InvalidParameter {
                name: "temperature",
                value: temperature,
                reason: "temperature must be non-negative",
            });
        }
        Ok(Self { nu_perp, nu_par, nu_recoil, temperature })
    }

    /// Rb-87 in a tightly focused dipole trap: ν⊥ = 200 kHz, ν‖ = 50 kHz, ν_R = 3.6 kHz.
    pub fn rb87(temperature: f64) -> Result<Self> {
        Self::new(200e3, 50e3, 3.6e3, temperature)
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(self.nu_perp, self.nu_par, self.nu_recoil, temperature)
    }

    pub fn axis_frequency(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X | Axis::Y => self.nu_perp,
            Axis::Z => self.nu_par,
        }
    }
}

/// Collection optics: half-angle of the detection cone about `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticsParams {
    theta0: f64,
}

impl OpticsParams {
    pub fn new(theta0: f64) -> Result<Self> {
        if !theta0.is_finite() {
            return Err(Error::NonFinite { name: "theta0", value: theta0 });
        }
        if !(THETA0_MIN..=THETA0_MAX).contains(&theta0) {
            return Err(Error::InvalidParameter {
                name: "theta0",
                value: theta0,
                reason: "aperture half-angle must lie in [0.05, pi/2]",
            });
        }
        Ok(Self { theta0 })
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }
}

impl Default for OpticsParams {
    fn default() -> Self {
        Self { theta0: std::f64::consts::FRAC_PI_4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// How the thermal position variance is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceMode {
    /// High-temperature limit `k_BT / (mω²)`.
    #[default]
    Classical,
    /// `(ħ/2mω)·coth(ħω/2k_BT)`, including zero-point motion.
    QuantumExact,
}

/// Thermal variance of `k·δr` along `axis` (dimensionless: `k²⟨δr²⟩`).
pub fn axis_variance(trap: &TrapParams, axis: Axis, mode: VarianceMode) -> f64 {
    let nu = trap.axis_frequency(axis);
    let t = trap.temperature;
    match mode {
        VarianceMode::Classical => 2.0 * trap.nu_recoil * BOLTZMANN * t / (PLANCK * nu * nu),
        VarianceMode::QuantumExact => {
            let zero_point = trap.nu_recoil / nu;
            if t == 0.0 {
                zero_point
            } else {
                let x = PLANCK * nu / (2.0 * BOLTZMANN * t);
                zero_point / x.tanh()
            }
        }
    }
}

/// Per-axis variances `[x, y, z]` of `k·δr`.
pub fn axis_variances(trap: &TrapParams, mode: VarianceMode) -> [f64; 3] {
    [Axis::X, Axis::Y, Axis::Z].map(|a| axis_variance(trap, a, mode))
}

/// Unit-`k` recoil vector `q/k = x̂ − k̂` for a photon emitted along `(θ, φ)`.
pub fn recoil_direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [1.0 - st * cp, -st * sp, -ct]
}

/// Mean-square motional phase `⟨(q·δr)²⟩_T` of one atom for photon direction `(θ, φ)`.
pub fn mean_square_phase(theta: f64, phi: f64, trap: &TrapParams, mode: VarianceMode) -> f64 {
    let q = recoil_direction(theta, phi);
    let v = axis_variances(trap, mode);
    q.iter().zip(v.iter()).map(|(qi, vi)| qi * qi * vi).sum()
}

/// Unnormalized x-dipole emission pattern, `1 − sin²θ·cos²φ`.
#[inline]
pub fn dipole_weight(theta: f64, phi: f64) -> f64 {
    let s = theta.sin() * phi.cos();
    1.0 - s * s
}

/// Normalizing constant of the dipole pattern over a cone of half-angle `theta0`.
pub fn normalization_c0(theta0: f64) -> f64 {
    let c = theta0.cos();
    1.0 / ((4.0 * PI / 3.0) * (1.0 - (3.0 * c + c * c * c) / 4.0))
}

/// Probability density (per steradian) of the detected photon direction.
pub fn angular_pdf(theta: f64, phi: f64, optics: &OpticsParams) -> Result<f64> {
    let theta0 = optics.theta0();
    if !(0.0..=theta0).contains(&theta) {
        return Err(Error::OutsideCone { theta, theta0 });
    }
    Ok(normalization_c0(theta0) * dipole_weight(theta, phi))
}

/// Average of `f(θ, φ)` over detected photon directions.
pub fn cone_average<F>(optics: &OpticsParams, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let theta0 = optics.theta0();
    let c0 = normalization_c0(theta0);
    quadrature::integrate_cap(theta0, QUADRATURE_TOL, |t, p| c0 * dipole_weight(t, p) * f(t, p))
}

/// Weights of transverse and longitudinal motion in the effective trap frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApertureCoefficients {
    pub a_perp: f64,
    pub a_par: f64,
}

pub fn aperture_coefficients(optics: &OpticsParams) -> ApertureCoefficients {
    let theta0 = optics.theta0();
    let c = theta0.cos();
    let c3 = c * c * c;
    let c5 = c3 * c * c;
    let c0 = normalization_c0(theta0);
    ApertureCoefficients {
        a_perp: 1.0 + (4.0 * PI * c0 / 5.0) * (1.0 - (5.0 * c - c5) / 4.0),
        a_par: (8.0 * PI * c0 / 15.0) * (1.0 - (5.0 * c3 + 3.0 * c5) / 8.0),
    }
}

/// Effective oscillation frequency, `ν_eff⁻² = A‖/ν‖² + A⊥/ν⊥²`.
pub fn nu_eff(trap: &TrapParams, optics: &OpticsParams) -> f64 {
    let a = aperture_coefficients(optics);
    let inv = a.a_par / (trap.nu_par * trap.nu_par) + a.a_perp / (trap.nu_perp * trap.nu_perp);
    inv.sqrt().recip()
}

/// Critical temperature `k_B·T_cr = h·ν_eff² / (2ν_R)`, kelvin.
pub fn t_crit(trap: &TrapParams, optics: &OpticsParams) -> f64 {
    let nu = nu_eff(trap, optics);
    PLANCK * nu * nu / (2.0 * trap.nu_recoil * BOLTZMANN)
}

/// Temperature at a given fraction of the critical temperature.
pub fn temperature_for_ratio(trap: &TrapParams, optics: &OpticsParams, t_over_tcr: f64) -> f64 {
    t_over_tcr * t_crit(trap, optics)
}

/// Decoherence parameter from the exponential-of-average approximation.
pub fn d_approx(trap: &TrapParams, optics: &OpticsParams) -> f64 {
    -(-trap.temperature / t_crit(trap, optics)).exp_m1()
}

/// Decoherence parameter `1 − ⟨exp(−⟨(q·δr)²⟩_T)⟩_q` by cone quadrature.
pub fn d_exact(trap: &TrapParams, optics: &OpticsParams, mode: VarianceMode) -> Result<f64> {
    let v = axis_variances(trap, mode);
    let coherence = cone_average(optics, |t, p| {
        let q = recoil_direction(t, p);
        let msp: f64 = q.iter().zip(v.iter()).map(|(qi, vi)| qi * qi * vi).sum();
        (-msp).exp()
    })?;
    Ok(1.0 - coherence)
}

/// Cone average of the mean-square phase itself, `⟨⟨(q·δr)²⟩_T⟩_q`.
pub fn averaged_mean_square_phase(
    trap: &TrapParams,
    optics: &OpticsParams,
    mode: VarianceMode,
) -> Result<f64> {
    cone_average(optics, |t, p| mean_square_phase(t, p, trap, mode))
}

/// Where the undetected photon of a double excitation may go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissedPhoton {
    /// Dipole pattern over the full sphere.
    #[default]
    FullSphere,
    /// Dipole pattern restricted to directions outside the collection cone.
    ConeComplement,
}

impl MissedPhoton {
    /// Range of `cos θ` open to the missed photon.
    pub fn cos_range(self, optics: &OpticsParams) -> (f64, f64) {
        match self {
            MissedPhoton::FullSphere => (-1.0, 1.0),
            MissedPhoton::ConeComplement => (-1.0, optics.theta0().cos()),
        }
    }
}

/// Quadrature value of `⟨|f|²⟩_T` for the double-excitation amplitude
/// `f = e^{i(q·δr₁ + q′·δr₂)} + e^{i(q·δr₂ + q′·δr₁)}`, averaged over the
/// detected direction `q`, the missed direction `q′` and thermal motion.
pub fn f_squared_expected(
    trap: &TrapParams,
    optics: &OpticsParams,
    mode: VarianceMode,
    missed: MissedPhoton,
) -> Result<f64> {
    let v = axis_variances(trap, mode);
    let (u_lo, u_hi) = missed.cos_range(optics);
    let tol = 1e-9;
    let missed_norm = quadrature::integrate_band(u_lo, u_hi, tol, dipole_weight)?;
    let failure = std::cell::Cell::new(None);
    let cross = quadrature::integrate_band(u_lo, u_hi, tol, |tm, pm| {
        let qm = recoil_direction(tm, pm);
        let inner = cone_average(optics, |t, p| {
            let q = recoil_direction(t, p);
            // δr₁ − δr₂ has twice the single-atom variance on each axis.
            let s: f64 = (0..3).map(|i| (q[i] - qm[i]).powi(2) * v[i]).sum();
            (-s).exp()
        });
        match inner {
            Ok(x) => dipole_weight(tm, pm) * x,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    });
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(2.0 + 2.0 * cross? / missed_norm)
}
