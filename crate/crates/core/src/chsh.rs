//! CHSH analysis of the heralded Bell states: outcome probabilities after
//! local Raman analysis rotations, correlation functions, S-values, angle
//! sweeps and the effect of double excitation.
//!
//! Outcome variables take the value `+1` for `|g⟩` and `−1` for `|e⟩`.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rayon::prelude::*;

use crate::cxmat::{Basis, ProbabilityMatrix4};
use crate::dephasing::{averaged_sqmod, Stage};
use crate::error::{Error, Result};
use crate::gates::{b2_matrix, bell_components, raman_matrix, RamanAngles};

/// Motional decoherence parameter `d ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Decoherence(f64);

impl Decoherence {
    pub const NONE: Decoherence = Decoherence(0.0);
    pub const FULL: Decoherence = Decoherence(1.0);

    pub fn new(d: f64) -> Result<Self> {
        if !d.is_finite() {
            return Err(Error::NonFinite { name: "d", value: d });
        }
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::InvalidParameter {
                name: "d",
                value: d,
                reason: "decoherence must lie in [0, 1]",
            });
        }
        Ok(Self(d))
    }

    /// `1 − e^{−T/T_cr}`.
    pub fn from_temperature_ratio(t_over_tcr: f64) -> Result<Self> {
        if !t_over_tcr.is_finite() || t_over_tcr < 0.0 {
            return Err(Error::InvalidParameter {
                name: "t_over_tcr",
                value: t_over_tcr,
                reason: "temperature ratio must be finite and non-negative",
            });
        }
        Ok(Self(-(-t_over_tcr).exp_m1()))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 − d`, the surviving interference weight.
    pub fn coherence(self) -> f64 {
        1.0 - self.0
    }
}

/// Double-excitation weight `ξ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ScatterRatio(f64);

impl ScatterRatio {
    pub const ZERO: ScatterRatio = ScatterRatio(0.0);

    pub fn new(xi: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::NonFinite { name: "xi", value: xi });
        }
        if xi < 0.0 {
            return Err(Error::InvalidParameter {
                name: "xi",
                value: xi,
                reason: "scatter ratio must be non-negative",
            });
        }
        Ok(Self(xi))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Analysis angles `(θ₁, θ₂)` and `(θ₁′, θ₂′)` entering one S-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshAngles {
    pub theta1: f64,
    pub theta2: f64,
    pub theta1p: f64,
    pub theta2p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PatternKind {
    /// `(0, x, 2x, 3x)`.
    #[default]
    Standard,
    /// `(0, −x, 2x, −3x)`.
    Mirrored,
}

/// One-parameter family of CHSH angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePattern {
    pub x: f64,
    pub kind: PatternKind,
}

impl AnglePattern {
    pub fn new(x: f64, kind: PatternKind) -> Self {
        Self { x, kind }
    }

    pub fn angles(&self) -> ChshAngles {
        let x = self.x;
        match self.kind {
            PatternKind::Standard => ChshAngles { theta1: 0.0, theta2: x, theta1p: 2.0 * x, theta2p: 3.0 * x },
            PatternKind::Mirrored => ChshAngles { theta1: 0.0, theta2: -x, theta1p: 2.0 * x, theta2p: -3.0 * x },
        }
    }
}

/// Pairs of initial states whose S-values are related by `S_gg = −S_ge`
/// and `S_ee = −S_eg`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    GgGe,
    EgEe,
}

impl Family {
    pub fn members(self) -> [Basis; 2] {
        match self {
            Family::GgGe => [Basis::GG, Basis::GE],
            Family::EgEe => [Basis::EG, Basis::EE],
        }
    }

    /// The family that can exceed the classical bound for a given pattern.
    pub fn violating(kind: PatternKind) -> Family {
        match kind {
            PatternKind::Standard => Family::GgGe,
            PatternKind::Mirrored => Family::EgEe,
        }
    }

    pub fn other(self) -> Family {
        match self {
            Family::GgGe => Family::EgEe,
            Family::EgEe => Family::GgGe,
        }
    }
}

/// Outcome probabilities from the printed closed forms; row = initial state.
pub fn probabilities_closed_form(d: Decoherence, theta1: f64, theta2: f64) -> ProbabilityMatrix4 {
    let q = d.value() * (2.0 * theta1).sin() * (2.0 * theta2).sin();
    let diff = theta1 - theta2;
    let sum = theta1 + theta2;
    let a = 0.5 * (diff.sin().powi(2) + 0.5 * q);
    let b = 0.5 * (diff.cos().powi(2) - 0.5 * q);
    let c = 0.5 * (sum.cos().powi(2) + 0.5 * q);
    let e = 0.5 * (sum.sin().powi(2) - 0.5 * q);
    ProbabilityMatrix4::from_rows([[a, b, b, a], [b, a, a, b], [c, e, e, c], [e, c, c, e]])
}

/// Outcome probabilities from the motion-averaged product `[B][R]`.
pub fn probabilities_first_principles(d: Decoherence, theta1: f64, theta2: f64) -> ProbabilityMatrix4 {
    let stages = [
        Stage::dephased(bell_components().to_vec()),
        Stage::fixed(raman_matrix(RamanAngles::new(theta1, theta2))),
    ];
    averaged_sqmod(&stages, d.coherence())
}

/// Correlation `⟨ξ₁ξ₂⟩ = P_gg + P_ee − P_ge − P_eg` of one probability row.
pub fn correlation(row: [f64; 4]) -> Result<f64> {
    let sum: f64 = row.iter().sum();
    if !sum.is_finite() || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::RowNotNormalized { sum });
    }
    Ok(row[0] + row[3] - row[1] - row[2])
}

/// Correlations for all four initial states at one angle pair.
pub fn correlations(d: Decoherence, theta1: f64, theta2: f64) -> [f64; 4] {
    let p = probabilities_first_principles(d, theta1, theta2);
    Basis::ALL.map(|b| {
        let r = p.row(b);
        r[0] + r[3] - r[1] - r[2]
    })
}

fn chsh_combine(e: impl Fn(f64, f64) -> [f64; 4], a: &ChshAngles) -> [f64; 4] {
    let e11 = e(a.theta1, a.theta2);
    let e12 = e(a.theta1, a.theta2p);
    let e21 = e(a.theta1p, a.theta2);
    let e22 = e(a.theta1p, a.theta2p);
    std::array::from_fn(|i| e11[i] - e12[i] + e21[i] + e22[i])
}

/// S-values for all four initial states, indexed by [`Basis::index`].
pub fn chsh_s_all(angles: &ChshAngles, d: Decoherence) -> [f64; 4] {
    chsh_combine(|t1, t2| correlations(d, t1, t2), angles)
}

/// `S = E(θ₁,θ₂) − E(θ₁,θ₂′) + E(θ₁′,θ₂) + E(θ₁′,θ₂′)` for one initial state.
pub fn chsh_s(initial: Basis, angles: &ChshAngles, d: Decoherence) -> f64 {
    chsh_s_all(angles, d)[initial.index()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    /// S-values indexed by initial state `(gg, ge, eg, ee)`.
    pub s: [f64; 4],
}

/// Evenly spaced grid of `n ≥ 2` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// S-values over an x-grid for every initial state.
pub fn sweep_s(kind: PatternKind, xs: &[f64], d: Decoherence) -> Vec<SweepRow> {
    xs.par_iter()
        .map(|&x| SweepRow { x, s: chsh_s_all(&AnglePattern::new(x, kind).angles(), d) })
        .collect()
}

/// Grid points for maximizations over `x ∈ [0, π/2]`.
pub const MAX_GRID: usize = 2000;
/// Width to which golden-section refinement narrows the maximizer.
pub const MAX_XTOL: f64 = 1e-8;

/// Location and value of `max_x |f(x)|` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Grid scan followed by golden-section refinement around the best point.
pub fn maximize_abs<F: Fn(f64) -> f64>(lo: f64, hi: f64, f: F) -> Maximum {
    let xs = linspace(lo, hi, MAX_GRID + 1);
    let vals: Vec<f64> = xs.iter().map(|&x| f(x).abs()).collect();
    let (best, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let mut best_pt = Maximum { x: xs[best], value: vals[best] };
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(MAX_GRID)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut dd = a + g * (b - a);
    let mut fc = f(c).abs();
    let mut fd = f(dd).abs();
    while (b - a).abs() > MAX_XTOL {
        if fc > fd {
            b = dd;
            dd = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c).abs();
        } else {
            a = c;
            c = dd;
            fc = fd;
            dd = a + g * (b - a);
            fd = f(dd).abs();
        }
    }
    let xm = 0.5 * (a + b);
    let fm = f(xm).abs();
    if fm > best_pt.value {
        best_pt = Maximum { x: xm, value: fm };
    }
    best_pt
}

/// Maxima of `|S|` over `x ∈ [0, π/2]` for both families of a pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMax {
    pub violating: Maximum,
    pub other: Maximum,
}

fn family_max(kind: PatternKind, family: Family, d: Decoherence) -> Maximum {
    // Within a family the two S-values are negatives of each other, so the
    // first member suffices.
    let idx = family.members()[0].index();
    maximize_abs(0.0, FRAC_PI_2, |x| chsh_s_all(&AnglePattern::new(x, kind).angles(), d)[idx])
}

pub fn s_max(d: Decoherence, kind: PatternKind) -> SMax {
    let fam = Family::violating(kind);
    SMax { violating: family_max(kind, fam, d), other: family_max(kind, fam.other(), d) }
}

/// Largest `|S|` of the violating family at `T/T_cr`, with `d = 1 − e^{−T/T_cr}`.
pub fn s_max_at_ratio(t_over_tcr: f64, mode: ThresholdMode) -> Result<f64> {
    let d = Decoherence::from_temperature_ratio(t_over_tcr)?;
    Ok(match mode {
        ThresholdMode::FixedX(x) => {
            let kind = PatternKind::Standard;
            let idx = Family::violating(kind).members()[0].index();
            chsh_s_all(&AnglePattern::new(x, kind).angles(), d)[idx].abs()
        }
        ThresholdMode::Optimized(kind) => s_max(d, kind).violating.value,
    })
}

/// `T/T_cr` at which the largest violation falls to `|S| = 2`, by bisection to 1e-9.
pub fn violation_crossing(mode: ThresholdMode) -> Result<f64> {
    // Past the crossing the optimized curve sits on |S| = 2 (x = 0 gives
    // exactly 2 at any d), so rounding above 2 must not count as violation.
    let excess = |t: f64| s_max_at_ratio(t, mode).map(|s| s - 2.0 - 1e-12);
    if excess(0.0)? <= 0.0 {
        return Err(Error::NoBracket("no violation at zero temperature"));
    }
    let mut hi = 0.5;
    while excess(hi)? > 0.0 {
        hi *= 2.0;
        if hi > 64.0 {
            return Err(Error::NoBracket("violation persists at every temperature searched"));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterForm {
    /// The published correlation formula, evaluated verbatim.
    Printed,
    /// Single- and double-excitation branches propagated through `[R]`.
    FirstPrinciples,
}

/// Outcome probabilities including the double-excitation branch, with the
/// two field states treated as orthogonal.
pub fn scatter_probabilities(d: Decoherence, xi: ScatterRatio, theta1: f64, theta2: f64) -> ProbabilityMatrix4 {
    let r = raman_matrix(RamanAngles::new(theta1, theta2));
    let single = averaged_sqmod(&[Stage::dephased(bell_components().to_vec()), Stage::fixed(r)], d.coherence());
    let b2 = b2_matrix(xi.value()).expect("validated scatter ratio");
    let double = (b2 * r).elementwise_sqmod();
    (single + double).scaled(1.0 / (1.0 + 2.0 * xi.value()))
}

/// Correlation for initial `|gg⟩` in the presence of double excitation.
pub fn e_gg_scatter(d: Decoherence, xi: ScatterRatio, theta1: f64, theta2: f64, form: ScatterForm) -> f64 {
    match form {
        ScatterForm::Printed => {
            let ss = (2.0 * theta1).sin() * (2.0 * theta2).sin();
            let cc = (2.0 * theta1).cos() * (2.0 * theta2).cos();
            -d.coherence() * ss - cc / (1.0 + 2.0 * xi.value())
        }
        ScatterForm::FirstPrinciples => {
            let r = scatter_probabilities(d, xi, theta1, theta2).row(Basis::GG);
            r[0] + r[3] - r[1] - r[2]
        }
    }
}

pub fn s_gg_scatter(d: Decoherence, xi: ScatterRatio, pattern: AnglePattern, form: ScatterForm) -> f64 {
    let a = pattern.angles();
    let e = |t1, t2| e_gg_scatter(d, xi, t1, t2, form);
    e(a.theta1, a.theta2) - e(a.theta1, a.theta2p) + e(a.theta1p, a.theta2) + e(a.theta1p, a.theta2p)
}

/// Where the threshold search evaluates `|S_gg|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    FixedX(f64),
    /// Maximize over `x ∈ [0, π/2]` for each `ξ`.
    Optimized(PatternKind),
}

/// Largest `|S_gg|` at a given `ξ` for the printed correlation formula.
pub fn scatter_s_max(d: Decoherence, xi: ScatterRatio, mode: ThresholdMode) -> f64 {
    match mode {
        ThresholdMode::FixedX(x) => {
            s_gg_scatter(d, xi, AnglePattern::new(x, PatternKind::Standard), ScatterForm::Printed).abs()
        }
        ThresholdMode::Optimized(kind) => {
            maximize_abs(0.0, FRAC_PI_2, |x| {
                s_gg_scatter(d, xi, AnglePattern::new(x, kind), ScatterForm::Printed)
            })
            .value
        }
    }
}

/// Largest `ξ` searched for a threshold.
pub const XI_SEARCH_MAX: f64 = 1e3;

/// `ξ*` where `max |S_gg|` (printed form) falls to 2, by bisection to 1e-10.
pub fn scatter_threshold(d: Decoherence, mode: ThresholdMode) -> Result<f64> {
    let excess = |xi: f64| scatter_s_max(d, ScatterRatio(xi), mode) - 2.0;
    if excess(0.0) <= 0.0 {
        return Err(Error::NoBracket("no violation even without double excitation"));
    }
    let mut hi = 0.125;
    while excess(hi) > 0.0 {
        hi *= 2.0;
        if hi > XI_SEARCH_MAX {
            return Err(Error::NoBracket("violation persists for every scatter ratio searched"));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Tsirelson bound `2√2`.
pub const TSIRELSON: f64 = 2.0 * SQRT_2;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_8, PI};

    fn dec(d: f64) -> Decoherence {
        Decoherence::new(d).unwrap()
    }

    #[test]
    fn newtype_validation() {
        assert!(Decoherence::new(-0.1).is_err());
        assert!(Decoherence::new(1.1).is_err());
        assert!(Decoherence::new(f64::NAN).is_err());
        assert!(ScatterRatio::new(-1e-3).is_err());
        assert!(ScatterRatio::new(f64::INFINITY).is_err());
        let d = Decoherence::from_temperature_ratio(1.0).unwrap();
        assert!((d.value() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn singlet_unchanged_at_zero_angles() {
        let p = probabilities_closed_form(Decoherence::NONE, 0.0, 0.0);
        assert_eq!(p.row(Basis::GG), [0.0, 0.5, 0.5, 0.0]);
        let f = probabilities_first_principles(Decoherence::NONE, 0.0, 0.0);
        assert!(f.max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn classical_limit_gg_probability() {
        for &(t1, t2) in &[(0.3, 1.1), (-0.8, 0.25), (2.0, 2.9)] {
            let p = probabilities_closed_form(Decoherence::FULL, t1, t2);
            let expected = 0.5 * (f64::sin(t1).powi(2) * f64::cos(t2).powi(2) + f64::sin(t2).powi(2) * f64::cos(t1).powi(2));
            assert!((p.get(Basis::GG, Basis::GG) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn correlation_examples() {
        for &(t1, t2) in &[(0.2, 0.9), (1.3, -0.4)] {
            let p = probabilities_first_principles(Decoherence::NONE, t1, t2);
            let ege = correlation(p.row(Basis::GE)).unwrap();
            let eeg = correlation(p.row(Basis::EG)).unwrap();
            assert!((ege - (2.0 * (t1 - t2)).cos()).abs() < 1e-14);
            assert!((eeg - (2.0 * (t1 + t2)).cos()).abs() < 1e-14);
        }
        assert_eq!(correlation([0.25; 4]).unwrap(), 0.0);
        assert!(matches!(correlation([0.3; 4]), Err(Error::RowNotNormalized { .. })));
    }

    #[test]
    fn chsh_examples() {
        let a = AnglePattern::new(FRAC_PI_8, PatternKind::Standard).angles();
        assert!((chsh_s(Basis::GE, &a, Decoherence::NONE) - TSIRELSON).abs() < 1e-12);
        let d = Decoherence::from_temperature_ratio(0.5).unwrap();
        let expected = TSIRELSON - SQRT_2 * d.value();
        assert!((chsh_s(Basis::GE, &a, d) - expected).abs() < 1e-12);
        assert!((expected - 2.2718).abs() < 1e-3);
        assert!(chsh_s(Basis::EG, &a, Decoherence::NONE).abs() < 1e-12);
    }

    #[test]
    fn chsh_closed_form_in_pattern_parameter() {
        for &x in &[0.1, 0.37, 0.9, 1.4] {
            for &dv in &[0.0, 0.3, 0.8] {
                let a = AnglePattern::new(x, PatternKind::Standard).angles();
                let s = chsh_s(Basis::GE, &a, dec(dv));
                let closed = 3.0 * f64::cos(2.0 * x) - f64::cos(6.0 * x)
                    - dv * f64::sin(4.0 * x) * (f64::sin(2.0 * x) + f64::sin(6.0 * x));
                assert!((s - closed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sweep_families() {
        let d = Decoherence::from_temperature_ratio(0.5).unwrap();
        let xs = linspace(0.0, FRAC_PI_2, 401);
        let rows = sweep_s(PatternKind::Standard, &xs, d);
        assert!(rows.windows(2).all(|w| w[0].x < w[1].x));
        let ge_max = rows.iter().map(|r| r.s[1]).fold(f64::NEG_INFINITY, f64::max);
        assert!(ge_max > 2.0);
        assert!(rows.iter().all(|r| r.s[2].abs() <= 2.0 + 1e-12 && r.s[3].abs() <= 2.0 + 1e-12));

        let mirrored = sweep_s(PatternKind::Mirrored, &xs, d);
        assert!(mirrored.iter().any(|r| r.s[2].abs() > 2.0));
        assert!(mirrored.iter().all(|r| r.s[0].abs() <= 2.0 + 1e-12));

        let classical = sweep_s(PatternKind::Standard, &xs, Decoherence::FULL);
        assert!(classical.iter().all(|r| r.s.iter().all(|s| s.abs() <= 2.0 + 1e-12)));
    }

    #[test]
    fn s_max_examples() {
        let m = s_max(Decoherence::NONE, PatternKind::Standard);
        assert!((m.violating.value - TSIRELSON).abs() < 1e-6);
        assert!(m.other.value <= 2.0 + 1e-12);
        let mut prev = f64::INFINITY;
        for i in 0..=10 {
            let v = s_max(dec(f64::from(i) / 10.0), PatternKind::Standard).violating.value;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn crossing_at_pi_over_8() {
        // 2√2 − √2·d = 2 gives d = 2 − √2.
        let t = violation_crossing(ThresholdMode::FixedX(FRAC_PI_8)).unwrap();
        assert!((t + (SQRT_2 - 1.0).ln()).abs() < 1e-8);
    }

    #[test]
    fn scatter_forms_agree_without_double_excitation() {
        for &(t1, t2) in &[(0.0f64, 0.3f64), (0.7, -1.1), (1.5, 2.2)] {
            for &dv in &[0.0, 0.4, 1.0] {
                let d = dec(dv);
                let reference = -(2.0 * (t1 - t2)).cos() + dv * (2.0 * t1).sin() * (2.0 * t2).sin();
                for form in [ScatterForm::Printed, ScatterForm::FirstPrinciples] {
                    let e = e_gg_scatter(d, ScatterRatio::ZERO, t1, t2, form);
                    assert!((e - reference).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn printed_scatter_at_pi_over_8() {
        let pat = AnglePattern::new(FRAC_PI_8, PatternKind::Standard);
        for &(dv, xi) in &[(0.0, 0.0), (0.39, 0.05), (0.7, 1.0)] {
            let s = s_gg_scatter(dec(dv), ScatterRatio::new(xi).unwrap(), pat, ScatterForm::Printed);
            let expected = -SQRT_2 * ((1.0 - dv) + 1.0 / (1.0 + 2.0 * xi));
            assert!((s - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn first_principles_scatter_closed_form() {
        let d = dec(0.35);
        let xi = ScatterRatio::new(0.2).unwrap();
        for &(t1, t2) in &[(0.3f64, 0.8f64), (-1.0, 0.45)] {
            let ss = (2.0 * t1).sin() * (2.0 * t2).sin();
            let cc = (2.0 * t1).cos() * (2.0 * t2).cos();
            let expected = (-(0.65) * ss + (0.4 - 1.0) * cc) / 1.4;
            let e = e_gg_scatter(d, xi, t1, t2, ScatterForm::FirstPrinciples);
            assert!((e - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn threshold_examples() {
        let d = Decoherence::from_temperature_ratio(0.5).unwrap();
        let fixed = scatter_threshold(d, ThresholdMode::FixedX(FRAC_PI_8)).unwrap();
        let exact = 0.5 * (1.0 / (SQRT_2 - (-0.5f64).exp()) - 1.0);
        assert!((fixed - exact).abs() < 1e-8);
        assert!((fixed - 0.119).abs() < 0.005);
        let opt = scatter_threshold(d, ThresholdMode::Optimized(PatternKind::Standard)).unwrap();
        assert!((0.10..=0.20).contains(&opt), "{opt}");
        let cold = scatter_threshold(Decoherence::NONE, ThresholdMode::FixedX(FRAC_PI_8)).unwrap();
        assert!((cold - 0.5 * (1.0 / (SQRT_2 - 1.0) - 1.0)).abs() < 1e-8);
        assert!(scatter_threshold(Decoherence::FULL, ThresholdMode::FixedX(FRAC_PI_8)).is_err());
    }

    #[test]
    fn large_xi_never_violates() {
        let d = Decoherence::from_temperature_ratio(0.5).unwrap();
        let xi = ScatterRatio::new(1.0).unwrap();
        let m = scatter_s_max(d, xi, ThresholdMode::Optimized(PatternKind::Standard));
        assert!(m < 2.0);
    }

    fn angle() -> impl Strategy<Value = f64> {
        -2.0 * PI..2.0 * PI
    }

    proptest! {
        #[test]
        fn transcription_equivalence(dv in 0.0..=1.0f64, t1 in angle(), t2 in angle()) {
            let d = dec(dv);
            let a = probabilities_closed_form(d, t1, t2);
            let b = probabilities_first_principles(d, t1, t2);
            prop_assert!(a.max_abs_diff(&b) < 1e-12);
        }

        #[test]
        fn rows_are_stochastic(dv in 0.0..=1.0f64, t1 in angle(), t2 in angle()) {
            let p = probabilities_closed_form(dec(dv), t1, t2);
            prop_assert!(p.row_sum_defect() < 1e-12);
            prop_assert!(p.min_entry() >= -1e-15 && p.max_entry() <= 1.0 + 1e-15);
        }

        #[test]
        fn correlation_antisymmetry(dv in 0.0..=1.0f64, t1 in angle(), t2 in angle()) {
            let e = correlations(dec(dv), t1, t2);
            prop_assert!((e[0] + e[1]).abs() < 1e-12);
            prop_assert!((e[2] + e[3]).abs() < 1e-12);
        }

        #[test]
        fn tsirelson_bound(dv in 0.0..=1.0f64, a in angle(), b in angle(), c in angle(), e in angle()) {
            let s = chsh_s_all(&ChshAngles { theta1: a, theta2: b, theta1p: c, theta2p: e }, dec(dv));
            prop_assert!(s.iter().all(|v| v.abs() <= TSIRELSON + 1e-12));
        }

        #[test]
        fn pi_shift_invariance(dv in 0.0..=1.0f64, a in angle(), b in angle(), c in angle(), e in angle()) {
            let base = ChshAngles { theta1: a, theta2: b, theta1p: c, theta2p: e };
            let shifted = ChshAngles { theta1: a + PI, theta1p: c + PI, ..base };
            let s0 = chsh_s_all(&base, dec(dv));
            let s1 = chsh_s_all(&shifted, dec(dv));
            for i in 0..4 {
                prop_assert!((s0[i] - s1[i]).abs() < 1e-12);
            }
        }

        #[test]
        fn printed_scatter_cold_limit(t1 in angle(), t2 in angle()) {
            let e = e_gg_scatter(Decoherence::NONE, ScatterRatio::ZERO, t1, t2, ScatterForm::Printed);
            prop_assert!((e + (2.0 * (t1 - t2)).cos()).abs() < 1e-12);
        }

        #[test]
        fn scatter_gap_bounded(dv in 0.0..=1.0f64, xi in 0.0..=0.05f64, t1 in angle(), t2 in angle()) {
            let d = dec(dv);
            let x = ScatterRatio::new(xi).unwrap();
            let a = e_gg_scatter(d, x, t1, t2, ScatterForm::Printed);
            let b = e_gg_scatter(d, x, t1, t2, ScatterForm::FirstPrinciples);
            prop_assert!((a - b).abs() <= 2.0 * xi / (1.0 + 2.0 * xi) + 1e-12);
            prop_assert!((a - b).abs() <= 0.1);
        }

        #[test]
        fn scatter_rows_stochastic(dv in 0.0..=1.0f64, xi in 0.0..2.0f64, t1 in angle(), t2 in angle()) {
            let p = scatter_probabilities(dec(dv), ScatterRatio::new(xi).unwrap(), t1, t2);
            prop_assert!(p.row_sum_defect() < 1e-12);
        }
    }
}
