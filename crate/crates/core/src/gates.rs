//! Operator matrices for heralded two-atom logic.
//!
//! The Bell operator maps each factorized state to a maximally entangled
//! state when a single scattered photon is detected and its emitter cannot be
//! identified. Local operations are Raman rotations dressed with diagonal
//! phase transforms; two such local layers around the Bell operator give a
//! CNOT.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use crate::cxmat::{cis, Complex, Matrix2, Matrix4};
use crate::error::{Error, Result};

/// Motional phases `q·δr₁` and `q·δr₂` (radians) picked up by the photon
/// emitted from atom 1 or atom 2. `(0, 0)` is the Lamb-Dicke limit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionPhases {
    pub p1: f64,
    pub p2: f64,
}

impl MotionPhases {
    pub const REST: MotionPhases = MotionPhases { p1: 0.0, p2: 0.0 };

    pub fn new(p1: f64, p2: f64) -> Self {
        Self { p1, p2 }
    }
}

/// Every phase entering the unreduced Bell operator.
///
/// The origin sits on atom 1 and both excitation beams share the wave vector
/// along the atom separation, so the geometric phase `(k_e + k_g)·(r₂ − r₁)`
/// is split equally between the `g` and `e` laser phases of atom 2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneralBellConfig {
    /// Laser phases φ⁰ for (g, atom 1), (e, atom 1), (g, atom 2), (e, atom 2).
    pub laser_g1: f64,
    pub laser_e1: f64,
    pub laser_g2: f64,
    pub laser_e2: f64,
    /// Optical path phases `k·l₁`, `k·l₂` from each atom to the detector.
    pub path1: f64,
    pub path2: f64,
    /// Motional terms `q_α·δr_i`.
    pub motion_g1: f64,
    pub motion_e1: f64,
    pub motion_g2: f64,
    pub motion_e2: f64,
    /// `(k_e + k_g)·(r₂ − r₁)`.
    pub geometry: f64,
}

impl GeneralBellConfig {
    /// Laser phases that reproduce the canonical Bell matrix directly,
    /// given the geometric phase.
    pub fn canonical_phases(geometry: f64) -> Self {
        Self {
            laser_g2: PI - geometry / 2.0,
            laser_e2: -geometry / 2.0,
            geometry,
            ..Self::default()
        }
    }

    /// Left-hand side of the reduced orthogonality condition; Bell states are
    /// orthogonal on motional average when this equals π (mod 2π).
    pub fn orthogonality_phase(&self) -> f64 {
        self.laser_g2 - self.laser_g1 + self.laser_e2 - self.laser_e1
            + self.geometry
            + 2.0 * (self.path2 - self.path1)
    }
}

/// Raman rotation angles applied to atom 1 and atom 2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RamanAngles {
    pub theta1: f64,
    pub theta2: f64,
}

impl RamanAngles {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        Self { theta1, theta2 }
    }
}

/// Single-atom phases `ξ_{α i}`: state `|α⟩_i` acquires `e^{iξ_{α i}}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalPhases {
    pub xi_g1: f64,
    pub xi_e1: f64,
    pub xi_g2: f64,
    pub xi_e2: f64,
}

impl LocalPhases {
    pub fn new(xi_g1: f64, xi_e1: f64, xi_g2: f64, xi_e2: f64) -> Self {
        Self { xi_g1, xi_e1, xi_g2, xi_e2 }
    }

    /// Two-atom phases `ξ_{αβ} = ξ_{α1} + ξ_{β2}` in basis order.
    pub fn pair_phases(&self) -> [f64; 4] {
        [
            self.xi_g1 + self.xi_g2,
            self.xi_g1 + self.xi_e2,
            self.xi_e1 + self.xi_g2,
            self.xi_e1 + self.xi_e2,
        ]
    }
}

/// Bell operator with motional phases.
pub fn bell_matrix(m: MotionPhases) -> Matrix4 {
    let [atom1, atom2] = bell_components();
    atom1.scale(cis(m.p1)) + atom2.scale(cis(m.p2))
}

/// Split of the Bell operator by emitting atom: `B(p₁, p₂) = e^{ip₁}·A₁ + e^{ip₂}·A₂`.
///
/// `A₁` collects the transitions that flip atom 1, `A₂` those that flip atom 2.
pub fn bell_components() -> [Matrix4; 2] {
    let s = FRAC_1_SQRT_2;
    let atom1 = Matrix4::from_real([
        [0.0, 0.0, s, 0.0],
        [0.0, 0.0, 0.0, s],
        [s, 0.0, 0.0, 0.0],
        [0.0, s, 0.0, 0.0],
    ]);
    let atom2 = Matrix4::from_real([
        [0.0, -s, 0.0, 0.0],
        [s, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -s],
        [0.0, 0.0, s, 0.0],
    ]);
    [atom1, atom2]
}

/// Unreduced Bell operator with every laser, path and motional phase explicit.
pub fn bell_matrix_general(c: &GeneralBellConfig) -> Matrix4 {
    let phi_g1 = c.laser_g1;
    let phi_e1 = c.laser_e1;
    let phi_g2 = c.laser_g2 + c.geometry / 2.0;
    let phi_e2 = c.laser_e2 + c.geometry / 2.0;

    let g1 = cis(c.motion_g1 + phi_g1 + c.path1);
    let e1 = cis(c.motion_e1 + phi_e1 + c.path1);
    let g2 = cis(c.motion_g2 + phi_g2 + c.path2);
    let e2 = cis(c.motion_e2 + phi_e2 + c.path2);
    let z = Complex::new(0.0, 0.0);
    Matrix4::from_rows([
        [z, g2, g1, z],
        [e2, z, z, g1],
        [e1, z, z, g2],
        [z, e1, e2, z],
    ])
    .scale_real(FRAC_1_SQRT_2)
}

/// Overlaps `⟨B_ee|B_gg⟩` and `⟨B_eg|B_ge⟩` between rows of a Bell matrix.
pub fn orthogonality_overlaps(b: &Matrix4) -> (Complex, Complex) {
    let inner = |r: usize, s: usize| -> Complex {
        (0..4).map(|k| b.get(r, k).conj() * b.get(s, k)).sum()
    };
    (inner(3, 0), inner(2, 1))
}

/// Moduli of [`orthogonality_overlaps`]; `(0, 0)` for a proper Bell basis.
pub fn orthogonality_defect(b: &Matrix4) -> (f64, f64) {
    let (a, c) = orthogonality_overlaps(b);
    (a.norm(), c.norm())
}

/// Single-atom Raman rotation: `|g⟩ → c|g⟩ − s|e⟩`, `|e⟩ → c|e⟩ + s|g⟩`.
pub fn raman_single(theta: f64) -> Matrix2 {
    let (s, c) = theta.sin_cos();
    Matrix2::from_real([[c, -s], [s, c]])
}

/// Raman rotations on both atoms.
pub fn raman_matrix(a: RamanAngles) -> Matrix4 {
    let (s1, c1) = a.theta1.sin_cos();
    let (s2, c2) = a.theta2.sin_cos();
    Matrix4::from_real([
        [c1 * c2, -c1 * s2, -s1 * c2, s1 * s2],
        [c1 * s2, c1 * c2, -s1 * s2, -s1 * c2],
        [s1 * c2, -s1 * s2, c1 * c2, -c1 * s2],
        [s1 * s2, s1 * c2, c1 * s2, c1 * c2],
    ])
}

pub fn phase_matrix(x: LocalPhases) -> Matrix4 {
    Matrix4::diag(x.pair_phases().map(cis))
}

/// Raman rotation dressed with a diagonal phase transform, `M(ξ)·R(θ)`.
pub fn local_matrix(a: RamanAngles, x: LocalPhases) -> Matrix4 {
    phase_matrix(x) * raman_matrix(a)
}

/// Local layer applied before the photon detection in the CNOT sequence.
pub fn h1() -> Matrix4 {
    phase_matrix(LocalPhases::new(0.0, 0.0, FRAC_PI_2, 0.0))
        * raman_matrix(RamanAngles::new(FRAC_PI_4, -FRAC_PI_4))
}

/// Local layer applied after the photon detection in the CNOT sequence.
pub fn h2() -> Matrix4 {
    raman_matrix(RamanAngles::new(-FRAC_PI_4, -FRAC_PI_2))
        * phase_matrix(LocalPhases::new(0.0, -FRAC_PI_2, -FRAC_PI_2, 0.0))
}

/// The post-detection layer as it appears in the published table of local
/// matrices. Rows 1 and 3 coincide, so it is singular and cannot be the
/// correct operator; kept to demonstrate the erratum.
pub fn h2_printed() -> Matrix4 {
    let s = FRAC_1_SQRT_2;
    let z = Complex::new(0.0, 0.0);
    let one = Complex::new(1.0, 0.0);
    let i = Complex::new(0.0, 1.0);
    Matrix4::from_rows([
        [z, -one, z, -i],
        [i, z, one, z],
        [z, -one, z, -i],
        [-i, z, one, z],
    ])
    .scale_real(s)
}

pub fn cnot_target() -> Matrix4 {
    Matrix4::from_real([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ])
}

/// Double-excitation branch operator for scatter ratio `xi`.
pub fn b2_matrix(xi: f64) -> Result<Matrix4> {
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
    let a = (2.0 * xi).sqrt();
    Ok(Matrix4::from_real([
        [0.0, 0.0, 0.0, a],
        [0.0, 0.0, a, 0.0],
        [0.0, a, 0.0, 0.0],
        [a, 0.0, 0.0, 0.0],
    ]))
}

/// Max-norm of `H1·B·H2 − CNOT` for arbitrary layers and Bell matrix.
pub fn cnot_identity_defect(h1: &Matrix4, bell: &Matrix4, h2: &Matrix4) -> f64 {
    (h1 * bell).matmul(h2).max_abs_diff(&cnot_target())
}

/// CNOT identity residual for the canonical layers at zero motion.
pub fn verify_cnot_identity() -> f64 {
    cnot_identity_defect(&h1(), &bell_matrix(MotionPhases::REST), &h2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxmat::{Basis, StateVector4};
    use proptest::prelude::*;

    const TOL: f64 = 1e-13;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn bell_at_rest_is_real_orthogonal() {
        let b = bell_matrix(MotionPhases::REST);
        let s = FRAC_1_SQRT_2;
        let expected = Matrix4::from_real([
            [0.0, -s, s, 0.0],
            [s, 0.0, 0.0, s],
            [s, 0.0, 0.0, -s],
            [0.0, s, s, 0.0],
        ]);
        assert!(b.max_abs_diff(&expected) < 1e-16);
        assert!(b.unitarity_defect() <= TOL);
        assert_eq!(orthogonality_defect(&b), (0.0, 0.0));
        let sq = b.elementwise_sqmod();
        for (r, row) in sq.rows().iter().enumerate() {
            for (col, v) in row.iter().enumerate() {
                let want = if expected.get(r, col).norm() > 0.0 { 0.5 } else { 0.0 };
                assert!((v - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bell_images_are_orthonormal() {
        let b = bell_matrix(MotionPhases::REST);
        let images: Vec<_> = Basis::ALL
            .iter()
            .map(|&s| StateVector4::basis(s).evolve(&b))
            .collect();
        for (i, u) in images.iter().enumerate() {
            for (j, v) in images.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u.inner(v) - c(want, 0.0)).norm() < 1e-15);
            }
        }
        // |gg> goes to (−|ge> + |eg>)/√2.
        let a = images[0].amplitudes();
        assert!((a[1] + c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((a[2] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bell_unitarity_defect_at_quarter_turn() {
        let b = bell_matrix(MotionPhases::new(0.0, FRAC_PI_2));
        assert!((b.unitarity_defect() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn general_bell_all_zero_is_degenerate() {
        let b = bell_matrix_general(&GeneralBellConfig::default());
        let s = FRAC_1_SQRT_2;
        let expected = Matrix4::from_real([
            [0.0, s, s, 0.0],
            [s, 0.0, 0.0, s],
            [s, 0.0, 0.0, s],
            [0.0, s, s, 0.0],
        ]);
        assert!(b.max_abs_diff(&expected) < 1e-16);
        let (a, d) = orthogonality_defect(&b);
        assert!((a - 1.0).abs() < 1e-15 && (d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn general_bell_with_canonical_phases_is_canonical() {
        for geometry in [0.0, 0.7, FRAC_PI_2, 2.9] {
            let b = bell_matrix_general(&GeneralBellConfig::canonical_phases(geometry));
            assert!(b.max_abs_diff(&bell_matrix(MotionPhases::REST)) < 1e-15);
        }
    }

    #[test]
    fn diag_sandwich_reduces_equal_phase_geometry() {
        // Equal laser phases with k_L·(r₂ − r₁) = π/2: the unreduced matrix
        // carries factors of i on the atom-2 transitions.
        let cfg = GeneralBellConfig { geometry: PI, ..Default::default() };
        assert!((cfg.orthogonality_phase() - PI).abs() < 1e-15);
        let primed = bell_matrix_general(&cfg);
        let i = c(0.0, 1.0);
        let one = c(1.0, 0.0);
        let s = c(FRAC_1_SQRT_2, 0.0);
        let z = c(0.0, 0.0);
        let expected = Matrix4::from_rows([
            [z, i, one, z],
            [i, z, z, one],
            [one, z, z, i],
            [z, one, i, z],
        ])
        .scale(s);
        assert!(primed.max_abs_diff(&expected) < 1e-15);
        let left = Matrix4::diag([one, -i, one, -i]);
        let right = Matrix4::diag([one, i, one, i]);
        let reduced = left * primed * right;
        assert!(reduced.max_abs_diff(&bell_matrix(MotionPhases::REST)) < 1e-15);
        // The geometric phase π/2 plus the path difference k(l₂−l₁) = π/4 satisfies
        // the reduced orthogonality condition.
        let (a, d) = orthogonality_defect(&primed);
        assert!(a < 1e-15 && d < 1e-15);
        let ok = GeneralBellConfig { geometry: FRAC_PI_2, path2: FRAC_PI_4, ..cfg };
        assert!((ok.orthogonality_phase() - PI).abs() < 1e-15);
        let (a, d) = orthogonality_defect(&bell_matrix_general(&ok));
        assert!(a < 1e-15 && d < 1e-15);
    }

    #[test]
    fn raman_examples() {
        assert!(raman_matrix(RamanAngles::new(0.0, 0.0)).max_abs_diff(&Matrix4::identity()) < 1e-16);
        let r = raman_matrix(RamanAngles::new(FRAC_PI_4, -FRAC_PI_4));
        let expected = Matrix4::from_real([
            [0.5, 0.5, -0.5, -0.5],
            [-0.5, 0.5, 0.5, -0.5],
            [0.5, 0.5, 0.5, 0.5],
            [-0.5, 0.5, -0.5, 0.5],
        ]);
        assert!(r.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn phase_matrix_examples() {
        assert_eq!(phase_matrix(LocalPhases::default()), Matrix4::identity());
        let i = c(0.0, 1.0);
        let one = c(1.0, 0.0);
        let a = phase_matrix(LocalPhases::new(0.0, 0.0, FRAC_PI_2, 0.0));
        assert!(a.max_abs_diff(&Matrix4::diag([i, one, i, one])) < 1e-15);
        let b = phase_matrix(LocalPhases::new(0.0, -FRAC_PI_2, -FRAC_PI_2, 0.0));
        assert!(b.max_abs_diff(&Matrix4::diag([-i, one, -one, -i])) < 1e-15);
    }

    #[test]
    fn h1_matches_published_matrix() {
        let i = c(0.0, 1.0);
        let one = c(1.0, 0.0);
        let expected = Matrix4::from_rows([
            [i, i, -i, -i],
            [-one, one, one, -one],
            [i, i, i, i],
            [-one, one, -one, one],
        ])
        .scale_real(0.5);
        assert!(h1().max_abs_diff(&expected) < 1e-15);
        let via_local = local_matrix(
            RamanAngles::new(FRAC_PI_4, -FRAC_PI_4),
            LocalPhases::new(0.0, 0.0, FRAC_PI_2, 0.0),
        );
        assert!(via_local.max_abs_diff(&h1()) < 1e-16);
        assert!(h1().unitarity_defect() <= TOL);
    }

    #[test]
    fn h2_from_composition_differs_from_print_in_one_sign() {
        let i = c(0.0, 1.0);
        let one = c(1.0, 0.0);
        let z = c(0.0, 0.0);
        let expected = Matrix4::from_rows([
            [z, one, z, -i],
            [i, z, one, z],
            [z, -one, z, -i],
            [-i, z, one, z],
        ])
        .scale_real(FRAC_1_SQRT_2);
        assert!(h2().max_abs_diff(&expected) < 1e-15);
        assert!(h2().unitarity_defect() <= TOL);

        let printed = h2_printed();
        let mut differing = 0;
        for r in 0..4 {
            for col in 0..4 {
                if (printed.get(r, col) - h2().get(r, col)).norm() > 1e-12 {
                    differing += 1;
                    assert_eq!((r, col), (0, 1));
                }
            }
        }
        assert_eq!(differing, 1);
        assert_eq!(printed.row(0), printed.row(2));
        assert!(printed.determinant().norm() < 1e-12);
    }

    #[test]
    fn cnot_identity_holds() {
        assert!(verify_cnot_identity() <= 1e-12);
        // Hand-multiplied bracket: 4·CNOT with prefactor 1/4 gives the exact permutation.
        let out = h1() * bell_matrix(MotionPhases::REST) * h2();
        for r in 0..4 {
            for col in 0..4 {
                let want = cnot_target().get(r, col);
                assert!((out.get(r, col) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn printed_h2_breaks_cnot_identity() {
        let defect = cnot_identity_defect(&h1(), &bell_matrix(MotionPhases::REST), &h2_printed());
        assert!(defect >= 0.5, "defect = {defect}");
    }

    #[test]
    fn common_motion_phase_breaks_entrywise_identity() {
        for p in [0.1, 1.0, -2.0, PI] {
            let b = bell_matrix(MotionPhases::new(p, p));
            assert!(cnot_identity_defect(&h1(), &b, &h2()) > 1e-3);
        }
        let b = bell_matrix(MotionPhases::new(2.0 * PI, 2.0 * PI));
        assert!(cnot_identity_defect(&h1(), &b, &h2()) < 1e-12);
    }

    #[test]
    fn cnot_target_action() {
        let cn = cnot_target();
        assert_eq!(StateVector4::basis(Basis::GG).evolve(&cn), StateVector4::basis(Basis::GG));
        assert_eq!(StateVector4::basis(Basis::EG).evolve(&cn), StateVector4::basis(Basis::EE));
        assert_eq!(cn * cn, Matrix4::identity());
    }

    #[test]
    fn b2_values() {
        assert_eq!(b2_matrix(0.0).unwrap(), Matrix4::zeros());
        let one = b2_matrix(0.5).unwrap();
        assert_eq!(one.get(0, 3), c(1.0, 0.0));
        assert_eq!(one.get(3, 0), c(1.0, 0.0));
        let small = b2_matrix(0.05).unwrap();
        assert!((small.get(1, 2).re - 0.1f64.sqrt()).abs() < 1e-15);
        assert!((small.get(1, 2).re - 0.316_227_766_016_838).abs() < 1e-12);
        assert!(b2_matrix(-0.01).is_err());
        assert!(b2_matrix(f64::NAN).is_err());
    }

    #[test]
    fn raman_inverse_relation() {
        let fwd = raman_matrix(RamanAngles::new(FRAC_PI_4, FRAC_PI_2));
        let back = raman_matrix(RamanAngles::new(-FRAC_PI_4, -FRAC_PI_2));
        assert!((fwd * back).max_abs_diff(&Matrix4::identity()) < TOL);
    }

    proptest! {
        #[test]
        fn raman_factorizes(t1 in -7.0f64..7.0, t2 in -7.0f64..7.0) {
            let r = raman_matrix(RamanAngles::new(t1, t2));
            let k = raman_single(t1).kron(&raman_single(t2));
            prop_assert!(r.max_abs_diff(&k) < TOL);
            prop_assert!(r.unitarity_defect() <= TOL);
            let inv = raman_matrix(RamanAngles::new(-t1, -t2));
            prop_assert!((r * inv).max_abs_diff(&Matrix4::identity()) < TOL);
        }

        #[test]
        fn local_layers_are_unitary(a in prop::array::uniform6(-7.0f64..7.0)) {
            let x = LocalPhases::new(a[2], a[3], a[4], a[5]);
            prop_assert!(phase_matrix(x).unitarity_defect() <= TOL);
            prop_assert!(local_matrix(RamanAngles::new(a[0], a[1]), x).unitarity_defect() <= TOL);
        }

        #[test]
        fn bell_columns_have_unit_norm(p1 in -7.0f64..7.0, p2 in -7.0f64..7.0) {
            let b = bell_matrix(MotionPhases::new(p1, p2));
            for col in 0..4 {
                let n: f64 = (0..4).map(|r| b.get(r, col).norm_sqr()).sum();
                prop_assert!((n - 1.0).abs() < 1e-14);
            }
            // Unitary exactly when the phases differ by a multiple of π.
            let expected = (p2 - p1).sin().abs();
            prop_assert!((b.unitarity_defect() - expected).abs() < 1e-13);
        }

        #[test]
        fn bell_unitary_for_equal_phases(p in -7.0f64..7.0, k in -3i32..3) {
            let b = bell_matrix(MotionPhases::new(p, p + f64::from(k) * PI));
            prop_assert!(b.unitarity_defect() <= TOL);
        }

        #[test]
        fn orthogonality_invariant_under_common_path_shift(
            a in prop::array::uniform12(-4.0f64..4.0),
            shift in -4.0f64..4.0,
        ) {
            let cfg = GeneralBellConfig {
                laser_g1: a[0], laser_e1: a[1], laser_g2: a[2], laser_e2: a[3],
                path1: a[4], path2: a[5],
                motion_g1: a[6], motion_e1: a[7], motion_g2: a[8], motion_e2: a[9],
                geometry: a[10],
            };
            let shifted = GeneralBellConfig { path1: a[4] + shift, path2: a[5] + shift, ..cfg };
            let (x0, y0) = orthogonality_defect(&bell_matrix_general(&cfg));
            let (x1, y1) = orthogonality_defect(&bell_matrix_general(&shifted));
            prop_assert!((x0 - x1).abs() < 1e-13 && (y0 - y1).abs() < 1e-13);
        }

        #[test]
        fn components_rebuild_bell(p1 in -7.0f64..7.0, p2 in -7.0f64..7.0) {
            let [a1, a2] = bell_components();
            let direct = bell_matrix(MotionPhases::new(p1, p2));
            let sum = a1.scale(cis(p1)) + a2.scale(cis(p2));
            prop_assert!(direct.max_abs_diff(&sum) < 1e-15);
        }
    }
}
