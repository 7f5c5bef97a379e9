//! Fixed-size complex linear algebra for two-qubit operators.
//!
//! Every 4×4 operator uses the basis order `(gg, ge, eg, ee)`, where the first
//! letter is the state of atom 1. Matrices follow the ket-column convention:
//! row `i` of an operator matrix lists the expansion of the image of basis
//! state `i`. A state with amplitude row-vector `a` therefore evolves as
//! `a · M`, and applying `A` first and `B` second is the matrix product `A · B`.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

pub use num_complex::Complex64 as Complex;

use crate::error::{finite, Error, Result};

/// Scalar constructor that rejects NaN and infinities.
pub fn scalar(re: f64, im: f64) -> Result<Complex> {
    Ok(Complex::new(finite("re", re)?, finite("im", im)?))
}

/// `e^{i·phase}`.
#[inline]
pub fn cis(phase: f64) -> Complex {
    Complex::from_polar(1.0, phase)
}

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// Two-qubit computational basis in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    GG = 0,
    GE = 1,
    EG = 2,
    EE = 3,
}

impl Basis {
    pub const ALL: [Basis; 4] = [Basis::GG, Basis::GE, Basis::EG, Basis::EE];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Basis> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Basis::GG => "gg",
            Basis::GE => "ge",
            Basis::EG => "eg",
            Basis::EE => "ee",
        }
    }

    /// Outcome value of atom 1 and atom 2: +1 for `g`, −1 for `e`.
    pub fn spins(self) -> (f64, f64) {
        match self {
            Basis::GG => (1.0, 1.0),
            Basis::GE => (1.0, -1.0),
            Basis::EG => (-1.0, 1.0),
            Basis::EE => (-1.0, -1.0),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Single-qubit operator, basis order `(g, e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    rows: [[Complex; 2]; 2],
}

impl Matrix2 {
    pub fn from_rows(rows: [[Complex; 2]; 2]) -> Self {
        Self { rows }
    }

    pub fn from_real(rows: [[f64; 2]; 2]) -> Self {
        Self {
            rows: rows.map(|r| r.map(|x| Complex::new(x, 0.0))),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex {
        self.rows[r][c]
    }

    /// Two-qubit operator acting with `self` on atom 1 and `other` on atom 2.
    pub fn kron(&self, other: &Matrix2) -> Matrix4 {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.rows[r / 2][c / 2] * other.rows[r % 2][c % 2];
            }
        }
        Matrix4 { rows: out }
    }
}

/// Dense 4×4 complex operator in the `(gg, ge, eg, ee)` basis.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix4 {
    rows: [[Complex; 4]; 4],
}

impl Matrix4 {
    /// Checked constructor; every entry must be finite.
    pub fn new(rows: [[Complex; 4]; 4]) -> Result<Self> {
        for z in rows.iter().flatten() {
            finite("matrix entry (re)", z.re)?;
            finite("matrix entry (im)", z.im)?;
        }
        Ok(Self { rows })
    }

    /// Unchecked constructor for entries built from finite closed forms.
    pub(crate) fn from_rows(rows: [[Complex; 4]; 4]) -> Self {
        debug_assert!(rows.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self { rows }
    }

    pub fn from_real(rows: [[f64; 4]; 4]) -> Self {
        Self::from_rows(rows.map(|r| r.map(|x| Complex::new(x, 0.0))))
    }

    pub fn zeros() -> Self {
        Self { rows: [[ZERO; 4]; 4] }
    }

    pub fn identity() -> Self {
        Self::diag([ONE; 4])
    }

    pub fn diag(d: [Complex; 4]) -> Self {
        let mut m = Self::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.rows[i][i] = v;
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex {
        self.rows[r][c]
    }

    pub fn rows(&self) -> &[[Complex; 4]; 4] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> [Complex; 4] {
        self.rows[r]
    }

    pub fn matmul(&self, other: &Matrix4) -> Matrix4 {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.rows[i][k] * other.rows[k][j]).sum();
            }
        }
        Matrix4 { rows: out }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Matrix4 {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.rows[j][i].conj();
            }
        }
        Matrix4 { rows: out }
    }

    pub fn transpose(&self) -> Matrix4 {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.rows[j][i];
            }
        }
        Matrix4 { rows: out }
    }

    pub fn scale(&self, s: Complex) -> Matrix4 {
        Matrix4 {
            rows: self.rows.map(|r| r.map(|z| z * s)),
        }
    }

    pub fn scale_real(&self, s: f64) -> Matrix4 {
        self.scale(Complex::new(s, 0.0))
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Matrix4) -> f64 {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm of `A·A† − I`; zero exactly when `A` is unitary.
    pub fn unitarity_defect(&self) -> f64 {
        self.matmul(&self.dagger()).max_abs_diff(&Matrix4::identity())
    }

    /// Entrywise squared modulus.
    pub fn elementwise_sqmod(&self) -> ProbabilityMatrix4 {
        ProbabilityMatrix4::from_rows(self.rows.map(|r| r.map(|z| z.norm_sqr())))
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Complex {
        let mut a = self.rows;
        let mut det = ONE;
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
                .unwrap_or(col);
            if a[pivot][col].norm() == 0.0 {
                return ZERO;
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..4 {
                let f = a[r][col] / a[col][col];
                for c in col..4 {
                    let sub = f * a[col][c];
                    a[r][c] -= sub;
                }
            }
        }
        det
    }
}

impl Default for Matrix4 {
    fn default() -> Self {
        Self::identity()
    }
}

impl fmt::Debug for Matrix4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix4 [")?;
        for row in &self.rows {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix4 {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.rows[r][c]
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, rhs: Matrix4) -> Matrix4 {
        self.matmul(&rhs)
    }
}

impl<'a> Mul<&'a Matrix4> for &'a Matrix4 {
    type Output = Matrix4;
    fn mul(self, rhs: &'a Matrix4) -> Matrix4 {
        self.matmul(rhs)
    }
}

impl Add for Matrix4 {
    type Output = Matrix4;
    fn add(mut self, rhs: Matrix4) -> Matrix4 {
        for (a, b) in self.rows.iter_mut().flatten().zip(rhs.rows.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl Sub for Matrix4 {
    type Output = Matrix4;
    fn sub(mut self, rhs: Matrix4) -> Matrix4 {
        for (a, b) in self.rows.iter_mut().flatten().zip(rhs.rows.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

/// Two-qubit state amplitudes in the `(gg, ge, eg, ee)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector4 {
    amps: [Complex; 4],
}

impl StateVector4 {
    /// Amplitudes taken as given; use [`StateVector4::normalized`] for a unit state.
    pub fn unnormalized(amps: [Complex; 4]) -> Result<Self> {
        for z in &amps {
            finite("amplitude (re)", z.re)?;
            finite("amplitude (im)", z.im)?;
        }
        Ok(Self { amps })
    }

    pub fn normalized(amps: [Complex; 4]) -> Result<Self> {
        let v = Self::unnormalized(amps)?;
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameter {
                name: "state norm",
                value: 0.0,
                reason: "cannot normalize the zero vector",
            });
        }
        Ok(Self {
            amps: amps.map(|z| z / n),
        })
    }

    pub fn basis(b: Basis) -> Self {
        let mut amps = [ZERO; 4];
        amps[b.index()] = ONE;
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex; 4] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector4) -> Complex {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies `m` in the ket-column convention: new amplitudes are `a · m`.
    pub fn evolve(&self, m: &Matrix4) -> StateVector4 {
        let mut out = [ZERO; 4];
        for (k, v) in out.iter_mut().enumerate() {
            *v = (0..4).map(|i| self.amps[i] * m.get(i, k)).sum();
        }
        StateVector4 { amps: out }
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.amps.map(|z| z.norm_sqr())
    }
}

/// Real 4×4 matrix indexed by (initial state, final state).
#[derive(Clone, Copy, PartialEq, Default)]
pub struct ProbabilityMatrix4 {
    rows: [[f64; 4]; 4],
}

impl ProbabilityMatrix4 {
    pub fn from_rows(rows: [[f64; 4]; 4]) -> Self {
        Self { rows }
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[[f64; 4]; 4] {
        &self.rows
    }

    pub fn row(&self, initial: Basis) -> [f64; 4] {
        self.rows[initial.index()]
    }

    #[inline]
    pub fn get(&self, initial: Basis, fin: Basis) -> f64 {
        self.rows[initial.index()][fin.index()]
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.rows[r][c]
    }

    pub fn row_sums(&self) -> [f64; 4] {
        self.rows.map(|r| r.iter().sum())
    }

    pub fn col_sums(&self) -> [f64; 4] {
        let mut s = [0.0; 4];
        for r in &self.rows {
            for (acc, v) in s.iter_mut().zip(r) {
                *acc += v;
            }
        }
        s
    }

    /// Largest |row sum − 1|.
    pub fn row_sum_defect(&self) -> f64 {
        self.row_sums()
            .iter()
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.rows[i][i])
    }

    pub fn transpose(&self) -> Self {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.rows[j][i];
            }
        }
        Self { rows: out }
    }

    pub fn max_abs_diff(&self, other: &ProbabilityMatrix4) -> f64 {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows.map(|r| r.map(|v| v * s)),
        }
    }

    pub fn min_entry(&self) -> f64 {
        self.rows.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.rows.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Add for ProbabilityMatrix4 {
    type Output = ProbabilityMatrix4;
    fn add(mut self, rhs: ProbabilityMatrix4) -> ProbabilityMatrix4 {
        for (a, b) in self.rows.iter_mut().flatten().zip(rhs.rows.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl fmt::Debug for ProbabilityMatrix4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ProbabilityMatrix4 [")?;
        for row in &self.rows {
            writeln!(f, "  {:.9} {:.9} {:.9} {:.9}", row[0], row[1], row[2], row[3])?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn arb_unitary() -> impl Strategy<Value = Matrix4> {
        // Products of Raman rotations and diagonal phases cover a broad family.
        prop::array::uniform8(-3.2f64..3.2).prop_map(|a| {
            let r = |t: f64| Matrix2::from_real([[t.cos(), -t.sin()], [t.sin(), t.cos()]]);
            let d = Matrix4::diag([cis(a[2]), cis(a[3]), cis(a[4]), cis(a[5])]);
            r(a[0]).kron(&r(a[1])) * d * r(a[6]).kron(&r(a[7]))
        })
    }

    #[test]
    fn identity_is_neutral() {
        let i = Matrix4::identity();
        assert_eq!(i * i, i);
        assert_eq!(i.dagger(), i);
        assert_eq!(i.unitarity_defect(), 0.0);
        assert_eq!(i.elementwise_sqmod(), ProbabilityMatrix4::from_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]));
    }

    #[test]
    fn dagger_conjugates_diagonal() {
        let i = c(0.0, 1.0);
        let one = c(1.0, 0.0);
        let d = Matrix4::diag([i, one, i, one]);
        assert_eq!(d.dagger(), Matrix4::diag([-i, one, -i, one]));
        assert_eq!(d.dagger().dagger(), d);
    }

    #[test]
    fn constructors_reject_non_finite() {
        assert!(scalar(f64::NAN, 0.0).is_err());
        assert!(scalar(0.0, f64::INFINITY).is_err());
        let mut rows = [[c(0.0, 0.0); 4]; 4];
        rows[2][1] = c(f64::NAN, 0.0);
        assert!(Matrix4::new(rows).is_err());
        assert!(StateVector4::unnormalized([c(f64::INFINITY, 0.0), ZERO, ZERO, ZERO]).is_err());
        assert!(StateVector4::normalized([ZERO; 4]).is_err());
    }

    #[test]
    fn half_modulus_matrix_squares_to_half() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = Matrix4::from_rows([[cis(0.3) * s; 4]; 4]);
        for v in m.elementwise_sqmod().rows().iter().flatten() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn determinant_of_permutation_and_singular() {
        let p = Matrix4::from_real([
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]);
        assert!((p.determinant() - c(1.0, 0.0)).norm() < 1e-15);
        let s = Matrix4::from_real([
            [1.0, 2.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 2.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]);
        assert_eq!(s.determinant(), ZERO);
    }

    #[test]
    fn state_evolves_with_row_convention() {
        // Row gg of the matrix is the image of |gg>.
        let m = Matrix4::from_real([
            [0.0, 0.6, 0.8, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.8, -0.6, 0.0],
        ]);
        let out = StateVector4::basis(Basis::GG).evolve(&m);
        assert_eq!(out.amplitudes(), &m.row(0));
        let p = out.probabilities();
        assert!((p[1] - 0.36).abs() < 1e-15 && (p[2] - 0.64).abs() < 1e-15);
    }

    #[test]
    fn kron_places_blocks() {
        let a = Matrix2::from_real([[1.0, 2.0], [3.0, 4.0]]);
        let b = Matrix2::from_real([[0.0, 1.0], [1.0, 0.0]]);
        let k = a.kron(&b);
        assert_eq!(k.get(0, 1), c(1.0, 0.0));
        assert_eq!(k.get(2, 1), c(3.0, 0.0));
        assert_eq!(k.get(3, 2), c(4.0, 0.0));
        assert_eq!(k.get(1, 2), c(2.0, 0.0));
        assert_eq!(k.get(1, 3), c(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn matmul_is_associative(a in arb_unitary(), b in arb_unitary(), c in arb_unitary()) {
            prop_assert!(((a * b) * c).max_abs_diff(&(a * (b * c))) < 1e-14);
        }

        #[test]
        fn unitary_products_stay_unitary(a in arb_unitary(), b in arb_unitary()) {
            let tol = 1e-13;
            prop_assert!((a * b).unitarity_defect()
                <= a.unitarity_defect() + b.unitarity_defect() + tol);
            prop_assert!((a * a.dagger()).max_abs_diff(&Matrix4::identity()) < 1e-12);
        }

        #[test]
        fn sqmod_of_unitary_is_doubly_stochastic(a in arb_unitary()) {
            let p = a.elementwise_sqmod();
            for s in p.row_sums().iter().chain(p.col_sums().iter()) {
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }
}
