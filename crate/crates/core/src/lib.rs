//! Heralded two-atom logic: Bell operators from single-photon detection,
//! CHSH tests, motional decoherence in dipole traps, Bell measurement and
//! CNOT fidelities, and Monte-Carlo cross-checks of every closed form.

pub mod chsh;
pub mod cxmat;
pub mod dephasing;
pub mod error;
pub mod figures;
pub mod gates;
pub mod motion;
pub mod oracle;
pub mod protocol;
pub mod quadrature;
pub mod validation;

pub use chsh::{AnglePattern, ChshAngles, Decoherence, Family, PatternKind, ScatterForm, ScatterRatio};
pub use cxmat::{Basis, Complex, Matrix2, Matrix4, ProbabilityMatrix4, StateVector4};
pub use error::{Error, Result};
pub use figures::Table;
pub use gates::{GeneralBellConfig, LocalPhases, MotionPhases, RamanAngles};
pub use motion::{MissedPhoton, OpticsParams, TrapParams, VarianceMode};
pub use oracle::{McConfig, McEstimate, McMatrix};
pub use protocol::FidelityReport;
