//! Monte-Carlo estimates built from sampled atom displacements and photon
//! directions, using no closed-form averages.
//!
//! Samples are drawn in chunks. Chunk `c` uses a ChaCha8 stream selected by
//! `(seed, c)`, and chunk results are reduced in chunk order, so estimates are
//! bit-identical for a fixed `(seed, chunk_size, n_samples)` whatever the
//! number of worker threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cxmat::{Complex, Matrix4, ProbabilityMatrix4};
use crate::error::{Error, Result};
use crate::gates::{b2_matrix, bell_matrix, h1, h2, raman_matrix, MotionPhases, RamanAngles};
pub use crate::motion::MissedPhoton;
use crate::motion::{axis_variances, dipole_weight, recoil_direction, OpticsParams, TrapParams, VarianceMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub chunk_size: usize,
    pub mode: VarianceMode,
    pub missed_photon: MissedPhoton,
}

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 20_061_017;
pub const DEFAULT_CHUNK: usize = 4096;

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            chunk_size: DEFAULT_CHUNK,
            mode: VarianceMode::Classical,
            missed_photon: MissedPhoton::FullSphere,
        }
    }
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        Self { n_samples, seed, ..Self::default() }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.n_samples < 2 {
            return Err(Error::InvalidParameter {
                name: "n_samples",
                value: self.n_samples as f64,
                reason: "at least two samples are needed for a standard error",
            });
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidParameter {
                name: "chunk_size",
                value: 0.0,
                reason: "chunk size must be positive",
            });
        }
        Ok(self)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Sample mean with its standard error `s/√n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    fn from_moments(sum: f64, sumsq: f64, n: usize) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sumsq - sum * mean) / (nf - 1.0)).max(0.0);
        Self { mean, std_error: (var / nf).sqrt(), n }
    }

    /// `|mean − target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.std_error == 0.0 {
            if diff == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            diff / self.std_error
        }
    }

    /// Whether `target` lies within `k` standard errors, with a floor for
    /// rounding when the spread vanishes.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + 1e-12
    }
}

/// Entrywise estimate of a probability matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMatrix {
    pub mean: ProbabilityMatrix4,
    pub std_error: [[f64; 4]; 4],
    pub n: usize,
    /// Largest per-sample deviation of a row's total weight from its
    /// expected value.
    pub max_row_defect: f64,
}

impl McMatrix {
    pub fn entry(&self, r: usize, c: usize) -> McEstimate {
        McEstimate { mean: self.mean.at(r, c), std_error: self.std_error[r][c], n: self.n }
    }

    /// Largest entrywise z-score against a reference matrix.
    pub fn max_z_score(&self, reference: &ProbabilityMatrix4) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max(self.entry(r, c).z_score(reference.at(r, c)));
            }
        }
        worst
    }

    pub fn agrees_with(&self, reference: &ProbabilityMatrix4, k: f64) -> bool {
        (0..4).all(|r| (0..4).all(|c| self.entry(r, c).agrees_with(reference.at(r, c), k)))
    }
}

trait Accumulator: Send {
    fn merge(&mut self, other: &Self);
}

#[derive(Debug, Clone)]
struct Moments<const K: usize> {
    n: usize,
    sum: [f64; K],
    sumsq: [f64; K],
}

impl<const K: usize> Moments<K> {
    fn new() -> Self {
        Self { n: 0, sum: [0.0; K], sumsq: [0.0; K] }
    }

    fn push(&mut self, v: [f64; K]) {
        self.n += 1;
        for i in 0..K {
            self.sum[i] += v[i];
            self.sumsq[i] += v[i] * v[i];
        }
    }

    fn estimate(&self, i: usize) -> McEstimate {
        McEstimate::from_moments(self.sum[i], self.sumsq[i], self.n)
    }
}

impl<const K: usize> Accumulator for Moments<K> {
    fn merge(&mut self, other: &Self) {
        self.n += other.n;
        for i in 0..K {
            self.sum[i] += other.sum[i];
            self.sumsq[i] += other.sumsq[i];
        }
    }
}

/// Sums for the ratio estimator `Σx_rc / Σy_r`, where `y_r = Σ_c x_rc`.
#[derive(Debug, Clone)]
struct RatioMoments {
    n: usize,
    x: [[f64; 4]; 4],
    xx: [[f64; 4]; 4],
    xy: [[f64; 4]; 4],
    y: [f64; 4],
    yy: [f64; 4],
    max_row_defect: f64,
}

impl RatioMoments {
    fn new() -> Self {
        Self {
            n: 0,
            x: [[0.0; 4]; 4],
            xx: [[0.0; 4]; 4],
            xy: [[0.0; 4]; 4],
            y: [0.0; 4],
            yy: [0.0; 4],
            max_row_defect: 0.0,
        }
    }

    fn push(&mut self, w: &[[f64; 4]; 4], expected_row: f64) {
        self.n += 1;
        for r in 0..4 {
            let y: f64 = w[r].iter().sum();
            self.y[r] += y;
            self.yy[r] += y * y;
            self.max_row_defect = self.max_row_defect.max((y - expected_row).abs());
            for c in 0..4 {
                let x = w[r][c];
                self.x[r][c] += x;
                self.xx[r][c] += x * x;
                self.xy[r][c] += x * y;
            }
        }
    }

    fn finish(&self) -> McMatrix {
        let nf = self.n as f64;
        let mut mean = [[0.0; 4]; 4];
        let mut se = [[0.0; 4]; 4];
        for r in 0..4 {
            let ybar = self.y[r] / nf;
            for c in 0..4 {
                let ratio = self.x[r][c] / self.y[r];
                mean[r][c] = ratio;
                // Delta method: Var(R) ≈ Var(x − R·y) / (n·ȳ²).
                let resid = self.xx[r][c] - 2.0 * ratio * self.xy[r][c] + ratio * ratio * self.yy[r];
                let var = (resid / (nf - 1.0)).max(0.0);
                se[r][c] = (var / nf).sqrt() / ybar;
            }
        }
        McMatrix {
            mean: ProbabilityMatrix4::from_rows(mean),
            std_error: se,
            n: self.n,
            max_row_defect: self.max_row_defect,
        }
    }
}

impl Accumulator for RatioMoments {
    fn merge(&mut self, o: &Self) {
        self.n += o.n;
        for r in 0..4 {
            self.y[r] += o.y[r];
            self.yy[r] += o.yy[r];
            for c in 0..4 {
                self.x[r][c] += o.x[r][c];
                self.xx[r][c] += o.xx[r][c];
                self.xy[r][c] += o.xy[r][c];
            }
        }
        self.max_row_defect = self.max_row_defect.max(o.max_row_defect);
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn run_chunks<A, I, S>(cfg: &McConfig, init: I, sample: S) -> A
where
    A: Accumulator,
    I: Fn() -> A + Sync,
    S: Fn(&mut ChaCha8Rng, &mut A) + Sync,
{
    let n_chunks = cfg.n_samples.div_ceil(cfg.chunk_size);
    let parts: Vec<A> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, c);
            let len = cfg.chunk_size.min(cfg.n_samples - c * cfg.chunk_size);
            let mut acc = init();
            for _ in 0..len {
                sample(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Thermal displacement `k·δr` of one atom, one Gaussian per axis.
pub fn sample_displacement<R: Rng + ?Sized>(trap: &TrapParams, mode: VarianceMode, rng: &mut R) -> [f64; 3] {
    let sd = axis_variances(trap, mode).map(f64::sqrt);
    sd.map(|s| {
        let z: f64 = rng.sample(StandardNormal);
        s * z
    })
}

/// Rejection sampling of the dipole pattern over `cos θ ∈ [u_lo, u_hi]`.
fn sample_dipole_band<R: Rng + ?Sized>(u_lo: f64, u_hi: f64, rng: &mut R) -> (f64, f64) {
    loop {
        let u = u_lo + (u_hi - u_lo) * rng.random::<f64>();
        let phi = 2.0 * PI * rng.random::<f64>();
        let theta = u.clamp(-1.0, 1.0).acos();
        if rng.random::<f64>() < dipole_weight(theta, phi) {
            return (theta, phi);
        }
    }
}

/// Detected photon direction `(θ, φ)` distributed as the dipole pattern on the cone.
pub fn sample_photon_direction<R: Rng + ?Sized>(optics: &OpticsParams, rng: &mut R) -> (f64, f64) {
    let (theta, phi) = sample_dipole_band(optics.theta0().cos(), 1.0, rng);
    (theta.min(optics.theta0()), phi)
}

/// Direction of a photon that escapes detection.
pub fn sample_missed_direction<R: Rng + ?Sized>(optics: &OpticsParams, kind: MissedPhoton, rng: &mut R) -> (f64, f64) {
    let (lo, hi) = kind.cos_range(optics);
    sample_dipole_band(lo, hi, rng)
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Motional phases `(q·δr₁, q·δr₂)` for one detected photon.
pub fn sample_phases<R: Rng + ?Sized>(
    trap: &TrapParams,
    optics: &OpticsParams,
    mode: VarianceMode,
    rng: &mut R,
) -> MotionPhases {
    let (theta, phi) = sample_photon_direction(optics, rng);
    let q = recoil_direction(theta, phi);
    let r1 = sample_displacement(trap, mode, rng);
    let r2 = sample_displacement(trap, mode, rng);
    MotionPhases::new(dot(&q, &r1), dot(&q, &r2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceEstimate {
    /// Estimate of `d = 1 − ⟨cos q·(δr₁ − δr₂)⟩`.
    pub d: McEstimate,
    /// `⟨sin q·(δr₁ − δr₂)⟩`, zero in expectation.
    pub imaginary: McEstimate,
}

pub fn mc_decoherence(trap: &TrapParams, optics: &OpticsParams, cfg: &McConfig) -> Result<DecoherenceEstimate> {
    let cfg = cfg.validated()?;
    let acc = run_chunks(&cfg, Moments::<2>::new, |rng, acc| {
        let p = sample_phases(trap, optics, cfg.mode, rng);
        let (s, c) = (p.p1 - p.p2).sin_cos();
        acc.push([c, s]);
    });
    let coh = acc.estimate(0);
    Ok(DecoherenceEstimate {
        d: McEstimate { mean: 1.0 - coh.mean, ..coh },
        imaginary: acc.estimate(1),
    })
}

/// Outcome probabilities after heralding and Raman analysis at `angles`.
pub fn mc_probabilities(
    trap: &TrapParams,
    optics: &OpticsParams,
    angles: RamanAngles,
    cfg: &McConfig,
) -> Result<McMatrix> {
    let cfg = cfg.validated()?;
    let r = raman_matrix(angles);
    let acc = run_chunks(
        &cfg,
        || (Moments::<16>::new(), 0.0f64),
        |rng, acc| {
            let p = sample_phases(trap, optics, cfg.mode, rng);
            let m = (bell_matrix(p) * r).elementwise_sqmod();
            acc.1 = acc.1.max(m.row_sum_defect());
            let mut v = [0.0; 16];
            for (i, x) in v.iter_mut().enumerate() {
                *x = m.at(i / 4, i % 4);
            }
            acc.0.push(v);
        },
    );
    let (mom, defect) = acc;
    let mut mean = [[0.0; 4]; 4];
    let mut se = [[0.0; 4]; 4];
    for i in 0..16 {
        let e = mom.estimate(i);
        mean[i / 4][i % 4] = e.mean;
        se[i / 4][i % 4] = e.std_error;
    }
    Ok(McMatrix { mean: ProbabilityMatrix4::from_rows(mean), std_error: se, n: mom.n, max_row_defect: defect })
}

impl Accumulator for (Moments<16>, f64) {
    fn merge(&mut self, other: &Self) {
        self.0.merge(&other.0);
        self.1 = self.1.max(other.1);
    }
}

/// `⟨|f|²⟩` for the double-excitation amplitude with one detected and one
/// missed photon, both emission phase constants set to zero.
pub fn mc_f_squared(trap: &TrapParams, optics: &OpticsParams, cfg: &McConfig) -> Result<McEstimate> {
    let cfg = cfg.validated()?;
    let acc = run_chunks(&cfg, Moments::<1>::new, |rng, acc| {
        let (t, p) = sample_photon_direction(optics, rng);
        let (tm, pm) = sample_missed_direction(optics, cfg.missed_photon, rng);
        let q = recoil_direction(t, p);
        let qm = recoil_direction(tm, pm);
        let r1 = sample_displacement(trap, cfg.mode, rng);
        let r2 = sample_displacement(trap, cfg.mode, rng);
        let f = Complex::from_polar(1.0, dot(&q, &r1) + dot(&qm, &r2))
            + Complex::from_polar(1.0, dot(&q, &r2) + dot(&qm, &r1));
        acc.push([f.norm_sqr()]);
    });
    Ok(acc.estimate(0))
}

fn accumulate_branches(acc: &mut RatioMoments, branches: &[Matrix4], expected_row: f64) {
    let mut w = [[0.0; 4]; 4];
    for b in branches {
        for (r, row) in w.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v += b.get(r, c).norm_sqr();
            }
        }
    }
    acc.push(&w, expected_row);
}

/// Prepare-then-measure truth table with independent motion in the two
/// stages, normalized by the ratio of summed branch weights.
pub fn mc_bell_measurement(trap: &TrapParams, optics: &OpticsParams, xi: f64, cfg: &McConfig) -> Result<McMatrix> {
    let cfg = cfg.validated()?;
    let b2 = b2_matrix(xi)?;
    let b22 = b2 * b2;
    let expected = (1.0 + 2.0 * xi).powi(2);
    let acc = run_chunks(&cfg, RatioMoments::new, |rng, acc| {
        let prep = bell_matrix(sample_phases(trap, optics, cfg.mode, rng));
        let meas = bell_matrix(sample_phases(trap, optics, cfg.mode, rng)).transpose();
        accumulate_branches(acc, &[prep * meas, b2 * meas, prep * b2, b22], expected);
    });
    Ok(acc.finish())
}

/// CNOT truth table `H1·B·H2` plus the double-excitation branch.
pub fn mc_cnot(trap: &TrapParams, optics: &OpticsParams, xi: f64, cfg: &McConfig) -> Result<McMatrix> {
    let cfg = cfg.validated()?;
    let (l, r) = (h1(), h2());
    let double = (l * b2_matrix(xi)?) * r;
    let expected = 1.0 + 2.0 * xi;
    let acc = run_chunks(&cfg, RatioMoments::new, |rng, acc| {
        let single = (l * bell_matrix(sample_phases(trap, optics, cfg.mode, rng))) * r;
        accumulate_branches(acc, &[single, double], expected);
    });
    Ok(acc.finish())
}
