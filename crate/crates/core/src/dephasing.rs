//! Motional averaging of outcome probabilities for operator sequences whose
//! stages carry random emission phases.
//!
//! A dephased stage is a sum `Σ_j e^{iφ_j} C_j` of components, one per
//! emitting atom, with the phase differences between components
//! characterised by `⟨e^{i(φ_j − φ_k)}⟩ = 1 − d` for `j ≠ k`. Distinct
//! stages draw their phases independently. For two component choices
//! `(j₁, j₂, …)` and `(k₁, k₂, …)` the averaged cross term therefore carries
//! the weight `∏ₛ [jₛ = kₛ] + (1 − d)[jₛ ≠ kₛ]`.

use crate::cxmat::{Matrix4, ProbabilityMatrix4};

/// One factor of an operator sequence.
#[derive(Debug, Clone)]
pub struct Stage {
    components: Vec<Matrix4>,
}

impl Stage {
    /// A motion-independent operator.
    pub fn fixed(m: Matrix4) -> Self {
        Self { components: vec![m] }
    }

    /// An operator split into components with mutually dephased phases.
    pub fn dephased(components: Vec<Matrix4>) -> Self {
        assert!(!components.is_empty(), "a stage needs at least one component");
        Self { components }
    }

    pub fn components(&self) -> &[Matrix4] {
        &self.components
    }

    /// Sum of the components at zero phase.
    pub fn at_rest(&self) -> Matrix4 {
        self.components
            .iter()
            .skip(1)
            .fold(self.components[0], |acc, m| acc + *m)
    }
}

/// `⟨|Πₛ Mₛ|²⟩` entrywise, where the product runs over `stages` in order and
/// `coherence = 1 − d` is the residual phase correlation between components.
pub fn averaged_sqmod(stages: &[Stage], coherence: f64) -> ProbabilityMatrix4 {
    assert!(!stages.is_empty());
    let mut paths: Vec<(Vec<usize>, Matrix4)> = vec![(Vec::new(), Matrix4::identity())];
    for stage in stages {
        let mut next = Vec::with_capacity(paths.len() * stage.components.len());
        for (choice, m) in &paths {
            for (j, c) in stage.components.iter().enumerate() {
                let mut ch = choice.clone();
                ch.push(j);
                next.push((ch, m.matmul(c)));
            }
        }
        paths = next;
    }

    let mut out = [[0.0; 4]; 4];
    for (a, (ca, ma)) in paths.iter().enumerate() {
        for (b, (cb, mb)) in paths.iter().enumerate().skip(a) {
            let mismatches = ca.iter().zip(cb).filter(|(x, y)| x != y).count();
            let mut w = coherence.powi(mismatches as i32);
            if a != b {
                // Each unordered pair contributes twice.
                w *= 2.0;
            }
            if w == 0.0 {
                continue;
            }
            for (r, row) in out.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v += w * (ma.get(r, c) * mb.get(r, c).conj()).re;
                }
            }
        }
    }
    ProbabilityMatrix4::from_rows(out)
}
