use std::collections::BTreeMap;
use std::sync::Arc;

use super::mix;
use crate::algebra::BlockAlgebra;
use crate::infotheory::{shannon_entropy, von_neumann_entropy};
use crate::state::DensityState;
use crate::{Error, Result};

/// A classical–quantum state `Σ_c p_c [c] ⊗ ρ_c` whose classical register is a
/// tuple of coordinates.
///
/// Information quantities between coordinate subsets and the quantum part reduce
/// to Shannon entropies plus averaged von Neumann entropies of conditional
/// mixtures, so no tensor product with the classical register is formed.
#[derive(Clone, Debug)]
pub struct CqEnsemble {
    algebra: BlockAlgebra,
    states: Arc<Vec<DensityState>>,
    entropies: Arc<Vec<f64>>,
    entries: Vec<Entry>,
}

#[derive(Clone, Debug)]
struct Entry {
    prob: f64,
    coords: Vec<usize>,
    state: usize,
}

impl CqEnsemble {
    /// `entries` are `(p_c, c, index into states)`.
    pub fn new(states: Vec<DensityState>, entries: Vec<(f64, Vec<usize>, usize)>) -> Result<Self> {
        let algebra = states.first().ok_or(Error::EmptyLabelSet)?.algebra().clone();
        for s in &states {
            algebra.expect_same(s.algebra())?;
        }
        let entropies = Arc::new(states.iter().map(von_neumann_entropy).collect());
        Self::build(algebra, Arc::new(states), entropies, entries)
    }

    /// The same states under new classical weights; entropies are reused.
    pub fn reweighted(&self, entries: Vec<(f64, Vec<usize>, usize)>) -> Result<Self> {
        Self::build(self.algebra.clone(), self.states.clone(), self.entropies.clone(), entries)
    }

    fn build(
        algebra: BlockAlgebra,
        states: Arc<Vec<DensityState>>,
        entropies: Arc<Vec<f64>>,
        entries: Vec<(f64, Vec<usize>, usize)>,
    ) -> Result<Self> {
        let width = entries.first().map(|e| e.1.len()).unwrap_or(0);
        let mut total = 0.0;
        for (p, coords, k) in &entries {
            if *p < 0.0 || !p.is_finite() {
                return Err(Error::InvalidDistribution(format!("weight {p}")));
            }
            if coords.len() != width {
                return Err(Error::ShapeMismatch("classical tuples of different lengths".into()));
            }
            if *k >= states.len() {
                return Err(Error::OutOfRange(format!("state index {k}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        let entries = entries
            .into_iter()
            .filter(|(p, _, _)| *p > 0.0)
            .map(|(prob, coords, state)| Entry { prob, coords, state })
            .collect();
        Ok(Self {
            algebra,
            states,
            entropies,
            entries,
        })
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    fn groups(&self, coords: &[usize]) -> BTreeMap<Vec<usize>, Vec<&Entry>> {
        let mut g: BTreeMap<Vec<usize>, Vec<&Entry>> = BTreeMap::new();
        for e in &self.entries {
            g.entry(coords.iter().map(|&k| e.coords[k]).collect()).or_default().push(e);
        }
        g
    }

    /// Shannon entropy of the marginal on `coords`.
    pub fn classical_entropy(&self, coords: &[usize]) -> f64 {
        let p: Vec<f64> = self
            .groups(coords)
            .values()
            .map(|es| es.iter().map(|e| e.prob).sum())
            .collect();
        shannon_entropy(&p)
    }

    /// `H(𝒴|B) = Σ_b P(b) H(ρ̄_b)` with `ρ̄_b` the conditional mixture.
    pub fn quantum_cond_entropy(&self, coords: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for es in self.groups(coords).values() {
            let pb: f64 = es.iter().map(|e| e.prob).sum();
            let first = es[0].state;
            let h = if es.iter().all(|e| e.state == first) {
                self.entropies[first]
            } else {
                // Normalized weights keep groups of tiny mass above the mixture threshold.
                von_neumann_entropy(&mix(
                    &self.algebra,
                    es.iter().map(|e| (e.prob / pb, self.states[e.state].as_element())),
                )?)
            };
            total += pb * h;
        }
        Ok(total)
    }

    /// `H(B𝒴)` (with `quantum`) or `H(B)`.
    pub fn joint_entropy(&self, coords: &[usize], quantum: bool) -> Result<f64> {
        let hc = self.classical_entropy(coords);
        Ok(if quantum { hc + self.quantum_cond_entropy(coords)? } else { hc })
    }

    /// `I(A ∧ 𝒴 | B)`.
    pub fn cond_mutual_info(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        Ok(self.quantum_cond_entropy(b)? - self.quantum_cond_entropy(&ab)?)
    }

    /// `I(A ∧ 𝒴B) = I(A ∧ B) + I(A ∧ 𝒴 | B)`.
    pub fn mutual_info_with(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        let classical = self.classical_entropy(a) + self.classical_entropy(b) - self.classical_entropy(&ab);
        Ok(classical + self.cond_mutual_info(a, b)?)
    }
}
