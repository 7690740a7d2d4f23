//! Finite POVMs, joint observables and the measurement instrument.

use serde::{Deserialize, Serialize};

use crate::algebra::{commutator_norm, AlgebraElement, BlockAlgebra, Label, TensorProduct};
use crate::linalg::{self, c, Mat, C64};
use crate::operation::KrausMap;
use crate::state::DensityState;
use crate::{tol, Error, Result};

/// Largest deviation of `Σ X_j` from the unit accepted before renormalization.
const UNIT_SUM_TOL: f64 = 1e-8;

/// A resolution of the unit into positive effects, one per outcome label.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    algebra: BlockAlgebra,
    outcomes: Vec<Label>,
    effects: Vec<AlgebraElement>,
}

impl Povm {
    /// Validates positivity and the unit sum, then renormalizes once by
    /// `S^{-1/2} X_j S^{-1/2}` with `S = Σ X_j`. Effects already summing to the
    /// unit within 1e-12 are kept as given, so re-reading a POVM is exact.
    pub fn new(algebra: BlockAlgebra, outcomes: Vec<Label>, effects: Vec<AlgebraElement>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptyLabelSet);
        }
        if outcomes.len() != effects.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {} effects",
                outcomes.len(),
                effects.len()
            )));
        }
        for (i, l) in outcomes.iter().enumerate() {
            if outcomes[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        let mut sum = algebra.zero();
        for e in &effects {
            algebra.expect_same(e.algebra())?;
            let defect = e.hermiticity_defect();
            if defect > tol::HERMITIAN {
                return Err(Error::NotHermitian(defect));
            }
            if let Some(&min) = e.eigenvalues().last() {
                if min < -tol::NEGATIVE_EIGENVALUE {
                    return Err(Error::NotPositive(min));
                }
            }
            sum.add_scaled_assign(e, c(1.0, 0.0));
        }
        let dev = sum.sub(&algebra.identity())?.op_norm();
        if dev > UNIT_SUM_TOL {
            return Err(Error::NotUnital(dev));
        }
        if dev <= 1e-12 {
            return Ok(Self {
                algebra,
                outcomes,
                effects,
            });
        }
        let inv_sqrt: Vec<Mat> = sum
            .blocks()
            .iter()
            .map(|b| linalg::hermitian_function(b, |x| 1.0 / x.sqrt()))
            .collect();
        let effects = effects
            .into_iter()
            .map(|e| {
                let blocks = e
                    .blocks()
                    .iter()
                    .zip(&inv_sqrt)
                    .map(|(b, s)| linalg::hermitian_part(&(s * b * s)))
                    .collect();
                AlgebraElement::new(algebra.clone(), blocks)
            })
            .collect::<Result<Vec<_>>>()?;
        let povm = Self {
            algebra,
            outcomes,
            effects,
        };
        debug_assert!(povm.unit_defect() <= 1e-12);
        Ok(povm)
    }

    /// Diagonal projections of the concrete basis, labelled `0..n`.
    pub fn computational(algebra: &BlockAlgebra) -> Self {
        let n = algebra.rep_dim();
        let dense = |k: usize| {
            let mut m = linalg::zeros(n, n);
            m[(k, k)] = c(1.0, 0.0);
            AlgebraElement::from_dense(algebra.clone(), &m).expect("diagonal entries are in-block")
        };
        Self {
            algebra: algebra.clone(),
            outcomes: Label::range(n),
            effects: (0..n).map(dense).collect(),
        }
    }

    /// The one-outcome observable `{1}`.
    pub fn trivial(algebra: &BlockAlgebra) -> Self {
        Self {
            algebra: algebra.clone(),
            outcomes: vec![Label::atom("1")],
            effects: vec![algebra.identity()],
        }
    }

    /// Rank-one projections onto the columns of an orthonormal basis.
    pub fn projective(algebra: &BlockAlgebra, basis: &Mat, labels: Vec<Label>) -> Result<Self> {
        let effects = (0..basis.ncols())
            .map(|k| {
                let col: Vec<_> = basis.column(k).iter().cloned().collect();
                AlgebraElement::from_dense(algebra.clone(), &linalg::outer(&col))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(algebra.clone(), labels, effects)
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn outcomes(&self) -> &[Label] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[AlgebraElement] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.outcomes.iter().position(|l| l == label)
    }

    /// Operator norm of `Σ X_j - 1`.
    pub fn unit_defect(&self) -> f64 {
        let mut sum = self.algebra.zero();
        for e in &self.effects {
            sum.add_scaled_assign(e, c(1.0, 0.0));
        }
        sum.sub(&self.algebra.identity()).expect("same algebra").op_norm()
    }

    /// Same effects under new labels.
    pub fn relabel(&self, outcomes: Vec<Label>) -> Result<Self> {
        Self::new(self.algebra.clone(), outcomes, self.effects.clone())
    }

    /// Positive square roots of the effects.
    pub fn sqrt_effects(&self) -> Vec<Mat> {
        self.effects.iter().map(|e| linalg::psd_sqrt(&e.to_dense())).collect()
    }
}

/// Outcome labels with their probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub labels: Vec<Label>,
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(labels: Vec<Label>, probabilities: Vec<f64>) -> Result<Self> {
        if labels.len() != probabilities.len() {
            return Err(Error::ShapeMismatch("labels and probabilities differ in length".into()));
        }
        if let Some(p) = probabilities.iter().find(|&&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("probability {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { labels, probabilities })
    }

    pub fn entropy(&self) -> f64 {
        linalg::entropy_bits(&self.probabilities)
    }

    pub fn probability(&self, label: &Label) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.probabilities[i])
    }
}

/// `p_j = Tr(ρ X_j)`, small negative rounding clamped to zero.
pub fn measure(x: &Povm, rho: &DensityState) -> Result<OutcomeDistribution> {
    x.algebra.expect_same(rho.algebra())?;
    let mut probs = Vec::with_capacity(x.len());
    for e in &x.effects {
        let p = rho.as_element().trace_product(e).re;
        if p < -tol::TRACE {
            return Err(Error::InvalidDistribution(format!("negative probability {p}")));
        }
        probs.push(p.max(0.0));
    }
    OutcomeDistribution::new(x.outcomes.clone(), probs)
}

/// Outcome of a compatibility check between two POVMs.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableCompatibility {
    pub compatible: bool,
    /// Worst effect pair `(j, k)` and its commutator norm.
    pub worst: Option<(usize, usize, f64)>,
}

pub fn check_observable_compatible(x: &Povm, y: &Povm, tol: f64) -> Result<ObservableCompatibility> {
    x.algebra.expect_same(&y.algebra)?;
    let mut worst: Option<(usize, usize, f64)> = None;
    for (j, a) in x.effects.iter().enumerate() {
        for (k, b) in y.effects.iter().enumerate() {
            let n = commutator_norm(a, b, tol);
            if worst.is_none_or(|w| n > w.2) {
                worst = Some((j, k, n));
            }
        }
    }
    Ok(ObservableCompatibility {
        compatible: worst.is_none_or(|w| w.2 <= tol),
        worst,
    })
}

/// The joint observable `X × Y`, effects `X_j Y_k`, labels `(j, k)`.
pub fn joint(x: &Povm, y: &Povm) -> Result<Povm> {
    let comp = check_observable_compatible(x, y, tol::COMMUTATOR)?;
    if !comp.compatible {
        let (j, k, n) = comp.worst.expect("nonempty POVMs");
        return Err(Error::Incompatible {
            context: format!("effects {} and {}", x.outcomes[j], y.outcomes[k]),
            norm: n,
            tol: tol::COMMUTATOR,
        });
    }
    let mut labels = Vec::with_capacity(x.len() * y.len());
    let mut effects = Vec::with_capacity(x.len() * y.len());
    for (lx, ex) in x.outcomes.iter().zip(&x.effects) {
        for (ly, ey) in y.outcomes.iter().zip(&y.effects) {
            labels.push(Label::pair(lx.clone(), ly.clone()));
            let p = ex.mul(ey)?;
            effects.push(p.add(&p.adjoint())?.scale(c(0.5, 0.0)));
        }
    }
    Povm::new(x.algebra.clone(), labels, effects)
}

/// Commutative algebra `CΩ` of the outcome set.
pub fn outcome_algebra(x: &Povm) -> BlockAlgebra {
    BlockAlgebra::commutative(x.len()).expect("POVMs are nonempty")
}

/// Eigenvalues at or below this are dropped from the Kraus form of an effect.
const EFFECT_RANK_TOL: f64 = 1e-14;

/// The exterior part `CΩ → A`, `j ↦ X_j`; its dual maps `ρ` to `P^X`.
///
/// Kraus operator `k` stacks the `k`-th weighted eigenvector of every effect, so
/// there are as many as the largest effect rank.
pub fn as_operation(x: &Povm) -> KrausMap {
    let n = x.algebra.rep_dim();
    let m = x.len();
    let vectors: Vec<Vec<Vec<C64>>> = x
        .effects
        .iter()
        .map(|e| {
            let (values, vecs) = linalg::eigh(&e.to_dense());
            values
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > EFFECT_RANK_TOL)
                .map(|(k, &l)| vecs.column(k).iter().map(|z| z.conj() * l.sqrt()).collect())
                .collect()
        })
        .collect();
    let rank = vectors.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let kraus = (0..rank)
        .map(|k| Mat::from_fn(m, n, |j, col| vectors[j].get(k).map_or(c(0.0, 0.0), |v| v[col])))
        .collect();
    KrausMap::new(outcome_algebra(x), x.algebra.clone(), kraus).expect("POVM effects sum to one")
}

/// The measurement instrument of a POVM in its three forms.
#[derive(Clone, Debug)]
pub struct ObservableOperations {
    /// `CΩ ⊗ A → A`, `j ⊗ A ↦ √X_j A √X_j`.
    pub total: KrausMap,
    pub tensor: TensorProduct,
    /// `A → A`, `A ↦ Σ_j √X_j A √X_j`.
    pub interior: KrausMap,
    /// `CΩ → A`, `j ↦ X_j`.
    pub exterior: KrausMap,
}

pub fn total_operation(x: &Povm) -> Result<ObservableOperations> {
    let n = x.algebra.rep_dim();
    let roots = x.sqrt_effects();
    let tensor = TensorProduct::new(vec![outcome_algebra(x), x.algebra.clone()])?;
    // One-dimensional outcome blocks make the block order coincide with the
    // Kronecker order, so the stacked square roots are the Kraus operator.
    debug_assert!(tensor.permutation().iter().enumerate().all(|(i, &p)| i == p));
    let mut v = linalg::zeros(x.len() * n, n);
    for (j, r) in roots.iter().enumerate() {
        v.view_mut((j * n, 0), (n, n)).copy_from(r);
    }
    let total = KrausMap::new(tensor.algebra().clone(), x.algebra.clone(), vec![v])?;
    let interior = KrausMap::new(x.algebra.clone(), x.algebra.clone(), roots)?;
    Ok(ObservableOperations {
        total,
        tensor,
        interior,
        exterior: as_operation(x),
    })
}

/// `(Tr(ρX_j), √X_j ρ √X_j / Tr(ρX_j))`; the state is `None` for zero-probability outcomes.
pub fn post_measurement_states(x: &Povm, rho: &DensityState) -> Result<Vec<(f64, Option<DensityState>)>> {
    x.algebra.expect_same(rho.algebra())?;
    let d = rho.to_dense();
    x.sqrt_effects()
        .iter()
        .map(|r| {
            let m = r * &d * r;
            let p = m.trace().re;
            if p <= 1e-12 {
                return Ok((p.max(0.0), None));
            }
            let s = DensityState::from_dense(x.algebra.clone(), &(m * c(1.0 / p, 0.0)))?;
            Ok((p, Some(s)))
        })
        .collect()
}
