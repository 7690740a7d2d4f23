//! Density operators on block algebras.

use crate::algebra::{AlgebraElement, BlockAlgebra, SubalgebraEmbedding, TensorProduct};
use crate::linalg::{self, c, Mat, C64};
use crate::operation::Operation;
use crate::{tol, Error, Result};

/// Positive, unit-trace, block-diagonal element.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    el: AlgebraElement,
}

impl DensityState {
    /// Validates a candidate state.
    ///
    /// Hermitian within `tol::HERMITIAN`, trace one within `tol::TRACE`.
    /// Eigenvalues in `[-tol::NEGATIVE_EIGENVALUE, 0)` are clamped to zero and the
    /// spectrum renormalized; anything more negative is rejected.
    pub fn new(el: AlgebraElement) -> Result<Self> {
        let defect = el.hermiticity_defect();
        if defect > tol::HERMITIAN {
            return Err(Error::NotHermitian(defect));
        }
        let tr = el.trace().re;
        if (tr - 1.0).abs() > tol::TRACE {
            return Err(Error::TraceNotOne(tr));
        }
        let alg = el.algebra().clone();
        let mut clamped = false;
        let mut blocks = Vec::with_capacity(alg.num_blocks());
        let mut decomps = Vec::with_capacity(alg.num_blocks());
        for b in el.blocks() {
            let (vals, vecs) = linalg::eigh(b);
            if let Some(&min) = vals.last() {
                if min < -tol::NEGATIVE_EIGENVALUE {
                    return Err(Error::NotPositive(min));
                }
                clamped |= min < 0.0;
            }
            decomps.push((vals, vecs));
        }
        if clamped {
            let total: f64 = decomps.iter().flat_map(|(v, _)| v.iter()).map(|x| x.max(0.0)).sum();
            for (vals, vecs) in &decomps {
                let mut scaled = vecs.clone();
                for (k, &v) in vals.iter().enumerate() {
                    let w = v.max(0.0) / total;
                    for i in 0..scaled.nrows() {
                        scaled[(i, k)] *= w;
                    }
                }
                blocks.push(&scaled * vecs.adjoint());
            }
        } else {
            blocks = el.blocks().iter().map(linalg::hermitian_part).collect();
        }
        Ok(Self {
            el: AlgebraElement::new(alg, blocks)?,
        })
    }

    pub fn from_blocks(algebra: BlockAlgebra, blocks: Vec<Mat>) -> Result<Self> {
        Self::new(AlgebraElement::new(algebra, blocks)?)
    }

    pub fn from_dense(algebra: BlockAlgebra, m: &Mat) -> Result<Self> {
        Self::new(AlgebraElement::from_dense(algebra, m)?)
    }

    /// `|ψ⟩⟨ψ|` after normalization; `ψ` must live in a single block.
    pub fn pure(algebra: &BlockAlgebra, psi: &[C64]) -> Result<Self> {
        if psi.len() != algebra.rep_dim() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} for representation dimension {}",
                psi.len(),
                algebra.rep_dim()
            )));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::TraceNotOne(0.0));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::from_dense(algebra.clone(), &linalg::outer(&v))
    }

    /// `1 / rep_dim`.
    pub fn maximally_mixed(algebra: &BlockAlgebra) -> Self {
        let n = algebra.rep_dim() as f64;
        Self {
            el: algebra.identity().scale(c(1.0 / n, 0.0)),
        }
    }

    /// State diagonal in the concrete basis with the given weights.
    pub fn diagonal(algebra: &BlockAlgebra, weights: &[f64]) -> Result<Self> {
        if weights.len() != algebra.rep_dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for representation dimension {}",
                weights.len(),
                algebra.rep_dim()
            )));
        }
        let m = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
            weights.len(),
            weights.iter().map(|&w| c(w, 0.0)),
        ));
        Self::from_dense(algebra.clone(), &m)
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        self.el.algebra()
    }

    pub fn as_element(&self) -> &AlgebraElement {
        &self.el
    }

    pub fn into_element(self) -> AlgebraElement {
        self.el
    }

    pub fn to_dense(&self) -> Mat {
        self.el.to_dense()
    }

    /// All eigenvalues, descending, clamped at zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.el.eigenvalues().into_iter().map(|x| x.max(0.0)).collect()
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&x| x > tol::SUPPORT).count()
    }

    pub fn is_pure(&self) -> bool {
        self.eigenvalues().first().is_some_and(|&x| (x - 1.0).abs() <= 1e-9)
    }

    /// Restriction to a subalgebra, `ι_* ρ`.
    pub fn restrict(&self, iota: &SubalgebraEmbedding) -> Result<DensityState> {
        restrict(self, iota)
    }
}

/// `ρ = Σ α_i p_i` with rank-one projections `p_i`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<AlgebraElement>,
}

impl Spectrum {
    pub fn reconstruct(&self) -> Result<AlgebraElement> {
        let first = self
            .projectors
            .first()
            .ok_or_else(|| Error::ShapeMismatch("empty spectrum".into()))?;
        let mut acc = first.algebra().zero();
        for (a, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc.add_scaled_assign(p, c(*a, 0.0));
        }
        Ok(acc)
    }
}

pub fn diagonalize(rho: &DensityState) -> Spectrum {
    let alg = rho.algebra();
    let mut pairs: Vec<(f64, AlgebraElement)> = Vec::with_capacity(alg.rep_dim());
    for (bi, b) in rho.as_element().blocks().iter().enumerate() {
        let (vals, vecs) = linalg::eigh(b);
        for (k, &v) in vals.iter().enumerate() {
            let col: Vec<C64> = vecs.column(k).iter().cloned().collect();
            let mut blocks = alg.zero().into_blocks();
            blocks[bi] = linalg::outer(&col);
            let p = AlgebraElement::new(alg.clone(), blocks).expect("block shape");
            pairs.push((v.max(0.0), p));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (eigenvalues, projectors) = pairs.into_iter().unzip();
    Spectrum {
        eigenvalues,
        projectors,
    }
}

/// The unique state `σ` on the domain with `Tr(σ B) = Tr(ρ ι(B))`.
pub fn restrict(rho: &DensityState, iota: &SubalgebraEmbedding) -> Result<DensityState> {
    iota.preadjoint(rho)
}

/// Partial trace onto the factors in `keep` by index contraction.
pub fn partial_trace(rho: &DensityState, tensor: &TensorProduct, keep: &[usize]) -> Result<DensityState> {
    let (_, el) = tensor.partial_trace(rho.as_element(), keep)?;
    DensityState::new(el)
}

/// `φ_* ρ`; fails if the result is not a state.
pub fn preadjoint_apply(map: &dyn Operation, rho: &DensityState) -> Result<DensityState> {
    map.preadjoint(rho)
}

/// A pure state on `L(H) ⊗ L(C^r)` whose first marginal is the input.
#[derive(Clone, Debug)]
pub struct Purification {
    pub state: DensityState,
    pub tensor: TensorProduct,
}

/// `|ψ⟩ = Σ √α_i |e_i⟩ ⊗ |i⟩` over the support of a single-block state.
pub fn purify(rho: &DensityState) -> Result<Purification> {
    let alg = rho.algebra();
    if alg.num_blocks() != 1 {
        return Err(Error::Precondition(
            "purification needs a full matrix algebra; embed multi-block states first".into(),
        ));
    }
    let d = alg.rep_dim();
    let (vals, vecs) = linalg::eigh(rho.as_element().block(0));
    let kept: Vec<usize> = (0..d).filter(|&k| vals[k] > tol::SUPPORT).collect();
    let r = kept.len().max(1);
    let mut psi = vec![c(0.0, 0.0); d * r];
    for (slot, &k) in kept.iter().enumerate() {
        let s = vals[k].sqrt();
        for i in 0..d {
            psi[i * r + slot] += vecs[(i, k)] * s;
        }
    }
    let tensor = TensorProduct::new(vec![alg.clone(), BlockAlgebra::full(r)])?;
    let state = DensityState::pure(tensor.algebra(), &psi)?;
    Ok(Purification { state, tensor })
}

/// The same matrix read in the full algebra `L(⊕ H_i)`; entropies are unchanged.
pub fn embed_full(rho: &DensityState) -> DensityState {
    let alg = BlockAlgebra::full(rho.algebra().rep_dim());
    DensityState {
        el: AlgebraElement::from_dense(alg, &rho.to_dense()).expect("full algebra accepts any matrix"),
    }
}

/// `σ_1 ⊗ … ⊗ σ_m`.
pub fn product_state(parts: &[&DensityState]) -> Result<(TensorProduct, DensityState)> {
    let tensor = TensorProduct::new(parts.iter().map(|p| p.algebra().clone()).collect())?;
    let els: Vec<&AlgebraElement> = parts.iter().map(|p| p.as_element()).collect();
    let state = DensityState::new(tensor.embed_product(&els)?)?;
    Ok((tensor, state))
}

/// A state together with a decomposition into product states.
#[derive(Clone, Debug)]
pub struct SeparableState {
    pub state: DensityState,
    pub tensor: TensorProduct,
    pub certificate: Vec<(f64, Vec<DensityState>)>,
}

/// `Σ_j w_j σ_{j,1} ⊗ … ⊗ σ_{j,m}`.
pub fn make_separable(parts: Vec<(f64, Vec<DensityState>)>) -> Result<SeparableState> {
    let (_, first) = parts
        .first()
        .ok_or_else(|| Error::InvalidDistribution("no product terms".into()))?;
    let algebras: Vec<BlockAlgebra> = first.iter().map(|s| s.algebra().clone()).collect();
    let total: f64 = parts.iter().map(|(w, _)| *w).sum();
    if parts.iter().any(|(w, _)| *w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidDistribution("negative weight".into()));
    }
    if (total - 1.0).abs() > tol::TRACE {
        return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
    }
    let tensor = TensorProduct::new(algebras.clone())?;
    let mut acc = tensor.algebra().zero();
    for (w, factors) in &parts {
        if factors.len() != algebras.len() {
            return Err(Error::ShapeMismatch("product terms with different factor counts".into()));
        }
        for (f, a) in factors.iter().zip(&algebras) {
            a.expect_same(f.algebra())?;
        }
        let els: Vec<&AlgebraElement> = factors.iter().map(|f| f.as_element()).collect();
        acc.add_scaled_assign(&tensor.embed_product(&els)?, c(*w, 0.0));
    }
    Ok(SeparableState {
        state: DensityState::new(acc)?,
        tensor,
        certificate: parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> (TensorProduct, DensityState) {
        let t = TensorProduct::new(vec![BlockAlgebra::full(2), BlockAlgebra::full(2)]).unwrap();
        let s = 0.5f64.sqrt();
        let psi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let rho = DensityState::pure(t.algebra(), &psi).unwrap();
        (t, rho)
    }

    #[test]
    fn rejects_invalid() {
        let a = BlockAlgebra::full(2);
        assert!(matches!(DensityState::diagonal(&a, &[0.6, 0.6]), Err(Error::TraceNotOne(_))));
        assert!(matches!(DensityState::diagonal(&a, &[1.1, -0.1]), Err(Error::NotPositive(_))));
        let m = Mat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityState::from_dense(a, &m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn clamps_tiny_negatives() {
        let a = BlockAlgebra::full(2);
        let rho = DensityState::diagonal(&a, &[1.0 + 1e-9, -1e-9]).unwrap();
        assert!(rho.eigenvalues().iter().all(|&x| x >= 0.0));
        assert!((rho.as_element().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let (t, rho) = bell();
        let m = partial_trace(&rho, &t, &[0]).unwrap();
        let mm = DensityState::maximally_mixed(&BlockAlgebra::full(2));
        assert!(m.as_element().sub(mm.as_element()).unwrap().frobenius() < 1e-15);
        let via = restrict(&rho, &t.factor_embedding(0).unwrap()).unwrap();
        assert!(via.as_element().sub(m.as_element()).unwrap().frobenius() < 1e-15);
    }

    #[test]
    fn restrict_to_trivial_is_one() {
        let (_, rho) = bell();
        let r = restrict(&rho, &SubalgebraEmbedding::trivial(rho.algebra())).unwrap();
        assert!((r.as_element().block(0)[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn purify_mixed_qubit_is_bell() {
        let mm = DensityState::maximally_mixed(&BlockAlgebra::full(2));
        let p = purify(&mm).unwrap();
        assert!(p.state.is_pure());
        assert_eq!(p.tensor.algebra().block_dims(), &[4]);
        let back = partial_trace(&p.state, &p.tensor, &[0]).unwrap();
        assert!(back.as_element().sub(mm.as_element()).unwrap().frobenius() < 1e-14);
    }

    #[test]
    fn purify_rejects_multi_block() {
        let rho = DensityState::maximally_mixed(&BlockAlgebra::new(vec![1, 1]).unwrap());
        assert!(matches!(purify(&rho), Err(Error::Precondition(_))));
        assert!(purify(&embed_full(&rho)).is_ok());
    }

    #[test]
    fn pure_spectrum() {
        let rho = DensityState::pure(&BlockAlgebra::full(2), &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let s = diagonalize(&rho);
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14 && s.eigenvalues[1].abs() < 1e-14);
        assert!(s.reconstruct().unwrap().sub(rho.as_element()).unwrap().frobenius() < 1e-14);
    }

    #[test]
    fn separable_weights_checked() {
        let a = DensityState::maximally_mixed(&BlockAlgebra::full(2));
        assert!(make_separable(vec![(0.5, vec![a.clone(), a.clone()])]).is_err());
        let s = make_separable(vec![(1.0, vec![a.clone(), a])]).unwrap();
        assert_eq!(s.tensor.algebra().block_dims(), &[4]);
    }
}
