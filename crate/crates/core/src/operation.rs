//! Completely positive unital maps and their trace duals.
//!
//! Operators flow from `source` to `target`: `φ(A) = Σ_m V_m* A V_m` with each
//! `V_m` a `rep_dim(source) × rep_dim(target)` matrix. States flow the other way,
//! `φ_*(ρ) = Σ_m V_m ρ V_m*`, read back into the block structure of `source`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{commutator_norm, AlgebraElement, BlockAlgebra, SubalgebraEmbedding, TensorProduct};
use crate::linalg::{self, c, Mat};
use crate::state::DensityState;
use crate::{tol, Error, Result};

/// A linear map between block algebras, known by its action on operators.
pub trait Operation: Send + Sync {
    fn source(&self) -> &BlockAlgebra;
    fn target(&self) -> &BlockAlgebra;
    fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement>;

    /// `φ_*` on an arbitrary element of the target, fixed by
    /// `Tr(φ_*(ρ) e_u) = Tr(ρ φ(e_u))` on the matrix units of the source.
    fn preadjoint_element(&self, rho: &AlgebraElement) -> Result<AlgebraElement> {
        self.target().expect_same(rho.algebra())?;
        let mut blocks = self.source().zero().into_blocks();
        for u in self.source().units() {
            let img = self.apply(&self.source().unit(u))?;
            // Tr(σ e_kl) = σ_lk
            blocks[u.block][(u.col, u.row)] = rho.trace_product(&img);
        }
        AlgebraElement::new(self.source().clone(), blocks)
    }

    fn preadjoint(&self, rho: &DensityState) -> Result<DensityState> {
        DensityState::new(self.preadjoint_element(rho.as_element())?)
    }
}

impl Operation for SubalgebraEmbedding {
    fn source(&self) -> &BlockAlgebra {
        self.domain()
    }

    fn target(&self) -> &BlockAlgebra {
        self.parent()
    }

    fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.map(a)
    }
}

impl<T: Operation + ?Sized> Operation for &T {
    fn source(&self) -> &BlockAlgebra {
        (**self).source()
    }

    fn target(&self) -> &BlockAlgebra {
        (**self).target()
    }

    fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        (**self).apply(a)
    }

    fn preadjoint_element(&self, rho: &AlgebraElement) -> Result<AlgebraElement> {
        (**self).preadjoint_element(rho)
    }

    fn preadjoint(&self, rho: &DensityState) -> Result<DensityState> {
        (**self).preadjoint(rho)
    }
}

/// Completely positive map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausMap {
    source: BlockAlgebra,
    target: BlockAlgebra,
    kraus: Vec<Mat>,
    unital: bool,
}

impl KrausMap {
    /// A unital map. Rejects Kraus lists that do not respect the block structures.
    pub fn new(source: BlockAlgebra, target: BlockAlgebra, kraus: Vec<Mat>) -> Result<Self> {
        let map = Self::build(source, target, kraus)?;
        let defect = map.unital_defect();
        if defect > tol::IDEMPOTENT {
            return Err(Error::NotUnital(defect));
        }
        Ok(Self { unital: true, ..map })
    }

    /// A map with `φ(1) ≤ 1`, e.g. one branch of an instrument.
    pub fn new_subunital(source: BlockAlgebra, target: BlockAlgebra, kraus: Vec<Mat>) -> Result<Self> {
        let map = Self::build(source, target, kraus)?;
        let gap = &map.target.identity().to_dense() - map.kraus_gram();
        let min = linalg::eigvalsh(&gap).last().copied().unwrap_or(0.0);
        if min < -tol::COMMUTATOR {
            return Err(Error::NotUnital(-min));
        }
        let unital = map.unital_defect() <= tol::IDEMPOTENT;
        Ok(Self { unital, ..map })
    }

    fn build(source: BlockAlgebra, target: BlockAlgebra, kraus: Vec<Mat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::ShapeMismatch("no Kraus operators".into()));
        }
        let (ns, nt) = (source.rep_dim(), target.rep_dim());
        for (m, v) in kraus.iter().enumerate() {
            if v.nrows() != ns || v.ncols() != nt {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator {m} is {}x{}, expected {ns}x{nt}",
                    v.nrows(),
                    v.ncols()
                )));
            }
        }
        let map = Self {
            source,
            target,
            kraus,
            unital: false,
        };
        // Every source matrix unit must land block-diagonally in the target.
        for u in map.source.units() {
            map.apply(&map.source.unit(u))?;
        }
        Ok(map)
    }

    pub fn identity(algebra: &BlockAlgebra) -> Self {
        Self {
            source: algebra.clone(),
            target: algebra.clone(),
            kraus: vec![linalg::identity(algebra.rep_dim())],
            unital: true,
        }
    }

    /// `C → A`, `z ↦ z1`. Its trace dual is the total trace.
    pub fn unit_map(algebra: &BlockAlgebra) -> Self {
        let n = algebra.rep_dim();
        let kraus = (0..n)
            .map(|k| {
                let mut v = linalg::zeros(1, n);
                v[(0, k)] = c(1.0, 0.0);
                v
            })
            .collect();
        Self {
            source: BlockAlgebra::trivial(),
            target: algebra.clone(),
            kraus,
            unital: true,
        }
    }

    /// Conjugation by a unitary `U` of the full algebra: `A ↦ U* A U`.
    pub fn unitary(u: &Mat) -> Result<Self> {
        let alg = BlockAlgebra::full(u.nrows());
        Self::new(alg.clone(), alg, vec![u.clone()])
    }

    /// Pinching onto an orthonormal basis, `A ↦ Σ_k P_k A P_k`.
    pub fn pinching(basis: &Mat) -> Result<Self> {
        let n = basis.nrows();
        let kraus = (0..basis.ncols())
            .map(|k| {
                let col: Vec<_> = basis.column(k).iter().cloned().collect();
                linalg::outer(&col)
            })
            .collect();
        let alg = BlockAlgebra::full(n);
        Self::new(alg.clone(), alg, kraus)
    }

    pub fn source(&self) -> &BlockAlgebra {
        &self.source
    }

    pub fn target(&self) -> &BlockAlgebra {
        &self.target
    }

    pub fn kraus(&self) -> &[Mat] {
        &self.kraus
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    /// `Σ V* V`, which equals `φ(1)`.
    fn kraus_gram(&self) -> Mat {
        let nt = self.target.rep_dim();
        self.kraus
            .iter()
            .fold(linalg::zeros(nt, nt), |acc, v| acc + v.adjoint() * v)
    }

    fn unital_defect(&self) -> f64 {
        linalg::frobenius(&(self.kraus_gram() - linalg::identity(self.target.rep_dim())))
    }

    /// `Σ V V*` read on the source blocks; `Tr φ(A) = Tr(S A)`.
    fn trace_operator(&self) -> AlgebraElement {
        let ns = self.source.rep_dim();
        let s = self
            .kraus
            .iter()
            .fold(linalg::zeros(ns, ns), |acc, v| acc + v * v.adjoint());
        pinch(&self.source, &s)
    }

    /// `Tr φ(A) = Tr A` for all `A`.
    pub fn trace_preserving(&self) -> bool {
        self.trace_operator()
            .sub(&self.source.identity())
            .map(|d| d.op_norm() <= tol::IDEMPOTENT)
            .unwrap_or(false)
    }

    /// `Tr φ(A) ≤ Tr A` for all positive `A`.
    pub fn trace_nonincreasing(&self) -> bool {
        let gap = self.source.identity().sub(&self.trace_operator()).expect("same algebra");
        gap.eigenvalues().last().is_none_or(|&m| m >= -tol::COMMUTATOR)
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.source.expect_same(a.algebra())?;
        let d = a.to_dense();
        let nt = self.target.rep_dim();
        let out = self
            .kraus
            .iter()
            .fold(linalg::zeros(nt, nt), |acc, v| acc + v.adjoint() * &d * v);
        AlgebraElement::from_dense(self.target.clone(), &out)
    }

    pub fn preadjoint_element(&self, rho: &AlgebraElement) -> Result<AlgebraElement> {
        self.target.expect_same(rho.algebra())?;
        let d = rho.to_dense();
        let ns = self.source.rep_dim();
        let out = self
            .kraus
            .iter()
            .fold(linalg::zeros(ns, ns), |acc, v| acc + v * &d * v.adjoint());
        Ok(pinch(&self.source, &out))
    }

    /// Choi matrix `Σ_{kl} E_kl ⊗ φ(E_kl)` over the concrete source space.
    pub fn choi(&self) -> Mat {
        let (ns, nt) = (self.source.rep_dim(), self.target.rep_dim());
        let mut out = linalg::zeros(ns * nt, ns * nt);
        for v in &self.kraus {
            let w: Vec<_> = (0..ns * nt).map(|idx| v[(idx / nt, idx % nt)].conj()).collect();
            out += linalg::outer(&w);
        }
        out
    }

    /// Kraus form of any map from its action on matrix units, via the Choi matrix.
    pub fn from_operation(op: &dyn Operation) -> Result<Self> {
        let source = op.source().clone();
        let target = op.target().clone();
        let nt = target.rep_dim();
        let ns = source.rep_dim();
        let offsets = source.offsets();
        let mut kraus = Vec::new();
        let mut gram_max = 0.0f64;
        for (b, &d) in source.block_dims().iter().enumerate() {
            let mut choi = linalg::zeros(d * nt, d * nt);
            for k in 0..d {
                for l in 0..d {
                    let img = op
                        .apply(&source.unit(crate::algebra::MatrixUnit { block: b, row: k, col: l }))?
                        .to_dense();
                    choi.view_mut((k * nt, l * nt), (nt, nt)).copy_from(&img);
                }
            }
            let (vals, vecs) = linalg::eigh(&choi);
            gram_max = gram_max.max(vals.first().copied().unwrap_or(0.0));
            for (idx, &lambda) in vals.iter().enumerate() {
                if lambda < -tol::NEGATIVE_EIGENVALUE {
                    return Err(Error::NotPositive(lambda));
                }
                if lambda <= tol::SUPPORT * gram_max.max(1.0) {
                    continue;
                }
                let s = lambda.sqrt();
                let mut v = linalg::zeros(ns, nt);
                for k in 0..d {
                    for t in 0..nt {
                        v[(offsets[b] + k, t)] = vecs[(k * nt + t, idx)].conj() * s;
                    }
                }
                kraus.push(v);
            }
        }
        if kraus.is_empty() {
            kraus.push(linalg::zeros(ns, nt));
        }
        Self::new_subunital(source, target, kraus)
    }

    /// Operators flow `psi` then `phi`: the result is `φ∘ψ`, and states flow `φ_*` then `ψ_*`.
    pub fn compose(phi: &KrausMap, psi: &KrausMap) -> Result<KrausMap> {
        phi.source.expect_same(&psi.target)?;
        let mut kraus = Vec::with_capacity(phi.kraus.len() * psi.kraus.len());
        for v in &psi.kraus {
            for w in &phi.kraus {
                kraus.push(v * w);
            }
        }
        let unital = phi.unital && psi.unital;
        Ok(KrausMap {
            source: psi.source.clone(),
            target: phi.target.clone(),
            kraus,
            unital,
        })
    }

    /// `φ_1 ⊗ … ⊗ φ_m` together with the source and target products.
    pub fn tensor_many(maps: &[&KrausMap]) -> Result<(KrausMap, TensorProduct, TensorProduct)> {
        let src = TensorProduct::new(maps.iter().map(|m| m.source.clone()).collect())?;
        let tgt = TensorProduct::new(maps.iter().map(|m| m.target.clone()).collect())?;
        let mut kron: Vec<Mat> = vec![Mat::from_element(1, 1, c(1.0, 0.0))];
        for m in maps {
            kron = kron
                .iter()
                .flat_map(|a| m.kraus.iter().map(move |b| linalg::kron(a, b)))
                .collect();
        }
        let ps = src.permutation();
        let pt = tgt.permutation();
        let kraus = kron
            .iter()
            .map(|k| Mat::from_fn(ps.len(), pt.len(), |i, j| k[(ps[i], pt[j])]))
            .collect();
        let map = KrausMap {
            source: src.algebra().clone(),
            target: tgt.algebra().clone(),
            kraus,
            unital: maps.iter().all(|m| m.unital),
        };
        Ok((map, src, tgt))
    }

    pub fn tensor(&self, other: &KrausMap) -> Result<(KrausMap, TensorProduct, TensorProduct)> {
        Self::tensor_many(&[self, other])
    }

    pub fn tensor_power(&self, n: usize) -> Result<(KrausMap, TensorProduct, TensorProduct)> {
        if n == 0 {
            return Err(Error::OutOfRange("tensor power 0".into()));
        }
        let maps: Vec<&KrausMap> = std::iter::repeat_n(self, n).collect();
        Self::tensor_many(&maps)
    }

    /// Product `φ_1 ⋯ φ_m` of compatible operations into one algebra, in Kraus form.
    pub fn product(factors: &[&dyn Operation]) -> Result<(KrausMap, TensorProduct)> {
        let p = OperationProduct::new(factors.to_vec())?;
        let map = KrausMap::from_operation(&p)?;
        Ok((map, p.tensor))
    }

    /// Random unital map with a trace-preserving dual, sliced from a random isometry.
    pub fn random_cptp(source_dim: usize, target_dim: usize, kraus_rank: usize, seed: u64) -> Result<Self> {
        use rand::SeedableRng;
        if source_dim == 0 || target_dim == 0 {
            return Err(Error::OutOfRange("dimensions must be positive".into()));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self::random_cptp_blocks(
            &BlockAlgebra::full(source_dim),
            &BlockAlgebra::full(target_dim),
            kraus_rank,
            &mut rng,
        )
    }

    /// Random unital map between block algebras; each target block gets its own isometry.
    pub fn random_cptp_blocks<R: Rng + ?Sized>(
        source: &BlockAlgebra,
        target: &BlockAlgebra,
        kraus_rank: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if kraus_rank == 0 {
            return Err(Error::OutOfRange("kraus_rank must be at least 1".into()));
        }
        let ns = source.rep_dim();
        let nt = target.rep_dim();
        let widest = target.block_dims().iter().copied().max().unwrap_or(0);
        if kraus_rank * ns < widest {
            return Err(Error::OutOfRange(format!(
                "kraus_rank {kraus_rank} too small: need rank * {ns} >= {widest}"
            )));
        }
        let mut kraus = Vec::with_capacity(kraus_rank * target.num_blocks());
        for (&o, &d) in target.offsets().iter().zip(target.block_dims()) {
            let w = random_isometry(kraus_rank * ns, d, rng);
            for m in 0..kraus_rank {
                let mut v = linalg::zeros(ns, nt);
                v.view_mut((0, o), (ns, d)).copy_from(&w.view((m * ns, 0), (ns, d)));
                kraus.push(v);
            }
        }
        Self::new(source.clone(), target.clone(), kraus)
    }
}

impl Operation for KrausMap {
    fn source(&self) -> &BlockAlgebra {
        &self.source
    }

    fn target(&self) -> &BlockAlgebra {
        &self.target
    }

    fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        KrausMap::apply(self, a)
    }

    fn preadjoint_element(&self, rho: &AlgebraElement) -> Result<AlgebraElement> {
        KrausMap::preadjoint_element(self, rho)
    }
}

/// Block-diagonal part of a dense matrix.
pub(crate) fn pinch(alg: &BlockAlgebra, m: &Mat) -> AlgebraElement {
    let blocks = alg
        .offsets()
        .iter()
        .zip(alg.block_dims())
        .map(|(&o, &d)| m.view((o, o), (d, d)).into_owned())
        .collect();
    AlgebraElement::new(alg.clone(), blocks).expect("blocks match the algebra")
}

/// `rows × cols` matrix with orthonormal columns (QR of a Ginibre matrix).
pub(crate) fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    assert!(rows >= cols);
    let g = Mat::from_fn(rows, rows, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix the phases so the distribution is Haar.
    let mut out = q.columns(0, cols).into_owned();
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..rows {
            out[(i, k)] *= phase;
        }
    }
    out
}

/// Lazy product of operations with a common target and commuting images:
/// `e_1 ⊗ … ⊗ e_m ↦ φ_1(e_1)⋯φ_m(e_m)`.
pub struct OperationProduct<'a> {
    factors: Vec<&'a dyn Operation>,
    tensor: TensorProduct,
    images: Vec<Vec<AlgebraElement>>,
}

impl<'a> OperationProduct<'a> {
    pub fn new(factors: Vec<&'a dyn Operation>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::ShapeMismatch("product of no operations".into()))?;
        let target = first.target().clone();
        for f in &factors {
            target.expect_same(f.target())?;
        }
        let tensor = TensorProduct::new(factors.iter().map(|f| f.source().clone()).collect())?;
        let images: Vec<Vec<AlgebraElement>> = factors
            .iter()
            .map(|f| {
                f.source()
                    .units()
                    .into_iter()
                    .map(|u| f.apply(&f.source().unit(u)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                for a in &images[i] {
                    for b in &images[j] {
                        let n = commutator_norm(a, b, tol::COMMUTATOR);
                        if n > tol::COMMUTATOR {
                            return Err(Error::Incompatible {
                                context: format!("images of operations {i} and {j}"),
                                norm: n,
                                tol: tol::COMMUTATOR,
                            });
                        }
                    }
                }
            }
        }
        Ok(Self {
            factors,
            tensor,
            images,
        })
    }

    pub fn tensor(&self) -> &TensorProduct {
        &self.tensor
    }

    fn unit_image(&self, u: crate::algebra::MatrixUnit) -> Result<AlgebraElement> {
        let parts = self.tensor.split_unit(u);
        let mut acc: Option<AlgebraElement> = None;
        for (f, p) in parts.into_iter().enumerate() {
            let img = &self.images[f][self.factors[f].source().unit_index(p)];
            acc = Some(match acc {
                None => img.clone(),
                Some(a) => a.mul(img)?,
            });
        }
        Ok(acc.expect("at least one factor"))
    }
}

impl Operation for OperationProduct<'_> {
    fn source(&self) -> &BlockAlgebra {
        self.tensor.algebra()
    }

    fn target(&self) -> &BlockAlgebra {
        self.factors[0].target()
    }

    fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.source().expect_same(a.algebra())?;
        let mut out = self.target().zero();
        for u in self.source().units() {
            let coeff = a.coefficient(u);
            if coeff.norm() > 0.0 {
                out.add_scaled_assign(&self.unit_image(u)?, coeff);
            }
        }
        Ok(out)
    }

    fn preadjoint_element(&self, rho: &AlgebraElement) -> Result<AlgebraElement> {
        self.target().expect_same(rho.algebra())?;
        let mut blocks = self.source().zero().into_blocks();
        for u in self.source().units() {
            blocks[u.block][(u.col, u.row)] = rho.trace_product(&self.unit_image(u)?);
        }
        AlgebraElement::new(self.source().clone(), blocks)
    }
}

/// `outer ∘ inner`: operators pass through `inner` first.
pub struct Composed<'a> {
    outer: &'a dyn Operation,
    inner: &'a dyn Operation,
}

impl<'a> Composed<'a> {
    pub fn new(outer: &'a dyn Operation, inner: &'a dyn Operation) -> Result<Self> {
        outer.source().expect_same(inner.target())?;
        Ok(Self { outer, inner })
    }
}

impl Operation for Composed<'_> {
    fn source(&self) -> &BlockAlgebra {
        self.inner.source()
    }

    fn target(&self) -> &BlockAlgebra {
        self.outer.target()
    }

    fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.outer.apply(&self.inner.apply(a)?)
    }

    fn preadjoint_element(&self, rho: &AlgebraElement) -> Result<AlgebraElement> {
        self.inner.preadjoint_element(&self.outer.preadjoint_element(rho)?)
    }
}
