//! Finite-dimensional C*-algebras as direct sums of full matrix blocks,
//! subalgebra embeddings, tensor products and the product of compatible
//! subalgebras.
//!
//! Every algebra carries a concrete representation: an element of
//! `M_{d_1} ⊕ … ⊕ M_{d_k}` acts block-diagonally on `C^{d_1 + … + d_k}`.
//! Subalgebras are described by the images of the matrix units `e^{(i)}_{kl}`
//! of an abstract domain algebra, which turns inclusions, restrictions and
//! compatibility checks into plain linear algebra.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, c, frobenius, Mat, C64};
use crate::operation::KrausMap;
use crate::{tol, Error, Result};

/// Largest off-block entry tolerated when reading a dense matrix into an algebra.
const OFF_BLOCK_TOL: f64 = 1e-9;

/// Outcome or input label. Joint observables use ordered pairs, never fused labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Atom(String),
    Pair(Box<Label>, Box<Label>),
}

impl Label {
    pub fn atom(s: impl Into<String>) -> Self {
        Label::Atom(s.into())
    }

    pub fn pair(a: Label, b: Label) -> Self {
        Label::Pair(Box::new(a), Box::new(b))
    }

    /// Atoms in left-to-right order; `((a,b),c)` and `(a,(b,c))` flatten alike.
    pub fn flatten(&self) -> Vec<String> {
        match self {
            Label::Atom(s) => vec![s.clone()],
            Label::Pair(a, b) => {
                let mut v = a.flatten();
                v.extend(b.flatten());
                v
            }
        }
    }

    /// Labels `"0", "1", …, "n-1"`.
    pub fn range(n: usize) -> Vec<Label> {
        (0..n).map(|k| Label::Atom(k.to_string())).collect()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Atom(s) => f.write_str(s),
            Label::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Atom(s.to_string())
    }
}

/// Index of a matrix unit `e^{(block)}_{row,col}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MatrixUnit {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

/// `M_{d_1} ⊕ … ⊕ M_{d_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockAlgebra {
    dims: Vec<usize>,
}

impl BlockAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        if block_dims.contains(&0) {
            return Err(Error::InvalidAlgebra("zero-dimensional block".into()));
        }
        Ok(Self { dims: block_dims })
    }

    /// The full operator algebra `L(C^d)`.
    pub fn full(d: usize) -> Self {
        assert!(d > 0, "dimension must be positive");
        Self { dims: vec![d] }
    }

    /// The trivial algebra `C = C1`.
    pub fn trivial() -> Self {
        Self { dims: vec![1] }
    }

    /// `C^n` as `n` one-dimensional blocks.
    pub fn commutative(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyLabelSet);
        }
        Ok(Self { dims: vec![1; n] })
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    /// Dimension of the algebra as a vector space, `Σ d_i²`.
    pub fn dim(&self) -> usize {
        self.dims.iter().map(|d| d * d).sum()
    }

    /// Dimension of the concrete Hilbert space, `Σ d_i`.
    pub fn rep_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Start of each block in the concrete representation.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.dims
            .iter()
            .map(|d| {
                let o = acc;
                acc += d;
                o
            })
            .collect()
    }

    pub fn is_commutative(&self) -> bool {
        self.dims.iter().all(|&d| d == 1)
    }

    pub fn is_trivial(&self) -> bool {
        self.dims == [1]
    }

    pub fn units(&self) -> Vec<MatrixUnit> {
        let mut out = Vec::with_capacity(self.dim());
        for (block, &d) in self.dims.iter().enumerate() {
            for row in 0..d {
                for col in 0..d {
                    out.push(MatrixUnit { block, row, col });
                }
            }
        }
        out
    }

    pub fn unit_index(&self, u: MatrixUnit) -> usize {
        let before: usize = self.dims[..u.block].iter().map(|d| d * d).sum();
        before + u.row * self.dims[u.block] + u.col
    }

    pub fn unit(&self, u: MatrixUnit) -> AlgebraElement {
        let mut e = self.zero();
        e.blocks[u.block][(u.row, u.col)] = c(1.0, 0.0);
        e
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            algebra: self.clone(),
            blocks: self.dims.iter().map(|&d| linalg::zeros(d, d)).collect(),
        }
    }

    pub fn identity(&self) -> AlgebraElement {
        AlgebraElement {
            algebra: self.clone(),
            blocks: self.dims.iter().map(|&d| linalg::identity(d)).collect(),
        }
    }

    /// Unit of block `i`, the minimal central projection `1_i`.
    pub fn block_unit(&self, i: usize) -> AlgebraElement {
        let mut e = self.zero();
        e.blocks[i] = linalg::identity(self.dims[i]);
        e
    }

    pub(crate) fn expect_same(&self, other: &BlockAlgebra) -> Result<()> {
        if self != other {
            return Err(Error::AlgebraMismatch {
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        Ok(())
    }
}

/// A commutative algebra `C𝒳` with its label-to-block map.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledAlgebra {
    pub algebra: BlockAlgebra,
    pub labels: Vec<Label>,
}

impl LabeledAlgebra {
    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Commutative algebra over a finite label set, one block per label.
pub fn make_commutative(labels: &[Label]) -> Result<LabeledAlgebra> {
    if labels.is_empty() {
        return Err(Error::EmptyLabelSet);
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::DuplicateLabel(l.to_string()));
        }
    }
    Ok(LabeledAlgebra {
        algebra: BlockAlgebra::commutative(labels.len())?,
        labels: labels.to_vec(),
    })
}

/// Block-diagonal complex matrix belonging to a [`BlockAlgebra`].
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    algebra: BlockAlgebra,
    blocks: Vec<Mat>,
}

impl AlgebraElement {
    pub fn new(algebra: BlockAlgebra, blocks: Vec<Mat>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks for an algebra with {}",
                blocks.len(),
                algebra.num_blocks()
            )));
        }
        for (i, (b, &d)) in blocks.iter().zip(algebra.block_dims()).enumerate() {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::ShapeMismatch(format!(
                    "block {i} is {}x{}, expected {d}x{d}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { algebra, blocks })
    }

    /// Reads a dense matrix on the concrete space; off-block entries must vanish.
    pub fn from_dense(algebra: BlockAlgebra, m: &Mat) -> Result<Self> {
        let n = algebra.rep_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "dense matrix {}x{} for representation dimension {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let offsets = algebra.offsets();
        let mut owner = vec![0usize; n];
        for (i, (&o, &d)) in offsets.iter().zip(algebra.block_dims()).enumerate() {
            owner[o..o + d].fill(i);
        }
        let mut off: f64 = 0.0;
        for r in 0..n {
            for col in 0..n {
                if owner[r] != owner[col] {
                    off = off.max(m[(r, col)].norm());
                }
            }
        }
        if off > OFF_BLOCK_TOL {
            return Err(Error::OffBlock(off));
        }
        let blocks = offsets
            .iter()
            .zip(algebra.block_dims())
            .map(|(&o, &d)| m.view((o, o), (d, d)).into_owned())
            .collect();
        Ok(Self { algebra, blocks })
    }

    pub fn to_dense(&self) -> Mat {
        let n = self.algebra.rep_dim();
        let mut m = linalg::zeros(n, n);
        for (b, o) in self.blocks.iter().zip(self.algebra.offsets()) {
            m.view_mut((o, o), (b.nrows(), b.ncols())).copy_from(b);
        }
        m
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Mat {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<Mat> {
        self.blocks
    }

    pub fn coefficient(&self, u: MatrixUnit) -> C64 {
        self.blocks[u.block][(u.row, u.col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Mat, &Mat) -> Mat) -> Result<Self> {
        self.algebra.expect_same(&other.algebra)?;
        Ok(Self {
            algebra: self.algebra.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(|b| b * s).collect(),
        }
    }

    pub(crate) fn add_scaled_assign(&mut self, other: &Self, s: C64) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a += b * s;
        }
    }

    /// Sum of block traces; assigns trace one to every minimal projection.
    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Self) -> C64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::trace_product(a, b))
            .sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn op_norm(&self) -> f64 {
        self.blocks.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::hermiticity_defect)
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian element, all blocks merged, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.blocks.iter().flat_map(linalg::eigvalsh).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Frobenius norm of the commutator, blockwise.
    pub(crate) fn commutator_frobenius(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| {
                let comm = a * b - b * a;
                comm.iter().map(|z| z.norm_sqr()).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn commutator_op_norm(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::op_norm(&(a * b - b * a)))
            .fold(0.0, f64::max)
    }
}

/// Operator-norm size of a commutator, using Frobenius as a cheap upper bound
/// whenever it already certifies the tolerance.
pub(crate) fn commutator_norm(a: &AlgebraElement, b: &AlgebraElement, tol: f64) -> f64 {
    let f = a.commutator_frobenius(b);
    if f <= tol {
        f
    } else {
        a.commutator_op_norm(b)
    }
}

/// A unital *-homomorphism `ι: domain → parent`, given by images of matrix units.
#[derive(Clone, Debug, PartialEq)]
pub struct SubalgebraEmbedding {
    domain: BlockAlgebra,
    parent: BlockAlgebra,
    images: Vec<AlgebraElement>,
}

impl SubalgebraEmbedding {
    /// Validates the matrix-unit relations, unitality and injectivity.
    pub fn new(
        domain: BlockAlgebra,
        parent: BlockAlgebra,
        images: Vec<AlgebraElement>,
    ) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::BrokenEmbedding(format!(
                "{} images for {} matrix units",
                images.len(),
                domain.dim()
            )));
        }
        for img in &images {
            parent.expect_same(img.algebra())?;
        }
        let emb = Self {
            domain,
            parent,
            images,
        };
        emb.validate()?;
        Ok(emb)
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::BrokenEmbedding(what));
        let mut unit_sum = self.parent.zero();
        for (i, &d) in self.domain.block_dims().iter().enumerate() {
            let u = |row, col| self.image(MatrixUnit { block: i, row, col });
            for k in 0..d {
                for l in 0..d {
                    let r = u(k, l).adjoint().sub(u(l, k))?.frobenius();
                    if r > tol::IDEMPOTENT {
                        return bad(format!("ι(e{i}_{k}{l})* ≠ ι(e{i}_{l}{k}) (residual {r:e})"));
                    }
                    let r = u(k, 0).mul(u(0, l))?.sub(u(k, l))?.frobenius();
                    if r > tol::IDEMPOTENT {
                        return bad(format!("ι(e{i}_{k}0)ι(e{i}_0{l}) ≠ ι(e{i}_{k}{l}) (residual {r:e})"));
                    }
                }
                let r = u(0, k).mul(u(k, 0))?.sub(u(0, 0))?.frobenius();
                if r > tol::IDEMPOTENT {
                    return bad(format!("ι(e{i}_0{k})ι(e{i}_{k}0) ≠ ι(e{i}_00) (residual {r:e})"));
                }
                unit_sum.add_scaled_assign(u(k, k), c(1.0, 0.0));
            }
            let p = u(0, 0);
            let r = p.mul(p)?.sub(p)?.frobenius();
            if r > tol::IDEMPOTENT {
                return bad(format!("ι(e{i}_00) is not idempotent (residual {r:e})"));
            }
            if p.frobenius() < 0.5 {
                return bad(format!("ι(e{i}_00) = 0, map is not injective"));
            }
        }
        let r = unit_sum.sub(&self.parent.identity())?.frobenius();
        if r > tol::IDEMPOTENT {
            return bad(format!("ι(1) ≠ 1 (residual {r:e})"));
        }
        Ok(())
    }

    /// Identity embedding of an algebra into itself.
    pub fn identity(algebra: &BlockAlgebra) -> Self {
        let images = algebra.units().into_iter().map(|u| algebra.unit(u)).collect();
        Self {
            domain: algebra.clone(),
            parent: algebra.clone(),
            images,
        }
    }

    /// `C1 ↪ parent`.
    pub fn trivial(parent: &BlockAlgebra) -> Self {
        Self {
            domain: BlockAlgebra::trivial(),
            parent: parent.clone(),
            images: vec![parent.identity()],
        }
    }

    /// Diagonal (maximal commutative) subalgebra of the concrete representation.
    pub fn diagonal(parent: &BlockAlgebra) -> Self {
        let n = parent.rep_dim();
        let mut images = Vec::with_capacity(n);
        for (i, &d) in parent.block_dims().iter().enumerate() {
            for k in 0..d {
                images.push(parent.unit(MatrixUnit {
                    block: i,
                    row: k,
                    col: k,
                }));
            }
        }
        Self {
            domain: BlockAlgebra { dims: vec![1; n] },
            parent: parent.clone(),
            images,
        }
    }

    /// Commutative subalgebra spanned by a resolution of the unit into orthogonal projections.
    pub fn from_projections(parent: &BlockAlgebra, projections: Vec<AlgebraElement>) -> Result<Self> {
        let domain = BlockAlgebra::commutative(projections.len())?;
        Self::new(domain, parent.clone(), projections)
    }

    pub fn domain(&self) -> &BlockAlgebra {
        &self.domain
    }

    pub fn parent(&self) -> &BlockAlgebra {
        &self.parent
    }

    pub fn images(&self) -> &[AlgebraElement] {
        &self.images
    }

    pub fn image(&self, u: MatrixUnit) -> &AlgebraElement {
        &self.images[self.domain.unit_index(u)]
    }

    /// `ι(1_i)`, image of the unit of block `i`.
    pub fn block_projection(&self, i: usize) -> AlgebraElement {
        let mut p = self.parent.zero();
        for k in 0..self.domain.block_dims()[i] {
            p.add_scaled_assign(
                self.image(MatrixUnit {
                    block: i,
                    row: k,
                    col: k,
                }),
                c(1.0, 0.0),
            );
        }
        p
    }

    /// `ι(a) = Σ a_u ι(e_u)`.
    pub fn map(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.domain.expect_same(a.algebra())?;
        let mut out = self.parent.zero();
        for (u, img) in self.domain.units().into_iter().zip(&self.images) {
            let coeff = a.coefficient(u);
            if coeff != C64::new(0.0, 0.0) {
                out.add_scaled_assign(img, coeff);
            }
        }
        Ok(out)
    }

    /// `self ∘ inner`, where `inner` lands in the domain of `self`.
    pub fn compose(&self, inner: &SubalgebraEmbedding) -> Result<SubalgebraEmbedding> {
        self.domain.expect_same(&inner.parent)?;
        let images = inner
            .images
            .iter()
            .map(|img| self.map(img))
            .collect::<Result<Vec<_>>>()?;
        Ok(SubalgebraEmbedding {
            domain: inner.domain.clone(),
            parent: self.parent.clone(),
            images,
        })
    }
}

/// Certificate that two subalgebras of one parent commute elementwise.
#[derive(Clone, Debug)]
pub struct CompatiblePair {
    left: SubalgebraEmbedding,
    right: SubalgebraEmbedding,
    max_commutator_norm: f64,
}

impl CompatiblePair {
    pub fn left(&self) -> &SubalgebraEmbedding {
        &self.left
    }

    pub fn right(&self) -> &SubalgebraEmbedding {
        &self.right
    }

    /// Upper bound on the operator norm of every matrix-unit commutator.
    pub fn max_commutator_norm(&self) -> f64 {
        self.max_commutator_norm
    }

    pub fn swap(self) -> Self {
        Self {
            left: self.right,
            right: self.left,
            max_commutator_norm: self.max_commutator_norm,
        }
    }
}

/// Worst non-commuting matrix-unit pair found by [`check_compatible`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityViolation {
    pub left_unit: MatrixUnit,
    pub right_unit: MatrixUnit,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub enum Compatibility {
    Compatible(CompatiblePair),
    Violation(CompatibilityViolation),
}

impl Compatibility {
    pub fn is_compatible(&self) -> bool {
        matches!(self, Compatibility::Compatible(_))
    }

    /// The certificate, or an [`Error::Incompatible`] carrying the worst norm.
    pub fn into_pair(self, tol: f64) -> Result<CompatiblePair> {
        match self {
            Compatibility::Compatible(p) => Ok(p),
            Compatibility::Violation(v) => Err(Error::Incompatible {
                context: format!("matrix units {:?} and {:?}", v.left_unit, v.right_unit),
                norm: v.norm,
                tol,
            }),
        }
    }
}

/// Checks that every matrix-unit image of `x` commutes with every one of `y`.
pub fn check_compatible(
    x: &SubalgebraEmbedding,
    y: &SubalgebraEmbedding,
    tol: f64,
) -> Result<Compatibility> {
    x.parent.expect_same(&y.parent)?;
    let xu = x.domain.units();
    let yu = y.domain.units();
    let mut worst = 0.0f64;
    let mut worst_pair = None;
    for (a, ua) in x.images.iter().zip(&xu) {
        for (b, ub) in y.images.iter().zip(&yu) {
            let n = commutator_norm(a, b, tol);
            if n > worst {
                worst = n;
                worst_pair = Some((*ua, *ub));
            }
        }
    }
    if worst <= tol {
        Ok(Compatibility::Compatible(CompatiblePair {
            left: x.clone(),
            right: y.clone(),
            max_commutator_norm: worst,
        }))
    } else {
        let (left_unit, right_unit) = worst_pair.expect("nonzero worst has a pair");
        Ok(Compatibility::Violation(CompatibilityViolation {
            left_unit,
            right_unit,
            norm: worst,
        }))
    }
}

/// Tensor product of several block algebras with its concrete block layout.
///
/// Blocks are indexed by multi-indices `(i_1, …, i_m)` in lexicographic order;
/// inside a block the basis is the Kronecker basis of the factor blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorProduct {
    factors: Vec<BlockAlgebra>,
    algebra: BlockAlgebra,
    multi_index: Vec<Vec<usize>>,
    /// `perm[i]` is the Kronecker-order index of block-order index `i`.
    perm: Vec<usize>,
}

impl TensorProduct {
    pub fn new(factors: Vec<BlockAlgebra>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidAlgebra("tensor product of no factors".into()));
        }
        let mut multi_index: Vec<Vec<usize>> = vec![vec![]];
        for f in &factors {
            multi_index = multi_index
                .into_iter()
                .flat_map(|prefix| {
                    (0..f.num_blocks()).map(move |i| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
                })
                .collect();
        }
        let dims: Vec<usize> = multi_index
            .iter()
            .map(|mi| mi.iter().zip(&factors).map(|(&i, f)| f.block_dims()[i]).product())
            .collect();
        let rep: Vec<usize> = factors.iter().map(|f| f.rep_dim()).collect();
        let mut stride = vec![1usize; factors.len()];
        for k in (0..factors.len().saturating_sub(1)).rev() {
            stride[k] = stride[k + 1] * rep[k + 1];
        }
        let offsets: Vec<Vec<usize>> = factors.iter().map(|f| f.offsets()).collect();
        let mut perm = Vec::with_capacity(rep.iter().product());
        for mi in &multi_index {
            let local: Vec<usize> = mi.iter().zip(&factors).map(|(&i, f)| f.block_dims()[i]).collect();
            let size: usize = local.iter().product();
            for flat in 0..size {
                // Row-major digits of `flat` over the local block dimensions.
                let mut rem = flat;
                let mut kron = 0;
                for k in (0..factors.len()).rev() {
                    let digit = rem % local[k];
                    rem /= local[k];
                    kron += (offsets[k][mi[k]] + digit) * stride[k];
                }
                perm.push(kron);
            }
        }
        Ok(Self {
            factors,
            algebra: BlockAlgebra::new(dims)?,
            multi_index,
            perm,
        })
    }

    pub fn factors(&self) -> &[BlockAlgebra] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    /// Factor block indices of every block of the product.
    pub fn multi_index(&self) -> &[Vec<usize>] {
        &self.multi_index
    }

    /// Block-order index to Kronecker-order index.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Dense matrix in the Kronecker basis of the factor representations.
    pub fn to_kron_dense(&self, a: &AlgebraElement) -> Result<Mat> {
        self.algebra.expect_same(a.algebra())?;
        Ok(linalg::unpermute(&a.to_dense(), &self.perm))
    }

    pub fn from_kron_dense(&self, m: &Mat) -> Result<AlgebraElement> {
        if m.nrows() != self.perm.len() {
            return Err(Error::ShapeMismatch(format!(
                "Kronecker matrix of size {} for a product of size {}",
                m.nrows(),
                self.perm.len()
            )));
        }
        AlgebraElement::from_dense(self.algebra.clone(), &linalg::permute(m, &self.perm))
    }

    /// `a_1 ⊗ … ⊗ a_m`.
    pub fn embed_product(&self, parts: &[&AlgebraElement]) -> Result<AlgebraElement> {
        if parts.len() != self.factors.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parts for {} factors",
                parts.len(),
                self.factors.len()
            )));
        }
        let mut acc: Option<Mat> = None;
        for (p, f) in parts.iter().zip(&self.factors) {
            f.expect_same(p.algebra())?;
            let d = p.to_dense();
            acc = Some(match acc {
                None => d,
                Some(a) => linalg::kron(&a, &d),
            });
        }
        self.from_kron_dense(&acc.expect("at least one factor"))
    }

    /// Embedding of factor `k` as `1 ⊗ … ⊗ A ⊗ … ⊗ 1`.
    pub fn factor_embedding(&self, k: usize) -> Result<SubalgebraEmbedding> {
        Ok(self.subsystem_embedding(&[k])?.1)
    }

    /// The product of the factors listed in `keep` (strictly increasing), and its
    /// embedding into the full product.
    pub fn subsystem_embedding(&self, keep: &[usize]) -> Result<(TensorProduct, SubalgebraEmbedding)> {
        self.check_keep(keep)?;
        if keep.is_empty() {
            return Ok((
                TensorProduct::new(vec![BlockAlgebra::trivial()])?,
                SubalgebraEmbedding::trivial(&self.algebra),
            ));
        }
        let sub = TensorProduct::new(keep.iter().map(|&k| self.factors[k].clone()).collect())?;
        let ids: Vec<AlgebraElement> = self.factors.iter().map(|f| f.identity()).collect();
        let mut images = Vec::with_capacity(sub.algebra.dim());
        for u in sub.algebra.units() {
            let factor_units = sub.split_unit(u);
            let mut parts: Vec<AlgebraElement> = ids.clone();
            for (slot, fu) in keep.iter().zip(factor_units) {
                parts[*slot] = self.factors[*slot].unit(fu);
            }
            let refs: Vec<&AlgebraElement> = parts.iter().collect();
            images.push(self.embed_product(&refs)?);
        }
        let emb = SubalgebraEmbedding {
            domain: sub.algebra.clone(),
            parent: self.algebra.clone(),
            images,
        };
        Ok((sub, emb))
    }

    /// Factor matrix units whose product is the given unit of the product algebra.
    pub fn split_unit(&self, u: MatrixUnit) -> Vec<MatrixUnit> {
        let mi = &self.multi_index[u.block];
        let local: Vec<usize> = mi.iter().zip(&self.factors).map(|(&i, f)| f.block_dims()[i]).collect();
        let digits = |mut flat: usize| {
            let mut d = vec![0; local.len()];
            for k in (0..local.len()).rev() {
                d[k] = flat % local[k];
                flat /= local[k];
            }
            d
        };
        let rows = digits(u.row);
        let cols = digits(u.col);
        (0..local.len())
            .map(|k| MatrixUnit {
                block: mi[k],
                row: rows[k],
                col: cols[k],
            })
            .collect()
    }

    fn check_keep(&self, keep: &[usize]) -> Result<()> {
        if keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::OutOfRange("factor selection must be strictly increasing".into()));
        }
        if let Some(&k) = keep.iter().find(|&&k| k >= self.factors.len()) {
            return Err(Error::OutOfRange(format!(
                "factor {k} of a {}-fold product",
                self.factors.len()
            )));
        }
        Ok(())
    }

    /// Partial trace onto the factors in `keep`, by index contraction.
    pub fn partial_trace(&self, a: &AlgebraElement, keep: &[usize]) -> Result<(TensorProduct, AlgebraElement)> {
        self.check_keep(keep)?;
        let full = self.to_kron_dense(a)?;
        if keep.is_empty() {
            let sub = TensorProduct::new(vec![BlockAlgebra::trivial()])?;
            let t = full.trace();
            let el = AlgebraElement::new(sub.algebra.clone(), vec![Mat::from_element(1, 1, t)])?;
            return Ok((sub, el));
        }
        let rep: Vec<usize> = self.factors.iter().map(|f| f.rep_dim()).collect();
        let n: usize = rep.iter().product();
        let kept_dim: usize = keep.iter().map(|&k| rep[k]).product();
        let mut kept_of = vec![0usize; n];
        let mut traced_of = vec![0usize; n];
        for idx in 0..n {
            let mut rem = idx;
            let mut digits = vec![0; rep.len()];
            for k in (0..rep.len()).rev() {
                digits[k] = rem % rep[k];
                rem /= rep[k];
            }
            let (mut kept, mut traced) = (0, 0);
            for k in 0..rep.len() {
                if keep.contains(&k) {
                    kept = kept * rep[k] + digits[k];
                } else {
                    traced = traced * rep[k] + digits[k];
                }
            }
            kept_of[idx] = kept;
            traced_of[idx] = traced;
        }
        let traced_dim = n / kept_dim;
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); traced_dim];
        for idx in 0..n {
            groups[traced_of[idx]].push(idx);
        }
        let mut out = linalg::zeros(kept_dim, kept_dim);
        for g in &groups {
            for &i in g {
                for &j in g {
                    out[(kept_of[i], kept_of[j])] += full[(i, j)];
                }
            }
        }
        let sub = TensorProduct::new(keep.iter().map(|&k| self.factors[k].clone()).collect())?;
        let el = sub.from_kron_dense(&out)?;
        Ok((sub, el))
    }
}

/// `a ⊗ b` with the certified pair of factor embeddings `A ⊗ 1`, `1 ⊗ B`.
pub fn tensor(a: &BlockAlgebra, b: &BlockAlgebra) -> Result<(TensorProduct, CompatiblePair)> {
    let t = TensorProduct::new(vec![a.clone(), b.clone()])?;
    let left = t.factor_embedding(0)?;
    let right = t.factor_embedding(1)?;
    let pair = check_compatible(&left, &right, tol::COMMUTATOR)?.into_pair(tol::COMMUTATOR)?;
    Ok((t, pair))
}

/// The algebra `𝒳𝒴` spanned by products of a compatible pair, with its embedding.
#[derive(Clone, Debug)]
pub struct GeneratedProduct {
    pub embedding: SubalgebraEmbedding,
    /// For each block of `𝒳𝒴`, the blocks `(i, j)` of `𝒳` and `𝒴` it comes from.
    pub origin: Vec<(usize, usize)>,
}

/// Block decomposition of the span of `ι_x(A)ι_y(B)`.
///
/// For commuting subalgebras the central projections of `𝒳𝒴` are the nonzero
/// products `ι_x(1_i)ι_y(1_j)`, and on each such block the multiplication map is
/// injective, so the products of matrix units are matrix units of `𝒳𝒴`. Blocks
/// are ordered by `(dimension, first occurrence)`.
pub fn generated_product_algebra(pair: &CompatiblePair) -> Result<GeneratedProduct> {
    let x = &pair.left;
    let y = &pair.right;
    let xd = x.domain.block_dims();
    let yd = y.domain.block_dims();
    let px: Vec<AlgebraElement> = (0..xd.len()).map(|i| x.block_projection(i)).collect();
    let py: Vec<AlgebraElement> = (0..yd.len()).map(|j| y.block_projection(j)).collect();
    let mut kept = Vec::new();
    for i in 0..xd.len() {
        for j in 0..yd.len() {
            let z = px[i].mul(&py[j])?;
            let norm = z.frobenius();
            if norm >= 0.5 {
                kept.push((i, j));
            } else if norm > 1e-8 {
                return Err(Error::NotClosed(format!(
                    "ι_x(1_{i})ι_y(1_{j}) is neither zero nor a projection (norm {norm:e})"
                )));
            }
        }
    }
    kept.sort_by_key(|&(i, j)| xd[i] * yd[j]);
    let dims: Vec<usize> = kept.iter().map(|&(i, j)| xd[i] * yd[j]).collect();
    let domain = BlockAlgebra::new(dims)?;
    let mut images = Vec::with_capacity(domain.dim());
    for &(i, j) in &kept {
        let (d, e) = (xd[i], yd[j]);
        for row in 0..d * e {
            for col in 0..d * e {
                let a = x.image(MatrixUnit {
                    block: i,
                    row: row / e,
                    col: col / e,
                });
                let b = y.image(MatrixUnit {
                    block: j,
                    row: row % e,
                    col: col % e,
                });
                images.push(a.mul(b)?);
            }
        }
    }
    let embedding = SubalgebraEmbedding::new(domain, x.parent.clone(), images).map_err(|e| match e {
        Error::BrokenEmbedding(msg) => Error::NotClosed(msg),
        other => other,
    })?;
    Ok(GeneratedProduct {
        embedding,
        origin: kept,
    })
}

/// Product subalgebra of any number of pairwise compatible subalgebras.
///
/// An empty list gives the trivial subalgebra `C1`.
pub fn generated_product_many(
    parent: &BlockAlgebra,
    parts: &[&SubalgebraEmbedding],
) -> Result<SubalgebraEmbedding> {
    let Some((first, rest)) = parts.split_first() else {
        return Ok(SubalgebraEmbedding::trivial(parent));
    };
    parent.expect_same(first.parent())?;
    let mut acc = (*first).clone();
    for next in rest {
        let pair = check_compatible(&acc, next, tol::COMMUTATOR)?.into_pair(tol::COMMUTATOR)?;
        acc = generated_product_algebra(&pair)?.embedding;
    }
    Ok(acc)
}

/// The multiplication map `μ: 𝒳 ⊗ 𝒴 → 𝒳𝒴`, `e ⊗ f ↦ ι_x(e)ι_y(f)`.
#[derive(Clone, Debug)]
pub struct MultiplicationMap {
    /// Operator map from the tensor product onto the abstract algebra `𝒳𝒴`.
    pub map: KrausMap,
    pub tensor: TensorProduct,
    pub product: GeneratedProduct,
}

pub fn multiplication_map(pair: &CompatiblePair) -> Result<MultiplicationMap> {
    let product = generated_product_algebra(pair)?;
    let tensor = TensorProduct::new(vec![pair.left.domain.clone(), pair.right.domain.clone()])?;
    let target = product.embedding.domain.clone();
    let ny = pair.right.domain.num_blocks();
    let t_off = tensor.algebra.offsets();
    let p_off = target.offsets();
    let mut v = linalg::zeros(tensor.algebra.rep_dim(), target.rep_dim());
    for (b, &(i, j)) in product.origin.iter().enumerate() {
        let tb = i * ny + j;
        for k in 0..target.block_dims()[b] {
            v[(t_off[tb] + k, p_off[b] + k)] = c(1.0, 0.0);
        }
    }
    let map = KrausMap::new(tensor.algebra.clone(), target, vec![v])?;

    // ι_{xy}(μ(e ⊗ f)) must reproduce ι_x(e)ι_y(f) on every unit.
    for u in tensor.algebra.units() {
        let parts = tensor.split_unit(u);
        let expected = pair.left.image(parts[0]).mul(pair.right.image(parts[1]))?;
        let via = product.embedding.map(&map.apply(&tensor.algebra.unit(u))?)?;
        let r = via.sub(&expected)?.frobenius();
        if r > tol::IDEMPOTENT.max(frobenius(&expected.to_dense()) * 1e-12) {
            return Err(Error::NotClosed(format!(
                "μ is not multiplicative on unit {u:?} (residual {r:e})"
            )));
        }
    }
    Ok(MultiplicationMap {
        map,
        tensor,
        product,
    })
}
