//! Executable entropy and information inequalities.
//!
//! Each checker evaluates both sides in bits and returns an
//! [`InequalityVerdict`]. A verdict passes when `slack ≥ -tol::PASS`, where
//! `slack = rhs - lhs` for `lhs ≤ rhs` and `slack = -|lhs - rhs|` for equalities.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::algebra::{generated_product_many, AlgebraElement, CompatiblePair, Label, SubalgebraEmbedding};
use crate::digest::InputDigest;
use crate::document::bits_serde;
use crate::infotheory::{
    binary_entropy, cond_entropy_alg, cond_entropy_obs_given_alg, cond_entropy_op, cond_mutual_info_alg, divergence,
    divergence_elements, entropy_alg, entropy_op, joint_entropy_alg, mutual_info_alg, mutual_info_op,
};
use crate::observable::{as_operation, Povm};
use crate::operation::{Composed, Operation};
use crate::state::{restrict, DensityState, SeparableState};
use crate::{tol, Error, Result};

/// Residual above which a hypothesis of a gated theorem counts as violated.
pub const HYPOTHESIS_TOL: f64 = 1e-8;

/// Tag attached to conjecture probes.
pub const CONJECTURE: &str = "CONJECTURE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≤ rhs`
    Le,
    /// `lhs = rhs`
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    /// A hypothesis of the theorem does not hold; nothing is claimed.
    HypothesisNotMet,
    /// The input is outside the theorem's scope.
    PreconditionViolated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub name: String,
    pub relation: Relation,
    #[serde(with = "bits_serde")]
    pub lhs_bits: f64,
    #[serde(with = "bits_serde")]
    pub rhs_bits: f64,
    #[serde(with = "bits_serde")]
    pub slack_bits: f64,
    pub status: VerdictStatus,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    /// Hypothesis residuals and other auxiliary values, in bits.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    pub inputs_digest: String,
}

impl InequalityVerdict {
    fn build(name: &str, relation: Relation, lhs: f64, rhs: f64, digest: InputDigest) -> Self {
        let slack = match relation {
            Relation::Le if rhs == f64::INFINITY => f64::INFINITY,
            Relation::Le => rhs - lhs,
            Relation::Eq => -(lhs - rhs).abs(),
        };
        let pass = slack >= -tol::PASS;
        Self {
            name: name.to_string(),
            relation,
            lhs_bits: lhs,
            rhs_bits: rhs,
            slack_bits: slack,
            status: if pass { VerdictStatus::Pass } else { VerdictStatus::Fail },
            pass,
            tag: None,
            details: BTreeMap::new(),
            inputs_digest: digest.finish(),
        }
    }

    /// `lhs ≤ rhs`.
    pub fn le(name: &str, lhs: f64, rhs: f64, digest: InputDigest) -> Self {
        Self::build(name, Relation::Le, lhs, rhs, digest)
    }

    /// `lhs = rhs`.
    pub fn eq(name: &str, lhs: f64, rhs: f64, digest: InputDigest) -> Self {
        Self::build(name, Relation::Eq, lhs, rhs, digest)
    }

    pub(crate) fn with_status(mut self, status: VerdictStatus) -> Self {
        self.status = status;
        self.pass = false;
        self
    }

    pub(crate) fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub(crate) fn conjecture(mut self) -> Self {
        self.tag = Some(CONJECTURE.to_string());
        self
    }

    /// A violated inequality, as opposed to a pass or an out-of-scope input.
    pub fn is_failure(&self) -> bool {
        self.status == VerdictStatus::Fail
    }

    pub fn is_conjecture(&self) -> bool {
        self.tag.as_deref() == Some(CONJECTURE)
    }
}

/// Names accepted by the `check` front end.
pub const THEOREMS: &[&str] = &[
    "klein",
    "monotonicity",
    "subadditivity",
    "ssa",
    "pure_common_state",
    "entropy_increase",
    "triangle",
    "holevo_chain",
    "data_processing",
    "info_subadditivity",
    "info_subadditivity_n",
    "info_upper_bound",
    "conditional_entropy_nonneg",
    "separability_conjecture",
    "knowledge_decreases",
    "fano",
    "fano_corollary",
];

fn min_eigenvalue(a: &AlgebraElement) -> f64 {
    a.eigenvalues().last().copied().unwrap_or(0.0)
}

/// `D(ρ‖σ) ≥ ½Tr(ρ-σ)² + Tr(ρ-σ)` for positive operators, with the right side
/// converted to bits. For two states a second verdict asserts `D ≥ 0`.
///
/// The bound is only valid when both spectra lie in `[0, 1]`; larger inputs are
/// reported as out of scope.
pub fn check_klein(rho: &AlgebraElement, sigma: &AlgebraElement) -> Result<Vec<InequalityVerdict>> {
    rho.algebra().expect_same(sigma.algebra())?;
    for a in [rho, sigma] {
        let d = a.hermiticity_defect();
        if d > tol::HERMITIAN {
            return Err(Error::NotHermitian(d));
        }
        let m = min_eigenvalue(a);
        if m < -tol::NEGATIVE_EIGENVALUE {
            return Err(Error::NotPositive(m));
        }
    }
    let digest = || InputDigest::new("klein").element(rho).element(sigma);
    let diff = rho.sub(sigma)?;
    let rhs_nats = 0.5 * diff.trace_product(&diff).re + diff.trace().re;
    let bound = rhs_nats / LN_2;
    let d = divergence_elements(rho, sigma)?.bits();
    let mut v = InequalityVerdict::le("klein", bound, d, digest());
    let norm = rho.op_norm().max(sigma.op_norm());
    if norm > 1.0 + tol::TRACE {
        v = v
            .with_status(VerdictStatus::PreconditionViolated)
            .with_detail("operator_norm", norm);
    }
    let mut out = vec![v];
    let is_state = |a: &AlgebraElement| (a.trace().re - 1.0).abs() <= tol::TRACE;
    if is_state(rho) && is_state(sigma) {
        out.push(InequalityVerdict::le("klein_nonnegativity", 0.0, d, digest()));
    }
    Ok(out)
}

/// `D(φ_*ρ‖φ_*σ) ≤ D(ρ‖σ)`; `φ` must be unital so that `φ_*` preserves the trace.
pub fn check_monotonicity(rho: &DensityState, sigma: &DensityState, phi: &dyn Operation) -> Result<InequalityVerdict> {
    let one = phi.apply(&phi.source().identity())?;
    let defect = one.sub(&phi.target().identity())?.op_norm();
    if defect > tol::IDEMPOTENT {
        return Err(Error::Precondition(format!(
            "the dual map is not trace preserving (unit defect {defect:e})"
        )));
    }
    let lhs = divergence(&phi.preadjoint(rho)?, &phi.preadjoint(sigma)?)?.bits();
    let rhs = divergence(rho, sigma)?.bits();
    let digest = InputDigest::new("monotonicity").state(rho).state(sigma).operation(phi);
    Ok(InequalityVerdict::le("monotonicity", lhs, rhs, digest))
}

/// `H(𝒜_1𝒜_2𝒜_3) + H(𝒜_2) ≤ H(𝒜_1𝒜_2) + H(𝒜_2𝒜_3)`.
pub fn check_strong_subadditivity(
    a1: &SubalgebraEmbedding,
    a2: &SubalgebraEmbedding,
    a3: &SubalgebraEmbedding,
    rho: &DensityState,
) -> Result<InequalityVerdict> {
    let lhs = joint_entropy_alg(&[a1, a2, a3], rho)? + entropy_alg(a2, rho)?;
    let rhs = joint_entropy_alg(&[a1, a2], rho)? + joint_entropy_alg(&[a2, a3], rho)?;
    let digest = InputDigest::new("ssa")
        .state(rho)
        .embedding(a1)
        .embedding(a2)
        .embedding(a3);
    Ok(InequalityVerdict::le("ssa", lhs, rhs, digest))
}

/// `H(𝒜_1𝒜_3) ≤ H(𝒜_1) + H(𝒜_3)`, the case `𝒜_2 = C` of strong subadditivity.
pub fn check_subadditivity(a1: &SubalgebraEmbedding, a3: &SubalgebraEmbedding, rho: &DensityState) -> Result<InequalityVerdict> {
    let trivial = SubalgebraEmbedding::trivial(rho.algebra());
    let mut v = check_strong_subadditivity(a1, &trivial, a3, rho)?;
    v.name = "subadditivity".into();
    Ok(v)
}

/// `H(𝒳) = H(𝒴)` when `ρ|_{𝒳𝒴}` is pure.
pub fn check_pure_common_state(pair: &CompatiblePair, rho: &DensityState) -> Result<InequalityVerdict> {
    let xy = generated_product_many(rho.algebra(), &[pair.left(), pair.right()])?;
    let restricted = restrict(rho, &xy)?;
    let hx = entropy_alg(pair.left(), rho)?;
    let hy = entropy_alg(pair.right(), rho)?;
    let digest = InputDigest::new("pure_common_state")
        .state(rho)
        .embedding(pair.left())
        .embedding(pair.right());
    let v = InequalityVerdict::eq("pure_common_state", hx, hy, digest);
    let top = restricted.eigenvalues().first().copied().unwrap_or(0.0);
    if (top - 1.0).abs() > 1e-9 {
        return Ok(v
            .with_status(VerdictStatus::PreconditionViolated)
            .with_detail("largest_eigenvalue", top));
    }
    Ok(v)
}

/// `Tr φ(A) = Tr(S A)`; returns the smallest eigenvalue of `1 - S`.
fn trace_gap(phi: &dyn Operation) -> Result<f64> {
    let s = phi.preadjoint_element(&phi.target().identity())?;
    Ok(min_eigenvalue(&phi.source().identity().sub(&s)?))
}

/// `H(ψ∘φ) ≥ H(ψ)` for `φ: 𝒴 → 𝒳` with `Tr φ(A) ≤ Tr A` and `ψ: 𝒳 → 𝒜`.
pub fn check_entropy_increase(phi: &dyn Operation, psi: &dyn Operation, rho: &DensityState) -> Result<InequalityVerdict> {
    let gap = trace_gap(phi)?;
    if gap < -tol::COMMUTATOR {
        return Err(Error::NotTraceNonincreasing(-gap));
    }
    let composed = Composed::new(psi, phi)?;
    let lhs = entropy_op(psi, rho)?;
    let rhs = entropy_op(&composed, rho)?;
    let digest = InputDigest::new("entropy_increase").state(rho).operation(phi).operation(psi);
    Ok(InequalityVerdict::le("entropy_increase", lhs, rhs, digest))
}

/// `|H(𝒳) - H(𝒴)| ≤ H(𝒳𝒴)`.
pub fn check_triangle(pair: &CompatiblePair, rho: &DensityState) -> Result<InequalityVerdict> {
    let hx = entropy_alg(pair.left(), rho)?;
    let hy = entropy_alg(pair.right(), rho)?;
    let hxy = joint_entropy_alg(&[pair.left(), pair.right()], rho)?;
    let digest = InputDigest::new("triangle")
        .state(rho)
        .embedding(pair.left())
        .embedding(pair.right());
    Ok(InequalityVerdict::le("triangle", (hx - hy).abs(), hxy, digest))
}

/// `I(X∧Y) ≤ I(𝒳∧Y) ≤ I(𝒳∧𝒴)` for POVMs `X` on the domain of `𝒳` and `Y` on the domain of `𝒴`.
pub fn check_holevo_chain(x: &Povm, y: &Povm, pair: &CompatiblePair, rho: &DensityState) -> Result<Vec<InequalityVerdict>> {
    pair.left().domain().expect_same(x.algebra())?;
    pair.right().domain().expect_same(y.algebra())?;
    let xo = as_operation(x);
    let yo = as_operation(y);
    let x_in = Composed::new(pair.left(), &xo)?;
    let y_in = Composed::new(pair.right(), &yo)?;
    let i_obs = mutual_info_op(&x_in, &y_in, rho)?;
    let i_mixed = mutual_info_op(pair.left(), &y_in, rho)?;
    let i_alg = mutual_info_alg(pair.left(), pair.right(), rho)?;
    let digest = || {
        InputDigest::new("holevo_chain")
            .state(rho)
            .embedding(pair.left())
            .embedding(pair.right())
            .operation(&xo)
            .operation(&yo)
    };
    Ok(vec![
        InequalityVerdict::le("holevo_chain_observable", i_obs, i_mixed, digest()),
        InequalityVerdict::le("holevo_chain_subalgebra", i_mixed, i_alg, digest()),
    ])
}

/// `I(ψ_1∘φ_1 ∧ ψ_2∘φ_2) ≤ I(ψ_1∧ψ_2)`.
pub fn check_data_processing(
    phi1: &dyn Operation,
    phi2: &dyn Operation,
    psi1: &dyn Operation,
    psi2: &dyn Operation,
    rho: &DensityState,
) -> Result<InequalityVerdict> {
    let c1 = Composed::new(psi1, phi1)?;
    let c2 = Composed::new(psi2, phi2)?;
    let lhs = mutual_info_op(&c1, &c2, rho)?;
    let rhs = mutual_info_op(psi1, psi2, rho)?;
    let digest = InputDigest::new("data_processing")
        .state(rho)
        .operation(phi1)
        .operation(phi2)
        .operation(psi1)
        .operation(psi2);
    Ok(InequalityVerdict::le("data_processing", lhs, rhs, digest))
}

/// `I(𝒳_1⋯𝒳_n ∧ 𝒴_1⋯𝒴_n) ≤ Σ_i I(𝒳_i∧𝒴_i)` under
/// `I(𝒴_i ∧ 𝒳_{≠i}𝒴_{≠i} | 𝒳_i) = 0` for every `i`.
pub fn check_info_subadditivity_n(
    xs: &[&SubalgebraEmbedding],
    ys: &[&SubalgebraEmbedding],
    rho: &DensityState,
) -> Result<InequalityVerdict> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::ShapeMismatch("need matching nonempty families".into()));
    }
    let parent = rho.algebra();
    let n = xs.len();
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let others: Vec<&SubalgebraEmbedding> = (0..n)
            .filter(|&k| k != i)
            .flat_map(|k| [xs[k], ys[k]])
            .collect();
        let rest = generated_product_many(parent, &others)?;
        residuals.push(cond_mutual_info_alg(ys[i], &rest, xs[i], rho)?);
    }
    let xall = generated_product_many(parent, xs)?;
    let yall = generated_product_many(parent, ys)?;
    let lhs = mutual_info_alg(&xall, &yall, rho)?;
    let mut rhs = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        rhs += mutual_info_alg(x, y, rho)?;
    }
    let mut digest = InputDigest::new("info_subadditivity").state(rho);
    for e in xs.iter().chain(ys) {
        digest = digest.embedding(e);
    }
    let mut v = InequalityVerdict::le("info_subadditivity", lhs, rhs, digest);
    for (i, r) in residuals.iter().enumerate() {
        v = v.with_detail(&format!("hypothesis_{}", i + 1), *r);
    }
    if residuals.iter().any(|&r| r.abs() > HYPOTHESIS_TOL) {
        v = v.with_status(VerdictStatus::HypothesisNotMet);
    }
    Ok(v)
}

/// Two-party form of [`check_info_subadditivity_n`].
pub fn check_info_subadditivity(
    x1: &SubalgebraEmbedding,
    x2: &SubalgebraEmbedding,
    y1: &SubalgebraEmbedding,
    y2: &SubalgebraEmbedding,
    rho: &DensityState,
) -> Result<InequalityVerdict> {
    check_info_subadditivity_n(&[x1, x2], &[y1, y2], rho)
}

/// `I(𝒳∧𝒴) ≤ 2 min{H(𝒳), H(𝒴)}`.
pub fn check_info_upper_bound(pair: &CompatiblePair, rho: &DensityState) -> Result<InequalityVerdict> {
    let i = mutual_info_alg(pair.left(), pair.right(), rho)?;
    let hx = entropy_alg(pair.left(), rho)?;
    let hy = entropy_alg(pair.right(), rho)?;
    let digest = InputDigest::new("info_upper_bound")
        .state(rho)
        .embedding(pair.left())
        .embedding(pair.right());
    Ok(InequalityVerdict::le("info_upper_bound", i, 2.0 * hx.min(hy), digest))
}

/// `H(φ|ψ) ≥ 0` when the source of `φ` or of `ψ` is commutative.
pub fn check_conditional_entropy_nonneg(phi: &dyn Operation, psi: &dyn Operation, rho: &DensityState) -> Result<InequalityVerdict> {
    if !phi.source().is_commutative() && !psi.source().is_commutative() {
        return Err(Error::Precondition("neither source algebra is commutative".into()));
    }
    let h = cond_entropy_op(phi, psi, rho)?;
    let digest = InputDigest::new("conditional_entropy_nonneg")
        .state(rho)
        .operation(phi)
        .operation(psi);
    Ok(InequalityVerdict::le("conditional_entropy_nonneg", 0.0, h, digest))
}

/// Conjecture probe on a certificate-separable state: `H(𝒳|𝒴) ≥ 0` and
/// `I(𝒳∧𝒴) ≤ min{H(𝒳), H(𝒴)}`, with `𝒳`, `𝒴` the products of the listed factors.
/// Failures are findings, not errors.
pub fn probe_separability_conjecture(
    sep: &SeparableState,
    x_factors: &[usize],
    y_factors: &[usize],
) -> Result<Vec<InequalityVerdict>> {
    if x_factors.iter().any(|k| y_factors.contains(k)) {
        return Err(Error::Precondition("factor sets overlap".into()));
    }
    let (_, x) = sep.tensor.subsystem_embedding(x_factors)?;
    let (_, y) = sep.tensor.subsystem_embedding(y_factors)?;
    let rho = &sep.state;
    let hx = entropy_alg(&x, rho)?;
    let hy = entropy_alg(&y, rho)?;
    let hxy = joint_entropy_alg(&[&x, &y], rho)?;
    let digest = || InputDigest::new("separability_conjecture").state(rho).embedding(&x).embedding(&y);
    Ok(vec![
        InequalityVerdict::le("separability_conjecture", 0.0, hxy - hy, digest()).conjecture(),
        InequalityVerdict::le("separability_info_bound", hx + hy - hxy, hx.min(hy), digest()).conjecture(),
    ])
}

/// `H(ψ|φ) ≤ H(ψ|φ∘φ')` and `H(ψ|φ) ≤ H(ψ)`.
pub fn check_knowledge_decreases(
    psi: &dyn Operation,
    phi: &dyn Operation,
    phi_prime: &dyn Operation,
    rho: &DensityState,
) -> Result<Vec<InequalityVerdict>> {
    let coarse = Composed::new(phi, phi_prime)?;
    let given_phi = cond_entropy_op(psi, phi, rho)?;
    let given_coarse = cond_entropy_op(psi, &coarse, rho)?;
    let plain = entropy_op(psi, rho)?;
    let digest = || {
        InputDigest::new("knowledge_decreases")
            .state(rho)
            .operation(psi)
            .operation(phi)
            .operation(phi_prime)
    };
    Ok(vec![
        InequalityVerdict::le("knowledge_decreases", given_phi, given_coarse, digest()),
        InequalityVerdict::le("knowledge_decreases_plain", given_phi, plain, digest()),
    ])
}

/// `h(P_e) + P_e log(k - 1)`, the last term read as zero when `k ≤ 1`.
pub fn fano_bound(p_e: f64, k: usize) -> Result<f64> {
    let p = p_e.clamp(0.0, 1.0);
    let tail = if k > 1 { p * ((k - 1) as f64).log2() } else { 0.0 };
    Ok(binary_entropy(p)? + tail)
}

/// `P_e = 1 - Σ_j Tr(ρ X_j ι(Y_j))`, pairing effects by label.
fn error_probability(x: &Povm, y_alg: &SubalgebraEmbedding, y: &Povm, rho: &DensityState) -> Result<f64> {
    let mut hit = 0.0;
    for (label, xe) in x.outcomes().iter().zip(x.effects()) {
        if let Some(k) = y.index_of(label) {
            let ye = y_alg.map(&y.effects()[k])?;
            hit += rho.as_element().trace_product(&xe.mul(&ye)?).re;
        }
    }
    Ok(1.0 - hit)
}

fn same_label_set(a: &[Label], b: &[Label]) -> bool {
    a.len() == b.len() && a.iter().all(|l| b.contains(l))
}

/// `H(X|𝒴) ≤ h(P_e) + P_e log(|𝒳| - 1)` for `Y` a POVM on the domain of `𝒴`.
pub fn check_fano(x: &Povm, y_alg: &SubalgebraEmbedding, y: &Povm, rho: &DensityState) -> Result<InequalityVerdict> {
    y_alg.domain().expect_same(y.algebra())?;
    if !same_label_set(x.outcomes(), y.outcomes()) {
        return Err(Error::ShapeMismatch("X and Y must be indexed by the same labels".into()));
    }
    let p_e = error_probability(x, y_alg, y, rho)?;
    let lhs = cond_entropy_obs_given_alg(x, y_alg, rho)?;
    let rhs = fano_bound(p_e, x.len())?;
    let digest = InputDigest::new("fano")
        .state(rho)
        .operation(&as_operation(x))
        .embedding(y_alg)
        .operation(&as_operation(y));
    Ok(InequalityVerdict::le("fano", lhs, rhs, digest).with_detail("error_probability", p_e))
}

/// `H(𝒳|𝒴) ≤ h(P_e) + P_e log(Tr supp(ρ|_𝒳) - 1)` for commutative `𝒳`, with `X` its
/// maximal observable labelled by block index.
///
/// `Y` must not give weight to values outside `supp(ρ|_𝒳)`; otherwise `P_e` loses
/// its meaning in the reduced range and the input is reported as out of scope.
pub fn check_fano_corollary(
    x_alg: &SubalgebraEmbedding,
    y_alg: &SubalgebraEmbedding,
    y: &Povm,
    rho: &DensityState,
) -> Result<InequalityVerdict> {
    if !x_alg.domain().is_commutative() {
        return Err(Error::Precondition("the first subalgebra must be commutative".into()));
    }
    let k = x_alg.domain().num_blocks();
    let parent = rho.algebra();
    let effects = (0..k).map(|i| x_alg.block_projection(i)).collect();
    let x = Povm::new(parent.clone(), Label::range(k), effects)?;
    if !same_label_set(x.outcomes(), y.outcomes()) {
        return Err(Error::ShapeMismatch("Y must be indexed by the block indices of 𝒳".into()));
    }
    let restricted = restrict(rho, x_alg)?;
    let weights: Vec<f64> = restricted.as_element().blocks().iter().map(|b| b[(0, 0)].re).collect();
    let support: Vec<bool> = weights.iter().map(|&w| w > tol::SUPPORT).collect();
    let support_size = support.iter().filter(|&&s| s).count();
    let outside: f64 = y
        .outcomes()
        .iter()
        .zip(y.effects())
        .filter(|(l, _)| x.index_of(l).is_some_and(|i| !support[i]))
        .map(|(_, e)| y_alg.map(e).map(|m| rho.as_element().trace_product(&m).re))
        .sum::<Result<f64>>()?;
    let p_e = error_probability(&x, y_alg, y, rho)?;
    let lhs = cond_entropy_alg(x_alg, y_alg, rho)?;
    let rhs = fano_bound(p_e, support_size)?;
    let digest = InputDigest::new("fano_corollary")
        .state(rho)
        .embedding(x_alg)
        .embedding(y_alg)
        .operation(&as_operation(y));
    let v = InequalityVerdict::le("fano_corollary", lhs, rhs, digest)
        .with_detail("error_probability", p_e)
        .with_detail("support_size", support_size as f64);
    if outside > tol::SUPPORT {
        return Ok(v
            .with_status(VerdictStatus::PreconditionViolated)
            .with_detail("weight_outside_support", outside));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{tensor, BlockAlgebra};
    use crate::linalg::c;
    use crate::operation::KrausMap;

    fn bell_setup() -> (CompatiblePair, DensityState) {
        let q = BlockAlgebra::full(2);
        let (t, pair) = tensor(&q, &q).unwrap();
        let s = 0.5f64.sqrt();
        let rho = DensityState::pure(t.algebra(), &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap();
        (pair, rho)
    }

    #[test]
    fn klein_hand_case() {
        let a = BlockAlgebra::full(2);
        let p = DensityState::diagonal(&a, &[1.0, 0.0]).unwrap();
        let u = DensityState::diagonal(&a, &[0.5, 0.5]).unwrap();
        let v = check_klein(p.as_element(), u.as_element()).unwrap();
        assert!((v[0].rhs_bits - 1.0).abs() < 1e-14);
        assert!((v[0].lhs_bits - 0.25 / LN_2).abs() < 1e-14);
        assert!(v.iter().all(|x| x.pass));
    }

    #[test]
    fn klein_out_of_scope_input() {
        let a = BlockAlgebra::full(1);
        let v = check_klein(&a.zero(), &a.identity().scale(c(3.0, 0.0))).unwrap();
        assert_eq!(v[0].status, VerdictStatus::PreconditionViolated);
        assert!(!v[0].is_failure());
    }

    #[test]
    fn bell_fixtures() {
        let (pair, rho) = bell_setup();
        let v = check_info_upper_bound(&pair, &rho).unwrap();
        assert!((v.lhs_bits - 2.0).abs() < 1e-12 && v.slack_bits.abs() < 1e-9);
        let p = check_pure_common_state(&pair, &rho).unwrap();
        assert!(p.pass && p.slack_bits.abs() < 1e-9);
        let t = check_triangle(&pair, &rho).unwrap();
        assert!(t.pass && t.slack_bits.abs() < 1e-9);
    }

    #[test]
    fn monotonicity_rejects_subunital() {
        let a = BlockAlgebra::full(2);
        let half = crate::linalg::identity(2) * c(0.5f64.sqrt(), 0.0);
        let phi = KrausMap::new_subunital(a.clone(), a.clone(), vec![half]).unwrap();
        let rho = DensityState::maximally_mixed(&a);
        assert!(matches!(check_monotonicity(&rho, &rho, &phi), Err(Error::Precondition(_))));
    }

    #[test]
    fn verdict_json_round_trip() {
        let (pair, rho) = bell_setup();
        let v = check_triangle(&pair, &rho).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        let back: InequalityVerdict = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        let inf = InequalityVerdict::le("x", 1.0, f64::INFINITY, InputDigest::new("x"));
        assert!(serde_json::to_string(&inf).unwrap().contains("\"inf\""));
    }

    #[test]
    fn fano_log_zero_convention() {
        assert_eq!(fano_bound(0.0, 1).unwrap(), 0.0);
        assert!((fano_bound(0.5, 2).unwrap() - 1.0).abs() < 1e-15);
    }
}
