//! Entropy, divergence and information in bits.
//!
//! Every quantity is available in three languages that agree whenever they
//! overlap: observables (Shannon quantities of joint outcome distributions),
//! subalgebras (von Neumann entropy of restrictions to generated products) and
//! operations (von Neumann entropy of trace duals of operation products).
//! Conditional quantities are always entropy differences.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{generated_product_many, AlgebraElement, SubalgebraEmbedding};
use crate::linalg::{self, entropy_bits};
use crate::observable::{as_operation, joint, measure, Povm};
use crate::operation::{Operation, OperationProduct};
use crate::state::{restrict, DensityState};
use crate::{tol, Error, Result};

/// Weight `Tr ρ(1 - P_σ)` outside `supp σ` that makes the divergence infinite.
const DIVERGENCE_LEAK: f64 = 1e-10;

pub fn shannon_entropy(p: &[f64]) -> f64 {
    entropy_bits(p)
}

/// `h(x) = -x log x - (1-x) log(1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!("h({x})")));
    }
    Ok(entropy_bits(&[x, 1.0 - x]))
}

/// `H(ρ) = -Tr ρ log ρ`.
pub fn von_neumann_entropy(rho: &DensityState) -> f64 {
    entropy_bits(&rho.eigenvalues())
}

/// Umegaki divergence, finite or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DivergenceValue {
    Finite(f64),
    Infinite,
}

impl DivergenceValue {
    /// The value as a float, `f64::INFINITY` for the sentinel.
    pub fn bits(self) -> f64 {
        match self {
            DivergenceValue::Finite(x) => x,
            DivergenceValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, DivergenceValue::Finite(_))
    }
}

impl fmt::Display for DivergenceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceValue::Finite(x) => write!(f, "{x}"),
            DivergenceValue::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for DivergenceValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::document::bits_serde::serialize(&self.bits(), s)
    }
}

impl<'de> Deserialize<'de> for DivergenceValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = crate::document::bits_serde::deserialize(d)?;
        Ok(if x == f64::INFINITY {
            DivergenceValue::Infinite
        } else {
            DivergenceValue::Finite(x)
        })
    }
}

/// `D(ρ‖σ) = Tr ρ(log ρ - log σ)` for states.
pub fn divergence(rho: &DensityState, sigma: &DensityState) -> Result<DivergenceValue> {
    divergence_elements(rho.as_element(), sigma.as_element())
}

/// The same trace formula for arbitrary positive elements; `log σ` is taken on `supp σ`.
pub fn divergence_elements(a: &AlgebraElement, b: &AlgebraElement) -> Result<DivergenceValue> {
    a.algebra().expect_same(b.algebra())?;
    let mut total = 0.0;
    for (ra, rb) in a.blocks().iter().zip(b.blocks()) {
        let (av, avec) = linalg::eigh(ra);
        let (bv, bvec) = linalg::eigh(rb);
        let support: Vec<usize> = (0..bv.len()).filter(|&k| bv[k] > tol::SUPPORT).collect();
        let leak: f64 = av
            .iter()
            .enumerate()
            .filter(|(_, &alpha)| alpha > 0.0)
            .map(|(i, &alpha)| {
                let v = avec.column(i);
                let inside: f64 = support.iter().map(|&k| bvec.column(k).dotc(&v).norm_sqr()).sum();
                alpha * (1.0 - inside).max(0.0)
            })
            .sum();
        if leak > DIVERGENCE_LEAK {
            return Ok(DivergenceValue::Infinite);
        }
        let a_log_a: f64 = av.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum();
        let a_log_b: f64 = support
            .iter()
            .map(|&k| {
                let w = bvec.column(k);
                let weight = (w.adjoint() * ra * w)[(0, 0)].re;
                weight * bv[k].log2()
            })
            .sum();
        total += a_log_a - a_log_b;
    }
    Ok(DivergenceValue::Finite(total))
}

/// Which computation path produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Observable,
    Subalgebra,
    Operation,
    Pidgin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub quantity: String,
    pub language: Language,
    pub value_bits: f64,
    pub inputs_digest: String,
}

// ---- observables ----

/// `H(X_1 ⋯ X_m)` of the joint observable; zero for an empty list.
pub fn joint_entropy_obs(xs: &[&Povm], rho: &DensityState) -> Result<f64> {
    let Some((first, rest)) = xs.split_first() else {
        return Ok(0.0);
    };
    let mut acc = (*first).clone();
    for x in rest {
        acc = joint(&acc, x)?;
    }
    Ok(measure(&acc, rho)?.entropy())
}

pub fn entropy_obs(x: &Povm, rho: &DensityState) -> Result<f64> {
    joint_entropy_obs(&[x], rho)
}

/// `H(X|Y) = H(XY) - H(Y)`.
pub fn cond_entropy_obs(x: &Povm, y: &Povm, rho: &DensityState) -> Result<f64> {
    Ok(joint_entropy_obs(&[x, y], rho)? - entropy_obs(y, rho)?)
}

/// `I(X∧Y) = H(X) + H(Y) - H(XY)`.
pub fn mutual_info_obs(x: &Povm, y: &Povm, rho: &DensityState) -> Result<f64> {
    Ok(entropy_obs(x, rho)? + entropy_obs(y, rho)? - joint_entropy_obs(&[x, y], rho)?)
}

/// `I(X∧Y|Z) = H(XZ) + H(YZ) - H(XYZ) - H(Z)`.
pub fn cond_mutual_info_obs(x: &Povm, y: &Povm, z: &Povm, rho: &DensityState) -> Result<f64> {
    Ok(joint_entropy_obs(&[x, z], rho)? + joint_entropy_obs(&[y, z], rho)?
        - joint_entropy_obs(&[x, y, z], rho)?
        - entropy_obs(z, rho)?)
}

// ---- subalgebras ----

/// `H(𝒳_1 ⋯ 𝒳_m)` of the generated product; `H(C1) = 0` for an empty list.
pub fn joint_entropy_alg(parts: &[&SubalgebraEmbedding], rho: &DensityState) -> Result<f64> {
    let prod = generated_product_many(rho.algebra(), parts)?;
    Ok(von_neumann_entropy(&restrict(rho, &prod)?))
}

/// `H(𝒳) = H(ι_* ρ)`.
pub fn entropy_alg(x: &SubalgebraEmbedding, rho: &DensityState) -> Result<f64> {
    Ok(von_neumann_entropy(&restrict(rho, x)?))
}

/// `H(𝒳|𝒴) = H(𝒳𝒴) - H(𝒴)`.
pub fn cond_entropy_alg(x: &SubalgebraEmbedding, y: &SubalgebraEmbedding, rho: &DensityState) -> Result<f64> {
    Ok(joint_entropy_alg(&[x, y], rho)? - entropy_alg(y, rho)?)
}

/// `I(𝒳∧𝒴) = H(𝒳) + H(𝒴) - H(𝒳𝒴)`.
pub fn mutual_info_alg(x: &SubalgebraEmbedding, y: &SubalgebraEmbedding, rho: &DensityState) -> Result<f64> {
    Ok(entropy_alg(x, rho)? + entropy_alg(y, rho)? - joint_entropy_alg(&[x, y], rho)?)
}

/// `I(𝒳_1∧𝒳_2|𝒴) = H(𝒳_1𝒴) + H(𝒳_2𝒴) - H(𝒳_1𝒳_2𝒴) - H(𝒴)`.
pub fn cond_mutual_info_alg(
    x1: &SubalgebraEmbedding,
    x2: &SubalgebraEmbedding,
    y: &SubalgebraEmbedding,
    rho: &DensityState,
) -> Result<f64> {
    Ok(joint_entropy_alg(&[x1, y], rho)? + joint_entropy_alg(&[x2, y], rho)?
        - joint_entropy_alg(&[x1, x2, y], rho)?
        - entropy_alg(y, rho)?)
}

// ---- operations ----

/// `H(φ_1 ⋯ φ_m) = H((φ_1⋯φ_m)_* ρ)`; zero for an empty list.
pub fn joint_entropy_op(ops: &[&dyn Operation], rho: &DensityState) -> Result<f64> {
    match ops {
        [] => Ok(0.0),
        [one] => Ok(von_neumann_entropy(&one.preadjoint(rho)?)),
        many => {
            let p = OperationProduct::new(many.to_vec())?;
            Ok(von_neumann_entropy(&p.preadjoint(rho)?))
        }
    }
}

pub fn entropy_op(phi: &dyn Operation, rho: &DensityState) -> Result<f64> {
    joint_entropy_op(&[phi], rho)
}

/// `H(φ|ψ) = H(φψ) - H(ψ)`.
pub fn cond_entropy_op(phi: &dyn Operation, psi: &dyn Operation, rho: &DensityState) -> Result<f64> {
    Ok(joint_entropy_op(&[phi, psi], rho)? - entropy_op(psi, rho)?)
}

/// `I(φ∧ψ) = H(φ) + H(ψ) - H(φψ)`.
pub fn mutual_info_op(phi: &dyn Operation, psi: &dyn Operation, rho: &DensityState) -> Result<f64> {
    Ok(entropy_op(phi, rho)? + entropy_op(psi, rho)? - joint_entropy_op(&[phi, psi], rho)?)
}

/// `I(φ_1∧φ_2|ψ) = H(φ_1ψ) + H(φ_2ψ) - H(φ_1φ_2ψ) - H(ψ)`.
pub fn cond_mutual_info_op(
    phi1: &dyn Operation,
    phi2: &dyn Operation,
    psi: &dyn Operation,
    rho: &DensityState,
) -> Result<f64> {
    Ok(joint_entropy_op(&[phi1, psi], rho)? + joint_entropy_op(&[phi2, psi], rho)?
        - joint_entropy_op(&[phi1, phi2, psi], rho)?
        - entropy_op(psi, rho)?)
}

// ---- pidgin ----

/// `H(𝒳|Y) = H(ιY) - H(Y)`.
pub fn cond_entropy_alg_given_obs(x: &SubalgebraEmbedding, y: &Povm, rho: &DensityState) -> Result<f64> {
    let yo = as_operation(y);
    Ok(joint_entropy_op(&[x, &yo], rho)? - entropy_obs(y, rho)?)
}

/// `I(𝒳∧Y) = H(ι) + H(Y) - H(ιY)`.
pub fn mutual_info_alg_obs(x: &SubalgebraEmbedding, y: &Povm, rho: &DensityState) -> Result<f64> {
    let yo = as_operation(y);
    Ok(entropy_alg(x, rho)? + entropy_obs(y, rho)? - joint_entropy_op(&[x, &yo], rho)?)
}

/// `H(X|𝒴) = H(Xȷ) - H(𝒴)`.
pub fn cond_entropy_obs_given_alg(x: &Povm, y: &SubalgebraEmbedding, rho: &DensityState) -> Result<f64> {
    let xo = as_operation(x);
    Ok(joint_entropy_op(&[&xo, y], rho)? - entropy_alg(y, rho)?)
}
