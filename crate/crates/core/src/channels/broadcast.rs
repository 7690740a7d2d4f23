//! Degraded broadcast channels `(W, φ_*, 𝒴)`.

use serde::{Deserialize, Serialize};

use super::{check_distribution, mix, mutual_information_pw, CqChannel};
use crate::algebra::{AlgebraElement, Label};
use crate::inequalities::CONJECTURE;
use crate::observable::Povm;
use crate::operation::{KrausMap, Operation};
use crate::{Error, Result};

/// The three conjectured rate bounds for one `(Q, V)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BroadcastPoint {
    /// `R_1 ≤ I(V(·|u), W | Q) = Σ_u Q(u) I(V(·|u), W)`.
    pub r1_bits: f64,
    /// `R_0 + R_2 ≤ I(Q, φ_* ∘ W ∘ V)`.
    pub r0_plus_r2_bits: f64,
    /// `R_1 + R_0 + R_2 ≤ I(QV, W)`.
    pub total_bits: f64,
    pub tag: String,
}

/// Bounds of the conjectured degraded broadcast region at `Q` on `𝒰` and the
/// kernel `V(x|u)`, for `φ: 𝒴_2 → 𝒴`. Every output carries the CONJECTURE tag.
pub fn broadcast_region_point(q: &[f64], v: &[Vec<f64>], w: &CqChannel, phi: &dyn Operation) -> Result<BroadcastPoint> {
    check_distribution(q, v.len(), "auxiliary distribution")?;
    for row in v {
        check_distribution(row, w.len(), "kernel row")?;
    }
    let r1 = q
        .iter()
        .zip(v)
        .filter(|(&qu, _)| qu > 0.0)
        .map(|(&qu, row)| Ok(qu * mutual_information_pw(row, w)?))
        .sum::<Result<f64>>()?;

    let degraded = w.post_process(phi)?;
    let cascade = v
        .iter()
        .map(|row| mix(degraded.output(), row.iter().zip(degraded.letters()).map(|(&p, s)| (p, s.as_element()))))
        .collect::<Result<Vec<_>>>()?;
    let cascade = CqChannel::new(Label::range(v.len()), degraded.output().clone(), cascade)?;
    let middle = mutual_information_pw(q, &cascade)?;

    let qv: Vec<f64> = (0..w.len()).map(|x| q.iter().zip(v).map(|(&qu, row)| qu * row[x]).sum()).collect();
    let total = mutual_information_pw(&qv, w)?;
    Ok(BroadcastPoint {
        r1_bits: r1,
        r0_plus_r2_bits: middle,
        total_bits: total,
        tag: CONJECTURE.to_string(),
    })
}

/// An `n`-block code `(f, D̃_1, D_2)` for a degraded broadcast channel.
///
/// Messages are `(m_0, m_1, m_2)` with row-major flat index. `E_{m_0 m_1}` act
/// on `𝒴^{⊗n}` and are indexed row-major over `𝓜_0' × 𝓜_1'`; `D_2` is a POVM on
/// `𝒴_2^{⊗n}` with outcomes row-major over `𝓜_0' × 𝓜_2'`.
#[derive(Clone, Debug)]
pub struct BroadcastCode {
    pub block_length: usize,
    /// `|𝓜_0|, |𝓜_1|, |𝓜_2|`.
    pub messages: [usize; 3],
    /// `|𝓜_0'|, |𝓜_1'|, |𝓜_2'|`, each at least the message count.
    pub decoded: [usize; 3],
    /// Codeword of each message triple, as letter indices.
    pub encoder: Vec<Vec<usize>>,
    pub e_operators: Vec<AlgebraElement>,
    pub d2: Povm,
}

#[derive(Clone, Debug)]
pub struct BroadcastError {
    pub maximum: f64,
    pub average: f64,
    /// `D_{1,m_0 m_1} = E_{m_0 m_1} E*_{m_0 m_1}`.
    pub d1: Povm,
}

/// `1 - Tr(φ^{⊗n}_*(E* W_{f(m)} E) D_{2,m_0 m_2})` maximized and averaged over messages.
pub fn broadcast_code_error(w: &CqChannel, phi: &dyn Operation, code: &BroadcastCode) -> Result<BroadcastError> {
    let n = code.block_length;
    let [m0, m1, m2] = code.messages;
    let [d0, d1n, d2n] = code.decoded;
    if n == 0 || m0 == 0 || m1 == 0 || m2 == 0 {
        return Err(Error::OutOfRange("empty message set or zero block length".into()));
    }
    if d0 < m0 || d1n < m1 || d2n < m2 {
        return Err(Error::ShapeMismatch("decoded index sets must contain the message sets".into()));
    }
    if code.encoder.len() != m0 * m1 * m2 {
        return Err(Error::ShapeMismatch(format!("{} codewords for {} messages", code.encoder.len(), m0 * m1 * m2)));
    }
    if let Some(word) = code.encoder.iter().find(|c| c.len() != n || c.iter().any(|&x| x >= w.len())) {
        return Err(Error::ShapeMismatch(format!("invalid codeword {word:?}")));
    }
    if w.output().rep_dim().checked_pow(n as u32).is_none_or(|d| d > super::MAX_TENSOR_DIM) {
        return Err(Error::Budget(format!(
            "output tensor power of dimension {}^{n} exceeds the limit {}",
            w.output().rep_dim(),
            super::MAX_TENSOR_DIM
        )));
    }
    let phi_kraus = KrausMap::from_operation(phi)?;
    let (phi_n, _, out_tensor) = phi_kraus.tensor_power(n)?;
    out_tensor.factors()[0].expect_same(w.output())?;
    let big = out_tensor.algebra();
    phi_n.source().expect_same(code.d2.algebra())?;
    if code.e_operators.len() != d0 * d1n {
        return Err(Error::ShapeMismatch(format!("{} E operators for {} indices", code.e_operators.len(), d0 * d1n)));
    }
    if code.d2.len() != d0 * d2n {
        return Err(Error::ShapeMismatch(format!("D_2 has {} outcomes for {} indices", code.d2.len(), d0 * d2n)));
    }

    let effects = code
        .e_operators
        .iter()
        .map(|e| {
            big.expect_same(e.algebra())?;
            e.mul(&e.adjoint())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum = big.zero();
    for e in &effects {
        sum = sum.add(e)?;
    }
    let defect = sum.sub(&big.identity())?.op_norm();
    if defect > 1e-8 {
        return Err(Error::Precondition(format!("E E* does not sum to one (defect {defect:e})")));
    }
    let labels = (0..d0)
        .flat_map(|a| (0..d1n).map(move |b| Label::pair(Label::atom(a.to_string()), Label::atom(b.to_string()))))
        .collect();
    let d1 = Povm::new(big.clone(), labels, effects)?;

    let mut worst: f64 = 0.0;
    let mut total = 0.0;
    for a in 0..m0 {
        for b in 0..m1 {
            for c in 0..m2 {
                let word = &code.encoder[(a * m1 + b) * m2 + c];
                let parts: Vec<&AlgebraElement> = word.iter().map(|&x| w.letter(x).as_element()).collect();
                let state = out_tensor.embed_product(&parts)?;
                let e = &code.e_operators[a * d1n + b];
                let post = e.adjoint().mul(&state)?.mul(e)?;
                let received = phi_n.preadjoint_element(&post)?;
                let success = received.trace_product(&code.d2.effects()[a * d2n + c]).re;
                let err = 1.0 - success;
                worst = worst.max(err);
                total += err;
            }
        }
    }
    Ok(BroadcastError {
        maximum: worst,
        average: total / (m0 * m1 * m2) as f64,
        d1,
    })
}
