use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_distribution, mix};
use crate::algebra::{AlgebraElement, BlockAlgebra, Label, SubalgebraEmbedding, TensorProduct};
use crate::digest::InputDigest;
use crate::inequalities::InequalityVerdict;
use crate::infotheory::{
    binary_entropy, cond_entropy_alg, cond_mutual_info_alg, mutual_info_alg, shannon_entropy, von_neumann_entropy,
};
use crate::linalg::{c, Mat};
use crate::observable::{as_operation, measure, Povm};
use crate::operation::{KrausMap, Operation};
use crate::state::{restrict, DensityState};
use crate::{Error, Result};

/// `x ↦ W_x`, a finite family of states on one output algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct CqChannel {
    inputs: Vec<Label>,
    output: BlockAlgebra,
    letters: Vec<DensityState>,
}

impl CqChannel {
    pub fn new(inputs: Vec<Label>, output: BlockAlgebra, letters: Vec<DensityState>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyLabelSet);
        }
        let mut seen = BTreeSet::new();
        for l in &inputs {
            if !seen.insert(l.to_string()) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        if letters.len() != inputs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} letter states for {} inputs",
                letters.len(),
                inputs.len()
            )));
        }
        for w in &letters {
            output.expect_same(w.algebra())?;
        }
        Ok(Self { inputs, output, letters })
    }

    /// Classical channel with transition rows `W(·|x)` on a commutative output.
    pub fn classical(kernel: &[Vec<f64>]) -> Result<Self> {
        let n_out = kernel.first().map(Vec::len).ok_or(Error::EmptyLabelSet)?;
        let output = BlockAlgebra::commutative(n_out)?;
        let letters = kernel
            .iter()
            .map(|row| {
                check_distribution(row, n_out, "channel row")?;
                DensityState::diagonal(&output, row)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(Label::range(kernel.len()), output, letters)
    }

    pub fn inputs(&self) -> &[Label] {
        &self.inputs
    }

    pub fn output(&self) -> &BlockAlgebra {
        &self.output
    }

    pub fn letters(&self) -> &[DensityState] {
        &self.letters
    }

    pub fn letter(&self, x: usize) -> &DensityState {
        &self.letters[x]
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.inputs.iter().position(|l| l == label)
    }

    /// Probabilities of a labeled distribution in input order.
    pub fn align(&self, labels: &[Label], probabilities: &[f64]) -> Result<Vec<f64>> {
        if labels.len() != self.len() || probabilities.len() != labels.len() {
            return Err(Error::ShapeMismatch("distribution labels do not match the channel inputs".into()));
        }
        let mut p = vec![f64::NAN; self.len()];
        for (l, &v) in labels.iter().zip(probabilities) {
            let i = self
                .index_of(l)
                .ok_or_else(|| Error::ShapeMismatch(format!("label {l} is not a channel input")))?;
            p[i] = v;
        }
        check_distribution(&p, self.len(), "input distribution")?;
        Ok(p)
    }

    /// The output state `PW = Σ_x P(x) W_x`.
    pub fn output_state(&self, p: &[f64]) -> Result<DensityState> {
        check_distribution(p, self.len(), "input distribution")?;
        mix(&self.output, p.iter().zip(&self.letters).map(|(&w, s)| (w, s.as_element())))
    }

    /// `φ_* ∘ W` for an operation `φ: 𝒵 → 𝒴`.
    pub fn post_process(&self, phi: &dyn Operation) -> Result<CqChannel> {
        self.output.expect_same(phi.target())?;
        let letters = self.letters.iter().map(|w| phi.preadjoint(w)).collect::<Result<Vec<_>>>()?;
        CqChannel::new(self.inputs.clone(), phi.source().clone(), letters)
    }

    /// `Y_* ∘ W`, the classical channel of outcome distributions.
    pub fn measured(&self, y: &Povm) -> Result<CqChannel> {
        self.post_process(&as_operation(y))
    }

    /// `ι_* ∘ W` for a subalgebra of the output.
    pub fn restricted(&self, iota: &SubalgebraEmbedding) -> Result<CqChannel> {
        self.post_process(iota)
    }

    fn digest(&self, tag: &str) -> InputDigest {
        self.letters.iter().fold(InputDigest::new(tag).algebra(&self.output), |d, s| d.state(s))
    }
}

/// `I(P,W) = H(PW) - Σ_x P(x) H(W_x)`.
pub fn mutual_information_pw(p: &[f64], w: &CqChannel) -> Result<f64> {
    let avg = von_neumann_entropy(&w.output_state(p)?);
    let cond: f64 = p
        .iter()
        .zip(w.letters())
        .filter(|(&px, _)| px > 0.0)
        .map(|(&px, s)| px * von_neumann_entropy(s))
        .sum();
    Ok(avg - cond)
}

/// A state on `ℂ𝒳 ⊗ 𝒴 (⊗ 𝒵)` or `ℂ𝒳_1 ⊗ ⋯ ⊗ ℂ𝒳_s ⊗ 𝒴` with its factor embeddings.
#[derive(Clone, Debug)]
pub struct ChannelState {
    pub state: DensityState,
    pub tensor: TensorProduct,
    /// Embedding of each tensor factor, in factor order.
    pub factors: Vec<SubalgebraEmbedding>,
    /// Receiver subalgebras inside the output factor (multiway states only).
    pub receivers: Vec<SubalgebraEmbedding>,
}

impl ChannelState {
    /// `Σ_k w_k a_{k,1} ⊗ ⋯ ⊗ a_{k,m}`.
    pub(crate) fn from_terms(factors: Vec<BlockAlgebra>, terms: &[(f64, Vec<&AlgebraElement>)]) -> Result<Self> {
        let tensor = TensorProduct::new(factors)?;
        let mut acc = tensor.algebra().zero();
        for (w, parts) in terms {
            if *w > 0.0 {
                acc.add_scaled_assign(&tensor.embed_product(parts)?, c(*w, 0.0));
            }
        }
        let state = DensityState::new(acc)?;
        let factors = (0..tensor.num_factors())
            .map(|k| tensor.factor_embedding(k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            state,
            tensor,
            factors,
            receivers: Vec::new(),
        })
    }

    pub fn factor(&self, k: usize) -> &SubalgebraEmbedding {
        &self.factors[k]
    }

    /// The restriction of the state to factor `k`.
    pub fn marginal(&self, k: usize) -> Result<DensityState> {
        restrict(&self.state, &self.factors[k])
    }

    /// `I(𝒜_a ∧ 𝒜_b)` between two tensor factors.
    pub fn mutual_information(&self, a: usize, b: usize) -> Result<f64> {
        mutual_info_alg(&self.factors[a], &self.factors[b], &self.state)
    }
}

fn input_units(n: usize) -> Result<(BlockAlgebra, Vec<AlgebraElement>)> {
    let alg = BlockAlgebra::commutative(n)?;
    let units = (0..n).map(|x| alg.block_unit(x)).collect();
    Ok((alg, units))
}

/// `γ = Σ_x P(x) [x] ⊗ W_x` on `ℂ𝒳 ⊗ 𝒴`.
pub fn build_channel_state(p: &[f64], w: &CqChannel) -> Result<ChannelState> {
    check_distribution(p, w.len(), "input distribution")?;
    let (x_alg, units) = input_units(w.len())?;
    let terms: Vec<(f64, Vec<&AlgebraElement>)> = p
        .iter()
        .zip(&units)
        .zip(w.letters())
        .map(|((&px, e), s)| (px, vec![e, s.as_element()]))
        .collect();
    ChannelState::from_terms(vec![x_alg, w.output().clone()], &terms)
}

/// `γ = Σ_x P(x) [x] ⊗ W_x ⊗ φ_*(W_x)` on `ℂ𝒳 ⊗ 𝒴 ⊗ 𝒵` for `φ: 𝒵 → 𝒴`.
pub fn build_three_stage(p: &[f64], w: &CqChannel, phi: &dyn Operation) -> Result<ChannelState> {
    check_distribution(p, w.len(), "input distribution")?;
    let z = w.post_process(phi)?;
    let (x_alg, units) = input_units(w.len())?;
    let terms: Vec<(f64, Vec<&AlgebraElement>)> = (0..w.len())
        .map(|x| (p[x], vec![&units[x], w.letter(x).as_element(), z.letter(x).as_element()]))
        .collect();
    ChannelState::from_terms(vec![x_alg, w.output().clone(), phi.source().clone()], &terms)
}

/// An explicit decomposition `W_x = Σ_y W(y|x) V_y` into pure states.
#[derive(Clone, Debug)]
pub struct PureDecomposition {
    /// `kernel[x][y] = W(y|x)`.
    pub kernel: Vec<Vec<f64>>,
    pub states: Vec<DensityState>,
}

/// Frobenius tolerance for reconstructing `W_x` from a pure decomposition.
const DECOMPOSITION_TOL: f64 = 1e-8;

impl PureDecomposition {
    pub fn validate(&self, w: &CqChannel) -> Result<()> {
        if self.kernel.len() != w.len() {
            return Err(Error::Decomposition(format!("{} kernel rows for {} inputs", self.kernel.len(), w.len())));
        }
        for (y, v) in self.states.iter().enumerate() {
            w.output().expect_same(v.algebra())?;
            if !v.is_pure() {
                return Err(Error::Decomposition(format!("V_{y} is not pure")));
            }
        }
        for (x, row) in self.kernel.iter().enumerate() {
            check_distribution(row, self.states.len(), "decomposition row")
                .map_err(|e| Error::Decomposition(e.to_string()))?;
            let rebuilt = mix(w.output(), row.iter().zip(&self.states).map(|(&q, v)| (q, v.as_element())))?;
            let err = rebuilt.as_element().sub(w.letter(x).as_element())?.frobenius();
            if err > DECOMPOSITION_TOL {
                return Err(Error::Decomposition(format!("W_{x} reconstructed with error {err:e}")));
            }
        }
        Ok(())
    }
}

/// `γ = Σ_{x,y} P(x) W(y|x) [x] ⊗ V_y ⊗ φ_*(V_y)`.
pub fn build_three_stage_decomposed(
    p: &[f64],
    w: &CqChannel,
    decomposition: &PureDecomposition,
    phi: &dyn Operation,
) -> Result<ChannelState> {
    check_distribution(p, w.len(), "input distribution")?;
    decomposition.validate(w)?;
    w.output().expect_same(phi.target())?;
    let z: Vec<DensityState> = decomposition
        .states
        .iter()
        .map(|v| phi.preadjoint(v))
        .collect::<Result<_>>()?;
    let (x_alg, units) = input_units(w.len())?;
    let mut terms: Vec<(f64, Vec<&AlgebraElement>)> = Vec::new();
    for (x, row) in decomposition.kernel.iter().enumerate() {
        for (y, &q) in row.iter().enumerate() {
            terms.push((p[x] * q, vec![&units[x], decomposition.states[y].as_element(), z[y].as_element()]));
        }
    }
    ChannelState::from_terms(vec![x_alg, w.output().clone(), phi.source().clone()], &terms)
}

/// Post-processing applied to the channel output in the Holevo bound.
pub enum Processing<'a> {
    Operation(&'a dyn Operation),
    Povm(&'a Povm),
}

/// `I(P, φ_*∘W) ≤ I(P,W)` and `I(P,W) ≤ H(P)`.
pub fn check_holevo_bound(p: &[f64], w: &CqChannel, processing: Processing<'_>) -> Result<Vec<InequalityVerdict>> {
    let (processed, digest) = match processing {
        Processing::Operation(phi) => (w.post_process(phi)?, w.digest("holevo_bound").operation(phi)),
        Processing::Povm(y) => {
            let op = as_operation(y);
            (w.post_process(&op)?, w.digest("holevo_bound").operation(&op))
        }
    };
    let digest = digest.floats(p);
    let i_w = mutual_information_pw(p, w)?;
    let i_processed = mutual_information_pw(p, &processed)?;
    Ok(vec![
        InequalityVerdict::le("holevo_bound", i_processed, i_w, digest.clone()),
        InequalityVerdict::le("holevo_entropy_cap", i_w, shannon_entropy(p), digest),
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleRow {
    pub scenario: u8,
    pub quantity: String,
    pub value_bits: f64,
    /// Three-digit value as printed with the example.
    pub printed: f64,
    pub closed_form: f64,
    pub closed_form_expr: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleTable {
    pub rows: Vec<ExampleRow>,
    /// `I(𝒳∧𝒵|𝒴)` per scenario; nonzero in both.
    pub cmi_z_given_y: Vec<f64>,
    pub notes: Vec<String>,
}

/// The binary channel `W_0 = |0⟩⟨0|`, `W_1 = |+⟩⟨+|`.
pub fn example_channel() -> CqChannel {
    let alg = BlockAlgebra::full(2);
    let s = 0.5f64.sqrt();
    let w0 = DensityState::pure(&alg, &[c(1.0, 0.0), c(0.0, 0.0)]).expect("unit vector");
    let w1 = DensityState::pure(&alg, &[c(s, 0.0), c(s, 0.0)]).expect("unit vector");
    CqChannel::new(Label::range(2), alg, vec![w0, w1]).expect("valid fixture")
}

/// The projective measurement in `|u⟩ = cos(π/8)|0⟩ - sin(π/8)|1⟩`, `|v⟩ = sin(π/8)|0⟩ + cos(π/8)|1⟩`.
pub fn example_measurement() -> Povm {
    let (co, si) = ((PI / 8.0).cos(), (PI / 8.0).sin());
    let basis = Mat::from_row_slice(2, 2, &[c(co, 0.0), c(si, 0.0), c(-si, 0.0), c(co, 0.0)]);
    Povm::projective(&BlockAlgebra::full(2), &basis, vec!["u".into(), "v".into()]).expect("orthonormal basis")
}

fn h(x: f64) -> f64 {
    binary_entropy(x).expect("argument in [0, 1]")
}

/// Conditional entropies of the three-stage states of the binary example,
/// with `φ_* = id` (scenario 1) and `φ_*` the outcome map of the `(u,v)` measurement (scenario 2).
pub fn example_counterexample_table() -> Result<ExampleTable> {
    let w = example_channel();
    let p = [0.5, 0.5];
    let identity = KrausMap::identity(w.output());
    let measurement = as_operation(&example_measurement());
    let alpha = (PI / 8.0).cos().powi(2);
    let beta = (1.0 + (1.0 - 2.0 * alpha * (1.0 - alpha)).sqrt()) / 2.0;

    let mut rows = Vec::new();
    let mut cmi = Vec::new();
    let scenarios: [(u8, &dyn Operation); 2] = [(1, &identity), (2, &measurement)];
    for (scenario, phi) in scenarios {
        let gamma = build_three_stage(&p, &w, phi)?;
        let (_, yz) = gamma.tensor.subsystem_embedding(&[1, 2])?;
        let x = gamma.factor(0);
        let h_y = cond_entropy_alg(x, gamma.factor(1), &gamma.state)?;
        let h_yz = cond_entropy_alg(x, &yz, &gamma.state)?;
        cmi.push(cond_mutual_info_alg(x, gamma.factor(2), gamma.factor(1), &gamma.state)?);
        let (printed_yz, closed_yz, expr_yz) = if scenario == 1 {
            (0.189, 1.0 - h((PI / 6.0).cos().powi(2)), "1 - h(cos^2(pi/6))")
        } else {
            (0.246, h(alpha) - h(beta), "h(alpha) - h(beta)")
        };
        rows.push(ExampleRow {
            scenario,
            quantity: "H(X|Y)".into(),
            value_bits: h_y,
            printed: 0.399,
            closed_form: 1.0 - h(alpha),
            closed_form_expr: "1 - h(cos^2(pi/8))".into(),
        });
        rows.push(ExampleRow {
            scenario,
            quantity: "H(X|YZ)".into(),
            value_bits: h_yz,
            printed: printed_yz,
            closed_form: closed_yz,
            closed_form_expr: expr_yz.into(),
        });
    }
    let notes = vec![
        format!("alpha = cos^2(pi/8) = {alpha:.7}, beta = (1 + sqrt(1 - 2 alpha (1 - alpha)))/2 = {beta:.7}"),
        format!(
            "scenario 2: the value 0.246 equals h(alpha) - h(beta); the expression 1 - h(beta) evaluates to {:.6}",
            1.0 - h(beta)
        ),
    ];
    Ok(ExampleTable {
        rows,
        cmi_z_given_y: cmi,
        notes,
    })
}

/// Outcome distributions of a measurement on each letter state, as transition rows.
pub fn measurement_kernel(w: &CqChannel, y: &Povm) -> Result<Vec<Vec<f64>>> {
    w.letters().iter().map(|s| Ok(measure(y, s)?.probabilities)).collect()
}
