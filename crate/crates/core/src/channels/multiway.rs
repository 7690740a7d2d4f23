use std::collections::{BTreeMap, BTreeSet};

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_distribution, complement, nonempty_subsets, ChannelState, CqEnsemble};
use crate::algebra::{
    check_compatible, generated_product_many, AlgebraElement, BlockAlgebra, Label, SubalgebraEmbedding, TensorProduct,
};
use crate::digest::InputDigest;
use crate::inequalities::InequalityVerdict;
use crate::infotheory::cond_mutual_info_alg;
use crate::observable::Povm;
use crate::random::stream;
use crate::state::{product_state, restrict, DensityState};
use crate::{tol, Error, Result};

pub const MAX_SENDERS: usize = 4;
pub const MAX_ALPHABET: usize = 8;
/// Largest representation dimension of the output algebra.
pub const MAX_OUTPUT_DIM: usize = 16;
/// Largest representation dimension of a receiver tensor power `𝒴_j^{⊗n}`.
pub const MAX_TENSOR_DIM: usize = 64;
/// Largest number of message tuples of a code.
const MAX_MESSAGES: usize = 4096;
const MAX_SAMPLES: usize = 1 << 20;

/// `s` senders with commutative input algebras, one output algebra and `r`
/// pairwise compatible receiver subalgebras.
#[derive(Clone, Debug)]
pub struct MultiwayChannel {
    senders: Vec<Vec<Label>>,
    output: BlockAlgebra,
    /// Indexed by input tuples in row-major order (sender 0 slowest).
    letters: Vec<DensityState>,
    receivers: Vec<SubalgebraEmbedding>,
}

impl MultiwayChannel {
    pub fn new(
        senders: Vec<Vec<Label>>,
        output: BlockAlgebra,
        letters: Vec<DensityState>,
        receivers: Vec<SubalgebraEmbedding>,
    ) -> Result<Self> {
        if senders.is_empty() || receivers.is_empty() {
            return Err(Error::EmptyLabelSet);
        }
        for alphabet in &senders {
            if alphabet.is_empty() {
                return Err(Error::EmptyLabelSet);
            }
            let mut seen = BTreeSet::new();
            for l in alphabet {
                if !seen.insert(l.to_string()) {
                    return Err(Error::DuplicateLabel(l.to_string()));
                }
            }
        }
        let n: usize = senders.iter().map(Vec::len).product();
        if letters.len() != n {
            return Err(Error::ShapeMismatch(format!("{} letter states for {n} input tuples", letters.len())));
        }
        for w in &letters {
            output.expect_same(w.algebra())?;
        }
        for (a, ra) in receivers.iter().enumerate() {
            output.expect_same(ra.parent())?;
            for rb in &receivers[a + 1..] {
                check_compatible(ra, rb, tol::COMMUTATOR)?.into_pair(tol::COMMUTATOR)?;
            }
        }
        Ok(Self {
            senders,
            output,
            letters,
            receivers,
        })
    }

    /// Classical channel with transition rows over the input tuples and a single
    /// receiver seeing the whole commutative output.
    pub fn classical(sizes: &[usize], kernel: &[Vec<f64>]) -> Result<Self> {
        let n_out = kernel.first().map(Vec::len).ok_or(Error::EmptyLabelSet)?;
        let output = BlockAlgebra::commutative(n_out)?;
        let letters = kernel
            .iter()
            .map(|row| {
                check_distribution(row, n_out, "channel row")?;
                DensityState::diagonal(&output, row)
            })
            .collect::<Result<Vec<_>>>()?;
        let receivers = vec![SubalgebraEmbedding::identity(&output)];
        Self::new(sizes.iter().map(|&n| Label::range(n)).collect(), output, letters, receivers)
    }

    pub fn senders(&self) -> &[Vec<Label>] {
        &self.senders
    }

    pub fn output(&self) -> &BlockAlgebra {
        &self.output
    }

    pub fn letters(&self) -> &[DensityState] {
        &self.letters
    }

    pub fn receivers(&self) -> &[SubalgebraEmbedding] {
        &self.receivers
    }

    pub fn num_senders(&self) -> usize {
        self.senders.len()
    }

    pub fn num_receivers(&self) -> usize {
        self.receivers.len()
    }

    pub fn alphabet_sizes(&self) -> Vec<usize> {
        self.senders.iter().map(Vec::len).collect()
    }

    pub fn num_inputs(&self) -> usize {
        self.letters.len()
    }

    /// Row-major index of an input tuple.
    pub fn tuple_index(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.senders).fold(0, |acc, (&xi, a)| acc * a.len() + xi)
    }

    /// Inverse of [`Self::tuple_index`].
    pub fn tuple(&self, mut k: usize) -> Vec<usize> {
        let mut x = vec![0; self.senders.len()];
        for (i, a) in self.senders.iter().enumerate().rev() {
            x[i] = k % a.len();
            k /= a.len();
        }
        x
    }

    /// The desk-scale limits on senders, alphabets and output dimension.
    pub fn check_budget(&self) -> Result<()> {
        if self.senders.len() > MAX_SENDERS {
            return Err(Error::Budget(format!("{} senders exceed the limit {MAX_SENDERS}", self.senders.len())));
        }
        if let Some(a) = self.senders.iter().find(|a| a.len() > MAX_ALPHABET) {
            return Err(Error::Budget(format!("alphabet size {} exceeds the limit {MAX_ALPHABET}", a.len())));
        }
        if self.output.rep_dim() > MAX_OUTPUT_DIM {
            return Err(Error::Budget(format!(
                "output dimension {} exceeds the limit {MAX_OUTPUT_DIM}",
                self.output.rep_dim()
            )));
        }
        Ok(())
    }

    /// The channel with senders reordered: new sender `i` is old sender `perm[i]`.
    pub fn permute_senders(&self, perm: &[usize]) -> Result<Self> {
        let s = self.num_senders();
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..s).collect::<Vec<_>>() {
            return Err(Error::OutOfRange("not a permutation of the senders".into()));
        }
        let senders: Vec<Vec<Label>> = perm.iter().map(|&i| self.senders[i].clone()).collect();
        let n: usize = self.num_inputs();
        let sizes: Vec<usize> = senders.iter().map(Vec::len).collect();
        let letters = (0..n)
            .map(|k| {
                let mut rem = k;
                let mut new = vec![0; s];
                for i in (0..s).rev() {
                    new[i] = rem % sizes[i];
                    rem /= sizes[i];
                }
                let mut old = vec![0; s];
                for (i, &p) in perm.iter().enumerate() {
                    old[p] = new[i];
                }
                self.letters[self.tuple_index(&old)].clone()
            })
            .collect();
        Self::new(senders, self.output.clone(), letters, self.receivers.clone())
    }

    /// Letter states restricted to receiver `j`.
    pub fn receiver_letters(&self, j: usize) -> Result<Vec<DensityState>> {
        let iota = self.receiver(j)?;
        self.letters.iter().map(|w| restrict(w, iota)).collect()
    }

    fn receiver(&self, j: usize) -> Result<&SubalgebraEmbedding> {
        self.receivers
            .get(j)
            .ok_or_else(|| Error::OutOfRange(format!("receiver {j} of {}", self.receivers.len())))
    }

    /// `γ = Σ_x P(x) [x_1] ⊗ ⋯ ⊗ [x_s] ⊗ W_x` with the receivers embedded in the output factor.
    pub fn channel_state(&self, p: &InputDistribution) -> Result<ChannelState> {
        let joint = p.joint(&self.alphabet_sizes())?;
        let mut algebras = self
            .senders
            .iter()
            .map(|a| BlockAlgebra::commutative(a.len()))
            .collect::<Result<Vec<_>>>()?;
        let units: Vec<Vec<AlgebraElement>> =
            algebras.iter().map(|a| (0..a.num_blocks()).map(|x| a.block_unit(x)).collect()).collect();
        algebras.push(self.output.clone());
        let terms: Vec<(f64, Vec<&AlgebraElement>)> = joint
            .iter()
            .enumerate()
            .map(|(k, &pk)| {
                let x = self.tuple(k);
                let mut parts: Vec<&AlgebraElement> = x.iter().enumerate().map(|(i, &xi)| &units[i][xi]).collect();
                parts.push(self.letters[k].as_element());
                (pk, parts)
            })
            .collect();
        let mut gamma = ChannelState::from_terms(algebras, &terms)?;
        let y = gamma.factors.last().expect("output factor").clone();
        gamma.receivers = self.receivers.iter().map(|r| y.compose(r)).collect::<Result<_>>()?;
        Ok(gamma)
    }

    /// The cq ensemble `Σ_x P(x) [x] ⊗ ι_{j*} W_x` with the input tuple as classical register.
    pub fn ensemble(&self, joint: &[f64], j: usize) -> Result<CqEnsemble> {
        check_distribution(joint, self.num_inputs(), "joint input distribution")?;
        CqEnsemble::new(self.receiver_letters(j)?, self.ensemble_entries(joint))
    }

    fn ensemble_entries(&self, joint: &[f64]) -> Vec<(f64, Vec<usize>, usize)> {
        joint.iter().enumerate().map(|(k, &p)| (p, self.tuple(k), k)).collect()
    }

    /// Constraint table of one input distribution, from cq ensembles.
    pub fn constraint_table(&self, p: &InputDistribution) -> Result<Vec<Constraint>> {
        let joint = p.joint(&self.alphabet_sizes())?;
        let ensembles = (0..self.num_receivers())
            .map(|j| self.ensemble(&joint, j))
            .collect::<Result<Vec<_>>>()?;
        table_from_ensembles(self.num_senders(), &ensembles)
    }
}

fn table_from_ensembles(s: usize, ensembles: &[CqEnsemble]) -> Result<Vec<Constraint>> {
    let mut out = Vec::new();
    for set in nonempty_subsets(s) {
        let rest = complement(&set, s);
        for (j, e) in ensembles.iter().enumerate() {
            out.push(Constraint {
                senders: set.clone(),
                receiver: j,
                bits: e.cond_mutual_info(&set, &rest)?,
            });
        }
    }
    Ok(out)
}

/// Input distribution of the senders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InputDistribution {
    /// Independent inputs `P_1 × ⋯ × P_s`.
    Product { marginals: Vec<Vec<f64>> },
    /// A distribution on the product alphabet, row-major.
    Joint { probabilities: Vec<f64> },
}

impl InputDistribution {
    pub fn uniform(sizes: &[usize]) -> Self {
        Self::Product {
            marginals: sizes.iter().map(|&n| vec![1.0 / n as f64; n]).collect(),
        }
    }

    /// The distribution on the product alphabet, row-major.
    pub fn joint(&self, sizes: &[usize]) -> Result<Vec<f64>> {
        match self {
            Self::Product { marginals } => {
                if marginals.len() != sizes.len() {
                    return Err(Error::InvalidDistribution(format!(
                        "{} marginals for {} senders",
                        marginals.len(),
                        sizes.len()
                    )));
                }
                let mut joint = vec![1.0];
                for (m, &n) in marginals.iter().zip(sizes) {
                    check_distribution(m, n, "sender marginal")?;
                    joint = joint.iter().flat_map(|&a| m.iter().map(move |&b| a * b)).collect();
                }
                Ok(joint)
            }
            Self::Joint { probabilities } => {
                check_distribution(probabilities, sizes.iter().product(), "joint input distribution")?;
                Ok(probabilities.clone())
            }
        }
    }
}

/// `I(𝒳(J) ∧ 𝒴_j | 𝒳(J^c))` on a multiway channel state, with `𝒳(J)` the
/// generated product of the selected sender factors.
pub fn conditional_mi_constraint(gamma: &ChannelState, senders: &[usize], receiver: usize) -> Result<f64> {
    if gamma.receivers.is_empty() {
        return Err(Error::Precondition("not a multiway channel state".into()));
    }
    let s = gamma.factors.len() - 1;
    let mut seen = BTreeSet::new();
    for &i in senders {
        if i >= s || !seen.insert(i) {
            return Err(Error::OutOfRange(format!("sender {i} (of {s}) in {senders:?}")));
        }
    }
    let y = gamma
        .receivers
        .get(receiver)
        .ok_or_else(|| Error::OutOfRange(format!("receiver {receiver} of {}", gamma.receivers.len())))?;
    if senders.is_empty() {
        return Ok(0.0);
    }
    let parent = gamma.state.algebra();
    let pick = |set: &[usize]| {
        let parts: Vec<&SubalgebraEmbedding> = set.iter().map(|&i| &gamma.factors[i]).collect();
        generated_product_many(parent, &parts)
    };
    let xj = pick(senders)?;
    let xjc = pick(&complement(senders, s))?;
    cond_mutual_info_alg(&xj, y, &xjc, &gamma.state)
}

/// One bound `Σ_{i∈J} R_i ≤ bits` for receiver `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub senders: Vec<usize>,
    pub receiver: usize,
    pub bits: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    Product,
    Joint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub mode: SamplerMode,
    pub num_samples: usize,
    /// Samples kept per constraint when forming mixtures.
    pub mixture_size: usize,
    pub seed: u64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            mode: SamplerMode::Product,
            num_samples: 256,
            mixture_size: 3,
            seed: 0,
        }
    }
}

/// Input distributions with mixing weights `q_u` and the mixed constraint table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRegionSample {
    pub distributions: Vec<InputDistribution>,
    pub weights: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

/// `max {λ·R : R in the region of some mixture}` for a direction `λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportEstimate {
    pub direction: Vec<f64>,
    pub value: f64,
    /// Index into [`RateRegion::mixtures`] of the maximizing mixture.
    pub mixture: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub config: RegionConfig,
    pub samples: Vec<RateRegionSample>,
    pub mixtures: Vec<RateRegionSample>,
    /// Per `(J, j)`, the largest bound over all samples.
    pub max_bounds: Vec<Constraint>,
    pub support: Vec<SupportEstimate>,
}

impl RateRegion {
    pub fn max_bound(&self, senders: &[usize], receiver: usize) -> Option<f64> {
        self.max_bounds
            .iter()
            .find(|c| c.senders == senders && c.receiver == receiver)
            .map(|c| c.bits)
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} samples ({:?} mode, seed {}), {} mixtures\n",
            self.samples.len(),
            self.config.mode,
            self.config.seed,
            self.mixtures.len()
        );
        for c in &self.max_bounds {
            let names: Vec<String> = c.senders.iter().map(|i| format!("R{}", i + 1)).collect();
            out.push_str(&format!("  {} <= {:.6}  (receiver {})\n", names.join(" + "), c.bits, c.receiver + 1));
        }
        for s in &self.support {
            out.push_str(&format!("  support {:?}: {:.6}\n", s.direction, s.value));
        }
        out
    }
}

fn draw_distribution<R: Rng + ?Sized>(n: usize, sharp: bool, rng: &mut R) -> Vec<f64> {
    // Cubing exponential weights pushes mass towards the faces of the simplex.
    let w: Vec<f64> = (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            if sharp {
                e.powi(3)
            } else {
                e
            }
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn draw_input(mode: SamplerMode, sizes: &[usize], index: usize, seed: u64) -> InputDistribution {
    if index == 0 {
        return match mode {
            SamplerMode::Product => InputDistribution::uniform(sizes),
            SamplerMode::Joint => {
                let n: usize = sizes.iter().product();
                InputDistribution::Joint {
                    probabilities: vec![1.0 / n as f64; n],
                }
            }
        };
    }
    let mut rng = stream(seed, index as u64);
    let sharp = index.is_multiple_of(2);
    match mode {
        SamplerMode::Product => InputDistribution::Product {
            marginals: sizes.iter().map(|&n| draw_distribution(n, sharp, &mut rng)).collect(),
        },
        SamplerMode::Joint => InputDistribution::Joint {
            probabilities: draw_distribution(sizes.iter().product(), sharp, &mut rng),
        },
    }
}

/// Samples input distributions, evaluates the constraint table of each, and
/// summarizes the union of the constraint polytopes over convex mixtures.
///
/// Sample 0 is the uniform distribution; sample `k` draws from the ChaCha stream
/// `k` of the seed, so the output does not depend on the thread count. Mixtures
/// are searched over the `mixture_size` best samples of every constraint, by one
/// linear program per direction `1_J`.
pub fn outer_bound_region(mc: &MultiwayChannel, config: &RegionConfig) -> Result<RateRegion> {
    mc.check_budget()?;
    if config.num_samples == 0 || config.num_samples > MAX_SAMPLES {
        return Err(Error::Budget(format!("num_samples must lie in 1..={MAX_SAMPLES}")));
    }
    if config.mixture_size == 0 {
        return Err(Error::OutOfRange("mixture_size must be positive".into()));
    }
    let sizes = mc.alphabet_sizes();
    let s = mc.num_senders();
    let base = (0..mc.num_receivers())
        .map(|j| {
            let uniform = vec![1.0 / mc.num_inputs() as f64; mc.num_inputs()];
            mc.ensemble(&uniform, j)
        })
        .collect::<Result<Vec<_>>>()?;

    let samples: Vec<RateRegionSample> = (0..config.num_samples)
        .into_par_iter()
        .map(|k| {
            let dist = draw_input(config.mode, &sizes, k, config.seed);
            let joint = dist.joint(&sizes)?;
            let entries = mc.ensemble_entries(&joint);
            let ensembles = base
                .iter()
                .map(|e| e.reweighted(entries.clone()))
                .collect::<Result<Vec<_>>>()?;
            Ok(RateRegionSample {
                distributions: vec![dist],
                weights: vec![1.0],
                constraints: table_from_ensembles(s, &ensembles)?,
            })
        })
        .collect::<Result<_>>()?;

    let num_keys = samples[0].constraints.len();
    let max_bounds: Vec<Constraint> = (0..num_keys)
        .map(|key| {
            let best = samples.iter().map(|x| x.constraints[key].bits).fold(f64::NEG_INFINITY, f64::max);
            Constraint {
                bits: best,
                ..samples[0].constraints[key].clone()
            }
        })
        .collect();

    let mut pool: Vec<usize> = Vec::new();
    for key in 0..num_keys {
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.sort_by(|&a, &b| {
            samples[b].constraints[key]
                .bits
                .total_cmp(&samples[a].constraints[key].bits)
                .then(a.cmp(&b))
        });
        for &k in order.iter().take(config.mixture_size) {
            if !pool.contains(&k) {
                pool.push(k);
            }
        }
    }

    let mut mixtures: Vec<RateRegionSample> = Vec::new();
    let mut support = Vec::new();
    for set in nonempty_subsets(s) {
        let direction: Vec<f64> = (0..s).map(|i| if set.contains(&i) { 1.0 } else { 0.0 }).collect();
        let (value, q) = support_lp(&direction, &pool, &samples)?;
        let mixture = mixture_from(&pool, &q, &samples);
        let index = match mixtures.iter().position(|m| m.distributions == mixture.distributions && m.weights == mixture.weights) {
            Some(i) => i,
            None => {
                mixtures.push(mixture);
                mixtures.len() - 1
            }
        };
        support.push(SupportEstimate {
            direction,
            value,
            mixture: index,
        });
    }

    Ok(RateRegion {
        config: config.clone(),
        samples,
        mixtures,
        max_bounds,
        support,
    })
}

/// `max λ·R` over `R ≥ 0`, `q` in the simplex, `Σ_{i∈J} R_i ≤ Σ_u q_u c_u(J, j)` for all constraints.
fn support_lp(direction: &[f64], pool: &[usize], samples: &[RateRegionSample]) -> Result<(f64, Vec<f64>)> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let rates: Vec<_> = direction.iter().map(|&l| lp.add_var(l, (0.0, f64::INFINITY))).collect();
    let weights: Vec<_> = pool.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    lp.add_constraint(weights.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    for (key, c) in samples[0].constraints.iter().enumerate() {
        let terms: Vec<_> = c
            .senders
            .iter()
            .map(|&i| (rates[i], 1.0))
            .chain(pool.iter().zip(&weights).map(|(&u, &v)| (v, -samples[u].constraints[key].bits)))
            .collect();
        lp.add_constraint(terms, ComparisonOp::Le, 0.0);
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::Precondition(format!("support linear program: {e}")))?
        .into_solution()
        .map_err(|_| Error::Precondition("support linear program interrupted".into()))?;
    let q = weights.iter().map(|&v| solution.var_value(v).max(0.0)).collect();
    Ok((solution.objective(), q))
}

fn mixture_from(pool: &[usize], q: &[f64], samples: &[RateRegionSample]) -> RateRegionSample {
    let kept: Vec<(usize, f64)> = pool.iter().copied().zip(q.iter().copied()).filter(|&(_, w)| w > 1e-12).collect();
    let total: f64 = kept.iter().map(|&(_, w)| w).sum();
    let constraints = samples[0]
        .constraints
        .iter()
        .enumerate()
        .map(|(key, c)| Constraint {
            bits: kept.iter().map(|&(u, w)| w / total * samples[u].constraints[key].bits).sum(),
            ..c.clone()
        })
        .collect();
    RateRegionSample {
        distributions: kept.iter().map(|&(u, _)| samples[u].distributions[0].clone()).collect(),
        weights: kept.iter().map(|&(_, w)| w / total).collect(),
        constraints,
    }
}

/// Encoders `f_i: 𝓜_i → 𝒳_i^n` and decoder POVMs on `𝒴_j^{⊗n}`.
///
/// Outcome `k` of every decoder is the message tuple with row-major index `k`
/// (sender 0 slowest); further outcomes count as errors.
#[derive(Clone, Debug)]
pub struct MultiwayCode {
    pub block_length: usize,
    /// `encoders[i][m]` is the codeword of message `m` of sender `i`, as letter indices.
    pub encoders: Vec<Vec<Vec<usize>>>,
    pub decoders: Vec<Povm>,
}

impl MultiwayCode {
    pub fn message_counts(&self) -> Vec<usize> {
        self.encoders.iter().map(Vec::len).collect()
    }

    pub fn num_messages(&self) -> usize {
        self.message_counts().iter().product()
    }

    fn message_tuple(&self, mut k: usize) -> Vec<usize> {
        let counts = self.message_counts();
        let mut m = vec![0; counts.len()];
        for i in (0..counts.len()).rev() {
            m[i] = k % counts[i];
            k /= counts[i];
        }
        m
    }

    /// Input tuple at position `u` of the codeword of message tuple `m`.
    fn letter_at(&self, mc: &MultiwayChannel, m: &[usize], u: usize) -> usize {
        let x: Vec<usize> = m.iter().enumerate().map(|(i, &mi)| self.encoders[i][mi][u]).collect();
        mc.tuple_index(&x)
    }

    /// The algebra `𝒴_j^{⊗n}` of decoder `j`.
    pub fn decoder_algebra(mc: &MultiwayChannel, j: usize, n: usize) -> Result<TensorProduct> {
        let dom = mc.receiver(j)?.domain().clone();
        let dim = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(dom.rep_dim()));
        match dim {
            Some(d) if d <= MAX_TENSOR_DIM => TensorProduct::new(vec![dom; n]),
            _ => Err(Error::Budget(format!(
                "receiver {} tensor power of dimension {}^{n} exceeds the limit {MAX_TENSOR_DIM}",
                j + 1,
                dom.rep_dim()
            ))),
        }
    }

    pub fn validate(&self, mc: &MultiwayChannel) -> Result<()> {
        let n = self.block_length;
        if n == 0 {
            return Err(Error::OutOfRange("block length must be positive".into()));
        }
        if self.encoders.len() != mc.num_senders() {
            return Err(Error::ShapeMismatch(format!(
                "{} encoders for {} senders",
                self.encoders.len(),
                mc.num_senders()
            )));
        }
        for (i, (enc, alphabet)) in self.encoders.iter().zip(mc.senders()).enumerate() {
            if enc.is_empty() {
                return Err(Error::EmptyLabelSet);
            }
            for word in enc {
                if word.len() != n {
                    return Err(Error::ShapeMismatch(format!("sender {} codeword of length {}", i + 1, word.len())));
                }
                if let Some(x) = word.iter().find(|&&x| x >= alphabet.len()) {
                    return Err(Error::OutOfRange(format!("letter {x} for sender {}", i + 1)));
                }
            }
        }
        let messages = self
            .message_counts()
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .filter(|&m| m <= MAX_MESSAGES)
            .ok_or_else(|| Error::Budget(format!("more than {MAX_MESSAGES} message tuples")))?;
        if self.decoders.len() != mc.num_receivers() {
            return Err(Error::ShapeMismatch(format!(
                "{} decoders for {} receivers",
                self.decoders.len(),
                mc.num_receivers()
            )));
        }
        for (j, d) in self.decoders.iter().enumerate() {
            let t = Self::decoder_algebra(mc, j, n)?;
            t.algebra().expect_same(d.algebra())?;
            if d.len() < messages {
                return Err(Error::ShapeMismatch(format!(
                    "decoder {} has {} outcomes for {messages} message tuples",
                    j + 1,
                    d.len()
                )));
            }
        }
        Ok(())
    }

    /// Output states `⊗_u ι_{j*} W_{x_u(m)}` per message tuple, deduplicated by codeword.
    fn codeword_states(&self, mc: &MultiwayChannel, j: usize) -> Result<(Vec<DensityState>, Vec<usize>)> {
        let letters = mc.receiver_letters(j)?;
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut states = Vec::new();
        let mut of_message = Vec::with_capacity(self.num_messages());
        for k in 0..self.num_messages() {
            let m = self.message_tuple(k);
            let word: Vec<usize> = (0..self.block_length).map(|u| self.letter_at(mc, &m, u)).collect();
            let next = states.len();
            let id = *index.entry(word.clone()).or_insert(next);
            if id == next {
                let parts: Vec<&DensityState> = word.iter().map(|&x| &letters[x]).collect();
                states.push(product_state(&parts)?.1);
            }
            of_message.push(id);
        }
        Ok((states, of_message))
    }
}

/// `ē_j = 1 - (1/|𝓜|) Σ_m Tr(W^{⊗n}(f(m)) Y_{j,m})` for every receiver.
pub fn code_error_probabilities(mc: &MultiwayChannel, code: &MultiwayCode) -> Result<Vec<f64>> {
    code.validate(mc)?;
    let total = code.num_messages();
    (0..mc.num_receivers())
        .map(|j| {
            let (states, of_message) = code.codeword_states(mc, j)?;
            let effects = code.decoders[j].effects();
            let success: f64 = (0..total)
                .map(|k| states[of_message[k]].as_element().trace_product(&effects[k]).re)
                .sum();
            Ok(1.0 - success / total as f64)
        })
        .collect()
}

/// One `(J, j)` instance of the converse chain
/// `(1-ē_j) R(J) ≤ 1/n + I(M_J ∧ 𝒴_j^n M_{J^c})/n ≤ 1/n + I(X^n_J ∧ 𝒴_j^n X^n_{J^c})/n ≤ 1/n + Σ_u I_{γ_u}/n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConverseEntry {
    pub senders: Vec<usize>,
    pub receiver: usize,
    pub error: f64,
    /// `R(J) = Σ_{i∈J} log|𝓜_i| / n`.
    pub rate: f64,
    /// `(1-ē_j) R(J)`.
    pub fano: f64,
    pub message_information: f64,
    pub codeword_information: f64,
    pub single_letter: f64,
    pub verdicts: Vec<InequalityVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConverseReport {
    pub block_length: usize,
    pub errors: Vec<f64>,
    pub entries: Vec<ConverseEntry>,
}

impl ConverseReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.verdicts.iter().all(|v| v.pass))
    }

    pub fn verdicts(&self) -> impl Iterator<Item = &InequalityVerdict> {
        self.entries.iter().flat_map(|e| &e.verdicts)
    }
}

fn code_digest(mc: &MultiwayChannel, code: &MultiwayCode) -> InputDigest {
    let mut d = mc.letters.iter().fold(InputDigest::new("converse"), |d, s| d.state(s));
    for r in &mc.receivers {
        d = d.embedding(r);
    }
    for word in code.encoders.iter().flatten() {
        d = word.iter().fold(d, |d, &x| d.usize(x));
    }
    for dec in &code.decoders {
        d = dec.effects().iter().fold(d, |d, e| d.element(e));
    }
    d
}

/// Evaluates the Fano-based converse chain on the channel state induced by the
/// uniform distribution on message tuples.
pub fn converse_check(mc: &MultiwayChannel, code: &MultiwayCode) -> Result<ConverseReport> {
    let errors = code_error_probabilities(mc, code)?;
    let n = code.block_length;
    let nf = n as f64;
    let s = mc.num_senders();
    let total = code.num_messages();
    let w = 1.0 / total as f64;
    let counts = code.message_counts();
    let digest = code_digest(mc, code);

    // Codeword ids per sender: the first message with the same codeword.
    let word_id: Vec<Vec<usize>> = code
        .encoders
        .iter()
        .map(|enc| enc.iter().map(|word| enc.iter().position(|v| v == word).expect("present")).collect())
        .collect();
    let messages: Vec<Vec<usize>> = (0..total).map(|k| code.message_tuple(k)).collect();

    let mut entries = Vec::new();
    for j in 0..mc.num_receivers() {
        let (states, of_message) = code.codeword_states(mc, j)?;
        // Coordinates: messages 0..s, codeword ids s..2s.
        let block = CqEnsemble::new(
            states,
            messages
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    let coords = m.iter().copied().chain(m.iter().enumerate().map(|(i, &mi)| word_id[i][mi])).collect();
                    (w, coords, of_message[k])
                })
                .collect(),
        )?;
        let letters = mc.ensemble(&vec![1.0 / mc.num_inputs() as f64; mc.num_inputs()], j)?;
        let per_letter = (0..n)
            .map(|u| {
                letters.reweighted(
                    messages
                        .iter()
                        .map(|m| {
                            let x = code.letter_at(mc, m, u);
                            (w, mc.tuple(x), x)
                        })
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;

        for set in nonempty_subsets(s) {
            let rest = complement(&set, s);
            let shift = |v: &[usize]| -> Vec<usize> { v.iter().map(|&i| i + s).collect() };
            let rate: f64 = set.iter().map(|&i| (counts[i] as f64).log2()).sum::<f64>() / nf;
            let fano = (1.0 - errors[j]) * rate;
            let l1 = 1.0 / nf + block.mutual_info_with(&set, &rest)? / nf;
            let l2 = 1.0 / nf + block.mutual_info_with(&shift(&set), &shift(&rest))? / nf;
            let l3 = 1.0 / nf
                + per_letter
                    .iter()
                    .map(|e| e.mutual_info_with(&set, &rest))
                    .sum::<Result<f64>>()?
                    / nf;
            let d = digest.clone().usize(j).floats(&set.iter().map(|&i| i as f64).collect::<Vec<_>>());
            entries.push(ConverseEntry {
                senders: set,
                receiver: j,
                error: errors[j],
                rate,
                fano,
                message_information: l1,
                codeword_information: l2,
                single_letter: l3,
                verdicts: vec![
                    InequalityVerdict::le("converse_fano", fano, l1, d.clone()),
                    InequalityVerdict::le("converse_encoding", l1, l2, d.clone()),
                    InequalityVerdict::le("converse_single_letter", l2, l3, d),
                ],
            });
        }
    }
    Ok(ConverseReport {
        block_length: n,
        errors,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adder() -> MultiwayChannel {
        let kernel = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        MultiwayChannel::classical(&[2, 2], &kernel).unwrap()
    }

    #[test]
    fn adder_sum_rate() {
        let mc = adder();
        let p = InputDistribution::uniform(&[2, 2]);
        let gamma = mc.channel_state(&p).unwrap();
        let sum = conditional_mi_constraint(&gamma, &[0, 1], 0).unwrap();
        assert!((sum - 1.5).abs() < 1e-9);
        assert!((conditional_mi_constraint(&gamma, &[0], 0).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(conditional_mi_constraint(&gamma, &[], 0).unwrap(), 0.0);
        let table = mc.constraint_table(&p).unwrap();
        let fast = table.iter().find(|c| c.senders == vec![0, 1]).unwrap().bits;
        assert!((fast - sum).abs() < 1e-10);
    }

    #[test]
    fn region_contains_uniform_sum_rate() {
        let mc = adder();
        let cfg = RegionConfig {
            num_samples: 16,
            ..Default::default()
        };
        let r = outer_bound_region(&mc, &cfg).unwrap();
        assert!(r.max_bound(&[0, 1], 0).unwrap() >= 1.5 - 1e-9);
        let sum_support = r.support.iter().find(|s| s.direction == vec![1.0, 1.0]).unwrap();
        assert!(sum_support.value >= 1.5 - 1e-9);
        assert_eq!(r, outer_bound_region(&mc, &cfg).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let out = BlockAlgebra::commutative(2).unwrap();
        let letters = vec![DensityState::maximally_mixed(&out); 9];
        let mc = MultiwayChannel::new(
            vec![Label::range(9)],
            out.clone(),
            letters,
            vec![SubalgebraEmbedding::identity(&out)],
        )
        .unwrap();
        assert!(matches!(outer_bound_region(&mc, &RegionConfig::default()), Err(Error::Budget(_))));
    }

    #[test]
    fn perfect_code_has_no_error() {
        let mc = adder();
        let out = mc.output().clone();
        // Decode (m1, m2) from the sum is impossible for (0,1) vs (1,0); use one sender only.
        let code = MultiwayCode {
            block_length: 1,
            encoders: vec![vec![vec![0], vec![1]], vec![vec![0]]],
            decoders: vec![Povm::new(
                out.clone(),
                Label::range(2),
                vec![
                    out.block_unit(0),
                    out.block_unit(1).add(&out.block_unit(2)).unwrap(),
                ],
            )
            .unwrap()],
        };
        let e = code_error_probabilities(&mc, &code).unwrap();
        assert!(e[0].abs() < 1e-12);
        let report = converse_check(&mc, &code).unwrap();
        assert!(report.all_pass());
    }
}
