//! Seeded random instances for every inequality checker, and equality fixtures.
//!
//! Instance `i` of theorem `t` draws from its own ChaCha stream, so a suite is
//! reproducible from its seed whatever the thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{check_compatible, AlgebraElement, BlockAlgebra, Label, SubalgebraEmbedding, TensorProduct};
use crate::channels::ChannelState;
use crate::document::bits_serde;
use crate::inequalities::*;
use crate::linalg::{self, c, Mat};
use crate::observable::{as_operation, Povm};
use crate::operation::{Composed, KrausMap, Operation};
use crate::random::{self, Rng64};
use crate::state::{diagonalize, product_state, DensityState};
use crate::{tol, Error, Result};

/// Per-theorem statistics of a verdict stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub theorem: String,
    pub instances: usize,
    pub verdicts: usize,
    pub passed: usize,
    pub failures: usize,
    pub hypothesis_not_met: usize,
    pub precondition_violated: usize,
    /// Smallest slack among in-scope verdicts.
    #[serde(with = "bits_serde")]
    pub min_slack_bits: f64,
    pub conjecture: bool,
}

impl FuzzSummary {
    pub fn from_verdicts(theorem: &str, instances: usize, verdicts: &[InequalityVerdict]) -> Self {
        let count = |s: VerdictStatus| verdicts.iter().filter(|v| v.status == s).count();
        let min_slack_bits = verdicts
            .iter()
            .filter(|v| matches!(v.status, VerdictStatus::Pass | VerdictStatus::Fail))
            .map(|v| v.slack_bits)
            .fold(f64::INFINITY, f64::min);
        Self {
            theorem: theorem.to_string(),
            instances,
            verdicts: verdicts.len(),
            passed: count(VerdictStatus::Pass),
            failures: count(VerdictStatus::Fail),
            hypothesis_not_met: count(VerdictStatus::HypothesisNotMet),
            precondition_violated: count(VerdictStatus::PreconditionViolated),
            min_slack_bits,
            conjecture: verdicts.iter().any(|v| v.is_conjecture()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FuzzRun {
    pub summary: FuzzSummary,
    pub verdicts: Vec<InequalityVerdict>,
}

fn theorem_index(theorem: &str) -> Result<usize> {
    THEOREMS.iter().position(|&t| t == theorem).ok_or_else(|| {
        Error::OutOfRange(format!("unknown theorem '{theorem}'; registered: {}", THEOREMS.join(", ")))
    })
}

/// Runs `instances` random instances of a registered theorem.
pub fn run_fuzz(theorem: &str, instances: usize, seed: u64) -> Result<FuzzRun> {
    let t = theorem_index(theorem)?;
    let per_instance: Vec<Vec<InequalityVerdict>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = random::stream(seed, ((t as u64) << 40) | i as u64);
            instance(theorem, &mut rng).map_err(|e| Error::Precondition(format!("{theorem} instance {i}: {e}")))
        })
        .collect::<Result<_>>()?;
    let verdicts: Vec<InequalityVerdict> = per_instance.into_iter().flatten().collect();
    Ok(FuzzRun {
        summary: FuzzSummary::from_verdicts(theorem, instances, &verdicts),
        verdicts,
    })
}

/// One random instance of `theorem`.
pub fn instance(theorem: &str, rng: &mut Rng64) -> Result<Vec<InequalityVerdict>> {
    match theorem {
        "klein" => {
            let alg = random::block_algebra(2, 4, rng);
            let (a, b) = match rng.random_range(0..3) {
                0 => (random::state(&alg, rng).into_element(), random::state(&alg, rng).into_element()),
                1 => (random::contraction(&alg, rng), random::contraction(&alg, rng)),
                _ => {
                    let s = random::state(&alg, rng).into_element();
                    (s.clone(), s)
                }
            };
            check_klein(&a, &b)
        }
        "monotonicity" => {
            let target = random::block_algebra(2, 3, rng);
            let rho = random::state(&target, rng);
            let sigma = if rng.random_bool(0.2) && target.num_blocks() == 1 {
                random::state_with_rank(target.rep_dim(), rng.random_range(1..=target.rep_dim()), rng)
            } else {
                random::state(&target, rng)
            };
            let v = if rng.random_bool(0.25) {
                check_monotonicity(&rho, &sigma, &random::maximal_commutative(&target, rng))?
            } else {
                let source = random::block_algebra(2, 3, rng);
                check_monotonicity(&rho, &sigma, &unital_map(&source, &target, rng)?)?
            };
            Ok(vec![v])
        }
        "subadditivity" => {
            let pair = random::compatible_pair(rng);
            let rho = random::state(pair.left().parent(), rng);
            Ok(vec![check_subadditivity(pair.left(), pair.right(), &rho)?])
        }
        "ssa" => {
            let (tensor, mut factors) = rotated_factors(&small_dims(3, rng), rng)?;
            if rng.random_bool(0.3) {
                let dom = factors[1].domain().clone();
                let basis = random::block_basis(&dom, rng);
                let groups = random::partition(dom.rep_dim(), rng.random_range(1..=dom.rep_dim()), rng);
                let sub = random::commutative_from_basis(&dom, &basis, &groups)?;
                factors[1] = factors[1].compose(&sub)?;
            }
            let rho = random::state(tensor.algebra(), rng);
            Ok(vec![check_strong_subadditivity(&factors[0], &factors[1], &factors[2], &rho)?])
        }
        "pure_common_state" => {
            let tripartite = rng.random_bool(0.3);
            let dims = small_dims(if tripartite { 3 } else { 2 }, rng);
            let tensor = TensorProduct::new(dims.iter().map(|&d| BlockAlgebra::full(d)).collect())?;
            let (_, rest) = tensor.subsystem_embedding(&(1..dims.len()).collect::<Vec<_>>())?;
            let x = tensor.factor_embedding(0)?;
            let u = random::haar_unitary(tensor.algebra().rep_dim(), rng);
            let x = random::conjugate_embedding(&x, &u)?;
            let y = random::conjugate_embedding(&rest, &u)?;
            let pair = check_compatible(&x, &y, tol::COMMUTATOR)?.into_pair(tol::COMMUTATOR)?;
            let rho = random::pure_state(tensor.algebra(), rng);
            Ok(vec![check_pure_common_state(&pair, &rho)?])
        }
        "entropy_increase" => entropy_increase_instance(rng),
        "triangle" => {
            let pair = random::compatible_pair(rng);
            let rho = state_or_pure(pair.left().parent(), rng);
            Ok(vec![check_triangle(&pair, &rho)?])
        }
        "holevo_chain" => {
            let pair = random::compatible_pair(rng);
            let rho = random::state(pair.left().parent(), rng);
            let x = random::povm(pair.left().domain(), rng.random_range(1..=4), rng);
            let y = random::povm(pair.right().domain(), rng.random_range(1..=4), rng);
            check_holevo_chain(&x, &y, &pair, &rho)
        }
        "data_processing" => {
            let pair = random::compatible_pair(rng);
            let rho = random::state(pair.left().parent(), rng);
            let z1 = random::block_algebra(2, 3, rng);
            let z2 = random::block_algebra(2, 3, rng);
            let phi1 = unital_map(&z1, pair.left().domain(), rng)?;
            let phi2 = unital_map(&z2, pair.right().domain(), rng)?;
            Ok(vec![check_data_processing(&phi1, &phi2, pair.left(), pair.right(), &rho)?])
        }
        "info_subadditivity" => {
            let (gamma, n) = (memoryless_state(2, rng)?, 2);
            Ok(vec![check_info_subadditivity(
                &gamma.factors[0],
                &gamma.factors[1],
                &gamma.factors[n],
                &gamma.factors[n + 1],
                &gamma.state,
            )?])
        }
        "info_subadditivity_n" => {
            let n = 3;
            let gamma = memoryless_state(n, rng)?;
            let xs: Vec<&SubalgebraEmbedding> = gamma.factors[..n].iter().collect();
            let ys: Vec<&SubalgebraEmbedding> = gamma.factors[n..].iter().collect();
            let mut v = check_info_subadditivity_n(&xs, &ys, &gamma.state)?;
            v.name = "info_subadditivity_n".into();
            Ok(vec![v])
        }
        "info_upper_bound" => {
            let pair = random::compatible_pair(rng);
            let rho = state_or_pure(pair.left().parent(), rng);
            Ok(vec![check_info_upper_bound(&pair, &rho)?])
        }
        "conditional_entropy_nonneg" => {
            let (tensor, factors) = rotated_factors(&small_dims(2, rng), rng)?;
            let rho = state_or_pure(tensor.algebra(), rng);
            let v = if rng.random_bool(0.5) {
                let x = factors[0].compose(&random::maximal_commutative(factors[0].domain(), rng))?;
                check_conditional_entropy_nonneg(&x, &factors[1], &rho)?
            } else {
                let y = random::povm(factors[1].domain(), rng.random_range(1..=4), rng);
                let yo = as_operation(&y);
                let psi = Composed::new(&factors[1], &yo)?;
                check_conditional_entropy_nonneg(&factors[0], &psi, &rho)?
            };
            Ok(vec![v])
        }
        "separability_conjecture" => {
            let dims = [rng.random_range(2..=3), rng.random_range(2..=3)];
            let terms = rng.random_range(1..=4);
            let sep = random::separable(&dims, terms, rng);
            probe_separability_conjecture(&sep, &[0], &[1])
        }
        "knowledge_decreases" => {
            let pair = random::compatible_pair(rng);
            let rho = random::state(pair.left().parent(), rng);
            if rng.random_bool(0.3) {
                let coarse = random::maximal_commutative(pair.right().domain(), rng);
                check_knowledge_decreases(pair.left(), pair.right(), &coarse, &rho)
            } else {
                let z = random::block_algebra(2, 3, rng);
                let phi_prime = unital_map(&z, pair.right().domain(), rng)?;
                check_knowledge_decreases(pair.left(), pair.right(), &phi_prime, &rho)
            }
        }
        "fano" => {
            let pair = random::compatible_pair(rng);
            let rho = random::state(pair.left().parent(), rng);
            let k = rng.random_range(2..=4);
            let local = random::povm(pair.left().domain(), k, rng);
            let effects = local.effects().iter().map(|e| pair.left().map(e)).collect::<Result<Vec<_>>>()?;
            let x = Povm::new(rho.algebra().clone(), Label::range(k), effects)?;
            let y = random::povm(pair.right().domain(), k, rng);
            Ok(vec![check_fano(&x, pair.right(), &y, &rho)?])
        }
        "fano_corollary" => {
            let pair = random::compatible_pair(rng);
            let rho = random::state(pair.left().parent(), rng);
            let dom = pair.left().domain().clone();
            let basis = random::block_basis(&dom, rng);
            let groups = random::partition(dom.rep_dim(), rng.random_range(1..=dom.rep_dim()), rng);
            let x_alg = pair.left().compose(&random::commutative_from_basis(&dom, &basis, &groups)?)?;
            let k = x_alg.domain().num_blocks();
            let y = random::povm(pair.right().domain(), k, rng);
            Ok(vec![check_fano_corollary(&x_alg, pair.right(), &y, &rho)?])
        }
        other => Err(theorem_index(other).err().unwrap_or_else(|| {
            Error::Precondition(format!("no instance generator for '{other}'"))
        })),
    }
}

/// Dimensions in `1..=4`, at least one of them above 1, with product at most 18.
fn small_dims(n: usize, rng: &mut Rng64) -> Vec<usize> {
    loop {
        let d: Vec<usize> = (0..n).map(|_| rng.random_range(1..=4)).collect();
        let p: usize = d.iter().product();
        if p <= 18 && p > 1 {
            return d;
        }
    }
}

fn state_or_pure(alg: &BlockAlgebra, rng: &mut Rng64) -> DensityState {
    if rng.random_bool(0.25) {
        random::pure_state(alg, rng)
    } else {
        random::state(alg, rng)
    }
}

/// Random unital map `source → target`.
fn unital_map(source: &BlockAlgebra, target: &BlockAlgebra, rng: &mut Rng64) -> Result<KrausMap> {
    let widest = target.block_dims().iter().copied().max().unwrap_or(1);
    let rank = widest.div_ceil(source.rep_dim()) + rng.random_range(0..2);
    KrausMap::random_cptp_blocks(source, target, rank, rng)
}

/// Tensor factors of full matrix algebras, rotated by one Haar unitary of the product.
fn rotated_factors(dims: &[usize], rng: &mut Rng64) -> Result<(TensorProduct, Vec<SubalgebraEmbedding>)> {
    let tensor = TensorProduct::new(dims.iter().map(|&d| BlockAlgebra::full(d)).collect())?;
    let u = random::haar_unitary(tensor.algebra().rep_dim(), rng);
    let factors = (0..dims.len())
        .map(|k| random::conjugate_embedding(&tensor.factor_embedding(k)?, &u))
        .collect::<Result<Vec<_>>>()?;
    Ok((tensor, factors))
}

/// `Σ_x P(x) [x_1] ⊗ ⋯ ⊗ [x_n] ⊗ W^1_{x_1} ⊗ ⋯ ⊗ W^n_{x_n}` for a random joint `P`.
fn memoryless_state(n: usize, rng: &mut Rng64) -> Result<ChannelState> {
    let alphabets: Vec<usize> = (0..n).map(|_| if n == 2 { rng.random_range(2..=3) } else { 2 }).collect();
    let mut outputs: Vec<usize> = vec![2; n];
    if n > 2 {
        // Keep the output product at most 4.
        let keep = rng.random_range(1..n);
        for (i, d) in outputs.iter_mut().enumerate().skip(1) {
            if i != keep {
                *d = 1;
            }
        }
    }
    let letters: Vec<Vec<DensityState>> = alphabets
        .iter()
        .zip(&outputs)
        .map(|(&a, &d)| (0..a).map(|_| state_or_pure(&BlockAlgebra::full(d), rng)).collect())
        .collect();
    let total: usize = alphabets.iter().product();
    let p = random::distribution(total, rng);
    let inputs: Vec<BlockAlgebra> = alphabets.iter().map(|&a| BlockAlgebra::commutative(a)).collect::<Result<_>>()?;
    let units: Vec<Vec<AlgebraElement>> = inputs.iter().map(|a| (0..a.num_blocks()).map(|x| a.block_unit(x)).collect()).collect();
    let mut terms = Vec::with_capacity(total);
    for (k, &pk) in p.iter().enumerate() {
        let mut rem = k;
        let mut x = vec![0; n];
        for i in (0..n).rev() {
            x[i] = rem % alphabets[i];
            rem /= alphabets[i];
        }
        let mut parts: Vec<&AlgebraElement> = (0..n).map(|i| &units[i][x[i]]).collect();
        parts.extend((0..n).map(|i| letters[i][x[i]].as_element()));
        terms.push((pk, parts));
    }
    let mut factors = inputs;
    factors.extend(outputs.iter().map(|&d| BlockAlgebra::full(d)));
    ChannelState::from_terms(factors, &terms)
}

/// `φ` is a maximal commutative subalgebra, or the exterior map of a rank-one POVM;
/// `ψ` is the identity, a tensor factor, or a unital map into a larger algebra.
fn entropy_increase_instance(rng: &mut Rng64) -> Result<Vec<InequalityVerdict>> {
    let x_alg = if rng.random_bool(0.3) {
        random::block_algebra(2, 3, rng)
    } else {
        BlockAlgebra::full(rng.random_range(2..=4))
    };
    let phi: Box<dyn Operation> = if x_alg.num_blocks() == 1 && rng.random_bool(0.5) {
        let d = x_alg.rep_dim();
        let m = rng.random_range(d..=d + 2);
        Box::new(as_operation(&rank_one_povm(d, m, rng)?))
    } else {
        Box::new(random::maximal_commutative(&x_alg, rng))
    };
    let v = match rng.random_range(0..3) {
        0 => {
            let rho = state_or_pure(&x_alg, rng);
            check_entropy_increase(phi.as_ref(), &KrausMap::identity(&x_alg), &rho)?
        }
        1 => {
            let env = BlockAlgebra::full(rng.random_range(1..=3));
            let tensor = TensorProduct::new(vec![x_alg.clone(), env])?;
            let rho = state_or_pure(tensor.algebra(), rng);
            check_entropy_increase(phi.as_ref(), &tensor.factor_embedding(0)?, &rho)?
        }
        _ => {
            let big = BlockAlgebra::full(rng.random_range(2..=4));
            let psi = unital_map(&x_alg, &big, rng)?;
            let rho = state_or_pure(&big, rng);
            check_entropy_increase(phi.as_ref(), &psi, &rho)?
        }
    };
    Ok(vec![v])
}

/// `X_j = |v_j⟩⟨v_j|` from the rows of a Haar isometry `ℂ^d → ℂ^m`.
fn rank_one_povm(d: usize, m: usize, rng: &mut Rng64) -> Result<Povm> {
    let v = random::haar_unitary(m, rng).columns(0, d).into_owned();
    let alg = BlockAlgebra::full(d);
    let effects = (0..m)
        .map(|j| {
            let row: Vec<_> = v.row(j).iter().map(|z| z.conj()).collect();
            AlgebraElement::from_dense(alg.clone(), &linalg::outer(&row))
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(alg, Label::range(m), effects)
}

/// A named configuration where the checked relation is tight.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EqualityFixture {
    pub name: String,
    pub verdict: InequalityVerdict,
}

fn bell() -> (TensorProduct, DensityState) {
    let s = 0.5f64.sqrt();
    let tensor = TensorProduct::new(vec![BlockAlgebra::full(2), BlockAlgebra::full(2)]).expect("qubits");
    let psi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
    let dense = linalg::outer(&psi);
    let el = tensor.from_kron_dense(&dense).expect("kron order");
    (tensor, DensityState::new(el).expect("pure state"))
}

fn classical_pair(joint: &[Vec<f64>]) -> Result<(TensorProduct, DensityState)> {
    let (a, b) = (joint.len(), joint[0].len());
    let tensor = TensorProduct::new(vec![BlockAlgebra::commutative(a)?, BlockAlgebra::commutative(b)?])?;
    let ea: Vec<AlgebraElement> = (0..a).map(|x| tensor.factors()[0].block_unit(x)).collect();
    let eb: Vec<AlgebraElement> = (0..b).map(|y| tensor.factors()[1].block_unit(y)).collect();
    let mut acc = tensor.algebra().zero();
    for (x, row) in joint.iter().enumerate() {
        for (y, &p) in row.iter().enumerate() {
            acc.add_scaled_assign(&tensor.embed_product(&[&ea[x], &eb[y]])?, c(p, 0.0));
        }
    }
    let rho = DensityState::new(acc)?;
    Ok((tensor, rho))
}

/// The equality cases: each fixture's verdict should have `|slack| ≤ 1e-9`.
pub fn equality_fixtures() -> Result<Vec<EqualityFixture>> {
    let mut rng = random::rng(20_240_101);
    let mut out = Vec::new();
    let mut push = |name: &str, v: InequalityVerdict| {
        out.push(EqualityFixture {
            name: name.into(),
            verdict: v,
        })
    };

    let q = BlockAlgebra::full(2);
    let rho = random::state(&q, &mut rng);
    let klein = check_klein(rho.as_element(), rho.as_element())?;
    push("klein_equal_states", klein[0].clone());
    push("klein_nonnegativity_equal_states", klein[1].clone());

    let sigma = random::state(&q, &mut rng);
    push("monotonicity_identity", check_monotonicity(&rho, &sigma, &KrausMap::identity(&q))?);

    let r3 = random::state(&BlockAlgebra::full(3), &mut rng);
    let r2 = random::state(&q, &mut rng);
    let r2b = random::state(&q, &mut rng);
    let (t, prod) = product_state(&[&r3, &r2])?;
    push(
        "subadditivity_product_state",
        check_subadditivity(&t.factor_embedding(0)?, &t.factor_embedding(1)?, &prod)?,
    );
    let (t3, prod3) = product_state(&[&r2, &r3, &r2b])?;
    push(
        "ssa_product_state",
        check_strong_subadditivity(&t3.factor_embedding(0)?, &t3.factor_embedding(1)?, &t3.factor_embedding(2)?, &prod3)?,
    );

    let (bt, bell_state) = bell();
    let bell_pair =
        check_compatible(&bt.factor_embedding(0)?, &bt.factor_embedding(1)?, tol::COMMUTATOR)?.into_pair(tol::COMMUTATOR)?;
    push("pure_common_state_bell", check_pure_common_state(&bell_pair, &bell_state)?);
    push("triangle_pure_bipartite", check_triangle(&bell_pair, &bell_state)?);
    push("info_upper_bound_bell", check_info_upper_bound(&bell_pair, &bell_state)?);

    let d3 = BlockAlgebra::full(3);
    let r = random::state(&d3, &mut rng);
    let spec = diagonalize(&r);
    let basis = Mat::from_fn(3, 3, |i, j| eigvec(&spec, j)[i]);
    let eig_povm = Povm::projective(&d3, &basis, Label::range(3))?;
    push(
        "entropy_increase_eigenbasis_observable",
        check_entropy_increase(&as_operation(&eig_povm), &KrausMap::identity(&d3), &r)?,
    );
    let singletons: Vec<Vec<usize>> = (0..3).map(|k| vec![k]).collect();
    let eig_alg = random::commutative_from_basis(&d3, &basis, &singletons)?;
    push(
        "entropy_increase_eigenprojection_subalgebra",
        check_entropy_increase(&eig_alg, &KrausMap::identity(&d3), &r)?,
    );

    let joint = vec![vec![0.3, 0.1, 0.05], vec![0.05, 0.2, 0.3]];
    let (ct, cl) = classical_pair(&joint)?;
    let cx = ct.factor_embedding(0)?;
    let cy = ct.factor_embedding(1)?;
    let cpair = check_compatible(&cx, &cy, tol::COMMUTATOR)?.into_pair(tol::COMMUTATOR)?;
    let chain = check_holevo_chain(
        &Povm::computational(cx.domain()),
        &Povm::computational(cy.domain()),
        &cpair,
        &cl,
    )?;
    push("holevo_chain_classical_observable", chain[0].clone());
    push("holevo_chain_classical_subalgebra", chain[1].clone());

    let id_l = KrausMap::identity(bell_pair.left().domain());
    let id_r = KrausMap::identity(bell_pair.right().domain());
    push(
        "data_processing_identity",
        check_data_processing(&id_l, &id_r, bell_pair.left(), bell_pair.right(), &bell_state)?,
    );

    let kd = check_knowledge_decreases(&cx, &cy, &KrausMap::identity(cy.domain()), &cl)?;
    push("knowledge_decreases_identity", kd[0].clone());

    // Independent inputs through two memoryless channels.
    let w1 = [random::state(&q, &mut rng), random::state(&q, &mut rng)];
    let w2 = [random::pure_state(&q, &mut rng), random::state(&q, &mut rng)];
    let (p1, p2) = ([0.4, 0.6], [0.7, 0.3]);
    let bin = BlockAlgebra::commutative(2)?;
    let units: Vec<AlgebraElement> = (0..2).map(|x| bin.block_unit(x)).collect();
    let mut terms = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            terms.push((
                p1[a] * p2[b],
                vec![&units[a], &units[b], w1[a].as_element(), w2[b].as_element()],
            ));
        }
    }
    let g = ChannelState::from_terms(vec![bin.clone(), bin.clone(), q.clone(), q.clone()], &terms)?;
    push(
        "info_subadditivity_independent_inputs",
        check_info_subadditivity(&g.factors[0], &g.factors[1], &g.factors[2], &g.factors[3], &g.state)?,
    );

    let (pt, perfect) = classical_pair(&[vec![0.5, 0.0], vec![0.0, 0.5]])?;
    let px = pt.factor_embedding(0)?;
    let py = pt.factor_embedding(1)?;
    push(
        "conditional_entropy_nonneg_perfect_correlation",
        check_conditional_entropy_nonneg(&px, &py, &perfect)?,
    );
    let sep = crate::state::make_separable(vec![
        (0.5, vec![DensityState::diagonal(&q, &[1.0, 0.0])?, DensityState::diagonal(&q, &[1.0, 0.0])?]),
        (0.5, vec![DensityState::diagonal(&q, &[0.0, 1.0])?, DensityState::diagonal(&q, &[0.0, 1.0])?]),
    ])?;
    push(
        "separability_conjecture_classical_correlation",
        probe_separability_conjecture(&sep, &[0], &[1])?[0].clone(),
    );

    let x_perfect = Povm::new(
        perfect.algebra().clone(),
        Label::range(2),
        (0..2).map(|k| px.block_projection(k)).collect(),
    )?;
    push(
        "fano_perfect_correlation",
        check_fano(&x_perfect, &py, &Povm::computational(py.domain()), &perfect)?,
    );
    let flip = 0.15;
    let (bt2, bsc) = classical_pair(&[vec![0.5 * (1.0 - flip), 0.5 * flip], vec![0.5 * flip, 0.5 * (1.0 - flip)]])?;
    let bx = bt2.factor_embedding(0)?;
    let by = bt2.factor_embedding(1)?;
    let x_bsc = Povm::new(
        bsc.algebra().clone(),
        Label::range(2),
        (0..2).map(|k| bx.block_projection(k)).collect(),
    )?;
    let y_bsc = Povm::computational(by.domain());
    push("fano_binary_symmetric", check_fano(&x_bsc, &by, &y_bsc, &bsc)?);
    push("fano_corollary_binary_symmetric", check_fano_corollary(&bx, &by, &y_bsc, &bsc)?);
    Ok(out)
}

fn eigvec(spec: &crate::state::Spectrum, j: usize) -> Vec<crate::linalg::C64> {
    let p = spec.projectors[j].to_dense();
    let (_, vecs) = linalg::eigh(&p);
    vecs.column(0).iter().cloned().collect()
}
