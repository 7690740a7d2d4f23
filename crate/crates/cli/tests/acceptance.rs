//! Acceptance criteria AC-1 to AC-8, one line each.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;

use quinfo::algebra::multiplication_map;
use quinfo::channels::{
    conditional_mi_constraint, converse_check, example_channel, mutual_information_pw, outer_bound_region, CqChannel,
    InputDistribution, MultiwayChannel, MultiwayCode, RegionConfig,
};
use quinfo::fuzz::{equality_fixtures, run_fuzz};
use quinfo::infotheory::*;
use quinfo::inequalities::THEOREMS;
use quinfo::linalg::c;
use quinfo::observable::{as_operation, measure};
use quinfo::random::{self, Rng64};
use quinfo::state::restrict;
use quinfo::{
    AlgebraElement, BlockAlgebra, DensityState, Label, Operation, Povm, SubalgebraEmbedding, TensorProduct, VerdictStatus,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = quinfo_cli::run(std::iter::once("quinfo").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

// ---- independent classical oracle ----

fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

fn h2(p: f64) -> f64 {
    shannon(&[p, 1.0 - p])
}

struct Joint {
    dims: Vec<usize>,
    p: Vec<f64>,
}

impl Joint {
    fn coords(&self, mut k: usize) -> Vec<usize> {
        let mut x = vec![0; self.dims.len()];
        for i in (0..self.dims.len()).rev() {
            x[i] = k % self.dims[i];
            k /= self.dims[i];
        }
        x
    }

    fn entropy(&self, keep: &[usize]) -> f64 {
        let mut marginal = BTreeMap::<Vec<usize>, f64>::new();
        for (k, &pk) in self.p.iter().enumerate() {
            let x = self.coords(k);
            *marginal.entry(keep.iter().map(|&i| x[i]).collect()).or_default() += pk;
        }
        shannon(&marginal.into_values().collect::<Vec<_>>())
    }

    fn cond_entropy(&self, a: &[usize], b: &[usize]) -> f64 {
        self.entropy(&[a, b].concat()) - self.entropy(b)
    }

    fn mutual_info(&self, a: &[usize], b: &[usize]) -> f64 {
        self.entropy(a) + self.entropy(b) - self.entropy(&[a, b].concat())
    }

    fn cond_mutual_info(&self, a: &[usize], b: &[usize], z: &[usize]) -> f64 {
        self.entropy(&[a, z].concat()) + self.entropy(&[b, z].concat())
            - self.entropy(&[a, b, z].concat())
            - self.entropy(z)
    }
}

fn classical_state(joint: &Joint) -> (DensityState, Vec<SubalgebraEmbedding>) {
    let algs: Vec<BlockAlgebra> = joint.dims.iter().map(|&d| BlockAlgebra::commutative(d).unwrap()).collect();
    let t = TensorProduct::new(algs.clone()).unwrap();
    let mut acc = t.algebra().zero();
    for (k, &pk) in joint.p.iter().enumerate() {
        let units: Vec<AlgebraElement> = joint.coords(k).iter().zip(&algs).map(|(&x, a)| a.block_unit(x)).collect();
        let parts: Vec<&AlgebraElement> = units.iter().collect();
        acc = acc.add(&t.embed_product(&parts).unwrap().scale(c(pk, 0.0))).unwrap();
    }
    let factors = (0..joint.dims.len()).map(|k| t.factor_embedding(k).unwrap()).collect();
    (DensityState::new(acc).unwrap(), factors)
}

fn lifted_computational(e: &SubalgebraEmbedding) -> Povm {
    let x = Povm::computational(e.domain());
    let effects = x.effects().iter().map(|f| e.map(f).unwrap()).collect();
    Povm::new(e.parent().clone(), x.outcomes().to_vec(), effects).unwrap()
}

fn random_multiway(s: usize, rng: &mut Rng64) -> MultiwayChannel {
    let sizes: Vec<usize> = (0..s).map(|_| rng.random_range(1..=3)).collect();
    let t = TensorProduct::new(vec![BlockAlgebra::full(2), BlockAlgebra::full(rng.random_range(1..=2))]).unwrap();
    let u = random::haar_unitary(t.algebra().rep_dim(), rng);
    let receivers = (0..2)
        .map(|k| random::conjugate_embedding(&t.factor_embedding(k).unwrap(), &u).unwrap())
        .collect();
    let letters = (0..sizes.iter().product()).map(|_| random::state(t.algebra(), rng)).collect();
    MultiwayChannel::new(sizes.iter().map(|&n| Label::range(n)).collect(), t.algebra().clone(), letters, receivers)
        .unwrap()
}

// ---- criteria ----

fn ac1() -> Outcome {
    let start = Instant::now();
    let (code, stdout, _) = cli(&["example"]);
    let elapsed = start.elapsed();
    let table: Value = serde_json::from_str(&stdout).map_err(|e| e.to_string())?;
    let value = |scenario: u64, quantity: &str| {
        table["rows"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["scenario"] == scenario && r["quantity"] == quantity)
            .and_then(|r| r["value_bits"].as_f64())
            .unwrap()
    };
    let expected = [
        (1, "H(X|Y)", 0.399, 1.0 - h2((PI / 8.0).cos().powi(2))),
        (1, "H(X|YZ)", 0.189, 1.0 - h2((PI / 6.0).cos().powi(2))),
        (2, "H(X|YZ)", 0.246, 1.0 - h2((1.0 + 0.75f64.sqrt()) / 2.0)),
    ];
    let mut ok = code == 0 && elapsed < Duration::from_secs(1);
    let mut detail = Vec::new();
    for (scenario, quantity, printed, closed) in expected {
        let v = value(scenario, quantity);
        let row_ok = (v - printed).abs() <= 1e-3 && (v - closed).abs() <= 1e-9;
        ok &= row_ok;
        detail.push(format!(
            "s{scenario} {quantity} = {v:.9} (printed {printed}, closed form {closed:.9}{})",
            if row_ok { "" } else { " MISMATCH" }
        ));
    }
    detail.push(format!("{elapsed:.2?}"));
    check(ok, detail.join("; "))
}

fn ac2() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut bad = Vec::new();
    let mut findings = 0;
    for &theorem in THEOREMS {
        let run = run_fuzz(theorem, 500, 2).map_err(|e| e.to_string())?;
        let s = &run.summary;
        if s.conjecture {
            findings += s.failures;
            continue;
        }
        worst = worst.min(s.min_slack_bits);
        let low = run
            .verdicts
            .iter()
            .filter(|v| matches!(v.status, VerdictStatus::Pass | VerdictStatus::Fail) && v.slack_bits < -1e-8)
            .count();
        if s.failures > 0 || low > 0 {
            bad.push(format!("{theorem}: {} failures", s.failures.max(low)));
        }
    }
    let fixtures = equality_fixtures().map_err(|e| e.to_string())?;
    let loose: Vec<&str> = fixtures
        .iter()
        .filter(|f| !(f.verdict.slack_bits.abs() <= 1e-9))
        .map(|f| f.name.as_str())
        .collect();
    let elapsed = start.elapsed();
    check(
        bad.is_empty() && loose.is_empty() && elapsed < Duration::from_secs(120),
        format!(
            "{} checkers x 500, min slack {worst:.2e}, {} equality fixtures tight, {findings} conjecture findings, {elapsed:.1?}{}{}",
            THEOREMS.len() - 1,
            fixtures.len() - loose.len(),
            if bad.is_empty() { String::new() } else { format!("; failing {bad:?}") },
            if loose.is_empty() { String::new() } else { format!("; loose fixtures {loose:?}") },
        ),
    )
}

fn ac3() -> Outcome {
    let mut rng = random::rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let dims: Vec<usize> = (0..3).map(|_| rng.random_range(1..=5)).collect();
        let joint = Joint {
            p: random::distribution(dims.iter().product(), &mut rng),
            dims,
        };
        let (rho, f) = classical_state(&joint);
        let obs: Vec<Povm> = f.iter().map(lifted_computational).collect();
        let ops: Vec<_> = obs.iter().map(as_operation).collect();
        let pairs = [
            (entropy_alg(&f[0], &rho), joint.entropy(&[0])),
            (entropy_obs(&obs[1], &rho), joint.entropy(&[1])),
            (entropy_op(&ops[2], &rho), joint.entropy(&[2])),
            (cond_entropy_alg(&f[0], &f[1], &rho), joint.cond_entropy(&[0], &[1])),
            (cond_entropy_obs(&obs[0], &obs[1], &rho), joint.cond_entropy(&[0], &[1])),
            (cond_entropy_op(&ops[0], &ops[1], &rho), joint.cond_entropy(&[0], &[1])),
            (mutual_info_alg(&f[0], &f[2], &rho), joint.mutual_info(&[0], &[2])),
            (mutual_info_obs(&obs[0], &obs[2], &rho), joint.mutual_info(&[0], &[2])),
            (mutual_info_op(&ops[0], &ops[2], &rho), joint.mutual_info(&[0], &[2])),
            (cond_mutual_info_alg(&f[0], &f[1], &f[2], &rho), joint.cond_mutual_info(&[0], &[1], &[2])),
            (cond_mutual_info_obs(&obs[0], &obs[1], &obs[2], &rho), joint.cond_mutual_info(&[0], &[1], &[2])),
            (cond_mutual_info_op(&ops[0], &ops[1], &ops[2], &rho), joint.cond_mutual_info(&[0], &[1], &[2])),
        ];
        for (lib, oracle) in pairs {
            worst = worst.max((lib.map_err(|e| e.to_string())? - oracle).abs());
        }
    }
    check(worst <= 1e-9, format!("200 instances x 12 quantities, max deviation {worst:.2e}"))
}

fn ac4() -> Outcome {
    let mut rng = random::rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let pair = random::compatible_pair(&mut rng);
        let mu = multiplication_map(&pair).map_err(|e| e.to_string())?;
        let rho = random::state(pair.left().parent(), &mut rng);
        let restricted = restrict(&rho, &mu.product.embedding).map_err(|e| e.to_string())?;
        let pulled = mu.map.preadjoint(&restricted).map_err(|e| e.to_string())?;
        let nonzero = |mut v: Vec<f64>| {
            v.retain(|&x| x > 1e-12);
            v.sort_by(|a, b| b.total_cmp(a));
            v
        };
        let (a, b) = (nonzero(pulled.eigenvalues()), nonzero(restricted.eigenvalues()));
        if a.len() != b.len() {
            return Err(format!("rank {} vs {}", a.len(), b.len()));
        }
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    check(worst <= 1e-9, format!("200 pairs, max eigenvalue deviation {worst:.2e}"))
}

fn ac5() -> Outcome {
    let kernel = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    let mac = MultiwayChannel::classical(&[2, 2], &kernel.map(|r| r.to_vec())).map_err(|e| e.to_string())?;
    let mut rng = random::rng(5);
    let mut inputs = vec![(vec![0.5, 0.5], vec![0.5, 0.5])];
    inputs.extend((0..100).map(|_| (random::distribution(2, &mut rng), random::distribution(2, &mut rng))));
    let mut worst: f64 = 0.0;
    let mut sum_rate = f64::NAN;
    for (k, (p1, p2)) in inputs.iter().enumerate() {
        let mut p = Vec::new();
        for (a, &pa) in p1.iter().enumerate() {
            for (b, &pb) in p2.iter().enumerate() {
                p.extend(kernel[2 * a + b].iter().map(|&w| pa * pb * w));
            }
        }
        let joint = Joint { dims: vec![2, 2, 3], p };
        let gamma = mac
            .channel_state(&InputDistribution::Product {
                marginals: vec![p1.clone(), p2.clone()],
            })
            .map_err(|e| e.to_string())?;
        let oracle = [
            (vec![0], joint.cond_mutual_info(&[0], &[2], &[1])),
            (vec![1], joint.cond_mutual_info(&[1], &[2], &[0])),
            (vec![0, 1], joint.mutual_info(&[0, 1], &[2])),
        ];
        for (set, expect) in oracle {
            let lib = conditional_mi_constraint(&gamma, &set, 0).map_err(|e| e.to_string())?;
            worst = worst.max((lib - expect).abs());
            if k == 0 && set.len() == 2 {
                sum_rate = lib;
            }
        }
    }
    let mut violations = 0;
    for _ in 0..100 {
        let mc = random_multiway(rng.random_range(1..=2), &mut rng);
        let coarse = mc
            .receivers()
            .iter()
            .map(|r| r.compose(&random::maximal_commutative(r.domain(), &mut rng)).unwrap())
            .collect();
        let coarse = MultiwayChannel::new(mc.senders().to_vec(), mc.output().clone(), mc.letters().to_vec(), coarse)
            .map_err(|e| e.to_string())?;
        let p = InputDistribution::Product {
            marginals: mc.alphabet_sizes().iter().map(|&n| random::distribution(n, &mut rng)).collect(),
        };
        let fine = mc.constraint_table(&p).map_err(|e| e.to_string())?;
        let coarse = coarse.constraint_table(&p).map_err(|e| e.to_string())?;
        violations += fine.iter().zip(&coarse).filter(|(f, g)| g.bits > f.bits + 1e-9).count();
    }
    check(
        worst <= 1e-9 && (sum_rate - 1.5).abs() <= 1e-9 && violations == 0,
        format!(
            "adder oracle deviation {worst:.2e} over 101 inputs, uniform sum rate {sum_rate:.12}, {violations} coarse-graining violations in 100 quantum instances"
        ),
    )
}

fn ac6() -> Outcome {
    let run = run_fuzz("holevo_chain", 500, 6).map_err(|e| e.to_string())?;
    let w = example_channel();
    let holevo = mutual_information_pw(&[0.5, 0.5], &w).map_err(|e| e.to_string())?;
    // Projective qubit measurements on a Bloch-sphere grid.
    let alg = BlockAlgebra::full(2);
    let mut best: f64 = 0.0;
    let (nt, np) = (90, 90);
    for i in 0..=nt {
        for j in 0..np {
            let theta = PI * i as f64 / nt as f64;
            let phase = 2.0 * PI * j as f64 / np as f64;
            let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let u = quinfo::linalg::Mat::from_row_slice(
                2,
                2,
                &[c(ct, 0.0), c(-st, 0.0), c(st * phase.cos(), st * phase.sin()), c(ct * phase.cos(), ct * phase.sin())],
            );
            let y = Povm::projective(&alg, &u, Label::range(2)).map_err(|e| e.to_string())?;
            let rows = w
                .letters()
                .iter()
                .map(|s| Ok(measure(&y, s)?.probabilities))
                .collect::<quinfo::Result<Vec<_>>>()
                .map_err(|e| e.to_string())?;
            let classical = CqChannel::classical(&rows).map_err(|e| e.to_string())?;
            best = best.max(mutual_information_pw(&[0.5, 0.5], &classical).map_err(|e| e.to_string())?);
        }
    }
    let gap = holevo - best;
    check(
        run.summary.failures == 0 && (holevo - 0.601).abs() <= 1e-3 && gap > 0.0,
        format!(
            "500 instances, {} failures, min slack {:.2e}; I(P,W) = {holevo:.6}, best projective {best:.6}, gap {gap:.6}",
            run.summary.failures, run.summary.min_slack_bits
        ),
    )
}

fn random_code(mc: &MultiwayChannel, n: usize, rng: &mut Rng64) -> MultiwayCode {
    let encoders: Vec<Vec<Vec<usize>>> = mc
        .alphabet_sizes()
        .iter()
        .map(|&a| {
            let m = rng.random_range(1..=3);
            (0..m).map(|_| (0..n).map(|_| rng.random_range(0..a)).collect()).collect()
        })
        .collect();
    let messages: usize = encoders.iter().map(Vec::len).product();
    let decoders = (0..mc.num_receivers())
        .map(|j| {
            let t = MultiwayCode::decoder_algebra(mc, j, n).unwrap();
            random::povm(t.algebra(), messages + rng.random_range(0..2), rng)
        })
        .collect();
    MultiwayCode {
        block_length: n,
        encoders,
        decoders,
    }
}

fn ac7() -> Outcome {
    let mut rng = random::rng(7);
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for (n, count) in [(1, 100), (2, 20)] {
        for _ in 0..count {
            let mc = random_multiway(rng.random_range(1..=2), &mut rng);
            let code = random_code(&mc, n, &mut rng);
            let report = converse_check(&mc, &code).map_err(|e| e.to_string())?;
            for v in report.verdicts() {
                worst = worst.min(v.slack_bits);
                checked += 1;
            }
        }
    }
    check(worst >= -1e-8, format!("120 codes, {checked} inequalities, min slack {worst:.2e}"))
}

fn ac8() -> Outcome {
    let fuzz = || {
        THEOREMS
            .iter()
            .map(|t| serde_json::to_string(&run_fuzz(t, 40, 8).unwrap().verdicts).unwrap())
            .collect::<Vec<_>>()
    };
    let mut rng = random::rng(8);
    let mc = random_multiway(2, &mut rng);
    let region = || {
        serde_json::to_string(&outer_bound_region(&mc, &RegionConfig { num_samples: 64, seed: 8, ..Default::default() }).unwrap())
            .unwrap()
    };
    let same_fuzz = fuzz() == fuzz();
    let same_region = region() == region();
    let same_cli = cli(&["check", "--theorem", "ssa", "--random", "30", "--seed", "8"])
        == cli(&["check", "--theorem", "ssa", "--random", "30", "--seed", "8"]);
    check(
        same_fuzz && same_region && same_cli,
        format!("fuzz suites identical: {same_fuzz}, region identical: {same_region}, cli identical: {same_cli}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("AC-1", ac1),
        ("AC-2", ac2),
        ("AC-3", ac3),
        ("AC-4", ac4),
        ("AC-5", ac5),
        ("AC-6", ac6),
        ("AC-7", ac7),
        ("AC-8", ac8),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match std::panic::catch_unwind(f) {
            Ok(Ok(detail)) => println!("{name} PASS  {detail}"),
            Ok(Err(detail)) => {
                failed += 1;
                println!("{name} FAIL  {detail}");
            }
            Err(_) => {
                failed += 1;
                println!("{name} FAIL  panicked");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
