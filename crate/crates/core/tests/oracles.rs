//! Library values against independent classical computations and frozen constants.

use std::f64::consts::PI;

use rand::Rng;

use quinfo::channels::{
    broadcast_code_error, broadcast_region_point, code_error_probabilities, conditional_mi_constraint, converse_check,
    example_channel, mutual_information_pw, outer_bound_region, BroadcastCode, CqChannel, InputDistribution,
    MultiwayChannel, MultiwayCode, RegionConfig,
};
use quinfo::infotheory::*;
use quinfo::linalg::{c, Mat};
use quinfo::observable::as_operation;
use quinfo::random;
use quinfo::{AlgebraElement, BlockAlgebra, DensityState, KrausMap, Label, Povm, SubalgebraEmbedding, TensorProduct};

const BSC_CAPACITY_01: f64 = 0.531_004_406_410_718_8;
const Z_CAPACITY_HALF: f64 = 0.321_928_094_887_362_35;
const HELSTROM_EXAMPLE: f64 = 0.146_446_609_406_726_24;
const EXAMPLE_HOLEVO: f64 = 0.600_876_036_692_856_2;
const CASCADE_R1: f64 = 0.412_295_305_641_411_5;
const CASCADE_R0_R2: f64 = 0.041_957_977_773_700_47;

fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

fn h2(p: f64) -> f64 {
    shannon(&[p, 1.0 - p])
}

fn star(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

fn bsc(p: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
}

/// Joint distribution over `dims`, row-major.
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

    /// `H` of the variables in `keep`, by summing out the rest.
    fn entropy(&self, keep: &[usize]) -> f64 {
        let mut marginal = std::collections::BTreeMap::<Vec<usize>, f64>::new();
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

/// `(P_X × W)` as a joint distribution of `(X, Y)`.
fn input_output(p: &[f64], kernel: &[Vec<f64>]) -> Joint {
    let ny = kernel[0].len();
    Joint {
        dims: vec![p.len(), ny],
        p: p.iter().zip(kernel).flat_map(|(&px, row)| row.iter().map(move |&w| px * w)).collect(),
    }
}

fn blahut_arimoto(kernel: &[Vec<f64>]) -> f64 {
    let nx = kernel.len();
    let mut p = vec![1.0 / nx as f64; nx];
    for _ in 0..20_000 {
        let q: Vec<f64> = (0..kernel[0].len()).map(|y| (0..nx).map(|x| p[x] * kernel[x][y]).sum()).collect();
        let d: Vec<f64> = kernel
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&q)
                    .filter(|(&w, _)| w > 0.0)
                    .map(|(&w, &qy)| w * (w / qy).log2())
                    .sum::<f64>()
            })
            .collect();
        let z: f64 = p.iter().zip(&d).map(|(&px, &dx)| px * dx.exp2()).sum();
        p = p.iter().zip(&d).map(|(&px, &dx)| px * dx.exp2() / z).collect();
    }
    input_output(&p, kernel).mutual_info(&[0], &[1])
}

fn random_kernel(nx: usize, ny: usize, rng: &mut random::Rng64) -> Vec<Vec<f64>> {
    (0..nx).map(|_| random::distribution(ny, rng)).collect()
}

/// Diagonal state of a joint distribution on `ℂ^{d_1} ⊗ ⋯ ⊗ ℂ^{d_k}` with its factors.
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

#[test]
fn commutative_quantities_match_enumeration() {
    let mut rng = random::rng(2024);
    for _ in 0..200 {
        let dims: Vec<usize> = (0..3).map(|_| rng.random_range(1..=5)).collect();
        let mut p = random::distribution(dims.iter().product(), &mut rng);
        // Exact zeros exercise the support handling.
        if rng.random_bool(0.3) {
            let k = rng.random_range(0..p.len());
            let s = 1.0 - p[k];
            if s > 0.0 {
                p[k] = 0.0;
                p.iter_mut().for_each(|x| *x /= s);
            }
        }
        let joint = Joint { dims, p };
        let (rho, f) = classical_state(&joint);
        let obs: Vec<Povm> = f.iter().map(lifted_computational).collect();
        let ops: Vec<_> = obs.iter().map(as_operation).collect();
        let eq = |lib: f64, oracle: f64| assert!((lib - oracle).abs() <= 1e-9, "{lib} vs {oracle}");

        eq(entropy_alg(&f[0], &rho).unwrap(), joint.entropy(&[0]));
        eq(entropy_obs(&obs[0], &rho).unwrap(), joint.entropy(&[0]));
        eq(entropy_op(&ops[0], &rho).unwrap(), joint.entropy(&[0]));
        eq(joint_entropy_alg(&[&f[0], &f[1], &f[2]], &rho).unwrap(), joint.entropy(&[0, 1, 2]));
        eq(von_neumann_entropy(&rho), joint.entropy(&[0, 1, 2]));

        eq(cond_entropy_alg(&f[0], &f[1], &rho).unwrap(), joint.cond_entropy(&[0], &[1]));
        eq(cond_entropy_obs(&obs[0], &obs[1], &rho).unwrap(), joint.cond_entropy(&[0], &[1]));
        eq(cond_entropy_op(&ops[0], &ops[1], &rho).unwrap(), joint.cond_entropy(&[0], &[1]));

        eq(mutual_info_alg(&f[0], &f[2], &rho).unwrap(), joint.mutual_info(&[0], &[2]));
        eq(mutual_info_obs(&obs[0], &obs[2], &rho).unwrap(), joint.mutual_info(&[0], &[2]));
        eq(mutual_info_op(&ops[0], &ops[2], &rho).unwrap(), joint.mutual_info(&[0], &[2]));

        eq(cond_mutual_info_alg(&f[0], &f[1], &f[2], &rho).unwrap(), joint.cond_mutual_info(&[0], &[1], &[2]));
        eq(cond_mutual_info_obs(&obs[0], &obs[1], &obs[2], &rho).unwrap(), joint.cond_mutual_info(&[0], &[1], &[2]));
        eq(cond_mutual_info_op(&ops[0], &ops[1], &ops[2], &rho).unwrap(), joint.cond_mutual_info(&[0], &[1], &[2]));

        eq(cond_entropy_alg_given_obs(&f[1], &obs[2], &rho).unwrap(), joint.cond_entropy(&[1], &[2]));
        eq(mutual_info_alg_obs(&f[1], &obs[0], &rho).unwrap(), joint.mutual_info(&[1], &[0]));
        eq(cond_entropy_obs_given_alg(&obs[2], &f[0], &rho).unwrap(), joint.cond_entropy(&[2], &[0]));
    }
}

#[test]
fn blahut_arimoto_reproduces_frozen_capacities() {
    assert!((blahut_arimoto(&bsc(0.1)) - BSC_CAPACITY_01).abs() < 1e-9);
    assert!((1.0 - h2(0.1) - BSC_CAPACITY_01).abs() < 1e-15);
    let z = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
    assert!((blahut_arimoto(&z) - Z_CAPACITY_HALF).abs() < 1e-9);
    assert!((1.25f64.log2() - Z_CAPACITY_HALF).abs() < 1e-15);
}

#[test]
fn single_sender_region_approaches_capacity() {
    let z = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
    let mut kernels = vec![bsc(0.1), z];
    let mut rng = random::rng(31);
    kernels.extend((0..6).map(|_| random_kernel(3, 3, &mut rng)));
    for kernel in &kernels {
        let cap = blahut_arimoto(kernel);
        let mc = MultiwayChannel::classical(&[kernel.len()], kernel).unwrap();
        let region = outer_bound_region(&mc, &RegionConfig::default()).unwrap();
        let best = region.max_bound(&[0], 0).unwrap();
        assert!(best <= cap + 1e-9, "{best} exceeds capacity {cap}");
        assert!(best >= cap - 2e-2, "{best} far below capacity {cap}");
        for s in &region.support {
            assert!(s.value <= cap + 1e-9);
        }
        for sample in &region.samples {
            let p = sample.distributions[0].joint(&[kernel.len()]).unwrap();
            let oracle = input_output(&p, kernel).mutual_info(&[0], &[1]);
            assert!((sample.constraints[0].bits - oracle).abs() <= 1e-9);
        }
    }
}

fn adder() -> (MultiwayChannel, Vec<Vec<f64>>) {
    let kernel = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    (MultiwayChannel::classical(&[2, 2], &kernel).unwrap(), kernel)
}

/// `(X_1, X_2, Y)` for product inputs through a two-sender kernel.
fn mac_joint(p1: &[f64], p2: &[f64], kernel: &[Vec<f64>]) -> Joint {
    let ny = kernel[0].len();
    let mut p = Vec::new();
    for (a, &pa) in p1.iter().enumerate() {
        for (b, &pb) in p2.iter().enumerate() {
            p.extend(kernel[a * p2.len() + b].iter().map(|&w| pa * pb * w));
        }
    }
    Joint {
        dims: vec![p1.len(), p2.len(), ny],
        p,
    }
}

#[test]
fn adder_constraints_match_enumeration() {
    let (mc, kernel) = adder();
    let mut rng = random::rng(5);
    let mut inputs = vec![(vec![0.5, 0.5], vec![0.5, 0.5])];
    inputs.extend((0..50).map(|_| (random::distribution(2, &mut rng), random::distribution(2, &mut rng))));
    for (p1, p2) in &inputs {
        let joint = mac_joint(p1, p2, &kernel);
        let gamma = mc
            .channel_state(&InputDistribution::Product {
                marginals: vec![p1.clone(), p2.clone()],
            })
            .unwrap();
        let expect = [
            (vec![0], joint.cond_mutual_info(&[0], &[2], &[1])),
            (vec![1], joint.cond_mutual_info(&[1], &[2], &[0])),
            (vec![0, 1], joint.mutual_info(&[0, 1], &[2])),
        ];
        for (set, oracle) in &expect {
            let lib = conditional_mi_constraint(&gamma, set, 0).unwrap();
            assert!((lib - oracle).abs() <= 1e-9, "{set:?}: {lib} vs {oracle}");
        }
    }
    let uniform = mc.channel_state(&InputDistribution::uniform(&[2, 2])).unwrap();
    assert!((conditional_mi_constraint(&uniform, &[0, 1], 0).unwrap() - 1.5).abs() <= 1e-9);
    assert!((shannon(&[0.25, 0.5, 0.25]) - 1.5).abs() < 1e-15);

    let region = outer_bound_region(&mc, &RegionConfig::default()).unwrap();
    assert!((region.max_bound(&[0, 1], 0).unwrap() - 1.5).abs() <= 1e-9);
    assert!((region.max_bound(&[0], 0).unwrap() - 1.0).abs() <= 1e-9);
}

fn real_basis(theta: f64) -> Mat {
    let (co, si) = (theta.cos(), theta.sin());
    Mat::from_row_slice(2, 2, &[c(co, 0.0), c(-si, 0.0), c(si, 0.0), c(co, 0.0)])
}

#[test]
fn example_channel_helstrom_grid() {
    let w = example_channel();
    let mc = MultiwayChannel::new(
        vec![Label::range(2)],
        w.output().clone(),
        w.letters().to_vec(),
        vec![SubalgebraEmbedding::identity(w.output())],
    )
    .unwrap();
    let out = BlockAlgebra::full(2);
    let steps = 720;
    let mut best_lib = f64::INFINITY;
    let mut best_oracle = f64::INFINITY;
    let mut best_mi: f64 = 0.0;
    for k in 0..steps {
        let theta = PI * k as f64 / steps as f64;
        // Outcome 0 on |θ⟩ = (cos θ, sin θ), outcome 1 on its complement.
        let decoder = Povm::projective(&out, &real_basis(theta), Label::range(2)).unwrap();
        let code = MultiwayCode {
            block_length: 1,
            encoders: vec![vec![vec![0], vec![1]]],
            decoders: vec![decoder],
        };
        let lib = code_error_probabilities(&mc, &code).unwrap()[0];
        let on_zero = theta.cos().powi(2);
        let on_plus = ((theta.cos() + theta.sin()) / 2f64.sqrt()).powi(2);
        let oracle = 1.0 - (on_zero + (1.0 - on_plus)) / 2.0;
        assert!((lib - oracle).abs() <= 1e-12);
        best_lib = best_lib.min(lib);
        best_oracle = best_oracle.min(oracle);
        let kernel = vec![vec![on_zero, 1.0 - on_zero], vec![on_plus, 1.0 - on_plus]];
        best_mi = best_mi.max(input_output(&[0.5, 0.5], &kernel).mutual_info(&[0], &[1]));
    }
    // θ = -π/8 mod π lies on the grid.
    assert!((best_lib - HELSTROM_EXAMPLE).abs() <= 1e-12);
    assert!((best_oracle - HELSTROM_EXAMPLE).abs() <= 1e-12);
    assert!(((PI / 8.0).sin().powi(2) - HELSTROM_EXAMPLE).abs() < 1e-15);

    let holevo = mutual_information_pw(&[0.5, 0.5], &w).unwrap();
    assert!((holevo - EXAMPLE_HOLEVO).abs() <= 1e-12);
    assert!((h2((PI / 8.0).cos().powi(2)) - EXAMPLE_HOLEVO).abs() < 1e-15);
    assert!(holevo - best_mi > 0.1, "gap {}", holevo - best_mi);
}

/// Unital `φ: ℂ^2 → ℂ^2` whose predual is the classical kernel `q[y][z]`.
fn classical_map(q: &[Vec<f64>]) -> KrausMap {
    let alg = BlockAlgebra::commutative(2).unwrap();
    let mut kraus = Vec::new();
    for (y, row) in q.iter().enumerate() {
        for (z, &qz) in row.iter().enumerate() {
            let mut v = Mat::zeros(2, 2);
            v[(z, y)] = c(qz.sqrt(), 0.0);
            kraus.push(v);
        }
    }
    KrausMap::new(alg.clone(), alg, kraus).unwrap()
}

fn indicator(alg: &BlockAlgebra, decode: impl Fn(usize) -> bool) -> AlgebraElement {
    (0..2).filter(|&y| decode(y)).fold(alg.zero(), |acc, y| acc.add(&alg.block_unit(y)).unwrap())
}

/// Deterministic decoders `{0,1} → {0,1}` as bit masks.
fn decoders() -> impl Iterator<Item = [usize; 2]> {
    (0..4).map(|g| [g & 1, (g >> 1) & 1])
}

#[test]
fn broadcast_cascade_exhaustive_map() {
    let (p1, q) = (0.1, 0.2);
    let w = CqChannel::classical(&bsc(p1)).unwrap();
    let phi = classical_map(&bsc(q));
    let alg = w.output().clone();
    let cascade = bsc(star(p1, q));

    // Private message to the strong receiver.
    let mut best = f64::INFINITY;
    for g in decoders() {
        let code = BroadcastCode {
            block_length: 1,
            messages: [1, 2, 1],
            decoded: [1, 2, 1],
            encoder: vec![vec![0], vec![1]],
            e_operators: (0..2).map(|b| indicator(&alg, |y| g[y] == b)).collect(),
            d2: Povm::trivial(&alg),
        };
        let lib = broadcast_code_error(&w, &phi, &code).unwrap().average;
        let oracle = 1.0 - (0..2).map(|x| (0..2).filter(|&y| g[y] == x).map(|y| bsc(p1)[x][y]).sum::<f64>()).sum::<f64>() / 2.0;
        assert!((lib - oracle).abs() <= 1e-12);
        best = best.min(lib);
    }
    assert!((best - p1).abs() <= 1e-12);

    // Private message to the degraded receiver.
    let mut best = f64::INFINITY;
    for g in decoders() {
        let code = BroadcastCode {
            block_length: 1,
            messages: [1, 1, 2],
            decoded: [1, 1, 2],
            encoder: vec![vec![0], vec![1]],
            e_operators: vec![alg.identity()],
            d2: Povm::new(alg.clone(), Label::range(2), (0..2).map(|c2| indicator(&alg, |z| g[z] == c2)).collect())
                .unwrap(),
        };
        let lib = broadcast_code_error(&w, &phi, &code).unwrap().average;
        let oracle = 1.0 - (0..2).map(|x| (0..2).filter(|&z| g[z] == x).map(|z| cascade[x][z]).sum::<f64>()).sum::<f64>() / 2.0;
        assert!((lib - oracle).abs() <= 1e-12);
        best = best.min(lib);
    }
    assert!((best - 0.26).abs() <= 1e-12);

    // Common message decoded by both receivers in sequence.
    let mut best = f64::INFINITY;
    for g1 in decoders() {
        for g2 in decoders() {
            let code = BroadcastCode {
                block_length: 1,
                messages: [2, 1, 1],
                decoded: [2, 1, 1],
                encoder: vec![vec![0], vec![1]],
                e_operators: (0..2).map(|a| indicator(&alg, |y| g1[y] == a)).collect(),
                d2: Povm::new(alg.clone(), Label::range(2), (0..2).map(|a| indicator(&alg, |z| g2[z] == a)).collect())
                    .unwrap(),
            };
            let lib = broadcast_code_error(&w, &phi, &code).unwrap().average;
            let success: f64 = (0..2)
                .map(|x| {
                    let mut s = 0.0;
                    for y in 0..2 {
                        for z in 0..2 {
                            if g1[y] == x && g2[z] == x {
                                s += bsc(p1)[x][y] * bsc(q)[y][z];
                            }
                        }
                    }
                    s
                })
                .sum::<f64>()
                / 2.0;
            assert!((lib - (1.0 - success)).abs() <= 1e-12);
            best = best.min(lib);
        }
    }
    assert!((best - (1.0 - (1.0 - p1) * (1.0 - q))).abs() <= 1e-12);
    assert!((best - 0.28).abs() <= 1e-12);
}

#[test]
fn broadcast_point_bsc_closed_forms() {
    let (p1, q, beta) = (0.1, 0.2, 0.25);
    let w = CqChannel::classical(&bsc(p1)).unwrap();
    let phi = classical_map(&bsc(q));
    let point = broadcast_region_point(&[0.5, 0.5], &bsc(beta), &w, &phi).unwrap();
    let r1 = h2(star(beta, p1)) - h2(p1);
    let r02 = 1.0 - h2(star(star(beta, p1), q));
    let total = 1.0 - h2(p1);
    assert!((point.r1_bits - r1).abs() <= 1e-9);
    assert!((point.r0_plus_r2_bits - r02).abs() <= 1e-9);
    assert!((point.total_bits - total).abs() <= 1e-9);
    assert!((r1 - CASCADE_R1).abs() < 1e-15);
    assert!((r02 - CASCADE_R0_R2).abs() < 1e-15);
    assert!((total - BSC_CAPACITY_01).abs() < 1e-15);

    let mut rng = random::rng(77);
    for _ in 0..20 {
        let (p1, q, beta) = (rng.random_range(0.0..0.5), rng.random_range(0.0..0.5), rng.random_range(0.0..0.5));
        let u = rng.random_range(0.05..0.95);
        let w = CqChannel::classical(&bsc(p1)).unwrap();
        let point = broadcast_region_point(&[u, 1.0 - u], &bsc(beta), &w, &classical_map(&bsc(q))).unwrap();
        // (U, X, Y_1, Y_2) as a joint distribution.
        let mut p = Vec::new();
        for (ui, &pu) in [u, 1.0 - u].iter().enumerate() {
            for x in 0..2 {
                for y in 0..2 {
                    for z in 0..2 {
                        p.push(pu * bsc(beta)[ui][x] * bsc(p1)[x][y] * bsc(q)[y][z]);
                    }
                }
            }
        }
        let j = Joint { dims: vec![2, 2, 2, 2], p };
        assert!((point.r1_bits - j.cond_mutual_info(&[1], &[2], &[0])).abs() <= 1e-9);
        assert!((point.r0_plus_r2_bits - j.mutual_info(&[0], &[3])).abs() <= 1e-9);
        assert!((point.total_bits - j.mutual_info(&[1], &[2])).abs() <= 1e-9);
    }
}

#[test]
fn single_letter_converse_matches_classical_fano() {
    let mut rng = random::rng(11);
    for _ in 0..50 {
        let nx = rng.random_range(2..=4);
        let ny = rng.random_range(2..=4);
        let kernel = random_kernel(nx, ny, &mut rng);
        let mc = MultiwayChannel::classical(&[nx], &kernel).unwrap();
        let out = mc.output().clone();
        // Maximum-likelihood decoding, ties to the smaller message.
        let decode: Vec<usize> = (0..ny)
            .map(|y| (0..nx).fold(0, |best, x| if kernel[x][y] > kernel[best][y] { x } else { best }))
            .collect();
        let effects = (0..nx)
            .map(|x| (0..ny).filter(|&y| decode[y] == x).fold(out.zero(), |acc, y| acc.add(&out.block_unit(y)).unwrap()))
            .collect();
        let code = MultiwayCode {
            block_length: 1,
            encoders: vec![(0..nx).map(|x| vec![x]).collect()],
            decoders: vec![Povm::new(out.clone(), Label::range(nx), effects).unwrap()],
        };
        let report = converse_check(&mc, &code).unwrap();
        assert!(report.all_pass());
        let error = 1.0 - (0..ny).map(|y| kernel[decode[y]][y]).sum::<f64>() / nx as f64;
        let info = input_output(&vec![1.0 / nx as f64; nx], &kernel).mutual_info(&[0], &[1]);
        let rate = (nx as f64).log2();
        let e = &report.entries[0];
        assert!((e.error - error).abs() <= 1e-12);
        assert!((e.rate - rate).abs() <= 1e-15);
        assert!((e.fano - (1.0 - error) * rate).abs() <= 1e-12);
        for bound in [e.message_information, e.codeword_information, e.single_letter] {
            assert!((bound - (1.0 + info)).abs() <= 1e-9);
        }
    }
}
