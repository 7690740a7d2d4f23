//! Seeded random instances: states, POVMs, unitaries, subalgebras.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::algebra::{tensor, AlgebraElement, BlockAlgebra, CompatiblePair, Label, SubalgebraEmbedding};
use crate::linalg::{self, c, Mat, C64};
use crate::observable::Povm;
use crate::operation::random_isometry;
use crate::state::{make_separable, DensityState, SeparableState};
use crate::{check_compatible, tol, Result};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child generator for instance `index` of a seeded suite; independent of thread scheduling.
pub fn stream(seed: u64, index: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    Mat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Mat {
    random_isometry(d, d, rng)
}

/// Uniform point of the probability simplex.
pub fn distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Hilbert–Schmidt random state; every block gets a Ginibre `G G*`.
pub fn state<R: Rng + ?Sized>(alg: &BlockAlgebra, rng: &mut R) -> DensityState {
    let blocks: Vec<Mat> = alg
        .block_dims()
        .iter()
        .map(|&d| {
            let g = ginibre(d, d, rng);
            &g * g.adjoint()
        })
        .collect();
    normalize(alg, blocks)
}

/// Random state of a full algebra with the given rank.
pub fn state_with_rank<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityState {
    let g = ginibre(d, rank.clamp(1, d), rng);
    normalize(&BlockAlgebra::full(d), vec![&g * g.adjoint()])
}

fn normalize(alg: &BlockAlgebra, blocks: Vec<Mat>) -> DensityState {
    let tr: f64 = blocks.iter().map(|b| b.trace().re).sum();
    let blocks = blocks.into_iter().map(|b| linalg::hermitian_part(&(b * c(1.0 / tr, 0.0)))).collect();
    DensityState::from_blocks(alg.clone(), blocks).expect("Gram matrices are states after normalization")
}

/// Random pure state inside one uniformly chosen block.
pub fn pure_state<R: Rng + ?Sized>(alg: &BlockAlgebra, rng: &mut R) -> DensityState {
    let b = rng.random_range(0..alg.num_blocks());
    let o = alg.offsets()[b];
    let mut v = vec![c(0.0, 0.0); alg.rep_dim()];
    for slot in v.iter_mut().skip(o).take(alg.block_dims()[b]) {
        *slot = complex_gaussian(rng);
    }
    DensityState::pure(alg, &v).expect("nonzero Gaussian vector")
}

/// Random positive operator with spectrum in `[0, 1]`.
pub fn contraction<R: Rng + ?Sized>(alg: &BlockAlgebra, rng: &mut R) -> AlgebraElement {
    let blocks: Vec<Mat> = alg
        .block_dims()
        .iter()
        .map(|&d| {
            let u = haar_unitary(d, rng);
            let diag = Mat::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| c(rng.random::<f64>(), 0.0)));
            linalg::hermitian_part(&(&u * diag * u.adjoint()))
        })
        .collect();
    AlgebraElement::new(alg.clone(), blocks).expect("block shapes")
}

/// Random POVM with `n` outcomes, `X_j = S^{-1/2} G_j S^{-1/2}` for Gram matrices `G_j`.
pub fn povm<R: Rng + ?Sized>(alg: &BlockAlgebra, n: usize, rng: &mut R) -> Povm {
    let raw: Vec<Vec<Mat>> = (0..n)
        .map(|_| {
            alg.block_dims()
                .iter()
                .map(|&d| {
                    let g = ginibre(d, d, rng);
                    &g * g.adjoint()
                })
                .collect()
        })
        .collect();
    let inv_sqrt: Vec<Mat> = (0..alg.num_blocks())
        .map(|b| {
            let s = raw.iter().fold(linalg::zeros(alg.block_dims()[b], alg.block_dims()[b]), |acc, g| acc + &g[b]);
            linalg::hermitian_function(&s, |x| 1.0 / x.sqrt())
        })
        .collect();
    let effects = raw
        .into_iter()
        .map(|g| {
            let blocks = g
                .iter()
                .zip(&inv_sqrt)
                .map(|(gb, s)| linalg::hermitian_part(&(s * gb * s)))
                .collect();
            AlgebraElement::new(alg.clone(), blocks).expect("block shapes")
        })
        .collect();
    Povm::new(alg.clone(), Label::range(n), effects).expect("normalized Gram POVM")
}

/// Random orthonormal basis adapted to the blocks, as columns.
pub fn block_basis<R: Rng + ?Sized>(alg: &BlockAlgebra, rng: &mut R) -> Mat {
    let n = alg.rep_dim();
    let mut m = linalg::zeros(n, n);
    for (&o, &d) in alg.offsets().iter().zip(alg.block_dims()) {
        m.view_mut((o, o), (d, d)).copy_from(&haar_unitary(d, rng));
    }
    m
}

/// Projective measurement in a random block-adapted basis.
pub fn projective<R: Rng + ?Sized>(alg: &BlockAlgebra, rng: &mut R) -> Povm {
    let basis = block_basis(alg, rng);
    Povm::projective(alg, &basis, Label::range(alg.rep_dim())).expect("orthonormal basis")
}

/// Commutative subalgebra spanned by groups of projections onto basis columns.
/// `groups[k]` lists the columns merged into block `k`.
pub fn commutative_from_basis(parent: &BlockAlgebra, basis: &Mat, groups: &[Vec<usize>]) -> Result<SubalgebraEmbedding> {
    let projections = groups
        .iter()
        .map(|g| {
            let mut p = linalg::zeros(basis.nrows(), basis.nrows());
            for &k in g {
                let col: Vec<C64> = basis.column(k).iter().cloned().collect();
                p += linalg::outer(&col);
            }
            AlgebraElement::from_dense(parent.clone(), &p)
        })
        .collect::<Result<Vec<_>>>()?;
    SubalgebraEmbedding::from_projections(parent, projections)
}

/// Random partition of `0..n` into `k` nonempty groups.
pub fn partition<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let k = k.clamp(1, n);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        idx.swap(i, rng.random_range(0..=i));
    }
    let mut groups: Vec<Vec<usize>> = (0..k).map(|g| vec![idx[g]]).collect();
    for &i in &idx[k..] {
        groups[rng.random_range(0..k)].push(i);
    }
    groups
}

/// Maximal commutative subalgebra of a random block-adapted basis.
pub fn maximal_commutative<R: Rng + ?Sized>(parent: &BlockAlgebra, rng: &mut R) -> SubalgebraEmbedding {
    let basis = block_basis(parent, rng);
    let groups: Vec<Vec<usize>> = (0..parent.rep_dim()).map(|k| vec![k]).collect();
    commutative_from_basis(parent, &basis, &groups).expect("projections onto a basis")
}

/// `U ι(·) U*` for a unitary of a full parent algebra.
pub fn conjugate_embedding(e: &SubalgebraEmbedding, u: &Mat) -> Result<SubalgebraEmbedding> {
    let images = e
        .images()
        .iter()
        .map(|img| AlgebraElement::from_dense(e.parent().clone(), &(u * img.to_dense() * u.adjoint())))
        .collect::<Result<Vec<_>>>()?;
    SubalgebraEmbedding::new(e.domain().clone(), e.parent().clone(), images)
}

/// Random block algebra with dimensions in `1..=max_block` and at most `max_blocks` blocks.
pub fn block_algebra<R: Rng + ?Sized>(max_blocks: usize, max_block: usize, rng: &mut R) -> BlockAlgebra {
    let k = rng.random_range(1..=max_blocks);
    BlockAlgebra::new((0..k).map(|_| rng.random_range(1..=max_block)).collect()).expect("positive dims")
}

/// A compatible pair with its parent, drawn from several constructions:
/// rotated tensor factors, coarse-grainings of one basis, and a subalgebra of
/// one tensor factor against the other factor.
pub fn compatible_pair<R: Rng + ?Sized>(rng: &mut R) -> CompatiblePair {
    let kind = rng.random_range(0..4);
    let pair = match kind {
        0 => {
            let d1 = rng.random_range(1..=3);
            let d2 = rng.random_range(1..=3);
            let (t, pair) = tensor(&BlockAlgebra::full(d1), &BlockAlgebra::full(d2)).expect("tensor");
            let u = haar_unitary(t.algebra().rep_dim(), rng);
            let x = conjugate_embedding(pair.left(), &u).expect("rotation");
            let y = conjugate_embedding(pair.right(), &u).expect("rotation");
            check_compatible(&x, &y, tol::COMMUTATOR).expect("same parent")
        }
        1 => {
            let parent = block_algebra(2, 3, rng);
            let basis = block_basis(&parent, rng);
            let n = parent.rep_dim();
            let gx = partition(n, rng.random_range(1..=n), rng);
            let gy = partition(n, rng.random_range(1..=n), rng);
            let x = commutative_from_basis(&parent, &basis, &gx).expect("basis projections");
            let y = commutative_from_basis(&parent, &basis, &gy).expect("basis projections");
            check_compatible(&x, &y, tol::COMMUTATOR).expect("same parent")
        }
        2 => {
            let a = block_algebra(2, 2, rng);
            let b = block_algebra(2, 2, rng);
            let (_, pair) = tensor(&a, &b).expect("tensor");
            let basis = block_basis(&a, rng);
            let n = a.rep_dim();
            let g = partition(n, rng.random_range(1..=n), rng);
            let sub_emb = commutative_from_basis(&a, &basis, &g).expect("basis projections");
            let x = pair.left().compose(&sub_emb).expect("chain");
            let y = pair.right().clone();
            check_compatible(&x, &y, tol::COMMUTATOR).expect("same parent")
        }
        _ => {
            let d = rng.random_range(2..=4);
            let parent = BlockAlgebra::full(d);
            let x = maximal_commutative(&parent, rng);
            check_compatible(&x, &x, tol::COMMUTATOR).expect("same parent")
        }
    };
    pair.into_pair(tol::COMMUTATOR).expect("construction yields commuting subalgebras")
}

/// Random certificate-separable state on a product of full algebras.
pub fn separable<R: Rng + ?Sized>(dims: &[usize], terms: usize, rng: &mut R) -> SeparableState {
    let w = distribution(terms.max(1), rng);
    let parts = w
        .into_iter()
        .map(|wj| {
            let factors = dims
                .iter()
                .map(|&d| {
                    if rng.random_bool(0.5) {
                        pure_state(&BlockAlgebra::full(d), rng)
                    } else {
                        state(&BlockAlgebra::full(d), rng)
                    }
                })
                .collect();
            (wj, factors)
        })
        .collect();
    make_separable(parts).expect("weights from the simplex")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generators_repeat() {
        let a = BlockAlgebra::new(vec![2, 1]).unwrap();
        let s1 = state(&a, &mut rng(5));
        let s2 = state(&a, &mut rng(5));
        assert_eq!(s1, s2);
        let p1 = povm(&a, 3, &mut stream(5, 2));
        let p2 = povm(&a, 3, &mut stream(5, 2));
        assert_eq!(p1, p2);
    }

    #[test]
    fn haar_is_unitary() {
        let u = haar_unitary(4, &mut rng(1));
        assert!(linalg::frobenius(&(u.adjoint() * &u - linalg::identity(4))) < 1e-12);
    }

    #[test]
    fn compatible_pairs_are_valid() {
        let mut r = rng(9);
        for _ in 0..40 {
            let p = compatible_pair(&mut r);
            assert!(p.max_commutator_norm() <= tol::COMMUTATOR);
        }
    }

    #[test]
    fn partition_covers() {
        let g = partition(7, 3, &mut rng(2));
        let mut all: Vec<usize> = g.concat();
        all.sort();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
        assert!(g.iter().all(|x| !x.is_empty()));
    }
}
