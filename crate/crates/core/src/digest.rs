use sha2::{Digest, Sha256};

use crate::algebra::{AlgebraElement, BlockAlgebra, SubalgebraEmbedding};
use crate::linalg::Mat;
use crate::operation::Operation;
use crate::state::DensityState;

/// Short content hash identifying the numeric inputs of a verdict.
///
/// Floats are hashed by bit pattern, so identical inputs give identical digests.
#[derive(Clone)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new(tag: &str) -> Self {
        let mut h = Sha256::new();
        h.update(tag.as_bytes());
        Self(h)
    }

    pub fn f64(mut self, x: f64) -> Self {
        self.0.update(x.to_bits().to_le_bytes());
        self
    }

    pub fn usize(mut self, x: usize) -> Self {
        self.0.update((x as u64).to_le_bytes());
        self
    }

    pub fn floats(mut self, xs: &[f64]) -> Self {
        self = self.usize(xs.len());
        for &x in xs {
            self = self.f64(x);
        }
        self
    }

    pub fn algebra(mut self, a: &BlockAlgebra) -> Self {
        self = self.usize(a.num_blocks());
        for &d in a.block_dims() {
            self = self.usize(d);
        }
        self
    }

    pub fn matrix(mut self, m: &Mat) -> Self {
        self = self.usize(m.nrows()).usize(m.ncols());
        for z in m.iter() {
            self = self.f64(z.re).f64(z.im);
        }
        self
    }

    pub fn element(mut self, e: &AlgebraElement) -> Self {
        self = self.algebra(e.algebra());
        for b in e.blocks() {
            self = self.matrix(b);
        }
        self
    }

    pub fn state(self, s: &DensityState) -> Self {
        self.element(s.as_element())
    }

    pub fn embedding(mut self, e: &SubalgebraEmbedding) -> Self {
        self = self.algebra(e.domain());
        for img in e.images() {
            self = self.element(img);
        }
        self
    }

    /// Hashes the images of the source matrix units.
    pub fn operation(mut self, op: &dyn Operation) -> Self {
        self = self.algebra(op.source()).algebra(op.target());
        for u in op.source().units() {
            match op.apply(&op.source().unit(u)) {
                Ok(img) => self = self.element(&img),
                Err(_) => self = self.usize(usize::MAX),
            }
        }
        self
    }

    pub fn finish(self) -> String {
        let out = self.0.finalize();
        hex::encode(&out[..8])
    }
}
