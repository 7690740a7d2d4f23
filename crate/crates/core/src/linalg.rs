//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> Mat {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn trace(m: &Mat) -> C64 {
    m.trace()
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &Mat, b: &Mat) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest entry modulus of `A - A*`.
pub fn hermiticity_defect(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &Mat) -> Mat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn frobenius(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn op_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
///
/// Column `k` of the returned matrix is the eigenvector for `values[k]`.
pub fn eigh(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `V f(Λ) V*` for a Hermitian argument.
pub fn hermitian_function(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (values, vectors) = eigh(m);
    let n = values.len();
    let mut scaled = vectors.clone();
    for k in 0..n {
        let fk = f(values[k]);
        for i in 0..n {
            scaled[(i, k)] *= fk;
        }
    }
    &scaled * vectors.adjoint()
}

/// Positive square root; eigenvalues are clamped at zero first.
pub fn psd_sqrt(m: &Mat) -> Mat {
    hermitian_function(m, |x| x.max(0.0).sqrt())
}

/// `-x log2 x` with the convention `0 log 0 = 0`.
#[inline]
pub fn neg_xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Shannon entropy (bits) of a nonnegative weight vector.
pub fn entropy_bits(weights: &[f64]) -> f64 {
    weights.iter().map(|&w| neg_xlog2x(w)).sum()
}

/// `out[(i, j)] = m[(perm[i], perm[j])]`.
pub fn permute(m: &Mat, perm: &[usize]) -> Mat {
    let n = perm.len();
    Mat::from_fn(n, n, |i, j| m[(perm[i], perm[j])])
}

/// Inverse of [`permute`]: `out[(perm[i], perm[j])] = m[(i, j)]`.
pub fn unpermute(m: &Mat, perm: &[usize]) -> Mat {
    let n = perm.len();
    let mut out = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = m[(i, j)];
        }
    }
    out
}

/// Rank-one projector `|v><v|`.
pub fn outer(v: &[C64]) -> Mat {
    let n = v.len();
    Mat::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_reconstructs_and_sorts() {
        let m = Mat::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.0, 1.0),
                c(0.5, 0.0),
                c(0.0, -1.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.5, 0.0),
                c(0.0, 0.0),
                c(-1.0, 0.0),
            ],
        );
        let (vals, vecs) = eigh(&m);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let d = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
            3,
            vals.iter().map(|&x| c(x, 0.0)),
        ));
        let back = &vecs * d * vecs.adjoint();
        assert!(frobenius(&(back - &m)) < 1e-12);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = Mat::from_row_slice(2, 2, &[c(0.75, 0.0), c(0.25, 0.0), c(0.25, 0.0), c(0.25, 0.0)]);
        let s = psd_sqrt(&m);
        assert!(frobenius(&(&s * &s - &m)) < 1e-12);
    }

    #[test]
    fn permute_roundtrip() {
        let m = Mat::from_fn(3, 3, |i, j| c((3 * i + j) as f64, 0.0));
        let p = [2, 0, 1];
        assert_eq!(unpermute(&permute(&m, &p), &p), m);
    }

    #[test]
    fn entropy_conventions() {
        assert_eq!(neg_xlog2x(0.0), 0.0);
        assert!((entropy_bits(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
    }
}
