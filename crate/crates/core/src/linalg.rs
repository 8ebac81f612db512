//! Dense complex matrix helpers shared by every module.
//!
//! All matrices are `nalgebra::DMatrix<Complex64>`. Kronecker products follow the
//! convention that the left factor is the slow index, so `a.kronecker(&b)` places
//! subsystem A on the outer blocks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Builds a complex matrix from real entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| Complex64::new(entries[i * cols + j], 0.0))
}

/// `(M + M†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entrywise modulus of `M - M†`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues (ascending) and eigenvectors (as columns) of a Hermitian matrix.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, unsorted.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    if n == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![mean - radius, mean + radius];
    }
    hermitize(m).symmetric_eigenvalues().iter().copied().collect()
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let diag = DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(f(v), 0.0)));
    &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint()
}

/// `exp(iH)` for Hermitian `H`, exactly unitary up to rounding.
pub fn exp_i_hermitian(h: &CMatrix) -> CMatrix {
    let (values, vectors) = eigh(h);
    let diag = DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::from_polar(1.0, v)));
    &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint()
}

/// Hermitian `d × d` matrix from `d²` reals: the diagonal first, then the
/// real and imaginary parts of each strictly-upper entry in row order.
pub fn hermitian_from_params(params: &[f64], d: usize) -> CMatrix {
    assert_eq!(params.len(), d * d);
    let mut h = zeros(d, d);
    for i in 0..d {
        h[(i, i)] = Complex64::new(params[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = Complex64::new(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Polar isometry `G (G†G)^{-1/2}` of a `rows × cols` complex matrix given as
/// interleaved (re, im) pairs in row-major order. Directions where `G†G` is
/// numerically singular are dropped from the inverse square root.
pub fn isometry_from_params(params: &[f64], rows: usize, cols: usize) -> CMatrix {
    assert_eq!(params.len(), 2 * rows * cols);
    let g = CMatrix::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        Complex64::new(params[k], params[k + 1])
    });
    polar_isometry(&g)
}

pub fn polar_isometry(g: &CMatrix) -> CMatrix {
    let gram = g.adjoint() * g;
    g * hermitian_function(&gram, |v| if v > 1e-14 { v.powf(-0.5) } else { 0.0 })
}

/// Partial transpose on the second tensor factor of a `(dA·dB)`-dimensional matrix.
pub fn partial_transpose_b(m: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_a * d_b, d_a * d_b, |r, c| {
        let (a, b) = (r / d_b, r % d_b);
        let (a2, b2) = (c / d_b, c % d_b);
        m[(a * d_b + b2, a2 * d_b + b)]
    })
}

/// `tr_B` of a matrix on `A ⊗ B`.
pub fn trace_out_b(m: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_a, d_a, |i, j| (0..d_b).map(|b| m[(i * d_b + b, j * d_b + b)]).sum())
}

/// `tr_A` of a matrix on `A ⊗ B`.
pub fn trace_out_a(m: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_b, d_b, |i, j| (0..d_a).map(|a| m[(a * d_b + i, a * d_b + j)]).sum())
}

/// Operator swapping the two tensor factors: `|a b⟩ ↦ |b a⟩`.
pub fn swap_operator(d_a: usize, d_b: usize) -> CMatrix {
    let n = d_a * d_b;
    let mut s = zeros(n, n);
    for a in 0..d_a {
        for b in 0..d_b {
            s[(b * d_a + a, a * d_b + b)] = ONE;
        }
    }
    s
}

/// `½ ‖a − b‖₁` for Hermitian arguments.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * eigvalsh(&(a - b)).iter().map(|v| v.abs()).sum::<f64>()
}

/// Numerical rank via singular values.
pub fn rank(m: &CMatrix, tol: f64) -> usize {
    m.clone().singular_values().iter().filter(|&&s| s > tol).count()
}

pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Isometry with orthonormal columns via QR of a complex Gaussian matrix,
/// with the phase of `R`'s diagonal removed so the result is Haar distributed.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols);
    let g = random_gaussian(rows, cols, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q.columns(0, cols).into_owned();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..rows {
            out[(i, j)] *= phase;
        }
    }
    out
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    random_isometry(d, d, rng)
}

/// `|ψ⟩⟨ψ|` for a column vector.
pub fn projector(psi: &DVector<Complex64>) -> CMatrix {
    psi * psi.adjoint()
}

/// Computational basis vector `|i⟩` in dimension `d`.
pub fn ket(d: usize, i: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(d);
    v[i] = ONE;
    v
}

pub fn pauli_x() -> CMatrix {
    real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn hadamard() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    real_matrix(2, 2, &[s, s, s, -s])
}

pub fn cnot() -> CMatrix {
    real_matrix(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
}
