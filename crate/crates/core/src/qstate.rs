//! Bipartite density matrices and quantum channels.
//!
//! Subsystem A is always the slow (left) tensor index. Single-system states
//! carry dims `(d, 1)`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

pub const TOL_HERMITIAN: f64 = 1e-10;
pub const TOL_NEGATIVE: f64 = 1e-10;
pub const TOL_TRACE: f64 = 1e-8;
pub const TOL_COMPLETENESS: f64 = 1e-10;

/// One of the two parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

/// Where a channel acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
    AB,
}

impl From<Party> for Subsystem {
    fn from(p: Party) -> Self {
        match p {
            Party::A => Subsystem::A,
            Party::B => Subsystem::B,
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix on `A ⊗ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: (usize, usize),
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates `entries` and repairs floating-point drift: eigenvalues in
    /// `[-1e-10, 0)` are clipped to zero and the trace is renormalized.
    pub fn new(entries: CMatrix, dims: (usize, usize)) -> Result<Self> {
        check_square(&entries, dims)?;
        let deviation = linalg::hermiticity_deviation(&entries);
        if deviation > TOL_HERMITIAN {
            return Err(Error::NotHermitian(deviation));
        }
        let mut matrix = linalg::hermitize(&entries);
        let (values, vectors) = linalg::eigh(&matrix);
        let min = values.first().copied().unwrap_or(0.0);
        if min < -TOL_NEGATIVE {
            return Err(Error::NotPositive(min));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > TOL_TRACE {
            return Err(Error::BadTrace(tr));
        }
        if min < 0.0 {
            let clipped = DVector::from_iterator(
                values.len(),
                values.iter().map(|&v| Complex64::new(v.max(0.0), 0.0)),
            );
            matrix = &vectors * CMatrix::from_diagonal(&clipped) * vectors.adjoint();
        }
        let tr = linalg::trace(&matrix).re;
        Ok(Self { dims, matrix: matrix / Complex64::new(tr, 0.0) })
    }

    /// Wraps a matrix produced by a trace-preserving map of a valid state.
    /// Only Hermiticity and the trace are touched up.
    pub(crate) fn from_trusted(matrix: CMatrix, dims: (usize, usize)) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.0 * dims.1);
        let matrix = linalg::hermitize(&matrix);
        let tr = linalg::trace(&matrix).re;
        Self { dims, matrix: matrix / Complex64::new(tr, 0.0) }
    }

    pub fn pure(psi: &DVector<Complex64>, dims: (usize, usize)) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::BadTrace(0.0));
        }
        Self::new(linalg::projector(&(psi / Complex64::new(norm, 0.0))), dims)
    }

    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let d = dims.0 * dims.1;
        Self { dims, matrix: linalg::identity(d) / Complex64::new(d as f64, 0.0) }
    }

    pub fn diagonal(probabilities: &[f64], dims: (usize, usize)) -> Result<Self> {
        let diag = DVector::from_iterator(
            probabilities.len(),
            probabilities.iter().map(|&p| Complex64::new(p, 0.0)),
        );
        Self::new(CMatrix::from_diagonal(&diag), dims)
    }

    /// `|i j⟩⟨i j|`.
    pub fn basis_state(i: usize, j: usize, dims: (usize, usize)) -> Result<Self> {
        Self::pure(&linalg::ket(dims.0 * dims.1, i * dims.1 + j), dims)
    }

    /// `(|00⟩ + |11⟩ + … )/√k` on `d_a × d_b`, summed over the first `k` levels.
    pub fn max_entangled(k: usize, dims: (usize, usize)) -> Result<Self> {
        let mut psi = DVector::zeros(dims.0 * dims.1);
        for i in 0..k {
            psi[i * dims.1 + i] = linalg::ONE;
        }
        Self::pure(&psi, dims)
    }

    /// `Σ w_i ρ_i` for weights summing to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidInput("empty mixture".into()))?.1;
        let mut acc = linalg::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if rho.dims != first.dims {
                return Err(Error::DimensionMismatch("mixture components differ in dims".into()));
            }
            acc += rho.matrix() * Complex64::new(*w, 0.0);
        }
        Self::new(acc, first.dims)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    /// Kronecker product; the result has dims `(dim(a), dim(b))`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            dims: (self.dim(), other.dim()),
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// Reduced state on the kept party, with dims `(d, 1)`.
    pub fn partial_trace(&self, keep: Party) -> DensityMatrix {
        let (d_a, d_b) = self.dims;
        match keep {
            Party::A => DensityMatrix { dims: (d_a, 1), matrix: linalg::trace_out_b(&self.matrix, d_a, d_b) },
            Party::B => DensityMatrix { dims: (d_b, 1), matrix: linalg::trace_out_a(&self.matrix, d_a, d_b) },
        }
    }

    /// `ρ_A ⊗ ρ_B` with the original bipartite dims.
    pub fn marginal_product(&self) -> DensityMatrix {
        let rho_a = self.partial_trace(Party::A);
        let rho_b = self.partial_trace(Party::B);
        DensityMatrix { dims: self.dims, matrix: rho_a.matrix.kronecker(&rho_b.matrix) }
    }

    /// Whether `ρ = ρ_A ⊗ ρ_B` entrywise within `tol`.
    pub fn is_product(&self, tol: f64) -> bool {
        linalg::max_abs_diff(&self.matrix, &self.marginal_product().matrix) < tol
    }

    /// Same state with the parties exchanged.
    pub fn swap_parties(&self) -> DensityMatrix {
        let s = linalg::swap_operator(self.dims.0, self.dims.1);
        DensityMatrix::from_trusted(&s * &self.matrix * s.adjoint(), (self.dims.1, self.dims.0))
    }

    /// `U ρ U†` for a global unitary.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state is {}x{}",
                u.nrows(),
                u.ncols(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(DensityMatrix::from_trusted(u * &self.matrix * u.adjoint(), self.dims))
    }

    pub fn apply_channel(&self, ch: &QuantumChannel) -> Result<DensityMatrix> {
        let (kraus, out_dims) = ch.lift(self.dims)?;
        let mut out = linalg::zeros(out_dims.0 * out_dims.1, out_dims.0 * out_dims.1);
        for k in &kraus {
            out += k * &self.matrix * k.adjoint();
        }
        Ok(DensityMatrix::from_trusted(out, out_dims))
    }

    pub fn partial_transpose(&self) -> CMatrix {
        linalg::partial_transpose_b(&self.matrix, self.dims.0, self.dims.1)
    }

    /// Peres test on the partial transpose over B. A negative eigenvalue
    /// certifies entanglement; the converse does not hold beyond 2×2 and 2×3.
    pub fn is_npt(&self) -> NptWitness {
        let min_eigenvalue = linalg::eigvalsh(&self.partial_transpose()).into_iter().fold(f64::INFINITY, f64::min);
        NptWitness { npt: min_eigenvalue < -TOL_NEGATIVE, min_eigenvalue }
    }

    /// `(1 − N) ρ + N I/d`.
    pub fn noisy(&self, noise: f64) -> Result<DensityMatrix> {
        if !(0.0..=1.0).contains(&noise) {
            return Err(Error::NOutOfRange(noise));
        }
        let d = self.dim() as f64;
        let m = &self.matrix * Complex64::new(1.0 - noise, 0.0)
            + linalg::identity(self.dim()) * Complex64::new(noise / d, 0.0);
        Ok(DensityMatrix { dims: self.dims, matrix: m })
    }
}

fn check_square(m: &CMatrix, dims: (usize, usize)) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    if dims.0 == 0 || dims.1 == 0 || dims.0 * dims.1 != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "dims ({}, {}) do not match matrix size {}",
            dims.0,
            dims.1,
            m.nrows()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NptWitness {
    pub npt: bool,
    pub min_eigenvalue: f64,
}

/// `(1 − N) ρ0 + N I/d`.
pub fn noisy_family(rho0: &DensityMatrix, noise: f64) -> Result<DensityMatrix> {
    rho0.noisy(noise)
}

/// A CPTP map in Kraus form. For `A`/`B` channels `in_dims`/`out_dims` hold
/// one entry; for `AB` channels they hold the bipartite pair.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    acts_on: Subsystem,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(acts_on: Subsystem, in_dims: Vec<usize>, out_dims: Vec<usize>, kraus: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::unchecked(acts_on, in_dims, out_dims, kraus)?;
        let deviation = ch.completeness_deviation();
        if deviation > TOL_COMPLETENESS {
            return Err(Error::NotComplete(deviation));
        }
        Ok(ch)
    }

    /// Shape checks only; completeness is left to the caller.
    pub(crate) fn unchecked(
        acts_on: Subsystem,
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
        kraus: Vec<CMatrix>,
    ) -> Result<Self> {
        let expected = if acts_on == Subsystem::AB { 2 } else { 1 };
        if in_dims.len() != expected || out_dims.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{acts_on:?} channel needs {expected} entries in in_dims/out_dims"
            )));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidInput("channel has no Kraus operators".into()));
        }
        let rows: usize = out_dims.iter().product();
        let cols: usize = in_dims.iter().product();
        if kraus.iter().any(|k| k.nrows() != rows || k.ncols() != cols) {
            return Err(Error::DimensionMismatch(format!("every Kraus operator must be {rows}x{cols}")));
        }
        Ok(Self { acts_on, in_dims, out_dims, kraus })
    }

    /// Single-system channel acting on `party` (or a global channel when given
    /// `Subsystem::AB` with bipartite dims) from a list of square or
    /// rectangular Kraus operators.
    pub fn local(party: Party, kraus: Vec<CMatrix>) -> Result<Self> {
        let (rows, cols) = kraus.first().map(|k| k.shape()).unwrap_or((0, 0));
        Self::new(party.into(), vec![cols], vec![rows], kraus)
    }

    pub fn global(dims: (usize, usize), out_dims: (usize, usize), kraus: Vec<CMatrix>) -> Result<Self> {
        Self::new(Subsystem::AB, vec![dims.0, dims.1], vec![out_dims.0, out_dims.1], kraus)
    }

    pub fn unitary(acts_on: Subsystem, dims: Vec<usize>, u: CMatrix) -> Result<Self> {
        Self::new(acts_on, dims.clone(), dims, vec![u])
    }

    pub fn identity(acts_on: Subsystem, dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        Self { acts_on, in_dims: dims.clone(), out_dims: dims, kraus: vec![linalg::identity(d)] }
    }

    /// Full dephasing in the computational basis of one party.
    pub fn computational_dephasing(party: Party, d: usize) -> Self {
        let kraus = (0..d).map(|i| linalg::projector(&linalg::ket(d, i))).collect();
        Self { acts_on: party.into(), in_dims: vec![d], out_dims: vec![d], kraus }
    }

    /// Dephasing with respect to a complete set of orthogonal projectors.
    pub fn dephasing(acts_on: Subsystem, dims: Vec<usize>, projectors: Vec<CMatrix>) -> Result<Self> {
        Self::new(acts_on, dims.clone(), dims, projectors)
    }

    /// Trace-and-replace map `X ↦ tr(X) σ` on the full input space.
    pub fn replacement(acts_on: Subsystem, in_dims: Vec<usize>, sigma: &DensityMatrix) -> Result<Self> {
        let out_dims = match acts_on {
            Subsystem::AB => vec![sigma.dims.0, sigma.dims.1],
            _ => vec![sigma.dim()],
        };
        let d_in: usize = in_dims.iter().product();
        let (values, vectors) = linalg::eigh(sigma.matrix());
        let mut kraus = Vec::new();
        for (j, &s) in values.iter().enumerate() {
            if s <= 0.0 {
                continue;
            }
            let col = vectors.column(j).into_owned() * Complex64::new(s.sqrt(), 0.0);
            for k in 0..d_in {
                kraus.push(&col * linalg::ket(d_in, k).adjoint());
            }
        }
        Self::new(acts_on, in_dims, out_dims, kraus)
    }

    /// `Λ_A ⊗ Λ_B` as one global channel.
    pub fn local_product(a: &QuantumChannel, b: &QuantumChannel) -> Result<Self> {
        if a.acts_on != Subsystem::A || b.acts_on != Subsystem::B {
            return Err(Error::InvalidInput("local_product expects an A channel and a B channel".into()));
        }
        let kraus = a.kraus.iter().flat_map(|ka| b.kraus.iter().map(move |kb| ka.kronecker(kb))).collect();
        Ok(Self {
            acts_on: Subsystem::AB,
            in_dims: vec![a.in_dims[0], b.in_dims[0]],
            out_dims: vec![a.out_dims[0], b.out_dims[0]],
            kraus,
        })
    }

    pub fn acts_on(&self) -> Subsystem {
        self.acts_on
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn completeness_deviation(&self) -> f64 {
        let d: usize = self.in_dims.iter().product();
        let mut sum = linalg::zeros(d, d);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        linalg::max_abs_diff(&sum, &linalg::identity(d))
    }

    /// Kraus operators on the full bipartite space of a state with `dims`,
    /// padded with identities, together with the output dims.
    pub fn lift(&self, dims: (usize, usize)) -> Result<(Vec<CMatrix>, (usize, usize))> {
        let mismatch = |what: &str| {
            Error::DimensionMismatch(format!(
                "channel on {:?} expects {} {:?}, state dims are ({}, {})",
                self.acts_on, what, self.in_dims, dims.0, dims.1
            ))
        };
        match self.acts_on {
            Subsystem::A => {
                if self.in_dims[0] != dims.0 {
                    return Err(mismatch("d_A ="));
                }
                let id = linalg::identity(dims.1);
                Ok((self.kraus.iter().map(|k| k.kronecker(&id)).collect(), (self.out_dims[0], dims.1)))
            }
            Subsystem::B => {
                if self.in_dims[0] != dims.1 {
                    return Err(mismatch("d_B ="));
                }
                let id = linalg::identity(dims.0);
                Ok((self.kraus.iter().map(|k| id.kronecker(k)).collect(), (dims.0, self.out_dims[0])))
            }
            Subsystem::AB => {
                if self.in_dims != [dims.0, dims.1] {
                    return Err(mismatch("dims"));
                }
                Ok((self.kraus.clone(), (self.out_dims[0], self.out_dims[1])))
            }
        }
    }
}

/// Splitmix64-style mixing of a master seed with an index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random state `G G† / tr(G G†)` with `G` a `d × rank` complex Gaussian matrix.
pub fn random_density(dims: (usize, usize), rank: usize, seed: u64) -> Result<DensityMatrix> {
    let d = dims.0 * dims.1;
    if rank == 0 || rank > d {
        return Err(Error::BadRank(format!("rank {rank} not in 1..={d}")));
    }
    let mut rng = rng_from_seed(seed);
    let g = linalg::random_gaussian(d, rank, &mut rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    Ok(DensityMatrix::from_trusted(m / Complex64::new(tr, 0.0), dims))
}

/// Random channel on one party: a Haar isometry `d_in → n_kraus·d_out` cut
/// into `n_kraus` blocks of `d_out` rows.
pub fn random_local_channel(
    party: Party,
    dims: (usize, usize),
    n_kraus: usize,
    seed: u64,
) -> Result<QuantumChannel> {
    let (d_in, d_out) = dims;
    if n_kraus == 0 || n_kraus * d_out < d_in {
        return Err(Error::BadRank(format!(
            "{n_kraus} Kraus operators of shape {d_out}x{d_in} cannot be complete"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let v = linalg::random_isometry(n_kraus * d_out, d_in, &mut rng);
    let kraus = (0..n_kraus).map(|k| v.rows(k * d_out, d_out).into_owned()).collect();
    QuantumChannel::new(party.into(), vec![d_in], vec![d_out], kraus)
}
