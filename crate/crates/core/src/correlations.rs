//! Entropies, mutual information, classical correlation and discord.
//!
//! All logarithms are base 2. Discord is always taken with the measurement on
//! party A; use [`DensityMatrix::swap_parties`] for the other side.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::measurements::{apply_instrument, optimize_over_family, Instrument, InstrumentFamily, PostMeasurement};
use crate::optimize::{Direction, OptimizerConfig};
use crate::qstate::{DensityMatrix, Party};

pub const EIGEN_CUTOFF: f64 = 1e-12;
pub const SUPPORT_OVERLAP: f64 = 1e-9;
pub const PROBABILITY_CUTOFF: f64 = 1e-12;
pub const DISCORD_CLAMP: f64 = 1e-9;

fn entropy_of_spectrum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().filter(|&v| v > EIGEN_CUTOFF).map(|v| -v * v.log2()).sum()
}

/// Von Neumann entropy of a Hermitian PSD matrix (not necessarily normalized).
pub fn matrix_entropy(m: &CMatrix) -> f64 {
    entropy_of_spectrum(linalg::eigvalsh(m))
}

/// `−Σ λ log₂ λ`.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    matrix_entropy(rho.matrix())
}

/// `S(ρ‖τ) = tr ρ log ρ − tr ρ log τ`, or `+∞` when the support of ρ is not
/// contained in the support of τ.
pub fn relative_entropy(rho: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    if rho.dims() != tau.dims() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy between dims {:?} and {:?}",
            rho.dims(),
            tau.dims()
        )));
    }
    Ok(relative_entropy_matrices(rho.matrix(), tau.matrix()))
}

pub(crate) fn relative_entropy_matrices(rho: &CMatrix, tau: &CMatrix) -> f64 {
    let (r_vals, r_vecs) = linalg::eigh(rho);
    let (t_vals, t_vecs) = linalg::eigh(tau);
    let support: Vec<usize> = (0..r_vals.len()).filter(|&i| r_vals[i] > EIGEN_CUTOFF).collect();
    let kernel: Vec<usize> = (0..t_vals.len()).filter(|&j| t_vals[j] <= EIGEN_CUTOFF).collect();
    if !kernel.is_empty() && !support.is_empty() {
        let mut overlap = 0.0;
        for &j in &kernel {
            for &i in &support {
                overlap += t_vecs.column(j).dotc(&r_vecs.column(i)).norm_sqr();
            }
        }
        if overlap.sqrt() > SUPPORT_OVERLAP {
            return f64::INFINITY;
        }
    }
    let neg_entropy: f64 = support.iter().map(|&i| r_vals[i] * r_vals[i].log2()).sum();
    let mut cross = 0.0;
    for (j, &t) in t_vals.iter().enumerate() {
        if t <= EIGEN_CUTOFF {
            continue;
        }
        let col = t_vecs.column(j);
        let weight = (col.adjoint() * rho * col)[(0, 0)].re;
        cross += weight * t.log2();
    }
    (neg_entropy - cross).max(0.0)
}

/// `S(ρ_A) + S(ρ_B) − S(ρ_AB)`.
pub fn mutual_information(rho: &DensityMatrix) -> f64 {
    let s_a = entropy(&rho.partial_trace(Party::A));
    let s_b = entropy(&rho.partial_trace(Party::B));
    s_a + s_b - entropy(rho)
}

/// Outcome probabilities and normalized conditional states of B.
#[derive(Debug, Clone)]
pub struct ConditionalEnsemble {
    pub outcomes: Vec<(f64, DensityMatrix)>,
}

impl ConditionalEnsemble {
    /// `Σ_a p_a S(ρ_{B|a})`.
    pub fn average_entropy(&self) -> f64 {
        self.outcomes.iter().map(|(p, r)| p * entropy(r)).sum()
    }
}

/// `tr_A[(E ⊗ I) ρ]` without forming the lifted operator.
fn conditional_unnormalized(rho: &CMatrix, e: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    let mut out = linalg::zeros(d_b, d_b);
    for i in 0..d_a {
        for j in 0..d_a {
            let eij = e[(i, j)];
            if eij.norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..d_b {
                for b2 in 0..d_b {
                    out[(b, b2)] += eij * rho[(j * d_b + b, i * d_b + b2)];
                }
            }
        }
    }
    out
}

pub fn measure_and_condition(rho: &DensityMatrix, inst: &Instrument) -> Result<ConditionalEnsemble> {
    let (d_a, d_b) = rho.dims();
    if inst.acts_on() != Party::A || inst.in_dim() != d_a {
        return Err(Error::DimensionMismatch(format!(
            "conditioning needs an instrument on A of dimension {d_a}"
        )));
    }
    let outcomes = inst
        .povm()
        .iter()
        .filter_map(|e| {
            let sigma = conditional_unnormalized(rho.matrix(), e, d_a, d_b);
            let p = linalg::trace(&sigma).re;
            (p >= PROBABILITY_CUTOFF)
                .then(|| (p, DensityMatrix::from_trusted(sigma / Complex64::new(p, 0.0), (d_b, 1))))
        })
        .collect();
    Ok(ConditionalEnsemble { outcomes })
}

/// `S(B) − Σ_a p_a S(ρ_{B|a})` for one measurement on A.
pub fn holevo_objective(rho: &DensityMatrix, s_b: f64, inst: &Instrument) -> f64 {
    let (d_a, d_b) = rho.dims();
    let mut conditional = 0.0;
    for e in inst.povm() {
        let sigma = conditional_unnormalized(rho.matrix(), &e, d_a, d_b);
        let p = linalg::trace(&sigma).re;
        if p < PROBABILITY_CUTOFF {
            continue;
        }
        conditional += entropy_of_spectrum(linalg::eigvalsh(&sigma).into_iter().map(|v| v / p)) * p;
    }
    s_b - conditional
}

fn rank1_family(rho: &DensityMatrix, opt: &OptimizerConfig) -> InstrumentFamily {
    let dim = rho.dims().0;
    if opt.povm {
        InstrumentFamily::NaimarkPovm { dim }
    } else {
        InstrumentFamily::Projective { dim, rank: 1 }
    }
}

/// `J(B|A)`: the best Holevo-type information over rank-1 measurements on A,
/// with the maximizing instrument.
pub fn classical_correlation(rho: &DensityMatrix, opt: &OptimizerConfig) -> (f64, Instrument) {
    let s_b = entropy(&rho.partial_trace(Party::B));
    let objective = |inst: &Instrument| holevo_objective(rho, s_b, inst);
    let (inst, value) = optimize_over_family(&objective, rank1_family(rho, opt), opt, Direction::Maximize);
    (value, inst)
}

fn clamp_discord(d: f64) -> f64 {
    if (-DISCORD_CLAMP..0.0).contains(&d) {
        0.0
    } else {
        d
    }
}

/// `I(A:B) − J(B|A)`.
pub fn discord_oz(rho: &DensityMatrix, opt: &OptimizerConfig) -> f64 {
    let (j, _) = classical_correlation(rho, opt);
    clamp_discord(mutual_information(rho) - j)
}

/// Smallest loss of mutual information under a rank-1 measurement on A whose
/// outcome is kept in an orthogonal flag register.
pub fn discord_mi(rho: &DensityMatrix, opt: &OptimizerConfig) -> f64 {
    let i_before = mutual_information(rho);
    let objective = |inst: &Instrument| {
        let after = apply_instrument(rho, inst, PostMeasurement::Encode).expect("family matches state");
        i_before - mutual_information(&after)
    };
    let (_, value) = optimize_over_family(&objective, rank1_family(rho, opt), opt, Direction::Minimize);
    clamp_discord(value)
}
