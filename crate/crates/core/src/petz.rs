//! Petz recovery maps and the reversibility checks built on them.

use num_complex::Complex64;
use serde::Serialize;

use crate::correlations::{discord_oz, mutual_information, relative_entropy, EIGEN_CUTOFF};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::optimize::OptimizerConfig;
use crate::qstate::{DensityMatrix, Party, QuantumChannel, Subsystem};

pub const RECOVERY_COMPLETENESS: f64 = 1e-9;
pub const EQUALITY_TOL: f64 = 1e-7;
pub const RECOVERY_TOL: f64 = 1e-6;

/// Transpose-channel recovery `R_a = τ^{1/2} M_a† Λ(τ)^{-1/2}` for a reference
/// state `tau` on the channel's input space. The inverse square root is taken
/// on the support of `Λ(τ)`; inputs outside that support are replaced by τ.
pub fn petz_recovery(ch: &QuantumChannel, tau: &DensityMatrix) -> Result<QuantumChannel> {
    let d_in: usize = ch.in_dims().iter().product();
    let d_out: usize = ch.out_dims().iter().product();
    if tau.dim() != d_in {
        return Err(Error::DimensionMismatch(format!(
            "reference has dimension {}, channel input is {d_in}",
            tau.dim()
        )));
    }
    let mut image = linalg::zeros(d_out, d_out);
    for k in ch.kraus() {
        image += k * tau.matrix() * k.adjoint();
    }
    let (values, vectors) = linalg::eigh(&image);
    let inv_sqrt_diag = nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(if v > EIGEN_CUTOFF { v.powf(-0.5) } else { 0.0 }, 0.0)),
    );
    let inv_sqrt = &vectors * CMatrix::from_diagonal(&inv_sqrt_diag) * vectors.adjoint();
    let tau_sqrt = linalg::hermitian_function(tau.matrix(), |v| v.max(0.0).sqrt());

    let mut kraus: Vec<CMatrix> = ch.kraus().iter().map(|k| &tau_sqrt * k.adjoint() * &inv_sqrt).collect();

    let kernel: Vec<usize> = (0..values.len()).filter(|&i| values[i] <= EIGEN_CUTOFF).collect();
    if !kernel.is_empty() {
        let (t_vals, t_vecs) = linalg::eigh(tau.matrix());
        for &j in &kernel {
            let bra = vectors.column(j).adjoint();
            for (l, &t) in t_vals.iter().enumerate() {
                if t > EIGEN_CUTOFF {
                    kraus.push(t_vecs.column(l) * Complex64::new(t.sqrt(), 0.0) * &bra);
                }
            }
        }
    }

    let recovery = QuantumChannel::unchecked(ch.acts_on(), ch.out_dims().to_vec(), ch.in_dims().to_vec(), kraus)?;
    let deviation = recovery.completeness_deviation();
    if deviation > RECOVERY_COMPLETENESS {
        return Err(Error::SingularReference(format!("recovery completeness off by {deviation:e}")));
    }
    Ok(recovery)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PetzReport {
    pub rel_entropy_before: f64,
    pub rel_entropy_after: f64,
    pub equality_holds: bool,
    pub recovery_found: bool,
    /// Trace distances `(‖R(Λ(ρ)) − ρ‖, ‖R(Λ(τ)) − τ‖)`.
    pub recovery_errors: (f64, f64),
}

impl PetzReport {
    /// Equality of relative entropies co-occurs with recovery.
    pub fn iff_holds(&self) -> bool {
        self.equality_holds == self.recovery_found
    }
}

pub fn verify_lemma1(
    rho: &DensityMatrix,
    tau_a: &DensityMatrix,
    tau_b: &DensityMatrix,
    ch: &QuantumChannel,
    tol: f64,
) -> Result<PetzReport> {
    verify_lemma1_with(rho, tau_a, tau_b, ch, tol, RECOVERY_TOL)
}

/// Checks that `S(ρ‖τ) = S(Λ(ρ)‖Λ(τ))` exactly when the Petz map of Λ for the
/// reference `τ = τ_A ⊗ τ_B` restores both ρ and τ.
pub fn verify_lemma1_with(
    rho: &DensityMatrix,
    tau_a: &DensityMatrix,
    tau_b: &DensityMatrix,
    ch: &QuantumChannel,
    equality_tol: f64,
    recovery_tol: f64,
) -> Result<PetzReport> {
    let tau = DensityMatrix::from_trusted(tau_a.matrix().kronecker(tau_b.matrix()), (tau_a.dim(), tau_b.dim()));
    let before = relative_entropy(rho, &tau)?;
    if before.is_infinite() {
        return Err(Error::InfiniteRelativeEntropy);
    }
    let rho_out = rho.apply_channel(ch)?;
    let tau_out = tau.apply_channel(ch)?;
    let after = relative_entropy(&rho_out, &tau_out)?;

    let reference = match ch.acts_on() {
        Subsystem::A => tau_a.clone(),
        Subsystem::B => tau_b.clone(),
        Subsystem::AB => tau.clone(),
    };
    let recovery = petz_recovery(ch, &reference)?;
    let rho_back = rho_out.apply_channel(&recovery)?;
    let tau_back = tau_out.apply_channel(&recovery)?;
    let errors = (
        linalg::trace_distance(rho_back.matrix(), rho.matrix()),
        linalg::trace_distance(tau_back.matrix(), tau.matrix()),
    );
    Ok(PetzReport {
        rel_entropy_before: before,
        rel_entropy_after: after,
        equality_holds: (before - after).abs() < equality_tol,
        recovery_found: errors.0 < recovery_tol && errors.1 < recovery_tol,
        recovery_errors: errors,
    })
}

pub const THEOREM1_DISCORD_TOL: f64 = 1e-3;
pub const THEOREM1_MI_TOL: f64 = 1e-9;
pub const THEOREM1_BOUND_SLACK: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Record {
    pub d_i: f64,
    pub d_d: f64,
    /// `|ΔD| > 1e-3 ⇒ ΔI > 1e-9`.
    pub consistent: bool,
    /// `ΔD > 1e-3 ⇒ ΔI ≥ ΔD − 1e-4`.
    pub bound_ok: bool,
    /// Discord changed while the MI drop stayed below 1e-6.
    pub near_threshold: bool,
}

/// Changes of mutual information and discord under a local channel, with the
/// discord measured on `discord_side`.
pub fn theorem1_check(
    rho: &DensityMatrix,
    ch: &QuantumChannel,
    opt: &OptimizerConfig,
    discord_side: Party,
) -> Result<Theorem1Record> {
    if ch.acts_on() == Subsystem::AB {
        return Err(Error::InvalidInput("theorem1_check needs a local channel".into()));
    }
    let out = rho.apply_channel(ch)?;
    let discord = |s: &DensityMatrix| match discord_side {
        Party::A => discord_oz(s, opt),
        Party::B => discord_oz(&s.swap_parties(), opt),
    };
    let d_i = mutual_information(rho) - mutual_information(&out);
    let d_d = discord(rho) - discord(&out);
    let changed = d_d.abs() > THEOREM1_DISCORD_TOL;
    let near_threshold = changed && d_i < 1e-6;
    if near_threshold {
        log::info!("theorem 1 near threshold: dI = {d_i:e}, dD = {d_d:e}");
    }
    Ok(Theorem1Record {
        d_i,
        d_d,
        consistent: !changed || d_i > THEOREM1_MI_TOL,
        bound_ok: d_d <= THEOREM1_DISCORD_TOL || d_i >= d_d - THEOREM1_BOUND_SLACK,
        near_threshold,
    })
}
