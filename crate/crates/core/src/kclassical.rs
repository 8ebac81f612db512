//! K-classicality: fixed-point search through the commutant of a state's
//! correlation operators, and K-discord quantities.
//!
//! A local projective dephasing `Σ_k (P_k ⊗ I) ρ (P_k ⊗ I)` leaves ρ unchanged
//! exactly when every `P_k` commutes with the operators
//! `T_jk = tr_B[(I ⊗ |k⟩⟨j|) ρ]`. The spectral projectors of a generic Hermitian
//! element of that commutant are the finest such decomposition.

use serde::{Deserialize, Serialize};

use crate::correlations::{discord_oz, mutual_information, relative_entropy};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::measurements::{
    apply_instrument, membership, optimize_over_class, optimize_over_family, Instrument, InstrumentFamily,
    MeasurementClass, PostMeasurement,
};
use crate::optimize::{Direction, OptimizerConfig};
use crate::qstate::{derive_seed, rng_from_seed, DensityMatrix, Party};

pub const DEFAULT_TOL: f64 = 1e-7;
const NULL_RELATIVE: f64 = 1e-9;
const EIGEN_GAP: f64 = 1e-8;
const FIXED_POINT_TOL: f64 = 1e-9;
const MAX_RETRIES: usize = 5;
const COMMUTANT_SEED: u64 = 0xC033_07A7;
const MODE_DISAGREEMENT: f64 = 1e-6;

/// `I(ρ) − I(Λ_A(ρ))` with the outcome discarded.
pub fn mi_drop(rho: &DensityMatrix, inst: &Instrument) -> Result<f64> {
    mi_drop_with(rho, inst, PostMeasurement::Average)
}

pub fn mi_drop_with(rho: &DensityMatrix, inst: &Instrument, mode: PostMeasurement) -> Result<f64> {
    let after = apply_instrument(rho, inst, mode)?;
    Ok(mutual_information(rho) - mutual_information(&after))
}

/// The operators `T_jk` with entries `ρ_{(a,j),(a',k)}`; the set is closed under `†`.
fn correlation_operators(rho: &DensityMatrix) -> Vec<CMatrix> {
    let (d_a, d_b) = rho.dims();
    let m = rho.matrix();
    let mut ops = Vec::with_capacity(d_b * d_b);
    for j in 0..d_b {
        for k in 0..d_b {
            ops.push(CMatrix::from_fn(d_a, d_a, |a, a2| m[(a * d_b + j, a2 * d_b + k)]));
        }
    }
    ops
}

/// Basis of `{H : [H, T] = 0 ∀ T}` as matrices.
fn commutant_basis(ops: &[CMatrix], d: usize) -> Vec<CMatrix> {
    let id = linalg::identity(d);
    let n = d * d;
    let mut system = linalg::zeros(ops.len() * n, n);
    for (i, t) in ops.iter().enumerate() {
        // Column-major vec: vec(HT) = (Tᵀ ⊗ I) vec(H), vec(TH) = (I ⊗ T) vec(H).
        let block = t.transpose().kronecker(&id) - id.kronecker(t);
        system.view_mut((i * n, 0), (n, n)).copy_from(&block);
    }
    let svd = system.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    // Scale by the operators too: when every T is nearly a multiple of the
    // identity the largest singular value is itself rounding noise.
    let scale = ops.iter().map(linalg::frobenius).fold(0.0, f64::max);
    let largest = svd.singular_values.iter().copied().fold(scale, f64::max);
    let cutoff = NULL_RELATIVE * largest.max(f64::MIN_POSITIVE);
    let mut basis = Vec::new();
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            let v = v_t.row(idx).adjoint();
            basis.push(CMatrix::from_fn(d, d, |r, c| v[c * d + r]));
        }
    }
    basis
}

fn random_commutant_element(basis: &[CMatrix], seed: u64) -> CMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rng_from_seed(seed);
    let d = basis[0].nrows();
    let mut h = linalg::zeros(d, d);
    let i = num_complex::Complex64::new(0.0, 1.0);
    for n in basis {
        let g1: f64 = StandardNormal.sample(&mut rng);
        let g2: f64 = StandardNormal.sample(&mut rng);
        h += (n + n.adjoint()) * num_complex::Complex64::new(g1, 0.0);
        h += (n - n.adjoint()) * (i * g2);
    }
    let norm = linalg::frobenius(&h);
    if norm > 0.0 {
        h / num_complex::Complex64::new(norm, 0.0)
    } else {
        linalg::identity(d)
    }
}

fn spectral_projectors(h: &CMatrix) -> Vec<CMatrix> {
    let (values, vectors) = linalg::eigh(h);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if v - values[*g.last().unwrap()] <= EIGEN_GAP => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let mut p = linalg::zeros(h.nrows(), h.nrows());
            for i in g {
                p += linalg::projector(&vectors.column(i).into_owned());
            }
            p
        })
        .collect()
}

fn dephase(rho: &DensityMatrix, projectors: &[CMatrix]) -> CMatrix {
    let id = linalg::identity(rho.dims().1);
    let mut out = linalg::zeros(rho.dim(), rho.dim());
    for p in projectors {
        let lifted = p.kronecker(&id);
        out += &lifted * rho.matrix() * &lifted;
    }
    out
}

/// Finest orthogonal decomposition `{P_k}` of A with `Σ_k (P_k⊗I) ρ (P_k⊗I) = ρ`.
pub fn commutant_blocks(rho: &DensityMatrix) -> Result<Vec<CMatrix>> {
    let d_a = rho.dims().0;
    let basis = commutant_basis(&correlation_operators(rho), d_a);
    if basis.is_empty() {
        // The identity always commutes; an empty null space means the solver lost it.
        return Err(Error::VerificationFailed(f64::NAN));
    }
    let mut residual = f64::NAN;
    for attempt in 0..=MAX_RETRIES {
        let h = random_commutant_element(&basis, derive_seed(COMMUTANT_SEED, attempt as u64));
        let blocks = spectral_projectors(&h);
        residual = linalg::max_abs_diff(&dephase(rho, &blocks), rho.matrix());
        if residual <= FIXED_POINT_TOL {
            return Ok(blocks);
        }
    }
    Err(Error::VerificationFailed(residual))
}

fn block_rank(p: &CMatrix) -> usize {
    linalg::trace(p).re.round() as usize
}

/// Splits block indices into groups whose ranks each sum to `r`.
fn group_by_rank(ranks: &[usize], r: usize) -> Option<Vec<Vec<usize>>> {
    let total: usize = ranks.iter().sum();
    if r == 0 || !total.is_multiple_of(r) {
        return None;
    }
    let mut order: Vec<usize> = (0..ranks.len()).collect();
    order.sort_by(|&a, &b| ranks[b].cmp(&ranks[a]));
    let mut groups: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new()); total / r];

    fn place(i: usize, order: &[usize], ranks: &[usize], r: usize, groups: &mut Vec<(usize, Vec<usize>)>) -> bool {
        if i == order.len() {
            return groups.iter().all(|(s, _)| *s == r);
        }
        let block = order[i];
        for g in 0..groups.len() {
            if groups[g].0 + ranks[block] > r {
                continue;
            }
            // Empty groups are interchangeable; trying one is enough.
            let was_empty = groups[g].0 == 0;
            groups[g].0 += ranks[block];
            groups[g].1.push(block);
            if place(i + 1, order, ranks, r, groups) {
                return true;
            }
            groups[g].1.pop();
            groups[g].0 -= ranks[block];
            if was_empty {
                break;
            }
        }
        false
    }

    place(0, &order, ranks, r, &mut groups).then(|| groups.into_iter().map(|(_, g)| g).collect())
}

fn sum_projectors(blocks: &[CMatrix], idx: &[usize]) -> CMatrix {
    let d = blocks[0].nrows();
    idx.iter().fold(linalg::zeros(d, d), |acc, &i| acc + &blocks[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictMethod {
    FixedPointBlocks,
    OptimizerSearch,
}

#[derive(Debug, Clone)]
pub struct KClassicalVerdict {
    pub is_classical: bool,
    pub witness: Option<Instrument>,
    pub mi_before: f64,
    /// Mutual information after the witness with outcomes discarded.
    pub mi_after: f64,
    /// Mutual information after the witness with outcomes kept in a flag register.
    pub mi_after_encoded: Option<f64>,
    pub method: VerdictMethod,
    /// Ranks of the commutant blocks, when the block method ran.
    pub block_ranks: Vec<usize>,
}

pub fn is_k_classical(rho: &DensityMatrix, cls: MeasurementClass, tol: f64) -> KClassicalVerdict {
    is_k_classical_with(rho, cls, tol, &OptimizerConfig::default())
}

/// K-classicality test; `opt` drives the discord cross-check and the optimizer fallback.
pub fn is_k_classical_with(
    rho: &DensityMatrix,
    cls: MeasurementClass,
    tol: f64,
    opt: &OptimizerConfig,
) -> KClassicalVerdict {
    let mi_before = mutual_information(rho);
    match commutant_blocks(rho) {
        Ok(blocks) => block_verdict(rho, cls, tol, opt, blocks, mi_before),
        Err(err) => {
            log::warn!("commutant block method failed ({err}); falling back to optimizer search");
            optimizer_verdict(rho, cls, tol, opt, mi_before)
        }
    }
}

fn block_verdict(
    rho: &DensityMatrix,
    cls: MeasurementClass,
    tol: f64,
    opt: &OptimizerConfig,
    blocks: Vec<CMatrix>,
    mi_before: f64,
) -> KClassicalVerdict {
    let ranks: Vec<usize> = blocks.iter().map(block_rank).collect();
    let grouping: Option<Vec<Vec<usize>>> = match cls.normalized() {
        MeasurementClass::MinOutcomes(n) => (blocks.len() >= n).then(|| {
            let mut g: Vec<Vec<usize>> = (0..n - 1).map(|k| vec![k]).collect();
            g.push((n - 1..blocks.len()).collect());
            g
        }),
        MeasurementClass::Rank1Projective => (ranks.iter().all(|&r| r == 1)
            && discord_oz(rho, opt) < tol)
            .then(|| (0..blocks.len()).map(|k| vec![k]).collect()),
        MeasurementClass::RankRProjective(r) => {
            group_by_rank(&ranks, r).filter(|g| g.len() >= 2)
        }
        MeasurementClass::All => unreachable!("normalized"),
    };
    let witness = grouping.map(|groups| {
        let projectors = groups.iter().map(|g| sum_projectors(&blocks, g)).collect();
        Instrument::projective(Party::A, projectors).expect("commutant blocks are complete")
    });
    finish(rho, cls, tol, witness, mi_before, VerdictMethod::FixedPointBlocks, ranks)
}

fn optimizer_verdict(
    rho: &DensityMatrix,
    cls: MeasurementClass,
    tol: f64,
    opt: &OptimizerConfig,
    mi_before: f64,
) -> KClassicalVerdict {
    let objective = |inst: &Instrument| mi_drop(rho, inst).unwrap_or(f64::INFINITY);
    let witness = optimize_over_class(&objective, cls, rho.dims().0, opt, Direction::Minimize)
        .ok()
        .map(|(inst, _)| inst);
    finish(rho, cls, tol, witness, mi_before, VerdictMethod::OptimizerSearch, Vec::new())
}

fn finish(
    rho: &DensityMatrix,
    cls: MeasurementClass,
    tol: f64,
    witness: Option<Instrument>,
    mi_before: f64,
    method: VerdictMethod,
    block_ranks: Vec<usize>,
) -> KClassicalVerdict {
    let Some(inst) = witness else {
        return KClassicalVerdict {
            is_classical: false,
            witness: None,
            mi_before,
            mi_after: mi_before,
            mi_after_encoded: None,
            method,
            block_ranks,
        };
    };
    let after = apply_instrument(rho, &inst, PostMeasurement::Average).expect("witness acts on A");
    let mi_after = mutual_information(&after);
    let encoded = apply_instrument(rho, &inst, PostMeasurement::Encode).expect("witness acts on A");
    let mi_after_encoded = mutual_information(&encoded);
    if (mi_after - mi_after_encoded).abs() > MODE_DISAGREEMENT {
        log::info!("average-mode MI {mi_after} and encoded-mode MI {mi_after_encoded} disagree");
    }
    let is_classical = mi_before - mi_after < tol && membership(&inst, cls);
    KClassicalVerdict {
        is_classical,
        witness: is_classical.then_some(inst),
        mi_before,
        mi_after,
        mi_after_encoded: Some(mi_after_encoded),
        method,
        block_ranks,
    }
}

#[derive(Debug, Clone)]
pub struct KDiscord {
    pub value: f64,
    pub witness: Instrument,
    /// The class admits measurements arbitrarily close to trivial, so the
    /// infimum is expected to vanish for every state.
    pub vanishing_class: bool,
}

/// `inf_{Λ ∈ S^K} I(ρ) − I(Λ_A(ρ))`.
pub fn k_discord(rho: &DensityMatrix, cls: MeasurementClass, opt: &OptimizerConfig) -> Result<KDiscord> {
    let objective = |inst: &Instrument| mi_drop(rho, inst).unwrap_or(f64::INFINITY);
    let (witness, value) = optimize_over_class(&objective, cls, rho.dims().0, opt, Direction::Minimize)?;
    let vanishing_class = matches!(cls.normalized(), MeasurementClass::MinOutcomes(_));
    if vanishing_class {
        log::warn!("k-discord over {cls} is unnormalized and tends to zero for every state");
    }
    Ok(KDiscord { value: value.max(0.0), witness, vanishing_class })
}

/// MI drop under the weak two-outcome measurement `(I ± εX̂)/2` for each ε.
pub fn weak_measurement_sweep(rho: &DensityMatrix, epsilons: &[f64]) -> Result<Vec<(f64, f64)>> {
    epsilons
        .iter()
        .map(|&eps| {
            let inst = Instrument::weak(Party::A, rho.dims().0, eps)?;
            Ok((eps, mi_drop(rho, &inst)?))
        })
        .collect()
}

/// `S(ρ ‖ I/d) − S(Λ_A(ρ) ‖ Λ_A(I/d))`.
pub fn thermal_k_discord(rho: &DensityMatrix, inst: &Instrument) -> Result<f64> {
    let mixed = DensityMatrix::maximally_mixed(rho.dims());
    let before = relative_entropy(rho, &mixed)?;
    let rho_after = apply_instrument(rho, inst, PostMeasurement::Average)?;
    let mixed_after = apply_instrument(&mixed, inst, PostMeasurement::Average)?;
    let after = relative_entropy(&rho_after, &mixed_after)?;
    Ok(before - after)
}

/// `min_{Π} S(ρ ‖ Σ_a (Π_a ⊗ I) ρ (Π_a ⊗ I))` over rank-1 projective bases on A.
/// This restricts the classical set to dephasings of ρ itself.
pub fn rel_entropy_to_classical(rho: &DensityMatrix, opt: &OptimizerConfig) -> f64 {
    let objective = |inst: &Instrument| {
        let dephased = apply_instrument(rho, inst, PostMeasurement::Average).expect("family matches state");
        relative_entropy(rho, &dephased).expect("same dims")
    };
    let family = InstrumentFamily::Projective { dim: rho.dims().0, rank: 1 };
    let (_, value) = optimize_over_family(&objective, family, opt, Direction::Minimize);
    value.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_density, QuantumChannel};

    fn qutrit_example() -> DensityMatrix {
        let phi = DensityMatrix::max_entangled(2, (3, 3)).unwrap();
        let two = DensityMatrix::basis_state(2, 2, (3, 3)).unwrap();
        DensityMatrix::mixture(&[(0.5, &phi), (0.5, &two)]).unwrap()
    }

    /// `Σ_a p_a |u_a⟩⟨u_a| ⊗ ρ_a` in a random basis.
    fn classical_state(d_a: usize, d_b: usize, seed: u64) -> (DensityMatrix, CMatrix) {
        let mut rng = rng_from_seed(seed);
        let u = linalg::haar_unitary(d_a, &mut rng);
        let weights: Vec<f64> = (0..d_a).map(|k| 1.0 + k as f64).collect();
        let total: f64 = weights.iter().sum();
        let mut m = linalg::zeros(d_a * d_b, d_a * d_b);
        for (a, w) in weights.iter().enumerate() {
            let sigma = random_density((d_b, 1), d_b, derive_seed(seed, a as u64)).unwrap();
            let p = linalg::projector(&u.column(a).into_owned());
            m += p.kronecker(sigma.matrix()) * num_complex::Complex64::new(w / total, 0.0);
        }
        (DensityMatrix::new(m, (d_a, d_b)).unwrap(), u)
    }

    #[test]
    fn mi_drop_examples() {
        let (rho, u) = classical_state(2, 2, 1);
        assert!(mi_drop(&rho, &Instrument::from_basis(Party::A, &u)).unwrap().abs() < 1e-10);
        let bell = DensityMatrix::max_entangled(2, (2, 2)).unwrap();
        assert!((mi_drop(&bell, &Instrument::computational(Party::A, 2)).unwrap() - 1.0).abs() < 1e-12);
        assert!(mi_drop(&bell, &Instrument::trivial(Party::A, 2)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rounding_level_correlations_give_full_commutant() {
        let mut rng = rng_from_seed(9);
        let u = linalg::haar_unitary(2, &mut rng).kronecker(&linalg::haar_unitary(2, &mut rng));
        let rho = DensityMatrix::maximally_mixed((2, 2)).conjugate(&u).unwrap();
        let blocks = commutant_blocks(&rho).unwrap();
        assert_eq!(blocks.len(), 2);
        assert!(is_k_classical(&rho, MeasurementClass::All, DEFAULT_TOL).is_classical);
    }

    #[test]
    fn classical_state_blocks_are_its_basis() {
        let (rho, u) = classical_state(3, 2, 4);
        let blocks = commutant_blocks(&rho).unwrap();
        assert_eq!(blocks.len(), 3);
        for a in 0..3 {
            let p = linalg::projector(&u.column(a).into_owned());
            assert!(blocks.iter().any(|b| linalg::max_abs_diff(b, &p) < 1e-8));
        }
    }

    #[test]
    fn qutrit_example_has_two_blocks() {
        let blocks = commutant_blocks(&qutrit_example()).unwrap();
        assert_eq!(blocks.len(), 2);
        let mut p01 = linalg::zeros(3, 3);
        p01[(0, 0)] = linalg::ONE;
        p01[(1, 1)] = linalg::ONE;
        let mut p2 = linalg::zeros(3, 3);
        p2[(2, 2)] = linalg::ONE;
        assert!(blocks.iter().any(|b| linalg::max_abs_diff(b, &p01) < 1e-9));
        assert!(blocks.iter().any(|b| linalg::max_abs_diff(b, &p2) < 1e-9));
    }

    #[test]
    fn bell_state_has_single_block() {
        let bell = DensityMatrix::max_entangled(2, (2, 2)).unwrap();
        let blocks = commutant_blocks(&bell).unwrap();
        assert_eq!(blocks.len(), 1);
        assert!(linalg::max_abs_diff(&blocks[0], &linalg::identity(2)) < 1e-10);
    }

    #[test]
    fn blocks_are_complete_orthogonal_and_fix_the_state() {
        for seed in 0..10 {
            let rho = if seed % 2 == 0 { classical_state(2, 3, seed).0 } else { random_density((3, 2), 6, seed).unwrap() };
            let blocks = commutant_blocks(&rho).unwrap();
            let d = rho.dims().0;
            let sum = blocks.iter().fold(linalg::zeros(d, d), |acc, b| acc + b);
            assert!(linalg::max_abs_diff(&sum, &linalg::identity(d)) < 1e-10);
            for (i, a) in blocks.iter().enumerate() {
                for b in &blocks[i + 1..] {
                    assert!(linalg::frobenius(&(a * b)) < 1e-10);
                }
            }
            assert!(linalg::max_abs_diff(&dephase(&rho, &blocks), rho.matrix()) < 1e-9);
        }
    }

    #[test]
    fn verdict_examples() {
        let v = is_k_classical(&qutrit_example(), MeasurementClass::All, DEFAULT_TOL);
        assert!(v.is_classical);
        assert_eq!(v.method, VerdictMethod::FixedPointBlocks);
        assert!(qutrit_example().is_npt().npt);

        let bell = DensityMatrix::max_entangled(2, (2, 2)).unwrap();
        let v = is_k_classical(&bell, MeasurementClass::All, DEFAULT_TOL);
        assert!(!v.is_classical && v.witness.is_none());

        let (rho, _) = classical_state(2, 2, 8);
        let v = is_k_classical(&rho, MeasurementClass::Rank1Projective, DEFAULT_TOL);
        assert!(v.is_classical);
        assert!(membership(v.witness.as_ref().unwrap(), MeasurementClass::Rank1Projective));
    }

    #[test]
    fn qutrit_example_is_not_rank1_classical() {
        let v = is_k_classical(&qutrit_example(), MeasurementClass::Rank1Projective, DEFAULT_TOL);
        assert!(!v.is_classical);
        assert_eq!(v.block_ranks.iter().sum::<usize>(), 3);
    }

    #[test]
    fn rank_r_grouping() {
        // Blocks of ranks 1,1,2 on A = C^4 group into two rank-2 projectors.
        let (cl, _) = classical_state(2, 2, 3);
        let bell = DensityMatrix::max_entangled(2, (2, 2)).unwrap();
        let mut m = linalg::zeros(16, 16);
        // A = C^2 ⊕ C^2: classical part on levels {0,1}, Bell part on {2,3}.
        for (part, offset) in [(&cl, 0usize), (&bell, 2usize)] {
            for r in 0..4 {
                for c in 0..4 {
                    let (a, b) = (r / 2 + offset, r % 2);
                    let (a2, b2) = (c / 2 + offset, c % 2);
                    m[(a * 4 + b, a2 * 4 + b2)] += part.matrix()[(r, c)] * 0.5;
                }
            }
        }
        let rho = DensityMatrix::new(m, (4, 4)).unwrap();
        let v = is_k_classical(&rho, MeasurementClass::RankRProjective(2), DEFAULT_TOL);
        assert!(v.is_classical, "{:?}", v.block_ranks);
        assert!(membership(v.witness.as_ref().unwrap(), MeasurementClass::RankRProjective(2)));
        assert!(!is_k_classical(&rho, MeasurementClass::Rank1Projective, DEFAULT_TOL).is_classical);
        assert_eq!(group_by_rank(&[2, 1, 1], 2).map(|g| g.len()), Some(2));
        assert_eq!(group_by_rank(&[3, 1], 2), None);
    }

    #[test]
    fn k_discord_examples() {
        let opt = OptimizerConfig::default();
        let (rho, _) = classical_state(2, 2, 12);
        assert!(k_discord(&rho, MeasurementClass::Rank1Projective, &opt).unwrap().value < 1e-8);

        let bell = DensityMatrix::max_entangled(2, (2, 2)).unwrap();
        let kd = k_discord(&bell, MeasurementClass::All, &opt).unwrap();
        assert!(kd.vanishing_class);
        assert!(kd.value < 1e-3, "{}", kd.value);
        let sweep = weak_measurement_sweep(&bell, &[0.5, 0.1, 0.01]).unwrap();
        assert!(sweep[0].1 > sweep[1].1 && sweep[1].1 > sweep[2].1);
    }

    #[test]
    fn thermal_examples() {
        let rho = random_density((2, 2), 4, 3).unwrap();
        assert!(thermal_k_discord(&rho, &Instrument::trivial(Party::A, 2)).unwrap().abs() < 1e-10);

        let (cl, u) = classical_state(2, 2, 5);
        assert!(thermal_k_discord(&cl, &Instrument::from_basis(Party::A, &u)).unwrap().abs() < 1e-9);

        let bell = DensityMatrix::max_entangled(2, (2, 2)).unwrap();
        let v = thermal_k_discord(&bell, &Instrument::computational(Party::A, 2)).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn relative_entropy_to_classical_examples() {
        let opt = OptimizerConfig::default();
        let (cl, _) = classical_state(2, 2, 6);
        assert!(rel_entropy_to_classical(&cl, &opt) < 1e-8);
        let prod = random_density((2, 1), 2, 1).unwrap().tensor(&random_density((2, 1), 2, 2).unwrap());
        assert!(rel_entropy_to_classical(&prod, &opt) < 1e-8);
        let bell = DensityMatrix::max_entangled(2, (2, 2)).unwrap();
        assert!((rel_entropy_to_classical(&bell, &opt) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dephasing_channel_keeps_classical_state() {
        let (rho, u) = classical_state(2, 2, 9);
        let projectors = (0..2).map(|a| linalg::projector(&u.column(a).into_owned())).collect();
        let ch = QuantumChannel::dephasing(crate::Subsystem::A, vec![2], projectors).unwrap();
        let out = rho.apply_channel(&ch).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);
    }
}
