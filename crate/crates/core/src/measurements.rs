//! Instruments, measurement classes and post-measurement states.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::optimize::{multistart, Direction, OptimizerConfig};
use crate::qstate::{rng_from_seed, DensityMatrix, Party, QuantumChannel, TOL_COMPLETENESS};

const TOL_PROJECTOR: f64 = 1e-9;
const TOL_PROPORTIONAL: f64 = 1e-9;
const TOL_INDEPENDENT: f64 = 1e-9;

/// A measurement on one party: Kraus operators grouped by classical outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    acts_on: Party,
    groups: Vec<Vec<CMatrix>>,
}

impl Instrument {
    pub fn new(acts_on: Party, groups: Vec<Vec<CMatrix>>) -> Result<Self> {
        let inst = Self::unchecked(acts_on, groups)?;
        let deviation = inst.completeness_deviation();
        if deviation > TOL_COMPLETENESS {
            return Err(Error::NotComplete(deviation));
        }
        Ok(inst)
    }

    pub(crate) fn unchecked(acts_on: Party, groups: Vec<Vec<CMatrix>>) -> Result<Self> {
        let shape = groups
            .iter()
            .flatten()
            .next()
            .map(|k| k.shape())
            .ok_or_else(|| Error::InvalidInput("instrument has no Kraus operators".into()))?;
        if groups.iter().any(|g| g.is_empty()) {
            return Err(Error::InvalidInput("instrument outcome without Kraus operators".into()));
        }
        if groups.iter().flatten().any(|k| k.shape() != shape) {
            return Err(Error::DimensionMismatch("instrument Kraus operators differ in shape".into()));
        }
        Ok(Self { acts_on, groups })
    }

    /// One outcome per projector, with the projector as its Kraus operator.
    pub fn projective(acts_on: Party, projectors: Vec<CMatrix>) -> Result<Self> {
        Self::new(acts_on, projectors.into_iter().map(|p| vec![p]).collect())
    }

    /// Measurement in the computational basis.
    pub fn computational(acts_on: Party, d: usize) -> Self {
        let groups = (0..d).map(|i| vec![linalg::projector(&linalg::ket(d, i))]).collect();
        Self { acts_on, groups }
    }

    /// Rank-1 projective measurement onto the columns of a unitary.
    pub fn from_basis(acts_on: Party, u: &CMatrix) -> Self {
        let groups = (0..u.ncols()).map(|j| vec![linalg::projector(&u.column(j).into_owned())]).collect();
        Self { acts_on, groups }
    }

    /// The single-outcome instrument `{I}`.
    pub fn trivial(acts_on: Party, d: usize) -> Self {
        Self { acts_on, groups: vec![vec![linalg::identity(d)]] }
    }

    /// Two-outcome Lüders measurement with `E± = (I ± εX̂)/2`, where `X̂` swaps
    /// levels 0 and 1 and fixes the rest.
    pub fn weak(acts_on: Party, d: usize, epsilon: f64) -> Result<Self> {
        if d < 2 || !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidInput(format!("weak measurement needs d >= 2 and ε in [0,1], got d={d}, ε={epsilon}")));
        }
        let mut x = linalg::identity(d);
        x[(0, 0)] = linalg::ZERO;
        x[(1, 1)] = linalg::ZERO;
        x[(0, 1)] = linalg::ONE;
        x[(1, 0)] = linalg::ONE;
        let half = Complex64::new(0.5, 0.0);
        let eps = Complex64::new(epsilon, 0.0);
        let plus = (linalg::identity(d) + &x * eps) * half;
        let minus = (linalg::identity(d) - &x * eps) * half;
        let sqrt = |m: &CMatrix| linalg::hermitian_function(m, |v| v.max(0.0).sqrt());
        Self::new(acts_on, vec![vec![sqrt(&plus)], vec![sqrt(&minus)]])
    }

    pub fn acts_on(&self) -> Party {
        self.acts_on
    }

    pub fn with_party(mut self, party: Party) -> Self {
        self.acts_on = party;
        self
    }

    pub fn groups(&self) -> &[Vec<CMatrix>] {
        &self.groups
    }

    pub fn n_outcomes(&self) -> usize {
        self.groups.len()
    }

    pub fn in_dim(&self) -> usize {
        self.groups[0][0].ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.groups[0][0].nrows()
    }

    /// `E_a = Σ_{k∈a} M_k† M_k`.
    pub fn povm(&self) -> Vec<CMatrix> {
        self.groups
            .iter()
            .map(|g| {
                let mut e = linalg::zeros(self.in_dim(), self.in_dim());
                for k in g {
                    e += k.adjoint() * k;
                }
                e
            })
            .collect()
    }

    pub fn completeness_deviation(&self) -> f64 {
        let d = self.in_dim();
        let mut sum = linalg::zeros(d, d);
        for e in self.povm() {
            sum += e;
        }
        linalg::max_abs_diff(&sum, &linalg::identity(d))
    }

    /// At least one POVM element is not proportional to the identity.
    pub fn is_nontrivial(&self) -> bool {
        let d = self.in_dim();
        self.povm().iter().any(|e| {
            let scale = linalg::trace(e) / Complex64::new(d as f64, 0.0);
            linalg::frobenius(&(e - linalg::identity(d) * scale)) > TOL_PROPORTIONAL
        })
    }

    /// Number of linearly independent POVM elements.
    pub fn independent_outcomes(&self) -> usize {
        let d = self.in_dim();
        let povm = self.povm();
        let stacked = CMatrix::from_fn(d * d, povm.len(), |r, c| povm[c][(r / d, r % d)]);
        linalg::rank(&stacked, TOL_INDEPENDENT)
    }

    /// The instrument with outcomes forgotten.
    pub fn as_channel(&self) -> QuantumChannel {
        let kraus: Vec<CMatrix> = self.groups.iter().flatten().cloned().collect();
        QuantumChannel::unchecked(self.acts_on.into(), vec![self.in_dim()], vec![self.out_dim()], kraus)
            .expect("instrument shapes were validated")
    }
}

/// The allowed set of measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementClass {
    Rank1Projective,
    RankRProjective(usize),
    MinOutcomes(usize),
    All,
}

impl MeasurementClass {
    pub fn validate(self) -> Result<Self> {
        match self {
            MeasurementClass::RankRProjective(0) => {
                Err(Error::UnrealizableClass("rank r must be at least 1".into()))
            }
            MeasurementClass::MinOutcomes(n) if n < 2 => {
                Err(Error::UnrealizableClass("a measurement has at least 2 outcomes".into()))
            }
            c => Ok(c),
        }
    }

    /// `All` is `MinOutcomes(2)`; `RankRProjective(1)` is `Rank1Projective`.
    pub fn normalized(self) -> Self {
        match self {
            MeasurementClass::All => MeasurementClass::MinOutcomes(2),
            MeasurementClass::RankRProjective(1) => MeasurementClass::Rank1Projective,
            c => c,
        }
    }
}

impl std::fmt::Display for MeasurementClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeasurementClass::Rank1Projective => write!(f, "rank1"),
            MeasurementClass::RankRProjective(r) => write!(f, "rankr:{r}"),
            MeasurementClass::MinOutcomes(n) => write!(f, "minout:{n}"),
            MeasurementClass::All => write!(f, "all"),
        }
    }
}

impl std::str::FromStr for MeasurementClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown measurement class '{s}'"));
        let cls = match s {
            "rank1" => MeasurementClass::Rank1Projective,
            "all" => MeasurementClass::All,
            _ => {
                let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
                let n: usize = arg.parse().map_err(|_| bad())?;
                match kind {
                    "rankr" => MeasurementClass::RankRProjective(n),
                    "minout" => MeasurementClass::MinOutcomes(n),
                    _ => return Err(bad()),
                }
            }
        };
        cls.validate()
    }
}

/// Eigenvalue test for an orthogonal projector; returns its rank.
fn projector_rank(e: &CMatrix) -> Option<usize> {
    if linalg::hermiticity_deviation(e) > TOL_PROJECTOR {
        return None;
    }
    let mut rank = 0;
    for v in linalg::eigvalsh(e) {
        if (v - 1.0).abs() < TOL_PROJECTOR {
            rank += 1;
        } else if v.abs() >= TOL_PROJECTOR {
            return None;
        }
    }
    Some(rank)
}

fn mutually_orthogonal(povm: &[CMatrix]) -> bool {
    for (i, a) in povm.iter().enumerate() {
        for b in &povm[i + 1..] {
            if linalg::frobenius(&(a * b)) > TOL_PROJECTOR {
                return false;
            }
        }
    }
    true
}

/// Whether `inst` belongs to the measurement set `cls`.
pub fn membership(inst: &Instrument, cls: MeasurementClass) -> bool {
    let povm = inst.povm();
    match cls.normalized() {
        MeasurementClass::Rank1Projective => {
            povm.iter().all(|e| projector_rank(e) == Some(1)) && mutually_orthogonal(&povm)
        }
        MeasurementClass::RankRProjective(r) => {
            inst.is_nontrivial()
                && povm.iter().all(|e| projector_rank(e) == Some(r))
                && mutually_orthogonal(&povm)
        }
        MeasurementClass::MinOutcomes(n) => inst.is_nontrivial() && inst.independent_outcomes() >= n,
        MeasurementClass::All => unreachable!("normalized"),
    }
}

/// How the classical outcome is kept after measuring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PostMeasurement {
    /// `Σ_a M_a ρ M_a†`, outcomes discarded.
    Average,
    /// `Σ_a |a⟩⟨a| ⊗ M_a ρ M_a†` with the flag prepended to the measured party.
    Encode,
}

pub fn apply_instrument(rho: &DensityMatrix, inst: &Instrument, mode: PostMeasurement) -> Result<DensityMatrix> {
    let (d_a, d_b) = rho.dims();
    let measured = match inst.acts_on() {
        Party::A => d_a,
        Party::B => d_b,
    };
    if inst.in_dim() != measured {
        return Err(Error::DimensionMismatch(format!(
            "instrument on {:?} expects dimension {}, state dims are ({d_a}, {d_b})",
            inst.acts_on(),
            inst.in_dim()
        )));
    }
    match mode {
        PostMeasurement::Average => rho.apply_channel(&inst.as_channel()),
        PostMeasurement::Encode => Ok(encode(rho, inst)),
    }
}

fn encode(rho: &DensityMatrix, inst: &Instrument) -> DensityMatrix {
    let (d_a, d_b) = rho.dims();
    let n = inst.n_outcomes();
    let d_out = inst.out_dim();
    let (out_dims, id) = match inst.acts_on() {
        Party::A => ((n * d_out, d_b), linalg::identity(d_b)),
        Party::B => ((d_a, n * d_out), linalg::identity(d_a)),
    };
    let total = out_dims.0 * out_dims.1;
    let mut out = linalg::zeros(total, total);
    for (a, group) in inst.groups().iter().enumerate() {
        let mut block = linalg::zeros(d_out * (total / (n * d_out)), d_out * (total / (n * d_out)));
        for k in group {
            let lifted = match inst.acts_on() {
                Party::A => k.kronecker(&id),
                Party::B => id.kronecker(k),
            };
            block += &lifted * rho.matrix() * lifted.adjoint();
        }
        // Map an index of the unflagged output space to the flagged one.
        let place = |i: usize| match inst.acts_on() {
            Party::A => a * d_out * d_b + i,
            Party::B => {
                let (x, b) = (i / d_out, i % d_out);
                x * n * d_out + a * d_out + b
            }
        };
        for i in 0..block.nrows() {
            for j in 0..block.ncols() {
                out[(place(i), place(j))] += block[(i, j)];
            }
        }
    }
    DensityMatrix::from_trusted(out, out_dims)
}

/// Draws a random member of `cls` at dimension `dim`.
pub fn sample_instrument(cls: MeasurementClass, dim: usize, seed: u64) -> Result<Instrument> {
    let mut rng = rng_from_seed(seed);
    match cls.validate()?.normalized() {
        MeasurementClass::Rank1Projective => Ok(Instrument::from_basis(Party::A, &linalg::haar_unitary(dim, &mut rng))),
        MeasurementClass::RankRProjective(r) => {
            check_rank_realizable(r, dim)?;
            let u = linalg::haar_unitary(dim, &mut rng);
            Ok(grouped_projective(&u, r))
        }
        MeasurementClass::MinOutcomes(n) => {
            check_outcomes_realizable(n, dim)?;
            let v = linalg::random_isometry(n * dim, dim, &mut rng);
            Instrument::unchecked(Party::A, split_blocks(&v, n, dim))
        }
        MeasurementClass::All => unreachable!("normalized"),
    }
}

fn check_rank_realizable(r: usize, dim: usize) -> Result<()> {
    if !dim.is_multiple_of(r) || r >= dim {
        return Err(Error::UnrealizableClass(format!(
            "rank-{r} projective measurement needs r to divide d = {dim} with at least two outcomes"
        )));
    }
    Ok(())
}

fn check_outcomes_realizable(n: usize, dim: usize) -> Result<()> {
    if n > dim * dim {
        return Err(Error::UnrealizableClass(format!(
            "at most {} linearly independent POVM elements exist in dimension {dim}",
            dim * dim
        )));
    }
    Ok(())
}

fn grouped_projective(u: &CMatrix, r: usize) -> Instrument {
    let d = u.nrows();
    let groups = (0..d / r)
        .map(|k| {
            let cols = u.columns(k * r, r);
            vec![cols * cols.adjoint()]
        })
        .collect();
    Instrument { acts_on: Party::A, groups }
}

fn split_blocks(v: &CMatrix, n: usize, dim: usize) -> Vec<Vec<CMatrix>> {
    (0..n).map(|k| vec![v.rows(k * dim, dim).into_owned()]).collect()
}

/// A smooth parametrization of a family of instruments on party A.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrumentFamily {
    /// `{U P_k U†}` with `U = exp(iH)` and `P_k` blocks of `rank` basis vectors.
    Projective { dim: usize, rank: usize },
    /// Rank-1 POVMs from projective measurements on `A ⊗ ancilla`, ancilla of dimension `dim`.
    NaimarkPovm { dim: usize },
    /// General `outcomes`-outcome instruments from a polar-normalized isometry.
    Kraus { dim: usize, outcomes: usize },
}

impl InstrumentFamily {
    pub fn for_class(cls: MeasurementClass, dim: usize) -> Result<Self> {
        match cls.validate()?.normalized() {
            MeasurementClass::Rank1Projective => Ok(Self::Projective { dim, rank: 1 }),
            MeasurementClass::RankRProjective(r) => {
                check_rank_realizable(r, dim)?;
                Ok(Self::Projective { dim, rank: r })
            }
            MeasurementClass::MinOutcomes(n) => {
                check_outcomes_realizable(n, dim)?;
                Ok(Self::Kraus { dim, outcomes: n })
            }
            MeasurementClass::All => unreachable!("normalized"),
        }
    }

    pub fn n_params(&self) -> usize {
        match *self {
            Self::Projective { dim, .. } => dim * dim,
            Self::NaimarkPovm { dim } => dim.pow(4),
            Self::Kraus { dim, outcomes } => 2 * outcomes * dim * dim,
        }
    }

    pub fn build(&self, params: &[f64]) -> Instrument {
        match *self {
            Self::Projective { dim, rank } => {
                let u = linalg::exp_i_hermitian(&linalg::hermitian_from_params(params, dim));
                if rank == 1 {
                    Instrument::from_basis(Party::A, &u)
                } else {
                    grouped_projective(&u, rank)
                }
            }
            Self::NaimarkPovm { dim } => {
                let total = dim * dim;
                let u = linalg::exp_i_hermitian(&linalg::hermitian_from_params(params, total));
                let mut groups = Vec::with_capacity(total);
                for j in 0..total {
                    // ⟨i, 0| u_j⟩: the system component with the ancilla in |0⟩.
                    let v = DVector::from_fn(dim, |i, _| u[(i * dim, j)]);
                    let norm = v.norm();
                    if norm > 1e-12 {
                        groups.push(vec![linalg::projector(&v) / Complex64::new(norm, 0.0)]);
                    }
                }
                Instrument { acts_on: Party::A, groups }
            }
            Self::Kraus { dim, outcomes } => {
                let v = linalg::isometry_from_params(params, outcomes * dim, dim);
                Instrument { acts_on: Party::A, groups: split_blocks(&v, outcomes, dim) }
            }
        }
    }
}

/// Multi-start search over a parametrized family.
pub fn optimize_over_family<F>(
    objective: &F,
    family: InstrumentFamily,
    opt: &OptimizerConfig,
    direction: Direction,
) -> (Instrument, f64)
where
    F: Fn(&Instrument) -> f64 + Sync + ?Sized,
{
    let f = |x: &[f64]| objective(&family.build(x));
    let best = multistart(&f, family.n_params(), opt, direction);
    let inst = family.build(&best.x);
    let value = objective(&inst);
    (inst, value)
}

/// Best instrument in `cls` (on party A, dimension `dim`) for `objective`.
pub fn optimize_over_class<F>(
    objective: &F,
    cls: MeasurementClass,
    dim: usize,
    opt: &OptimizerConfig,
    direction: Direction,
) -> Result<(Instrument, f64)>
where
    F: Fn(&Instrument) -> f64 + Sync + ?Sized,
{
    let family = InstrumentFamily::for_class(cls, dim)?;
    Ok(optimize_over_family(objective, family, opt, direction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::mutual_information;
    use crate::qstate::random_density;

    fn projector_onto(d: usize, idx: &[usize]) -> CMatrix {
        let mut p = linalg::zeros(d, d);
        for &i in idx {
            p[(i, i)] = linalg::ONE;
        }
        p
    }

    #[test]
    fn membership_examples() {
        let comp = Instrument::computational(Party::A, 2);
        assert!(membership(&comp, MeasurementClass::Rank1Projective));

        let coarse =
            Instrument::projective(Party::A, vec![projector_onto(3, &[0, 1]), projector_onto(3, &[2])]).unwrap();
        assert!(!membership(&coarse, MeasurementClass::Rank1Projective));
        assert!(membership(&coarse, MeasurementClass::MinOutcomes(2)));
        assert!(!membership(&coarse, MeasurementClass::MinOutcomes(3)));

        let trivial = Instrument::trivial(Party::A, 3);
        assert!(!trivial.is_nontrivial());
        assert!(!membership(&trivial, MeasurementClass::All));
    }

    #[test]
    fn rank_r_membership() {
        let p = Instrument::projective(Party::A, vec![projector_onto(4, &[0, 2]), projector_onto(4, &[1, 3])]).unwrap();
        assert!(membership(&p, MeasurementClass::RankRProjective(2)));
        assert!(!membership(&p, MeasurementClass::RankRProjective(1)));
        assert!(!membership(&Instrument::trivial(Party::A, 4), MeasurementClass::RankRProjective(4)));
    }

    #[test]
    fn parses_class_flags() {
        assert_eq!("rank1".parse::<MeasurementClass>().unwrap(), MeasurementClass::Rank1Projective);
        assert_eq!("rankr:2".parse::<MeasurementClass>().unwrap(), MeasurementClass::RankRProjective(2));
        assert_eq!("minout:3".parse::<MeasurementClass>().unwrap(), MeasurementClass::MinOutcomes(3));
        assert_eq!("all".parse::<MeasurementClass>().unwrap(), MeasurementClass::All);
        assert!("minout:1".parse::<MeasurementClass>().is_err());
        assert!("bogus".parse::<MeasurementClass>().is_err());
    }

    #[test]
    fn apply_instrument_examples() {
        let bell = DensityMatrix::max_entangled(2, (2, 2)).unwrap();
        let avg = apply_instrument(&bell, &Instrument::computational(Party::A, 2), PostMeasurement::Average).unwrap();
        assert!((mutual_information(&bell) - 2.0).abs() < 1e-12);
        assert!((mutual_information(&avg) - 1.0).abs() < 1e-12);

        let rho = random_density((2, 2), 4, 3).unwrap();
        let enc = apply_instrument(&rho, &Instrument::trivial(Party::A, 2), PostMeasurement::Encode).unwrap();
        assert_eq!(enc.dims(), (2, 2));
        assert!(linalg::max_abs_diff(enc.matrix(), rho.matrix()) < 1e-14);
    }

    #[test]
    fn encode_on_b_places_flag_on_b() {
        let rho = random_density((2, 2), 4, 7).unwrap();
        let inst = Instrument::computational(Party::B, 2);
        let enc = apply_instrument(&rho, &inst, PostMeasurement::Encode).unwrap();
        assert_eq!(enc.dims(), (2, 4));
        // Tracing the flag recovers the average state.
        let avg = apply_instrument(&rho, &inst, PostMeasurement::Average).unwrap();
        let swapped = enc.swap_parties();
        let m = swapped.matrix();
        let reduced = CMatrix::from_fn(4, 4, |r, c| {
            let (b, a) = (r / 2, r % 2);
            let (b2, a2) = (c / 2, c % 2);
            (0..2).map(|f| m[((f * 2 + b) * 2 + a, (f * 2 + b2) * 2 + a2)]).sum()
        });
        let back = DensityMatrix::from_trusted(reduced, (2, 2)).swap_parties();
        assert!(linalg::max_abs_diff(back.matrix(), avg.matrix()) < 1e-14);
    }

    #[test]
    fn apply_instrument_checks_dims() {
        let rho = random_density((2, 2), 4, 3).unwrap();
        let inst = Instrument::computational(Party::A, 3);
        assert!(matches!(apply_instrument(&rho, &inst, PostMeasurement::Average), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn sampling_examples() {
        let a = sample_instrument(MeasurementClass::Rank1Projective, 2, 17).unwrap();
        let b = sample_instrument(MeasurementClass::Rank1Projective, 2, 17).unwrap();
        assert_eq!(a, b);
        assert!(membership(&a, MeasurementClass::Rank1Projective));

        assert!(matches!(
            sample_instrument(MeasurementClass::RankRProjective(2), 3, 0),
            Err(Error::UnrealizableClass(_))
        ));

        let three = sample_instrument(MeasurementClass::MinOutcomes(3), 2, 5).unwrap();
        assert_eq!(three.independent_outcomes(), 3);
        assert!(three.completeness_deviation() < 1e-10);
    }

    #[test]
    fn weak_measurement_is_complete_and_nontrivial() {
        for eps in [0.5, 0.1, 0.01] {
            let w = Instrument::weak(Party::A, 3, eps).unwrap();
            assert!(w.completeness_deviation() < 1e-12);
            assert!(membership(&w, MeasurementClass::All));
        }
        assert!(!Instrument::weak(Party::A, 2, 0.0).unwrap().is_nontrivial());
    }

    #[test]
    fn families_build_complete_instruments() {
        let fams = [
            InstrumentFamily::Projective { dim: 3, rank: 1 },
            InstrumentFamily::Projective { dim: 4, rank: 2 },
            InstrumentFamily::NaimarkPovm { dim: 2 },
            InstrumentFamily::Kraus { dim: 2, outcomes: 3 },
        ];
        for fam in fams {
            let params: Vec<f64> = (0..fam.n_params()).map(|k| ((k * 37 % 17) as f64 - 8.0) / 5.0).collect();
            let inst = fam.build(&params);
            assert!(inst.completeness_deviation() < 1e-10, "{fam:?}");
        }
    }
}
