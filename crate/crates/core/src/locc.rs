//! Restricted distributed gates: LOCC protocol simulation, reversibility
//! checks, fully local search and the entanglement-requirement probe.
//!
//! Protocols are simulated branch by branch. Each branch carries the outcome
//! history of every instrument round, which stands in for the classical
//! registers; summing the branches at the end traces those registers out.

use num_complex::Complex64;
use serde::Serialize;

use crate::correlations::{discord_oz, relative_entropy};
use crate::error::{Error, Result};
use crate::kclassical::{is_k_classical_with, DEFAULT_TOL};
use crate::linalg::{self, CMatrix};
use crate::measurements::{Instrument, MeasurementClass};
use crate::optimize::{multistart, Direction, OptimizerConfig};
use crate::qstate::{DensityMatrix, Party, QuantumChannel, Subsystem};

const BRANCH_CUTOFF: f64 = 1e-18;
const TRACE_TOL: f64 = 1e-9;
pub const IMPLEMENTS_TOL: f64 = 1e-7;
pub const REVERSIBILITY_TOL: f64 = 1e-6;
pub const FOUND_RESIDUAL: f64 = 1e-6;
pub const PRODUCT_TOL: f64 = 1e-9;
pub const DISCORD_CHANGE_TOL: f64 = 1e-3;

/// What a party does in one round.
#[derive(Debug, Clone)]
pub enum LocalOperation {
    Channel(QuantumChannel),
    /// Outcome is written to the party's own register.
    Instrument(Instrument),
    /// Applies `channels[s]`, where `s` is the symbol held from round `reads`:
    /// the party's own outcome there, or the message it received.
    Controlled { reads: usize, channels: Vec<QuantumChannel> },
}

#[derive(Debug, Clone)]
pub struct Message {
    pub message_dim: usize,
    /// Outcome-to-symbol map; `None` sends the outcome index itself.
    pub symbols: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Round {
    pub party: Party,
    pub op: LocalOperation,
    pub message: Option<Message>,
}

#[derive(Debug, Clone, Default)]
pub struct LoccProtocol {
    rounds: Vec<Round>,
}

impl LoccProtocol {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(rounds: Vec<Round>) -> Result<Self> {
        for (i, round) in rounds.iter().enumerate() {
            let expected = if i % 2 == 0 { Party::A } else { Party::B };
            if round.party != expected {
                return Err(Error::InvalidProtocol(format!(
                    "round {i} belongs to {:?}; parties alternate starting with A",
                    round.party
                )));
            }
            match &round.op {
                LocalOperation::Channel(ch) => check_local(ch, round.party, i)?,
                LocalOperation::Instrument(inst) => {
                    if inst.acts_on() != round.party {
                        return Err(Error::InvalidProtocol(format!("round {i}: instrument acts on the other party")));
                    }
                }
                LocalOperation::Controlled { reads, channels } => {
                    let available = readable_symbols(&rounds, i, *reads)?;
                    if channels.len() < available {
                        return Err(Error::InvalidProtocol(format!(
                            "round {i}: {} controlled channels for {available} possible symbols",
                            channels.len()
                        )));
                    }
                    for ch in channels {
                        check_local(ch, round.party, i)?;
                        if ch.in_dims() != channels[0].in_dims() || ch.out_dims() != channels[0].out_dims() {
                            return Err(Error::InvalidProtocol(format!(
                                "round {i}: controlled channels differ in dimensions"
                            )));
                        }
                    }
                }
            }
            if let Some(msg) = &round.message {
                let LocalOperation::Instrument(inst) = &round.op else {
                    return Err(Error::InvalidProtocol(format!("round {i}: only instrument rounds send messages")));
                };
                for outcome in 0..inst.n_outcomes() {
                    let symbol = match &msg.symbols {
                        Some(map) => *map.get(outcome).ok_or_else(|| {
                            Error::InvalidProtocol(format!("round {i}: no symbol for outcome {outcome}"))
                        })?,
                        None => outcome,
                    };
                    if symbol >= msg.message_dim {
                        return Err(Error::MessageOverflow { round: i, symbol, message_dim: msg.message_dim });
                    }
                }
            }
        }
        Ok(Self { rounds })
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }
}

fn check_local(ch: &QuantumChannel, party: Party, round: usize) -> Result<()> {
    if ch.acts_on() != Subsystem::from(party) {
        return Err(Error::InvalidProtocol(format!("round {round}: channel does not act on {party:?}")));
    }
    Ok(())
}

/// Number of distinct symbols round `at` can read from round `reads`.
fn readable_symbols(rounds: &[Round], at: usize, reads: usize) -> Result<usize> {
    let bad = |why: &str| Error::InvalidProtocol(format!("round {at} cannot read round {reads}: {why}"));
    if reads >= at {
        return Err(bad("not an earlier round"));
    }
    let source = &rounds[reads];
    let LocalOperation::Instrument(inst) = &source.op else {
        return Err(bad("it records no outcome"));
    };
    if source.party == rounds[at].party {
        return Ok(inst.n_outcomes());
    }
    match &source.message {
        Some(msg) => Ok(msg.message_dim),
        None => Err(bad("no message was sent")),
    }
}

fn lift_local(k: &CMatrix, party: Party, dims: (usize, usize)) -> CMatrix {
    match party {
        Party::A => k.kronecker(&linalg::identity(dims.1)),
        Party::B => linalg::identity(dims.0).kronecker(k),
    }
}

fn apply_kraus(m: &CMatrix, kraus: &[CMatrix]) -> CMatrix {
    let mut out = linalg::zeros(kraus[0].nrows(), kraus[0].nrows());
    for k in kraus {
        out += k * m * k.adjoint();
    }
    out
}

struct Branch {
    outcomes: Vec<Option<usize>>,
    matrix: CMatrix,
}

/// Runs the protocol on `rho` and traces out all classical registers.
pub fn simulate(protocol: &LoccProtocol, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let mut dims = rho.dims();
    let mut branches = vec![Branch { outcomes: Vec::new(), matrix: rho.matrix().clone() }];
    let rounds = protocol.rounds();
    for (i, round) in rounds.iter().enumerate() {
        match &round.op {
            LocalOperation::Channel(ch) => {
                let (kraus, out) = ch.lift(dims)?;
                for b in &mut branches {
                    b.matrix = apply_kraus(&b.matrix, &kraus);
                    b.outcomes.push(None);
                }
                dims = out;
            }
            LocalOperation::Instrument(inst) => {
                let in_dim = match round.party {
                    Party::A => dims.0,
                    Party::B => dims.1,
                };
                if inst.in_dim() != in_dim {
                    return Err(Error::DimensionMismatch(format!(
                        "round {i}: instrument input {} but subsystem has {in_dim}",
                        inst.in_dim()
                    )));
                }
                let lifted: Vec<Vec<CMatrix>> = inst
                    .groups()
                    .iter()
                    .map(|g| g.iter().map(|k| lift_local(k, round.party, dims)).collect())
                    .collect();
                let mut next = Vec::with_capacity(branches.len() * lifted.len());
                for b in &branches {
                    for (outcome, group) in lifted.iter().enumerate() {
                        let m = apply_kraus(&b.matrix, group);
                        if linalg::trace(&m).re > BRANCH_CUTOFF {
                            let mut outcomes = b.outcomes.clone();
                            outcomes.push(Some(outcome));
                            next.push(Branch { outcomes, matrix: m });
                        }
                    }
                }
                branches = next;
                dims = match round.party {
                    Party::A => (inst.out_dim(), dims.1),
                    Party::B => (dims.0, inst.out_dim()),
                };
            }
            LocalOperation::Controlled { reads, channels } => {
                let source = &rounds[*reads];
                let lifted: Vec<(Vec<CMatrix>, (usize, usize))> =
                    channels.iter().map(|ch| ch.lift(dims)).collect::<Result<_>>()?;
                for b in &mut branches {
                    let outcome = b.outcomes[*reads].expect("validated instrument round");
                    let symbol = match (&source.message, source.party == round.party) {
                        (Some(Message { symbols: Some(map), .. }), false) => map[outcome],
                        _ => outcome,
                    };
                    b.matrix = apply_kraus(&b.matrix, &lifted[symbol].0);
                    b.outcomes.push(None);
                }
                dims = lifted[0].1;
            }
        }
    }
    let d = dims.0 * dims.1;
    let total = branches.iter().fold(linalg::zeros(d, d), |acc, b| acc + &b.matrix);
    let tr = linalg::trace(&total).re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::BadTrace(tr));
    }
    Ok(DensityMatrix::from_trusted(total, dims))
}

/// Extreme points of a convex set of input states.
#[derive(Debug, Clone)]
pub struct StateSet {
    generators: Vec<DensityMatrix>,
}

impl StateSet {
    pub fn new(generators: Vec<DensityMatrix>) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::InvalidInput("state set is empty".into()))?;
        if let Some(g) = generators.iter().find(|g| g.dims() != first.dims()) {
            return Err(Error::DimensionMismatch(format!(
                "generators have dims {:?} and {:?}",
                first.dims(),
                g.dims()
            )));
        }
        Ok(Self { generators })
    }

    pub fn generators(&self) -> &[DensityMatrix] {
        &self.generators
    }

    pub fn dims(&self) -> (usize, usize) {
        self.generators[0].dims()
    }
}

/// A gate required to act as `target` only on the convex hull of `inputs`.
#[derive(Debug, Clone)]
pub struct RestrictedGate {
    target: QuantumChannel,
    inputs: StateSet,
}

impl RestrictedGate {
    pub fn new(target: QuantumChannel, inputs: StateSet) -> Result<Self> {
        target.lift(inputs.dims())?;
        Ok(Self { target, inputs })
    }

    pub fn target(&self) -> &QuantumChannel {
        &self.target
    }

    pub fn inputs(&self) -> &StateSet {
        &self.inputs
    }

    pub fn outputs(&self) -> Vec<DensityMatrix> {
        self.inputs
            .generators()
            .iter()
            .map(|g| g.apply_channel(&self.target).expect("dims checked on construction"))
            .collect()
    }
}

/// Trace distance between the protocol output and the target output, per generator.
pub fn implementation_distances(gate: &RestrictedGate, protocol: &LoccProtocol) -> Result<Vec<f64>> {
    gate.inputs
        .generators()
        .iter()
        .zip(gate.outputs())
        .map(|(g, want)| Ok(linalg::trace_distance(simulate(protocol, g)?.matrix(), want.matrix())))
        .collect()
}

pub fn implements(gate: &RestrictedGate, protocol: &LoccProtocol, tol: f64) -> bool {
    match implementation_distances(gate, protocol) {
        Ok(d) => d.iter().all(|&x| x < tol),
        Err(err) => {
            log::warn!("protocol could not be simulated on the gate inputs: {err}");
            false
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairViolation {
    pub i: usize,
    pub j: usize,
    pub before: f64,
    pub after: f64,
}

/// Outcome of the relative-entropy test. Passing it is necessary for the
/// restricted gate to be reversible, not sufficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversibilityReport {
    pub necessary_condition_holds: bool,
    pub violations: Vec<PairViolation>,
}

pub fn reversibility_check(gate: &RestrictedGate, tol: f64) -> ReversibilityReport {
    let inputs = gate.inputs.generators();
    let outputs = gate.outputs();
    let mut violations = Vec::new();
    for i in 0..inputs.len() {
        for j in 0..inputs.len() {
            if i == j {
                continue;
            }
            let before = relative_entropy(&inputs[i], &inputs[j]).expect("shared dims");
            let after = relative_entropy(&outputs[i], &outputs[j]).expect("shared dims");
            let preserved = match (before.is_infinite(), after.is_infinite()) {
                (true, true) => true,
                (false, false) => (before - after).abs() < tol,
                _ => false,
            };
            if !preserved {
                violations.push(PairViolation { i, j, before, after });
            }
        }
    }
    ReversibilityReport { necessary_condition_holds: violations.is_empty(), violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalSearchMode {
    Unitary,
    /// Local channels with this many Kraus operators on each side.
    Channels { kraus: usize },
}

#[derive(Debug, Clone)]
pub struct LocalSearch {
    pub found: bool,
    /// Largest trace distance to the target output over the generators.
    pub residual: f64,
    pub restarts: usize,
    pub mode: LocalSearchMode,
    pub witness: (QuantumChannel, QuantumChannel),
}

impl LocalSearch {
    pub fn status(&self) -> String {
        if self.found {
            "found".into()
        } else {
            format!("not_found_after_{}_restarts", self.restarts)
        }
    }
}

pub fn fully_local_search(gate: &RestrictedGate, opt: &OptimizerConfig) -> LocalSearch {
    fully_local_search_with(gate, opt, LocalSearchMode::Unitary)
}

/// Heuristic search for `Λ_A ⊗ Λ_B` reproducing the gate on its generators.
/// Failing to find one is not a proof that none exists.
pub fn fully_local_search_with(gate: &RestrictedGate, opt: &OptimizerConfig, mode: LocalSearchMode) -> LocalSearch {
    let (d_a, d_b) = gate.inputs.dims();
    let targets = gate.outputs();
    let (o_a, o_b) = targets[0].dims();
    let (kraus_a, kraus_b) = match mode {
        LocalSearchMode::Unitary => (1, 1),
        LocalSearchMode::Channels { kraus } => (kraus.max(1), kraus.max(1)),
    };
    let unitary = mode == LocalSearchMode::Unitary;
    let n_a = if unitary { d_a * d_a } else { 2 * kraus_a * o_a * d_a };
    let n_b = if unitary { d_b * d_b } else { 2 * kraus_b * o_b * d_b };

    let build = |x: &[f64]| -> (QuantumChannel, QuantumChannel) {
        if unitary && (o_a, o_b) == (d_a, d_b) {
            let ua = linalg::exp_i_hermitian(&linalg::hermitian_from_params(&x[..n_a], d_a));
            let ub = linalg::exp_i_hermitian(&linalg::hermitian_from_params(&x[n_a..], d_b));
            (
                QuantumChannel::unchecked(Subsystem::A, vec![d_a], vec![d_a], vec![ua]).expect("square"),
                QuantumChannel::unchecked(Subsystem::B, vec![d_b], vec![d_b], vec![ub]).expect("square"),
            )
        } else {
            let k = if unitary { 1 } else { kraus_a };
            (
                channel_from_params(&x[..n_a], Subsystem::A, d_a, o_a, k),
                channel_from_params(&x[n_a..], Subsystem::B, d_b, o_b, k),
            )
        }
    };
    let apply = |pair: &(QuantumChannel, QuantumChannel), g: &DensityMatrix| -> CMatrix {
        let kraus: Vec<CMatrix> =
            pair.0.kraus().iter().flat_map(|ka| pair.1.kraus().iter().map(move |kb| ka.kronecker(kb))).collect();
        apply_kraus(g.matrix(), &kraus)
    };
    let generators = gate.inputs.generators();
    let objective = |x: &[f64]| -> f64 {
        let pair = build(x);
        generators.iter().zip(&targets).map(|(g, t)| (apply(&pair, g) - t.matrix()).norm_squared()).sum()
    };
    let cfg = OptimizerConfig { tol: 1e-20, max_evals: opt.max_evals.max(500 * (n_a + n_b)), ..*opt };
    let best = multistart(&objective, n_a + n_b, &cfg, Direction::Minimize);
    let witness = build(&best.x);
    let residual = generators
        .iter()
        .zip(&targets)
        .map(|(g, t)| linalg::trace_distance(&apply(&witness, g), t.matrix()))
        .fold(0.0, f64::max);
    LocalSearch { found: residual < FOUND_RESIDUAL, residual, restarts: cfg.restarts.max(1), mode, witness }
}

/// Local channel from the polar isometry of `G₀ + X`, where `G₀` embeds the
/// input into the first Kraus block so that zero parameters give a partial isometry
/// closest to the identity.
fn channel_from_params(x: &[f64], side: Subsystem, d_in: usize, d_out: usize, kraus: usize) -> QuantumChannel {
    let rows = kraus * d_out;
    let g = CMatrix::from_fn(rows, d_in, |i, j| {
        let k = 2 * (i * d_in + j);
        let base = if i == j { 1.0 } else { 0.0 };
        Complex64::new(base + x[k], x[k + 1])
    });
    let v = linalg::polar_isometry(&g);
    let blocks = (0..kraus).map(|k| v.rows(k * d_out, d_out).into_owned()).collect();
    QuantumChannel::unchecked(side, vec![d_in], vec![d_out], blocks).expect("block shapes")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// Some generator is a product state.
    H1,
    /// Some generator is 2-discordant with finite relative entropy to the product generator.
    H2,
    /// The gate changes the discord of such a generator.
    H3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    RequiresEntanglementOrNonreversible,
    HypothesesNotMet,
}

#[derive(Debug, Clone)]
pub struct Theorem2Report {
    pub verdict: ProbeVerdict,
    pub failing_hypothesis: Option<Hypothesis>,
    pub product_generator: Option<usize>,
    pub discordant_generators: Vec<usize>,
    /// Generator whose discord the gate changes, with `D(G(ρ)) − D(ρ)`.
    pub discord_change: Option<(usize, f64)>,
    pub reversibility: ReversibilityReport,
    pub local_search: Option<LocalSearch>,
}

/// Checks the hypotheses under which a restricted gate cannot be implemented
/// by LOCC without entanglement (unless it is irreversible on its inputs).
pub fn theorem2_probe(gate: &RestrictedGate, opt: &OptimizerConfig) -> Theorem2Report {
    let gens = gate.inputs.generators();
    let reversibility = reversibility_check(gate, REVERSIBILITY_TOL);
    let mut report = Theorem2Report {
        verdict: ProbeVerdict::HypothesesNotMet,
        failing_hypothesis: None,
        product_generator: None,
        discordant_generators: Vec::new(),
        discord_change: None,
        reversibility,
        local_search: None,
    };

    let Some(tau) = gens.iter().position(|g| g.is_product(PRODUCT_TOL)) else {
        report.failing_hypothesis = Some(Hypothesis::H1);
        return report;
    };
    report.product_generator = Some(tau);

    report.discordant_generators = (0..gens.len())
        .filter(|&i| !is_k_classical_with(&gens[i], MeasurementClass::All, DEFAULT_TOL, opt).is_classical)
        .filter(|&i| relative_entropy(&gens[i], &gens[tau]).map(f64::is_finite).unwrap_or(false))
        .collect();
    if report.discordant_generators.is_empty() {
        report.failing_hypothesis = Some(Hypothesis::H2);
        return report;
    }

    let outputs = gate.outputs();
    report.discord_change = report.discordant_generators.iter().find_map(|&i| {
        let change = discord_oz(&outputs[i], opt) - discord_oz(&gens[i], opt);
        (change.abs() > DISCORD_CHANGE_TOL).then_some((i, change))
    });
    if report.discord_change.is_none() {
        report.failing_hypothesis = Some(Hypothesis::H3);
        return report;
    }

    report.verdict = ProbeVerdict::RequiresEntanglementOrNonreversible;
    let search = fully_local_search(gate, opt);
    if search.found {
        log::warn!("fully local implementation found despite the probe verdict (residual {:e})", search.residual);
    }
    report.local_search = Some(search);
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NmrState {
    pub noise: f64,
    pub two_classical: bool,
    pub discord: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NmrStep {
    /// 0 is the initial family; step `s` follows the `s`-th gate.
    pub step: usize,
    pub states: Vec<NmrState>,
    pub two_discordant: bool,
    /// Some state's discord moved by more than the change tolerance in this step.
    pub discord_changed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NmrReport {
    pub noise_levels: Vec<f64>,
    pub steps: Vec<NmrStep>,
    pub first_two_discordant_step: Option<usize>,
    /// First step whose gate changes the discord of a family that was already
    /// 2-discordant going in.
    pub flagged_step: Option<usize>,
}

/// Evolves the noisy family of a product state through `gates`, testing
/// 2-classicality and discord after each step. Noise level 1 is always included.
pub fn nmr_scenario(
    rho0: &DensityMatrix,
    gates: &[QuantumChannel],
    noise_levels: &[f64],
    opt: &OptimizerConfig,
) -> Result<NmrReport> {
    if !rho0.is_product(PRODUCT_TOL) {
        return Err(Error::NotProductInput("the NMR family needs a product reference state".into()));
    }
    let mut levels = noise_levels.to_vec();
    if !levels.contains(&1.0) {
        levels.push(1.0);
    }
    let mut family: Vec<DensityMatrix> = levels.iter().map(|&n| rho0.noisy(n)).collect::<Result<_>>()?;

    let evaluate = |states: &[DensityMatrix]| -> Vec<NmrState> {
        states
            .iter()
            .zip(&levels)
            .map(|(s, &noise)| NmrState {
                noise,
                two_classical: is_k_classical_with(s, MeasurementClass::All, DEFAULT_TOL, opt).is_classical,
                discord: discord_oz(s, opt),
            })
            .collect()
    };
    let initial = evaluate(&family);
    let mut steps = vec![NmrStep {
        step: 0,
        two_discordant: initial.iter().any(|s| !s.two_classical),
        states: initial,
        discord_changed: false,
    }];
    for (k, gate) in gates.iter().enumerate() {
        family = family.iter().map(|s| s.apply_channel(gate)).collect::<Result<_>>()?;
        let states = evaluate(&family);
        let prev = &steps[k].states;
        let discord_changed =
            states.iter().zip(prev).any(|(s, p)| (s.discord - p.discord).abs() > DISCORD_CHANGE_TOL);
        steps.push(NmrStep {
            step: k + 1,
            two_discordant: states.iter().any(|s| !s.two_classical),
            states,
            discord_changed,
        });
    }
    let first_two_discordant_step = steps.iter().find(|s| s.two_discordant).map(|s| s.step);
    let flagged_step = (1..steps.len()).find(|&s| steps[s - 1].two_discordant && steps[s].discord_changed);
    Ok(NmrReport { noise_levels: levels, steps, first_two_discordant_step, flagged_step })
}

/// Measure A in the computational basis, send the outcome, and let B apply
/// `X^a`. Implements CNOT on inputs that are classical on A.
pub fn classical_controlled_not() -> LoccProtocol {
    let x = QuantumChannel::unitary(Subsystem::B, vec![2], linalg::pauli_x()).expect("unitary");
    LoccProtocol::new(vec![
        Round {
            party: Party::A,
            op: LocalOperation::Instrument(Instrument::computational(Party::A, 2)),
            message: Some(Message { message_dim: 2, symbols: None }),
        },
        Round {
            party: Party::B,
            op: LocalOperation::Controlled { reads: 0, channels: vec![QuantumChannel::identity(Subsystem::B, vec![2]), x] },
            message: None,
        },
    ])
    .expect("well-formed protocol")
}

/// `½|Φ+⟩⟨Φ+| + ½|00⟩⟨00|`: 2-discordant, and CNOT maps it to a product state.
pub fn discordant_reference() -> DensityMatrix {
    let phi = DensityMatrix::max_entangled(2, (2, 2)).expect("valid");
    let zero = DensityMatrix::basis_state(0, 0, (2, 2)).expect("valid");
    DensityMatrix::mixture(&[(0.5, &phi), (0.5, &zero)]).expect("valid")
}

/// CNOT restricted to `{I/4, noisy(ρ_disc, 0.3)}`.
pub fn cnot_fixture() -> RestrictedGate {
    let set = StateSet::new(vec![
        DensityMatrix::maximally_mixed((2, 2)),
        discordant_reference().noisy(0.3).expect("noise in range"),
    ])
    .expect("shared dims");
    let cnot = QuantumChannel::unitary(Subsystem::AB, vec![2, 2], linalg::cnot()).expect("unitary");
    RestrictedGate::new(cnot, set).expect("dims match")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_density, rng_from_seed};

    fn unitary_on(party: Party, u: CMatrix) -> QuantumChannel {
        QuantumChannel::unitary(Subsystem::from(party), vec![u.nrows()], u).unwrap()
    }

    fn classical_inputs() -> Vec<DensityMatrix> {
        let rho_b = random_density((2, 1), 2, 3).unwrap();
        (0..2).map(|a| DensityMatrix::basis_state(a, 0, (2, 1)).unwrap().tensor(&rho_b)).collect()
    }

    fn cnot() -> QuantumChannel {
        QuantumChannel::unitary(Subsystem::AB, vec![2, 2], linalg::cnot()).unwrap()
    }

    #[test]
    fn local_unitaries_without_messages() {
        let mut rng = rng_from_seed(4);
        let (ua, ub) = (linalg::haar_unitary(2, &mut rng), linalg::haar_unitary(3, &mut rng));
        let p = LoccProtocol::new(vec![
            Round { party: Party::A, op: LocalOperation::Channel(unitary_on(Party::A, ua.clone())), message: None },
            Round { party: Party::B, op: LocalOperation::Channel(unitary_on(Party::B, ub.clone())), message: None },
        ])
        .unwrap();
        let rho = random_density((2, 3), 6, 1).unwrap();
        let out = simulate(&p, &rho).unwrap();
        let want = rho.conjugate(&ua.kronecker(&ub)).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), want.matrix()) < 1e-12);
    }

    #[test]
    fn empty_protocol_is_identity() {
        let rho = random_density((2, 2), 3, 8).unwrap();
        let out = simulate(&LoccProtocol::empty(), &rho).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-14);
    }

    #[test]
    fn classical_controlled_not_on_classical_inputs() {
        let p = classical_controlled_not();
        for g in classical_inputs() {
            let want = g.apply_channel(&cnot()).unwrap();
            let got = simulate(&p, &g).unwrap();
            assert!(linalg::trace_distance(got.matrix(), want.matrix()) < 1e-12);
        }
        let gate = RestrictedGate::new(cnot(), StateSet::new(classical_inputs()).unwrap()).unwrap();
        assert!(implements(&gate, &p, IMPLEMENTS_TOL));

        let mut outside = classical_inputs();
        let plus = DensityMatrix::pure(&(linalg::hadamard() * linalg::ket(2, 0)), (2, 1)).unwrap();
        outside.push(plus.tensor(&DensityMatrix::basis_state(0, 0, (2, 1)).unwrap()));
        let gate = RestrictedGate::new(cnot(), StateSet::new(outside).unwrap()).unwrap();
        assert!(!implements(&gate, &p, IMPLEMENTS_TOL));
        let d = implementation_distances(&gate, &p).unwrap();
        assert!(d[2] > 0.1, "{d:?}");
    }

    #[test]
    fn protocol_validation() {
        let ch = QuantumChannel::identity(Subsystem::B, vec![2]);
        let err = LoccProtocol::new(vec![Round { party: Party::B, op: LocalOperation::Channel(ch), message: None }]);
        assert!(matches!(err, Err(Error::InvalidProtocol(_))));

        let err = LoccProtocol::new(vec![Round {
            party: Party::A,
            op: LocalOperation::Instrument(Instrument::computational(Party::A, 3)),
            message: Some(Message { message_dim: 2, symbols: None }),
        }]);
        assert!(matches!(err, Err(Error::MessageOverflow { round: 0, symbol: 2, message_dim: 2 })));

        let ok = LoccProtocol::new(vec![Round {
            party: Party::A,
            op: LocalOperation::Instrument(Instrument::computational(Party::A, 3)),
            message: Some(Message { message_dim: 2, symbols: Some(vec![0, 1, 1]) }),
        }]);
        assert!(ok.is_ok());

        let no_message = LoccProtocol::new(vec![
            Round { party: Party::A, op: LocalOperation::Instrument(Instrument::computational(Party::A, 2)), message: None },
            Round {
                party: Party::B,
                op: LocalOperation::Controlled { reads: 0, channels: vec![QuantumChannel::identity(Subsystem::B, vec![2]); 2] },
                message: None,
            },
        ]);
        assert!(matches!(no_message, Err(Error::InvalidProtocol(_))));
    }

    #[test]
    fn simulate_rejects_mismatched_dims() {
        let p = classical_controlled_not();
        let rho = random_density((3, 2), 2, 1).unwrap();
        assert!(matches!(simulate(&p, &rho), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn reversibility_examples() {
        let set = StateSet::new(vec![random_density((2, 2), 4, 1).unwrap(), random_density((2, 2), 2, 2).unwrap()]).unwrap();
        let mut rng = rng_from_seed(5);
        let u = QuantumChannel::unitary(Subsystem::AB, vec![2, 2], linalg::haar_unitary(4, &mut rng)).unwrap();
        let rep = reversibility_check(&RestrictedGate::new(u, set.clone()).unwrap(), REVERSIBILITY_TOL);
        assert!(rep.necessary_condition_holds);

        let sigma = DensityMatrix::maximally_mixed((2, 1));
        let replace = QuantumChannel::replacement(Subsystem::A, vec![2], &sigma).unwrap();
        let set2 = StateSet::new(vec![
            DensityMatrix::diagonal(&[0.7, 0.1, 0.1, 0.1], (2, 2)).unwrap(),
            DensityMatrix::diagonal(&[0.1, 0.1, 0.1, 0.7], (2, 2)).unwrap(),
        ])
        .unwrap();
        let rep = reversibility_check(&RestrictedGate::new(replace, set2.clone()).unwrap(), REVERSIBILITY_TOL);
        assert!(!rep.necessary_condition_holds);
        assert_eq!(rep.violations.len(), 2);

        let deph = QuantumChannel::computational_dephasing(Party::A, 2);
        let rep = reversibility_check(&RestrictedGate::new(deph, set2).unwrap(), REVERSIBILITY_TOL);
        assert!(rep.necessary_condition_holds);
    }

    #[test]
    fn infinite_relative_entropies_must_match() {
        let set = StateSet::new(vec![
            DensityMatrix::basis_state(0, 0, (2, 2)).unwrap(),
            DensityMatrix::basis_state(1, 1, (2, 2)).unwrap(),
        ])
        .unwrap();
        let rep = reversibility_check(&RestrictedGate::new(cnot(), set.clone()).unwrap(), REVERSIBILITY_TOL);
        assert!(rep.necessary_condition_holds);
        let sigma = DensityMatrix::maximally_mixed((2, 2));
        let replace = QuantumChannel::replacement(Subsystem::AB, vec![2, 2], &sigma).unwrap();
        let rep = reversibility_check(&RestrictedGate::new(replace, set).unwrap(), REVERSIBILITY_TOL);
        assert!(!rep.necessary_condition_holds);
    }

    #[test]
    fn local_search_finds_local_gates() {
        let mut rng = rng_from_seed(11);
        let (ua, ub) = (linalg::haar_unitary(2, &mut rng), linalg::haar_unitary(2, &mut rng));
        let target = QuantumChannel::unitary(Subsystem::AB, vec![2, 2], ua.kronecker(&ub)).unwrap();
        let set = StateSet::new(vec![random_density((2, 2), 4, 1).unwrap(), random_density((2, 2), 1, 2).unwrap()]).unwrap();
        let gate = RestrictedGate::new(target, set.clone()).unwrap();
        let opt = OptimizerConfig::default().with_restarts(6);
        let s = fully_local_search(&gate, &opt);
        assert!(s.found && s.residual < 1e-8, "{}", s.residual);

        let id = RestrictedGate::new(QuantumChannel::identity(Subsystem::AB, vec![2, 2]), set).unwrap();
        let s = fully_local_search(&id, &opt);
        assert!(s.found && s.residual < 1e-10);
        assert_eq!(s.status(), "found");
    }

    #[test]
    fn local_search_channel_mode_finds_dephasing() {
        let set = StateSet::new(vec![random_density((2, 2), 4, 1).unwrap()]).unwrap();
        let gate = RestrictedGate::new(QuantumChannel::computational_dephasing(Party::A, 2), set).unwrap();
        let opt = OptimizerConfig::default().with_restarts(6);
        let s = fully_local_search_with(&gate, &opt, LocalSearchMode::Channels { kraus: 2 });
        assert!(s.found, "{}", s.residual);
        assert!(s.witness.0.completeness_deviation() < 1e-9);
    }

    #[test]
    fn discordant_reference_self_certifies() {
        let opt = OptimizerConfig::default();
        let rho = discordant_reference().noisy(0.3).unwrap();
        assert!(!is_k_classical_with(&rho, MeasurementClass::All, DEFAULT_TOL, &opt).is_classical);
        let out = discordant_reference().apply_channel(&cnot()).unwrap();
        assert!(out.is_product(1e-12));
        let change = discord_oz(&rho.apply_channel(&cnot()).unwrap(), &opt) - discord_oz(&rho, &opt);
        assert!(change.abs() > DISCORD_CHANGE_TOL, "{change}");
    }

    #[test]
    fn probe_verdicts() {
        let opt = OptimizerConfig::default().with_restarts(8);
        let rep = theorem2_probe(&cnot_fixture(), &opt);
        assert_eq!(rep.verdict, ProbeVerdict::RequiresEntanglementOrNonreversible);
        assert_eq!(rep.product_generator, Some(0));
        assert_eq!(rep.discordant_generators, vec![1]);
        assert!(rep.reversibility.necessary_condition_holds);
        assert!(!rep.local_search.unwrap().found);

        let mut rng = rng_from_seed(3);
        let local = QuantumChannel::unitary(Subsystem::A, vec![2], linalg::haar_unitary(2, &mut rng)).unwrap();
        let gate = RestrictedGate::new(local, cnot_fixture().inputs().clone()).unwrap();
        let rep = theorem2_probe(&gate, &opt);
        assert_eq!(rep.verdict, ProbeVerdict::HypothesesNotMet);
        assert_eq!(rep.failing_hypothesis, Some(Hypothesis::H3));

        let no_product = StateSet::new(vec![
            DensityMatrix::max_entangled(2, (2, 2)).unwrap(),
            discordant_reference().noisy(0.3).unwrap(),
        ])
        .unwrap();
        let rep = theorem2_probe(&RestrictedGate::new(cnot(), no_product).unwrap(), &opt);
        assert_eq!(rep.failing_hypothesis, Some(Hypothesis::H1));

        let classical = StateSet::new(classical_inputs()).unwrap();
        let rep = theorem2_probe(&RestrictedGate::new(cnot(), classical).unwrap(), &opt);
        assert_eq!(rep.failing_hypothesis, Some(Hypothesis::H2));
    }

    #[test]
    fn nmr_examples() {
        let opt = OptimizerConfig::default().with_restarts(6);
        let rho0 = DensityMatrix::basis_state(0, 0, (2, 2)).unwrap();
        let h = QuantumChannel::unitary(Subsystem::A, vec![2], linalg::hadamard()).unwrap();
        let rep = nmr_scenario(&rho0, &[h.clone(), cnot()], &[0.0, 0.5], &opt).unwrap();
        assert_eq!(rep.noise_levels, vec![0.0, 0.5, 1.0]);
        assert_eq!(rep.first_two_discordant_step, Some(2), "{rep:#?}");
        assert!(rep.steps[2].discord_changed);
        assert_eq!(rep.flagged_step, None);

        let rep = nmr_scenario(&rho0, &[h.clone(), cnot(), cnot()], &[0.0, 0.5], &opt).unwrap();
        assert_eq!(rep.flagged_step, Some(3));

        let mut rng = rng_from_seed(9);
        let locals: Vec<QuantumChannel> = (0..3)
            .map(|k| {
                let side = if k % 2 == 0 { Subsystem::A } else { Subsystem::B };
                QuantumChannel::unitary(side, vec![2], linalg::haar_unitary(2, &mut rng)).unwrap()
            })
            .collect();
        let rep = nmr_scenario(&rho0, &locals, &[0.0, 0.5], &opt).unwrap();
        assert_eq!(rep.flagged_step, None);
        assert_eq!(rep.first_two_discordant_step, None);

        let rep = nmr_scenario(&rho0, &[h, cnot()], &[1.0], &opt).unwrap();
        assert_eq!(rep.noise_levels, vec![1.0]);
        assert_eq!(rep.flagged_step, None);
        assert!(rep.steps.iter().all(|s| !s.two_discordant));

        let bell = DensityMatrix::max_entangled(2, (2, 2)).unwrap();
        assert!(matches!(nmr_scenario(&bell, &[], &[0.0], &opt), Err(Error::NotProductInput(_))));
    }
}
