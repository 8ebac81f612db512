//! JSON file formats. Complex matrices are lists of rows whose cells are
//! `[re, im]` pairs.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::locc::{LocalOperation, LoccProtocol, Message, RestrictedGate, Round, StateSet};
use crate::measurements::Instrument;
use crate::qstate::{DensityMatrix, Party, QuantumChannel, Subsystem};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
        return Err(Error::DimensionMismatch(format!("row {bad} has {} cells, row 0 has {n_cols}", rows[bad].len())));
    }
    Ok(CMatrix::from_fn(n_rows, n_cols, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1])))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub dims: [usize; 2],
    pub matrix: MatrixJson,
}

impl StateJson {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let (a, b) = rho.dims();
        Self { dims: [a, b], matrix: matrix_to_json(rho.matrix()) }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(matrix_from_json(&self.matrix)?, (self.dims[0], self.dims[1]))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub acts_on: Subsystem,
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelJson {
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        Self {
            acts_on: ch.acts_on(),
            in_dims: ch.in_dims().to_vec(),
            out_dims: ch.out_dims().to_vec(),
            kraus: ch.kraus().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let kraus = self.kraus.iter().map(matrix_from_json).collect::<Result<_>>()?;
        QuantumChannel::new(self.acts_on, self.in_dims.clone(), self.out_dims.clone(), kraus)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstrumentJson {
    pub acts_on: Party,
    pub groups: Vec<Vec<MatrixJson>>,
}

impl InstrumentJson {
    pub fn from_instrument(inst: &Instrument) -> Self {
        Self {
            acts_on: inst.acts_on(),
            groups: inst.groups().iter().map(|g| g.iter().map(matrix_to_json).collect()).collect(),
        }
    }

    pub fn to_instrument(&self) -> Result<Instrument> {
        let groups = self
            .groups
            .iter()
            .map(|g| g.iter().map(matrix_from_json).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Instrument::new(self.acts_on, groups)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperationJson {
    Channel(ChannelJson),
    Instrument(InstrumentJson),
    Controlled { reads: usize, channels: Vec<ChannelJson> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundJson {
    pub party: Party,
    pub op: OperationJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ProtocolJson {
    pub rounds: Vec<RoundJson>,
}

impl ProtocolJson {
    pub fn from_protocol(p: &LoccProtocol) -> Self {
        let rounds = p
            .rounds()
            .iter()
            .map(|r| RoundJson {
                party: r.party,
                op: match &r.op {
                    LocalOperation::Channel(ch) => OperationJson::Channel(ChannelJson::from_channel(ch)),
                    LocalOperation::Instrument(inst) => OperationJson::Instrument(InstrumentJson::from_instrument(inst)),
                    LocalOperation::Controlled { reads, channels } => OperationJson::Controlled {
                        reads: *reads,
                        channels: channels.iter().map(ChannelJson::from_channel).collect(),
                    },
                },
                message_dim: r.message.as_ref().map(|m| m.message_dim),
                symbols: r.message.as_ref().and_then(|m| m.symbols.clone()),
            })
            .collect();
        Self { rounds }
    }

    pub fn to_protocol(&self) -> Result<LoccProtocol> {
        let rounds = self
            .rounds
            .iter()
            .map(|r| {
                let op = match &r.op {
                    OperationJson::Channel(ch) => LocalOperation::Channel(ch.to_channel()?),
                    OperationJson::Instrument(inst) => LocalOperation::Instrument(inst.to_instrument()?),
                    OperationJson::Controlled { reads, channels } => LocalOperation::Controlled {
                        reads: *reads,
                        channels: channels.iter().map(ChannelJson::to_channel).collect::<Result<_>>()?,
                    },
                };
                let message = match (r.message_dim, &r.symbols) {
                    (Some(message_dim), symbols) => Some(Message { message_dim, symbols: symbols.clone() }),
                    (None, None) => None,
                    (None, Some(_)) => {
                        return Err(Error::InvalidProtocol("symbols given without message_dim".into()))
                    }
                };
                Ok(Round { party: r.party, op, message })
            })
            .collect::<Result<_>>()?;
        LoccProtocol::new(rounds)
    }
}

/// A gate file: the target channel and the input set, given as paths to state
/// files (relative to the gate file) or inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateJson {
    pub target: ChannelJson,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<StateJson>,
}

/// Gate sequence for the NMR scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceJson {
    pub gates: Vec<ChannelJson>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    read_json::<StateJson>(path)?.to_state()
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_json(path, &StateJson::from_state(rho))
}

pub fn read_channel(path: &Path) -> Result<QuantumChannel> {
    read_json::<ChannelJson>(path)?.to_channel()
}

pub fn write_channel(path: &Path, ch: &QuantumChannel) -> Result<()> {
    write_json(path, &ChannelJson::from_channel(ch))
}

pub fn read_instrument(path: &Path) -> Result<Instrument> {
    read_json::<InstrumentJson>(path)?.to_instrument()
}

pub fn write_instrument(path: &Path, inst: &Instrument) -> Result<()> {
    write_json(path, &InstrumentJson::from_instrument(inst))
}

pub fn read_protocol(path: &Path) -> Result<LoccProtocol> {
    read_json::<ProtocolJson>(path)?.to_protocol()
}

pub fn write_protocol(path: &Path, p: &LoccProtocol) -> Result<()> {
    write_json(path, &ProtocolJson::from_protocol(p))
}

pub fn read_gate(path: &Path) -> Result<RestrictedGate> {
    let gate: GateJson = read_json(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut generators: Vec<DensityMatrix> =
        gate.inputs.iter().map(|p| read_state(&base.join(p))).collect::<Result<_>>()?;
    for s in &gate.states {
        generators.push(s.to_state()?);
    }
    RestrictedGate::new(gate.target.to_channel()?, StateSet::new(generators)?)
}

/// Writes the gate with its generators inline.
pub fn write_gate(path: &Path, gate: &RestrictedGate) -> Result<()> {
    let json = GateJson {
        target: ChannelJson::from_channel(gate.target()),
        inputs: Vec::new(),
        states: gate.inputs().generators().iter().map(StateJson::from_state).collect(),
    };
    write_json(path, &json)
}

pub fn read_sequence(path: &Path) -> Result<Vec<QuantumChannel>> {
    read_json::<SequenceJson>(path)?.gates.iter().map(ChannelJson::to_channel).collect()
}

pub fn write_sequence(path: &Path, gates: &[QuantumChannel]) -> Result<()> {
    write_json(path, &SequenceJson { gates: gates.iter().map(ChannelJson::from_channel).collect() })
}
