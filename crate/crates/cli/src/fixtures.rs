//! Golden fixture files and their lookup directory.

use std::path::{Path, PathBuf};

use qcorr::linalg;
use qcorr::locc::{classical_controlled_not, cnot_fixture, discordant_reference, RestrictedGate, StateSet};
use qcorr::{io, DensityMatrix, QuantumChannel, Result, Subsystem};

pub const ENV_VAR: &str = "QCORR_FIXTURES";

pub fn fixture_dir() -> PathBuf {
    std::env::var_os(ENV_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
}

/// `path` itself if it exists, otherwise the same name in the fixture directory.
pub fn resolve(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    let candidate = fixture_dir().join(path);
    if candidate.exists() {
        candidate
    } else {
        path.to_path_buf()
    }
}

pub fn bell() -> DensityMatrix {
    DensityMatrix::max_entangled(2, (2, 2)).expect("valid")
}

/// `0.6 |+⟩⟨+| ⊗ |0⟩⟨0| + 0.4 |−⟩⟨−| ⊗ |+⟩⟨+|`: classical on A in the
/// Hadamard basis with non-commuting conditional states on B.
pub fn classical() -> DensityMatrix {
    let h = linalg::hadamard();
    let plus = DensityMatrix::pure(&(&h * linalg::ket(2, 0)), (2, 1)).expect("valid");
    let minus = DensityMatrix::pure(&(&h * linalg::ket(2, 1)), (2, 1)).expect("valid");
    let zero = DensityMatrix::basis_state(0, 0, (2, 1)).expect("valid");
    let a = plus.tensor(&zero);
    let b = minus.tensor(&plus);
    DensityMatrix::mixture(&[(0.6, &a), (0.4, &b)]).expect("valid")
}

/// `½|Φ+⟩⟨Φ+| + ½|22⟩⟨22|` with `|Φ+⟩` on the first two levels.
pub fn qutrit_example() -> DensityMatrix {
    let phi = DensityMatrix::max_entangled(2, (3, 3)).expect("valid");
    let two = DensityMatrix::basis_state(2, 2, (3, 3)).expect("valid");
    DensityMatrix::mixture(&[(0.5, &phi), (0.5, &two)]).expect("valid")
}

pub fn product_zero() -> DensityMatrix {
    DensityMatrix::basis_state(0, 0, (2, 2)).expect("valid")
}

pub fn cnot() -> QuantumChannel {
    QuantumChannel::unitary(Subsystem::AB, vec![2, 2], linalg::cnot()).expect("unitary")
}

pub fn hadamard_on_a() -> QuantumChannel {
    QuantumChannel::unitary(Subsystem::A, vec![2], linalg::hadamard()).expect("unitary")
}

/// A local unitary on the CNOT fixture's input set: discord is unchanged.
pub fn local_unitary_gate() -> RestrictedGate {
    RestrictedGate::new(hadamard_on_a(), cnot_fixture().inputs().clone()).expect("dims match")
}

/// CNOT on a set with no product generator.
pub fn missing_product_gate() -> RestrictedGate {
    let set = StateSet::new(vec![bell(), discordant_reference().noisy(0.3).expect("in range")]).expect("dims");
    RestrictedGate::new(cnot(), set).expect("dims match")
}

/// CNOT on a product state and a state classical on A: nothing is discordant.
pub fn classical_inputs_gate() -> RestrictedGate {
    let set = StateSet::new(vec![product_zero(), classical()]).expect("dims");
    RestrictedGate::new(cnot(), set).expect("dims match")
}

/// Writes every fixture into `dir` and returns the file names.
pub fn write_all(dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    let mut record = |name: &str| {
        names.push(name.to_string());
        dir.join(name)
    };
    io::write_state(&record("bell.json"), &bell())?;
    io::write_state(&record("classical.json"), &classical())?;
    io::write_state(&record("qutrit-example.json"), &qutrit_example())?;
    io::write_state(&record("product-00.json"), &product_zero())?;
    io::write_gate(&record("cnot-gate.json"), &cnot_fixture())?;
    io::write_gate(&record("local-unitary-gate.json"), &local_unitary_gate())?;
    io::write_gate(&record("missing-product-gate.json"), &missing_product_gate())?;
    io::write_gate(&record("classical-inputs-gate.json"), &classical_inputs_gate())?;
    io::write_sequence(&record("nmr-sequence.json"), &[hadamard_on_a(), cnot()])?;
    io::write_protocol(&record("classical-cnot-protocol.json"), &classical_controlled_not())?;
    Ok(names)
}
