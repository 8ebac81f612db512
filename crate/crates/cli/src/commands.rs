//! Report builders behind each subcommand.

use qcorr::correlations::{classical_correlation, discord_mi, discord_oz, entropy, mutual_information};
use qcorr::kclassical::is_k_classical_with;
use qcorr::locc::{nmr_scenario, theorem2_probe, Hypothesis, ProbeVerdict, RestrictedGate};
use qcorr::{io, DensityMatrix, Instrument, MeasurementClass, OptimizerConfig, QuantumChannel, Result};
use serde_json::{json, Value};

use crate::canon::num;

pub fn measure(rho: &DensityMatrix, opt: &OptimizerConfig) -> Value {
    let (j, _) = classical_correlation(rho, opt);
    json!({
        "dims": [rho.dims().0, rho.dims().1],
        "entropy": num(entropy(rho)),
        "mutual_information": num(mutual_information(rho)),
        "J": num(j),
        "discord_oz": num(discord_oz(rho, opt)),
        "discord_mi": num(discord_mi(rho, opt)),
        "povm_search": opt.povm,
    })
}

pub fn kclassical(
    rho: &DensityMatrix,
    cls: MeasurementClass,
    tol: f64,
    opt: &OptimizerConfig,
) -> (Value, Option<Instrument>) {
    let v = is_k_classical_with(rho, cls, tol, opt);
    let witness = v.witness.as_ref().map(|w| {
        json!({
            "n_outcomes": w.n_outcomes(),
            "independent_outcomes": w.independent_outcomes(),
            "projective": w.povm().iter().all(|e| (e * e - e).norm() < 1e-9),
            "instrument": serde_json::to_value(io::InstrumentJson::from_instrument(w)).expect("instrument serializes"),
        })
    });
    let report = json!({
        "class": cls.to_string(),
        "tolerance": num(tol),
        "is_classical": v.is_classical,
        "mi_before": num(v.mi_before),
        "mi_after": num(v.mi_after),
        "mi_after_encoded": v.mi_after_encoded.map(num),
        "method": serde_json::to_value(v.method).expect("enum serializes"),
        "block_ranks": v.block_ranks,
        "witness": witness,
    });
    (report, v.witness)
}

fn hypothesis_name(h: Hypothesis) -> &'static str {
    match h {
        Hypothesis::H1 => "h1",
        Hypothesis::H2 => "h2",
        Hypothesis::H3 => "h3",
    }
}

pub fn probe(gate: &RestrictedGate, opt: &OptimizerConfig) -> Value {
    let r = theorem2_probe(gate, opt);
    let verdict = match r.verdict {
        ProbeVerdict::RequiresEntanglementOrNonreversible => "requires_entanglement_or_nonreversible".to_string(),
        ProbeVerdict::HypothesesNotMet => {
            format!("hypotheses_not_met({})", r.failing_hypothesis.map_or("?", hypothesis_name))
        }
    };
    let violations: Vec<Value> = r
        .reversibility
        .violations
        .iter()
        .map(|v| json!({"i": v.i, "j": v.j, "before": num(v.before), "after": num(v.after)}))
        .collect();
    json!({
        "verdict": verdict,
        "failing_hypothesis": r.failing_hypothesis.map(hypothesis_name),
        "generators": gate.inputs().generators().len(),
        "product_generator": r.product_generator,
        "discordant_generators": r.discordant_generators,
        "discord_change": r.discord_change.map(|(i, d)| json!({"generator": i, "change": num(d)})),
        "reversibility": {
            "necessary_condition_holds": r.reversibility.necessary_condition_holds,
            "violations": violations,
        },
        "local_search": r.local_search.as_ref().map(|s| json!({
            "status": s.status(),
            "found": s.found,
            "residual": num(s.residual),
            "restarts": s.restarts,
        })),
    })
}

pub fn nmr(rho0: &DensityMatrix, gates: &[QuantumChannel], levels: &[f64], opt: &OptimizerConfig) -> Result<Value> {
    let report = nmr_scenario(rho0, gates, levels, opt)?;
    Ok(serde_json::to_value(report)?)
}
