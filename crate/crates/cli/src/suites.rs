//! Seeded randomized suites. Trial `i` draws everything from
//! `derive_seed(master, i)`, so reports do not depend on scheduling.

use std::path::Path;

use qcorr::correlations::{discord_mi, discord_oz};
use qcorr::petz::{theorem1_check, verify_lemma1, Theorem1Record, THEOREM1_DISCORD_TOL, EQUALITY_TOL};
use qcorr::qstate::{derive_seed, random_density, random_local_channel, rng_from_seed};
use qcorr::{io, DensityMatrix, Error, OptimizerConfig, Party, QuantumChannel, Result};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::canon::{self, num};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Theorem1,
    Petz,
    Equivalence,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Petz => "petz",
            Suite::Equivalence => "equivalence",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem1" => Ok(Suite::Theorem1),
            "petz" => Ok(Suite::Petz),
            "equivalence" => Ok(Suite::Equivalence),
            _ => Err(Error::InvalidInput(format!("unknown suite '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub trial: usize,
    pub seed: u64,
    pub states: Vec<(String, DensityMatrix)>,
    pub channel: Option<QuantumChannel>,
    pub values: Value,
}

#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub report: Value,
    pub passed: bool,
    pub counterexamples: Vec<Counterexample>,
}

pub const EQUIVALENCE_TOL: f64 = 1e-4;
pub const REFERENCE_RECOVERY_TOL: f64 = 1e-9;

pub fn run_suite(suite: Suite, trials: usize, seed: u64, opt: &OptimizerConfig) -> Result<SuiteRun> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let mut run = match suite {
        Suite::Theorem1 => theorem1_suite(trials, seed, opt)?,
        Suite::Petz => petz_suite(trials, seed)?,
        Suite::Equivalence => equivalence_suite(trials, seed, opt)?,
    };
    let obj = run.report.as_object_mut().expect("suite reports are objects");
    obj.insert("suite".into(), json!(suite.name()));
    obj.insert("trials".into(), json!(trials));
    obj.insert("seed".into(), json!(seed));
    obj.insert("passed".into(), json!(run.passed));
    obj.insert("counterexamples".into(), json!(run.counterexamples.len()));
    Ok(run)
}

fn random_dims<R: Rng>(rng: &mut R) -> (usize, usize) {
    if rng.random_bool(0.5) {
        (2, 2)
    } else {
        (2, 3)
    }
}

fn random_side<R: Rng>(rng: &mut R) -> Party {
    if rng.random_bool(0.5) {
        Party::A
    } else {
        Party::B
    }
}

fn side_dim(dims: (usize, usize), side: Party) -> usize {
    match side {
        Party::A => dims.0,
        Party::B => dims.1,
    }
}

struct Theorem1Trial {
    rho: DensityMatrix,
    channel: QuantumChannel,
    record: Theorem1Record,
}

fn theorem1_trial(seed: u64, opt: &OptimizerConfig) -> Result<Theorem1Trial> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng);
    let rank = rng.random_range(1..=dims.0 * dims.1);
    let rho = random_density(dims, rank, rng.random())?;
    let side = random_side(&mut rng);
    let d = side_dim(dims, side);
    let n_kraus = rng.random_range(1..=3);
    let channel = random_local_channel(side, (d, d), n_kraus, rng.random())?;
    let record = theorem1_check(&rho, &channel, opt, Party::A)?;
    Ok(Theorem1Trial { rho, channel, record })
}

fn theorem1_suite(trials: usize, seed: u64, opt: &OptimizerConfig) -> Result<SuiteRun> {
    let results: Vec<Theorem1Trial> =
        (0..trials).into_par_iter().map(|i| theorem1_trial(derive_seed(seed, i as u64), opt)).collect::<Result<_>>()?;
    let mut inconsistent = 0;
    let mut bound_violations = 0;
    let mut near_threshold = 0;
    let mut decreasing = 0;
    let mut increasing = 0;
    let mut min_slack = f64::INFINITY;
    let mut max_abs_dd: f64 = 0.0;
    let mut counterexamples = Vec::new();
    for (i, t) in results.iter().enumerate() {
        let r = &t.record;
        max_abs_dd = max_abs_dd.max(r.d_d.abs());
        if r.d_d > THEOREM1_DISCORD_TOL {
            decreasing += 1;
            min_slack = min_slack.min(r.d_i - r.d_d);
        } else if r.d_d < -THEOREM1_DISCORD_TOL {
            increasing += 1;
        }
        near_threshold += usize::from(r.near_threshold);
        inconsistent += usize::from(!r.consistent);
        bound_violations += usize::from(!r.bound_ok);
        if !r.consistent || !r.bound_ok {
            counterexamples.push(Counterexample {
                trial: i,
                seed: derive_seed(seed, i as u64),
                states: vec![("state".into(), t.rho.clone())],
                channel: Some(t.channel.clone()),
                values: json!({"dI": num(r.d_i), "dD": num(r.d_d), "consistent": r.consistent, "bound_ok": r.bound_ok}),
            });
        }
    }
    let passed = inconsistent == 0 && bound_violations == 0;
    Ok(SuiteRun {
        report: json!({
            "inconsistent": inconsistent,
            "bound_violations": bound_violations,
            "near_threshold": near_threshold,
            "discord_decreasing": decreasing,
            "discord_increasing": increasing,
            "min_bound_slack": num(min_slack),
            "max_abs_dD": num(max_abs_dd),
        }),
        passed,
        counterexamples,
    })
}

struct PetzTrial {
    rho: DensityMatrix,
    tau_a: DensityMatrix,
    tau_b: DensityMatrix,
    channel: QuantumChannel,
    report: qcorr::petz::PetzReport,
}

/// Trial kinds cycle so that both sides of the equivalence are exercised:
/// generic channels, local unitaries, dephasing of states classical in the
/// reference basis, and isometric embeddings.
fn petz_trial(index: usize, seed: u64) -> Result<PetzTrial> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng);
    let (d_a, d_b) = dims;
    let mut tau_a = random_density((d_a, 1), d_a, rng.random())?;
    let tau_b = random_density((d_b, 1), d_b, rng.random())?;
    let rank = rng.random_range(1..=d_a * d_b);
    let mut rho = random_density(dims, rank, rng.random())?;
    let channel = match index % 4 {
        0 => {
            let side = random_side(&mut rng);
            let d = side_dim(dims, side);
            random_local_channel(side, (d, d), rng.random_range(2..=3), rng.random())?
        }
        1 => {
            let side = random_side(&mut rng);
            let d = side_dim(dims, side);
            random_local_channel(side, (d, d), 1, rng.random())?
        }
        2 => {
            let weights: Vec<f64> = (0..d_a).map(|_| rng.random_range(0.05..1.0)).collect();
            let probs: Vec<f64> = weights.iter().map(|w| w / weights.iter().sum::<f64>()).collect();
            tau_a = DensityMatrix::diagonal(&probs, (d_a, 1))?;
            let mut parts = Vec::with_capacity(d_a);
            for a in 0..d_a {
                let cond = random_density((d_b, 1), rng.random_range(1..=d_b), rng.random())?;
                parts.push(DensityMatrix::basis_state(a, 0, (d_a, 1))?.tensor(&cond));
            }
            let p: Vec<f64> = (0..d_a).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = p.iter().sum();
            let weighted: Vec<(f64, &DensityMatrix)> = p.iter().map(|w| w / total).zip(&parts).collect();
            rho = DensityMatrix::mixture(&weighted)?;
            QuantumChannel::computational_dephasing(Party::A, d_a)
        }
        _ => random_local_channel(Party::A, (d_a, d_a + 1), 1, rng.random())?,
    };
    let report = verify_lemma1(&rho, &tau_a, &tau_b, &channel, EQUALITY_TOL)?;
    Ok(PetzTrial { rho, tau_a, tau_b, channel, report })
}

fn petz_suite(trials: usize, seed: u64) -> Result<SuiteRun> {
    let results: Vec<PetzTrial> =
        (0..trials).into_par_iter().map(|i| petz_trial(i, derive_seed(seed, i as u64))).collect::<Result<_>>()?;
    let mut equality = 0;
    let mut recovered = 0;
    let mut iff_violations = 0;
    let mut reference_failures = 0;
    let mut max_reference_error: f64 = 0.0;
    let mut max_state_error_when_equal: f64 = 0.0;
    let mut counterexamples = Vec::new();
    for (i, t) in results.iter().enumerate() {
        let r = &t.report;
        equality += usize::from(r.equality_holds);
        recovered += usize::from(r.recovery_found);
        max_reference_error = max_reference_error.max(r.recovery_errors.1);
        if r.equality_holds {
            max_state_error_when_equal = max_state_error_when_equal.max(r.recovery_errors.0);
        }
        let reference_ok = r.recovery_errors.1 < REFERENCE_RECOVERY_TOL;
        iff_violations += usize::from(!r.iff_holds());
        reference_failures += usize::from(!reference_ok);
        if !r.iff_holds() || !reference_ok {
            counterexamples.push(Counterexample {
                trial: i,
                seed: derive_seed(seed, i as u64),
                states: vec![
                    ("state".into(), t.rho.clone()),
                    ("tau_a".into(), t.tau_a.clone()),
                    ("tau_b".into(), t.tau_b.clone()),
                ],
                channel: Some(t.channel.clone()),
                values: json!({
                    "rel_entropy_before": num(r.rel_entropy_before),
                    "rel_entropy_after": num(r.rel_entropy_after),
                    "recovery_error_state": num(r.recovery_errors.0),
                    "recovery_error_reference": num(r.recovery_errors.1),
                }),
            });
        }
    }
    Ok(SuiteRun {
        report: json!({
            "equality_holds": equality,
            "recovery_found": recovered,
            "iff_violations": iff_violations,
            "reference_recovery_failures": reference_failures,
            "max_reference_recovery_error": num(max_reference_error),
            "max_state_recovery_error_when_equal": num(max_state_error_when_equal),
        }),
        passed: iff_violations == 0 && reference_failures == 0,
        counterexamples,
    })
}

fn equivalence_suite(trials: usize, seed: u64, opt: &OptimizerConfig) -> Result<SuiteRun> {
    let results: Vec<(DensityMatrix, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, i as u64));
            let rho = random_density((2, 2), rng.random_range(1..=4), rng.random())?;
            let oz = discord_oz(&rho, opt);
            let mi = discord_mi(&rho, opt);
            Ok((rho, oz, mi))
        })
        .collect::<Result<_>>()?;
    let mut max_diff: f64 = 0.0;
    let mut counterexamples = Vec::new();
    for (i, (rho, oz, mi)) in results.iter().enumerate() {
        let diff = (oz - mi).abs();
        max_diff = max_diff.max(diff);
        if diff >= EQUIVALENCE_TOL {
            counterexamples.push(Counterexample {
                trial: i,
                seed: derive_seed(seed, i as u64),
                states: vec![("state".into(), rho.clone())],
                channel: None,
                values: json!({"discord_oz": num(*oz), "discord_mi": num(*mi)}),
            });
        }
    }
    Ok(SuiteRun {
        report: json!({"max_abs_difference": num(max_diff), "tolerance": num(EQUIVALENCE_TOL)}),
        passed: counterexamples.is_empty(),
        counterexamples,
    })
}

/// Writes one subdirectory per counterexample plus `manifest.json`.
pub fn dump_counterexamples(dir: &Path, suite: Suite, items: &[Counterexample]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(items.len());
    for c in items {
        let sub = format!("trial-{:05}", c.trial);
        let path = dir.join(&sub);
        std::fs::create_dir_all(&path)?;
        let mut files = Vec::new();
        for (name, rho) in &c.states {
            let file = format!("{name}.json");
            io::write_state(&path.join(&file), rho)?;
            files.push(format!("{sub}/{file}"));
        }
        if let Some(ch) = &c.channel {
            io::write_channel(&path.join("channel.json"), ch)?;
            files.push(format!("{sub}/channel.json"));
        }
        entries.push(json!({"trial": c.trial, "seed": c.seed, "files": files, "values": c.values}));
    }
    let manifest = json!({"suite": suite.name(), "counterexamples": entries});
    std::fs::write(dir.join("manifest.json"), canon::to_json(&manifest))?;
    Ok(())
}
