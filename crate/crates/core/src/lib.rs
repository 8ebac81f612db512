//! Numerical toolkit for bipartite quantum correlations: mutual information,
//! classical correlation and discord, K-classicality, Petz recovery maps and
//! restricted LOCC gate simulation.

pub mod correlations;
pub mod error;
pub mod io;
pub mod kclassical;
pub mod linalg;
pub mod locc;
pub mod measurements;
pub mod optimize;
pub mod petz;
pub mod qstate;

pub use error::{Error, Result};
pub use measurements::{Instrument, MeasurementClass, PostMeasurement};
pub use optimize::OptimizerConfig;
pub use qstate::{DensityMatrix, Party, QuantumChannel, Subsystem};
