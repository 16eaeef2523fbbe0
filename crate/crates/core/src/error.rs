use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mode sum did not converge within {cutoff} modes (last relative term {last_ratio:.3e})")]
    NonConvergence { cutoff: u32, last_ratio: f64 },

    #[error("probe amplitude 1 + eta1 + eta2 is degenerate (|z| = {0:.3e})")]
    DegenerateAmplitude(f64),

    #[error("density matrix is not physical: eigenvalue {value:.6e} outside [-{window:.1e}, 1 + {window:.1e}]")]
    NonPhysical { value: f64, window: f64 },

    #[error("quadrature did not reach tolerance {tol:.1e} within {panels} panels (estimate {estimate:.3e})")]
    Quadrature { tol: f64, panels: usize, estimate: f64 },

    #[error("Fock oracle: {0}")]
    Oracle(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
