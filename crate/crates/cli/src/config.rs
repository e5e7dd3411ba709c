use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use slowhom::dirichlet::DemoConfig;
use slowhom::Modulus;

/// Everything that determines a run's output. Thread count and wall-clock
/// time are kept out of it on purpose; they live in the artifact metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub modulus: Option<Modulus>,
    pub dim: Option<usize>,
    pub stages: Option<usize>,
    pub gap_base: Option<u32>,
    /// Gap ratio `ϱ` as an exact fraction `p/q`.
    pub rho: Option<String>,
    pub seed_vector: Option<Vec<i64>>,
    pub profile: Option<String>,
    pub spectrum: Option<String>,
    pub backend: String,
    pub outputs: Outputs,
    /// Seed for randomized grids. The current pipelines use fixed grids, so it is recorded but unused.
    pub seed: u64,
    pub demo: Option<DemoConfig>,
    pub input: Option<PathBuf>,
    pub table: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Vec<(String, PathBuf)>,
}

impl RunConfig {
    pub fn new(subcommand: &str, backend: &str) -> Self {
        RunConfig {
            subcommand: subcommand.to_string(),
            modulus: None,
            dim: None,
            stages: None,
            gap_base: None,
            rho: None,
            seed_vector: None,
            profile: None,
            spectrum: None,
            backend: backend.to_string(),
            outputs: Outputs::default(),
            seed: 0,
            demo: None,
            input: None,
            table: None,
        }
    }
}
