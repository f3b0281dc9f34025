//! On-disk JSON database of optimized decompositions and scalar quantizers.
//!
//! Blind decomposition searches and large scalar quantizers are worth keeping
//! off-line for later runs. The database is a single JSON document:
//!
//! ```json
//! {
//!   "decompositions": [
//!     {
//!       "process": "ornstein-uhlenbeck",
//!       "params": {"theta": 1.0, "sigma": 1.0, "sigma0": 0.7071, "m0": 0.0,
//!                   "mu": 0.0, "T": 3.0},
//!       "budget": 10,
//!       "criterion": "quadratic",
//!       "levels": [5, 2],
//!       "score": 0.6531771291,
//!       "n_rec": 10
//!     }
//!   ],
//!   "quantizers": [ {"n": 2, "points": [-0.7978845608, 0.7978845608]} ]
//! }
//! ```
//!
//! Floating-point fields round-trip bit-for-bit (shortest-representation
//! encoding), so a stored score compares equal to the freshly computed one.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::GaussianProcess;
use crate::quantizer::{QuantizerCache, ScalarQuantizer};
use crate::stratification::{Criterion, ProductDecomposition};

/// Flat parameter record identifying a process instance. Fields that a
/// process kind does not use are zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    /// Mean-reversion rate (OU only).
    pub theta: f64,
    /// Volatility (OU only).
    pub sigma: f64,
    /// Initial standard deviation (OU only).
    pub sigma0: f64,
    /// Initial mean (OU only).
    pub m0: f64,
    /// Long-run mean (OU only).
    pub mu: f64,
    /// Horizon, used by every process.
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl ProcessParams {
    /// Extract the parameter record of a process.
    pub fn of(process: &GaussianProcess) -> Self {
        match *process {
            GaussianProcess::BrownianMotion { horizon }
            | GaussianProcess::BrownianBridge { horizon } => Self {
                theta: 0.0,
                sigma: 0.0,
                sigma0: 0.0,
                m0: 0.0,
                mu: 0.0,
                horizon,
            },
            GaussianProcess::OrnsteinUhlenbeck(ou) => Self {
                theta: ou.theta,
                sigma: ou.sigma,
                sigma0: ou.sigma0,
                m0: ou.m0,
                mu: ou.mu,
                horizon: ou.horizon,
            },
        }
    }

    /// Rebuild the process from a stored kind identifier plus parameters.
    pub fn to_process(&self, kind: &str) -> Result<GaussianProcess> {
        match kind {
            "brownian-motion" => GaussianProcess::brownian_motion(self.horizon),
            "brownian-bridge" => GaussianProcess::brownian_bridge(self.horizon),
            "ornstein-uhlenbeck" => GaussianProcess::ornstein_uhlenbeck(
                self.horizon,
                self.theta,
                self.sigma,
                self.mu,
                self.m0,
                self.sigma0,
            ),
            _ => Err(Error::InvalidParameter {
                name: "process",
                value: f64::NAN,
                reason: "unknown process kind in database",
            }),
        }
    }
}

/// A stored blind-search result.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionRecord {
    /// Process kind identifier (see `GaussianProcess::kind_name`).
    pub process: String,
    /// Process parameters.
    pub params: ProcessParams,
    /// Search budget `N`.
    pub budget: usize,
    /// Criterion identifier (see `Criterion::name`).
    pub criterion: String,
    /// Winning level sequence.
    pub levels: Vec<usize>,
    /// Winning score.
    pub score: f64,
    /// Realized codebook size `Π N_k`.
    pub n_rec: usize,
}

impl DecompositionRecord {
    /// Assemble a record from a search result.
    pub fn new(
        process: &GaussianProcess,
        budget: usize,
        criterion: Criterion,
        dec: &ProductDecomposition,
        score: f64,
    ) -> Self {
        Self {
            process: process.kind_name().to_string(),
            params: ProcessParams::of(process),
            budget,
            criterion: criterion.name().to_string(),
            levels: dec.levels().to_vec(),
            score,
            n_rec: dec.n_rec(),
        }
    }

    /// The stored level sequence as a validated decomposition.
    pub fn decomposition(&self) -> Result<ProductDecomposition> {
        ProductDecomposition::new(self.levels.clone())
    }

    fn matches(
        &self,
        process: &str,
        params: &ProcessParams,
        budget: usize,
        criterion: &str,
    ) -> bool {
        self.process == process
            && self.params == *params
            && self.budget == budget
            && self.criterion == criterion
    }
}

/// A stored scalar quantizer codebook.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuantizerRecord {
    /// Codebook size.
    pub n: usize,
    /// Sorted codebook points.
    pub points: Vec<f64>,
}

/// The whole database document.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Database {
    /// Stored blind-search results.
    #[serde(default)]
    pub decompositions: Vec<DecompositionRecord>,
    /// Stored scalar quantizer codebooks.
    #[serde(default)]
    pub quantizers: Vec<QuantizerRecord>,
}

impl Database {
    /// Parse a database file. Errors on missing or malformed files.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Parse a database file, treating a missing file as an empty database.
    pub fn load_or_default(path: &Path) -> Result<Self> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Self::default())
        }
    }

    /// Write the database as pretty-printed JSON, creating parent
    /// directories as needed.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Find a stored decomposition for an exact (process, params, budget,
    /// criterion) key.
    pub fn find_decomposition(
        &self,
        process: &GaussianProcess,
        budget: usize,
        criterion: Criterion,
    ) -> Option<&DecompositionRecord> {
        let params = ProcessParams::of(process);
        self.decompositions.iter().find(|r| {
            r.matches(process.kind_name(), &params, budget, criterion.name())
        })
    }

    /// Insert or replace the decomposition record with the same key.
    /// Returns `true` when an existing record was replaced.
    pub fn upsert_decomposition(&mut self, record: DecompositionRecord) -> bool {
        if let Some(existing) = self.decompositions.iter_mut().find(|r| {
            r.matches(&record.process, &record.params, record.budget, &record.criterion)
        }) {
            *existing = record;
            true
        } else {
            self.decompositions.push(record);
            false
        }
    }

    /// Find a stored scalar quantizer codebook.
    pub fn find_quantizer(&self, n: usize) -> Option<&QuantizerRecord> {
        self.quantizers.iter().find(|r| r.n == n)
    }

    /// Insert or replace the quantizer codebook of size `n`.
    pub fn upsert_quantizer(&mut self, n: usize, points: Vec<f64>) {
        if let Some(existing) = self.quantizers.iter_mut().find(|r| r.n == n) {
            existing.points = points;
        } else {
            self.quantizers.push(QuantizerRecord { n, points });
        }
        self.quantizers.sort_by_key(|r| r.n);
    }

    /// Store the cells of every quantizer currently held by `cache`.
    pub fn absorb_cache(&mut self, cache: &QuantizerCache) {
        for (n, q) in cache.snapshot() {
            self.upsert_quantizer(n, q.points().to_vec());
        }
    }

    /// Feed stored codebooks into a quantizer cache. Invalid or
    /// non-stationary codebooks are ignored rather than trusted.
    pub fn seed_cache(&self, cache: &QuantizerCache) {
        for record in &self.quantizers {
            if record.n == record.points.len() {
                if let Ok(q) = ScalarQuantizer::from_points(record.points.clone()) {
                    cache.adopt(q);
                }
            }
        }
    }
}
