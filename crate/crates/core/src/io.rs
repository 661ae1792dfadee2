//! JSON interchange for frames and search results.
//!
//! A frame file looks like
//!
//! ```json
//! {
//!   "version": "1",
//!   "K": 1,
//!   "d": 2,
//!   "n": 3,
//!   "vectors": [[[[1.0, 0.0]], [[0.0, 0.0]]], ...],
//!   "metadata": { "seed": 7, "provenance": "gen random", "labels": ["a", "b", "c"] }
//! }
//! ```
//!
//! `vectors[j][r][s]` is coordinate `r` of vector `j` at spectrum point `s`,
//! written as `[re, im]`. Floats use the shortest representation that
//! parses back to the same double, so load followed by save is
//! byte-identical.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Spectrum;
use crate::error::{Error, Result};
use crate::module::Frame;
use crate::optimize::{SearchConfig, SearchResult, TrajectoryPoint};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameFile {
    pub version: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub vectors: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl FrameFile {
    pub fn from_frame(f: &Frame, metadata: Option<Metadata>) -> Self {
        let vectors = f
            .vectors()
            .iter()
            .map(|v| v.coords().iter().map(|c| c.values().iter().map(|z| [z.re, z.im]).collect()).collect())
            .collect();
        FrameFile {
            version: FORMAT_VERSION.to_string(),
            k: f.spectrum().size(),
            d: f.dim(),
            n: f.n(),
            vectors,
            metadata,
        }
    }

    /// Checks the header against the array and builds the frame.
    pub fn to_frame(&self) -> Result<Frame> {
        self.validate()?;
        let sp = Spectrum::new(self.k)?;
        Frame::from_slices(sp, self.d, self.n, |j, s| {
            self.vectors[j].iter().map(|c| Complex64::new(c[s][0], c[s][1])).collect()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Format(m));
        if self.version != FORMAT_VERSION {
            return bad(format!("unsupported version {:?}", self.version));
        }
        if self.k == 0 || self.d == 0 || self.n == 0 {
            return bad("K, d and n must be at least 1".into());
        }
        if self.vectors.len() != self.n {
            return bad(format!("header says n = {} but {} vectors given", self.n, self.vectors.len()));
        }
        for (j, v) in self.vectors.iter().enumerate() {
            if v.len() != self.d {
                return bad(format!("vector {j} has {} coordinates, expected d = {}", v.len(), self.d));
            }
            for (r, c) in v.iter().enumerate() {
                if c.len() != self.k {
                    return bad(format!("vector {j} coordinate {r} has {} values, expected K = {}", c.len(), self.k));
                }
                if let Some(s) = c.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
                    return bad(format!("vector {j} coordinate {r} is not finite at point {s}"));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: FrameFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        to_pretty_json(self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json())
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub coherence: f64,
    /// `[iteration, smoothed objective, coherence]` rows.
    pub trajectory: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResultFile {
    pub version: String,
    pub config: SearchConfig,
    pub best_restart: usize,
    pub best_coherence: f64,
    pub best_coherence_squared: f64,
    pub welch_bound: f64,
    pub target: f64,
    pub attained: bool,
    pub equiangularity_residual: f64,
    pub tightness_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjecture_witness: Option<bool>,
    pub frame: FrameFile,
    pub restarts: Vec<RestartRecord>,
}

impl SearchResultFile {
    pub fn new(r: &SearchResult, metadata: Option<Metadata>) -> Self {
        SearchResultFile {
            version: FORMAT_VERSION.to_string(),
            config: r.config.clone(),
            best_restart: r.best_restart,
            best_coherence: r.best_coherence,
            best_coherence_squared: r.best_coherence * r.best_coherence,
            welch_bound: r.welch_bound,
            target: r.target,
            attained: r.attained,
            equiangularity_residual: r.equiangularity_residual,
            tightness_residual: r.tightness_residual,
            conjecture_witness: r.conjecture_witness,
            frame: FrameFile::from_frame(&r.best_frame, metadata),
            restarts: r
                .restarts
                .iter()
                .enumerate()
                .map(|(i, o)| RestartRecord {
                    restart: i,
                    coherence: o.coherence,
                    trajectory: o.trajectory.iter().map(|p| (p.iteration, p.smoothed, p.coherence)).collect(),
                })
                .collect(),
        }
    }
}

/// CSV with header `restart,iteration,smoothed,coherence`.
pub fn trajectory_csv(r: &SearchResult) -> String {
    let mut out = String::from("restart,iteration,smoothed,coherence\n");
    for (i, o) in r.restarts.iter().enumerate() {
        for TrajectoryPoint { iteration, smoothed, coherence } in &o.trajectory {
            out.push_str(&format!("{i},{iteration},{smoothed:?},{coherence:?}\n"));
        }
    }
    out
}
