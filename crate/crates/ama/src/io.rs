//! File formats: problem JSON, delimited trace, reference JSON, report JSON,
//! and the run manifest.
//!
//! Traces and reports are fully determined by their inputs (timing lives in
//! the separate manifest file), so identical runs produce byte-identical
//! files. Floats are written with Rust's shortest round-trip formatting and
//! parse back to the same bit pattern.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certificates::CertificateInputs;
use crate::error::{Error, Result};
use crate::model::{reformulate_qp, ProblemSpec};
use crate::solver::{Algorithm, IterationRecord, MomentumMode, RunMode, Smoothness};

/// On-disk problem description for the reformulated template
/// min ½‖Du − q‖² s.t. Au − v = 0, v ∈ [a, b], u ∈ [−r, r]. A is row-major
/// nested; `r: null` means u is unconstrained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(rename = "A")]
    pub a_mat: Vec<Vec<f64>>,
    /// Lower bounds of the v-box.
    pub a: Vec<f64>,
    /// Upper bounds of the v-box.
    pub b: Vec<f64>,
    /// u-box radius; `null` = ∞.
    pub r: Option<f64>,
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let n = self.a_mat.len();
        let p1 = self.d.len();
        for (i, row) in self.a_mat.iter().enumerate() {
            if row.len() != p1 {
                return Err(Error::DimensionMismatch(format!(
                    "A row {i} has {} entries, D has {p1}",
                    row.len()
                )));
            }
        }
        let flat: Vec<f64> = self.a_mat.iter().flatten().copied().collect();
        reformulate_qp(
            &DVector::from_row_slice(&self.d),
            &DVector::from_row_slice(&self.q),
            &DMatrix::from_row_slice(n, p1, &flat),
            &DVector::from_row_slice(&self.a),
            &DVector::from_row_slice(&self.b),
            self.r.unwrap_or(f64::INFINITY),
        )
    }

    pub fn from_spec_parts(
        d: &DVector<f64>,
        q: &DVector<f64>,
        a_mat: &DMatrix<f64>,
        a: &DVector<f64>,
        b: &DVector<f64>,
        r: f64,
    ) -> Self {
        ProblemFile {
            d: d.iter().copied().collect(),
            q: q.iter().copied().collect(),
            a_mat: (0..a_mat.nrows())
                .map(|i| a_mat.row(i).iter().copied().collect())
                .collect(),
            a: a.iter().copied().collect(),
            b: b.iter().copied().collect(),
            r: if r.is_finite() { Some(r) } else { None },
        }
    }
}

const TRACE_MAGIC: &str = "# ama trace v1";
const TRACE_COLUMNS: &str = "k,eta,f_avg,feas,d_gamma,d_plain,lemma_ok,linesearch_evals,tie_count";

/// A trace plus the run descriptor it was produced under.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub mode: RunMode,
    pub rows: Vec<IterationRecord>,
}

impl TraceFile {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(TRACE_MAGIC);
        out.push('\n');
        let _ = writeln!(out, "# algo={}", self.mode.algorithm);
        let _ = writeln!(
            out,
            "# strongly_convex={}",
            self.mode.smoothness == Smoothness::StronglyConvex
        );
        let _ = writeln!(out, "# line_search={}", self.mode.line_search);
        let _ = writeln!(
            out,
            "# momentum={}",
            self.mode
                .momentum
                .map_or_else(|| "none".to_string(), |m| m.to_string())
        );
        let _ = writeln!(
            out,
            "# gamma={}",
            self.mode
                .gamma
                .map_or_else(|| "none".to_string(), |g| format!("{g}"))
        );
        out.push_str(TRACE_COLUMNS);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.k,
                r.eta,
                r.f_avg,
                r.feas,
                r.d_gamma,
                r.d_plain,
                r.lemma_ok,
                r.linesearch_evals,
                r.tie_count
            );
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let magic = lines.next().unwrap_or_default();
        if magic != TRACE_MAGIC {
            return Err(Error::Parse(format!(
                "expected header '{TRACE_MAGIC}', found '{magic}'"
            )));
        }
        let mut algo = None;
        let mut strongly_convex = None;
        let mut line_search = None;
        let mut momentum = None;
        let mut gamma = None;
        loop {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("trace ends before the column header".into()))?;
            if line == TRACE_COLUMNS {
                break;
            }
            let body = line
                .strip_prefix("# ")
                .ok_or_else(|| Error::Parse(format!("unexpected line '{line}'")))?;
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed metadata '{line}'")))?;
            match key {
                "algo" => {
                    algo = Some(match value {
                        "ama" => Algorithm::Ama,
                        "fama" => Algorithm::AmaAccel,
                        other => return Err(Error::Parse(format!("unknown algo '{other}'"))),
                    })
                }
                "strongly_convex" => strongly_convex = Some(parse_bool(value)?),
                "line_search" => line_search = Some(parse_bool(value)?),
                "momentum" => {
                    momentum = Some(match value {
                        "none" => None,
                        "hat" => Some(MomentumMode::Hat),
                        "classic" => Some(MomentumMode::Classic),
                        other => return Err(Error::Parse(format!("unknown momentum '{other}'"))),
                    })
                }
                "gamma" => {
                    gamma = Some(if value == "none" {
                        None
                    } else {
                        Some(parse_f64(value)?)
                    })
                }
                other => return Err(Error::Parse(format!("unknown metadata key '{other}'"))),
            }
        }
        let mode = RunMode {
            algorithm: algo.ok_or_else(|| Error::Parse("missing 'algo' metadata".into()))?,
            smoothness: if strongly_convex
                .ok_or_else(|| Error::Parse("missing 'strongly_convex' metadata".into()))?
            {
                Smoothness::StronglyConvex
            } else {
                Smoothness::Smoothed
            },
            line_search: line_search
                .ok_or_else(|| Error::Parse("missing 'line_search' metadata".into()))?,
            momentum: momentum.ok_or_else(|| Error::Parse("missing 'momentum' metadata".into()))?,
            gamma: gamma.ok_or_else(|| Error::Parse("missing 'gamma' metadata".into()))?,
        };
        let mut rows = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(Error::Parse(format!(
                    "expected 9 fields, found {} in '{line}'",
                    fields.len()
                )));
            }
            rows.push(IterationRecord {
                k: fields[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad k '{}'", fields[0])))?,
                eta: parse_f64(fields[1])?,
                f_avg: parse_f64(fields[2])?,
                feas: parse_f64(fields[3])?,
                d_gamma: parse_f64(fields[4])?,
                d_plain: parse_f64(fields[5])?,
                lemma_ok: parse_bool(fields[6])?,
                linesearch_evals: fields[7]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad eval count '{}'", fields[7])))?,
                tie_count: fields[8]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad tie count '{}'", fields[8])))?,
            });
        }
        Ok(TraceFile { mode, rows })
    }
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Parse(format!("expected true/false, found '{other}'"))),
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad number '{s}'")))
}

/// On-disk ground truth + certificate constants for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFile {
    pub f_star: f64,
    pub lambda_star: Vec<f64>,
    pub lambda0: Vec<f64>,
    /// Prox-diameter; `null` = ∞ (strongly convex runs with free u).
    pub d_u: Option<f64>,
    pub mu_p: f64,
    pub norm_a: f64,
    pub mu_g: f64,
    /// Smoothing parameter; `null` for strongly convex runs. Mirrors
    /// `mode.gamma`.
    pub gamma: Option<f64>,
    pub mode: RunMode,
}

impl ReferenceFile {
    pub fn new(inputs: &CertificateInputs, mode: &RunMode) -> Self {
        ReferenceFile {
            f_star: inputs.f_star,
            lambda_star: inputs.lambda_star.iter().copied().collect(),
            lambda0: inputs.lambda0.iter().copied().collect(),
            d_u: if inputs.d_u.is_finite() {
                Some(inputs.d_u)
            } else {
                None
            },
            mu_p: inputs.mu_p,
            norm_a: inputs.norm_a,
            mu_g: inputs.mu_g,
            gamma: mode.gamma,
            mode: mode.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ReferenceFile = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        file.validate()?;
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.gamma != self.mode.gamma {
            return Err(Error::TraceVariantMismatch {
                expected: format!("gamma={:?} (mode)", self.mode.gamma),
                found: format!("gamma={:?} (reference)", self.gamma),
            });
        }
        if self.lambda0.len() != self.lambda_star.len() {
            return Err(Error::DimensionMismatch(format!(
                "λ⁰ has length {}, λ* has {}",
                self.lambda0.len(),
                self.lambda_star.len()
            )));
        }
        Ok(())
    }

    pub fn to_inputs(&self) -> CertificateInputs {
        CertificateInputs {
            f_star: self.f_star,
            lambda_star: DVector::from_row_slice(&self.lambda_star),
            lambda0: DVector::from_row_slice(&self.lambda0),
            d_u: self.d_u.unwrap_or(f64::INFINITY),
            mu_p: self.mu_p,
            norm_a: self.norm_a,
            mu_g: self.mu_g,
            gamma: self.gamma.unwrap_or(1.0),
        }
    }
}

/// Writes any serializable report as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Reproducibility sidecar written next to every output file. Timing lives
/// here — never inside traces or reports — so those stay byte-identical
/// across reruns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Argv echo of the command that produced the output.
    pub command: Vec<String>,
    pub seed: Option<u64>,
    /// Snapshot of the effective configuration.
    pub config: serde_json::Value,
    pub crate_version: String,
    pub trace_format: String,
    pub timing_ms: f64,
}

impl RunManifest {
    pub fn new(command: Vec<String>, seed: Option<u64>, config: serde_json::Value, timing_ms: f64) -> Self {
        RunManifest {
            command,
            seed,
            config,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            trace_format: TRACE_MAGIC.trim_start_matches("# ").to_string(),
            timing_ms,
        }
    }

    /// `<output>.manifest.json` alongside the given output file.
    pub fn sidecar_path(out: &Path) -> PathBuf {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        out.with_file_name(name)
    }

    pub fn write_for(&self, out: &Path) -> Result<()> {
        write_json(self, &Self::sidecar_path(out))
    }
}
