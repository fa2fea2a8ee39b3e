//! Report envelopes and file formats shared between the library and the
//! CLI: the JSON matrix format, the state-spec format, and CSV emission
//! with round-trip-safe numeric formatting.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::criteria::{Classification, CriterionReport};
use crate::distill::ProtocolTrace;
use crate::error::{Error, Result};
use crate::matcore::{C64, CMatrix, DensityMatrix};
use crate::states::StateFamily;
use crate::tol;
use crate::volume::VolumeEstimate;

/// Matrix file format: row-major complex entries as [re, im] pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let n = rho.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = rho.matrix()[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixFile {
            dim_a: rho.dim_a(),
            dim_b: rho.dim_b(),
            entries,
        }
    }

    pub fn from_matrix(m: &CMatrix, dim_a: usize, dim_b: usize) -> Self {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        MatrixFile {
            dim_a,
            dim_b,
            entries,
        }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let n = self.dim_a * self.dim_b;
        if self.entries.len() != n * n {
            return Err(Error::Input(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                n * n,
                n,
                n,
                self.entries.len()
            )));
        }
        let mat = CMatrix::from_fn(n, n, |i, j| {
            let [re, im] = self.entries[i * n + j];
            C64::new(re, im)
        });
        DensityMatrix::new(mat, self.dim_a, self.dim_b)
    }
}

/// Strict family-spec parsing. Serde's internally tagged enums silently
/// ignore unknown fields, so the accepted keys are re-derived from the
/// parsed spec and compared against the input, recursively through nested
/// `base` specs.
pub fn parse_family_strict(value: &serde_json::Value) -> Result<StateFamily> {
    let spec: StateFamily = serde_json::from_value(value.clone())?;
    let canonical = serde_json::to_value(&spec)?;
    check_no_unknown_keys(value, &canonical)?;
    Ok(spec)
}

fn check_no_unknown_keys(input: &serde_json::Value, canonical: &serde_json::Value) -> Result<()> {
    match (input, canonical) {
        (serde_json::Value::Object(inp), serde_json::Value::Object(can)) => {
            for (key, val) in inp {
                match can.get(key) {
                    Some(cval) => check_no_unknown_keys(val, cval)?,
                    None => {
                        return Err(Error::Input(format!(
                            "unknown field \"{key}\" in state spec"
                        )))
                    }
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Parse a state file: either a matrix file ({"dimA", "dimB", "entries"})
/// or a family spec ({"family": ...}). Unknown fields are rejected.
pub fn parse_state_file(path: &Path) -> Result<(DensityMatrix, serde_json::Value)> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("family").is_some() {
        let spec = parse_family_strict(&value)?;
        let rho = crate::states::make(&spec)?;
        Ok((rho, value))
    } else if value.get("entries").is_some() {
        let file: MatrixFile = serde_json::from_value(value.clone())?;
        Ok((file.to_state()?, value))
    } else {
        Err(Error::Input(
            "state file must contain either a \"family\" spec or a matrix with \"entries\"".into(),
        ))
    }
}

/// Tolerances in effect, embedded in every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    pub tau_herm: f64,
    pub tau_trace: f64,
    pub tau_norm: f64,
    pub tau_pos: f64,
    pub tau_eig: f64,
    pub tau_ent: f64,
    pub tau_rank_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tau_herm: tol::TAU_HERM,
            tau_trace: tol::TAU_TRACE,
            tau_norm: tol::TAU_NORM,
            tau_pos: tol::TAU_POS,
            tau_eig: tol::TAU_EIG,
            tau_ent: tol::TAU_ENT,
            tau_rank_rel: tol::TAU_RANK_REL,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: "entsep".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Envelope embedded in every CLI report: tool version, seed, tolerances
/// and the input spec. Field order is fixed, so identical (command, seed)
/// pairs serialize byte-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub tool: ToolInfo,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub input: serde_json::Value,
    pub result: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(seed: u64, input: serde_json::Value, result: T) -> Self {
        Envelope {
            tool: ToolInfo::default(),
            seed,
            tolerances: Tolerances::default(),
            input,
            result,
        }
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Full criteria battery output for one state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub dim_a: usize,
    pub dim_b: usize,
    pub criteria: Vec<CriterionReport>,
    pub singlet_fraction: Option<f64>,
    pub fully_entangled_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub choi_detection: Option<crate::maps::ChoiDetection>,
    pub classification: Classification,
}

/// Witness evaluation output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    pub map: String,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_on_state: Option<f64>,
    pub product_positivity_min: f64,
    pub product_positivity_probes: usize,
    pub product_positivity_passed: bool,
}

/// UPB validation output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpbCliReport {
    pub members: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    pub orthogonal: bool,
    pub unextendible: bool,
    pub max_gram_offdiag: f64,
    pub complement_rank: usize,
    pub complement_min_pt_eigenvalue: f64,
    pub complement_max_member_overlap: f64,
}

/// 17 significant digits: round-trip safe for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// ProtocolTrace CSV: iteration, F, successProb, cumulativeYieldFactor.
pub fn trace_to_csv(trace: &ProtocolTrace) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["iteration", "F", "successProb", "cumulativeYieldFactor"])
        .map_err(|e| Error::Input(e.to_string()))?;
    for step in &trace.steps {
        wtr.write_record([
            step.iteration.to_string(),
            fmt_f64(step.f),
            fmt_f64(step.success_prob),
            fmt_f64(step.cumulative_yield_factor),
        ])
        .map_err(|e| Error::Input(e.to_string()))?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(e.to_string()))
}

/// VolumeEstimate CSV rows: dims, samples, ratio, stderr, measure, seed.
pub fn volume_to_csv(estimates: &[VolumeEstimate]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "dimA", "dimB", "samples", "pptCount", "ratio", "stderr", "measure", "seed",
    ])
    .map_err(|e| Error::Input(e.to_string()))?;
    for est in estimates {
        wtr.write_record([
            est.dim_a.to_string(),
            est.dim_b.to_string(),
            est.samples.to_string(),
            est.ppt_count.to_string(),
            fmt_f64(est.ratio),
            fmt_f64(est.stderr),
            est.measure.clone(),
            est.seed.to_string(),
        ])
        .map_err(|e| Error::Input(e.to_string()))?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(e.to_string()))
}

/// Write output to a file or stdout when no path is given.
pub fn emit(output: Option<&Path>, content: &str) -> Result<()> {
    match output {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                f.write_all(b"\n")?;
            }
            Ok(())
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

/// Generic family construction from a (name, params) pair, the CLI's
/// `--family name --param k=v` form.
pub fn family_from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<StateFamily> {
    let get = |k: &str| params.get(k).copied();
    let int = |k: &str| -> Result<Option<usize>> {
        match params.get(k) {
            None => Ok(None),
            Some(&v) => {
                if v.fract() != 0.0 || v < 0.0 {
                    Err(Error::Input(format!("parameter {k} must be a nonnegative integer")))
                } else {
                    Ok(Some(v as usize))
                }
            }
        }
    };
    let spec = match name {
        "singlet" => StateFamily::Singlet,
        "max_entangled" => StateFamily::MaxEntangled {
            d: int("d")?.ok_or_else(|| Error::Input("max_entangled needs d".into()))?,
        },
        "werner" => StateFamily::Werner {
            d: int("d")?.ok_or_else(|| Error::Input("werner needs d".into()))?,
            beta: get("beta"),
            p: get("p"),
        },
        "isotropic" => StateFamily::Isotropic {
            d: int("d")?.ok_or_else(|| Error::Input("isotropic needs d".into()))?,
            f: get("f"),
            p: get("p"),
        },
        "two_qubit_example" => StateFamily::TwoQubitExample {
            p: get("p").ok_or_else(|| Error::Input("two_qubit_example needs p".into()))?,
        },
        "stormer" => StateFamily::Stormer {
            alpha: get("alpha").ok_or_else(|| Error::Input("stormer needs alpha".into()))?,
        },
        "rho2x4" => StateFamily::Rho2x4 {
            b: get("b").ok_or_else(|| Error::Input("rho2x4 needs b".into()))?,
        },
        "tiles_upb" => StateFamily::TilesUpb,
        "tiles_bound_entangled" => StateFamily::TilesBoundEntangled,
        "random" => StateFamily::Random {
            dim_a: int("dim_a")?.ok_or_else(|| Error::Input("random needs dim_a".into()))?,
            dim_b: int("dim_b")?.ok_or_else(|| Error::Input("random needs dim_b".into()))?,
            seed: int("seed")?.unwrap_or(0) as u64,
        },
        other => {
            return Err(Error::Input(format!("unknown family \"{other}\"")));
        }
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make, StateFamily};

    #[test]
    fn matrix_file_round_trip() {
        let rho = make(&StateFamily::Stormer { alpha: 3.5 }).unwrap();
        let file = MatrixFile::from_state(&rho);
        let json = serde_json::to_string(&file).unwrap();
        let back: MatrixFile = serde_json::from_str(&json).unwrap();
        let rho2 = back.to_state().unwrap();
        assert!(crate::matcore::max_norm(&(rho.matrix() - rho2.matrix())) < 1e-15);
    }

    #[test]
    fn bad_trace_rejected_with_slack_in_message() {
        let mut file = MatrixFile::from_state(&make(&StateFamily::Singlet).unwrap());
        for e in &mut file.entries {
            e[0] *= 0.9;
            e[1] *= 0.9;
        }
        let err = file.to_state().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("trace deviation"), "message: {msg}");
    }

    #[test]
    fn parse_state_file_handles_both_shapes() {
        let dir = std::env::temp_dir();
        let spec_path = dir.join("entsep_test_spec.json");
        std::fs::write(&spec_path, r#"{"family":"stormer","alpha":3.5}"#).unwrap();
        let (rho, _) = parse_state_file(&spec_path).unwrap();
        let direct = make(&StateFamily::Stormer { alpha: 3.5 }).unwrap();
        assert!(crate::matcore::max_norm(&(rho.matrix() - direct.matrix())) < 1e-15);

        let singlet = make(&StateFamily::Singlet).unwrap();
        let mat_path = dir.join("entsep_test_matrix.json");
        std::fs::write(
            &mat_path,
            serde_json::to_string(&MatrixFile::from_state(&singlet)).unwrap(),
        )
        .unwrap();
        let (rho, _) = parse_state_file(&mat_path).unwrap();
        assert!(crate::matcore::max_norm(&(rho.matrix() - singlet.matrix())) < 1e-15);

        let _ = std::fs::remove_file(spec_path);
        let _ = std::fs::remove_file(mat_path);
    }

    #[test]
    fn csv_formatting_is_round_trip_safe() {
        let x = 0.7884615384615384f64;
        let s = fmt_f64(x);
        let back: f64 = s.parse().unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn family_from_params_works() {
        let mut params = BTreeMap::new();
        params.insert("alpha".to_string(), 3.5);
        let spec = family_from_params("stormer", &params).unwrap();
        assert_eq!(spec, StateFamily::Stormer { alpha: 3.5 });

        let mut params = BTreeMap::new();
        params.insert("d".to_string(), 3.0);
        params.insert("beta".to_string(), -0.5);
        let spec = family_from_params("werner", &params).unwrap();
        assert_eq!(spec, StateFamily::Werner { d: 3, beta: Some(-0.5), p: None });

        assert!(family_from_params("nope", &BTreeMap::new()).is_err());
    }
}
