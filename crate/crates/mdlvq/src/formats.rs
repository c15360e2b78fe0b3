//! Versioned file formats: system descriptors, labeling tables and result
//! CSV/JSON. All outputs are byte-deterministic for a fixed (config, seed).

use serde::{Deserialize, Serialize};

use mdlvq_core::labeling::{LabelingFunction, Tuple};
use mdlvq_core::lattice::LatticeSpec;
use mdlvq_core::nested::{NestedSystem, ProductRule};
use mdlvq_core::sim::ExperimentResult;

use crate::config::{lattice_label, lattice_name};
use crate::CliError;

pub const LABELING_VERSION: u32 = 1;
pub const CSV_VERSION: u32 = 1;

/// Serialized nested system: integer similarity matrices over the central
/// basis plus the central lattice spec.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemDescriptor {
    pub version: u32,
    pub lattice: String,
    pub dim: usize,
    pub central_scale: f64,
    pub subs: Vec<MatrixDescriptor>,
    pub product: MatrixDescriptor,
    pub mu: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatrixDescriptor {
    pub matrix: Vec<Vec<i64>>,
}

impl SystemDescriptor {
    pub fn from_system(system: &NestedSystem) -> Self {
        SystemDescriptor {
            version: LABELING_VERSION,
            lattice: lattice_label(system.central().name()).to_string(),
            dim: system.dim(),
            central_scale: system.central().scale(),
            subs: system
                .subs()
                .iter()
                .map(|s| MatrixDescriptor { matrix: s.scale_matrix().clone() })
                .collect(),
            product: MatrixDescriptor { matrix: system.product().scale_matrix().clone() },
            mu: system.mu().to_vec(),
        }
    }

    pub fn to_system(&self) -> Result<NestedSystem, CliError> {
        if self.version != LABELING_VERSION {
            return Err(CliError::invalid(format!(
                "system descriptor version {} unsupported",
                self.version
            )));
        }
        let name = lattice_name(&self.lattice)?;
        let central = LatticeSpec::with_scale(name, self.dim, self.central_scale)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        NestedSystem::build_from_matrices(
            central,
            &self.subs.iter().map(|m| m.matrix.clone()).collect::<Vec<_>>(),
            &self.mu,
            ProductRule::Explicit(self.product.matrix.clone()),
        )
        .map_err(|e| CliError::invalid(e.to_string()))
    }
}

/// Labeling table: bijection between canonical central points and tuples.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LabelingFile {
    pub version: u32,
    pub system: SystemDescriptor,
    pub psi: f64,
    pub radius: f64,
    pub entries: Vec<LabelingEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LabelingEntry {
    /// Central point, integer central-basis coordinates.
    pub c: Vec<i64>,
    /// Assigned tuple, one integer coordinate vector per description.
    pub tuple: Tuple,
}

impl LabelingFile {
    pub fn from_labeling(lab: &LabelingFunction) -> Self {
        LabelingFile {
            version: LABELING_VERSION,
            system: SystemDescriptor::from_system(lab.system()),
            psi: lab.psi(),
            radius: lab.radius(),
            entries: lab
                .centrals()
                .iter()
                .zip(lab.forward())
                .map(|(c, t)| LabelingEntry { c: c.clone(), tuple: t.clone() })
                .collect(),
        }
    }

    pub fn to_labeling(&self) -> Result<LabelingFunction, CliError> {
        if self.version != LABELING_VERSION {
            return Err(CliError::invalid(format!(
                "labeling version {} unsupported",
                self.version
            )));
        }
        let system = self.system.to_system()?;
        let centrals: Vec<Vec<i64>> = self.entries.iter().map(|e| e.c.clone()).collect();
        let forward: Vec<Tuple> = self.entries.iter().map(|e| e.tuple.clone()).collect();
        LabelingFunction::from_parts(system, centrals, forward, self.psi, self.radius)
            .map_err(|e| CliError::invalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("labeling serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::invalid(format!("labeling file: {e}")))
    }
}

/// First line of every CSV: `# mdlvq-csv v<version> <kind>`.
pub fn csv_header(kind: &str) -> String {
    format!("# mdlvq-csv v{CSV_VERSION} {kind}\n")
}

/// Validate the schema line of a CSV produced by this crate.
pub fn check_csv_header(text: &str, kind: &str) -> Result<(), CliError> {
    let first = text.lines().next().unwrap_or("");
    let expected = format!("# mdlvq-csv v{CSV_VERSION} {kind}");
    if first != expected {
        return Err(CliError::invalid(format!(
            "unexpected CSV schema line '{first}' (expected '{expected}')"
        )));
    }
    Ok(())
}

/// Render a float deterministically (shortest round-trip form).
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::from("nan")
    }
}

/// Simulation results as CSV: one row per erasure pattern (the full pattern
/// is the central/all-received row).
pub fn result_to_csv(res: &ExperimentResult) -> String {
    let mut out = csv_header("simulate");
    out.push_str("pattern,samples,empirical_mse,theory_mse,db_gap\n");
    for p in &res.patterns {
        let theory = p.theory_mse.map(fmt_f64).unwrap_or_default();
        let gap = p
            .theory_mse
            .map(|t| fmt_f64(10.0 * (p.empirical_mse / t).log10()))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.label,
            p.samples,
            fmt_f64(p.empirical_mse),
            theory,
            gap
        ));
    }
    out
}

/// Full result as JSON (excludes wall-clock so outputs stay byte-identical
/// across reruns; timing goes to stderr).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultFile {
    pub version: u32,
    pub seed: u64,
    pub samples: u64,
    pub patterns: Vec<PatternRow>,
    pub central_mse: f64,
    pub central_theory: f64,
    pub side_entropy_bits_per_dim: Vec<f64>,
    pub side_rate_theory: Vec<f64>,
    pub central_rate_theory: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatternRow {
    pub pattern: String,
    pub samples: u64,
    pub empirical_mse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory_mse: Option<f64>,
}

pub fn result_to_json(res: &ExperimentResult) -> String {
    let file = ResultFile {
        version: CSV_VERSION,
        seed: res.seed,
        samples: res.samples,
        patterns: res
            .patterns
            .iter()
            .map(|p| PatternRow {
                pattern: p.label.clone(),
                samples: p.samples,
                empirical_mse: p.empirical_mse,
                theory_mse: p.theory_mse,
            })
            .collect(),
        central_mse: res.central_mse,
        central_theory: res.central_theory,
        side_entropy_bits_per_dim: res.side_entropy_bits_per_dim.clone(),
        side_rate_theory: res.side_rate_theory.clone(),
        central_rate_theory: res.central_rate_theory,
    };
    serde_json::to_string_pretty(&file).expect("result serializes")
}
