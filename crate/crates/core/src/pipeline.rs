//! Scenario-driven pipeline: generate or load the sequence, run detection,
//! blow-up, tree assembly and thick-thin decomposition, and emit JSON/CSV
//! artifacts with a run record.
//!
//! Artifacts are deterministic: identical scenario text and seed produce
//! byte-identical tree/thick_thin/profiles/accounting files. The run record
//! carries wall-clock timings and is the one file that varies between runs;
//! it also lists every other artifact with its content checksum.

use crate::bubble_tree::{build_tree, mass_accounting, serialize, thick_thin, BubbleTree};
use crate::error::{Error, Result};
use crate::field::MetricSequence;
use crate::io::{fmt17, load_btseq_file, to_json_string};
use crate::metric_ops::circle_length;
use crate::scenario::{Scenario, SequenceSource};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exit status conventions of the `run` subcommand.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ANALYSIS: i32 = 3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub name: String,
    pub ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
}

/// Run metadata written as `run.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_sha256: String,
    pub tool_version: String,
    pub wall_ms: f64,
    pub stages: Vec<StageTiming>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<ArtifactRecord>,
}

/// Everything a finished run hands back to the caller.
pub struct RunOutcome {
    pub tree: BubbleTree,
    pub record: RunRecord,
    pub out_dir: PathBuf,
}

fn sha256_hex(data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(data);
    let d = h.finalize();
    let mut s = String::with_capacity(64);
    for b in d {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

/// Classify an error into the documented exit codes.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidChart(_) | Error::BadSequenceFile(_) => EXIT_CONFIG,
        Error::CountBoundViolated { .. }
        | Error::BudgetViolated { .. }
        | Error::TreeInvariant(_)
        | Error::ThinViolation { .. } => EXIT_ANALYSIS,
        _ => 1,
    }
}

struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
    records: Vec<ArtifactRecord>,
}

impl ArtifactWriter {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            records: Vec::new(),
        })
    }

    fn emit(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, content)?;
        self.written.push(path);
        self.records.push(ArtifactRecord {
            file: name.to_string(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(())
    }

    /// Remove everything already written (failure cleanup).
    fn rollback(&self) {
        for p in &self.written {
            let _ = std::fs::remove_file(p);
        }
    }
}

fn profiles_csv(seq: &MetricSequence, tree: &BubbleTree, scenario: &Scenario) -> Result<String> {
    let mut csv = String::from("n,r,center_x,center_y,area,energy,circle_length\n");
    let cfg = scenario.analysis.tree_config();
    let candidates = crate::concentration::detect_bubbles(seq, &cfg.detection)?;
    let _ = tree;
    for cand in &candidates {
        let prof = &cand.profile;
        for (fi, &label) in seq.labels.iter().enumerate() {
            for (j, &r) in prof.radii.iter().enumerate() {
                let len = circle_length(&seq.frames[fi], prof.center, r).unwrap_or(f64::NAN);
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    label,
                    fmt17(r),
                    fmt17(prof.center[0]),
                    fmt17(prof.center[1]),
                    fmt17(prof.area_at[fi][j]),
                    fmt17(prof.energy_at[fi][j]),
                    fmt17(len)
                )
                .unwrap();
            }
        }
    }
    Ok(csv)
}

fn load_sequence(scenario: &Scenario) -> Result<MetricSequence> {
    match &scenario.sequence {
        SequenceSource::Family(spec) => spec.generate(),
        SequenceSource::File(path) => {
            let seq = load_btseq_file(path)?;
            Ok(seq)
        }
    }
}

/// Run a scenario end to end, writing the requested artifacts into the
/// output directory (or `out_override` when given).
pub fn run_scenario(scenario: &Scenario, out_override: Option<&Path>) -> Result<RunOutcome> {
    let t0 = Instant::now();
    let mut stages = Vec::new();
    let mut time_stage = |name: &str, start: Instant| {
        stages.push(StageTiming {
            name: name.to_string(),
            ms: start.elapsed().as_secs_f64() * 1e3,
        });
    };

    let t = Instant::now();
    let seq = load_sequence(scenario)?;
    time_stage("sequence", t);

    let cfg = scenario.analysis.tree_config();

    let out_dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| scenario.output.directory.clone());
    let mut writer = ArtifactWriter::new(&out_dir)?;

    let result = (|| -> Result<BubbleTree> {
        let t = Instant::now();
        let tree = build_tree(&seq, &cfg)?;
        time_stage("tree", t);

        let wants = |name: &str| scenario.output.artifacts.iter().any(|a| a == name);

        if wants("tree") {
            let t = Instant::now();
            writer.emit("tree.json", &serialize(&tree)?)?;
            time_stage("emit_tree", t);
        }
        if wants("thick_thin") {
            let t = Instant::now();
            let tt = thick_thin(&tree, &seq, scenario.analysis.thick_thin_eps)?;
            writer.emit("thick_thin.json", &to_json_string(&tt)?)?;
            time_stage("thick_thin", t);
        }
        if wants("accounting") {
            let t = Instant::now();
            let report = mass_accounting(&tree, &seq, &cfg)?;
            writer.emit("accounting.json", &to_json_string(&report)?)?;
            time_stage("accounting", t);
        }
        if wants("profiles") {
            let t = Instant::now();
            writer.emit("profiles.csv", &profiles_csv(&seq, &tree, scenario)?)?;
            time_stage("profiles", t);
        }
        Ok(tree)
    })();

    let tree = match result {
        Ok(t) => t,
        Err(e) => {
            writer.rollback();
            return Err(e);
        }
    };

    let record = RunRecord {
        scenario_sha256: sha256_hex(scenario.source_text.as_bytes()),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        stages,
        warnings: tree.warnings.clone(),
        artifacts: writer.records.clone(),
    };
    if scenario.output.artifacts.iter().any(|a| a == "run") {
        let json = to_json_string(&record)?;
        std::fs::write(out_dir.join("run.json"), json)?;
    }
    Ok(RunOutcome {
        tree,
        record,
        out_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn flat_scenario_runs_and_is_deterministic() {
        let text = "
[domain]
kind = plane_window
center = 0 0
outer_radius = 1.0
grid_n = 64

[sequence]
family = flat
n_values = 1 2 3

[analysis]
filter_eps = 0.5
eps0 = 1.0

[output]
directory = out
";
        let tmp = tempfile::tempdir().unwrap();
        let scenario = parse_scenario(text, tmp.path()).unwrap();
        let out1 = tmp.path().join("a");
        let out2 = tmp.path().join("b");
        let r1 = run_scenario(&scenario, Some(&out1)).unwrap();
        let r2 = run_scenario(&scenario, Some(&out2)).unwrap();
        assert_eq!(r1.tree.vertices.len(), 1);
        assert_eq!(r1.tree.edges.len(), 0);
        for name in ["tree.json", "thick_thin.json", "accounting.json", "profiles.csv"] {
            let a = std::fs::read(out1.join(name)).unwrap();
            let b = std::fs::read(out2.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
        // run.json exists and lists the other artifacts with checksums
        assert_eq!(r1.record.artifacts.len(), 4);
        assert_eq!(
            r1.record.artifacts.iter().map(|a| &a.file).collect::<Vec<_>>(),
            r2.record.artifacts.iter().map(|a| &a.file).collect::<Vec<_>>()
        );
        for (a, b) in r1.record.artifacts.iter().zip(&r2.record.artifacts) {
            assert_eq!(a.sha256, b.sha256);
        }
    }
}
