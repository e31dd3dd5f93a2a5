//! Scenario configs: flat sectioned key-value text with `[domain]`,
//! `[sequence]`, `[analysis]` and `[output]` sections.

use crate::bubble_tree::TreeConfig;
use crate::chart::{ChartKind, DomainChart};
use crate::error::{Error, Result};
use crate::families::{Family, FamilySpec, RotsymMode};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Where the frames come from: a generator family or a saved BTSEQ file.
#[derive(Debug, Clone)]
pub enum SequenceSource {
    Family(FamilySpec),
    File(PathBuf),
}

/// Analysis constants for one run.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub filter_eps: f64,
    pub eps0: f64,
    pub eta: f64,
    pub tail_window: usize,
    pub max_depth: usize,
    pub mass_tol: f64,
    pub efficiency_tol: f64,
    pub thick_thin_eps: f64,
    // optional extensions beyond the core key set
    pub child_window: f64,
    pub profile_r0: Option<f64>,
    pub min_area: f64,
    pub merge_radius: Option<f64>,
    pub vanish_threshold: f64,
    pub vanish_trend_drop: f64,
    pub plateau_frac: f64,
    pub budget_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            filter_eps: 0.5,
            eps0: 1.0,
            eta: 0.25,
            tail_window: 3,
            max_depth: 4,
            mass_tol: 0.05,
            efficiency_tol: 0.05 * 4.0 * std::f64::consts::PI,
            thick_thin_eps: 1.0,
            child_window: 8.0,
            profile_r0: None,
            min_area: 0.05 * 4.0 * std::f64::consts::PI,
            merge_radius: None,
            vanish_threshold: -8.0,
            vanish_trend_drop: 1.0,
            plateau_frac: 0.985,
            budget_tol: 0.05,
        }
    }
}

impl AnalysisConfig {
    pub fn tree_config(&self) -> TreeConfig {
        let mut cfg = TreeConfig::default();
        cfg.detection.eta = self.eta;
        cfg.detection.tail_window = self.tail_window;
        cfg.detection.r0 = self.profile_r0;
        cfg.detection.min_area = self.min_area;
        cfg.detection.merge_radius = self.merge_radius;
        cfg.blowup.filter_eps = self.filter_eps;
        cfg.blowup.eps0 = self.eps0;
        cfg.blowup.child_window = self.child_window;
        cfg.blowup.tail_window = self.tail_window;
        cfg.max_depth = self.max_depth;
        cfg.mass_tol = self.mass_tol;
        cfg.efficiency_tol = self.efficiency_tol;
        cfg.vanish_threshold = self.vanish_threshold;
        cfg.vanish_trend_drop = self.vanish_trend_drop;
        cfg.detection.plateau_frac = self.plateau_frac;
        cfg.blowup.budget_tol = self.budget_tol;
        cfg
    }
}

pub const ALL_ARTIFACTS: [&str; 5] = ["tree", "thick_thin", "profiles", "accounting", "run"];

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub artifacts: Vec<String>,
}

/// A parsed scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub chart: DomainChart,
    pub sequence: SequenceSource,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
    /// original text, hashed into the run record
    pub source_text: String,
}

struct Section {
    name: String,
    entries: BTreeMap<String, String>,
    seen: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key).map(|s| s.as_str());
        if v.is_some() {
            self.seen.borrow_mut().insert(key.to_string());
        }
        v
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| {
            Error::Config(format!("[{}] is missing required key `{key}`", self.name))
        })
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|e| Error::Config(format!("[{}] {key}: {e}", self.name))),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|e| Error::Config(format!("[{}] {key}: {e}", self.name))),
        }
    }

    fn unknown_keys(&self) -> Vec<String> {
        let seen = self.seen.borrow();
        self.entries
            .keys()
            .filter(|k| !seen.contains(*k))
            .cloned()
            .collect()
    }
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            let name = line[1..line.len() - 1].trim().to_string();
            if !matches!(name.as_str(), "domain" | "sequence" | "analysis" | "output") {
                return Err(Error::Config(format!("unknown section [{name}]")));
            }
            sections.entry(name.clone()).or_insert_with(|| Section {
                name: name.clone(),
                entries: BTreeMap::new(),
                seen: Default::default(),
            });
            current = Some(name);
            continue;
        }
        let Some(ref sec) = current else {
            return Err(Error::Config(format!(
                "line {}: key outside any section",
                lineno + 1
            )));
        };
        let Some(eq) = line.find('=') else {
            return Err(Error::Config(format!("line {}: expected `key = value`", lineno + 1)));
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        sections
            .get_mut(sec)
            .expect("section just inserted")
            .entries
            .insert(key, value);
    }
    Ok(sections)
}

fn parse_list_f64(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|e| Error::Config(format!("bad number `{t}`: {e}"))))
        .collect()
}

fn parse_list_u64(s: &str) -> Result<Vec<u64>> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|e| Error::Config(format!("bad integer `{t}`: {e}"))))
        .collect()
}

/// Parse and validate a scenario from config text.
pub fn parse_scenario(text: &str, base_dir: &Path) -> Result<Scenario> {
    let sections = split_sections(text)?;
    let need = |name: &str| -> Result<&Section> {
        sections
            .get(name)
            .ok_or_else(|| Error::Config(format!("missing section [{name}]")))
    };

    // [domain]
    let dom = need("domain")?;
    let kind = ChartKind::parse(dom.require("kind")?)?;
    let center = {
        let v = parse_list_f64(dom.get("center").unwrap_or("0 0"))?;
        if v.len() != 2 {
            return Err(Error::Config("[domain] center needs two numbers".into()));
        }
        [v[0], v[1]]
    };
    let outer: f64 = dom
        .require("outer_radius")?
        .parse()
        .map_err(|e| Error::Config(format!("[domain] outer_radius: {e}")))?;
    let inner = dom.f64_or("inner_radius", 0.0)?;
    let grid_n = dom.usize_or("grid_n", 512)?;
    let chart = DomainChart::new(kind, center, outer, inner, grid_n)?;

    // [sequence]
    let seq = need("sequence")?;
    let source = if let Some(path) = seq.get("path") {
        let p = PathBuf::from(path);
        let abs = if p.is_absolute() { p } else { base_dir.join(p) };
        SequenceSource::File(abs)
    } else {
        let family = Family::parse(seq.require("family")?)?;
        let n_values = parse_list_u64(seq.require("n_values")?)?;
        let mut spec = FamilySpec::new(family, chart.clone(), n_values);
        spec.beta = seq.f64_or("beta", spec.beta)?;
        if let Some(r) = seq.get("roots") {
            spec.roots = parse_list_f64(r)?;
        }
        spec.offset_exp = seq.f64_or("offset_exp", spec.offset_exp)?;
        spec.seed = seq.usize_or("seed", spec.seed as usize)? as u64;
        spec.cap_cells = seq.f64_or("cap_cells", spec.cap_cells)?;
        if let Some(m) = seq.get("mode") {
            spec.rotsym_mode = match m {
                "constant" => RotsymMode::Constant,
                "concentrating" => RotsymMode::Concentrating,
                other => return Err(Error::Config(format!("unknown mode `{other}`"))),
            };
        }
        if let Some(f) = seq.get("four_normalized") {
            spec.four_normalized = f
                .parse()
                .map_err(|e| Error::Config(format!("[sequence] four_normalized: {e}")))?;
        }
        SequenceSource::Family(spec)
    };

    // [analysis]
    let d = AnalysisConfig::default();
    let analysis = match sections.get("analysis") {
        None => d,
        Some(a) => AnalysisConfig {
            filter_eps: a.f64_or("filter_eps", d.filter_eps)?,
            eps0: a.f64_or("eps0", d.eps0)?,
            eta: a.f64_or("eta", d.eta)?,
            tail_window: a.usize_or("tail_window", d.tail_window)?,
            max_depth: a.usize_or("max_depth", d.max_depth)?,
            mass_tol: a.f64_or("mass_tol", d.mass_tol)?,
            efficiency_tol: a.f64_or("efficiency_tol", d.efficiency_tol)?,
            thick_thin_eps: a.f64_or("thick_thin_eps", d.thick_thin_eps)?,
            child_window: a.f64_or("child_window", d.child_window)?,
            profile_r0: a.get("profile_r0").map(|s| s.parse()).transpose().map_err(
                |e| Error::Config(format!("[analysis] profile_r0: {e}")),
            )?,
            min_area: a.f64_or("min_area", d.min_area)?,
            merge_radius: a
                .get("merge_radius")
                .map(|s| s.parse())
                .transpose()
                .map_err(|e| Error::Config(format!("[analysis] merge_radius: {e}")))?,
            vanish_threshold: a.f64_or("vanish_threshold", d.vanish_threshold)?,
            vanish_trend_drop: a.f64_or("vanish_trend_drop", d.vanish_trend_drop)?,
            plateau_frac: a.f64_or("plateau_frac", d.plateau_frac)?,
            budget_tol: a.f64_or("budget_tol", d.budget_tol)?,
        },
    };

    // [output]
    let output = match sections.get("output") {
        None => OutputConfig {
            directory: base_dir.join("out"),
            artifacts: ALL_ARTIFACTS.iter().map(|s| s.to_string()).collect(),
        },
        Some(o) => {
            let dir = o.get("directory").unwrap_or("out");
            let p = PathBuf::from(dir);
            let directory = if p.is_absolute() { p } else { base_dir.join(p) };
            let artifacts = match o.get("artifacts") {
                None => ALL_ARTIFACTS.iter().map(|s| s.to_string()).collect(),
                Some(list) => {
                    let items: Vec<String> =
                        list.split_whitespace().map(|s| s.to_string()).collect();
                    for it in &items {
                        if !ALL_ARTIFACTS.contains(&it.as_str()) {
                            return Err(Error::Config(format!("unknown artifact `{it}`")));
                        }
                    }
                    items
                }
            };
            OutputConfig {
                directory,
                artifacts,
            }
        }
    };

    for sec in sections.values() {
        let unknown = sec.unknown_keys();
        if !unknown.is_empty() {
            return Err(Error::Config(format!(
                "[{}] has unknown keys: {}",
                sec.name,
                unknown.join(", ")
            )));
        }
    }

    let scenario = Scenario {
        chart,
        sequence: source,
        analysis,
        output,
        source_text: text.to_string(),
    };
    validate_scenario(&scenario)?;
    Ok(scenario)
}

/// Cross-field invariants of a parsed scenario.
pub fn validate_scenario(s: &Scenario) -> Result<()> {
    let a = &s.analysis;
    if !(a.filter_eps > 0.0 && a.filter_eps < a.eps0) {
        return Err(Error::Config(format!(
            "filter_eps ({}) must be positive and below eps0 ({})",
            a.filter_eps, a.eps0
        )));
    }
    if !(a.eta > 0.0 && a.eta < 1.0) {
        return Err(Error::Config(format!("eta must lie in (0, 1), got {}", a.eta)));
    }
    if a.tail_window < 2 {
        return Err(Error::Config(format!(
            "tail_window must be >= 2, got {}",
            a.tail_window
        )));
    }
    if a.max_depth < 1 {
        return Err(Error::Config("max_depth must be >= 1".into()));
    }
    if a.thick_thin_eps < a.filter_eps {
        return Err(Error::Config(format!(
            "thick_thin_eps ({}) must be >= filter_eps ({})",
            a.thick_thin_eps, a.filter_eps
        )));
    }
    if let SequenceSource::Family(spec) = &s.sequence {
        if matches!(spec.family, Family::Example2Disk | Family::Example2Glued)
            && !(spec.beta > 0.5 && spec.beta < 1.5)
        {
            return Err(Error::Config(format!(
                "beta must lie in (0.5, 1.5), got {}",
                spec.beta
            )));
        }
    }
    Ok(())
}

pub fn parse_scenario_file(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scenario(&text, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "
[domain]
kind = plane_window
center = 0 0
outer_radius = 1.0
grid_n = 128

[sequence]
family = flat
n_values = 1 2 3

[analysis]
filter_eps = 0.5
eps0 = 1.0

[output]
directory = out
artifacts = tree run
";

    #[test]
    fn parses_good_config() {
        let s = parse_scenario(GOOD, Path::new("/tmp")).unwrap();
        assert_eq!(s.chart.grid_n, 128);
        assert_eq!(s.output.artifacts, vec!["tree", "run"]);
        match s.sequence {
            SequenceSource::Family(ref f) => assert_eq!(f.family, Family::Flat),
            _ => panic!("expected family source"),
        }
    }

    #[test]
    fn rejects_filter_not_below_eps0() {
        let text = GOOD.replace("filter_eps = 0.5", "filter_eps = 1.0");
        let err = parse_scenario(&text, Path::new("/tmp")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("filter_eps"), "{msg}");
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        let text = GOOD.replace("filter_eps = 0.5", "filtr_eps = 0.5");
        assert!(parse_scenario(&text, Path::new("/tmp")).is_err());
        let text2 = format!("{GOOD}\n[extra]\nx = 1\n");
        assert!(parse_scenario(&text2, Path::new("/tmp")).is_err());
    }

    #[test]
    fn rejects_small_tail_window() {
        let text = format!("{GOOD}\n[analysis]\ntail_window = 1\n");
        // appending a duplicate section merges keys; tail_window = 1 violates
        assert!(parse_scenario(&text, Path::new("/tmp")).is_err());
    }
}
