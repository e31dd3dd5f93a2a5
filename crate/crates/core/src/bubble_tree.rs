//! Bubble-tree construction, mass accounting and the thick-thin
//! decomposition.
//!
//! `build_tree` applies detection and blow-up recursively. Each vertex
//! summarizes the tail-frame limit away from its bubble disks (an explicit
//! vanished flag plus area/energy), each edge carries the point and the three
//! masses `(a_i, e_i, tau_i)`. Termination is guaranteed twice over: every
//! edge consumes at least `4 pi^2 (1 - eta)^2` of the `C1 * C2` product
//! budget, and an explicit depth cap truncates (with a warning) rather than
//! recursing forever on aliased data.

use crate::concentration::{detect_bubbles, BubbleCandidate, DetectionConfig};
use crate::error::{Error, Result};
use crate::field::MetricSequence;
use crate::io::to_json_string;
use crate::metric_ops::functionals;
use crate::renormalize::{blowup, BlowupConfig, BlowupResult, NeckSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Base,
    Bubble,
    Ghost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartNote {
    Domain,
    SphereMinusInfty,
}

/// One vertex: a limit metric summarized by its tail-frame statistics away
/// from its bubble disks.
#[derive(Debug, Clone)]
pub struct BubbleVertex {
    pub id: usize,
    pub kind: VertexKind,
    pub vanished: bool,
    pub area: f64,
    pub energy: f64,
    pub chart_note: ChartNote,
    pub depth: usize,
    /// recursion stopped here because of the depth cap
    pub truncated: bool,
}

/// One edge: a bubble point with its area mass, energy mass and area loss.
#[derive(Debug, Clone)]
pub struct BubbleEdge {
    pub parent: usize,
    pub child: usize,
    /// bubble point in the parent vertex's chart coordinates
    pub point: [f64; 2],
    pub area_mass: f64,
    pub energy_mass: f64,
    pub area_loss: f64,
    pub efficient: bool,
    /// neck geometry retained for the thick-thin decomposition
    pub neck: NeckSpec,
}

#[derive(Debug, Clone)]
pub struct BubbleTree {
    pub vertices: Vec<BubbleVertex>,
    pub edges: Vec<BubbleEdge>,
    pub root: usize,
    /// max-frame (area, energy) of the input sequence
    pub totals: (f64, f64),
    pub warnings: Vec<String>,
}

/// Thick component: one per vertex.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThickComponent {
    pub component: usize,
    pub vertex: usize,
    pub description: String,
}

/// Thin component: one per edge, a neck annulus with its measured length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThinComponent {
    pub edge: usize,
    pub max_circle_length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThickThinDecomposition {
    pub eps: f64,
    pub thick: Vec<ThickComponent>,
    pub thin: Vec<ThinComponent>,
}

/// Tree construction tuning.
#[derive(Debug, Clone)]
pub struct TreeConfig {
    pub detection: DetectionConfig,
    pub blowup: BlowupConfig,
    pub max_depth: usize,
    /// ghost when the tail sup of phi outside bubble disks drops below this
    pub vanish_threshold: f64,
    /// ...or when the sups decrease monotonically by at least this much over
    /// the sequence and finish below `vanish_soft_cap` (the finite-n signature
    /// of locally uniform divergence to -inf)
    pub vanish_trend_drop: f64,
    pub vanish_soft_cap: f64,
    /// an edge is efficient when its area loss stays below this
    pub efficiency_tol: f64,
    /// relative tolerance of the mass-accounting identities
    pub mass_tol: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            detection: DetectionConfig::default(),
            blowup: BlowupConfig::default(),
            max_depth: 4,
            vanish_threshold: -8.0,
            vanish_trend_drop: 1.0,
            vanish_soft_cap: -1.0,
            efficiency_tol: 0.05 * 4.0 * PI,
            mass_tol: 0.05,
        }
    }
}

impl TreeConfig {
    fn product_floor(&self) -> f64 {
        let t = 2.0 * PI * (1.0 - self.detection.eta);
        t * t
    }
}

/// Per-vertex limit summary: tail functionals and sup(phi) outside the
/// tracked bubble disks, for every frame.
struct LimitSummary {
    area: f64,
    energy: f64,
    vanished: bool,
}

fn limit_summary(
    seq: &MetricSequence,
    exclusions: &[(Vec<[f64; 2]>, f64)], // per candidate: per-frame centers, radius
    cfg: &TreeConfig,
) -> Result<LimitSummary> {
    let chart = seq.chart();
    let mut sups = Vec::with_capacity(seq.len());
    let mut areas = Vec::with_capacity(seq.len());
    let mut energies = Vec::with_capacity(seq.len());
    for (fi, frame) in seq.frames.iter().enumerate() {
        if frame.vanished {
            sups.push(f64::NEG_INFINITY);
            areas.push(0.0);
            energies.push(0.0);
            continue;
        }
        let lap = frame.laplacian()?;
        let member = |p: [f64; 2]| {
            exclusions.iter().all(|(centers, r)| {
                let c = centers[fi];
                (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) > r * r
            })
        };
        let f = crate::metric_ops::functionals_masked(frame, &lap, member);
        areas.push(f.area);
        energies.push(f.energy);
        // sup of phi over the same region
        let n = chart.grid_n;
        let mut sup = f64::NEG_INFINITY;
        for iy in 0..n {
            for ix in 0..n {
                let p = chart.node_pos(ix, iy);
                if chart.contains(p) && member(p) {
                    sup = sup.max(frame.phi[chart.node_index(ix, iy)]);
                }
            }
        }
        sups.push(sup);
    }
    let tail = seq.tail_indices(cfg.blowup.tail_window);
    let tail_sup = tail.clone().map(|i| sups[i]).fold(f64::NEG_INFINITY, f64::max);
    let area = tail.clone().map(|i| areas[i]).fold(f64::INFINITY, f64::min);
    let energy = tail.map(|i| energies[i]).fold(f64::INFINITY, f64::min);
    // vanishing: hard threshold, or a monotone slide toward -inf
    let monotone_drop = sups.windows(2).all(|w| w[1] < w[0])
        && sups[0] - sups[sups.len() - 1] >= cfg.vanish_trend_drop
        && sups[sups.len() - 1] <= cfg.vanish_soft_cap;
    let vanished = tail_sup < cfg.vanish_threshold || monotone_drop;
    Ok(LimitSummary {
        area: if vanished { 0.0 } else { area },
        energy: if vanished { 0.0 } else { energy },
        vanished,
    })
}

/// Per-frame tracked centers for one candidate (the same tracking rule the
/// detector and the recentering step use).
fn tracked_centers(seq: &MetricSequence, cand: &BubbleCandidate) -> Vec<[f64; 2]> {
    seq.frames
        .iter()
        .map(|f| {
            let chart = &f.chart;
            let n = chart.grid_n;
            let mut best = f64::NEG_INFINITY;
            let mut best_p = cand.center;
            if f.vanished {
                return best_p;
            }
            let track_r = 0.5 * cand.r0;
            for iy in 0..n {
                for ix in 0..n {
                    let p = chart.node_pos(ix, iy);
                    let dx = p[0] - cand.center[0];
                    let dy = p[1] - cand.center[1];
                    if dx * dx + dy * dy > track_r * track_r || !chart.contains(p) {
                        continue;
                    }
                    let v = f.phi[chart.node_index(ix, iy)];
                    if v > best {
                        best = v;
                        best_p = p;
                    }
                }
            }
            best_p
        })
        .collect()
}

struct Builder<'a> {
    cfg: &'a TreeConfig,
    vertices: Vec<BubbleVertex>,
    edges: Vec<BubbleEdge>,
    warnings: Vec<String>,
    max_edges: usize,
}

impl<'a> Builder<'a> {
    fn grow(&mut self, seq: &MetricSequence, depth: usize, is_root: bool) -> Result<usize> {
        let candidates = detect_bubbles(seq, &self.cfg.detection)?;

        // convert candidates into blow-ups first (some fail the neck search
        // and stay part of this vertex's limit region)
        let mut conversions: Vec<(BubbleCandidate, BlowupResult)> = Vec::new();
        for cand in candidates {
            if self.edges.len() + conversions.len() >= self.max_edges {
                self.warnings.push(format!(
                    "edge budget {} exhausted at depth {depth}; candidate at ({}, {}) skipped",
                    self.max_edges, cand.center[0], cand.center[1]
                ));
                continue;
            }
            match blowup(seq, &cand, &self.cfg.blowup) {
                Ok(b) => conversions.push((cand, b)),
                Err(Error::NoConcentration) => {
                    self.warnings.push(format!(
                        "candidate at ({}, {}) has no neck at filter {}; kept in the limit",
                        cand.center[0], cand.center[1], self.cfg.blowup.filter_eps
                    ));
                }
                Err(e) => return Err(e),
            }
        }

        // summarize this vertex's limit away from the converted bubbles
        let exclusions: Vec<(Vec<[f64; 2]>, f64)> = conversions
            .iter()
            .map(|(cand, b)| (tracked_centers(seq, cand), b.neck.r1))
            .collect();
        let summary = limit_summary(seq, &exclusions, self.cfg)?;

        let id = self.vertices.len();
        let kind = if summary.vanished {
            VertexKind::Ghost
        } else if is_root {
            VertexKind::Base
        } else {
            VertexKind::Bubble
        };
        self.vertices.push(BubbleVertex {
            id,
            kind,
            vanished: summary.vanished,
            area: summary.area,
            energy: summary.energy,
            chart_note: if is_root {
                ChartNote::Domain
            } else {
                ChartNote::SphereMinusInfty
            },
            depth,
            truncated: false,
        });

        for (cand, b) in conversions {
            let child_id = if depth + 1 > self.cfg.max_depth {
                self.warnings.push(format!(
                    "depth cap {} reached below vertex {id}; child at ({}, {}) not expanded",
                    self.cfg.max_depth, cand.center[0], cand.center[1]
                ));
                // the child becomes a leaf summarized without further detection
                let child_summary = limit_summary(&b.child, &[], self.cfg)?;
                let cid = self.vertices.len();
                self.vertices.push(BubbleVertex {
                    id: cid,
                    kind: if child_summary.vanished {
                        VertexKind::Ghost
                    } else {
                        VertexKind::Bubble
                    },
                    vanished: child_summary.vanished,
                    area: child_summary.area,
                    energy: child_summary.energy,
                    chart_note: ChartNote::SphereMinusInfty,
                    depth: depth + 1,
                    truncated: true,
                });
                cid
            } else {
                self.grow(&b.child, depth + 1, false)?
            };
            self.edges.push(BubbleEdge {
                parent: id,
                child: child_id,
                point: cand.center,
                area_mass: cand.area_conc,
                energy_mass: cand.energy_conc,
                area_loss: b.area_loss,
                efficient: b.area_loss <= self.cfg.efficiency_tol,
                neck: b.neck,
            });
        }
        Ok(id)
    }
}

/// Build the full bubble tree of a sequence.
pub fn build_tree(seq: &MetricSequence, cfg: &TreeConfig) -> Result<BubbleTree> {
    let chart = seq.chart();
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    for frame in &seq.frames {
        let f = functionals(frame, chart)?;
        c1 = c1.max(f.area);
        c2 = c2.max(f.energy);
    }
    let floor = cfg.product_floor();
    let max_edges = ((c1 * c2 / floor).ceil() as usize).max(1);
    let mut builder = Builder {
        cfg,
        vertices: Vec::new(),
        edges: Vec::new(),
        warnings: Vec::new(),
        max_edges,
    };
    let root = builder.grow(seq, 0, true)?;
    let tree = BubbleTree {
        vertices: builder.vertices,
        edges: builder.edges,
        root,
        totals: (c1, c2),
        warnings: builder.warnings,
    };
    validate(&tree, cfg)?;
    Ok(tree)
}

/// Structural invariants of a finished tree.
pub fn validate(tree: &BubbleTree, cfg: &TreeConfig) -> Result<()> {
    let n = tree.vertices.len();
    if tree.root >= n {
        return Err(Error::TreeInvariant("root id out of range".into()));
    }
    // connected & acyclic: every non-root vertex has exactly one parent
    let mut parent_count = vec![0usize; n];
    for e in &tree.edges {
        if e.parent >= n || e.child >= n {
            return Err(Error::TreeInvariant("edge endpoint out of range".into()));
        }
        parent_count[e.child] += 1;
    }
    if parent_count[tree.root] != 0 {
        return Err(Error::TreeInvariant("root has a parent edge".into()));
    }
    for v in &tree.vertices {
        if v.id != tree.root && parent_count[v.id] != 1 {
            return Err(Error::TreeInvariant(format!(
                "vertex {} has {} parents",
                v.id, parent_count[v.id]
            )));
        }
        if (v.kind == VertexKind::Ghost) != v.vanished {
            return Err(Error::TreeInvariant(format!(
                "vertex {} kind/vanished mismatch",
                v.id
            )));
        }
    }
    let root_kind = tree.vertices[tree.root].kind;
    if root_kind == VertexKind::Bubble {
        return Err(Error::TreeInvariant("root must be base or ghost".into()));
    }
    // mass bounds
    let (c1, c2) = tree.totals;
    let sum_a: f64 = tree.edges.iter().map(|e| e.area_mass).sum();
    let sum_e: f64 = tree.edges.iter().map(|e| e.energy_mass).sum();
    let tol = cfg.mass_tol;
    if sum_a > c1 * (1.0 + tol) + 1e-9 {
        return Err(Error::TreeInvariant(format!(
            "edge area masses {sum_a} exceed C1 = {c1}"
        )));
    }
    if sum_e > c2 * (1.0 + tol) + 1e-9 {
        return Err(Error::TreeInvariant(format!(
            "edge energy masses {sum_e} exceed C2 = {c2}"
        )));
    }
    // edge law
    let floor = cfg.product_floor() * (1.0 - 1e-9);
    for (i, e) in tree.edges.iter().enumerate() {
        if e.area_mass * e.energy_mass < floor {
            return Err(Error::TreeInvariant(format!(
                "edge {i} product mass {} below the floor {floor}",
                e.area_mass * e.energy_mass
            )));
        }
        if e.area_loss < -1e-9 {
            return Err(Error::TreeInvariant(format!("edge {i} negative area loss")));
        }
    }
    // ghost law: non-root ghosts need at least two outgoing edges
    let mut out_count = vec![0usize; n];
    for e in &tree.edges {
        out_count[e.parent] += 1;
    }
    for v in &tree.vertices {
        if v.kind == VertexKind::Ghost && v.id != tree.root && out_count[v.id] < 2 && !v.truncated
        {
            return Err(Error::TreeInvariant(format!(
                "non-root ghost vertex {} has {} edges (needs >= 2)",
                v.id, out_count[v.id]
            )));
        }
    }
    // count of vertices with valence != 2
    let mut valence = vec![0usize; n];
    for e in &tree.edges {
        valence[e.parent] += 1;
        valence[e.child] += 1;
    }
    let nontrivial = tree
        .vertices
        .iter()
        .filter(|v| valence[v.id] != 2)
        .count();
    let bound = (c1 * c2).sqrt() + 1.0;
    if (nontrivial as f64) > bound + 1e-9 {
        return Err(Error::TreeInvariant(format!(
            "{nontrivial} vertices of valence != 2 exceed the bound {bound}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Mass accounting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaAccounting {
    pub total: f64,
    pub root_limit: f64,
    pub edge_mass_sum: f64,
    pub neck_loss_sum: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyAccounting {
    pub total: f64,
    pub root_limit: f64,
    pub edge_mass_sum: f64,
    /// `total - root_limit - edge_mass_sum` (may be positive: energy may leak)
    pub surplus: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeMassRow {
    pub edge: usize,
    pub area_mass: f64,
    pub energy_mass: f64,
    pub area_loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassReport {
    pub area: AreaAccounting,
    pub energy: EnergyAccounting,
    pub per_edge: Vec<EdgeMassRow>,
}

/// Check the limit identities at the root: the tail total area must split
/// into the root limit plus the edge masses plus the neck losses, and the
/// tail total energy must dominate the root limit plus the edge masses.
pub fn mass_accounting(tree: &BubbleTree, seq: &MetricSequence, cfg: &TreeConfig) -> Result<MassReport> {
    let last = seq.frames.last().expect("non-empty sequence");
    let totals = functionals(last, seq.chart())?;
    let root = &tree.vertices[tree.root];
    let root_edges: Vec<&BubbleEdge> =
        tree.edges.iter().filter(|e| e.parent == tree.root).collect();
    let sum_a: f64 = root_edges.iter().map(|e| e.area_mass).sum();
    let sum_tau: f64 = root_edges.iter().map(|e| e.area_loss).sum();
    let sum_e: f64 = root_edges.iter().map(|e| e.energy_mass).sum();

    let residual = totals.area - root.area - sum_a - sum_tau;
    let rel = residual.abs() / totals.area.max(1e-300);
    let area = AreaAccounting {
        total: totals.area,
        root_limit: root.area,
        edge_mass_sum: sum_a,
        neck_loss_sum: sum_tau,
        residual,
        relative_residual: rel,
        pass: rel <= cfg.mass_tol,
    };
    let surplus = totals.energy - root.energy - sum_e;
    let energy = EnergyAccounting {
        total: totals.energy,
        root_limit: root.energy,
        edge_mass_sum: sum_e,
        surplus,
        pass: surplus >= -cfg.mass_tol * totals.energy.max(1.0),
    };
    let per_edge = tree
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| EdgeMassRow {
            edge: i,
            area_mass: e.area_mass,
            energy_mass: e.energy_mass,
            area_loss: e.area_loss,
        })
        .collect();
    Ok(MassReport {
        area,
        energy,
        per_edge,
    })
}

// ---------------------------------------------------------------------------
// Thick-thin decomposition
// ---------------------------------------------------------------------------

/// One thin component per tree edge (its neck annulus), one thick component
/// per vertex. Every thin circle length must stay strictly below `eps`.
pub fn thick_thin(tree: &BubbleTree, _seq: &MetricSequence, eps: f64) -> Result<ThickThinDecomposition> {
    let mut thin = Vec::with_capacity(tree.edges.len());
    for (i, e) in tree.edges.iter().enumerate() {
        if eps < e.neck.filter_eps {
            return Err(Error::Config(format!(
                "thick-thin eps {eps} is below the blow-up filter {}",
                e.neck.filter_eps
            )));
        }
        let max_len = e
            .neck
            .max_circle
            .iter()
            .fold(0.0f64, |a, &b| a.max(b));
        if max_len >= eps {
            return Err(Error::ThinViolation { len: max_len, eps });
        }
        thin.push(ThinComponent {
            edge: i,
            max_circle_length: max_len,
        });
    }
    let mut out_count = vec![0usize; tree.vertices.len()];
    for e in &tree.edges {
        out_count[e.parent] += 1;
    }
    let thick = tree
        .vertices
        .iter()
        .map(|v| ThickComponent {
            component: v.id,
            vertex: v.id,
            description: match v.chart_note {
                ChartNote::Domain => format!("domain minus {} bubble disks", out_count[v.id]),
                ChartNote::SphereMinusInfty => format!(
                    "sphere minus infinity and {} bubble disks",
                    out_count[v.id]
                ),
            },
        })
        .collect();
    Ok(ThickThinDecomposition { eps, thick, thin })
}

// ---------------------------------------------------------------------------
// Serialization (pinned JSON schema)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeTotalsDoc {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeVertexDoc {
    pub id: usize,
    pub kind: String,
    pub vanished: bool,
    pub area: f64,
    pub energy: f64,
    pub chart: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEdgeDoc {
    pub parent: usize,
    pub child: usize,
    pub point: [f64; 2],
    pub area_mass: f64,
    pub energy_mass: f64,
    pub area_loss: f64,
    pub efficient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub totals: TreeTotalsDoc,
    pub root: usize,
    pub vertices: Vec<TreeVertexDoc>,
    pub edges: Vec<TreeEdgeDoc>,
}

impl From<&BubbleTree> for TreeDoc {
    fn from(t: &BubbleTree) -> Self {
        TreeDoc {
            totals: TreeTotalsDoc {
                c1: t.totals.0,
                c2: t.totals.1,
            },
            root: t.root,
            vertices: t
                .vertices
                .iter()
                .map(|v| TreeVertexDoc {
                    id: v.id,
                    kind: match v.kind {
                        VertexKind::Base => "base",
                        VertexKind::Bubble => "bubble",
                        VertexKind::Ghost => "ghost",
                    }
                    .to_string(),
                    vanished: v.vanished,
                    area: v.area,
                    energy: v.energy,
                    chart: match v.chart_note {
                        ChartNote::Domain => "domain",
                        ChartNote::SphereMinusInfty => "sphere_minus_infty",
                    }
                    .to_string(),
                })
                .collect(),
            edges: t
                .edges
                .iter()
                .map(|e| TreeEdgeDoc {
                    parent: e.parent,
                    child: e.child,
                    point: e.point,
                    area_mass: e.area_mass,
                    energy_mass: e.energy_mass,
                    area_loss: e.area_loss,
                    efficient: e.efficient,
                })
                .collect(),
        }
    }
}

/// Emit the pinned JSON document (17-digit reals).
pub fn serialize(tree: &BubbleTree) -> Result<String> {
    to_json_string(&TreeDoc::from(tree))
}

/// Parse a tree document back; inverse of [`serialize`] on all schema fields.
pub fn parse(json: &str) -> Result<TreeDoc> {
    serde_json::from_str(json).map_err(|e| Error::Config(format!("bad tree document: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::DomainChart;
    use crate::families::{Family, FamilySpec};

    fn flat_tree() -> (BubbleTree, MetricSequence, TreeConfig) {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 129).unwrap();
        let spec = FamilySpec::new(Family::Flat, chart, vec![1, 2, 3]);
        let seq = spec.generate().unwrap();
        let cfg = TreeConfig::default();
        let tree = build_tree(&seq, &cfg).unwrap();
        (tree, seq, cfg)
    }

    #[test]
    fn flat_sequence_single_vertex() {
        let (tree, seq, cfg) = flat_tree();
        assert_eq!(tree.vertices.len(), 1);
        assert_eq!(tree.edges.len(), 0);
        assert_eq!(tree.vertices[0].kind, VertexKind::Base);
        assert!(!tree.vertices[0].vanished);

        let report = mass_accounting(&tree, &seq, &cfg).unwrap();
        assert!(report.area.pass);
        assert!(report.energy.pass);
        assert!(report.area.relative_residual < 1e-9);

        let tt = thick_thin(&tree, &seq, 1.0).unwrap();
        assert_eq!(tt.thick.len(), 1);
        assert_eq!(tt.thin.len(), 0);
    }

    #[test]
    fn serialize_round_trip() {
        let (tree, _seq, _cfg) = flat_tree();
        let json = serialize(&tree).unwrap();
        let doc = parse(&json).unwrap();
        assert_eq!(doc, TreeDoc::from(&tree));
        // and once more through text to pin bit-exactness
        let json2 = to_json_string(&doc).unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn round_trip_random_trees() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let n_vert = rng.gen_range(1..6usize);
            let doc = TreeDoc {
                totals: TreeTotalsDoc {
                    c1: rng.gen::<f64>() * 100.0,
                    c2: rng.gen::<f64>() * 50.0,
                },
                root: 0,
                vertices: (0..n_vert)
                    .map(|id| TreeVertexDoc {
                        id,
                        kind: ["base", "bubble", "ghost"][rng.gen_range(0..3)].into(),
                        vanished: rng.gen(),
                        area: rng.gen::<f64>() * 20.0,
                        energy: rng.gen::<f64>() * 20.0,
                        chart: ["domain", "sphere_minus_infty"][rng.gen_range(0..2)].into(),
                    })
                    .collect(),
                edges: (1..n_vert)
                    .map(|child| TreeEdgeDoc {
                        parent: 0,
                        child,
                        point: [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5],
                        area_mass: rng.gen::<f64>() * 15.0,
                        energy_mass: rng.gen::<f64>() * 15.0,
                        area_loss: rng.gen::<f64>(),
                        efficient: rng.gen(),
                    })
                    .collect(),
            };
            let json = to_json_string(&doc).unwrap();
            let back: TreeDoc = parse(&json).unwrap();
            assert_eq!(doc, back);
        }
    }

    #[test]
    fn validate_rejects_bad_ghost() {
        let (mut tree, _seq, cfg) = flat_tree();
        // forge a non-root ghost leaf
        tree.vertices.push(BubbleVertex {
            id: 1,
            kind: VertexKind::Ghost,
            vanished: true,
            area: 0.0,
            energy: 0.0,
            chart_note: ChartNote::SphereMinusInfty,
            depth: 1,
            truncated: false,
        });
        tree.edges.push(BubbleEdge {
            parent: 0,
            child: 1,
            point: [0.0, 0.0],
            area_mass: 13.0,
            energy_mass: 13.0,
            area_loss: 0.0,
            efficient: true,
            neck: NeckSpec {
                center: [0.0, 0.0],
                r1: 0.1,
                delta: vec![(1, 0.01)],
                filter_eps: 0.5,
                max_circle: vec![0.4],
            },
        });
        tree.totals = (30.0, 30.0);
        assert!(matches!(
            validate(&tree, &cfg),
            Err(Error::TreeInvariant(_))
        ));
    }
}
