//! Concentration profiles, waist functions, bubble detection and the
//! quantitative inequalities they must satisfy.
//!
//! Limits over the sequence index are replaced by tail surrogates: the
//! minimum over the last `tail_window` frames, evaluated at the smallest
//! radius that is both grid-resolvable (>= 4h) and mass-resolved (the value
//! has plateaued along the radius ladder). Detection additionally follows the
//! per-frame supremum of mass when scoring a candidate, mirroring the
//! recentering step of the blow-up: concentration centers drift with the
//! frame index and a fixed disk would miss early frames entirely.

use crate::chart::DomainChart;
use crate::error::{Error, Result};
use crate::field::MetricSequence;
use crate::metric_ops::{circle_length, curvature_field, functionals, Functionals};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Radii-indexed area/energy content around a point, with tail estimates.
#[derive(Debug, Clone)]
pub struct ConcentrationProfile {
    pub center: [f64; 2],
    /// decreasing geometric ladder `r_j = r0 * 2^{-j}`
    pub radii: Vec<f64>,
    /// `area_at[frame][j]` over the disk of radius `radii[j]`
    pub area_at: Vec<Vec<f64>>,
    pub energy_at: Vec<Vec<f64>>,
    /// tail estimate of the area concentration A_p
    pub area_conc: f64,
    /// tail estimate of the energy concentration K_p
    pub energy_conc: f64,
}

/// An accepted concentration point.
#[derive(Debug, Clone)]
pub struct BubbleCandidate {
    pub center: [f64; 2],
    pub area_conc: f64,
    pub energy_conc: f64,
    /// `sqrt(area_conc * energy_conc)`
    pub product_root: f64,
    pub profile: ConcentrationProfile,
    /// outer profile radius used for this candidate
    pub r0: f64,
    /// radius at which the tail estimates were taken
    pub r_min: f64,
    /// true when the trend along the sequence is not monotone at `r_min`
    /// (a subsequence would be needed to realize the concentration)
    pub pseudo: bool,
}

/// Waist concentration function values on a radius ladder.
#[derive(Debug, Clone)]
pub struct WaistProfile {
    pub center: [f64; 2],
    pub rho0: f64,
    /// decreasing ladder of inner radii
    pub rhos: Vec<f64>,
    /// min over r in [rho_j, rho0] and over the tail frames of circle length
    pub waist_at: Vec<f64>,
}

/// Detection tuning; every field has a sensible default.
#[derive(Debug, Clone)]
pub struct DetectionConfig {
    /// slack eta: accept when sqrt(A K) >= (1 - eta) * 2 pi
    pub eta: f64,
    /// merge candidates within this distance; None = 4h
    pub merge_radius: Option<f64>,
    /// minimum accepted area concentration
    pub min_area: f64,
    /// number of tail frames in limit surrogates
    pub tail_window: usize,
    /// outer profile radius; None = auto from the chart and candidate spacing
    pub r0: Option<f64>,
    /// ladder descends while value(next)/value(current) stays above this
    pub plateau_frac: f64,
    /// candidates per frame examined (highest phi first)
    pub max_candidates_per_frame: usize,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            eta: 0.25,
            merge_radius: None,
            min_area: 0.05 * 4.0 * PI,
            tail_window: 3,
            r0: None,
            plateau_frac: 0.985,
            max_candidates_per_frame: 16,
        }
    }
}

impl DetectionConfig {
    pub fn acceptance_threshold(&self) -> f64 {
        (1.0 - self.eta) * 2.0 * PI
    }
}

fn disk_region(center: [f64; 2], r: f64) -> DomainChart {
    DomainChart::disk(center, r, crate::chart::MIN_GRID_N)
        .expect("disk region construction cannot fail for positive radius")
}

/// Geometric radius ladder `r0, r0/2, ..., r0 * 2^{-levels}`.
pub fn radius_ladder(r0: f64, levels: usize) -> Vec<f64> {
    (0..=levels).map(|j| r0 / (1u64 << j) as f64).collect()
}

/// Area/energy content of disks around a fixed point, for every frame and
/// every ladder radius, with tail estimates at the smallest radius.
pub fn concentration_profile(
    seq: &MetricSequence,
    p: [f64; 2],
    r0: f64,
    levels: usize,
    tail_window: usize,
) -> Result<ConcentrationProfile> {
    if levels < 3 {
        return Err(Error::Config(format!("levels must be >= 3, got {levels}")));
    }
    let h = seq.chart().spacing();
    let r_min = r0 / (1u64 << levels) as f64;
    if r_min < 4.0 * h {
        return Err(Error::RadiusUnresolvable(r_min, 4.0 * h));
    }
    if !seq.chart().contains_region(&disk_region(p, r0)) {
        return Err(Error::RegionOutOfChart);
    }
    let radii = radius_ladder(r0, levels);
    let rows: Vec<Vec<Functionals>> = seq
        .frames
        .par_iter()
        .map(|frame| {
            radii
                .iter()
                .map(|&r| functionals(frame, &disk_region(p, r)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let area_at: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|f| f.area).collect()).collect();
    let energy_at: Vec<Vec<f64>> =
        rows.iter().map(|r| r.iter().map(|f| f.energy).collect()).collect();
    let tail = seq.tail_indices(tail_window);
    let last_j = radii.len() - 1;
    let area_conc = tail
        .clone()
        .map(|i| area_at[i][last_j])
        .fold(f64::INFINITY, f64::min);
    let energy_conc = tail
        .map(|i| energy_at[i][last_j])
        .fold(f64::INFINITY, f64::min);
    Ok(ConcentrationProfile {
        center: p,
        radii,
        area_at,
        energy_at,
        area_conc,
        energy_conc,
    })
}

/// Waist concentration function: min circle length over `[rho, rho0]` and
/// over the tail frames, for each rho on the ladder.
pub fn waist(
    seq: &MetricSequence,
    p: [f64; 2],
    rho0: f64,
    levels: usize,
    tail_window: usize,
) -> Result<WaistProfile> {
    let h = seq.chart().spacing();
    let rho_min = rho0 / (1u64 << levels) as f64;
    if rho_min < 4.0 * h {
        return Err(Error::RadiusUnresolvable(rho_min, 4.0 * h));
    }
    let rhos = radius_ladder(rho0, levels);
    // fine log-spaced scan grid over [rho_min, rho0]
    let per_octave = 16usize;
    let total = levels * per_octave + 1;
    let scan: Vec<f64> = (0..total)
        .map(|k| rho0 * (rho_min / rho0).powf(k as f64 / (total - 1) as f64))
        .collect();
    let tail = seq.tail_indices(tail_window);
    let mut mins = vec![f64::INFINITY; scan.len()];
    for fi in tail {
        let frame = &seq.frames[fi];
        let lens: Vec<f64> = scan
            .par_iter()
            .map(|&r| circle_length(frame, p, r))
            .collect::<Result<Vec<_>>>()?;
        for (m, l) in mins.iter_mut().zip(lens) {
            *m = m.min(l);
        }
    }
    // cumulative min going inward, then read off at ladder radii
    let mut waist_at = Vec::with_capacity(rhos.len());
    let mut cursor = 0usize;
    let mut running = f64::INFINITY;
    for &rho in &rhos {
        while cursor < scan.len() && scan[cursor] >= rho * (1.0 - 1e-12) {
            running = running.min(mins[cursor]);
            cursor += 1;
        }
        waist_at.push(running);
    }
    Ok(WaistProfile {
        center: p,
        rho0,
        rhos,
        waist_at,
    })
}

/// Upper bound on the number of simultaneous concentration points carried by
/// total area `c1` and total energy `c2`: `floor(sqrt(c1 c2) / (2 pi))`.
pub fn bubble_count_bound(c1: f64, c2: f64) -> usize {
    if c1 <= 0.0 || c2 <= 0.0 {
        return 0;
    }
    ((c1 * c2).sqrt() / (2.0 * PI)).floor() as usize
}

/// Internal: tracked tail estimate for one candidate. Per frame, the disk
/// follows the frame's max of phi inside the tracking window around the
/// candidate, then the minimum over the tail frames is taken.
struct TrackedScore {
    area: f64,
    energy: f64,
    r_min: f64,
    per_frame_centers: Vec<[f64; 2]>,
    per_frame_area_at_rmin: Vec<f64>,
}

fn argmax_phi_in_disk(
    frame: &crate::field::MetricGrid,
    center: [f64; 2],
    radius: f64,
) -> Option<[f64; 2]> {
    if frame.vanished {
        return None;
    }
    let chart = &frame.chart;
    let n = chart.grid_n;
    let mut best = f64::NEG_INFINITY;
    let mut best_p = None;
    for iy in 0..n {
        for ix in 0..n {
            let p = chart.node_pos(ix, iy);
            let dx = p[0] - center[0];
            let dy = p[1] - center[1];
            if dx * dx + dy * dy > radius * radius || !chart.contains(p) {
                continue;
            }
            let v = frame.phi[chart.node_index(ix, iy)];
            if v > best {
                best = v;
                best_p = Some(p);
            }
        }
    }
    best_p
}

fn tracked_score(
    seq: &MetricSequence,
    candidate: [f64; 2],
    r0: f64,
    cfg: &DetectionConfig,
) -> Result<TrackedScore> {
    let chart = seq.chart();
    let h = chart.spacing();
    let track_r = 0.5 * r0;
    let centers: Vec<[f64; 2]> = seq
        .frames
        .iter()
        .map(|f| argmax_phi_in_disk(f, candidate, track_r).unwrap_or(candidate))
        .collect();
    let tail = seq.tail_indices(cfg.tail_window);
    let last = seq.len() - 1;
    // choose r_min on the last frame by descending the ladder until the mass
    // stops plateauing (or the grid floor is hit)
    let floor = 4.0 * h;
    let max_levels = 6usize;
    let ladder = radius_ladder(r0, max_levels);
    let mut r_min = ladder[0];
    let mut prev = functionals(&seq.frames[last], &disk_region(centers[last], ladder[0]))?.area;
    for &r in ladder.iter().skip(1) {
        if r < floor {
            break;
        }
        let a = functionals(&seq.frames[last], &disk_region(centers[last], r))?.area;
        if prev > 0.0 && a / prev < cfg.plateau_frac {
            break;
        }
        r_min = r;
        prev = a;
    }
    // tail estimates with per-frame tracked centers
    let mut area = f64::INFINITY;
    let mut energy = f64::INFINITY;
    for i in tail {
        let f = functionals(&seq.frames[i], &disk_region(centers[i], r_min))?;
        area = area.min(f.area);
        energy = energy.min(f.energy);
    }
    let per_frame_area_at_rmin: Vec<f64> = seq
        .frames
        .iter()
        .zip(&centers)
        .map(|(frame, &c)| functionals(frame, &disk_region(c, r_min)).map(|f| f.area))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrackedScore {
        area,
        energy,
        r_min,
        per_frame_centers: centers,
        per_frame_area_at_rmin,
    })
}

/// Strict local maxima of phi (8-neighborhood) in one frame, best first.
fn local_maxima(frame: &crate::field::MetricGrid, limit: usize) -> Vec<([f64; 2], f64)> {
    if frame.vanished {
        return Vec::new();
    }
    let chart = &frame.chart;
    let n = chart.grid_n;
    let mut out: Vec<([f64; 2], f64)> = Vec::new();
    for iy in 1..n - 1 {
        for ix in 1..n - 1 {
            let p = chart.node_pos(ix, iy);
            if !chart.contains(p) {
                continue;
            }
            let c = chart.node_index(ix, iy);
            let v = frame.phi[c];
            let neigh = [
                c - 1,
                c + 1,
                c - n,
                c + n,
                c - n - 1,
                c - n + 1,
                c + n - 1,
                c + n + 1,
            ];
            if neigh.iter().all(|&q| v > frame.phi[q]) {
                out.push((p, v));
            }
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out.truncate(limit);
    out
}

/// Detect bubble candidates: density maxima of the tail frames, merged,
/// scored by tracked concentration estimates, and screened by the
/// `sqrt(A K) >= (1 - eta) 2 pi` and minimum-area rules. The accepted count
/// is checked against [`bubble_count_bound`] of the max-frame functionals.
pub fn detect_bubbles(seq: &MetricSequence, cfg: &DetectionConfig) -> Result<Vec<BubbleCandidate>> {
    let chart = seq.chart();
    let h = chart.spacing();
    let merge_r = cfg.merge_radius.unwrap_or(4.0 * h);

    // raw candidates from the tail frames, newest first so merging keeps the
    // latest position
    let tail = seq.tail_indices(cfg.tail_window);
    let mut raw: Vec<([f64; 2], f64)> = Vec::new();
    for fi in tail.rev() {
        raw.extend(local_maxima(&seq.frames[fi], cfg.max_candidates_per_frame));
    }
    let mut reps: Vec<[f64; 2]> = Vec::new();
    for (p, _) in &raw {
        if !reps
            .iter()
            .any(|q| (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2) <= merge_r * merge_r)
        {
            reps.push(*p);
        }
    }

    // per-candidate outer radius: clearance to the domain boundary
    let usable = |p: [f64; 2]| -> f64 {
        let dx: f64 = p[0] - chart.center[0];
        let dy: f64 = p[1] - chart.center[1];
        let d = (dx * dx + dy * dy).sqrt();
        match chart.kind {
            crate::chart::ChartKind::PlaneWindow => {
                (chart.outer_radius - dx.abs()).min(chart.outer_radius - dy.abs())
            }
            crate::chart::ChartKind::Disk => chart.outer_radius - d,
            crate::chart::ChartKind::Annulus => {
                (chart.outer_radius - d).min(d - chart.inner_radius)
            }
        }
    };
    let reps_for_sep = reps.clone();
    let min_sep = move |p: [f64; 2]| -> f64 {
        reps_for_sep
            .iter()
            .filter(|q| **q != p)
            .map(|q| ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    };

    let mut accepted: Vec<BubbleCandidate> = Vec::new();
    for p in reps {
        let r0 = match cfg.r0 {
            Some(r) => r,
            None => (0.95 * usable(p)).min(0.5 * min_sep(p)),
        };
        if !(r0.is_finite() && r0 >= 8.0 * h) {
            continue; // unscorable at this grid
        }
        let score = match tracked_score(seq, p, r0, cfg) {
            Ok(s) => s,
            Err(Error::RadiusUnresolvable(..)) | Err(Error::RegionOutOfChart) => continue,
            Err(e) => return Err(e),
        };
        let product_root = (score.area * score.energy).max(0.0).sqrt();
        if product_root < cfg.acceptance_threshold() || score.area < cfg.min_area {
            continue;
        }
        // monotone trend in n at r_min marks a genuine concentration; an
        // up-down trend needs a subsequence (pseudo bubble)
        let pseudo = !score
            .per_frame_area_at_rmin
            .windows(2)
            .all(|w| w[1] >= w[0] * 0.95 - 1e-12);
        let final_center = score.per_frame_centers[seq.len() - 1];
        let levels = ((r0 / score.r_min).log2().round() as usize).max(3);
        let profile = concentration_profile(seq, final_center, r0, levels, cfg.tail_window)?;
        accepted.push(BubbleCandidate {
            center: final_center,
            area_conc: score.area,
            energy_conc: score.energy,
            product_root,
            profile,
            r0,
            r_min: score.r_min,
            pseudo,
        });
    }

    // dedupe candidates whose tracked centers collapsed together
    accepted.sort_by(|a, b| b.product_root.total_cmp(&a.product_root));
    let mut unique: Vec<BubbleCandidate> = Vec::new();
    for c in accepted {
        if !unique.iter().any(|q| {
            (q.center[0] - c.center[0]).powi(2) + (q.center[1] - c.center[1]).powi(2)
                <= merge_r * merge_r
        }) {
            unique.push(c);
        }
    }

    // Proposition-style cardinality check against the sequence's budgets
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    for frame in &seq.frames {
        let f = functionals(frame, chart)?;
        c1 = c1.max(f.area);
        c2 = c2.max(f.energy);
    }
    let bound = bubble_count_bound(c1, c2);
    if unique.len() > bound {
        return Err(Error::CountBoundViolated {
            found: unique.len(),
            bound,
        });
    }
    // stable output order: by x then y
    unique.sort_by(|a, b| {
        a.center[0]
            .total_cmp(&b.center[0])
            .then(a.center[1].total_cmp(&b.center[1]))
    });
    Ok(unique)
}

/// Isoperimetric defect `int_D |K| dg - (2 pi - L^2 / (2 A))` for a disk.
///
/// Ring-based polar quadrature keeps the flat case exact; `|K| dg` reduces to
/// `|lap phi| dx dy`, so the integrand needs no exponentials.
pub fn isoperimetric_defect(g: &crate::field::MetricGrid, disk: &DomainChart) -> Result<f64> {
    if g.vanished {
        return Err(Error::VanishedMetric);
    }
    let chart = &g.chart;
    let h = chart.spacing();
    let padded = DomainChart::disk(disk.center, disk.outer_radius + 2.0 * h, 16)?;
    if !chart.contains_region(&padded) {
        return Err(Error::RegionOutOfChart);
    }
    let lap = g.laplacian()?;
    let r_d = disk.outer_radius;
    let n_r = ((2.0 * r_d / h).ceil() as usize).max(16);
    let dr = r_d / n_r as f64;
    let mut area = 0.0;
    let mut total_abs_k = 0.0;
    for k in 0..n_r {
        let r = (k as f64 + 0.5) * dr;
        let n_t = crate::metric_ops::circle_samples(r, h);
        let dt = 2.0 * PI / n_t as f64;
        let mut ring_area = 0.0;
        let mut ring_k = 0.0;
        for j in 0..n_t {
            let t = j as f64 * dt;
            let p = [disk.center[0] + r * t.cos(), disk.center[1] + r * t.sin()];
            ring_area += (2.0 * g.sample_phi(p)).exp();
            ring_k += lap.sample(p).unwrap_or(0.0).abs();
        }
        area += ring_area * r * dr * dt;
        total_abs_k += ring_k * r * dr * dt;
    }
    let len = circle_length(g, disk.center, r_d)?;
    Ok(total_abs_k - (2.0 * PI - len * len / (2.0 * area)))
}

/// Max over the tail frames and the given radii of `A_n(rho) / rho^alpha`;
/// stays bounded away from concentration points and grows with n at them.
pub fn area_growth_ratio(
    seq: &MetricSequence,
    p: [f64; 2],
    alpha: f64,
    radii: &[f64],
    tail_window: usize,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    let h = seq.chart().spacing();
    let mut worst = 0.0f64;
    for &rho in radii {
        if rho < 4.0 * h {
            return Err(Error::RadiusUnresolvable(rho, 4.0 * h));
        }
        for i in seq.tail_indices(tail_window) {
            let f = functionals(&seq.frames[i], &disk_region(p, rho))?;
            worst = worst.max(f.area / rho.powf(alpha));
        }
    }
    Ok(worst)
}

/// Diagnostics for Lemma-style boundedness observations: circle averages of
/// phi and local sup bounds, reported not enforced.
pub fn circle_average_diagnostic(
    seq: &MetricSequence,
    p: [f64; 2],
    radii: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for &r in radii {
        let mut best = f64::INFINITY;
        for frame in &seq.frames {
            let st = crate::metric_ops::radial_stats(frame, p, r)?;
            best = best.min(st.average);
        }
        rows.push((r, best));
    }
    Ok(rows)
}

/// Curvature of the last frame restricted to a disk (vertex summaries).
pub fn tail_curvature_range(
    seq: &MetricSequence,
    disk: &DomainChart,
) -> Result<Option<(f64, f64)>> {
    let frame = seq.frames.last().expect("sequence is non-empty");
    if frame.vanished {
        return Ok(None);
    }
    let k = curvature_field(frame)?;
    let chart = &frame.chart;
    let n = chart.grid_n;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for iy in 0..n {
        for ix in 0..n {
            let c = chart.node_index(ix, iy);
            if !k.valid_mask[c] {
                continue;
            }
            let p = chart.node_pos(ix, iy);
            let dx = p[0] - disk.center[0];
            let dy = p[1] - disk.center[1];
            if dx * dx + dy * dy <= disk.outer_radius * disk.outer_radius {
                lo = lo.min(k.values[c]);
                hi = hi.max(k.values[c]);
            }
        }
    }
    Ok((lo.is_finite() && hi.is_finite()).then_some((lo, hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::DomainChart;
    use crate::families::{Family, FamilySpec, RotsymMode};
    use crate::field::MetricGrid;

    #[test]
    fn count_bound_arithmetic() {
        let four_pi = 4.0 * PI;
        assert_eq!(bubble_count_bound(four_pi, four_pi), 2);
        assert_eq!(bubble_count_bound(1.0, 1.0), 0);
        assert_eq!(bubble_count_bound(16.0 * PI, four_pi), 4);
        assert_eq!(bubble_count_bound(0.0, 10.0), 0);
    }

    #[test]
    fn profile_monotone_and_flat_tail() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 129).unwrap();
        let spec = FamilySpec::new(Family::Flat, chart, vec![1, 2, 3]);
        let seq = spec.generate().unwrap();
        let prof = concentration_profile(&seq, [0.0, 0.0], 0.5, 3, 3).unwrap();
        for row in &prof.area_at {
            // radii decrease along the row, so values must not increase
            assert!(row.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
        // flat: area(D_r) = pi r^2, energy = 0
        let r_min = *prof.radii.last().unwrap();
        assert!((prof.area_conc - PI * r_min * r_min).abs() / (PI * r_min * r_min) < 0.05);
        assert_eq!(prof.energy_conc, 0.0);
    }

    #[test]
    fn profile_rejects_unresolvable() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 64).unwrap();
        let spec = FamilySpec::new(Family::Flat, chart, vec![1, 2]);
        let seq = spec.generate().unwrap();
        assert!(matches!(
            concentration_profile(&seq, [0.0, 0.0], 0.1, 6, 2),
            Err(Error::RadiusUnresolvable(..))
        ));
    }

    #[test]
    fn waist_flat_is_circumference() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 257).unwrap();
        let spec = FamilySpec::new(Family::Flat, chart, vec![1, 2]);
        let seq = spec.generate().unwrap();
        let w = waist(&seq, [0.0, 0.0], 0.5, 3, 2).unwrap();
        for (rho, l) in w.rhos.iter().zip(&w.waist_at) {
            assert!((l - 2.0 * PI * rho).abs() / l < 1e-3, "rho={rho}: {l}");
        }
        // nonincreasing as rho decreases
        assert!(w.waist_at.windows(2).all(|x| x[1] <= x[0] + 1e-12));
    }

    #[test]
    fn waist_cylinder_constant() {
        let ann = DomainChart::annulus([0.0, 0.0], 0.02, 1.0, 513).unwrap();
        let cyl = MetricGrid::from_fn(&ann, |x, y| -0.5 * (x * x + y * y).max(1e-24).ln()).unwrap();
        let seq = crate::field::MetricSequence::new(vec![cyl.clone(), cyl], vec![1, 2]).unwrap();
        let w = waist(&seq, [0.0, 0.0], 0.5, 3, 2).unwrap();
        for l in &w.waist_at {
            assert!((l - 2.0 * PI).abs() / (2.0 * PI) < 1e-3, "{l}");
        }
    }

    #[test]
    fn detect_flat_finds_nothing() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 129).unwrap();
        let spec = FamilySpec::new(Family::Flat, chart, vec![1, 2, 3]);
        let seq = spec.generate().unwrap();
        let found = detect_bubbles(&seq, &DetectionConfig::default()).unwrap();
        assert!(found.is_empty());
    }

    #[test]
    fn detect_example1_small_scale() {
        // fully resolved variant: offset exponent 1 keeps the drift sub-cell
        let chart = DomainChart::window([0.0, 0.0], 1.0, 257).unwrap();
        let mut spec = FamilySpec::new(Family::Example1, chart, vec![16, 32, 64]);
        spec.offset_exp = 1.0;
        let seq = spec.generate().unwrap();
        let cfg = DetectionConfig {
            tail_window: 2,
            ..DetectionConfig::default()
        };
        let found = detect_bubbles(&seq, &cfg).unwrap();
        assert_eq!(found.len(), 1, "{found:?}");
        let four_pi = 4.0 * PI;
        let b = &found[0];
        assert!((b.area_conc - four_pi).abs() / four_pi < 0.05, "A_p {}", b.area_conc);
        assert!((b.energy_conc - four_pi).abs() / four_pi < 0.08, "K_p {}", b.energy_conc);
        assert!(b.product_root >= cfg.acceptance_threshold());
        assert!(!b.pseudo);
    }

    #[test]
    fn fixed_center_profile_matches_paper_values() {
        // plain profile at the limit point itself, with sub-cell drift
        let chart = DomainChart::window([0.0, 0.0], 1.0, 513).unwrap();
        let mut spec = FamilySpec::new(Family::Example1, chart, vec![32, 64, 128]);
        spec.offset_exp = 1.5;
        let seq = spec.generate().unwrap();
        let prof = concentration_profile(&seq, [0.0, 0.0], 0.8, 3, 2).unwrap();
        let four_pi = 4.0 * PI;
        assert!((prof.area_conc - four_pi).abs() / four_pi < 0.05, "{}", prof.area_conc);
        assert!((prof.energy_conc - four_pi).abs() / four_pi < 0.08, "{}", prof.energy_conc);
    }

    #[test]
    fn detection_center_invariant_under_constant_shift() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 257).unwrap();
        let mut spec = FamilySpec::new(Family::Example1, chart.clone(), vec![16, 32, 64]);
        spec.offset_exp = 1.0;
        let seq = spec.generate().unwrap();
        let cfg = DetectionConfig {
            tail_window: 2,
            ..DetectionConfig::default()
        };
        let base = detect_bubbles(&seq, &cfg).unwrap();
        let shifted_frames = seq
            .frames
            .iter()
            .map(|f| MetricGrid {
                chart: chart.clone(),
                phi: f.phi.iter().map(|p| p + 0.2).collect(),
                vanished: false,
            })
            .collect();
        let shifted = crate::field::MetricSequence::new(shifted_frames, seq.labels.clone()).unwrap();
        let got = detect_bubbles(&shifted, &cfg).unwrap();
        assert_eq!(base.len(), got.len());
        for (a, b) in base.iter().zip(&got) {
            let d = ((a.center[0] - b.center[0]).powi(2) + (a.center[1] - b.center[1]).powi(2))
                .sqrt();
            assert!(d < 1e-12, "center moved by {d}");
        }
    }

    #[test]
    fn isoperimetric_flat_equality() {
        let chart = DomainChart::window([0.0, 0.0], 1.6, 257).unwrap();
        let g = MetricGrid::flat(&chart);
        let disk = DomainChart::disk([0.0, 0.0], 1.0, 16).unwrap();
        let d = isoperimetric_defect(&g, &disk).unwrap();
        assert!(d.abs() < 1e-3, "flat defect {d}");
    }

    #[test]
    fn isoperimetric_hemisphere() {
        // round sphere, unit disk: int |K| = 2 pi, bound = pi, defect = pi
        let chart = DomainChart::window([0.0, 0.0], 1.6, 513).unwrap();
        let g = crate::families::round_sphere(&chart).unwrap();
        let disk = DomainChart::disk([0.0, 0.0], 1.0, 16).unwrap();
        let d = isoperimetric_defect(&g, &disk).unwrap();
        assert!((d - PI).abs() / PI < 0.02, "hemisphere defect {d}");
    }

    #[test]
    fn isoperimetric_random_sweep_nonnegative() {
        let chart = DomainChart::window([0.0, 0.0], 1.6, 257).unwrap();
        for seed in 0..20u64 {
            let mut spec = FamilySpec::new(Family::RandomRotsym, chart.clone(), vec![1, 2]);
            spec.seed = seed;
            spec.rotsym_mode = RotsymMode::Constant;
            let seq = spec.generate().unwrap();
            for r in [0.4, 0.7, 1.0] {
                let disk = DomainChart::disk([0.0, 0.0], r, 16).unwrap();
                let d = isoperimetric_defect(&seq.frames[0], &disk).unwrap();
                assert!(d >= -1e-3, "seed {seed} r {r}: defect {d}");
            }
        }
    }

    #[test]
    fn area_growth_flat() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 257).unwrap();
        let spec = FamilySpec::new(Family::Flat, chart, vec![1, 2]);
        let seq = spec.generate().unwrap();
        // alpha = 1: max over rho <= 1 of pi rho^2 / rho = pi rho_max
        let got = area_growth_ratio(&seq, [0.0, 0.0], 1.0, &[0.2, 0.4, 0.8], 2).unwrap();
        assert!((got - PI * 0.8).abs() / (PI * 0.8) < 0.02, "{got}");
        let exact = area_growth_ratio(&seq, [0.0, 0.0], 1.9999, &[0.2, 0.4, 0.8], 2).unwrap();
        assert!((exact - PI).abs() / PI < 0.02, "{exact}");
    }
}
