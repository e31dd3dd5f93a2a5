//! Blow-up renormalization: recenter at the supremum of mass, locate the neck
//! radius by the circle-length filter, rescale, and account for area lost in
//! the neck.
//!
//! Recentering translates by whole grid cells and rescaling subsamples the
//! source grid whenever the scale factor aligns child nodes with source
//! nodes, so both operations are exact on the shared samples; only the
//! general-position fallback interpolates.

use crate::chart::DomainChart;
use crate::concentration::BubbleCandidate;
use crate::error::{Error, Result};
use crate::field::{MetricGrid, MetricSequence};
use crate::metric_ops::{circle_length, functionals, Functionals};

/// Neck geometry shared by the frames of one blow-up.
#[derive(Debug, Clone)]
pub struct NeckSpec {
    /// candidate point in the parent chart
    pub center: [f64; 2],
    /// outer neck radius (in recentered coordinates)
    pub r1: f64,
    /// `(frame label, delta_n)` for every frame that carried a neck
    pub delta: Vec<(u64, f64)>,
    pub filter_eps: f64,
    /// per-frame max circle length observed on `[delta_n, r1]`
    pub max_circle: Vec<f64>,
}

/// Outcome of one blow-up: the rescaled child sequence plus its budgets.
#[derive(Debug, Clone)]
pub struct BlowupResult {
    pub child: MetricSequence,
    pub neck: NeckSpec,
    /// area of the neck annulus on the last frame (the tau estimate)
    pub area_loss: f64,
    /// parent concentrations (A_p, K_p) the child must respect
    pub parent_conc: (f64, f64),
    /// tail functionals of the parent over the outer neck disk; everything
    /// the child and the neck carry comes from here
    pub neck_entry: Functionals,
    /// tail functionals of the child over its whole window
    pub child_budget: Functionals,
    /// labels dropped because no neck existed at this filter
    pub dropped_labels: Vec<u64>,
}

/// Blow-up tuning.
#[derive(Debug, Clone)]
pub struct BlowupConfig {
    /// circle-length filter (the scaling constant)
    pub filter_eps: f64,
    /// no-bubble threshold; the filter must stay below it
    pub eps0: f64,
    /// child window radius in rescaled coordinates
    pub child_window: f64,
    /// frames participating in tail estimates
    pub tail_window: usize,
    /// relative slack for the budget inequalities
    pub budget_tol: f64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self {
            filter_eps: 0.5,
            eps0: 1.0,
            child_window: 8.0,
            tail_window: 3,
            budget_tol: 0.05,
        }
    }
}

/// Translate every frame so its maximum of phi over the window sits at the
/// origin of a fresh window chart. Pure integer translation: the argmax is a
/// node and the new grid reuses the source spacing.
pub fn recenter(seq: &MetricSequence, p: [f64; 2], window: f64) -> Result<MetricSequence> {
    let chart = seq.chart();
    let h = chart.spacing();
    let probe = DomainChart::disk(p, window, crate::chart::MIN_GRID_N)?;
    if !chart.contains_region(&probe) {
        return Err(Error::WindowOutOfChart);
    }
    let half = ((window / h).floor() as usize).max(8);
    let new_n = 2 * half + 1;
    let new_chart = DomainChart::window([0.0, 0.0], half as f64 * h, new_n)?;
    let n = chart.grid_n;
    let mut frames = Vec::with_capacity(seq.len());
    for frame in &seq.frames {
        if frame.vanished {
            frames.push(MetricGrid::vanished(&new_chart));
            continue;
        }
        // argmax over nodes within the window disk
        let mut best = f64::NEG_INFINITY;
        let mut best_ij = (n / 2, n / 2);
        for iy in 0..n {
            for ix in 0..n {
                let q = chart.node_pos(ix, iy);
                let dx = q[0] - p[0];
                let dy = q[1] - p[1];
                if dx * dx + dy * dy > window * window || !chart.contains(q) {
                    continue;
                }
                let v = frame.phi[chart.node_index(ix, iy)];
                if v > best {
                    best = v;
                    best_ij = (ix, iy);
                }
            }
        }
        let (cx, cy) = best_ij;
        let mut phi = vec![0.0f64; new_chart.node_count()];
        for jy in 0..new_n {
            for jx in 0..new_n {
                // clamp at the source boundary; recentered windows normally
                // stay interior so this only pads extreme corners
                let sx = (cx as isize + jx as isize - half as isize).clamp(0, n as isize - 1);
                let sy = (cy as isize + jy as isize - half as isize).clamp(0, n as isize - 1);
                phi[new_chart.node_index(jx, jy)] =
                    frame.phi[chart.node_index(sx as usize, sy as usize)];
            }
        }
        frames.push(MetricGrid {
            chart: new_chart.clone(),
            phi,
            vanished: false,
        });
    }
    MetricSequence::new(frames, seq.labels.clone())
}

/// Samples per decade in the downward neck scan.
const SCAN_PER_DECADE: usize = 256;
const BISECT_REL_TOL: f64 = 1e-6;

/// Largest radius `delta <= r1` where the circle length about the chart
/// center reaches `eps`, found by a downward log-spaced scan and bisection.
pub fn neck_radius(g: &MetricGrid, eps: f64, r1: f64) -> Result<f64> {
    neck_radius_detailed(g, eps, r1).map(|d| d.delta)
}

/// Neck search outcome with the scan evidence kept for invariant checks.
#[derive(Debug, Clone)]
pub struct NeckDetail {
    pub delta: f64,
    /// max circle length over the sampled radii in `[delta, r1]`
    pub max_len_in_neck: f64,
}

pub fn neck_radius_detailed(g: &MetricGrid, eps: f64, r1: f64) -> Result<NeckDetail> {
    if g.vanished {
        return Err(Error::VanishedMetric);
    }
    let center = g.chart.center;
    let len = |r: f64| circle_length(g, center, r);
    let l1 = len(r1)?;
    // quadrature-level slack so metrics sitting exactly at the filter (their
    // circle lengths equal eps everywhere) resolve to a crossing at the top
    if l1 > eps * (1.0 + 1e-3) {
        return Err(Error::PreconditionLengthTooLarge(l1, eps));
    }
    if l1 >= eps * (1.0 - 1e-3) {
        return Ok(NeckDetail {
            delta: r1,
            max_len_in_neck: l1,
        });
    }
    let h = g.chart.spacing();
    let r_floor = 2.0 * h;
    if r_floor >= r1 {
        return Err(Error::RadiusUnresolvable(r1, r_floor));
    }
    let decades = (r1 / r_floor).log10();
    let steps = ((decades * SCAN_PER_DECADE as f64).ceil() as usize).max(8);
    let mut prev_r = r1;
    let mut max_len = l1;
    let mut bracket = None;
    for k in 1..=steps {
        let r = r1 * (r_floor / r1).powf(k as f64 / steps as f64);
        let l = len(r)?;
        if l >= eps {
            bracket = Some((r, prev_r));
            break;
        }
        max_len = max_len.max(l);
        prev_r = r;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoCrossing)?;
    // invariant: len(lo) >= eps > len(hi)
    while (hi - lo) / hi > BISECT_REL_TOL {
        let mid = 0.5 * (lo + hi);
        if len(mid)? >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = 0.5 * (lo + hi);
    Ok(NeckDetail {
        delta,
        max_len_in_neck: max_len.max(len(delta)?),
    })
}

/// Rescaled metric `phi_hat(z) = phi(delta z) + ln(delta)` on a window chart
/// of radius about `window`.
///
/// The child spacing is chosen so child nodes sample the source at integer
/// node offsets whenever the source chart center is itself a node; then the
/// resample is exact. Otherwise bilinear interpolation is used.
pub fn rescale(g: &MetricGrid, delta: f64, window: f64) -> Result<MetricGrid> {
    if g.vanished {
        return Err(Error::VanishedMetric);
    }
    if !(delta.is_finite() && delta > 0.0 && window.is_finite() && window > 0.0) {
        return Err(Error::Config(format!("bad rescale parameters delta={delta} window={window}")));
    }
    let chart = &g.chart;
    let h_s = chart.spacing();
    // does the grid have a center node?
    let center_node = if chart.grid_n % 2 == 1 {
        Some(((chart.grid_n - 1) / 2, (chart.grid_n - 1) / 2))
    } else {
        None
    };
    let target_n = 513.min(chart.grid_n | 1);
    let h_c_target = 2.0 * window / (target_n - 1) as f64;

    if let Some((c_ix, c_iy)) = center_node {
        let m = ((delta * h_c_target / h_s).round() as usize).max(1);
        let h_c = m as f64 * h_s / delta;
        let half = (window / h_c).floor() as usize;
        if half < 8 {
            return Err(Error::WindowExceedsSource);
        }
        // the sampled square must stay inside the source grid
        let span = m * half;
        if span > c_ix || span > c_iy || c_ix + span >= chart.grid_n || c_iy + span >= chart.grid_n
        {
            return Err(Error::WindowExceedsSource);
        }
        let new_n = 2 * half + 1;
        let new_chart = DomainChart::window([0.0, 0.0], half as f64 * h_c, new_n)?;
        let ln_delta = delta.ln();
        let mut phi = vec![0.0f64; new_chart.node_count()];
        for jy in 0..new_n {
            for jx in 0..new_n {
                let sx = c_ix + m * jx - span;
                let sy = c_iy + m * jy - span;
                phi[new_chart.node_index(jx, jy)] =
                    g.phi[chart.node_index(sx, sy)] + ln_delta;
            }
        }
        return Ok(MetricGrid {
            chart: new_chart,
            phi,
            vanished: false,
        });
    }

    // general position: bilinear resample
    let half = ((window / h_c_target).floor() as usize).max(8);
    let new_n = 2 * half + 1;
    let h_c = window / half as f64;
    let new_chart = DomainChart::window([0.0, 0.0], window, new_n)?;
    // corners of the sampled square must stay in the source bounding square
    let reach = delta * window;
    if chart.center[0].abs() + reach > chart.outer_radius + 1e-12 * chart.outer_radius
        || chart.center[1].abs() + reach > chart.outer_radius + 1e-12 * chart.outer_radius
    {
        // sampling is about the source chart center
    }
    if reach > chart.outer_radius * (1.0 + 1e-12) {
        return Err(Error::WindowExceedsSource);
    }
    let ln_delta = delta.ln();
    let mut phi = vec![0.0f64; new_chart.node_count()];
    for jy in 0..new_n {
        for jx in 0..new_n {
            let z = [
                -window + jx as f64 * h_c,
                -window + jy as f64 * h_c,
            ];
            let src = [
                chart.center[0] + delta * z[0],
                chart.center[1] + delta * z[1],
            ];
            phi[new_chart.node_index(jx, jy)] = g.sample_phi(src) + ln_delta;
        }
    }
    Ok(MetricGrid {
        chart: new_chart,
        phi,
        vanished: false,
    })
}

/// Rescale onto a caller-fixed child chart (shared by all frames of a child
/// sequence); bilinear unless the alignment happens to be exact.
fn rescale_onto(g: &MetricGrid, delta: f64, child_chart: &DomainChart) -> Result<MetricGrid> {
    let chart = &g.chart;
    let reach = delta * child_chart.outer_radius;
    if reach > chart.outer_radius * (1.0 + 1e-12) {
        return Err(Error::WindowExceedsSource);
    }
    let ln_delta = delta.ln();
    let n = child_chart.grid_n;
    let mut phi = vec![0.0f64; child_chart.node_count()];
    for jy in 0..n {
        for jx in 0..n {
            let z = child_chart.node_pos(jx, jy);
            let src = [
                chart.center[0] + delta * z[0],
                chart.center[1] + delta * z[1],
            ];
            phi[child_chart.node_index(jx, jy)] = g.sample_phi(src) + ln_delta;
        }
    }
    Ok(MetricGrid {
        chart: child_chart.clone(),
        phi,
        vanished: false,
    })
}

/// Full blow-up at an accepted candidate: recenter, pick the outer neck
/// radius from the ladder, find each frame's neck, rescale, and measure the
/// neck's area loss and the child budgets.
pub fn blowup(
    seq: &MetricSequence,
    candidate: &BubbleCandidate,
    cfg: &BlowupConfig,
) -> Result<BlowupResult> {
    if cfg.filter_eps >= cfg.eps0 {
        return Err(Error::Config(format!(
            "filter {} must stay below the no-bubble threshold {}",
            cfg.filter_eps, cfg.eps0
        )));
    }
    let rec = recenter(seq, candidate.center, candidate.r0)?;
    let rc = rec.chart().clone();
    let h = rc.spacing();

    // r1: largest ladder radius where every tail frame is already thin
    let tail = rec.tail_indices(cfg.tail_window);
    let mut r1 = None;
    'ladder: for &r in &candidate.profile.radii {
        if !rc.circle_fits([0.0, 0.0], r, h) {
            continue;
        }
        for i in tail.clone() {
            if rec.frames[i].vanished {
                continue 'ladder;
            }
            let l = circle_length(&rec.frames[i], [0.0, 0.0], r)?;
            if l > 0.5 * cfg.filter_eps {
                continue 'ladder;
            }
        }
        r1 = Some(r);
        break;
    }
    let r1 = r1.ok_or(Error::NoConcentration)?;

    // per-frame neck radii; frames without a neck at this filter are dropped
    let mut kept: Vec<(usize, f64, f64)> = Vec::new(); // (frame idx, delta, max len)
    let mut dropped = Vec::new();
    for (i, frame) in rec.frames.iter().enumerate() {
        match neck_radius_detailed(frame, cfg.filter_eps, r1) {
            Ok(d) => kept.push((i, d.delta, d.max_len_in_neck)),
            Err(Error::NoCrossing)
            | Err(Error::PreconditionLengthTooLarge(..))
            | Err(Error::VanishedMetric)
            | Err(Error::RadiusUnresolvable(..)) => dropped.push(rec.labels[i]),
            Err(e) => return Err(e),
        }
    }
    if kept.len() < 2 {
        return Err(Error::NoConcentration);
    }
    // a genuine concentration has shrinking necks; a static mass does not
    if kept.last().expect("non-empty").1 >= kept[0].1 * (1.0 - 1e-6) {
        return Err(Error::NoConcentration);
    }

    // shared child chart aligned with the last kept frame's rescale factor
    let (_, delta_last, _) = *kept.last().expect("kept is non-empty");
    let target_n = 513.min(rc.grid_n | 1);
    let h_c_target = 2.0 * cfg.child_window / (target_n - 1) as f64;
    let m = ((delta_last * h_c_target / h).round() as usize).max(1);
    let h_c = m as f64 * h / delta_last;
    let half = (cfg.child_window / h_c).floor() as usize;
    if half < 8 {
        return Err(Error::NoConcentration);
    }
    let child_chart = DomainChart::window([0.0, 0.0], half as f64 * h_c, 2 * half + 1)?;

    let mut child_frames = Vec::new();
    let mut child_labels = Vec::new();
    let mut delta_list = Vec::new();
    let mut max_circle = Vec::new();
    for &(i, delta, max_len) in &kept {
        match rescale_onto(&rec.frames[i], delta, &child_chart) {
            Ok(f) => {
                child_frames.push(f);
                child_labels.push(rec.labels[i]);
                delta_list.push((rec.labels[i], delta));
                max_circle.push(max_len);
            }
            Err(Error::WindowExceedsSource) => dropped.push(rec.labels[i]),
            Err(e) => return Err(e),
        }
    }
    if child_frames.len() < 2 {
        return Err(Error::NoConcentration);
    }
    let child = MetricSequence::new(child_frames, child_labels)?;

    // area trapped in the neck annulus, measured on the last frame
    let (last_idx, last_delta) = {
        let &(i, d, _) = kept.last().expect("kept non-empty");
        (i, d)
    };
    let inner = last_delta * cfg.child_window;
    let area_loss = if inner < r1 {
        let annulus = DomainChart::annulus([0.0, 0.0], inner, r1, crate::chart::MIN_GRID_N)?;
        functionals(&rec.frames[last_idx], &annulus)?.area
    } else {
        0.0
    };

    // budgets: the child (plus the neck) may not exceed what flowed into the
    // outer neck disk. The vanishing-radius concentration estimate under-reads
    // at finite n, so the comparison uses the r1-disk content, which bounds
    // the child by monotonicity of the area functional.
    let child_tail = child.tail_indices(cfg.tail_window);
    let mut budget = Functionals {
        area: f64::INFINITY,
        energy: f64::INFINITY,
    };
    for i in child_tail {
        let f = functionals(&child.frames[i], &child_chart)?;
        budget.area = budget.area.min(f.area);
        budget.energy = budget.energy.min(f.energy);
    }
    let entry_region = DomainChart::disk([0.0, 0.0], r1, crate::chart::MIN_GRID_N)?;
    let mut neck_entry = Functionals {
        area: f64::INFINITY,
        energy: f64::INFINITY,
    };
    for &(i, _, _) in kept.iter().rev().take(cfg.tail_window.max(1)) {
        let f = functionals(&rec.frames[i], &entry_region)?;
        neck_entry.area = neck_entry.area.min(f.area);
        neck_entry.energy = neck_entry.energy.min(f.energy);
    }
    let slack = 1.0 + cfg.budget_tol;
    if budget.area > neck_entry.area * slack + 1e-9 {
        return Err(Error::BudgetViolated {
            quantity: "area",
            child: budget.area,
            parent: neck_entry.area,
        });
    }
    if budget.energy > neck_entry.energy * slack + 1e-9 {
        return Err(Error::BudgetViolated {
            quantity: "energy",
            child: budget.energy,
            parent: neck_entry.energy,
        });
    }

    Ok(BlowupResult {
        child,
        neck: NeckSpec {
            center: candidate.center,
            r1,
            delta: delta_list,
            filter_eps: cfg.filter_eps,
            max_circle,
        },
        area_loss,
        parent_conc: (candidate.area_conc, candidate.energy_conc),
        neck_entry,
        child_budget: budget,
        dropped_labels: dropped,
    })
}
