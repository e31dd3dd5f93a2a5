//! Built-in metric families with closed-form oracles, plus seeded random
//! rotationally symmetric families for property sweeps.
//!
//! Concentrating families render a bubble only down to the scale the grid can
//! represent: the effective concentration scale is floored at `cap_cells * h`
//! (`cap_cells = 0` disables the floor and samples the raw closed form). The
//! floor preserves the family's area/energy functionals — which are
//! scale-invariant at the concentration core — while keeping every rendered
//! frame integrable by the grid quadrature.

use crate::chart::DomainChart;
use crate::error::{Error, Result};
use crate::field::{MetricGrid, MetricSequence};
use crate::metric_ops::functionals;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Which generator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Shifted spherical bubble collapsing at the origin.
    Example1,
    /// Rotationally symmetric disk capped by a closed geodesic boundary.
    Example2Disk,
    /// Two copies of the disk family glued along the geodesic, presented in
    /// inverted coordinates so the far bubble sits at the chart origin.
    Example2Glued,
    /// Pullback of the round sphere under `w = n * f(z)` with real roots.
    Example3,
    /// Seeded random rotationally symmetric profiles.
    RandomRotsym,
    /// The same flat metric in every frame.
    Flat,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(Family::Example1),
            "example2_disk" => Ok(Family::Example2Disk),
            "example2_glued" => Ok(Family::Example2Glued),
            "example3" => Ok(Family::Example3),
            "random_rotsym" => Ok(Family::RandomRotsym),
            "flat" => Ok(Family::Flat),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Example1 => "example1",
            Family::Example2Disk => "example2_disk",
            Family::Example2Glued => "example2_glued",
            Family::Example3 => "example3",
            Family::RandomRotsym => "random_rotsym",
            Family::Flat => "flat",
        }
    }
}

/// Behavior of the random rotationally symmetric family along the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotsymMode {
    /// Frames are identical.
    Constant,
    /// A spherical bubble of shrinking scale rides on the random profile.
    Concentrating,
}

/// Full description of a generated family.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub family: Family,
    pub n_values: Vec<u64>,
    /// Example 2 exponent; the construction needs 1/2 < beta < 3/2.
    pub beta: f64,
    /// Example 3 real roots of the holomorphic factor.
    pub roots: Vec<f64>,
    /// Example 1 shift exponent (centers sit at `-n^{-offset_exp}`).
    pub offset_exp: f64,
    pub seed: u64,
    pub chart: DomainChart,
    /// Example 1/3: emit `4 n^2 / (1 + n^2 |.|^2)^2` (curvature 1) rather than
    /// the unnormalized `n^2 / (...)^2` variant.
    pub four_normalized: bool,
    /// Grid-resolution floor for concentration scales, in cells (0 disables).
    pub cap_cells: f64,
    pub rotsym_mode: RotsymMode,
}

impl FamilySpec {
    pub fn new(family: Family, chart: DomainChart, n_values: Vec<u64>) -> Self {
        Self {
            family,
            n_values,
            beta: 1.0,
            roots: vec![1.0, 2.0],
            offset_exp: 0.33,
            seed: 0,
            chart,
            four_normalized: true,
            cap_cells: 4.0,
            rotsym_mode: RotsymMode::Constant,
        }
    }

    fn check_common(&self) -> Result<()> {
        if self.n_values.len() < 2 {
            return Err(Error::Config("need at least 2 frame labels".into()));
        }
        if !self.n_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("n_values must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Largest concentration rate the grid can render, `1 / (cap_cells * h)`.
    pub fn rate_cap(&self) -> f64 {
        if self.cap_cells <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / (self.cap_cells * self.chart.spacing())
        }
    }

    pub fn generate(&self) -> Result<MetricSequence> {
        self.check_common()?;
        let seq = match self.family {
            Family::Example1 => gen_example1(self)?,
            Family::Example2Disk => gen_example2_disk(self)?,
            Family::Example2Glued => gen_example2_glued(self)?,
            Family::Example3 => gen_example3(self)?,
            Family::RandomRotsym => gen_random_rotsym(self)?,
            Family::Flat => {
                let frames = self
                    .n_values
                    .iter()
                    .map(|_| MetricGrid::flat(&self.chart))
                    .collect();
                MetricSequence::new(frames, self.n_values.clone())?
            }
        };
        assert_finite_functionals(&seq, self.family)?;
        Ok(seq)
    }
}

/// Round-sphere conformal factor `ln(2 / (1 + |z|^2))` sampled on a chart.
pub fn round_sphere(chart: &DomainChart) -> Result<MetricGrid> {
    MetricGrid::from_fn(chart, |x, y| (2.0 / (1.0 + x * x + y * y)).ln())
}

/// Generation-time sanity: every frame's functionals must be finite. The
/// example-2 constructions carry a geodesic cap whose curvature grows with n,
/// so their energy bound is far looser than the other families'.
fn assert_finite_functionals(seq: &MetricSequence, family: Family) -> Result<()> {
    // the example-2 geodesic band carries curvature that grows with n, so its
    // energy bound is orders looser than the concentrating families'
    let energy_bound = match family {
        Family::Example2Disk | Family::Example2Glued => 1e9,
        _ => 1e3,
    };
    let chart = seq.chart().clone();
    for (frame, label) in seq.frames.iter().zip(&seq.labels) {
        let f = functionals(frame, &chart)?;
        if !(f.area.is_finite() && f.energy.is_finite() && f.area < 1e3 && f.energy < energy_bound)
        {
            return Err(Error::GenerationInvariant(format!(
                "frame {label}: area {} energy {}",
                f.area, f.energy
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Example 1
// ---------------------------------------------------------------------------

fn gen_example1(spec: &FamilySpec) -> Result<MetricSequence> {
    let chart = &spec.chart;
    let cap = spec.rate_cap();
    let mut frames = Vec::with_capacity(spec.n_values.len());
    for &n in &spec.n_values {
        let shift = (n as f64).powf(-spec.offset_exp);
        let center = [-shift, 0.0];
        if !chart.contains(center) {
            return Err(Error::ChartTooSmall(format!(
                "shifted center ({}, 0) outside the chart",
                -shift
            )));
        }
        let rate = (n as f64).min(cap);
        let amp = if spec.four_normalized { 2.0 * rate } else { rate };
        frames.push(MetricGrid::from_fn(chart, |x, y| {
            let dx = x - center[0];
            let dy = y - center[1];
            amp.ln() - (1.0 + rate * rate * (dx * dx + dy * dy)).ln()
        })?);
    }
    MetricSequence::new(frames, spec.n_values.clone())
}

// ---------------------------------------------------------------------------
// Example 2 (disk and glued variants)
// ---------------------------------------------------------------------------

/// Radial profile pieces of the example-2 construction for one frame label.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicCapProfile {
    pub n: f64,
    pub beta: f64,
    /// linear/quadratic band coefficients: `eps_n = beta / ln n`,
    /// `delta_n = beta / ln^2 n`
    pub eps_n: f64,
    pub delta_n: f64,
    /// geodesic radius `T_n = n + ln n`
    pub t_n: f64,
    /// inner cap polynomial `a + b r^2 + c r^4` matching the tail at r = 2
    cap: [f64; 3],
    /// half-width of the C2 junction blend at r = n
    blend_w: f64,
}

impl GeodesicCapProfile {
    pub fn new(n: f64, beta: f64) -> Self {
        let ln_n = n.ln();
        let eps_n = beta / ln_n;
        let delta_n = beta / (ln_n * ln_n);
        let t_n = n + ln_n;
        // tail values at r = 2
        let phi2 = -(2.0f64).ln() - beta * (2.0f64).ln().ln();
        let dphi2 = -0.5 - beta / (2.0 * (2.0f64).ln());
        let l2 = (2.0f64).ln();
        let ddphi2 = 0.25 + beta * (1.0 + l2) / (2.0 * l2).powi(2);
        // a + b r^2 + c r^4 with matching value and two derivatives at r = 2
        let c = (ddphi2 - dphi2 / 2.0) / 32.0;
        let b = (dphi2 - 32.0 * c) / 4.0;
        let a = phi2 - 4.0 * b - 16.0 * c;
        Self {
            n,
            beta,
            eps_n,
            delta_n,
            t_n,
            cap: [a, b, c],
            // the blend must end well inside (n, T_n) so the band formula is
            // exact near the geodesic circle
            blend_w: (0.4 * ln_n).max(0.5),
        }
    }

    /// The limit profile `phi(r) = -ln r - beta ln ln r` (valid for r > 1).
    #[inline]
    pub fn tail(&self, r: f64) -> f64 {
        -r.ln() - self.beta * r.ln().ln()
    }

    #[inline]
    fn cap_piece(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.cap[0] + self.cap[1] * r2 + self.cap[2] * r2 * r2
    }

    /// Band branch `phi(n) + ln n - ln r - eps_n (r - n) + delta_n (r-n)^2/2`,
    /// smooth for all r > 0; governs the metric near the geodesic.
    #[inline]
    pub fn band(&self, r: f64) -> f64 {
        let d = r - self.n;
        self.tail(self.n) + self.n.ln() - r.ln() - self.eps_n * d + 0.5 * self.delta_n * d * d
    }

    /// Frame conformal factor at radius r. Piecewise: inner cap (r <= 2),
    /// limit tail (2 < r < n), geodesic band (n <= r <= T_n), cusp
    /// continuation beyond T_n (the construction only defines the metric on
    /// the geodesic disk; the shared chart needs finite values outside it).
    /// A C2 smoothstep blends the tail/band junction, whose kink would
    /// otherwise carry spurious discrete energy.
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 2.0 {
            return self.cap_piece(r);
        }
        if r > self.t_n {
            // continuation past the geodesic disk: harmonic decay plus the
            // band's quadratic term damped to zero. The damping factor has
            // vanishing first and second derivatives at u = 0, so the
            // junction at T_n matches the band through fourth order and
            // carries no discrete curvature artifact.
            let u = r - self.t_n;
            let ell = 2.0 * self.n.ln();
            let damp = (-(u / ell).powi(3)).exp();
            return self.band(self.t_n) - (r / self.t_n).ln()
                + 0.5 * self.delta_n * u * u * damp;
        }
        let lo = self.n - self.blend_w;
        let hi = self.n + self.blend_w;
        if r <= lo {
            self.tail(r)
        } else if r >= hi {
            self.band(r)
        } else {
            let t = (r - lo) / (hi - lo);
            let s = t * t * t * (t * (6.0 * t - 15.0) + 10.0);
            (1.0 - s) * self.tail(r) + s * self.band(r)
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.5 && beta < 1.5) {
        return Err(Error::Config(format!(
            "beta must lie in (0.5, 1.5), got {beta}"
        )));
    }
    Ok(())
}

fn gen_example2_disk(spec: &FamilySpec) -> Result<MetricSequence> {
    check_beta(spec.beta)?;
    let chart = &spec.chart;
    let centered = chart.center[0] == 0.0 && chart.center[1] == 0.0;
    if !centered {
        return Err(Error::ChartTooSmall("example2 charts must be centered at 0".into()));
    }
    let mut frames = Vec::with_capacity(spec.n_values.len());
    for &n in &spec.n_values {
        if n < 8 {
            return Err(Error::Config(format!("example2 needs n >= 8, got {n}")));
        }
        let prof = GeodesicCapProfile::new(n as f64, spec.beta);
        if prof.t_n > chart.outer_radius {
            return Err(Error::ChartTooSmall(format!(
                "geodesic radius {} exceeds chart radius {}",
                prof.t_n, chart.outer_radius
            )));
        }
        frames.push(MetricGrid::from_fn(chart, |x, y| {
            prof.eval((x * x + y * y).sqrt())
        })?);
    }
    MetricSequence::new(frames, spec.n_values.clone())
}

/// Conformal factor of the glued sphere in inverted coordinates `w = 1/z`:
/// the main copy occupies `|w| >= 1/T_n`, the reflected copy concentrates at
/// `w = 0`.
pub fn glued_profile(prof: &GeodesicCapProfile, rho: f64) -> f64 {
    let rho = rho.max(1e-300);
    if rho >= 1.0 / prof.t_n {
        prof.eval(1.0 / rho) - 2.0 * rho.ln()
    } else {
        prof.eval(prof.t_n * prof.t_n * rho) + 2.0 * prof.t_n.ln()
    }
}

fn gen_example2_glued(spec: &FamilySpec) -> Result<MetricSequence> {
    check_beta(spec.beta)?;
    let chart = &spec.chart;
    if chart.center != [0.0, 0.0] {
        return Err(Error::ChartTooSmall("glued charts must be centered at 0".into()));
    }
    let h = chart.spacing();
    let mut frames = Vec::with_capacity(spec.n_values.len());
    for &n in &spec.n_values {
        if n < 8 {
            return Err(Error::Config(format!("example2 needs n >= 8, got {n}")));
        }
        let prof = GeodesicCapProfile::new(n as f64, spec.beta);
        // the whole reflected copy must be wider than a couple of cells
        if 1.0 / prof.t_n < 2.0 * h {
            return Err(Error::ChartTooSmall(format!(
                "reflected copy at scale {} unresolvable at spacing {}",
                1.0 / prof.t_n,
                h
            )));
        }
        // anti-alias the innermost region by cell-averaging the area density
        let aa_radius = 2.5 / (prof.t_n * prof.t_n) + 2.0 * h;
        frames.push(MetricGrid::from_fn(chart, |x, y| {
            let rho = (x * x + y * y).sqrt();
            if rho <= aa_radius {
                let mean = cell_average_density(
                    |px, py| {
                        let r = (px * px + py * py).sqrt();
                        (2.0 * glued_profile(&prof, r)).exp()
                    },
                    x,
                    y,
                    h,
                );
                0.5 * mean.ln()
            } else {
                glued_profile(&prof, rho)
            }
        })?);
    }
    MetricSequence::new(frames, spec.n_values.clone())
}

/// Mean of `density` over the h x h cell centered at (x, y), by adaptive
/// quad-tree refinement. Deterministic.
fn cell_average_density(density: impl Fn(f64, f64) -> f64 + Copy, x: f64, y: f64, h: f64) -> f64 {
    fn refine(
        density: impl Fn(f64, f64) -> f64 + Copy,
        x: f64,
        y: f64,
        half: f64,
        depth: usize,
    ) -> f64 {
        let c = density(x, y);
        let corners = [
            density(x - half, y - half),
            density(x + half, y - half),
            density(x - half, y + half),
            density(x + half, y + half),
        ];
        let mut lo = c;
        let mut hi = c;
        for v in corners {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if depth == 0 || hi <= lo * 1.05 + 1e-300 {
            // 2x2 midpoint estimate of the cell mean
            let q = half / 2.0;
            return 0.25
                * (density(x - q, y - q)
                    + density(x + q, y - q)
                    + density(x - q, y + q)
                    + density(x + q, y + q));
        }
        let q = half / 2.0;
        0.25 * (refine(density, x - q, y - q, q, depth - 1)
            + refine(density, x + q, y - q, q, depth - 1)
            + refine(density, x - q, y + q, q, depth - 1)
            + refine(density, x + q, y + q, q, depth - 1))
    }
    refine(density, x, y, h / 2.0, 14)
}

// ---------------------------------------------------------------------------
// Example 3
// ---------------------------------------------------------------------------

/// Evaluate `f(z)` and `f'(z)` for `f = prod (z - root_k)` at a complex point.
fn poly_and_deriv(roots: &[f64], x: f64, y: f64) -> ((f64, f64), (f64, f64)) {
    let mut f = (1.0, 0.0);
    let mut df = (0.0, 0.0);
    for &r in roots {
        let t = (x - r, y);
        df = (df.0 * t.0 - df.1 * t.1 + f.0, df.0 * t.1 + df.1 * t.0 + f.1);
        f = (f.0 * t.0 - f.1 * t.1, f.0 * t.1 + f.1 * t.0);
    }
    (f, df)
}

fn gen_example3(spec: &FamilySpec) -> Result<MetricSequence> {
    if spec.roots.is_empty() {
        return Err(Error::Config("example3 needs at least one root".into()));
    }
    let chart = &spec.chart;
    for &r in &spec.roots {
        if !chart.contains([r, 0.0]) {
            return Err(Error::ChartTooSmall(format!("root {r} outside the chart")));
        }
    }
    // derivative magnitudes at the roots set the concentration scales
    let mut max_root_deriv = 0.0f64;
    for &r in &spec.roots {
        let (_, df) = poly_and_deriv(&spec.roots, r, 0.0);
        max_root_deriv = max_root_deriv.max((df.0 * df.0 + df.1 * df.1).sqrt());
    }
    if max_root_deriv < 1e-9 {
        return Err(Error::CriticalPointInChart(max_root_deriv, spec.roots[0], 0.0));
    }
    // the construction excludes zero points of f' from the domain; reject
    // any chart that samples one
    let n_grid = chart.grid_n;
    for iy in 0..n_grid {
        for ix in 0..n_grid {
            let p = chart.node_pos(ix, iy);
            if !chart.contains(p) {
                continue;
            }
            let (_, df) = poly_and_deriv(&spec.roots, p[0], p[1]);
            let df_abs = (df.0 * df.0 + df.1 * df.1).sqrt();
            if df_abs < 1e-9 {
                return Err(Error::CriticalPointInChart(df_abs, p[0], p[1]));
            }
        }
    }
    let cap = spec.rate_cap() / max_root_deriv.max(1e-300);
    let mut frames = Vec::with_capacity(spec.n_values.len());
    for &n in &spec.n_values {
        let rate = (n as f64).min(cap.max(1.0));
        let amp = if spec.four_normalized { 2.0 * rate } else { rate };
        frames.push(MetricGrid::from_fn(chart, |x, y| {
            let (f, df) = poly_and_deriv(&spec.roots, x, y);
            let f2 = f.0 * f.0 + f.1 * f.1;
            let df_abs2 = (df.0 * df.0 + df.1 * df.1).max(1e-300);
            amp.ln() + 0.5 * df_abs2.ln() - (1.0 + rate * rate * f2).ln()
        })?);
    }
    MetricSequence::new(frames, spec.n_values.clone())
}

// ---------------------------------------------------------------------------
// Random rotationally symmetric families
// ---------------------------------------------------------------------------

/// Smooth random radial profile: a few Gaussian bumps with bounded amplitude.
pub struct RotsymProfile {
    bumps: Vec<(f64, f64, f64)>, // (amplitude, center, width)
}

impl RotsymProfile {
    pub fn seeded(seed: u64, max_radius: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(2..=4);
        let bumps = (0..k)
            .map(|_| {
                let a = rng.gen_range(-0.7..0.7);
                let c = rng.gen_range(0.0..0.75 * max_radius);
                let w = rng.gen_range(0.4..1.0) * max_radius / 2.0;
                (a, c, w)
            })
            .collect();
        Self { bumps }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.bumps
            .iter()
            .map(|&(a, c, w)| a * (-((r - c) / w).powi(2) / 2.0).exp())
            .sum()
    }
}

fn gen_random_rotsym(spec: &FamilySpec) -> Result<MetricSequence> {
    let chart = &spec.chart;
    let prof = RotsymProfile::seeded(spec.seed, chart.outer_radius);
    let cap = spec.rate_cap();
    let mut frames = Vec::with_capacity(spec.n_values.len());
    for (idx, _n) in spec.n_values.iter().enumerate() {
        let frame = match spec.rotsym_mode {
            RotsymMode::Constant => MetricGrid::from_fn(chart, |x, y| {
                let dx = x - chart.center[0];
                let dy = y - chart.center[1];
                prof.eval((dx * dx + dy * dy).sqrt())
            })?,
            RotsymMode::Concentrating => {
                // density sum of the base profile and a shrinking spherical bubble
                let lam = (chart.outer_radius / 8.0 / (1 << idx) as f64).max(
                    if cap.is_finite() { 1.0 / cap } else { 0.0 },
                );
                MetricGrid::from_fn(chart, |x, y| {
                    let dx = x - chart.center[0];
                    let dy = y - chart.center[1];
                    let r2 = dx * dx + dy * dy;
                    let base = (2.0 * prof.eval(r2.sqrt())).exp();
                    let bub = 4.0 * lam * lam / (lam * lam + r2).powi(2);
                    0.5 * (base + bub).ln()
                })?
            }
        };
        frames.push(frame);
    }
    MetricSequence::new(frames, spec.n_values.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_ops::{circle_length, curvature_field, functionals, geodesic_defect};
    use std::f64::consts::PI;

    #[test]
    fn example1_center_value() {
        // n = 1, z at the shifted center: e^{2 phi} = 4. The chart is laid
        // out so (-1, 0) is a grid node and the value is a raw sample.
        let chart = DomainChart::window([0.0, 0.0], 3.0, 301).unwrap();
        let mut spec = FamilySpec::new(Family::Example1, chart, vec![1, 2]);
        spec.cap_cells = 0.0;
        let seq = spec.generate().unwrap();
        let g = &seq.frames[0];
        let v = (2.0 * g.sample_phi([-1.0, 0.0])).exp();
        assert!((v - 4.0).abs() < 1e-12, "e^{{2phi}} at center = {v}");
    }

    #[test]
    fn example1_curvature_one() {
        let chart = DomainChart::window([0.0, 0.0], 2.0, 513).unwrap();
        let spec = FamilySpec::new(Family::Example1, chart, vec![4, 8]);
        let seq = spec.generate().unwrap();
        for frame in &seq.frames {
            let k = curvature_field(frame).unwrap();
            let mut max_err = 0.0f64;
            for i in 0..k.values.len() {
                if k.valid_mask[i] {
                    max_err = max_err.max((k.values[i] - 1.0).abs());
                }
            }
            assert!(max_err < 0.02, "curvature deviation {max_err}");
        }
    }

    #[test]
    fn example1_unnormalized_variant() {
        let chart = DomainChart::window([0.0, 0.0], 2.0, 257).unwrap();
        let mut spec = FamilySpec::new(Family::Example1, chart, vec![4, 8]);
        spec.four_normalized = false;
        let seq = spec.generate().unwrap();
        let k = curvature_field(&seq.frames[0]).unwrap();
        let c = seq.chart().node_index(128, 128);
        assert!(k.valid_mask[c]);
        // the literal formula has curvature 4
        assert!((k.values[c] - 4.0).abs() < 0.05, "K = {}", k.values[c]);
    }

    #[test]
    fn example2_profile_continuity_and_geodesic() {
        let prof = GeodesicCapProfile::new(32.0, 1.0);
        // continuous at r = 2 and r = n
        assert!((prof.cap_piece(2.0) - prof.tail(2.0)).abs() < 1e-12);
        assert!((prof.tail(32.0) - prof.band(32.0)).abs() < 1e-12);
        // analytic geodesic condition at T_n: band'(T) + 1/T = 0
        let t = prof.t_n;
        let d = 1e-5;
        let deriv = (prof.band(t + d) - prof.band(t - d)) / (2.0 * d);
        assert!((deriv + 1.0 / t).abs() < 1e-8);

        // numeric defect on a grid
        let chart = DomainChart::window([0.0, 0.0], t * 1.1, 513).unwrap();
        let g = MetricGrid::from_fn(&chart, |x, y| prof.eval((x * x + y * y).sqrt())).unwrap();
        let defect = geodesic_defect(&g, [0.0, 0.0], t).unwrap();
        assert!(defect.abs() <= 1e-6, "geodesic defect {defect}");
    }

    #[test]
    fn example2_disk_functionals_converge_on_fixed_disk() {
        let chart = DomainChart::window([0.0, 0.0], 80.0, 1025).unwrap();
        let spec = {
            let mut s = FamilySpec::new(Family::Example2Disk, chart, vec![16, 32, 64]);
            s.beta = 1.0;
            s
        };
        let seq = spec.generate().unwrap();
        let disk = DomainChart::disk([0.0, 0.0], 10.0, 16).unwrap();
        let f: Vec<_> = seq
            .frames
            .iter()
            .map(|g| functionals(g, &disk).unwrap())
            .collect();
        // frames agree with each other on D_10 (profile is n-independent there)
        for w in f.windows(2) {
            assert!((w[0].area - w[1].area).abs() / w[1].area < 1e-10);
        }
    }

    #[test]
    fn example2_boundary_length_decreases() {
        // |dD_{T_n}| = 2 pi (ln n)^{-beta} e^{-beta/2} decreases along n
        let chart = DomainChart::window([0.0, 0.0], 75.0, 2049).unwrap();
        let spec = {
            let mut s = FamilySpec::new(Family::Example2Disk, chart, vec![16, 32, 64]);
            s.beta = 1.0;
            s
        };
        let seq = spec.generate().unwrap();
        let mut lens = Vec::new();
        for (frame, &n) in seq.frames.iter().zip(&seq.labels) {
            let t_n = GeodesicCapProfile::new(n as f64, 1.0).t_n;
            let l = circle_length(frame, [0.0, 0.0], t_n).unwrap();
            let expect = 2.0 * PI * (n as f64).ln().powf(-1.0) * (-0.5f64).exp();
            assert!((l - expect).abs() / expect < 0.01, "L({t_n}) = {l} vs {expect}");
            lens.push(l);
        }
        assert!(lens.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn example3_reduces_to_single_bubble() {
        // m = 1, f = z - 1: an example-1 style bubble at z = 1
        let chart = DomainChart::window([1.0, 0.0], 1.5, 257).unwrap();
        let spec = {
            let mut s = FamilySpec::new(Family::Example3, chart, vec![4, 8]);
            s.roots = vec![1.0];
            s
        };
        let seq = spec.generate().unwrap();
        let g = &seq.frames[1];
        // at z = 1: e^{2 phi} = 4 n^2
        let v = (2.0 * g.sample_phi([1.0, 0.0])).exp();
        assert!((v - 256.0).abs() / 256.0 < 1e-6, "{v}");
    }

    #[test]
    fn example3_curvature_and_mass_bound() {
        // the annulus hole keeps the critical point of f at z = 1.5 out of
        // the domain, as the construction demands
        let chart = DomainChart::annulus([1.5, 0.0], 0.2, 1.4, 513).unwrap();
        let spec = FamilySpec::new(Family::Example3, chart.clone(), vec![4, 8]);
        let seq = spec.generate().unwrap();
        for frame in &seq.frames {
            let k = curvature_field(frame).unwrap();
            let mut max_err = 0.0f64;
            for i in 0..k.values.len() {
                if k.valid_mask[i] {
                    max_err = max_err.max((k.values[i] - 1.0).abs());
                }
            }
            assert!(max_err < 0.05, "pullback curvature deviation {max_err}");
            let f = functionals(frame, &chart).unwrap();
            let bound = 4.0 * PI * 2.0;
            assert!(f.area <= bound * 1.02, "area {}", f.area);
            assert!(f.energy <= bound * 1.02, "energy {}", f.energy);
        }
    }

    #[test]
    fn example3_rejects_sampled_critical_point() {
        // odd grid centered between the roots puts a node exactly on the
        // critical point of f
        let chart = DomainChart::window([1.5, 0.0], 1.5, 513).unwrap();
        let spec = FamilySpec::new(Family::Example3, chart, vec![4, 8]);
        assert!(matches!(
            spec.generate(),
            Err(crate::error::Error::CriticalPointInChart(..))
        ));
    }

    #[test]
    fn random_rotsym_deterministic() {
        let chart = DomainChart::window([0.0, 0.0], 1.5, 129).unwrap();
        let mut spec = FamilySpec::new(Family::RandomRotsym, chart, vec![1, 2]);
        spec.seed = 0;
        let a = spec.generate().unwrap();
        let b = spec.generate().unwrap();
        assert_eq!(a.frames[0].phi, b.frames[0].phi);
        // amplitude-zero profile stays flat: seeded profile of empty bumps
        let flatprof = RotsymProfile { bumps: vec![] };
        assert_eq!(flatprof.eval(0.7), 0.0);
    }
}
