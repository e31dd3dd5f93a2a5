//! Pointwise and integral differential-geometric quantities of a conformal
//! metric: curvature, area/energy functionals, circle statistics, chart
//! inversion, geodesic defect.
//!
//! Quadrature convention: node-centered cells of the uniform grid, clipped to
//! the region by cell-center membership (edge nodes own half cells). Circle
//! quantities use periodic trapezoid sampling with bilinear interpolation and
//! `N_theta = max(64, ceil(2 pi r / h))` samples.

use crate::chart::{ChartKind, DomainChart};
use crate::error::{Error, Result};
use crate::field::{MetricGrid, ScalarField};

/// Area and curvature-energy pair returned by [`functionals`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functionals {
    pub area: f64,
    pub energy: f64,
}

/// Circle statistics at one radius: mean of phi, radial flux, geodesic length
/// of the circle, and the extremes of phi along it.
#[derive(Debug, Clone, Copy)]
pub struct RadialStats {
    pub center: [f64; 2],
    pub radius: f64,
    /// `(1 / 2 pi) * int phi d theta`
    pub average: f64,
    /// `int_0^{2 pi} phi_r' * r d theta`
    pub flux: f64,
    /// `int_0^{2 pi} e^{phi} r d theta`
    pub circle_length: f64,
    pub sup_phi: f64,
    pub inf_phi: f64,
}

/// Scalar curvature `K = -lap(phi) * e^{-2 phi}` at interior nodes.
///
/// The sign/log-space composition keeps the evaluation finite when phi is
/// large: `K = -sign(lap) * exp(ln|lap| - 2 phi)`.
pub fn curvature_field(g: &MetricGrid) -> Result<ScalarField> {
    if g.vanished {
        return Err(Error::VanishedMetric);
    }
    if g.chart.grid_n < crate::chart::MIN_GRID_N {
        return Err(Error::GridTooCoarse(g.chart.grid_n, crate::chart::MIN_GRID_N));
    }
    let lap = g.laplacian()?;
    let mut out = ScalarField::zeros(&g.chart);
    out.valid_mask = lap.valid_mask;
    for (i, v) in lap.values.iter().enumerate() {
        if out.valid_mask[i] {
            out.values[i] = if *v == 0.0 {
                0.0
            } else {
                -v.signum() * (v.abs().ln() - 2.0 * g.phi[i]).exp()
            };
        }
    }
    Ok(out)
}

/// Quadrature weight of node `(ix, iy)`: the node-centered cell clipped to the
/// bounding square.
#[inline]
fn cell_weight(n: usize, h: f64, ix: usize, iy: usize) -> f64 {
    let wx = if ix == 0 || ix == n - 1 { 0.5 * h } else { h };
    let wy = if iy == 0 || iy == n - 1 { 0.5 * h } else { h };
    wx * wy
}

#[inline]
fn in_region(region: &DomainChart, p: [f64; 2]) -> bool {
    region.contains(p)
}

/// Area `int e^{2 phi}` and energy `int (lap phi)^2 / e^{2 phi}` over the part
/// of `region` inside the chart domain.
pub fn functionals(g: &MetricGrid, region: &DomainChart) -> Result<Functionals> {
    if g.vanished {
        return Ok(Functionals { area: 0.0, energy: 0.0 });
    }
    if !g.chart.contains_region(region) {
        return Err(Error::RegionOutOfChart);
    }
    let lap = g.laplacian()?;
    Ok(functionals_masked(g, &lap, |p| in_region(region, p)))
}

/// Same quadrature with an arbitrary membership predicate (used for regions
/// with excluded disks). The predicate is evaluated at node positions already
/// known to lie inside the chart domain.
pub(crate) fn functionals_masked(
    g: &MetricGrid,
    lap: &ScalarField,
    member: impl Fn([f64; 2]) -> bool,
) -> Functionals {
    let chart = &g.chart;
    let n = chart.grid_n;
    let h = chart.spacing();
    let mut area = 0.0;
    let mut energy = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            let p = chart.node_pos(ix, iy);
            if !chart.contains(p) || !member(p) {
                continue;
            }
            let w = cell_weight(n, h, ix, iy);
            let c = chart.node_index(ix, iy);
            let phi = g.phi[c];
            area += w * (2.0 * phi).exp();
            if lap.valid_mask[c] {
                let l = lap.values[c].abs();
                if l > 0.0 {
                    energy += w * (2.0 * l.ln() - 2.0 * phi).exp();
                }
            }
        }
    }
    Functionals { area, energy }
}

/// `int K dA = -int lap(phi) dx dy` over a region; exact Gauss-Bonnet fuel.
pub fn total_curvature(g: &MetricGrid, region: &DomainChart) -> Result<f64> {
    if g.vanished {
        return Ok(0.0);
    }
    if !g.chart.contains_region(region) {
        return Err(Error::RegionOutOfChart);
    }
    let lap = g.laplacian()?;
    let chart = &g.chart;
    let n = chart.grid_n;
    let h = chart.spacing();
    let mut total = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            let p = chart.node_pos(ix, iy);
            let c = chart.node_index(ix, iy);
            if chart.contains(p) && in_region(region, p) && lap.valid_mask[c] {
                total -= cell_weight(n, h, ix, iy) * lap.values[c];
            }
        }
    }
    Ok(total)
}

/// Number of angular samples used for circle quadrature at radius `r`.
#[inline]
pub fn circle_samples(r: f64, h: f64) -> usize {
    ((2.0 * std::f64::consts::PI * r / h).ceil() as usize).max(64)
}

/// Geodesic length `|∂D_r|_g` of the circle of radius `r` about `center`.
pub fn circle_length(g: &MetricGrid, center: [f64; 2], r: f64) -> Result<f64> {
    let h = g.chart.spacing();
    circle_length_with_samples(g, center, r, circle_samples(r, h))
}

/// Circle length with an explicit angular sample count (periodic trapezoid).
pub fn circle_length_with_samples(
    g: &MetricGrid,
    center: [f64; 2],
    r: f64,
    n_theta: usize,
) -> Result<f64> {
    if g.vanished {
        return Err(Error::VanishedMetric);
    }
    let h = g.chart.spacing();
    if !g.chart.circle_fits(center, r, h) {
        return Err(Error::CircleOutOfChart(center[0], center[1], r));
    }
    let dt = 2.0 * std::f64::consts::PI / n_theta as f64;
    let mut sum = 0.0;
    for k in 0..n_theta {
        let t = k as f64 * dt;
        let p = [center[0] + r * t.cos(), center[1] + r * t.sin()];
        sum += g.sample_phi(p).exp();
    }
    Ok(sum * r * dt)
}

/// Circle average, radial flux, length and phi extremes at radius `r`.
///
/// The radial derivative uses central differences with step `h`, so `r` must
/// sit at least `2h` inside the chart.
pub fn radial_stats(g: &MetricGrid, center: [f64; 2], r: f64) -> Result<RadialStats> {
    if g.vanished {
        return Err(Error::VanishedMetric);
    }
    let h = g.chart.spacing();
    if !g.chart.circle_fits(center, r, 2.0 * h) {
        return Err(Error::CircleOutOfChart(center[0], center[1], r));
    }
    let n_theta = circle_samples(r, h);
    let dt = 2.0 * std::f64::consts::PI / n_theta as f64;
    let mut avg = 0.0;
    let mut flux = 0.0;
    let mut len = 0.0;
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for k in 0..n_theta {
        let t = k as f64 * dt;
        let (ct, st) = (t.cos(), t.sin());
        let at = |rr: f64| g.sample_phi([center[0] + rr * ct, center[1] + rr * st]);
        let phi = at(r);
        avg += phi;
        len += phi.exp();
        sup = sup.max(phi);
        inf = inf.min(phi);
        flux += (at(r + h) - at(r - h)) / (2.0 * h);
    }
    Ok(RadialStats {
        center,
        radius: r,
        average: avg / n_theta as f64,
        flux: flux * r * dt,
        circle_length: len * r * dt,
        sup_phi: sup,
        inf_phi: inf,
    })
}

/// Metric in inverted coordinates `w = 1/z`, resampled on the image chart:
/// `phi~(w) = phi(1/w) - 2 ln |w|`.
///
/// The source chart must exclude a neighborhood of the origin (an annulus
/// centered there, or a window/disk that stays clear of it).
pub fn chart_invert(g: &MetricGrid) -> Result<MetricGrid> {
    if g.vanished {
        return Err(Error::VanishedMetric);
    }
    let chart = &g.chart;
    let image = match chart.kind {
        ChartKind::Annulus => {
            let centered = chart.center[0].abs() + chart.center[1].abs()
                < 1e-12 * chart.outer_radius;
            if !centered || chart.inner_radius <= 0.0 {
                return Err(Error::OriginInDomain);
            }
            DomainChart::annulus(
                [0.0, 0.0],
                1.0 / chart.outer_radius,
                1.0 / chart.inner_radius,
                chart.grid_n,
            )?
        }
        ChartKind::Disk | ChartKind::PlaneWindow => {
            let d = (chart.center[0].powi(2) + chart.center[1].powi(2)).sqrt();
            let reach = match chart.kind {
                ChartKind::PlaneWindow => chart.outer_radius * std::f64::consts::SQRT_2,
                _ => chart.outer_radius,
            };
            if d - reach <= 0.0 {
                return Err(Error::OriginInDomain);
            }
            // images of the nearest/farthest points bound the image domain
            let r_near = 1.0 / (d + reach);
            let r_far = 1.0 / (d - reach);
            let c2 = d * d;
            let ic = [chart.center[0] / c2, -chart.center[1] / c2];
            DomainChart::disk(ic, 0.5 * (r_far - r_near) * 1.05 + 1e-300, chart.grid_n)
                .map(|mut dch| {
                    // recenter the image disk between the two extreme radii
                    let scale = 0.5 * (r_far + r_near) / (1.0 / d);
                    dch.center = [ic[0] * scale * d, ic[1] * scale * d];
                    dch
                })?
        }
    };
    let mut out = MetricGrid::flat(&image);
    let n = image.grid_n;
    for iy in 0..n {
        for ix in 0..n {
            let w = image.node_pos(ix, iy);
            let rho2 = w[0] * w[0] + w[1] * w[1];
            let rho = rho2.sqrt().max(1e-300);
            // z = 1/w with complex conventions: conjugate over modulus squared
            let mut z = [w[0] / rho2.max(1e-300), -w[1] / rho2.max(1e-300)];
            clamp_to_domain(chart, &mut z);
            out.phi[image.node_index(ix, iy)] = g.sample_phi(z) - 2.0 * rho.ln();
        }
    }
    Ok(out)
}

/// Pull a point radially/box-wise into the chart domain so interpolation
/// stays meaningful for nodes just outside the resampled image.
fn clamp_to_domain(chart: &DomainChart, p: &mut [f64; 2]) {
    let dx = p[0] - chart.center[0];
    let dy = p[1] - chart.center[1];
    match chart.kind {
        ChartKind::PlaneWindow => {
            p[0] = chart.center[0] + dx.clamp(-chart.outer_radius, chart.outer_radius);
            p[1] = chart.center[1] + dy.clamp(-chart.outer_radius, chart.outer_radius);
        }
        ChartKind::Disk => {
            let d = (dx * dx + dy * dy).sqrt();
            if d > chart.outer_radius && d > 0.0 {
                let s = chart.outer_radius / d;
                p[0] = chart.center[0] + dx * s;
                p[1] = chart.center[1] + dy * s;
            }
        }
        ChartKind::Annulus => {
            let d = (dx * dx + dy * dy).sqrt();
            let target = d.clamp(chart.inner_radius, chart.outer_radius);
            if d > 0.0 && target != d {
                let s = target / d;
                p[0] = chart.center[0] + dx * s;
                p[1] = chart.center[1] + dy * s;
            }
        }
    }
}

/// Geodesic defect of the concentric circle `|p - center| = r` for a
/// rotationally symmetric metric: `phi_r'(r) + 1/r`, which vanishes exactly
/// when that circle is a geodesic of `e^{2 phi} |dz|^2`.
///
/// The radial profile is reconstructed by a least-squares cubic fit over all
/// grid nodes within `2h` of the circle; the fit residual doubles as the
/// rotational-symmetry check (tolerance 1e-6).
pub fn geodesic_defect(g: &MetricGrid, center: [f64; 2], r: f64) -> Result<f64> {
    if g.vanished {
        return Err(Error::VanishedMetric);
    }
    let chart = &g.chart;
    let h = chart.spacing();
    if !chart.circle_fits(center, r, 2.0 * h) {
        return Err(Error::CircleOutOfChart(center[0], center[1], r));
    }
    let band = 2.0 * h;
    let n = chart.grid_n;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for iy in 0..n {
        for ix in 0..n {
            let p = chart.node_pos(ix, iy);
            if !chart.contains(p) {
                continue;
            }
            let d = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
            if (d - r).abs() <= band {
                pts.push((d - r, g.phi[chart.node_index(ix, iy)]));
            }
        }
    }
    if pts.len() < 12 {
        return Err(Error::GridTooCoarse(pts.len(), 12));
    }
    // cubic least squares in (d - r), scaled by the band for conditioning
    let s = band;
    let mut ata = [[0.0f64; 4]; 4];
    let mut atb = [0.0f64; 4];
    for &(d, phi) in &pts {
        let x = d / s;
        let row = [1.0, x, x * x, x * x * x];
        for i in 0..4 {
            for j in 0..4 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * phi;
        }
    }
    let coeff = solve4(ata, atb).ok_or(Error::NotRotationallySymmetric(f64::INFINITY))?;
    let mut max_resid = 0.0f64;
    for &(d, phi) in &pts {
        let x = d / s;
        let fit = coeff[0] + x * (coeff[1] + x * (coeff[2] + x * coeff[3]));
        max_resid = max_resid.max((phi - fit).abs());
    }
    if max_resid > 1e-6 {
        return Err(Error::NotRotationallySymmetric(max_resid));
    }
    let dphi_dr = coeff[1] / s;
    Ok(dphi_dr + 1.0 / r)
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let mut piv = col;
        for row in col + 1..4 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for col in (0..4).rev() {
        let mut acc = b[col];
        for k in col + 1..4 {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::DomainChart;
    use std::f64::consts::PI;

    fn round_sphere(chart: &DomainChart) -> MetricGrid {
        MetricGrid::from_fn(chart, |x, y| (2.0 / (1.0 + x * x + y * y)).ln()).unwrap()
    }

    #[test]
    fn curvature_round_sphere_is_one() {
        let chart = DomainChart::window([0.0, 0.0], 2.0, 257).unwrap();
        let k = curvature_field(&round_sphere(&chart)).unwrap();
        let mut max_err = 0.0f64;
        for i in 0..k.values.len() {
            if k.valid_mask[i] {
                max_err = max_err.max((k.values[i] - 1.0).abs());
            }
        }
        assert!(max_err < 5e-4, "max curvature error {max_err}");
    }

    #[test]
    fn curvature_flat_is_zero() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 64).unwrap();
        let k = curvature_field(&MetricGrid::flat(&chart)).unwrap();
        assert!(k.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn curvature_log_metric_is_flat() {
        // phi = -ln r is harmonic off the origin
        let chart = DomainChart::annulus([0.0, 0.0], 0.5, 2.0, 257).unwrap();
        let g = MetricGrid::from_fn(&chart, |x, y| {
            -0.5 * (x * x + y * y).max(1e-12).ln()
        })
        .unwrap();
        let k = curvature_field(&g).unwrap();
        let mut max_err = 0.0f64;
        for i in 0..k.values.len() {
            if k.valid_mask[i] {
                max_err = max_err.max(k.values[i].abs());
            }
        }
        assert!(max_err < 2e-3, "max |K| = {max_err}");
    }

    #[test]
    fn curvature_order_of_accuracy() {
        let err_at = |n: usize| {
            let chart = DomainChart::window([0.0, 0.0], 2.0, n).unwrap();
            let k = curvature_field(&round_sphere(&chart)).unwrap();
            let mut max_err = 0.0f64;
            for i in 0..k.values.len() {
                if k.valid_mask[i] {
                    max_err = max_err.max((k.values[i] - 1.0).abs());
                }
            }
            max_err
        };
        let (e1, e2) = (err_at(128), err_at(256));
        assert!(e1 / e2 >= 3.0, "halving h only improved {e1} -> {e2}");
    }

    #[test]
    fn functionals_flat_disk() {
        let chart = DomainChart::window([0.0, 0.0], 1.5, 513).unwrap();
        let g = MetricGrid::flat(&chart);
        let disk = DomainChart::disk([0.0, 0.0], 1.0, 16).unwrap();
        let f = functionals(&g, &disk).unwrap();
        assert!((f.area - PI).abs() / PI < 2e-3, "area {}", f.area);
        assert_eq!(f.energy, 0.0);
    }

    #[test]
    fn functionals_round_sphere_full_plane() {
        // closed form: area = energy = 4 pi over all of R^2
        let chart = DomainChart::window([0.0, 0.0], 50.0, 1025).unwrap();
        let g = round_sphere(&chart);
        let win = DomainChart::window([0.0, 0.0], 50.0, 16).unwrap();
        let f = functionals(&g, &win).unwrap();
        let four_pi = 4.0 * PI;
        assert!((f.area - four_pi).abs() / four_pi < 0.01, "area {}", f.area);
        assert!((f.energy - four_pi).abs() / four_pi < 0.01, "energy {}", f.energy);
    }

    #[test]
    fn functionals_vanished_metric() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 32).unwrap();
        let g = MetricGrid::vanished(&chart);
        let f = functionals(&g, &chart).unwrap();
        assert_eq!((f.area, f.energy), (0.0, 0.0));
    }

    #[test]
    fn region_out_of_chart_rejected() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 32).unwrap();
        let g = MetricGrid::flat(&chart);
        let disk = DomainChart::disk([0.9, 0.0], 0.5, 16).unwrap();
        assert!(matches!(
            functionals(&g, &disk),
            Err(Error::RegionOutOfChart)
        ));
    }

    #[test]
    fn constant_shift_covariance() {
        let chart = DomainChart::window([0.0, 0.0], 2.0, 129).unwrap();
        let g = round_sphere(&chart);
        let disk = DomainChart::disk([0.0, 0.0], 1.2, 16).unwrap();
        let base = functionals(&g, &disk).unwrap();
        let base_total_k = total_curvature(&g, &disk).unwrap();
        let base_len = circle_length(&g, [0.0, 0.0], 1.0).unwrap();
        for c in [-1.0, 0.5] {
            let shifted = MetricGrid {
                chart: chart.clone(),
                phi: g.phi.iter().map(|p| p + c).collect(),
                vanished: false,
            };
            let f = functionals(&shifted, &disk).unwrap();
            assert!((f.area - base.area * (2.0 * c).exp()).abs() / f.area < 1e-12);
            assert!((f.energy - base.energy * (-2.0 * c).exp()).abs() / f.energy < 1e-12);
            let len = circle_length(&shifted, [0.0, 0.0], 1.0).unwrap();
            assert!((len - base_len * c.exp()).abs() / len < 1e-12);
            let tk = total_curvature(&shifted, &disk).unwrap();
            assert!((tk - base_total_k).abs() < 1e-9);
        }
    }

    #[test]
    fn circle_length_flat_and_log() {
        let chart = DomainChart::window([0.0, 0.0], 3.0, 513).unwrap();
        let g = MetricGrid::flat(&chart);
        let l = circle_length(&g, [0.0, 0.0], 1.0).unwrap();
        assert!((l - 2.0 * PI).abs() < 1e-10);

        // phi = -ln r: every concentric circle has length 2 pi
        let ann = DomainChart::annulus([0.0, 0.0], 0.4, 2.5, 513).unwrap();
        let cyl = MetricGrid::from_fn(&ann, |x, y| -0.5 * (x * x + y * y).max(1e-12).ln()).unwrap();
        for r in [0.6, 1.0, 1.9] {
            let l = circle_length(&cyl, [0.0, 0.0], r).unwrap();
            assert!((l - 2.0 * PI).abs() / (2.0 * PI) < 2e-5, "r={r}: {l}");
        }

        // round sphere equator
        let win = DomainChart::window([0.0, 0.0], 2.0, 513).unwrap();
        let l = circle_length(&round_sphere(&win), [0.0, 0.0], 1.0).unwrap();
        assert!((l - 2.0 * PI).abs() / (2.0 * PI) < 1e-5);
    }

    #[test]
    fn circle_length_sample_refinement_stable() {
        let chart = DomainChart::window([0.0, 0.0], 2.0, 257).unwrap();
        let g = round_sphere(&chart);
        let h = chart.spacing();
        let n = circle_samples(1.3, h);
        let a = circle_length_with_samples(&g, [0.0, 0.0], 1.3, n).unwrap();
        let b = circle_length_with_samples(&g, [0.0, 0.0], 1.3, 2 * n).unwrap();
        assert!((a - b).abs() / b < 1e-3);
    }

    #[test]
    fn radial_stats_log_metric_flux() {
        let ann = DomainChart::annulus([0.0, 0.0], 0.4, 2.5, 1025).unwrap();
        let cyl = MetricGrid::from_fn(&ann, |x, y| -0.5 * (x * x + y * y).max(1e-12).ln()).unwrap();
        let st = radial_stats(&cyl, [0.0, 0.0], 1.2).unwrap();
        // phi_r' * r = -1, so flux = -2 pi
        assert!(
            (st.flux + 2.0 * PI).abs() < 2e-3,
            "flux {} vs -2pi",
            st.flux
        );
        assert!(st.inf_phi <= st.average && st.average <= st.sup_phi);

        let chart = DomainChart::window([0.0, 0.0], 2.0, 257).unwrap();
        let flat = MetricGrid::flat(&chart);
        let st = radial_stats(&flat, [0.0, 0.0], 1.0).unwrap();
        assert!(st.average.abs() < 1e-12 && st.flux.abs() < 1e-9);
    }

    #[test]
    fn chart_invert_round_sphere_symmetric() {
        // the round metric is invariant under z -> 1/z
        let ann = DomainChart::annulus([0.0, 0.0], 0.5, 2.0, 513).unwrap();
        let g = round_sphere(&ann);
        let inv = chart_invert(&g).unwrap();
        let mut max_err = 0.0f64;
        let n = inv.chart.grid_n;
        for iy in 0..n {
            for ix in 0..n {
                let w = inv.chart.node_pos(ix, iy);
                let rho = (w[0] * w[0] + w[1] * w[1]).sqrt();
                if rho < inv.chart.inner_radius * 1.05 || rho > inv.chart.outer_radius * 0.95 {
                    continue;
                }
                let expect = (2.0 / (1.0 + rho * rho)).ln();
                max_err = max_err.max((inv.phi[inv.chart.node_index(ix, iy)] - expect).abs());
            }
        }
        assert!(max_err < 2e-4, "max deviation {max_err}");
    }

    #[test]
    fn chart_invert_flat_gives_log(){
        let ann = DomainChart::annulus([0.0, 0.0], 0.5, 2.0, 257).unwrap();
        let g = MetricGrid::flat(&ann);
        let inv = chart_invert(&g).unwrap();
        let w = [0.8f64, 0.3];
        let rho = (w[0] * w[0] + w[1] * w[1]).sqrt();
        let got = inv.sample_phi(w);
        assert!((got - (-2.0 * rho.ln())).abs() < 1e-3);
    }

    #[test]
    fn chart_invert_involution() {
        let ann = DomainChart::annulus([0.0, 0.0], 0.5, 2.0, 513).unwrap();
        let g = round_sphere(&ann);
        let back = chart_invert(&chart_invert(&g).unwrap()).unwrap();
        // compare on a mid annulus ring
        let mut max_err = 0.0f64;
        for k in 0..64 {
            let t = 2.0 * PI * k as f64 / 64.0;
            let p = [1.1 * t.cos(), 1.1 * t.sin()];
            max_err = max_err.max((back.sample_phi(p) - g.sample_phi(p)).abs());
        }
        assert!(max_err < 5e-4, "involution deviation {max_err}");
    }

    #[test]
    fn chart_invert_rejects_origin() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 32).unwrap();
        let g = MetricGrid::flat(&chart);
        assert!(matches!(chart_invert(&g), Err(Error::OriginInDomain)));
    }

    #[test]
    fn geodesic_defect_flat_and_log() {
        let chart = DomainChart::window([0.0, 0.0], 3.0, 513).unwrap();
        let flat = MetricGrid::flat(&chart);
        let d = geodesic_defect(&flat, [0.0, 0.0], 2.0).unwrap();
        assert!((d - 0.5).abs() < 1e-9, "flat defect at r=2: {d}");

        let ann = DomainChart::annulus([0.0, 0.0], 0.4, 2.5, 513).unwrap();
        let cyl = MetricGrid::from_fn(&ann, |x, y| -0.5 * (x * x + y * y).max(1e-24).ln()).unwrap();
        for r in [0.8, 1.5, 2.0] {
            let d = geodesic_defect(&cyl, [0.0, 0.0], r).unwrap();
            assert!(d.abs() < 1e-7, "cylinder defect at r={r}: {d}");
        }
    }

    #[test]
    fn geodesic_defect_rejects_asymmetric() {
        let chart = DomainChart::window([0.0, 0.0], 3.0, 257).unwrap();
        let g = MetricGrid::from_fn(&chart, |x, _| 0.1 * x).unwrap();
        assert!(matches!(
            geodesic_defect(&g, [0.0, 0.0], 1.5),
            Err(Error::NotRotationallySymmetric(_))
        ));
    }
}
