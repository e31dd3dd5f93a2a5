//! Dirichlet splitting of a conformal factor on a subdisk.
//!
//! Solves `lap u = lap phi` with `u = 0` on the subdisk boundary by conjugate
//! gradients on the five-point operator, then sets `v = phi - u`, so `v` is
//! discretely harmonic (to solver tolerance) inside the subdisk.

use crate::chart::{ChartKind, DomainChart};
use crate::error::{Error, Result};
use crate::field::{MetricGrid, ScalarField};

const REL_TOL: f64 = 1e-8;

/// Decompose `phi = u + v` on `subdisk`: `u` carries the Laplacian and
/// vanishes on the boundary, `v` is discretely harmonic.
pub fn dirichlet_split(g: &MetricGrid, subdisk: &DomainChart) -> Result<(ScalarField, ScalarField)> {
    if g.vanished {
        return Err(Error::VanishedMetric);
    }
    if subdisk.kind != ChartKind::Disk {
        return Err(Error::InvalidChart("dirichlet_split needs a disk region".into()));
    }
    let chart = &g.chart;
    let h = chart.spacing();
    // strictly inside: one stencil cell of margin
    let padded = DomainChart::disk(subdisk.center, subdisk.outer_radius + 2.0 * h, 16)?;
    if !chart.contains_region(&padded) {
        return Err(Error::RegionOutOfChart);
    }

    let n = chart.grid_n;
    let h2 = h * h;
    // interior mask: nodes strictly inside the subdisk
    let mut interior: Vec<usize> = Vec::new();
    let mut slot = vec![usize::MAX; chart.node_count()];
    for iy in 1..n - 1 {
        for ix in 1..n - 1 {
            let p = chart.node_pos(ix, iy);
            let dx = p[0] - subdisk.center[0];
            let dy = p[1] - subdisk.center[1];
            if dx * dx + dy * dy < subdisk.outer_radius * subdisk.outer_radius {
                slot[chart.node_index(ix, iy)] = interior.len();
                interior.push(chart.node_index(ix, iy));
            }
        }
    }
    if interior.len() < 9 {
        return Err(Error::GridTooCoarse(interior.len(), 9));
    }

    // rhs: b = -lap(phi) at interior nodes (solving (-lap) u = -lap phi)
    let m = interior.len();
    let mut b = vec![0.0f64; m];
    for (k, &c) in interior.iter().enumerate() {
        let lap =
            (g.phi[c - 1] + g.phi[c + 1] + g.phi[c - n] + g.phi[c + n] - 4.0 * g.phi[c]) / h2;
        b[k] = -lap;
    }
    let b_inf = b.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = REL_TOL * b_inf.max(1e-300);

    // (-lap) restricted to the interior with zero Dirichlet data
    let apply = |x: &[f64], out: &mut [f64]| {
        for (k, &c) in interior.iter().enumerate() {
            let get = |cc: usize| {
                let s = slot[cc];
                if s == usize::MAX {
                    0.0
                } else {
                    x[s]
                }
            };
            out[k] =
                (4.0 * x[k] - get(c - 1) - get(c + 1) - get(c - n) - get(c + n)) / h2;
        }
    };

    let mut x = vec![0.0f64; m];
    let mut r = b.clone();
    let mut p = b.clone();
    let mut ap = vec![0.0f64; m];
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    let max_iter = 40 * n + 4000;
    let mut converged = r.iter().all(|v| v.abs() <= tol);
    for _ in 0..max_iter {
        if converged {
            break;
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap.abs() < 1e-300 {
            break;
        }
        let alpha = rs / pap;
        for k in 0..m {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        converged = r.iter().all(|v| v.abs() <= tol);
        let beta = rs_new / rs;
        rs = rs_new;
        for k in 0..m {
            p[k] = r[k] + beta * p[k];
        }
    }
    if !converged {
        return Err(Error::SolverDivergence(max_iter));
    }

    let mut u = ScalarField::zeros(chart);
    let mut v = ScalarField::zeros(chart);
    for i in 0..chart.node_count() {
        u.valid_mask[i] = true;
        v.valid_mask[i] = true;
        v.values[i] = g.phi[i];
    }
    for (k, &c) in interior.iter().enumerate() {
        u.values[c] = x[k];
        v.values[c] = g.phi[c] - x[k];
    }
    Ok((u, v))
}

/// Max of |lap v| over nodes where the split enforced the equation; the
/// discrete-harmonicity certificate for `v`.
pub fn harmonic_residual(v: &ScalarField, subdisk: &DomainChart) -> f64 {
    let chart = &v.chart;
    let n = chart.grid_n;
    let h2 = chart.spacing() * chart.spacing();
    let mut worst = 0.0f64;
    for iy in 1..n - 1 {
        for ix in 1..n - 1 {
            let p = chart.node_pos(ix, iy);
            let dx = p[0] - subdisk.center[0];
            let dy = p[1] - subdisk.center[1];
            if dx * dx + dy * dy < subdisk.outer_radius * subdisk.outer_radius {
                let c = chart.node_index(ix, iy);
                let lap = (v.values[c - 1] + v.values[c + 1] + v.values[c - n] + v.values[c + n]
                    - 4.0 * v.values[c])
                    / h2;
                worst = worst.max(lap.abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::DomainChart;

    #[test]
    fn harmonic_input_gives_zero_u() {
        let chart = DomainChart::window([0.0, 0.0], 2.0, 129).unwrap();
        // x^2 - y^2 is discretely harmonic for the five-point stencil
        let g = MetricGrid::from_fn(&chart, |x, y| x * x - y * y).unwrap();
        let disk = DomainChart::disk([0.0, 0.0], 1.0, 16).unwrap();
        let (u, v) = dirichlet_split(&g, &disk).unwrap();
        let max_u = u.values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!(max_u < 1e-7, "u should vanish, max |u| = {max_u}");
        for i in 0..v.values.len() {
            assert!((v.values[i] - g.phi[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn split_is_exact_and_v_harmonic() {
        let chart = DomainChart::window([0.0, 0.0], 2.0, 129).unwrap();
        let g =
            MetricGrid::from_fn(&chart, |x, y| (2.0 / (1.0 + x * x + y * y)).ln()).unwrap();
        let disk = DomainChart::disk([0.1, -0.2], 1.0, 16).unwrap();
        let (u, v) = dirichlet_split(&g, &disk).unwrap();
        // u + v = phi at every node (v is defined as phi - u, so the sum can
        // differ from phi by at most one rounding step)
        for i in 0..u.values.len() {
            assert!((u.values[i] + v.values[i] - g.phi[i]).abs() <= 1e-15 * g.phi[i].abs().max(1.0));
        }
        // u vanishes outside and on the boundary ring
        let n = chart.grid_n;
        for iy in 0..n {
            for ix in 0..n {
                let p = chart.node_pos(ix, iy);
                let d2 = (p[0] - 0.1).powi(2) + (p[1] + 0.2).powi(2);
                if d2 >= 1.0 {
                    assert_eq!(u.values[chart.node_index(ix, iy)], 0.0);
                }
            }
        }
        let resid = harmonic_residual(&v, &disk);
        assert!(resid <= 1e-6, "harmonic residual {resid}");
    }

    #[test]
    fn boundary_zero_phi_goes_to_u() {
        // phi supported well inside the disk: then v ~ 0 and u ~ phi
        let chart = DomainChart::window([0.0, 0.0], 2.0, 129).unwrap();
        let g = MetricGrid::from_fn(&chart, |x, y| {
            let r2 = x * x + y * y;
            if r2 < 0.25 {
                (0.25 - r2).powi(3) * 64.0
            } else {
                0.0
            }
        })
        .unwrap();
        let disk = DomainChart::disk([0.0, 0.0], 1.0, 16).unwrap();
        let (u, _v) = dirichlet_split(&g, &disk).unwrap();
        let mut max_dev = 0.0f64;
        let n = chart.grid_n;
        for iy in 1..n - 1 {
            for ix in 1..n - 1 {
                let p = chart.node_pos(ix, iy);
                if p[0] * p[0] + p[1] * p[1] < 0.9 {
                    let c = chart.node_index(ix, iy);
                    max_dev = max_dev.max((u.values[c] - g.phi[c]).abs());
                }
            }
        }
        assert!(max_dev < 2e-4, "u should reproduce phi, deviation {max_dev}");
    }
}
