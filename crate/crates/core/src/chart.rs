//! Chart geometry: uniform Cartesian grids over disks, square windows and annuli.
//!
//! A chart owns the grid layout only; conformal-factor samples live in
//! [`crate::field::MetricGrid`]. Nodes cover the chart's bounding square
//! `[cx - R, cx + R] x [cy - R, cy + R]` with `grid_n` samples per axis, so
//! the spacing `h = 2R / (grid_n - 1)` is uniform and identical in both axes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Minimum grid resolution for any second-difference stencil.
pub const MIN_GRID_N: usize = 16;

/// Relative slack used in geometric containment tests.
const GEOM_TOL: f64 = 1e-9;

/// Shape of a chart's domain inside its bounding square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    /// Closed disk of radius `outer_radius`.
    Disk,
    /// The full bounding square.
    PlaneWindow,
    /// Closed annulus `inner_radius <= |p - center| <= outer_radius`.
    Annulus,
}

impl ChartKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChartKind::Disk => "disk",
            ChartKind::PlaneWindow => "plane_window",
            ChartKind::Annulus => "annulus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(ChartKind::Disk),
            "plane_window" => Ok(ChartKind::PlaneWindow),
            "annulus" => Ok(ChartKind::Annulus),
            other => Err(Error::InvalidChart(format!("unknown chart kind `{other}`"))),
        }
    }
}

/// One coordinate chart with a uniform Cartesian sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainChart {
    pub kind: ChartKind,
    pub center: [f64; 2],
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub grid_n: usize,
}

impl DomainChart {
    pub fn new(
        kind: ChartKind,
        center: [f64; 2],
        outer_radius: f64,
        inner_radius: f64,
        grid_n: usize,
    ) -> Result<Self> {
        if !(outer_radius.is_finite() && outer_radius > 0.0) {
            return Err(Error::InvalidChart(format!(
                "outer_radius must be a positive real, got {outer_radius}"
            )));
        }
        if !(inner_radius.is_finite() && inner_radius >= 0.0) || inner_radius >= outer_radius {
            return Err(Error::InvalidChart(format!(
                "need 0 <= inner_radius < outer_radius, got {inner_radius} vs {outer_radius}"
            )));
        }
        if kind != ChartKind::Annulus && inner_radius != 0.0 {
            return Err(Error::InvalidChart(
                "inner_radius must be 0 unless the chart is an annulus".into(),
            ));
        }
        if grid_n < MIN_GRID_N {
            return Err(Error::InvalidChart(format!(
                "grid_n = {grid_n} below the minimum {MIN_GRID_N}"
            )));
        }
        if !(center[0].is_finite() && center[1].is_finite()) {
            return Err(Error::InvalidChart("chart center must be finite".into()));
        }
        Ok(Self {
            kind,
            center,
            outer_radius,
            inner_radius,
            grid_n,
        })
    }

    pub fn disk(center: [f64; 2], radius: f64, grid_n: usize) -> Result<Self> {
        Self::new(ChartKind::Disk, center, radius, 0.0, grid_n)
    }

    pub fn window(center: [f64; 2], radius: f64, grid_n: usize) -> Result<Self> {
        Self::new(ChartKind::PlaneWindow, center, radius, 0.0, grid_n)
    }

    pub fn annulus(center: [f64; 2], inner: f64, outer: f64, grid_n: usize) -> Result<Self> {
        Self::new(ChartKind::Annulus, center, outer, inner, grid_n)
    }

    /// Grid spacing `h = 2R / (grid_n - 1)`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.outer_radius / (self.grid_n - 1) as f64
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.grid_n * self.grid_n
    }

    /// Coordinates of node `(ix, iy)`.
    #[inline]
    pub fn node_pos(&self, ix: usize, iy: usize) -> [f64; 2] {
        let h = self.spacing();
        [
            self.center[0] - self.outer_radius + ix as f64 * h,
            self.center[1] - self.outer_radius + iy as f64 * h,
        ]
    }

    #[inline]
    pub fn node_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.grid_n + ix
    }

    /// Whether a point lies in the chart's domain (closed, with a tiny slack).
    #[inline]
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let tol = GEOM_TOL * self.outer_radius;
        match self.kind {
            ChartKind::PlaneWindow => {
                dx.abs() <= self.outer_radius + tol && dy.abs() <= self.outer_radius + tol
            }
            ChartKind::Disk => dx * dx + dy * dy <= (self.outer_radius + tol).powi(2),
            ChartKind::Annulus => {
                let r2 = dx * dx + dy * dy;
                r2 <= (self.outer_radius + tol).powi(2)
                    && r2 >= (self.inner_radius - tol).max(0.0).powi(2)
            }
        }
    }

    /// Whether `region`'s domain is contained in this chart's domain.
    pub fn contains_region(&self, region: &DomainChart) -> bool {
        let dx = region.center[0] - self.center[0];
        let dy = region.center[1] - self.center[1];
        let d = (dx * dx + dy * dy).sqrt();
        let tol = GEOM_TOL * self.outer_radius.max(1.0);
        let outer_ok = match self.kind {
            // A square region of halfwidth r sits inside the square window;
            // disks fit inside the inscribed region of the square too.
            ChartKind::PlaneWindow => match region.kind {
                ChartKind::PlaneWindow => {
                    dx.abs() + region.outer_radius <= self.outer_radius + tol
                        && dy.abs() + region.outer_radius <= self.outer_radius + tol
                }
                _ => {
                    dx.abs() + region.outer_radius <= self.outer_radius + tol
                        && dy.abs() + region.outer_radius <= self.outer_radius + tol
                }
            },
            ChartKind::Disk | ChartKind::Annulus => {
                let reach = match region.kind {
                    // square corners reach sqrt(2) farther than the halfwidth
                    ChartKind::PlaneWindow => region.outer_radius * std::f64::consts::SQRT_2,
                    _ => region.outer_radius,
                };
                d + reach <= self.outer_radius + tol
            }
        };
        if !outer_ok {
            return false;
        }
        if self.kind == ChartKind::Annulus {
            // The region must avoid the hole: either it is centered with the
            // chart and keeps inner_radius at least as large, or it clears the
            // hole entirely.
            let clears_hole = d - region.outer_radius >= self.inner_radius - tol;
            let concentric_annulus = region.kind == ChartKind::Annulus
                && d <= tol
                && region.inner_radius >= self.inner_radius - tol;
            if !(clears_hole || concentric_annulus) {
                return false;
            }
        }
        if region.kind == ChartKind::Annulus && self.kind != ChartKind::Annulus {
            // fine: an annular region inside a solid domain
        }
        true
    }

    /// Whether a circle of radius `r` about `c`, padded by `margin`, stays in
    /// the domain (so bilinear stencils around each sample are available).
    pub fn circle_fits(&self, c: [f64; 2], r: f64, margin: f64) -> bool {
        if !(r.is_finite() && r > 0.0) {
            return false;
        }
        let dx = c[0] - self.center[0];
        let dy = c[1] - self.center[1];
        let d = (dx * dx + dy * dy).sqrt();
        let tol = GEOM_TOL * self.outer_radius;
        let outer_ok = match self.kind {
            ChartKind::PlaneWindow => {
                dx.abs() + r + margin <= self.outer_radius + tol
                    && dy.abs() + r + margin <= self.outer_radius + tol
            }
            _ => d + r + margin <= self.outer_radius + tol,
        };
        if !outer_ok {
            return false;
        }
        if self.kind == ChartKind::Annulus {
            // circle must clear the hole
            if d - r - margin < self.inner_radius - tol && d + r + margin > self.inner_radius {
                // the circle crosses the hole boundary unless it is concentric
                // and fully outside the hole
                if !(d <= tol && r - margin >= self.inner_radius - tol) {
                    return false;
                }
            }
            if d + r <= self.inner_radius {
                return false; // circle entirely inside the hole
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_uniform() {
        let c = DomainChart::window([0.0, 0.0], 2.0, 17).unwrap();
        assert!((c.spacing() - 0.25).abs() < 1e-15);
        let p = c.node_pos(16, 0);
        assert!((p[0] - 2.0).abs() < 1e-12);
        assert!((p[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_charts() {
        assert!(DomainChart::disk([0.0, 0.0], 1.0, 8).is_err());
        assert!(DomainChart::annulus([0.0, 0.0], 1.5, 1.0, 32).is_err());
        assert!(DomainChart::new(ChartKind::Disk, [0.0, 0.0], 1.0, 0.2, 32).is_err());
    }

    #[test]
    fn containment() {
        let chart = DomainChart::window([0.0, 0.0], 2.0, 64).unwrap();
        let disk = DomainChart::disk([0.5, 0.0], 1.0, 64).unwrap();
        assert!(chart.contains_region(&disk));
        let big = DomainChart::disk([0.5, 0.0], 1.8, 64).unwrap();
        assert!(!chart.contains_region(&big));

        let ann = DomainChart::annulus([0.0, 0.0], 0.5, 2.0, 64).unwrap();
        let hole_crosser = DomainChart::disk([0.0, 0.0], 1.0, 64).unwrap();
        assert!(!ann.contains_region(&hole_crosser));
        let ring = DomainChart::annulus([0.0, 0.0], 0.6, 1.5, 64).unwrap();
        assert!(ann.contains_region(&ring));
    }
}
