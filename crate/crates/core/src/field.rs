//! Conformal-factor fields and metric sequences on a shared chart.

use crate::chart::DomainChart;
use crate::error::{Error, Result};

/// A scalar quantity sampled at grid nodes, with a validity mask marking
/// nodes where the defining stencil had full support.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub chart: DomainChart,
    pub values: Vec<f64>,
    pub valid_mask: Vec<bool>,
}

impl ScalarField {
    pub fn zeros(chart: &DomainChart) -> Self {
        Self {
            chart: chart.clone(),
            values: vec![0.0; chart.node_count()],
            valid_mask: vec![false; chart.node_count()],
        }
    }

    /// Bilinear sample restricted to valid nodes; returns None when any of
    /// the four stencil nodes is invalid.
    pub fn sample(&self, p: [f64; 2]) -> Option<f64> {
        let (i0, j0, tx, ty) = locate(&self.chart, p)?;
        let n = self.chart.grid_n;
        let idx = |i: usize, j: usize| j * n + i;
        let (a, b, c, d) = (idx(i0, j0), idx(i0 + 1, j0), idx(i0, j0 + 1), idx(i0 + 1, j0 + 1));
        if !(self.valid_mask[a] && self.valid_mask[b] && self.valid_mask[c] && self.valid_mask[d]) {
            return None;
        }
        Some(bilinear(
            self.values[a],
            self.values[b],
            self.values[c],
            self.values[d],
            tx,
            ty,
        ))
    }
}

/// One conformal metric `e^{2 phi} (dx^2 + dy^2)` on a chart.
///
/// The zero metric (the limit of `phi -> -inf`) is represented by the
/// explicit `vanished` flag; `phi` holds no sentinel values.
#[derive(Debug, Clone)]
pub struct MetricGrid {
    pub chart: DomainChart,
    pub phi: Vec<f64>,
    pub vanished: bool,
}

impl MetricGrid {
    pub fn from_fn(chart: &DomainChart, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let n = chart.grid_n;
        let mut phi = vec![0.0; chart.node_count()];
        for iy in 0..n {
            for ix in 0..n {
                let p = chart.node_pos(ix, iy);
                let v = f(p[0], p[1]);
                if !v.is_finite() {
                    return Err(Error::InvalidSequence(format!(
                        "non-finite phi sample at ({}, {})",
                        p[0], p[1]
                    )));
                }
                phi[chart.node_index(ix, iy)] = v;
            }
        }
        Ok(Self {
            chart: chart.clone(),
            phi,
            vanished: false,
        })
    }

    pub fn vanished(chart: &DomainChart) -> Self {
        Self {
            chart: chart.clone(),
            phi: vec![0.0; chart.node_count()],
            vanished: true,
        }
    }

    pub fn flat(chart: &DomainChart) -> Self {
        Self {
            chart: chart.clone(),
            phi: vec![0.0; chart.node_count()],
            vanished: false,
        }
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.chart.spacing()
    }

    /// Bilinear sample of phi; coordinates are clamped to the grid's bounding
    /// square so resampling near edges stays finite.
    pub fn sample_phi(&self, p: [f64; 2]) -> f64 {
        let (i0, j0, tx, ty) = locate_clamped(&self.chart, p);
        let n = self.chart.grid_n;
        let idx = |i: usize, j: usize| j * n + i;
        bilinear(
            self.phi[idx(i0, j0)],
            self.phi[idx(i0 + 1, j0)],
            self.phi[idx(i0, j0 + 1)],
            self.phi[idx(i0 + 1, j0 + 1)],
            tx,
            ty,
        )
    }

    /// Five-point Laplacian of phi with validity mask. The mask is false on
    /// the one-cell grid rim and wherever the stencil leaves the chart domain.
    pub fn laplacian(&self) -> Result<ScalarField> {
        if self.vanished {
            return Err(Error::VanishedMetric);
        }
        let chart = &self.chart;
        let n = chart.grid_n;
        let h2 = chart.spacing() * chart.spacing();
        let mut out = ScalarField::zeros(chart);
        for iy in 1..n - 1 {
            for ix in 1..n - 1 {
                let c = chart.node_index(ix, iy);
                let in_domain = chart.contains(chart.node_pos(ix, iy))
                    && chart.contains(chart.node_pos(ix - 1, iy))
                    && chart.contains(chart.node_pos(ix + 1, iy))
                    && chart.contains(chart.node_pos(ix, iy - 1))
                    && chart.contains(chart.node_pos(ix, iy + 1));
                if !in_domain {
                    continue;
                }
                let lap = (self.phi[c - 1] + self.phi[c + 1] + self.phi[c - n] + self.phi[c + n]
                    - 4.0 * self.phi[c])
                    / h2;
                out.values[c] = lap;
                out.valid_mask[c] = true;
            }
        }
        Ok(out)
    }

    /// Max of phi over grid nodes inside the domain.
    pub fn sup_phi(&self) -> Option<f64> {
        if self.vanished {
            return None;
        }
        let n = self.chart.grid_n;
        let mut best = f64::NEG_INFINITY;
        for iy in 0..n {
            for ix in 0..n {
                if self.chart.contains(self.chart.node_pos(ix, iy)) {
                    best = best.max(self.phi[self.chart.node_index(ix, iy)]);
                }
            }
        }
        best.is_finite().then_some(best)
    }
}

/// An ordered family of metrics sharing one chart; the object whose limit
/// structure the rest of the crate analyzes.
#[derive(Debug, Clone)]
pub struct MetricSequence {
    pub frames: Vec<MetricGrid>,
    pub labels: Vec<u64>,
}

impl MetricSequence {
    pub fn new(frames: Vec<MetricGrid>, labels: Vec<u64>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::InvalidSequence(format!(
                "need at least 2 frames, got {}",
                frames.len()
            )));
        }
        if frames.len() != labels.len() {
            return Err(Error::InvalidSequence(
                "frame and label counts differ".into(),
            ));
        }
        if !labels.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSequence(
                "labels must be strictly increasing".into(),
            ));
        }
        let chart = &frames[0].chart;
        if !frames.iter().all(|f| &f.chart == chart) {
            return Err(Error::InvalidSequence(
                "all frames must share one chart".into(),
            ));
        }
        Ok(Self { frames, labels })
    }

    #[inline]
    pub fn chart(&self) -> &DomainChart {
        &self.frames[0].chart
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Indices of the last `window` frames (the tail used by limit surrogates).
    pub fn tail_indices(&self, window: usize) -> std::ops::Range<usize> {
        let w = window.max(1).min(self.len());
        self.len() - w..self.len()
    }
}

#[inline]
fn bilinear(v00: f64, v10: f64, v01: f64, v11: f64, tx: f64, ty: f64) -> f64 {
    let a = v00 + (v10 - v00) * tx;
    let b = v01 + (v11 - v01) * tx;
    a + (b - a) * ty
}

/// Locate the cell containing `p`; None when outside the bounding square.
fn locate(chart: &DomainChart, p: [f64; 2]) -> Option<(usize, usize, f64, f64)> {
    let h = chart.spacing();
    let n = chart.grid_n;
    let fx = (p[0] - (chart.center[0] - chart.outer_radius)) / h;
    let fy = (p[1] - (chart.center[1] - chart.outer_radius)) / h;
    if !(fx >= -1e-9 && fx <= (n - 1) as f64 + 1e-9 && fy >= -1e-9 && fy <= (n - 1) as f64 + 1e-9)
    {
        return None;
    }
    let i0 = (fx.floor().max(0.0) as usize).min(n - 2);
    let j0 = (fy.floor().max(0.0) as usize).min(n - 2);
    Some((i0, j0, fx - i0 as f64, fy - j0 as f64))
}

fn locate_clamped(chart: &DomainChart, p: [f64; 2]) -> (usize, usize, f64, f64) {
    let h = chart.spacing();
    let n = chart.grid_n;
    let fx = ((p[0] - (chart.center[0] - chart.outer_radius)) / h).clamp(0.0, (n - 1) as f64);
    let fy = ((p[1] - (chart.center[1] - chart.outer_radius)) / h).clamp(0.0, (n - 1) as f64);
    let i0 = (fx.floor() as usize).min(n - 2);
    let j0 = (fy.floor() as usize).min(n - 2);
    (i0, j0, fx - i0 as f64, fy - j0 as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_nodes_and_planes() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 33).unwrap();
        let g = MetricGrid::from_fn(&chart, |x, y| 2.0 * x - 3.0 * y + 0.5).unwrap();
        // exact on a plane
        assert!((g.sample_phi([0.1234, -0.567]) - (2.0 * 0.1234 + 3.0 * 0.567 + 0.5)).abs() < 1e-12);
        // exact at a node
        let p = chart.node_pos(7, 20);
        assert!((g.sample_phi(p) - g.phi[chart.node_index(7, 20)]).abs() < 1e-13);
    }

    #[test]
    fn laplacian_of_quadratic() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 65).unwrap();
        let g = MetricGrid::from_fn(&chart, |x, y| x * x + 2.0 * y * y).unwrap();
        let lap = g.laplacian().unwrap();
        let c = chart.node_index(32, 32);
        assert!(lap.valid_mask[c]);
        assert!((lap.values[c] - 6.0).abs() < 1e-9);
        // rim is masked
        assert!(!lap.valid_mask[chart.node_index(0, 10)]);
    }

    #[test]
    fn sequence_invariants() {
        let chart = DomainChart::window([0.0, 0.0], 1.0, 16).unwrap();
        let f = MetricGrid::flat(&chart);
        assert!(MetricSequence::new(vec![f.clone()], vec![1]).is_err());
        assert!(MetricSequence::new(vec![f.clone(), f.clone()], vec![2, 2]).is_err());
        assert!(MetricSequence::new(vec![f.clone(), f], vec![1, 2]).is_ok());
    }
}
