//! Embedding of long thin rectangles into spheres by iterated planar folding.
//!
//! A slab `[0, eps]^m x [0, eps^{-m/p}]^p` is uniformly pre-scaled, each long
//! axis is folded boustrophedon-style against thickness axes until every
//! extent is small, and the folded box is pushed onto the sphere through the
//! exponential chart at the north pole. Turn radii are large relative to the
//! sheet thickness, so the local distortion per stage stays within a couple
//! of percent and is independent of eps.

use serde::{Deserialize, Serialize};

use crate::error::MapError;
use crate::geom;

/// Turn spacing between consecutive pass centerlines, in sheet thicknesses.
/// Large spacing keeps the annular turn distortion within +-1/RATIO of unity.
const TURN_SPACING_RATIO: f64 = 50.0;

/// Radius of the exponential-chart ball on the target sphere. Small enough
/// that the chart itself is nearly an isometry (sinc 0.35 > 0.979).
const CHART_BALL_RADIUS: f64 = 0.35;

/// Fraction of the per-axis budget the folded object may occupy.
const FIT_MARGIN: f64 = 0.95;

/// One planar boustrophedon fold of a strip of thickness `w`.
///
/// Maps strip coordinates `(tau, lambda)` with `tau` in `[0, w]` and
/// `lambda` in `[0, lambda_in]` to plane coordinates `(sigma, lambda_out)`.
/// Straight passes are isometries; U-turns are annulus sectors with radii
/// within `w/2` of the centerline radius `spacing/2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldStage {
    pub w: f64,
    pub spacing: f64,
    pub n_passes: usize,
    pub run: f64,
    pub lambda_in: f64,
    /// Shift added to the raw plane `y` so the output range starts at 0.
    pub y_shift: f64,
    pub sigma_extent: f64,
    pub lambda_out_extent: f64,
}

impl FoldStage {
    /// Plan a fold of a strip `[0,w] x [0,lambda_in]` with `n` passes.
    /// Returns `None` when the strip is too short for the turns.
    pub fn plan(w: f64, lambda_in: f64, n: usize) -> Option<FoldStage> {
        if n < 2 {
            return None;
        }
        let spacing = TURN_SPACING_RATIO * w;
        let r_c = spacing / 2.0;
        let turns_len = (n as f64 - 1.0) * std::f64::consts::PI * r_c;
        let run = (lambda_in - turns_len) / n as f64;
        if run <= w {
            return None;
        }
        let r_out = (spacing + w) / 2.0;
        // Bottom turns exist from 3 passes on; top turns from 2.
        let y_lo = if n >= 3 { -r_out } else { 0.0 };
        let y_hi = if n >= 2 { run + r_out } else { run };
        Some(FoldStage {
            w,
            spacing,
            n_passes: n,
            run,
            lambda_in,
            y_shift: -y_lo,
            sigma_extent: (n as f64 - 1.0) * spacing + w,
            lambda_out_extent: y_hi - y_lo,
        })
    }

    fn r_center(&self) -> f64 {
        self.spacing / 2.0
    }

    fn seg_len(&self) -> f64 {
        self.run + std::f64::consts::PI * self.r_center()
    }

    fn mirrored(&self, pass: usize, tau: f64) -> f64 {
        if pass.is_multiple_of(2) {
            tau
        } else {
            self.w - tau
        }
    }

    /// Forward map `(tau, lambda) -> (sigma, lambda_out)`.
    pub fn map(&self, tau: f64, lambda: f64) -> (f64, f64) {
        let seg = self.seg_len();
        let i = ((lambda / seg).floor() as usize).min(self.n_passes - 1);
        let local = lambda - i as f64 * seg;
        let te = self.mirrored(i, tau);
        let (x, y) = if local <= self.run {
            let x = i as f64 * self.spacing + te;
            let y = if i.is_multiple_of(2) { local } else { self.run - local };
            (x, y)
        } else {
            let (cx, cy, up) = self.turn_center(i);
            let radius = self.r_center() + self.w / 2.0 - te;
            let phi = (local - self.run) / self.r_center();
            let x = cx - radius * phi.cos();
            let y = cy + if up { radius * phi.sin() } else { -radius * phi.sin() };
            (x, y)
        };
        (x, y + self.y_shift)
    }

    /// Directional derivative of [`FoldStage::map`].
    pub fn map_jvp(&self, tau: f64, lambda: f64, dtau: f64, dlambda: f64) -> (f64, f64) {
        let seg = self.seg_len();
        let i = ((lambda / seg).floor() as usize).min(self.n_passes - 1);
        let local = lambda - i as f64 * seg;
        let dte = if i.is_multiple_of(2) { dtau } else { -dtau };
        if local <= self.run {
            let dy = if i.is_multiple_of(2) { dlambda } else { -dlambda };
            (dte, dy)
        } else {
            let (_, _, up) = self.turn_center(i);
            let te = self.mirrored(i, tau);
            let radius = self.r_center() + self.w / 2.0 - te;
            let phi = (local - self.run) / self.r_center();
            let dradius = -dte;
            let dphi = dlambda / self.r_center();
            let dx = -dradius * phi.cos() + radius * phi.sin() * dphi;
            let s = if up { 1.0 } else { -1.0 };
            let dy = s * (dradius * phi.sin() + radius * phi.cos() * dphi);
            (dx, dy)
        }
    }

    fn turn_center(&self, i: usize) -> (f64, f64, bool) {
        let cx = i as f64 * self.spacing + self.w / 2.0 + self.r_center();
        let up = i.is_multiple_of(2);
        let cy = if up { self.run } else { 0.0 };
        (cx, cy, up)
    }

    /// Inverse map `(sigma, lambda_out) -> (tau, lambda)`.
    /// `None` when the plane point falls in a gap between sheets.
    pub fn unmap(&self, sigma: f64, lambda_out: f64) -> Option<(f64, f64)> {
        let y = lambda_out - self.y_shift;
        let tol = 1e-12 * self.w.max(1.0);
        // Straight-pass candidate.
        let i = (sigma / self.spacing).floor();
        if i >= 0.0 && (i as usize) < self.n_passes {
            let i = i as usize;
            let te = sigma - i as f64 * self.spacing;
            if te >= -tol && te <= self.w + tol && y >= -tol && y <= self.run + tol {
                let local = if i.is_multiple_of(2) { y } else { self.run - y };
                let lambda = i as f64 * self.seg_len() + local.clamp(0.0, self.run);
                if lambda <= self.lambda_in + tol {
                    return Some((self.mirrored(i, te.clamp(0.0, self.w)), lambda));
                }
            }
        }
        // Turn candidates: the two turns whose annuli could cover sigma.
        let approx = ((sigma - self.w / 2.0 - self.r_center()) / self.spacing).round() as i64;
        for cand in [approx - 1, approx, approx + 1] {
            if cand < 0 || cand as usize >= self.n_passes - 1 {
                continue;
            }
            let i = cand as usize;
            let (cx, cy, up) = self.turn_center(i);
            let dx = sigma - cx;
            let dy = y - cy;
            if (up && dy < -tol) || (!up && dy > tol) {
                continue;
            }
            let radius = (dx * dx + dy * dy).sqrt();
            let r_in = self.r_center() - self.w / 2.0;
            let r_out = self.r_center() + self.w / 2.0;
            if radius < r_in - tol || radius > r_out + tol {
                continue;
            }
            let s = if up { 1.0 } else { -1.0 };
            let phi = (s * dy).atan2(-dx);
            if !(0.0..=std::f64::consts::PI).contains(&phi) {
                continue;
            }
            let te = (r_out - radius).clamp(0.0, self.w);
            let local = self.run + phi * self.r_center();
            let lambda = i as f64 * self.seg_len() + local;
            if lambda <= self.lambda_in + tol {
                return Some((self.mirrored(i, te), lambda));
            }
        }
        None
    }

    /// Directional derivative of [`FoldStage::unmap`] at an in-image point.
    pub fn unmap_jvp(
        &self,
        sigma: f64,
        lambda_out: f64,
        dsigma: f64,
        dlambda_out: f64,
    ) -> Option<(f64, f64)> {
        let (_, lambda) = self.unmap(sigma, lambda_out)?;
        let seg = self.seg_len();
        let i = ((lambda / seg).floor() as usize).min(self.n_passes - 1);
        let local = lambda - i as f64 * seg;
        let msign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
        if local <= self.run {
            let dlambda = if i.is_multiple_of(2) { dlambda_out } else { -dlambda_out };
            Some((msign * dsigma, dlambda))
        } else {
            let (cx, cy, up) = self.turn_center(i);
            let y = lambda_out - self.y_shift;
            let dx = sigma - cx;
            let dy = y - cy;
            let radius = (dx * dx + dy * dy).sqrt();
            let phi = (local - self.run) / self.r_center();
            let s = if up { 1.0 } else { -1.0 };
            // pos = c + radius * (-cos phi, s sin phi)
            let dradius = dsigma * (-phi.cos()) + dlambda_out * s * phi.sin();
            let dphi = (dsigma * phi.sin() + dlambda_out * s * phi.cos()) / radius;
            Some((msign * -dradius, self.r_center() * dphi))
        }
    }

    /// Distance from `lambda` to the nearest junction between a straight
    /// piece and a turn, where the map is only C^0.
    pub fn junction_margin(&self, lambda: f64) -> f64 {
        let seg = self.seg_len();
        let i = ((lambda / seg).floor()).min(self.n_passes as f64 - 1.0);
        let local = lambda - i * seg;
        let to_run = (local - self.run).abs();
        let to_seg_start = local.min((seg - local).abs());
        to_run.min(to_seg_start)
    }
}

/// Folding plan for one long axis: the stages applied in order, each paired
/// with the slab thickness axis it consumes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldChain {
    pub long_axis: usize,
    pub stages: Vec<(usize, FoldStage)>,
}

/// Complete geometry of a rectangle chart: pre-scale, folds, placement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldPlan {
    pub m: usize,
    pub p: usize,
    pub eps: f64,
    /// Uniform pre-scale applied to all slab coordinates.
    pub g: f64,
    /// Edge lengths of the slab: eps (m times), then eps^{-m/p} (p times).
    pub edges: Vec<f64>,
    pub chains: Vec<FoldChain>,
    /// Extent of the folded object along each pre-chart axis.
    pub extents: Vec<f64>,
    /// Declared two-sided distortion bound of the chart, independent of eps.
    pub q_declared: f64,
}

impl FoldPlan {
    /// Build the plan for `[0,eps]^m x [0,eps^{-m/p}]^p -> S^{m+p}`.
    pub fn new(m: usize, p: usize, eps: f64) -> Result<FoldPlan, MapError> {
        if m == 0 || p == 0 {
            return Err(MapError::BadParameter(
                "rectangle chart needs m >= 1 and p >= 1".into(),
            ));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(MapError::BadParameter(format!(
                "epsilon must lie in (0, 1], got {eps}"
            )));
        }
        let d = m + p;
        let long_edge = eps.powf(-(m as f64) / (p as f64));
        if !long_edge.is_finite() {
            return Err(MapError::BadParameter("eps^(-m/p) overflows".into()));
        }
        let mut edges = vec![eps; m];
        edges.extend(vec![long_edge; p]);

        // Per-axis budget so the folded box's corners stay inside the chart
        // ball.
        let budget = 2.0 * CHART_BALL_RADIUS / (d as f64).sqrt() * FIT_MARGIN;
        // Pre-scale chosen so the fold capacity is eps-independent: both the
        // sheet thickness and the required shrink scale together with eps.
        // Capacity needs g (s/B g)^f <= B for f folds per long axis, i.e.
        // g <= B s^{-f/(f+1)} up to margins.
        let folds_per_axis = (m as f64 / p as f64).ceil();
        let g = 0.55
            * budget
            * TURN_SPACING_RATIO.powf(-folds_per_axis / (folds_per_axis + 1.0));

        // Assign thickness axes to long axes in contiguous groups.
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); p];
        for j in 0..m {
            groups[j * p / m].push(j);
        }

        let w = g * eps;
        let mut extents = vec![w; m];
        let mut chains = Vec::with_capacity(p);
        for (q, group) in groups.iter().enumerate() {
            let mut lambda = g * long_edge;
            let mut stages = Vec::new();
            for (used, &axis) in group.iter().enumerate() {
                if lambda <= budget {
                    break;
                }
                let remaining = (group.len() - used) as f64;
                let target = ((lambda / (0.8 * budget)).powf(1.0 / remaining)).ceil();
                let n_cap = (((budget - w) / (TURN_SPACING_RATIO * w)).floor() + 1.0).max(0.0);
                let mut n = target.min(n_cap).max(2.0) as usize;
                let mut stage = FoldStage::plan(w, lambda, n);
                while stage.is_none() && n > 2 {
                    n -= 1;
                    stage = FoldStage::plan(w, lambda, n);
                }
                let stage = stage.ok_or_else(|| {
                    MapError::ChartCapacity(format!(
                        "long axis {q} of length {lambda:.3} cannot fold at thickness {w:.3e}"
                    ))
                })?;
                if stage.sigma_extent > budget * 1.0001 {
                    return Err(MapError::ChartCapacity(format!(
                        "fold of long axis {q} needs stack extent {:.3}, budget {budget:.3}",
                        stage.sigma_extent
                    )));
                }
                extents[axis] = stage.sigma_extent;
                lambda = stage.lambda_out_extent;
                stages.push((axis, stage));
            }
            if lambda > budget * 1.0001 {
                return Err(MapError::ChartCapacity(format!(
                    "long axis {q} still has extent {lambda:.3} after folding, budget {budget:.3}"
                )));
            }
            extents.push(lambda);
            chains.push(FoldChain {
                long_axis: q,
                stages,
            });
        }

        let corner: f64 = extents.iter().map(|e| (e / 2.0) * (e / 2.0)).sum::<f64>().sqrt();
        if corner > CHART_BALL_RADIUS * 0.99 {
            return Err(MapError::ChartCapacity(format!(
                "folded box corner radius {corner:.3} exceeds chart ball {CHART_BALL_RADIUS}"
            )));
        }

        let max_stages = chains.iter().map(|c| c.stages.len()).max().unwrap_or(0) as i32;
        let turn_lo = (1.0 - 1.0 / TURN_SPACING_RATIO).powi(max_stages);
        let sinc_lo = CHART_BALL_RADIUS.sin() / CHART_BALL_RADIUS;
        let q_declared = 1.1 / (g * turn_lo * sinc_lo);

        Ok(FoldPlan {
            m,
            p,
            eps,
            g,
            edges,
            chains,
            extents,
            q_declared,
        })
    }

    pub fn dim(&self) -> usize {
        self.m + self.p
    }

    /// Rigorous eps-independent bounds on the singular values of the chart
    /// differential, as (lower, upper).
    pub fn sval_bounds(&self) -> (f64, f64) {
        let max_stages = self
            .chains
            .iter()
            .map(|c| c.stages.len())
            .max()
            .unwrap_or(0) as i32;
        let turn = 1.0 / TURN_SPACING_RATIO;
        let sinc_lo = CHART_BALL_RADIUS.sin() / CHART_BALL_RADIUS;
        (
            self.g * (1.0 - turn).powi(max_stages) * sinc_lo,
            self.g * (1.0 + turn).powi(max_stages),
        )
    }

    fn fold_coords(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut raw = vec![0.0; d];
        for j in 0..self.m {
            raw[j] = self.g * x[j];
        }
        for chain in &self.chains {
            let mut lambda = self.g * x[self.m + chain.long_axis];
            for (axis, stage) in &chain.stages {
                let (sigma, next) = stage.map(self.g * x[*axis], lambda);
                raw[*axis] = sigma;
                lambda = next;
            }
            raw[self.m + chain.long_axis] = lambda;
        }
        for (v, e) in raw.iter_mut().zip(&self.extents) {
            *v -= e / 2.0;
        }
        raw
    }

    /// Chart map: slab point to sphere point in R^{d+1}.
    pub fn chart(&self, x: &[f64]) -> Vec<f64> {
        exp_north(&self.fold_coords(x))
    }

    /// Directional derivative of the chart map.
    pub fn chart_jvp(&self, x: &[f64], dx: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut raw = vec![0.0; d];
        let mut draw = vec![0.0; d];
        for j in 0..self.m {
            raw[j] = self.g * x[j];
            draw[j] = self.g * dx[j];
        }
        for chain in &self.chains {
            let mut lambda = self.g * x[self.m + chain.long_axis];
            let mut dlambda = self.g * dx[self.m + chain.long_axis];
            for (axis, stage) in &chain.stages {
                let tau = self.g * x[*axis];
                let dtau = self.g * dx[*axis];
                let (sigma, next) = stage.map(tau, lambda);
                let (dsigma, dnext) = stage.map_jvp(tau, lambda, dtau, dlambda);
                raw[*axis] = sigma;
                draw[*axis] = dsigma;
                lambda = next;
                dlambda = dnext;
            }
            raw[self.m + chain.long_axis] = lambda;
            draw[self.m + chain.long_axis] = dlambda;
        }
        for (v, e) in raw.iter_mut().zip(&self.extents) {
            *v -= e / 2.0;
        }
        exp_north_jvp(&raw, &draw)
    }

    /// Inverse chart: sphere point to slab point, `None` off the image.
    pub fn invert(&self, y: &[f64]) -> Option<Vec<f64>> {
        let v = log_north(y, CHART_BALL_RADIUS * 1.02)?;
        let mut raw: Vec<f64> = v
            .iter()
            .zip(&self.extents)
            .map(|(vi, e)| vi + e / 2.0)
            .collect();
        let tol = 1e-9;
        let mut x = vec![0.0; self.dim()];
        for chain in &self.chains {
            let mut lambda = raw[self.m + chain.long_axis];
            for (axis, stage) in chain.stages.iter().rev() {
                let (tau, next) = stage.unmap(raw[*axis], lambda)?;
                raw[*axis] = tau;
                lambda = next;
            }
            x[self.m + chain.long_axis] = lambda / self.g;
        }
        for j in 0..self.m {
            x[j] = raw[j] / self.g;
        }
        for (xi, e) in x.iter_mut().zip(&self.edges) {
            if *xi < -tol || *xi > e + tol {
                return None;
            }
            *xi = xi.clamp(0.0, *e);
        }
        Some(x)
    }

    /// Directional derivative of the inverse chart at an in-image point.
    pub fn invert_jvp(&self, y: &[f64], dy: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let (v, dv) = log_north_jvp(y, dy, CHART_BALL_RADIUS * 1.02)?;
        let mut raw: Vec<f64> = v
            .iter()
            .zip(&self.extents)
            .map(|(vi, e)| vi + e / 2.0)
            .collect();
        let mut draw = dv;
        let mut x = vec![0.0; self.dim()];
        let mut dx = vec![0.0; self.dim()];
        for chain in &self.chains {
            let mut lambda = raw[self.m + chain.long_axis];
            let mut dlambda = draw[self.m + chain.long_axis];
            for (axis, stage) in chain.stages.iter().rev() {
                let (tau, next) = stage.unmap(raw[*axis], lambda)?;
                let (dtau, dnext) = stage.unmap_jvp(raw[*axis], lambda, draw[*axis], dlambda)?;
                raw[*axis] = tau;
                draw[*axis] = dtau;
                lambda = next;
                dlambda = dnext;
            }
            x[self.m + chain.long_axis] = lambda / self.g;
            dx[self.m + chain.long_axis] = dlambda / self.g;
        }
        for j in 0..self.m {
            x[j] = raw[j] / self.g;
            dx[j] = draw[j] / self.g;
        }
        for (xi, e) in x.iter().zip(&self.edges) {
            if *xi < -1e-9 || *xi > e + 1e-9 {
                return None;
            }
        }
        Some((x, dx))
    }

    /// Distance (slab units) from `x` to the nearest fold junction, where
    /// the chart is only C^0.
    pub fn junction_margin(&self, x: &[f64]) -> f64 {
        let mut margin = f64::INFINITY;
        for chain in &self.chains {
            let mut lambda = self.g * x[self.m + chain.long_axis];
            for (axis, stage) in &chain.stages {
                margin = margin.min(stage.junction_margin(lambda) / self.g);
                let (_, next) = stage.map(self.g * x[*axis], lambda);
                lambda = next;
            }
        }
        margin
    }
}

/// Exponential chart at the north pole of S^d: `v` in the ball of radius
/// pi maps to `(v sin|v|/|v|, cos|v|)`.
pub fn exp_north(v: &[f64]) -> Vec<f64> {
    let rho = geom::norm(v);
    let mut y = Vec::with_capacity(v.len() + 1);
    let f = if rho < 1e-12 { 1.0 } else { rho.sin() / rho };
    for vi in v {
        y.push(vi * f);
    }
    y.push(rho.cos());
    y
}

pub fn exp_north_jvp(v: &[f64], dv: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let rho = geom::norm(v);
    let y = exp_north(v);
    let mut dy = Vec::with_capacity(v.len() + 1);
    if rho < 1e-8 {
        dy.extend_from_slice(dv);
        dy.push(0.0);
        return (y, dy);
    }
    let drho = geom::dot(v, dv) / rho;
    let f = rho.sin() / rho;
    let df = (rho.cos() * rho - rho.sin()) / (rho * rho) * drho;
    for (vi, dvi) in v.iter().zip(dv) {
        dy.push(dvi * f + vi * df);
    }
    dy.push(-rho.sin() * drho);
    (y, dy)
}

/// Inverse of [`exp_north`], `None` outside the ball of radius `max_rho`.
pub fn log_north(y: &[f64], max_rho: f64) -> Option<Vec<f64>> {
    let d = y.len() - 1;
    let rho = y[d].clamp(-1.0, 1.0).acos();
    if rho > max_rho {
        return None;
    }
    if rho < 1e-12 {
        return Some(vec![0.0; d]);
    }
    let head_norm = geom::norm(&y[..d]);
    if head_norm < 1e-300 {
        return Some(vec![0.0; d]);
    }
    Some(y[..d].iter().map(|yi| yi * rho / head_norm).collect())
}

pub fn log_north_jvp(y: &[f64], dy: &[f64], max_rho: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let d = y.len() - 1;
    let v = log_north(y, max_rho)?;
    let rho = y[d].clamp(-1.0, 1.0).acos();
    if rho < 1e-8 {
        return Some((v, dy[..d].to_vec()));
    }
    let s = rho.sin();
    let drho = -dy[d] / s;
    let head_norm = geom::norm(&y[..d]);
    let f = rho / head_norm;
    // head_norm = sin(rho) exactly on the sphere; keep the measured value
    // to stay consistent with slightly off-sphere inputs.
    let dhead_norm = geom::dot(&y[..d], &dy[..d]) / head_norm;
    let df = (drho * head_norm - rho * dhead_norm) / (head_norm * head_norm);
    let dv = y[..d]
        .iter()
        .zip(&dy[..d])
        .map(|(yi, dyi)| dyi * f + yi * df)
        .collect();
    Some((v, dv))
}
