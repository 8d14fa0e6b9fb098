//! Pointwise exterior-power norms of differentials and supremal k-dilation
//! estimation.
//!
//! The estimator is a certified lower bound: it reports the best value it
//! actually evaluated, found by low-discrepancy sampling plus multi-start
//! coordinate ascent on the domain manifold. Scaling sweeps fit the
//! log-log slope of the estimate against the construction parameter.

pub mod sampling;

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::DilationError;
use crate::expr::{prop1_construct, MapExpr};
use crate::geom::{self, Mat};
use crate::space::Point;
use crate::svd;
use sampling::DomainSampler;

/// Default seed for every stochastic stage; reports are reproducible.
pub const DEFAULT_SEED: u64 = 0;

/// Finite-difference step for Jacobians.
pub const FD_STEP: f64 = 1e-5;

/// Samples closer than this to a non-smooth locus are excluded from
/// finite differences and ascent starts.
pub const EXCLUSION_MARGIN: f64 = 10.0 * FD_STEP;

/// Samples are processed in blocks; ascent restarts from the best 1% of
/// each block, which keeps nested budgets monotone block by block.
pub const BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JacobianMode {
    Analytic,
    FiniteDifference { h: f64 },
}

/// The differential of a map at a point, expressed in orthonormal tangent
/// frames, with its singular values.
#[derive(Debug, Clone)]
pub struct JacobianSample {
    pub point: Point,
    /// d_out x d_in matrix in orthonormal frames.
    pub matrix: Mat,
    /// Non-increasing, padded with zeros to d_in entries.
    pub singular_values: Vec<f64>,
    pub mode: JacobianMode,
}

/// Differential of `e` at `x` in orthonormal tangent frames.
pub fn jacobian(e: &MapExpr, x: &[f64], mode: JacobianMode) -> Result<JacobianSample, DilationError> {
    let margin = e.smooth_margin(x);
    let need = match mode {
        JacobianMode::Analytic => 1e-12,
        JacobianMode::FiniteDifference { h } => h,
    };
    if margin <= need {
        return Err(DilationError::NonSmoothRegion { margin, need });
    }
    let dom_frame = e.domain().tangent_frame(x);
    let y = e.eval(x)?;
    let cod_frame = e.codomain().tangent_frame(&y);
    let d_in = dom_frame.len();
    let d_out = cod_frame.len();
    let mut matrix = Mat::zeros(d_out, d_in);
    match mode {
        JacobianMode::Analytic => {
            for (j, v) in dom_frame.iter().enumerate() {
                let (_, dy) = e.push(x, v)?;
                for (i, u) in cod_frame.iter().enumerate() {
                    matrix[(i, j)] = geom::dot(u, &dy);
                }
            }
        }
        JacobianMode::FiniteDifference { h } => {
            for (j, v) in dom_frame.iter().enumerate() {
                let xa = e.domain().retract(x, v, -h);
                let xb = e.domain().retract(x, v, h);
                let (Some(xa), Some(xb)) = (xa, xb) else {
                    return Err(DilationError::NonSmoothRegion { margin: 0.0, need: h });
                };
                let ya = e.eval(&xa)?;
                let yb = e.eval(&xb)?;
                let diff: Vec<f64> = ya
                    .iter()
                    .zip(&yb)
                    .map(|(a, b)| (b - a) / (2.0 * h))
                    .collect();
                for (i, u) in cod_frame.iter().enumerate() {
                    matrix[(i, j)] = geom::dot(u, &diff);
                }
            }
        }
    }
    let singular_values = svd::singular_values(&matrix);
    Ok(JacobianSample {
        point: x.to_vec(),
        matrix,
        singular_values,
        mode,
    })
}

/// Norm of the k-th exterior power: the product of the k largest singular
/// values, zero once k exceeds their count.
pub fn lambda_k_norm(svals: &[f64], k: usize) -> f64 {
    assert!(k >= 1, "k must be positive");
    if k > svals.len() {
        return 0.0;
    }
    svals[..k].iter().product()
}

/// Checks the interpolation inequality
/// `|L^{k+1}| <= |L^k|^{(k+1)/k}` (with 1e-12 absolute slack) for every k
/// with both sides defined.
pub fn interpolation_check(svals: &[f64]) -> bool {
    for k in 1..svals.len() {
        let lhs = lambda_k_norm(svals, k + 1);
        let base = lambda_k_norm(svals, k);
        let rhs = base.powf((k + 1) as f64 / k as f64) + 1e-12;
        if lhs > rhs {
            return false;
        }
    }
    true
}

/// Result of a supremal k-dilation search. `estimate` is the maximum over
/// every point actually evaluated, hence a certified lower bound for the
/// true supremum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DilationReport {
    pub k: u32,
    pub estimate: f64,
    pub budget: usize,
    pub skipped: usize,
    pub ascent_steps: usize,
    pub argmax_point: Point,
    pub predicted_bound: Option<f64>,
    pub seed: u64,
}

/// Supremal k-dilation with the default seed.
pub fn kdilation(e: &MapExpr, k: u32, budget: usize) -> Result<DilationReport, DilationError> {
    kdilation_seeded(e, k, budget, DEFAULT_SEED)
}

struct BlockOutcome {
    best: f64,
    argmax: Option<Point>,
    starts: Vec<Point>,
    skipped: usize,
}

/// Supremal k-dilation: quasi-random samples in blocks, then coordinate
/// ascent from the top 1% of each block. Deterministic for a fixed seed;
/// block results merge by max in block order.
pub fn kdilation_seeded(
    e: &MapExpr,
    k: u32,
    budget: usize,
    seed: u64,
) -> Result<DilationReport, DilationError> {
    if budget == 0 {
        return Err(DilationError::EmptyBudget);
    }
    if k == 0 {
        return Err(DilationError::Map(crate::error::MapError::BadParameter(
            "k must be positive".into(),
        )));
    }
    let sampler = DomainSampler::new(e.domain().clone(), seed);
    // Extension-by-basepoint composites are constant outside a thin image
    // region that uniform sampling would essentially never hit; interleave
    // samples drawn on the embedded slab with the uniform stream. Both
    // streams are prefix-nested, so budget monotonicity survives.
    let directed = match (e.fold_plan(), e.domain()) {
        (Some(plan), crate::space::Space::Sphere { .. }) => Some((
            plan,
            DomainSampler::new(
                crate::space::Space::Cube {
                    edges: plan.edges.clone(),
                },
                seed ^ 0x51ab,
            ),
        )),
        _ => None,
    };
    let sample_at = |idx: u64| -> Option<Point> {
        match &directed {
            Some((plan, slab_sampler)) => {
                if idx % 2 == 1 {
                    let slab = slab_sampler.sample(idx / 2)?;
                    Some(plan.chart(&slab))
                } else {
                    sampler.sample(idx / 2)
                }
            }
            None => sampler.sample(idx),
        }
    };
    let n_blocks = budget.div_ceil(BLOCK);
    let outcomes: Vec<BlockOutcome> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(budget);
            let mut scored: Vec<(f64, Point)> = Vec::new();
            let mut skipped = 0usize;
            for idx in lo..hi {
                let Some(x) = sample_at(idx as u64) else {
                    skipped += 1;
                    continue;
                };
                if e.smooth_margin(&x) <= EXCLUSION_MARGIN {
                    skipped += 1;
                    continue;
                }
                match point_value(e, &x, k) {
                    Some(v) => scored.push((v, x)),
                    None => skipped += 1,
                }
            }
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            let n_starts = ((hi - lo) / 100).max(1).min(scored.len());
            BlockOutcome {
                best: scored.first().map(|s| s.0).unwrap_or(0.0),
                argmax: scored.first().map(|s| s.1.clone()),
                starts: scored[..n_starts].iter().map(|s| s.1.clone()).collect(),
                skipped,
            }
        })
        .collect();

    let mut best = 0.0f64;
    let mut argmax = e.domain().basepoint();
    let mut skipped = 0usize;
    let mut starts = Vec::new();
    for o in &outcomes {
        if let (Some(p), v) = (&o.argmax, o.best) {
            if v > best {
                best = v;
                argmax = p.clone();
            }
        }
        skipped += o.skipped;
        starts.extend(o.starts.iter().cloned());
    }

    let ascents: Vec<(f64, Point, usize)> = starts
        .par_iter()
        .map(|x0| ascend(e, x0, k))
        .collect();
    let mut ascent_steps = 0;
    for (v, p, steps) in ascents {
        ascent_steps += steps;
        if v > best {
            best = v;
            argmax = p;
        }
    }

    let predicted_bound = e
        .construction_meta()
        .and_then(|meta| meta.predicted_bound(k));
    Ok(DilationReport {
        k,
        estimate: best,
        budget,
        skipped,
        ascent_steps,
        argmax_point: argmax,
        predicted_bound,
        seed,
    })
}

/// |L^k df| at x via the analytic Jacobian; `None` near non-smooth loci or
/// on evaluation failure.
fn point_value(e: &MapExpr, x: &[f64], k: u32) -> Option<f64> {
    let dom_frame = e.domain().tangent_frame(x);
    let y = e.eval(x).ok()?;
    let cod_frame = e.codomain().tangent_frame(&y);
    let mut matrix = Mat::zeros(cod_frame.len(), dom_frame.len());
    for (j, v) in dom_frame.iter().enumerate() {
        let (_, dy) = e.push(x, v).ok()?;
        for (i, u) in cod_frame.iter().enumerate() {
            matrix[(i, j)] = geom::dot(u, &dy);
        }
    }
    let svals = svd::singular_values(&matrix);
    Some(lambda_k_norm(&svals, k as usize))
}

/// Greedy coordinate search with shrinking steps along the tangent frame.
fn ascend(e: &MapExpr, x0: &Point, k: u32) -> (f64, Point, usize) {
    let mut x = x0.clone();
    let Some(mut best) = point_value(e, &x, k) else {
        return (0.0, x, 0);
    };
    let mut delta = 0.02;
    let mut evals = 0usize;
    let min_delta = 1e-7;
    while delta > min_delta && evals < 4000 {
        let frame = e.domain().tangent_frame(&x);
        let mut improved = false;
        'dirs: for v in &frame {
            for sign in [1.0, -1.0] {
                let Some(cand) = e.domain().retract(&x, v, sign * delta) else {
                    continue;
                };
                if e.domain().check_point(&cand).is_err() {
                    continue;
                }
                if e.smooth_margin(&cand) <= 1e-9 {
                    continue;
                }
                evals += 1;
                if let Some(v_cand) = point_value(e, &cand, k) {
                    if v_cand > best * (1.0 + 1e-12) {
                        best = v_cand;
                        x = cand;
                        improved = true;
                        break 'dirs;
                    }
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    (best, x, evals)
}

// ---------------------------------------------------------------------------
// Scaling sweeps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub m: u32,
    pub n: u32,
    pub p: u32,
    pub k: u32,
    pub eps_grid: Vec<f64>,
    pub budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub estimate: f64,
    pub budget: usize,
    pub ascent_steps: usize,
    pub predicted_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of log(estimate) against log(eps); `None` when
    /// an estimate vanished and the fit is undefined.
    pub slope: Option<f64>,
    /// Exact predicted exponent `(m(k-n) - np)/p` as (numerator,
    /// denominator) and as a float.
    pub predicted_exponent: (i64, i64),
    pub predicted_exponent_float: f64,
    pub residuals: Vec<f64>,
    /// Set when the predicted exponent is negative: dilation grows as the
    /// parameter shrinks.
    pub growth: bool,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,estimate,budget,ascent_steps,predicted_bound\n");
        for row in &self.rows {
            let pb = row
                .predicted_bound
                .map(|v| format!("{v}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.eps, row.estimate, row.budget, row.ascent_steps, pb
            ));
        }
        out
    }

    pub fn slope_matches_prediction(&self, tol: f64) -> bool {
        match self.slope {
            Some(s) => (s - self.predicted_exponent_float).abs() <= tol,
            None => false,
        }
    }
}

/// Runs the rectangle construction over a decreasing epsilon grid and fits
/// the scaling exponent of the measured k-dilation.
pub fn scaling_sweep(
    f1: Arc<MapExpr>,
    f2: Arc<MapExpr>,
    config: SweepConfig,
) -> Result<SweepResult, DilationError> {
    if config.eps_grid.is_empty() {
        return Err(DilationError::BadEpsilonGrid { need: 8.0 });
    }
    let max = config.eps_grid.iter().cloned().fold(0.0, f64::max);
    let min = config.eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = max / min;
    if !span.is_finite() || span < 8.0 * (1.0 - 1e-12) {
        return Err(DilationError::BadEpsilonGrid { need: 8.0 });
    }
    // Validate the whole grid first so a rejection reports the usable range.
    let mut exprs = Vec::with_capacity(config.eps_grid.len());
    let mut usable = Vec::new();
    let mut rejected: Option<(f64, String)> = None;
    for &eps in &config.eps_grid {
        match prop1_construct(config.m, config.n, config.p, f1.clone(), f2.clone(), eps) {
            Ok(expr) => {
                usable.push(eps);
                exprs.push((eps, expr));
            }
            Err(crate::error::MapError::ChartCapacity(reason)) => {
                rejected.get_or_insert((eps, reason));
            }
            Err(other) => return Err(DilationError::Map(other)),
        }
    }
    if let Some((eps, reason)) = rejected {
        return Err(DilationError::ChartRejected {
            eps,
            reason: format!("{reason}; usable grid values: {usable:?}"),
        });
    }
    let mut rows = Vec::with_capacity(exprs.len());
    for (eps, expr) in &exprs {
        let report = kdilation_seeded(expr, config.k, config.budget, config.seed)?;
        rows.push(SweepRow {
            eps: *eps,
            estimate: report.estimate,
            budget: report.budget,
            ascent_steps: report.ascent_steps,
            predicted_bound: report.predicted_bound,
        });
    }

    let exponent = Rational64::new(
        i64::from(config.m) * (i64::from(config.k) - i64::from(config.n))
            - i64::from(config.n) * i64::from(config.p),
        i64::from(config.p),
    );
    let exponent_float = *exponent.numer() as f64 / *exponent.denom() as f64;

    let (slope, residuals) = fit_loglog(&rows);
    Ok(SweepResult {
        config,
        rows,
        slope,
        predicted_exponent: (*exponent.numer(), *exponent.denom()),
        predicted_exponent_float: exponent_float,
        residuals,
        growth: exponent_float < 0.0,
    })
}

fn fit_loglog(rows: &[SweepRow]) -> (Option<f64>, Vec<f64>) {
    if rows.len() < 2 || rows.iter().any(|r| r.estimate <= 0.0) {
        return (None, Vec::new());
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.estimate.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return (None, Vec::new());
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (slope * x + intercept))
        .collect();
    (Some(slope), residuals)
}
