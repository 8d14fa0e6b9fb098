//! Hopf invariants of maps S^3 -> S^2 by fiber tracing and linking, and
//! the empirical audit of the quadratic dilation bound.

mod linking;
mod trace;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dilation::{kdilation_seeded, DilationReport, DEFAULT_SEED};
use crate::error::HopfError;
use crate::expr::MapExpr;
use crate::geom;
use crate::space::Point;

pub use linking::{linking_number as polyline_linking_number, linking_sum};
pub use trace::{min_trace_distance, trace_preimage, CurveTrace, RANK_TOL, TOL_PRE};

/// Default arclength step for fiber tracing.
pub const DEFAULT_STEP: f64 = 0.02;

/// Minimum spherical separation between the two regular values.
pub const MIN_VALUE_SEPARATION: f64 = 0.1;

/// Linking number of two disjoint closed polylines on S^3.
pub fn linking_number(a: &[Point], b: &[Point]) -> Result<i64, HopfError> {
    linking::linking_number(a, b)
}

/// A full Hopf-invariant computation: the two regular values, their traced
/// fibers, and the linking number.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HopfComputation {
    pub y1: Point,
    pub y2: Point,
    pub trace1: CurveTrace,
    pub trace2: CurveTrace,
    pub linking: i64,
    /// Values that were perturbed away from the deterministic candidate
    /// list after a regularity failure.
    pub substitutions: Vec<Point>,
}

/// Hopf invariant of `e: S^3 -> S^2` by preimage linking.
pub fn hopf_invariant(e: &MapExpr) -> Result<i64, HopfError> {
    hopf_invariant_detailed(e, DEFAULT_STEP).map(|c| c.linking)
}

/// As [`hopf_invariant`], returning the traces and value choices.
pub fn hopf_invariant_detailed(e: &MapExpr, step: f64) -> Result<HopfComputation, HopfError> {
    let mut attempts = 0usize;
    let mut substitutions = Vec::new();
    let mut first: Option<(Point, CurveTrace)> = None;
    for candidate in icosahedral_directions() {
        if attempts >= 20 {
            break;
        }
        if let Some((y1, _)) = &first {
            if geom::sphere_dist(y1, &candidate) < MIN_VALUE_SEPARATION {
                continue;
            }
        }
        let mut y = candidate.clone();
        let mut traced = None;
        for perturb in 0..3 {
            attempts += 1;
            match trace_preimage(e, &y, step) {
                Ok(t) => {
                    traced = Some(t);
                    break;
                }
                Err(HopfError::NotRegular(_)) | Err(HopfError::CorrectorDiverged { .. }) => {
                    y = perturbed(&candidate, perturb + 1);
                    substitutions.push(y.clone());
                }
                Err(other) => return Err(other),
            }
            if attempts >= 20 {
                break;
            }
        }
        let Some(t) = traced else { continue };
        match first.take() {
            None => first = Some((y, t)),
            Some((y1, t1)) => {
                let linking = trace_pair_linking(&t1, &t)?;
                return Ok(HopfComputation {
                    y1,
                    y2: y,
                    trace1: t1,
                    trace2: t,
                    linking,
                    substitutions,
                });
            }
        }
    }
    Err(HopfError::NoRegularValues { attempts })
}

fn trace_pair_linking(a: &CurveTrace, b: &CurveTrace) -> Result<i64, HopfError> {
    let mut total = 0i64;
    for ca in &a.components {
        for cb in &b.components {
            total += linking::linking_number(ca, cb)?;
        }
    }
    Ok(total)
}

fn perturbed(y: &Point, tier: usize) -> Point {
    let t = 0.04 * tier as f64;
    let v = [y[0] + t, y[1] + 0.7 * t, y[2] - 0.3 * t];
    geom::normalized(&v).expect("perturbation stays nonzero")
}

/// The twelve icosahedron vertices: a deterministic, well-spread list of
/// regular-value candidates.
pub fn icosahedral_directions() -> Vec<Point> {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut out = Vec::with_capacity(12);
    for a in [1.0, -1.0] {
        for b in [phi, -phi] {
            out.push(geom::normalized(&[0.0, a, b]).unwrap());
            out.push(geom::normalized(&[a, b, 0.0]).unwrap());
            out.push(geom::normalized(&[b, 0.0, a]).unwrap());
        }
    }
    out
}

/// Outcome of the quadratic-bound audit `|H| <= C * D^2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GromovAudit {
    pub hopf_invariant: i64,
    pub dilation2: DilationReport,
    pub ratio: f64,
    pub fitted_c: f64,
    pub pass: bool,
}

/// Budget used when calibrating the empirical constant.
pub const CALIBRATION_BUDGET: usize = 8192;

/// Empirical constant: 1.25 times the largest ratio `|H| / D^2` observed on
/// the degree-wrapped Hopf family, computed once.
pub fn fitted_constant() -> f64 {
    static FITTED: OnceLock<f64> = OnceLock::new();
    *FITTED.get_or_init(|| {
        let mut worst: f64 = 0.0;
        for d in 1..=3i64 {
            let e = wrapped_hopf(d);
            let h = hopf_invariant(&e).expect("calibration family is regular");
            let rep = kdilation_seeded(&e, 2, CALIBRATION_BUDGET, DEFAULT_SEED)
                .expect("calibration dilation");
            if rep.estimate > 0.0 {
                worst = worst.max(h.unsigned_abs() as f64 / (rep.estimate * rep.estimate));
            }
        }
        1.25 * worst
    })
}

/// The calibration family member: the Hopf map precomposed with a degree-d
/// wrap of S^3.
pub fn wrapped_hopf(d: i64) -> MapExpr {
    use std::sync::Arc;
    MapExpr::compose(Arc::new(MapExpr::hopf()), Arc::new(MapExpr::wrap_s3(d)))
        .expect("signature matches")
}

/// Computes H and D = 2-dilation, then checks `|H| <= fitted_c * D^2`.
pub fn gromov_audit(e: &MapExpr, budget: usize) -> Result<GromovAudit, HopfError> {
    trace::check_signature(e)?;
    let h = hopf_invariant(e)?;
    let dilation2 = kdilation_seeded(e, 2, budget, DEFAULT_SEED)?;
    let fitted_c = fitted_constant();
    let d2 = dilation2.estimate * dilation2.estimate;
    let ratio = if d2 > 0.0 { h.unsigned_abs() as f64 / d2 } else { 0.0 };
    let pass = h.unsigned_abs() as f64 <= fitted_c * d2 + 1e-12;
    Ok(GromovAudit {
        hopf_invariant: h,
        dilation2,
        ratio,
        fitted_c,
        pass,
    })
}

#[cfg(test)]
mod tests;
