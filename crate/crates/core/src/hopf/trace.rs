//! Predictor-corrector tracing of regular-value preimages of maps
//! S^3 -> S^2. Fibers are closed curves; we trace all components found
//! from a deterministic seed grid and orient them by the pullback frame
//! rule.

use serde::{Deserialize, Serialize};

use crate::dilation::sampling::DomainSampler;
use crate::error::HopfError;
use crate::expr::MapExpr;
use crate::geom::{self, Mat};
use crate::space::{Point, Space};

/// Vertices must map within this distance of the regular value.
pub const TOL_PRE: f64 = 1e-6;

/// Rank threshold: the two transverse singular values of the constraint
/// Jacobian must exceed this for the value to count as regular.
pub const RANK_TOL: f64 = 1e-3;

/// Closed polyline approximation of a regular-value preimage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveTrace {
    /// Closed components; vertex order carries the orientation induced by
    /// the map (kernel direction first in a positive frame).
    pub components: Vec<Vec<Point>>,
    pub regular_value: Point,
    pub step: f64,
    /// Per component: distance between the last and first vertices.
    pub closure_gaps: Vec<f64>,
}

impl CurveTrace {
    pub fn total_vertices(&self) -> usize {
        self.components.iter().map(Vec::len).sum()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces serialize")
    }
}

/// Residual, constraint Jacobian in the tangent frame, and the frame.
type ConstraintJet = ([f64; 2], Mat, Vec<Vec<f64>>);

struct Constraint<'a> {
    map: &'a MapExpr,
    u1: Vec<f64>,
    u2: Vec<f64>,
    y: Vec<f64>,
}

impl<'a> Constraint<'a> {
    fn new(map: &'a MapExpr, y: &[f64]) -> Constraint<'a> {
        let frame = Space::sphere(2).tangent_frame(y);
        Constraint {
            map,
            u1: frame[0].clone(),
            u2: frame[1].clone(),
            y: y.to_vec(),
        }
    }

    fn residual(&self, x: &[f64]) -> Result<([f64; 2], f64), HopfError> {
        let v = self.map.eval(x)?;
        Ok(([geom::dot(&self.u1, &v), geom::dot(&self.u2, &v)], geom::dot(&self.y, &v)))
    }

    /// Residual plus the 2x3 Jacobian in the tangent frame at `x`.
    fn jacobian(&self, x: &[f64]) -> Result<ConstraintJet, HopfError> {
        let frame = Space::sphere(3).tangent_frame(x);
        let mut jac = Mat::zeros(2, 3);
        let mut c = [0.0; 2];
        for (j, v) in frame.iter().enumerate() {
            let (val, dv) = self.map.push(x, v)?;
            if j == 0 {
                c = [geom::dot(&self.u1, &val), geom::dot(&self.u2, &val)];
            }
            jac[(0, j)] = geom::dot(&self.u1, &dv);
            jac[(1, j)] = geom::dot(&self.u2, &dv);
        }
        Ok((c, jac, frame))
    }

    /// Newton projection onto the fiber. Returns the refined point.
    fn correct(&self, x0: &Point, tol: f64, max_iter: usize) -> Option<Point> {
        let mut x = x0.clone();
        for _ in 0..max_iter {
            let (c, jac, frame) = self.jacobian(&x).ok()?;
            let cnorm = (c[0] * c[0] + c[1] * c[1]).sqrt();
            if cnorm < tol {
                return Some(x);
            }
            // Minimal-norm step: J^T (J J^T)^{-1} (-c).
            let a = jac[(0, 0)] * jac[(0, 0)] + jac[(0, 1)] * jac[(0, 1)] + jac[(0, 2)] * jac[(0, 2)];
            let b = jac[(0, 0)] * jac[(1, 0)] + jac[(0, 1)] * jac[(1, 1)] + jac[(0, 2)] * jac[(1, 2)];
            let d = jac[(1, 0)] * jac[(1, 0)] + jac[(1, 1)] * jac[(1, 1)] + jac[(1, 2)] * jac[(1, 2)];
            let det = a * d - b * b;
            if det.abs() < 1e-18 {
                return None;
            }
            let lam0 = (-c[0] * d + c[1] * b) / det;
            let lam1 = (-a * c[1] + b * c[0]) / det;
            let mut step = vec![0.0; 4];
            for (j, fv) in frame.iter().enumerate() {
                let coeff = jac[(0, j)] * lam0 + jac[(1, j)] * lam1;
                geom::axpy(&mut step, coeff, fv);
            }
            // Damped update.
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..8 {
                if let Some(cand) = Space::sphere(3).retract(&x, &step, t) {
                    if let Ok((c_new, _)) = self.residual(&cand) {
                        let n_new = (c_new[0] * c_new[0] + c_new[1] * c_new[1]).sqrt();
                        if n_new < cnorm {
                            x = cand;
                            accepted = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        let (c, _) = self.residual(&x).ok()?;
        if (c[0] * c[0] + c[1] * c[1]).sqrt() < tol {
            Some(x)
        } else {
            None
        }
    }

    /// Kernel direction of the constraint Jacobian at a fiber point, as an
    /// ambient vector, along with the two transverse singular values.
    fn kernel(&self, x: &Point) -> Result<(Vec<f64>, [f64; 2]), HopfError> {
        let (_, jac, frame) = self.jacobian(x)?;
        let g1 = [jac[(0, 0)], jac[(0, 1)], jac[(0, 2)]];
        let g2 = [jac[(1, 0)], jac[(1, 1)], jac[(1, 2)]];
        let kern = geom::cross3(&g1, &g2);
        let svals = crate::svd::singular_values_thin(&jac);
        let mut ambient = vec![0.0; 4];
        for (j, fv) in frame.iter().enumerate() {
            geom::axpy(&mut ambient, kern[j], fv);
        }
        let n = geom::norm(&ambient);
        if n < 1e-12 {
            return Err(HopfError::NotRegular(format!(
                "kernel degenerate at {x:?} (svals {svals:?})"
            )));
        }
        Ok((geom::scale(&ambient, 1.0 / n), [svals[0], svals[1]]))
    }

    /// Orient the kernel so that (kernel, pullbacks of the oriented frame
    /// of S^2) is positively oriented in S^3 (outward normal first).
    fn oriented_kernel(&self, x: &Point) -> Result<Vec<f64>, HopfError> {
        let (kern, svals) = self.kernel(x)?;
        if svals[1] < RANK_TOL {
            return Err(HopfError::NotRegular(format!(
                "rank drop at fiber point (s2 = {})",
                svals[1]
            )));
        }
        let (_, jac, frame) = self.jacobian(x)?;
        // Minimal-norm solutions of J w = e_i.
        let a = jac[(0, 0)] * jac[(0, 0)] + jac[(0, 1)] * jac[(0, 1)] + jac[(0, 2)] * jac[(0, 2)];
        let b = jac[(0, 0)] * jac[(1, 0)] + jac[(0, 1)] * jac[(1, 1)] + jac[(0, 2)] * jac[(1, 2)];
        let d = jac[(1, 0)] * jac[(1, 0)] + jac[(1, 1)] * jac[(1, 1)] + jac[(1, 2)] * jac[(1, 2)];
        let det = a * d - b * b;
        let mut w = [vec![0.0; 4], vec![0.0; 4]];
        for (i, wi) in w.iter_mut().enumerate() {
            let rhs = if i == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
            let lam0 = (rhs[0] * d - rhs[1] * b) / det;
            let lam1 = (a * rhs[1] - b * rhs[0]) / det;
            for (j, fv) in frame.iter().enumerate() {
                let coeff = jac[(0, j)] * lam0 + jac[(1, j)] * lam1;
                geom::axpy(wi, coeff, fv);
            }
        }
        let mut det4 = Mat::zeros(4, 4);
        for r in 0..4 {
            det4[(r, 0)] = x[r];
            det4[(r, 1)] = kern[r];
            det4[(r, 2)] = w[0][r];
            det4[(r, 3)] = w[1][r];
        }
        Ok(if det4.det() > 0.0 { kern } else { geom::scale(&kern, -1.0) })
    }
}

/// Trace the preimage `e^{-1}(y)` of a regular value of `e: S^3 -> S^2`.
///
/// Components are found from a deterministic seed grid, traced by
/// predictor-corrector continuation, and deduplicated by distance.
pub fn trace_preimage(e: &MapExpr, y: &[f64], step: f64) -> Result<CurveTrace, HopfError> {
    check_signature(e)?;
    Space::sphere(2)
        .check_point(y)
        .map_err(HopfError::Map)?;
    if !(step > 1e-6 && step < 0.5) {
        return Err(HopfError::Map(crate::error::MapError::BadParameter(
            format!("trace step {step} out of range"),
        )));
    }
    let constraint = Constraint::new(e, y);
    let sampler = DomainSampler::new(Space::sphere(3), 0x5eed);
    let mut components: Vec<Vec<Point>> = Vec::new();
    let mut closure_gaps: Vec<f64> = Vec::new();
    let n_seeds = 64;
    for i in 0..n_seeds {
        let Some(seed) = sampler.sample(i) else { continue };
        let Some(start) = constraint.correct(&seed, 1e-10, 60) else {
            continue;
        };
        // Front hemisphere only: the antipodal fiber solves the same
        // tangent equations.
        match constraint.residual(&start) {
            Ok((_, axis)) if axis > 0.0 => {}
            _ => continue,
        }
        if components
            .iter()
            .any(|comp| min_dist_to_polyline(&start, comp) < 3.0 * step)
        {
            continue;
        }
        let component = trace_component(&constraint, &start, step)?;
        if component.len() < 3 {
            continue;
        }
        let gap = geom::dist(component.last().unwrap(), &component[0]);
        components.push(component);
        closure_gaps.push(gap);
    }
    let trace = CurveTrace {
        components,
        regular_value: y.to_vec(),
        step,
        closure_gaps,
    };
    for comp in &trace.components {
        for v in comp {
            let dev = geom::dist(&e.eval(v)?, y);
            if dev > TOL_PRE {
                return Err(HopfError::NotRegular(format!(
                    "traced vertex deviates by {dev:.2e}"
                )));
            }
        }
    }
    Ok(trace)
}

fn trace_component(
    constraint: &Constraint,
    start: &Point,
    step: f64,
) -> Result<Vec<Point>, HopfError> {
    let mut vertices = vec![start.clone()];
    let mut dir = constraint.oriented_kernel(start)?;
    let mut x = start.clone();
    let max_steps = (200.0 / step) as usize;
    for step_idx in 0..max_steps {
        let mut h = step;
        let mut next = None;
        for _halving in 0..5 {
            let Some(pred) = Space::sphere(3).retract(&x, &dir, h) else {
                h *= 0.5;
                continue;
            };
            if let Some(corr) = constraint.correct(&pred, 1e-10, 25) {
                // Reject correctors that jumped to another sheet.
                if geom::dist(&corr, &x) < 2.5 * h {
                    next = Some(corr);
                    break;
                }
            }
            h *= 0.5;
        }
        let Some(nx) = next else {
            return Err(HopfError::CorrectorDiverged { halvings: 5 });
        };
        let (kern, _) = constraint.kernel(&nx)?;
        let aligned = if geom::dot(&kern, &dir) >= 0.0 {
            kern
        } else {
            geom::scale(&kern, -1.0)
        };
        x = nx;
        dir = aligned;
        vertices.push(x.clone());
        if step_idx >= 4 && geom::dist(&x, start) < step {
            return Ok(vertices);
        }
    }
    Err(HopfError::NoClosure { steps: max_steps })
}

fn min_dist_to_polyline(x: &Point, poly: &[Point]) -> f64 {
    poly.iter()
        .map(|v| geom::dist(x, v))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum vertex distance between two traces.
pub fn min_trace_distance(a: &CurveTrace, b: &CurveTrace) -> f64 {
    let mut best = f64::INFINITY;
    for ca in &a.components {
        for cb in &b.components {
            for va in ca {
                best = best.min(min_dist_to_polyline(va, cb));
            }
        }
    }
    best
}

pub(crate) fn check_signature(e: &MapExpr) -> Result<(), HopfError> {
    let ok = matches!(e.domain(), Space::Sphere { dim: 3 })
        && matches!(e.codomain(), Space::Sphere { dim: 2 });
    if ok {
        Ok(())
    } else {
        Err(HopfError::WrongSignature(e.describe()))
    }
}
