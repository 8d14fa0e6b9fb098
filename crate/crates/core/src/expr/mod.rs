//! Composable piecewise-smooth maps between spheres and boxes.
//!
//! A [`MapExpr`] is an immutable expression tree. Every node knows its
//! domain and codomain, evaluates points, and pushes tangent vectors
//! forward analytically (closed forms exist piecewise for every node kind);
//! finite differences are only a cross-check and a fallback near the
//! non-smooth loci, whose distance is reported by [`MapExpr::smooth_margin`].

pub mod collapse;
pub mod fold;
mod json;

use std::sync::Arc;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::MapError;
use crate::geom::{self, Mat};
use crate::space::{Point, Space};

use collapse::{COLLAPSE_LIP, SMASH_LIP};
use fold::FoldPlan;

/// Metadata attached to a rectangle-construction composite: enough to
/// predict its k-dilation bound and scaling exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionMeta {
    pub m: u32,
    pub n: u32,
    pub p: u32,
    pub eps: f64,
    /// Recorded Lipschitz bound for the two cube maps.
    pub lipschitz: f64,
    /// Upper bound on the inverse chart's stretch.
    pub chart_inv_lipschitz: f64,
    /// Recorded Lipschitz bound of the smash stage.
    pub smash_lipschitz: f64,
}

impl ConstructionMeta {
    /// Exact exponent of eps in the predicted k-dilation:
    /// `(m/p)(k - n - (n/m)p) = (m(k-n) - np)/p`.
    pub fn predicted_exponent(&self, k: u32) -> Rational64 {
        let (m, n, p) = (i64::from(self.m), i64::from(self.n), i64::from(self.p));
        Rational64::new(m * (i64::from(k) - n) - n * p, p)
    }

    /// Predicted upper bound `(L/eps)^n (L eps^{m/p})^{k-n}` for the slab
    /// map, multiplied by the recorded stretch of the smash and inverse
    /// chart stages. Only defined for k > n.
    pub fn predicted_bound(&self, k: u32) -> Option<f64> {
        if k <= self.n {
            return None;
        }
        let l = self.lipschitz;
        let ratio = self.m as f64 / self.p as f64;
        let slab = (l / self.eps).powi(self.n as i32)
            * (l * self.eps.powf(ratio)).powi((k - self.n) as i32);
        Some(slab * (self.chart_inv_lipschitz * self.smash_lipschitz).powi(k as i32))
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    /// The Hopf fibration S^3 -> S^2:
    /// `(|z1|^2 - |z2|^2, 2 Re(z1 conj(z2)), 2 Im(z1 conj(z2)))`.
    Hopf,
    /// Orthogonal map of a sphere (rotation or reflection).
    Rotation { matrix: Mat },
    /// Degree-d self-map of S^dim wrapping the angle in one coordinate
    /// 2-plane.
    DegreeWrap {
        dim: usize,
        degree: i64,
        axis_a: usize,
        axis_b: usize,
    },
    /// Radial degree-1 collapse `[0,1]^m -> S^m`, boundary to basepoint.
    CubeCollapse { dim: usize },
    /// Per-axis linear rescale between boxes.
    Rescale { factors: Vec<f64> },
    /// Degree-1 quotient S^a x S^b -> S^{a+b} collapsing the wedge to the
    /// basepoint, realized by conjugating the joint cube collapse.
    Smash { dim_a: usize, dim_b: usize },
    /// Suspension in join coordinates; poles fixed, equator restricts to
    /// the inner map.
    Suspend { inner: Arc<MapExpr> },
    Compose {
        outer: Arc<MapExpr>,
        inner: Arc<MapExpr>,
    },
    /// Direct product of two cube-domain, sphere-codomain maps.
    Product {
        left: Arc<MapExpr>,
        right: Arc<MapExpr>,
    },
    Constant { value: Point },
    /// Quasi-isometric embedding of the slab `[0,eps]^m x [0,eps^{-m/p}]^p`
    /// into S^{m+p} by folding.
    RectangleChart { plan: Arc<FoldPlan> },
    /// Extension-by-basepoint of a slab map through the inverse chart:
    /// points in the embedded slab pull back and map through `inner`,
    /// everything else goes to the basepoint.
    ChartExtend {
        plan: Arc<FoldPlan>,
        inner: Arc<MapExpr>,
        meta: Option<ConstructionMeta>,
    },
}

/// An immutable piecewise-smooth map expression with known domain and
/// codomain. Shareable across threads; evaluation is reentrant.
#[derive(Debug, Clone)]
pub struct MapExpr {
    node: Node,
    domain: Space,
    codomain: Space,
}

fn spaces_compatible(a: &Space, b: &Space) -> bool {
    match (a, b) {
        (Space::Sphere { dim: da }, Space::Sphere { dim: db }) => da == db,
        (Space::Cube { edges: ea }, Space::Cube { edges: eb }) => {
            ea.len() == eb.len()
                && ea
                    .iter()
                    .zip(eb)
                    .all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(1.0))
        }
        (
            Space::SphereProduct { dim_a, dim_b },
            Space::SphereProduct {
                dim_a: da,
                dim_b: db,
            },
        ) => dim_a == da && dim_b == db,
        _ => false,
    }
}

impl MapExpr {
    pub fn domain(&self) -> &Space {
        &self.domain
    }

    pub fn codomain(&self) -> &Space {
        &self.codomain
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn describe(&self) -> String {
        format!("{} -> {}", self.domain.describe(), self.codomain.describe())
    }

    // -- constructors -------------------------------------------------------

    pub fn hopf() -> MapExpr {
        MapExpr {
            node: Node::Hopf,
            domain: Space::sphere(3),
            codomain: Space::sphere(2),
        }
    }

    /// Orthogonal self-map of S^{d} from a (d+1)x(d+1) matrix.
    pub fn rotation(matrix: Mat) -> Result<MapExpr, MapError> {
        if matrix.rows != matrix.cols || matrix.rows == 0 {
            return Err(MapError::BadParameter("rotation matrix must be square".into()));
        }
        let qtq = matrix.transpose().matmul(&matrix);
        let id = Mat::identity(matrix.rows);
        let err: f64 = qtq
            .data
            .iter()
            .zip(&id.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err > 1e-12 {
            return Err(MapError::BadParameter(format!(
                "matrix is not orthogonal (deviation {err:.2e})"
            )));
        }
        let dim = matrix.rows - 1;
        Ok(MapExpr {
            node: Node::Rotation { matrix },
            domain: Space::sphere(dim),
            codomain: Space::sphere(dim),
        })
    }

    /// The reflection of S^d negating the first coordinate.
    pub fn reflection(dim: usize) -> MapExpr {
        let mut m = Mat::identity(dim + 1);
        m[(0, 0)] = -1.0;
        MapExpr::rotation(m).expect("reflection is orthogonal")
    }

    pub fn degree_wrap(
        dim: usize,
        degree: i64,
        axis_a: usize,
        axis_b: usize,
    ) -> Result<MapExpr, MapError> {
        if axis_a == axis_b || axis_a > dim || axis_b > dim || dim < 1 {
            return Err(MapError::BadParameter(format!(
                "bad wrap axes ({axis_a}, {axis_b}) on S^{dim}"
            )));
        }
        Ok(MapExpr {
            node: Node::DegreeWrap {
                dim,
                degree,
                axis_a,
                axis_b,
            },
            domain: Space::sphere(dim),
            codomain: Space::sphere(dim),
        })
    }

    /// Standard degree-d wrap of S^3 in the (x3, x4) plane.
    pub fn wrap_s3(degree: i64) -> MapExpr {
        MapExpr::degree_wrap(3, degree, 2, 3).expect("axes valid")
    }

    pub fn cube_collapse(dim: usize) -> Result<MapExpr, MapError> {
        if dim < 1 {
            return Err(MapError::BadParameter("cube collapse needs dim >= 1".into()));
        }
        Ok(MapExpr {
            node: Node::CubeCollapse { dim },
            domain: Space::unit_cube(dim),
            codomain: Space::sphere(dim),
        })
    }

    pub fn rescale(domain_edges: Vec<f64>, factors: Vec<f64>) -> Result<MapExpr, MapError> {
        if domain_edges.len() != factors.len() || domain_edges.is_empty() {
            return Err(MapError::BadParameter("edge/factor length mismatch".into()));
        }
        if domain_edges.iter().chain(&factors).any(|v| v.is_nan() || *v <= 0.0) {
            return Err(MapError::BadParameter(
                "edges and factors must be positive".into(),
            ));
        }
        let codomain_edges: Vec<f64> = domain_edges.iter().zip(&factors).map(|(e, f)| e * f).collect();
        Ok(MapExpr {
            node: Node::Rescale { factors },
            domain: Space::Cube { edges: domain_edges },
            codomain: Space::Cube {
                edges: codomain_edges,
            },
        })
    }

    pub fn smash(dim_a: usize, dim_b: usize) -> Result<MapExpr, MapError> {
        if dim_a < 1 || dim_b < 1 {
            return Err(MapError::BadParameter("smash needs positive dimensions".into()));
        }
        Ok(MapExpr {
            node: Node::Smash { dim_a, dim_b },
            domain: Space::SphereProduct { dim_a, dim_b },
            codomain: Space::sphere(dim_a + dim_b),
        })
    }

    pub fn suspend(inner: Arc<MapExpr>) -> Result<MapExpr, MapError> {
        let (Space::Sphere { dim: a }, Space::Sphere { dim: b }) =
            (&inner.domain, &inner.codomain)
        else {
            return Err(MapError::NotSphere(inner.describe()));
        };
        let (a, b) = (*a, *b);
        Ok(MapExpr {
            node: Node::Suspend { inner },
            domain: Space::sphere(a + 1),
            codomain: Space::sphere(b + 1),
        })
    }

    pub fn compose(outer: Arc<MapExpr>, inner: Arc<MapExpr>) -> Result<MapExpr, MapError> {
        if !spaces_compatible(&inner.codomain, &outer.domain) {
            return Err(MapError::SpaceMismatch {
                expected: outer.domain.describe(),
                got: inner.codomain.describe(),
            });
        }
        let domain = inner.domain.clone();
        let codomain = outer.codomain.clone();
        Ok(MapExpr {
            node: Node::Compose { outer, inner },
            domain,
            codomain,
        })
    }

    pub fn product(left: Arc<MapExpr>, right: Arc<MapExpr>) -> Result<MapExpr, MapError> {
        let (Space::Cube { edges: ea }, Space::Cube { edges: eb }) =
            (&left.domain, &right.domain)
        else {
            return Err(MapError::BadParameter(
                "product factors must have box domains".into(),
            ));
        };
        let (Space::Sphere { dim: na }, Space::Sphere { dim: nb }) =
            (&left.codomain, &right.codomain)
        else {
            return Err(MapError::BadParameter(
                "product factors must have sphere codomains".into(),
            ));
        };
        let mut edges = ea.clone();
        edges.extend_from_slice(eb);
        let codomain = Space::SphereProduct {
            dim_a: *na,
            dim_b: *nb,
        };
        Ok(MapExpr {
            node: Node::Product { left, right },
            domain: Space::Cube { edges },
            codomain,
        })
    }

    pub fn constant(domain: Space, codomain: Space, value: Point) -> Result<MapExpr, MapError> {
        codomain.check_point(&value)?;
        Ok(MapExpr {
            node: Node::Constant { value },
            domain,
            codomain,
        })
    }

    /// Constant-to-basepoint map between spheres.
    pub fn constant_basepoint(dom_dim: usize, codom_dim: usize) -> MapExpr {
        let codomain = Space::sphere(codom_dim);
        let value = codomain.basepoint();
        MapExpr::constant(Space::sphere(dom_dim), codomain, value).expect("basepoint valid")
    }

    pub fn rectangle_chart(m: usize, p: usize, eps: f64) -> Result<MapExpr, MapError> {
        let plan = FoldPlan::new(m, p, eps)?;
        Ok(MapExpr {
            domain: Space::Cube {
                edges: plan.edges.clone(),
            },
            codomain: Space::sphere(m + p),
            node: Node::RectangleChart {
                plan: Arc::new(plan),
            },
        })
    }

    pub fn chart_extend(
        m: usize,
        p: usize,
        eps: f64,
        inner: Arc<MapExpr>,
        meta: Option<ConstructionMeta>,
    ) -> Result<MapExpr, MapError> {
        let plan = FoldPlan::new(m, p, eps)?;
        let slab = Space::Cube {
            edges: plan.edges.clone(),
        };
        if !spaces_compatible(&inner.domain, &slab) {
            return Err(MapError::SpaceMismatch {
                expected: slab.describe(),
                got: inner.domain.describe(),
            });
        }
        if !matches!(inner.codomain, Space::Sphere { .. }) {
            return Err(MapError::NotSphere(inner.describe()));
        }
        Ok(MapExpr {
            domain: Space::sphere(m + p),
            codomain: inner.codomain.clone(),
            node: Node::ChartExtend {
                plan: Arc::new(plan),
                inner,
                meta,
            },
        })
    }

    /// Construction metadata, when this expression is a rectangle composite.
    pub fn construction_meta(&self) -> Option<&ConstructionMeta> {
        match &self.node {
            Node::ChartExtend { meta, .. } => meta.as_ref(),
            _ => None,
        }
    }

    /// The chart plan, when this expression embeds or extends a rectangle.
    pub fn fold_plan(&self) -> Option<&FoldPlan> {
        match &self.node {
            Node::RectangleChart { plan } => Some(plan),
            Node::ChartExtend { plan, .. } => Some(plan),
            _ => None,
        }
    }

    /// Recorded Lipschitz bound, when every stage has one.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        match &self.node {
            Node::Hopf => Some(2.0),
            Node::Rotation { .. } => Some(1.0),
            Node::DegreeWrap { degree, .. } => Some((degree.unsigned_abs() as f64).max(1.0)),
            Node::CubeCollapse { .. } => Some(COLLAPSE_LIP),
            Node::Rescale { factors } => factors.iter().cloned().reduce(f64::max),
            Node::Smash { .. } => Some(SMASH_LIP),
            Node::Suspend { inner } => inner.lipschitz_bound().map(|l| l.max(1.0) + 1.0),
            Node::Compose { outer, inner } => {
                Some(outer.lipschitz_bound()? * inner.lipschitz_bound()?)
            }
            Node::Product { left, right } => {
                Some(left.lipschitz_bound()?.max(right.lipschitz_bound()?))
            }
            Node::Constant { .. } => Some(0.0),
            Node::RectangleChart { plan } => Some(plan.sval_bounds().1),
            Node::ChartExtend { plan, inner, .. } => {
                Some(inner.lipschitz_bound()? / plan.sval_bounds().0)
            }
        }
    }

    // -- evaluation ---------------------------------------------------------

    /// Evaluate at a domain point. Sphere outputs are renormalized; any
    /// non-finite intermediate is an error.
    pub fn eval(&self, x: &[f64]) -> Result<Point, MapError> {
        self.domain.check_point(x)?;
        let y = self.eval_unchecked(x)?;
        Ok(y)
    }

    fn eval_unchecked(&self, x: &[f64]) -> Result<Point, MapError> {
        let raw = match &self.node {
            Node::Hopf => hopf_eval(x),
            Node::Rotation { matrix } => matrix.mul_vec(x),
            Node::DegreeWrap {
                degree,
                axis_a,
                axis_b,
                ..
            } => wrap_eval(x, *degree, *axis_a, *axis_b),
            Node::CubeCollapse { .. } => collapse::collapse(x),
            Node::Rescale { factors } => x.iter().zip(factors).map(|(xi, f)| xi * f).collect(),
            Node::Smash { dim_a, dim_b } => smash_eval(x, *dim_a, *dim_b),
            Node::Suspend { inner } => suspend_eval(inner, x)?,
            Node::Compose { outer, inner } => {
                let mid = inner.eval_unchecked(x)?;
                let mid = normalize_for(&inner.codomain, mid)?;
                outer.eval_unchecked(&mid)?
            }
            Node::Product { left, right } => {
                let split = left.domain.ambient_dim();
                let mut y = left.eval_unchecked(&x[..split])?;
                y = normalize_for(&left.codomain, y)?;
                let mut yr = right.eval_unchecked(&x[split..])?;
                yr = normalize_for(&right.codomain, yr)?;
                y.extend(yr);
                y
            }
            Node::Constant { value } => value.clone(),
            Node::RectangleChart { plan } => plan.chart(x),
            Node::ChartExtend { plan, inner, .. } => match plan.invert(x) {
                Some(slab) => {
                    let y = inner.eval_unchecked(&slab)?;
                    normalize_for(&inner.codomain, y)?
                }
                None => self.codomain.basepoint(),
            },
        };
        normalize_for(&self.codomain, raw)
    }

    /// Evaluate and push one tangent vector forward. The returned derivative
    /// is an ambient vector, tangent-projected for sphere codomains.
    pub fn push(&self, x: &[f64], dx: &[f64]) -> Result<(Point, Vec<f64>), MapError> {
        self.domain.check_point(x)?;
        let (y, dy) = self.push_unchecked(x, dx)?;
        Ok((y, dy))
    }

    fn push_unchecked(&self, x: &[f64], dx: &[f64]) -> Result<(Point, Vec<f64>), MapError> {
        let (raw, draw) = match &self.node {
            Node::Hopf => hopf_jvp(x, dx),
            Node::Rotation { matrix } => (matrix.mul_vec(x), matrix.mul_vec(dx)),
            Node::DegreeWrap {
                degree,
                axis_a,
                axis_b,
                ..
            } => wrap_jvp(x, dx, *degree, *axis_a, *axis_b),
            Node::CubeCollapse { .. } => collapse::collapse_jvp(x, dx),
            Node::Rescale { factors } => (
                x.iter().zip(factors).map(|(xi, f)| xi * f).collect(),
                dx.iter().zip(factors).map(|(di, f)| di * f).collect(),
            ),
            Node::Smash { dim_a, .. } => smash_jvp(x, dx, *dim_a),
            Node::Suspend { inner } => suspend_jvp(inner, x, dx)?,
            Node::Compose { outer, inner } => {
                let (mid, dmid) = inner.push_unchecked(x, dx)?;
                let (mid, dmid) = normalize_jvp_for(&inner.codomain, mid, dmid)?;
                outer.push_unchecked(&mid, &dmid)?
            }
            Node::Product { left, right } => {
                let split = left.domain.ambient_dim();
                let (ya, da) = left.push_unchecked(&x[..split], &dx[..split])?;
                let (ya, da) = normalize_jvp_for(&left.codomain, ya, da)?;
                let (yb, db) = right.push_unchecked(&x[split..], &dx[split..])?;
                let (yb, db) = normalize_jvp_for(&right.codomain, yb, db)?;
                let mut y = ya;
                y.extend(yb);
                let mut d = da;
                d.extend(db);
                (y, d)
            }
            Node::Constant { value } => (value.clone(), vec![0.0; value.len()]),
            Node::RectangleChart { plan } => plan.chart_jvp(x, dx),
            Node::ChartExtend { plan, inner, .. } => match plan.invert_jvp(x, dx) {
                Some((slab, dslab)) => {
                    let (y, dy) = inner.push_unchecked(&slab, &dslab)?;
                    normalize_jvp_for(&inner.codomain, y, dy)?
                }
                None => {
                    let bp = self.codomain.basepoint();
                    let z = vec![0.0; bp.len()];
                    (bp, z)
                }
            },
        };
        normalize_jvp_for(&self.codomain, raw, draw)
    }

    /// Lower-bound estimate of the distance from `x` to the nearest
    /// non-smooth locus of this expression, in domain units. Infinite for
    /// globally smooth expressions.
    pub fn smooth_margin(&self, x: &[f64]) -> f64 {
        match &self.node {
            Node::Hopf | Node::Rotation { .. } | Node::Rescale { .. } | Node::Constant { .. } => {
                f64::INFINITY
            }
            Node::DegreeWrap {
                degree,
                axis_a,
                axis_b,
                ..
            } => {
                if *degree == 1 {
                    f64::INFINITY
                } else {
                    (x[*axis_a] * x[*axis_a] + x[*axis_b] * x[*axis_b]).sqrt()
                }
            }
            Node::CubeCollapse { .. } => collapse::collapse_margin(x),
            Node::Smash { dim_a, dim_b } => {
                let a = &x[..dim_a + 1];
                let b = &x[dim_a + 1..dim_a + 1 + dim_b + 1];
                let ma = collapse::collapse_inv_margin(a);
                let mb = collapse::collapse_inv_margin(b);
                let joint: Vec<f64> = collapse::collapse_inv(a)
                    .into_iter()
                    .chain(collapse::collapse_inv(b))
                    .collect();
                ma.min(mb).min(collapse::collapse_margin(&joint))
            }
            Node::Suspend { inner } => {
                let a = inner.domain.ambient_dim();
                let c = geom::norm(&x[..a]);
                if c < 1e-12 {
                    return 0.0;
                }
                let xin: Vec<f64> = x[..a].iter().map(|v| v / c).collect();
                c.min(inner.smooth_margin(&xin))
            }
            Node::Compose { outer, inner } => {
                let mi = inner.smooth_margin(x);
                match inner.eval_unchecked(x).and_then(|y| normalize_for(&inner.codomain, y)) {
                    Ok(mid) => mi.min(outer.smooth_margin(&mid)),
                    Err(_) => 0.0,
                }
            }
            Node::Product { left, right } => {
                let split = left.domain.ambient_dim();
                left.smooth_margin(&x[..split])
                    .min(right.smooth_margin(&x[split..]))
            }
            Node::RectangleChart { plan } => {
                let boundary = x
                    .iter()
                    .zip(&plan.edges)
                    .fold(f64::INFINITY, |acc, (xi, e)| acc.min(xi.min(e - xi)));
                boundary.min(plan.junction_margin(x))
            }
            Node::ChartExtend { plan, inner, .. } => match plan.invert(x) {
                Some(slab) => {
                    let boundary = slab
                        .iter()
                        .zip(&plan.edges)
                        .fold(f64::INFINITY, |acc, (xi, e)| acc.min(xi.min(e - xi)));
                    let slab_margin = boundary.min(plan.junction_margin(&slab));
                    (slab_margin * plan.g).min(inner.smooth_margin(&slab))
                }
                None => {
                    // Outside the embedded slab the map is constant; the
                    // nearest non-smooth points lie on the image boundary.
                    match fold::log_north(x, f64::INFINITY) {
                        Some(v) => {
                            let outside = v
                                .iter()
                                .zip(&plan.extents)
                                .map(|(vi, e)| vi.abs() - e / 2.0)
                                .fold(f64::NEG_INFINITY, f64::max);
                            outside.max(0.0)
                        }
                        None => 0.0,
                    }
                }
            },
        }
    }

    /// Whether analytic pushforwards are available (true for every node
    /// kind in this crate; finite differences remain a cross-check).
    pub fn has_analytic_jacobian(&self) -> bool {
        true
    }
}

fn normalize_for(space: &Space, mut y: Point) -> Result<Point, MapError> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(MapError::NonFinite("map evaluation"));
    }
    match space {
        Space::Sphere { .. } => {
            let n = geom::norm(&y);
            if n < 1e-300 {
                return Err(MapError::NonFinite("zero-norm sphere value"));
            }
            for v in y.iter_mut() {
                *v /= n;
            }
            Ok(y)
        }
        Space::Cube { .. } => Ok(y),
        Space::SphereProduct { dim_a, .. } => {
            let (a, b) = y.split_at(dim_a + 1);
            let mut out = normalize_for(&Space::sphere(*dim_a), a.to_vec())?;
            out.extend(normalize_for(&Space::sphere(b.len() - 1), b.to_vec())?);
            Ok(out)
        }
    }
}

fn normalize_jvp_for(space: &Space, y: Point, dy: Vec<f64>) -> Result<(Point, Vec<f64>), MapError> {
    if dy.iter().any(|v| !v.is_finite()) {
        return Err(MapError::NonFinite("map derivative"));
    }
    match space {
        Space::Sphere { .. } => {
            let n = geom::norm(&y);
            if n < 1e-300 {
                return Err(MapError::NonFinite("zero-norm sphere value"));
            }
            let yn: Vec<f64> = y.iter().map(|v| v / n).collect();
            let radial = geom::dot(&yn, &dy);
            let dyn_: Vec<f64> = dy
                .iter()
                .zip(&yn)
                .map(|(d, yi)| (d - radial * yi) / n)
                .collect();
            Ok((yn, dyn_))
        }
        Space::Cube { .. } => Ok((y, dy)),
        Space::SphereProduct { dim_a, .. } => {
            let split = dim_a + 1;
            let (ya, da) = normalize_jvp_for(
                &Space::sphere(*dim_a),
                y[..split].to_vec(),
                dy[..split].to_vec(),
            )?;
            let (yb, db) = normalize_jvp_for(
                &Space::sphere(y.len() - split - 1),
                y[split..].to_vec(),
                dy[split..].to_vec(),
            )?;
            let mut out_y = ya;
            out_y.extend(yb);
            let mut out_d = da;
            out_d.extend(db);
            Ok((out_y, out_d))
        }
    }
}

// -- node evaluation kernels -------------------------------------------------

fn hopf_eval(x: &[f64]) -> Point {
    let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
    vec![
        a * a + b * b - c * c - d * d,
        2.0 * (a * c + b * d),
        2.0 * (b * c - a * d),
    ]
}

fn hopf_jvp(x: &[f64], dx: &[f64]) -> (Point, Vec<f64>) {
    let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
    let (da, db, dc, dd) = (dx[0], dx[1], dx[2], dx[3]);
    let y = hopf_eval(x);
    let dy = vec![
        2.0 * (a * da + b * db - c * dc - d * dd),
        2.0 * (da * c + a * dc + db * d + b * dd),
        2.0 * (db * c + b * dc - da * d - a * dd),
    ];
    (y, dy)
}

fn wrap_eval(x: &[f64], degree: i64, ia: usize, ib: usize) -> Point {
    let mut y = x.to_vec();
    let (xa, xb) = (x[ia], x[ib]);
    let rho = (xa * xa + xb * xb).sqrt();
    if rho < 1e-300 {
        y[ia] = 0.0;
        y[ib] = 0.0;
        return y;
    }
    let theta = xb.atan2(xa);
    let phi = degree as f64 * theta;
    y[ia] = rho * phi.cos();
    y[ib] = rho * phi.sin();
    y
}

fn wrap_jvp(x: &[f64], dx: &[f64], degree: i64, ia: usize, ib: usize) -> (Point, Vec<f64>) {
    let y = wrap_eval(x, degree, ia, ib);
    let mut dy = dx.to_vec();
    let (xa, xb) = (x[ia], x[ib]);
    let rho2 = xa * xa + xb * xb;
    let rho = rho2.sqrt();
    if rho < 1e-12 {
        dy[ia] = 0.0;
        dy[ib] = 0.0;
        return (y, dy);
    }
    let drho = (xa * dx[ia] + xb * dx[ib]) / rho;
    let dtheta = (xa * dx[ib] - xb * dx[ia]) / rho2;
    let theta = xb.atan2(xa);
    let dphi = degree as f64 * dtheta;
    let phi = degree as f64 * theta;
    dy[ia] = drho * phi.cos() - rho * phi.sin() * dphi;
    dy[ib] = drho * phi.sin() + rho * phi.cos() * dphi;
    (y, dy)
}

fn smash_eval(x: &[f64], dim_a: usize, dim_b: usize) -> Point {
    let a = &x[..dim_a + 1];
    let b = &x[dim_a + 1..dim_a + 1 + dim_b + 1];
    let mut joint = collapse::collapse_inv(a);
    joint.extend(collapse::collapse_inv(b));
    collapse::collapse(&joint)
}

fn smash_jvp(x: &[f64], dx: &[f64], dim_a: usize) -> (Point, Vec<f64>) {
    let split = dim_a + 1;
    let (ua, dua) = collapse::collapse_inv_jvp(&x[..split], &dx[..split]);
    let (ub, dub) = collapse::collapse_inv_jvp(&x[split..], &dx[split..]);
    let mut joint = ua;
    joint.extend(ub);
    let mut djoint = dua;
    djoint.extend(dub);
    collapse::collapse_jvp(&joint, &djoint)
}

fn suspend_eval(inner: &MapExpr, x: &[f64]) -> Result<Point, MapError> {
    let a = inner.domain.ambient_dim();
    let head = &x[..a];
    let s = x[a];
    let c = geom::norm(head);
    let out_dim = inner.codomain.ambient_dim();
    if c < 1e-14 {
        let mut y = vec![0.0; out_dim + 1];
        y[out_dim] = s.signum();
        return Ok(y);
    }
    let xin: Vec<f64> = head.iter().map(|v| v / c).collect();
    let yin = inner.eval_unchecked(&xin)?;
    let yin = normalize_for(&inner.codomain, yin)?;
    let mut y: Vec<f64> = yin.iter().map(|v| v * c).collect();
    y.push(s);
    Ok(y)
}

fn suspend_jvp(inner: &MapExpr, x: &[f64], dx: &[f64]) -> Result<(Point, Vec<f64>), MapError> {
    let a = inner.domain.ambient_dim();
    let head = &x[..a];
    let s = x[a];
    let c = geom::norm(head);
    let out_dim = inner.codomain.ambient_dim();
    if c < 1e-12 {
        let mut y = vec![0.0; out_dim + 1];
        y[out_dim] = s.signum();
        return Ok((y, vec![0.0; out_dim + 1]));
    }
    let dc = geom::dot(head, &dx[..a]) / c;
    let xin: Vec<f64> = head.iter().map(|v| v / c).collect();
    let dxin: Vec<f64> = head
        .iter()
        .zip(&dx[..a])
        .map(|(h, dh)| dh / c - h * dc / (c * c))
        .collect();
    let (yin, dyin) = inner.push_unchecked(&xin, &dxin)?;
    let (yin, dyin) = normalize_jvp_for(&inner.codomain, yin, dyin)?;
    let mut y: Vec<f64> = yin.iter().map(|v| v * c).collect();
    y.push(s);
    let mut dy: Vec<f64> = dyin
        .iter()
        .zip(&yin)
        .map(|(d, v)| d * c + v * dc)
        .collect();
    dy.push(dx[a]);
    Ok((y, dy))
}

/// Build the rectangle-construction composite realizing a p-fold suspension:
/// embed the slab, pull back, rescale both blocks to unit cubes, apply
/// `f1 x f2`, smash, and send everything outside the slab to the basepoint.
///
/// `f1` must map `[0,1]^m` to S^n with the whole boundary on the basepoint;
/// `f2` must map `[0,1]^p` to S^p the same way (degree 1 is recorded, not
/// checked).
pub fn prop1_construct(
    m: u32,
    n: u32,
    p: u32,
    f1: Arc<MapExpr>,
    f2: Arc<MapExpr>,
    eps: f64,
) -> Result<MapExpr, MapError> {
    let (mu, nu, pu) = (m as usize, n as usize, p as usize);
    check_cube_map(&f1, mu, nu, "f1")?;
    check_cube_map(&f2, pu, pu, "f2")?;
    check_boundary_to_basepoint(&f1, "f1")?;
    check_boundary_to_basepoint(&f2, "f2")?;

    let plan = FoldPlan::new(mu, pu, eps)?;
    let long_edge = plan.edges[mu];
    let lip = f1
        .lipschitz_bound()
        .and_then(|a| f2.lipschitz_bound().map(|b| a.max(b)))
        .ok_or_else(|| MapError::BadParameter("factors need Lipschitz bounds".into()))?;

    let scale1 = MapExpr::rescale(vec![eps; mu], vec![1.0 / eps; mu])?;
    let scale2 = MapExpr::rescale(vec![long_edge; pu], vec![1.0 / long_edge; pu])?;
    let big1 = MapExpr::compose(f1, Arc::new(scale1))?;
    let big2 = MapExpr::compose(f2, Arc::new(scale2))?;
    let pair = MapExpr::product(Arc::new(big1), Arc::new(big2))?;
    let smash = MapExpr::smash(nu, pu)?;
    let inner = MapExpr::compose(Arc::new(smash), Arc::new(pair))?;

    let meta = ConstructionMeta {
        m,
        n,
        p,
        eps,
        lipschitz: lip,
        chart_inv_lipschitz: 1.0 / plan.sval_bounds().0,
        smash_lipschitz: SMASH_LIP,
    };
    MapExpr::chart_extend(mu, pu, eps, Arc::new(inner), Some(meta))
}

fn check_cube_map(f: &MapExpr, dim: usize, target: usize, name: &str) -> Result<(), MapError> {
    let dom_ok = matches!(&f.domain, Space::Cube { edges }
        if edges.len() == dim && edges.iter().all(|e| (e - 1.0).abs() < 1e-9));
    let cod_ok = matches!(&f.codomain, Space::Sphere { dim: d } if *d == target);
    if !dom_ok || !cod_ok {
        return Err(MapError::SpaceMismatch {
            expected: format!("{name}: [0,1]^{dim} -> S^{target}"),
            got: f.describe(),
        });
    }
    Ok(())
}

fn check_boundary_to_basepoint(f: &MapExpr, name: &str) -> Result<(), MapError> {
    let dim = f.domain.dim();
    let bp = f.codomain.basepoint();
    for face_axis in 0..dim {
        for face_val in [0.0, 1.0] {
            for jitter in 0..3 {
                let mut x = vec![0.0; dim];
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = ((0.23 + 0.61 * i as f64 + 0.37 * jitter as f64) % 1.0).clamp(0.0, 1.0);
                }
                x[face_axis] = face_val;
                let y = f.eval(&x)?;
                if geom::dist(&y, &bp) > 1e-7 {
                    return Err(MapError::BadParameter(format!(
                        "{name} does not send the cube boundary to the basepoint (off by {:.2e})",
                        geom::dist(&y, &bp)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// `f1` realization used throughout: the Hopf map precomposed with the cube
/// collapse and rotated so the boundary lands on the basepoint of S^2.
pub fn hopf_cube_map() -> MapExpr {
    // collapse sends the boundary to (0,0,0,-1); hopf maps that to
    // (-1, 0, 0); rotate that to the S^2 basepoint (0, 0, -1).
    let mut r = Mat::zeros(3, 3);
    r[(0, 2)] = -1.0;
    r[(1, 1)] = 1.0;
    r[(2, 0)] = 1.0;
    let rot = MapExpr::rotation(r).expect("orthogonal");
    let inner = MapExpr::compose(Arc::new(MapExpr::hopf()), Arc::new(MapExpr::cube_collapse(3).unwrap()))
        .expect("compose");
    MapExpr::compose(Arc::new(rot), Arc::new(inner)).expect("compose")
}

/// Degree-1 cube map `[0,1]^p -> S^p`: the cube collapse itself.
pub fn degree_one_cube_map(p: usize) -> MapExpr {
    MapExpr::cube_collapse(p).expect("p >= 1")
}

#[cfg(test)]
mod tests;
