//! JSON expression trees for [`MapExpr`]: node kind, parameters, children.
//! Deserialization reruns the validating constructors, so domains and
//! codomains are rebuilt rather than trusted.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::MapError;
use crate::geom::Mat;
use crate::space::Space;

use super::{ConstructionMeta, MapExpr, Node};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExprJson {
    Hopf,
    Rotation {
        matrix: Vec<Vec<f64>>,
    },
    DegreeWrap {
        dim: usize,
        degree: i64,
        axes: [usize; 2],
    },
    CubeCollapse {
        dim: usize,
    },
    Rescale {
        edges: Vec<f64>,
        factors: Vec<f64>,
    },
    Smash {
        dim_a: usize,
        dim_b: usize,
    },
    Suspend {
        inner: Box<ExprJson>,
    },
    Compose {
        outer: Box<ExprJson>,
        inner: Box<ExprJson>,
    },
    Product {
        left: Box<ExprJson>,
        right: Box<ExprJson>,
    },
    Constant {
        domain: Space,
        codomain: Space,
        value: Vec<f64>,
    },
    RectangleChart {
        m: usize,
        p: usize,
        eps: f64,
    },
    ChartExtend {
        m: usize,
        p: usize,
        eps: f64,
        inner: Box<ExprJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        meta: Option<ConstructionMeta>,
    },
}

impl MapExpr {
    pub fn to_json(&self) -> ExprJson {
        match &self.node {
            Node::Hopf => ExprJson::Hopf,
            Node::Rotation { matrix } => ExprJson::Rotation {
                matrix: (0..matrix.rows)
                    .map(|i| (0..matrix.cols).map(|j| matrix[(i, j)]).collect())
                    .collect(),
            },
            Node::DegreeWrap {
                dim,
                degree,
                axis_a,
                axis_b,
            } => ExprJson::DegreeWrap {
                dim: *dim,
                degree: *degree,
                axes: [*axis_a, *axis_b],
            },
            Node::CubeCollapse { dim } => ExprJson::CubeCollapse { dim: *dim },
            Node::Rescale { factors } => {
                let Space::Cube { edges } = &self.domain else {
                    unreachable!("rescale domain is a box")
                };
                ExprJson::Rescale {
                    edges: edges.clone(),
                    factors: factors.clone(),
                }
            }
            Node::Smash { dim_a, dim_b } => ExprJson::Smash {
                dim_a: *dim_a,
                dim_b: *dim_b,
            },
            Node::Suspend { inner } => ExprJson::Suspend {
                inner: Box::new(inner.to_json()),
            },
            Node::Compose { outer, inner } => ExprJson::Compose {
                outer: Box::new(outer.to_json()),
                inner: Box::new(inner.to_json()),
            },
            Node::Product { left, right } => ExprJson::Product {
                left: Box::new(left.to_json()),
                right: Box::new(right.to_json()),
            },
            Node::Constant { value } => ExprJson::Constant {
                domain: self.domain.clone(),
                codomain: self.codomain.clone(),
                value: value.clone(),
            },
            Node::RectangleChart { plan } => ExprJson::RectangleChart {
                m: plan.m,
                p: plan.p,
                eps: plan.eps,
            },
            Node::ChartExtend { plan, inner, meta } => ExprJson::ChartExtend {
                m: plan.m,
                p: plan.p,
                eps: plan.eps,
                inner: Box::new(inner.to_json()),
                meta: meta.clone(),
            },
        }
    }

    pub fn from_json(tree: &ExprJson) -> Result<MapExpr, MapError> {
        match tree {
            ExprJson::Hopf => Ok(MapExpr::hopf()),
            ExprJson::Rotation { matrix } => MapExpr::rotation(Mat::from_rows(matrix)),
            ExprJson::DegreeWrap { dim, degree, axes } => {
                MapExpr::degree_wrap(*dim, *degree, axes[0], axes[1])
            }
            ExprJson::CubeCollapse { dim } => MapExpr::cube_collapse(*dim),
            ExprJson::Rescale { edges, factors } => {
                MapExpr::rescale(edges.clone(), factors.clone())
            }
            ExprJson::Smash { dim_a, dim_b } => MapExpr::smash(*dim_a, *dim_b),
            ExprJson::Suspend { inner } => {
                MapExpr::suspend(Arc::new(MapExpr::from_json(inner)?))
            }
            ExprJson::Compose { outer, inner } => MapExpr::compose(
                Arc::new(MapExpr::from_json(outer)?),
                Arc::new(MapExpr::from_json(inner)?),
            ),
            ExprJson::Product { left, right } => MapExpr::product(
                Arc::new(MapExpr::from_json(left)?),
                Arc::new(MapExpr::from_json(right)?),
            ),
            ExprJson::Constant {
                domain,
                codomain,
                value,
            } => MapExpr::constant(domain.clone(), codomain.clone(), value.clone()),
            ExprJson::RectangleChart { m, p, eps } => MapExpr::rectangle_chart(*m, *p, *eps),
            ExprJson::ChartExtend {
                m,
                p,
                eps,
                inner,
                meta,
            } => MapExpr::chart_extend(
                *m,
                *p,
                *eps,
                Arc::new(MapExpr::from_json(inner)?),
                meta.clone(),
            ),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("expression trees serialize")
    }

    pub fn from_json_str(text: &str) -> Result<MapExpr, MapError> {
        let tree: ExprJson =
            serde_json::from_str(text).map_err(|e| MapError::Deserialize(e.to_string()))?;
        MapExpr::from_json(&tree)
    }
}
