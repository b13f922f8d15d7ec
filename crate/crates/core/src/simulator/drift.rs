use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

/// Potential `f` whose stationary density is proportional to `exp(-f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Potential {
    Flat,
    /// `f(x) = scale * |x - center|^2`
    Quadratic { center: Point2, scale: f64 },
}

impl Potential {
    /// `f(x, y) = x^2 + y^2`, the potential of the study case.
    pub fn study() -> Self {
        Potential::Quadratic {
            center: Point2::ORIGIN,
            scale: 1.0,
        }
    }

    pub fn value(&self, p: Point2) -> f64 {
        match self {
            Potential::Flat => 0.0,
            Potential::Quadratic { center, scale } => scale * p.dist_sq(*center),
        }
    }

    pub fn gradient(&self, p: Point2) -> Point2 {
        match self {
            Potential::Flat => Point2::ORIGIN,
            Potential::Quadratic { center, scale } => (p - *center) * (2.0 * scale),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Potential::Flat => "flat".into(),
            Potential::Quadratic { center, scale } => {
                format!("quadratic(scale={scale},center={},{})", center.x, center.y)
            }
        }
    }
}

/// Drift field `nu` of the reflected diffusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Drift {
    Zero,
    /// `nu(x) = -rate * x`
    Linear { rate: f64 },
    /// `nu(x) = -grad f(x) / 2`
    Gradient { potential: Potential },
}

impl Drift {
    pub fn at(&self, p: Point2) -> Point2 {
        match self {
            Drift::Zero => Point2::ORIGIN,
            Drift::Linear { rate } => p * -rate,
            Drift::Gradient { potential } => potential.gradient(p) * -0.5,
        }
    }

    /// The potential generating this drift, when there is one.
    pub fn potential(&self) -> Option<Potential> {
        match self {
            Drift::Zero => Some(Potential::Flat),
            Drift::Linear { rate } => Some(Potential::Quadratic {
                center: Point2::ORIGIN,
                scale: *rate,
            }),
            Drift::Gradient { potential } => Some(potential.clone()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Drift::Zero => "zero".into(),
            Drift::Linear { rate } => format!("linear(rate={rate})"),
            Drift::Gradient { potential } => format!("gradient({})", potential.name()),
        }
    }
}

impl Default for Drift {
    fn default() -> Self {
        Drift::Gradient {
            potential: Potential::study(),
        }
    }
}
