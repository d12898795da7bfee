//! JSON scenario configuration.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use collarext::geometry::{Ball, Point};
use collarext::primitives::MapRecipePiece;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallSpec {
    pub fn to_ball(&self, dim: usize) -> Result<Ball, String> {
        if self.center.len() != dim {
            return Err(format!(
                "ball center has {} coordinates, dimension is {dim}",
                self.center.len()
            ));
        }
        Ball::new(DVector::from_column_slice(&self.center), self.radius)
            .map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallPairSpec {
    pub inner: BallSpec,
    pub outer: BallSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlabLevels {
    pub low: f64,
    pub high: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0u32;
        loop {
            let a = self.start + self.step * k as f64;
            if a > self.stop + 1e-12 {
                break;
            }
            out.push((a * 1e12).round() / 1e12);
            k += 1;
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Budgets {
    pub samples: usize,
    pub levels: u32,
    pub pairs: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            samples: 1000,
            levels: 5,
            pairs: 800,
        }
    }
}

/// One scenario file drives every subcommand; each subcommand validates the
/// sections it needs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub dimension: usize,
    pub seed: u64,
    /// Integrability exponent p (collar pipelines, verify-map).
    #[serde(default)]
    pub exponent: Option<f64>,
    /// Override for the inversion exponent a.
    #[serde(default)]
    pub inversion_exponent: Option<f64>,
    /// Image-side balls (collar, punctured, sweep).
    #[serde(default)]
    pub image_balls: Option<BallPairSpec>,
    /// Domain-side round Jordan domains (collar).
    #[serde(default)]
    pub domain_balls: Option<BallPairSpec>,
    /// Domain holes (identity and punctured cases).
    #[serde(default)]
    pub holes: Option<BallPairSpec>,
    /// Input-map recipe (identity/punctured g, verify-map target, twist phi).
    #[serde(default)]
    pub map_recipe: Option<Vec<MapRecipePiece>>,
    /// Slab levels separating the image holes (identity case).
    #[serde(default)]
    pub slab: Option<SlabLevels>,
    /// Exponent sweep (sweep-slab).
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    /// Region of interest for verify-map (a ball).
    #[serde(default)]
    pub region: Option<BallSpec>,
    #[serde(default)]
    pub budgets: Option<Budgets>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(2..=8).contains(&self.dimension) {
            return Err(format!(
                "dimension must be between 2 and 8, got {}",
                self.dimension
            ));
        }
        if let Some(p) = self.exponent {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(format!("exponent must satisfy p >= 1, got {p}"));
            }
        }
        if let Some(a) = self.inversion_exponent {
            if !(a > 0.0 && a.is_finite()) {
                return Err(format!("inversion exponent must be positive, got {a}"));
            }
        }
        Ok(())
    }

    pub fn budgets(&self) -> Budgets {
        self.budgets.clone().unwrap_or_default()
    }

    pub fn map(&self) -> Result<collarext::map::SmoothMap, String> {
        let recipe = self.map_recipe.clone().unwrap_or_default();
        collarext::primitives::make_test_diffeo(self.dimension, &recipe).map_err(|e| e.to_string())
    }

    pub fn require_exponent(&self) -> Result<f64, String> {
        self.exponent
            .ok_or_else(|| "config is missing `exponent`".to_string())
    }
}

pub fn origin(dim: usize) -> Point {
    DVector::zeros(dim)
}
