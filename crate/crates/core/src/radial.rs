//! Concentric ball models: `A_j` the closed ball of radius `r`, `D_j` the
//! open ball of radius `R`, with `h*_{A_j,D_j}(z) = max{0, log(‖z‖/r) / log(R/r)}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envelope::HExpr;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadialError {
    #[error("invalid factor: need 0 < r < R, got r = {r}, R = {big_r}")]
    InvalidFactor { r: f64, big_r: f64 },
    #[error("a model needs at least 2 factors, got {0}")]
    TooFewFactors(usize),
    #[error("radius {rho} for factor {index} is outside the open ball of radius {big_r}")]
    Outside { index: usize, rho: f64, big_r: f64 },
    #[error("expected {expected} radii, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, RadialError>;

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialFactor {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(default = "one")]
    pub dim: u32,
}

impl RadialFactor {
    pub fn new(r: f64, big_r: f64, dim: u32) -> Result<Self> {
        let f = Self { r, big_r, dim };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.big_r.is_finite() && 0.0 < self.r && self.r < self.big_r)
            || self.dim == 0
        {
            return Err(RadialError::InvalidFactor {
                r: self.r,
                big_r: self.big_r,
            });
        }
        Ok(())
    }

    pub fn log_r(&self) -> f64 {
        self.r.ln()
    }

    pub fn log_big_r(&self) -> f64 {
        self.big_r.ln()
    }

    /// `h` as a function of `t = log ρ`, without the domain check.
    pub fn h_of_log(&self, t: f64) -> f64 {
        ((t - self.log_r()) / (self.log_big_r() - self.log_r())).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialModel {
    pub factors: Vec<RadialFactor>,
}

impl RadialModel {
    pub fn new(factors: Vec<RadialFactor>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(RadialError::TooFewFactors(factors.len()));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(Self { factors })
    }

    /// `n` copies of the same factor.
    pub fn uniform(n: usize, r: f64, big_r: f64) -> Result<Self> {
        Self::new(vec![RadialFactor::new(r, big_r, 1)?; n])
    }

    /// Reads `{"factors": [{"r": .., "R": .., "dim": ..}, ..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let m: RadialModel =
            serde_json::from_str(text).map_err(|e| RadialError::Parse(e.to_string()))?;
        Self::new(m.factors)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

pub fn h_disc(rho: f64, f: &RadialFactor) -> Result<f64> {
    if !(0.0..f.big_r).contains(&rho) {
        return Err(RadialError::Outside {
            index: 0,
            rho,
            big_r: f.big_r,
        });
    }
    if rho <= f.r {
        return Ok(0.0);
    }
    Ok((rho / f.r).ln() / (f.big_r / f.r).ln())
}

pub fn h_vector(m: &RadialModel, radii: &[f64]) -> Result<Vec<f64>> {
    if radii.len() != m.len() {
        return Err(RadialError::Dimension {
            expected: m.len(),
            found: radii.len(),
        });
    }
    radii
        .iter()
        .zip(&m.factors)
        .enumerate()
        .map(|(index, (&rho, f))| {
            h_disc(rho, f).map_err(|_| RadialError::Outside {
                index,
                rho,
                big_r: f.big_r,
            })
        })
        .collect()
}

/// Whether the point with the given radii lies in `{expr < 1}`.
pub fn membership(m: &RadialModel, radii: &[f64], expr: &HExpr) -> Result<bool> {
    let h = h_vector(m, radii)?;
    if expr.arity() > h.len() {
        return Err(RadialError::Dimension {
            expected: expr.arity(),
            found: h.len(),
        });
    }
    Ok(expr.eval_f64(&h) < 1.0)
}

/// CSV rows `rho_1,…,rho_N`; blank lines and `#` comments are skipped.
pub fn parse_radii_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            l.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| RadialError::Parse(format!("line {}: {e}", i + 1)))
                })
                .collect()
        })
        .collect()
}
