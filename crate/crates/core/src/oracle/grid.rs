use std::fmt::Write as _;

use serde::Serialize;

use super::{OracleError, Result};
use crate::cross::CrossMatrix;
use crate::envelope::HExpr;
use crate::radial::RadialFactor;

/// Slack for comparisons of grid coordinates with cut values.
const EPS: f64 = 1e-10;

pub const MIN_POINTS: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl Axis {
    pub fn step(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n - 1) as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.step()
    }
}

/// Uniform lattice in `t = log ρ`, last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogGrid {
    pub axes: Vec<Axis>,
}

impl LogGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(OracleError::Grid("no axes".into()));
        }
        for a in &axes {
            if a.n < MIN_POINTS || !(a.t_min < a.t_max) {
                return Err(OracleError::Grid(format!(
                    "axis needs at least {MIN_POINTS} points and t_min < t_max, got {a:?}"
                )));
            }
        }
        Ok(Self { axes })
    }

    /// `t_j ∈ [log r_j − (log R_j − log r_j), log R_j]`; an odd point count
    /// puts `log r_j` on the grid.
    pub fn for_factors(factors: &[RadialFactor], n_pts: &[usize]) -> Result<Self> {
        if factors.len() != n_pts.len() {
            return Err(OracleError::Grid(format!(
                "{} factors but {} axis sizes",
                factors.len(),
                n_pts.len()
            )));
        }
        Self::new(
            factors
                .iter()
                .zip(n_pts)
                .map(|(f, &n)| Axis {
                    t_min: 2.0 * f.log_r() - f.log_big_r(),
                    t_max: f.log_big_r(),
                    n,
                })
                .collect(),
        )
    }

    /// Puts `log r_j` exactly `below` cells above `t_min`, so the step is
    /// `(log R_j − log r_j) / (n − 1 − below)`.
    pub fn with_margin(factors: &[RadialFactor], n_pts: &[usize], below: usize) -> Result<Self> {
        if factors.len() != n_pts.len() {
            return Err(OracleError::Grid(format!(
                "{} factors but {} axis sizes",
                factors.len(),
                n_pts.len()
            )));
        }
        let mut axes = Vec::with_capacity(factors.len());
        for (f, &n) in factors.iter().zip(n_pts) {
            if below == 0 || below + 2 > n {
                return Err(OracleError::Grid(format!(
                    "margin of {below} cells does not fit {n} points"
                )));
            }
            let step = (f.log_big_r() - f.log_r()) / (n - 1 - below) as f64;
            axes.push(Axis {
                t_min: f.log_r() - below as f64 * step,
                t_max: f.log_big_r(),
                n,
            });
        }
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for j in (0..self.dim().saturating_sub(1)).rev() {
            s[j] = s[j + 1] * self.axes[j + 1].n;
        }
        s
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            c[j] = idx % self.axes[j].n;
            idx /= self.axes[j].n;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&c, a)| acc * a.n + c)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.coords(idx)
            .iter()
            .zip(&self.axes)
            .map(|(&c, a)| a.t(c))
            .collect()
    }
}

/// Sets in log-radius coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    /// `t_j ≤ cut_j` for all `j`.
    ALowerSet { cuts: Vec<f64> },
    /// Union over rows `α` of `{t_j ≤ cut_j whenever α_j = 0}`.
    CrossRegion { matrix: CrossMatrix, cuts: Vec<f64> },
    /// `expr(h(t)) < level` with `h_j` the ball extremal function.
    DomainSublevel { expr: HExpr, level: f64 },
}

impl RegionSpec {
    pub fn a_product(factors: &[RadialFactor]) -> Self {
        RegionSpec::ALowerSet {
            cuts: factors.iter().map(RadialFactor::log_r).collect(),
        }
    }

    pub fn cross(matrix: CrossMatrix, factors: &[RadialFactor]) -> Self {
        RegionSpec::CrossRegion {
            matrix,
            cuts: factors.iter().map(RadialFactor::log_r).collect(),
        }
    }

    pub fn sublevel(expr: HExpr) -> Self {
        RegionSpec::DomainSublevel { expr, level: 1.0 }
    }

    pub fn dim_ok(&self, n: usize) -> bool {
        match self {
            RegionSpec::ALowerSet { cuts } => cuts.len() == n,
            RegionSpec::CrossRegion { matrix, cuts } => matrix.n_factors() == n && cuts.len() == n,
            RegionSpec::DomainSublevel { expr, .. } => expr.arity() <= n,
        }
    }

    pub fn contains(&self, t: &[f64], factors: &[RadialFactor]) -> bool {
        match self {
            RegionSpec::ALowerSet { cuts } => t.iter().zip(cuts).all(|(x, c)| *x <= c + EPS),
            RegionSpec::CrossRegion { matrix, cuts } => matrix.rows().iter().any(|row| {
                row.bits()
                    .iter()
                    .zip(t.iter().zip(cuts))
                    .all(|(&d, (x, c))| d || *x <= c + EPS)
            }),
            RegionSpec::DomainSublevel { expr, level } => {
                let h: Vec<f64> = t.iter().zip(factors).map(|(x, f)| f.h_of_log(*x)).collect();
                expr.eval_f64(&h) < *level
            }
        }
    }
}

/// A domain inside `D_1 × … × D_N` in continuous coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub region: RegionSpec,
    pub factors: Vec<RadialFactor>,
    /// Where the obstacle vanishes; edge points in its closure get value 0.
    pub zero_set: Option<RegionSpec>,
}

impl Boundary {
    pub fn contains(&self, t: &[f64]) -> bool {
        t.iter().zip(&self.factors).all(|(x, f)| *x < f.log_big_r())
            && self.region.contains(t, &self.factors)
    }

    /// Value of the obstacle at a point on or beyond the edge.
    pub fn edge_value(&self, t: &[f64]) -> f64 {
        match &self.zero_set {
            Some(z) if z.contains(t, &self.factors) => 0.0,
            _ => 1.0,
        }
    }
}

/// Values on a [`LogGrid`] with a domain mask. When `boundary` is set the
/// solver places the domain edge at its exact position between grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    pub grid: LogGrid,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub boundary: Option<Boundary>,
}

impl GridFn {
    pub fn new(grid: LogGrid, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if values.len() != grid.len() || mask.len() != grid.len() {
            return Err(OracleError::Grid(
                "values and mask must match the grid".into(),
            ));
        }
        Ok(Self {
            grid,
            values,
            mask,
            boundary: None,
        })
    }

    /// `f(t)` at every grid point, mask from the boundary.
    pub fn from_fn(grid: LogGrid, boundary: Boundary, f: impl Fn(&[f64]) -> f64) -> Self {
        let pts: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
        let mask = pts.iter().map(|t| boundary.contains(t)).collect();
        let values = pts.iter().map(|t| f(t)).collect();
        Self {
            grid,
            values,
            mask,
            boundary: Some(boundary),
        }
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Masked points whose whole Chebyshev neighbourhood of radius `r`
    /// is masked; neighbours below the lower grid edge do not count.
    pub fn interior(&self, r: usize) -> Vec<bool> {
        let shape = self.grid.shape();
        let n = shape.len();
        let offsets: Vec<Vec<i64>> = (0..(2 * r as i64 + 1).pow(n as u32))
            .map(|mut k| {
                (0..n)
                    .map(|_| {
                        let o = k % (2 * r as i64 + 1) - r as i64;
                        k /= 2 * r as i64 + 1;
                        o
                    })
                    .collect()
            })
            .collect();
        (0..self.grid.len())
            .map(|i| {
                if !self.mask[i] {
                    return false;
                }
                let c = self.grid.coords(i);
                offsets.iter().all(|off| {
                    let mut nb = Vec::with_capacity(n);
                    for j in 0..n {
                        let x = c[j] as i64 + off[j];
                        if x < 0 {
                            return true;
                        }
                        if x >= shape[j] as i64 {
                            return false;
                        }
                        nb.push(x as usize);
                    }
                    self.mask[self.grid.index(&nb)]
                })
            })
            .collect()
    }

    /// CSV with columns `t_1..t_N,value,mask`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 1..=self.grid.dim() {
            let _ = write!(out, "t_{j},");
        }
        out.push_str("value,mask\n");
        for i in 0..self.grid.len() {
            for t in self.grid.point(i) {
                let _ = write!(out, "{t:.12},");
            }
            let _ = writeln!(out, "{:.12},{}", self.values[i], u8::from(self.mask[i]));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball() -> RadialFactor {
        RadialFactor::new(0.5, 1.0, 1).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = LogGrid::for_factors(&[ball(), ball()], &[17, 33]).unwrap();
        assert_eq!(g.len(), 17 * 33);
        assert_eq!(g.strides(), vec![33, 1]);
        assert_eq!(g.coords(g.index(&[3, 7])), vec![3, 7]);
        // log r sits in the middle of an odd axis
        assert!((g.axes[0].t(8) - 0.5f64.ln()).abs() < 1e-12);
        assert!((g.axes[1].t(32) - 0.0).abs() < 1e-12);
        assert!(LogGrid::for_factors(&[ball()], &[9]).is_err());
    }

    #[test]
    fn regions() {
        let f = [ball(), ball()];
        let lr = 0.5f64.ln();
        let a = RegionSpec::a_product(&f);
        assert!(a.contains(&[lr, lr - 1.0], &f));
        assert!(!a.contains(&[lr + 0.01, lr], &f));
        let c = RegionSpec::cross(CrossMatrix::from_strs(&["01"]).unwrap(), &f);
        assert!(c.contains(&[lr, -0.01], &f));
        assert!(!c.contains(&[lr + 0.1, lr], &f));
        let d = RegionSpec::sublevel(HExpr::parse("sum(h1,h2)").unwrap());
        let b = Boundary {
            region: d,
            factors: f.to_vec(),
            zero_set: None,
        };
        assert!(b.contains(&[lr, -0.01]));
        assert!(!b.contains(&[lr / 2.0, lr / 2.0]));
        assert!(!b.contains(&[lr, 0.0]));
    }

    #[test]
    fn interior_excludes_boundary_band() {
        let f = vec![ball(), ball()];
        let g = LogGrid::for_factors(&f, &[17, 17]).unwrap();
        let b = Boundary {
            region: RegionSpec::sublevel(HExpr::zero()),
            factors: f,
            zero_set: None,
        };
        let gf = GridFn::from_fn(g, b, |_| 0.0);
        // the last column is t = log R, outside; two more columns are excluded
        let inner = gf.interior(2);
        assert_eq!(gf.masked_count(), 16 * 16);
        assert_eq!(inner.iter().filter(|&&x| x).count(), 14 * 14);
        let csv = gf.to_csv();
        assert!(csv.starts_with("t_1,t_2,value,mask\n"));
        assert_eq!(csv.lines().count(), 17 * 17 + 1);
    }
}
