//! Largest grid function below an obstacle that is convex along axes and
//! two- and three-axis diagonals and nondecreasing along axes.
//!
//! Each constraint family lives on lines of the lattice, so one relaxation
//! step replaces a masked run of a line by its lower convex hull (plus a
//! suffix minimum on axis lines). Where a line leaves the domain a ghost node
//! carries the edge value: 0 in the closure of the zero set, 1 elsewhere.

use serde::Serialize;

use super::grid::{Boundary, GridFn, LogGrid};
use super::{OracleError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveStats {
    pub sweeps: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub function: GridFn,
    pub stats: SolveStats,
}

#[derive(Debug, Clone)]
struct Run {
    idx: Vec<usize>,
    /// Position and value of an edge node before the first point.
    ghost_lo: Option<(f64, f64)>,
    /// Position and value of an edge node after the last point.
    ghost_hi: Option<(f64, f64)>,
    axis: bool,
}

/// Axes (flagged) and every `{-1, 0, 1}` vector with two or three nonzero
/// entries, first nonzero entry positive.
fn directions(n: usize) -> Vec<(Vec<i64>, bool)> {
    let mut out = Vec::new();
    for i in 0..n {
        let mut d = vec![0; n];
        d[i] = 1;
        out.push((d, true));
    }
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let d: Vec<i64> = (0..n)
            .map(|_| {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                v
            })
            .collect();
        let nz = d.iter().filter(|&&x| x != 0).count();
        if (2..=3).contains(&nz) && d.iter().find(|&&x| x != 0) == Some(&1) {
            out.push((d, false));
        }
    }
    out
}

enum Outside {
    Inside(usize),
    /// Beyond the upper edge of some axis, i.e. past `log R`.
    Upper,
    /// Only beyond lower edges: the truncated `-∞` end, left free.
    Lower,
}

fn step_point(grid: &LogGrid, c: &[usize], d: &[i64], sign: i64) -> Outside {
    let mut upper = false;
    let mut lower = false;
    let mut nc = Vec::with_capacity(c.len());
    for j in 0..c.len() {
        let x = c[j] as i64 + sign * d[j];
        if x >= grid.axes[j].n as i64 {
            upper = true;
        } else if x < 0 {
            lower = true;
        }
        nc.push(x.max(0) as usize);
    }
    if upper {
        Outside::Upper
    } else if lower {
        Outside::Lower
    } else {
        Outside::Inside(grid.index(&nc))
    }
}

/// Fraction `σ ∈ (0, 1]` of a lattice step from `from` along `sign·d` at
/// which the domain is left, and the edge value there.
fn crossing(
    grid: &LogGrid,
    boundary: Option<&Boundary>,
    from: usize,
    d: &[i64],
    sign: i64,
) -> (f64, f64) {
    let Some(b) = boundary else {
        return (1.0, 1.0);
    };
    let t0 = grid.point(from);
    let dt: Vec<f64> = d
        .iter()
        .zip(&grid.axes)
        .map(|(&k, a)| sign as f64 * k as f64 * a.step())
        .collect();
    let at = |s: f64| -> Vec<f64> { t0.iter().zip(&dt).map(|(t, v)| t + s * v).collect() };
    if b.contains(&at(1.0)) {
        return (1.0, b.edge_value(&at(1.0)));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if b.contains(&at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (hi, b.edge_value(&at(hi)))
}

fn build_runs(f: &GridFn) -> Vec<Run> {
    let grid = &f.grid;
    let b = f.boundary.as_ref();
    let mut runs = Vec::new();
    for (d, axis) in directions(grid.dim()) {
        for start in 0..grid.len() {
            let c = grid.coords(start);
            if matches!(step_point(grid, &c, &d, -1), Outside::Inside(_)) {
                continue;
            }
            let mut line = vec![start];
            let mut cur = c;
            while let Outside::Inside(next) = step_point(grid, &cur, &d, 1) {
                line.push(next);
                cur = grid.coords(next);
            }
            let mut k = 0;
            while k < line.len() {
                if !f.mask[line[k]] {
                    k += 1;
                    continue;
                }
                let first = k;
                while k < line.len() && f.mask[line[k]] {
                    k += 1;
                }
                let idx: Vec<usize> = line[first..k].to_vec();
                let before = step_point(grid, &grid.coords(idx[0]), &d, -1);
                let after = step_point(grid, &grid.coords(*idx.last().unwrap()), &d, 1);
                let ghost_lo = match before {
                    Outside::Lower => None,
                    _ => {
                        let (s, v) = crossing(grid, b, idx[0], &d, -1);
                        Some((-s, v))
                    }
                };
                let ghost_hi = match after {
                    Outside::Lower => None,
                    _ => {
                        let (s, v) = crossing(grid, b, *idx.last().unwrap(), &d, 1);
                        Some(((idx.len() - 1) as f64 + s, v))
                    }
                };
                runs.push(Run {
                    idx,
                    ghost_lo,
                    ghost_hi,
                    axis,
                });
            }
        }
    }
    runs
}

/// Projects one run; returns the largest decrease.
fn relax(run: &Run, u: &mut [f64], pts: &mut Vec<(f64, f64)>, hull: &mut Vec<(f64, f64)>) -> f64 {
    pts.clear();
    if let Some(g) = run.ghost_lo {
        pts.push(g);
    }
    pts.extend(run.idx.iter().enumerate().map(|(s, &i)| (s as f64, u[i])));
    if let Some(g) = run.ghost_hi {
        pts.push(g);
    }
    hull.clear();
    for &p in pts.iter() {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut worst: f64 = 0.0;
    let mut seg = 0;
    for (s, &i) in run.idx.iter().enumerate() {
        let x = s as f64;
        while seg + 2 < hull.len() && hull[seg + 1].0 <= x {
            seg += 1;
        }
        let (p, q) = (hull[seg], hull[(seg + 1).min(hull.len() - 1)]);
        let h = if q.0 > p.0 {
            p.1 + (q.1 - p.1) * (x - p.0) / (q.0 - p.0)
        } else {
            p.1
        };
        if h < u[i] {
            worst = worst.max(u[i] - h);
            u[i] = h;
        }
    }
    if run.axis {
        for s in (0..run.idx.len().saturating_sub(1)).rev() {
            let (a, b) = (run.idx[s], run.idx[s + 1]);
            if u[b] < u[a] {
                worst = worst.max(u[a] - u[b]);
                u[a] = u[b];
            }
        }
    }
    worst
}

/// Solves the obstacle problem by repeated line projections, sweeping the
/// runs forward then backward, until the largest update is below `tol`.
pub fn convex_monotone_envelope(obstacle: &GridFn, tol: f64, max_sweeps: usize) -> Result<Solved> {
    if obstacle.masked_count() == 0 {
        return Err(OracleError::Degenerate("empty mask".into()));
    }
    if obstacle
        .values
        .iter()
        .zip(&obstacle.mask)
        .any(|(v, &m)| m && !(0.0..=1.0).contains(v))
    {
        return Err(OracleError::Degenerate(
            "obstacle values must lie in [0,1]".into(),
        ));
    }
    let runs = build_runs(obstacle);
    let mut u = obstacle.values.clone();
    let (mut pts, mut hull) = (Vec::new(), Vec::new());
    let mut residual = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        residual = 0.0;
        for r in runs.iter().chain(runs.iter().rev()) {
            residual = residual.max(relax(r, &mut u, &mut pts, &mut hull));
        }
        if residual < tol {
            return Ok(Solved {
                function: GridFn {
                    values: u,
                    ..obstacle.clone()
                },
                stats: SolveStats {
                    sweeps: sweep,
                    residual,
                },
            });
        }
    }
    Err(OracleError::Convergence {
        sweeps: max_sweeps,
        residual,
    })
}

/// Smallest slack of the discrete constraints on masked points:
/// `½(u(x−d)+u(x+d)) − u(x)` along every direction and `u(x+e_j) − u(x)`,
/// with missing neighbours on the domain side read as 1.
pub fn constraint_slack(f: &GridFn) -> f64 {
    let grid = &f.grid;
    let mut worst = f64::INFINITY;
    let val = |o: Outside| -> Option<f64> {
        match o {
            Outside::Inside(i) if f.mask[i] => Some(f.values[i]),
            Outside::Inside(_) | Outside::Upper => Some(1.0),
            Outside::Lower => None,
        }
    };
    for i in (0..grid.len()).filter(|&i| f.mask[i]) {
        let c = grid.coords(i);
        for (d, axis) in directions(grid.dim()) {
            let prev = step_point(grid, &c, &d, -1);
            let next = step_point(grid, &c, &d, 1);
            // convexity is only imposed between two masked neighbours
            if let (Outside::Inside(p), Outside::Inside(q)) = (&prev, &next) {
                if f.mask[*p] && f.mask[*q] {
                    worst = worst.min(0.5 * (f.values[*p] + f.values[*q]) - f.values[i]);
                }
            }
            if axis {
                if let Some(v) = val(next) {
                    worst = worst.min(v - f.values[i]);
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::HExpr;
    use crate::oracle::grid::RegionSpec;
    use crate::radial::RadialFactor;

    fn disc_problem(n: usize) -> GridFn {
        let f = RadialFactor::new(0.5, 1.0, 1).unwrap();
        let grid = LogGrid::for_factors(&[f], &[n]).unwrap();
        let b = Boundary {
            region: RegionSpec::sublevel(HExpr::zero()),
            factors: vec![f],
            zero_set: None,
        };
        let lr = f.log_r();
        GridFn::from_fn(grid, b, |t| if t[0] <= lr + 1e-12 { 0.0 } else { 1.0 })
    }

    #[test]
    fn disc_ramp() {
        let ob = disc_problem(65);
        let s = convex_monotone_envelope(&ob, 1e-12, 1000).unwrap();
        let f = RadialFactor::new(0.5, 1.0, 1).unwrap();
        for i in 0..64 {
            let t = s.function.grid.point(i)[0];
            assert!((s.function.values[i] - f.h_of_log(t)).abs() < 1e-9, "{i}");
        }
    }

    #[test]
    fn fixed_point_is_unchanged() {
        let ob = disc_problem(33);
        let s = convex_monotone_envelope(&ob, 1e-12, 1000).unwrap();
        let again = convex_monotone_envelope(&s.function, 1e-12, 1000).unwrap();
        assert_eq!(again.stats.sweeps, 1);
        assert!(again.stats.residual < 1e-12);
        assert!(constraint_slack(&again.function) > -1e-9);
    }

    #[test]
    fn non_convergence_is_reported() {
        let ob = disc_problem(33);
        match convex_monotone_envelope(&ob, 0.0, 1) {
            Err(OracleError::Convergence {
                sweeps: 1,
                residual,
            }) => assert!(residual > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
