use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::grid::{Boundary, GridFn, LogGrid, RegionSpec};
use super::solver::{convex_monotone_envelope, Solved};
use super::{OracleError, Result};
use crate::cross::{BranchSet, CrossMatrix};
use crate::envelope::rules::polyhedral_local;
use crate::envelope::{
    nk_envelope, rule_claim_q6, rule_claim_q7, rule_env_in_env, rule_prop_center, HExpr,
};
use crate::radial::RadialFactor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Profile {
    Smoke,
    Desk,
    Deep,
}

impl Profile {
    /// Points per axis for a problem of the given dimension.
    pub fn points(self, dim: usize) -> usize {
        let desk = match dim {
            1 => 513,
            2 => 129,
            _ => 65,
        };
        match self {
            Profile::Smoke => 33,
            Profile::Desk => desk,
            Profile::Deep => 2 * (desk - 1) + 1,
        }
    }

    pub fn params(self, dim: usize) -> GridParams {
        GridParams {
            points: self.points(dim),
            ..GridParams::default()
        }
    }
}

impl FromStr for Profile {
    type Err = OracleError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Profile::Smoke),
            "desk" => Ok(Profile::Desk),
            "deep" => Ok(Profile::Deep),
            _ => Err(OracleError::Case(format!("unknown profile {s:?}"))),
        }
    }
}

pub const DEFAULT_MARGIN_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridParams {
    pub points: usize,
    pub tol: f64,
    pub max_sweeps: usize,
    /// Cells below `log r`; `None` mirrors the span above it.
    pub margin_cells: Option<usize>,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            points: 65,
            tol: 1e-7,
            max_sweeps: 200_000,
            margin_cells: Some(DEFAULT_MARGIN_CELLS),
        }
    }
}

/// The obstacle: 0 on `a_region`, 1 elsewhere, masked by `domain`.
pub fn build_obstacle(
    factors: &[RadialFactor],
    a_region: &RegionSpec,
    domain: &RegionSpec,
    params: &GridParams,
) -> Result<GridFn> {
    let n = factors.len();
    if !a_region.dim_ok(n) || !domain.dim_ok(n) {
        return Err(OracleError::Dimension(n));
    }
    let grid = match params.margin_cells {
        None => LogGrid::for_factors(factors, &vec![params.points; n])?,
        Some(c) => LogGrid::with_margin(factors, &vec![params.points; n], c)?,
    };
    let boundary = Boundary {
        region: domain.clone(),
        factors: factors.to_vec(),
        zero_set: Some(a_region.clone()),
    };
    let ob = GridFn::from_fn(grid, boundary, |t| {
        if a_region.contains(t, factors) {
            0.0
        } else {
            1.0
        }
    });
    if !ob.values.iter().zip(&ob.mask).any(|(v, &m)| m && *v == 0.0) {
        return Err(OracleError::Degenerate(
            "no grid point of the set lies in the domain".into(),
        ));
    }
    Ok(ob)
}

pub fn compute_h_star(
    factors: &[RadialFactor],
    a_region: &RegionSpec,
    domain: &RegionSpec,
    params: &GridParams,
) -> Result<Solved> {
    let ob = build_obstacle(factors, a_region, domain, params)?;
    convex_monotone_envelope(&ob, params.tol, params.max_sweeps)
}

/// Identities checked against the grid solver.
#[derive(Debug, Clone, PartialEq)]
pub enum IdentityCase {
    DiscFormula,
    PropCenter {
        n: usize,
        k: usize,
    },
    EnvInEnv {
        n: usize,
        k: usize,
        l: usize,
    },
    ClaimQ6,
    ClaimQ7,
    /// A derived inner rule: `h*` of `branches` inside `{domain < 1}`,
    /// right side from the polyhedral rule.
    Derived {
        label: String,
        branches: BranchSet,
        domain: HExpr,
    },
}

impl IdentityCase {
    pub fn dim(&self) -> usize {
        match self {
            IdentityCase::DiscFormula => 1,
            IdentityCase::PropCenter { n, .. } | IdentityCase::EnvInEnv { n, .. } => *n,
            IdentityCase::ClaimQ6 => 2,
            IdentityCase::ClaimQ7 => 3,
            IdentityCase::Derived { branches, .. } => branches.n_factors,
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self.dim() {
            1 => 5e-3,
            2 => 2e-2,
            _ => 3e-2,
        }
    }

    /// The identities with closed forms, followed by two derived inner rules.
    pub fn catalog() -> Vec<IdentityCase> {
        let mut out = vec![
            IdentityCase::DiscFormula,
            IdentityCase::PropCenter { n: 2, k: 1 },
            IdentityCase::PropCenter { n: 2, k: 2 },
            IdentityCase::PropCenter { n: 3, k: 2 },
            IdentityCase::EnvInEnv { n: 2, k: 1, l: 2 },
            IdentityCase::EnvInEnv { n: 3, k: 1, l: 2 },
            IdentityCase::EnvInEnv { n: 3, k: 2, l: 3 },
            IdentityCase::ClaimQ6,
            IdentityCase::ClaimQ7,
        ];
        out.extend(Self::derived());
        out
    }

    pub fn derived() -> Vec<IdentityCase> {
        vec![
            IdentityCase::Derived {
                label: "TWO_BRANCHES_IN_X32".into(),
                branches: BranchSet::new(
                    3,
                    vec![vec![false, false, true], vec![false, true, false]],
                ),
                domain: HExpr::parse("scale(1/2,sum(h1,h2,h3))").expect("literal"),
            },
            IdentityCase::Derived {
                label: "BRANCH_PAIR_IN_X21".into(),
                branches: BranchSet::new(2, vec![vec![false, true], vec![true, false]]),
                domain: HExpr::parse("max(h1,h2,scale(2/3,sum(h1,h2)))").expect("literal"),
            },
        ]
    }

    /// The set, the domain and the closed-form right side.
    pub fn problem(&self, factors: &[RadialFactor]) -> Result<(RegionSpec, RegionSpec, HExpr)> {
        let cross = |rows: &[&str]| -> Result<RegionSpec> {
            let m = CrossMatrix::from_strs(rows).map_err(|e| OracleError::Case(e.to_string()))?;
            Ok(RegionSpec::cross(m, factors))
        };
        let ex = |e: std::result::Result<HExpr, crate::envelope::ExprError>| {
            e.map_err(|e| OracleError::Case(e.to_string()))
        };
        Ok(match self {
            IdentityCase::DiscFormula => (
                RegionSpec::a_product(factors),
                RegionSpec::sublevel(HExpr::zero()),
                HExpr::Var(0),
            ),
            IdentityCase::PropCenter { n, k } => (
                RegionSpec::a_product(factors),
                RegionSpec::sublevel(ex(nk_envelope(*n, *k))?),
                ex(rule_prop_center(&(0..*n).collect::<Vec<_>>(), &[], *k))?,
            ),
            IdentityCase::EnvInEnv { n, k, l } => {
                let m =
                    CrossMatrix::nk_cross(*n, *k).map_err(|e| OracleError::Case(e.to_string()))?;
                (
                    RegionSpec::cross(m, factors),
                    RegionSpec::sublevel(ex(nk_envelope(*n, *l))?),
                    ex(rule_env_in_env(*n, *k, *l))?,
                )
            }
            IdentityCase::ClaimQ6 => (
                cross(&["01"])?,
                RegionSpec::sublevel(ex(nk_envelope(2, 1))?),
                ex(rule_claim_q6(0, 1))?,
            ),
            IdentityCase::ClaimQ7 => (
                cross(&["001"])?,
                RegionSpec::sublevel(ex(nk_envelope(3, 2))?),
                ex(rule_claim_q7(0, 1, 2))?,
            ),
            IdentityCase::Derived {
                branches, domain, ..
            } => {
                let n = branches.n_factors;
                let a = if branches.rows.iter().any(|r| r.iter().all(|&b| !b)) {
                    RegionSpec::a_product(factors)
                } else {
                    let m = CrossMatrix::from_bit_rows(branches.rows.clone())
                        .map_err(|e| OracleError::Case(e.to_string()))?;
                    RegionSpec::cross(m, factors)
                };
                let right = polyhedral_local(branches, &domain.affine_forms(n));
                (a, RegionSpec::sublevel(domain.clone()), right)
            }
        })
    }
}

impl fmt::Display for IdentityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityCase::DiscFormula => write!(f, "DISC_FORMULA"),
            IdentityCase::PropCenter { n, k } => write!(f, "PROP_CENTER({n},{k})"),
            IdentityCase::EnvInEnv { n, k, l } => write!(f, "ENV_IN_ENV({n},{k},{l})"),
            IdentityCase::ClaimQ6 => write!(f, "CLAIM_Q6"),
            IdentityCase::ClaimQ7 => write!(f, "CLAIM_Q7"),
            IdentityCase::Derived { label, .. } => write!(f, "{label}"),
        }
    }
}

impl FromStr for IdentityCase {
    type Err = OracleError;
    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        let bad = || OracleError::Case(format!("unknown identity case {s:?}"));
        let args = |prefix: &str| -> Option<Vec<usize>> {
            let inner = up
                .strip_prefix(prefix)?
                .strip_prefix('(')?
                .strip_suffix(')')?;
            inner.split(',').map(|x| x.trim().parse().ok()).collect()
        };
        let case = match up.as_str() {
            "DISC_FORMULA" => IdentityCase::DiscFormula,
            "CLAIM_Q6" => IdentityCase::ClaimQ6,
            "CLAIM_Q7" => IdentityCase::ClaimQ7,
            _ => {
                if let Some(a) = args("PROP_CENTER") {
                    match a[..] {
                        [n, k] if (1..=n).contains(&k) && (1..=3).contains(&n) => {
                            IdentityCase::PropCenter { n, k }
                        }
                        _ => return Err(bad()),
                    }
                } else if let Some(a) = args("ENV_IN_ENV") {
                    match a[..] {
                        [n, k, l] if 1 <= k && k < l && l <= n && n <= 3 => {
                            IdentityCase::EnvInEnv { n, k, l }
                        }
                        _ => return Err(bad()),
                    }
                } else {
                    return Self::derived()
                        .into_iter()
                        .find(|c| c.to_string() == up)
                        .ok_or_else(bad);
                }
            }
        };
        Ok(case)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorParams {
    pub r: Vec<f64>,
    #[serde(rename = "R")]
    pub big_r: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub case: String,
    pub params: FactorParams,
    pub grid: Vec<usize>,
    pub max_dev: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub sweeps: usize,
    pub residual: f64,
    pub tol: f64,
    pub interior_points: usize,
    pub seed: u64,
}

/// Solver output for the case next to the closed form evaluated on the grid.
pub struct CaseSolution {
    pub solved: Solved,
    pub closed_form: GridFn,
}

pub fn solve_case(
    case: &IdentityCase,
    factors: &[RadialFactor],
    params: &GridParams,
) -> Result<CaseSolution> {
    let dim = case.dim();
    if factors.len() < dim {
        return Err(OracleError::Dimension(factors.len()));
    }
    let factors = &factors[..dim];
    let (a, domain, right) = case.problem(factors)?;
    let solved = compute_h_star(factors, &a, &domain, params)?;
    let mut closed_form = solved.function.clone();
    for i in 0..closed_form.values.len() {
        let t = closed_form.grid.point(i);
        let h: Vec<f64> = t.iter().zip(factors).map(|(x, f)| f.h_of_log(*x)).collect();
        closed_form.values[i] = right.eval_f64(&h);
    }
    Ok(CaseSolution {
        solved,
        closed_form,
    })
}

/// Largest deviation at points at least two cells inside the domain.
pub fn interior_deviation(a: &GridFn, b: &GridFn) -> (f64, usize) {
    let inner = a.interior(2);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in (0..inner.len()).filter(|&i| inner[i]) {
        count += 1;
        worst = worst.max((a.values[i] - b.values[i]).abs());
    }
    (worst, count)
}

pub fn verify_identity(
    case: &IdentityCase,
    factors: &[RadialFactor],
    params: &GridParams,
    seed: u64,
) -> Result<VerifyReport> {
    let sol = solve_case(case, factors, params)?;
    Ok(verify_report(case, factors, params, seed, &sol))
}

/// Report for a solution already computed by [`solve_case`].
pub fn verify_report(
    case: &IdentityCase,
    factors: &[RadialFactor],
    params: &GridParams,
    seed: u64,
    sol: &CaseSolution,
) -> VerifyReport {
    let (max_dev, interior_points) = interior_deviation(&sol.solved.function, &sol.closed_form);
    let used = &factors[..case.dim()];
    VerifyReport {
        case: case.to_string(),
        params: FactorParams {
            r: used.iter().map(|f| f.r).collect(),
            big_r: used.iter().map(|f| f.big_r).collect(),
        },
        grid: sol.solved.function.grid.shape(),
        max_dev,
        tolerance: case.tolerance(),
        pass: max_dev <= case.tolerance(),
        sweeps: sol.solved.stats.sweeps,
        residual: sol.solved.stats.residual,
        tol: params.tol,
        interior_points,
        seed,
    }
}
