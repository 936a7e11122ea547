//! Recursive construction of envelope descriptions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use super::compare::{desc_equal, Comparison, SampleSpec};
use super::expr::{ExprError, HExpr, Rational};
use super::nine::certified_lookup;
use super::rules::{close_inner, nk_envelope, InnerDomain, RuleId, RuleSet};
use crate::cross::{
    classify, covers_x_n1, full_columns, BranchSet, Classification, CrossError, CrossMatrix,
};

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("pathological cross {matrix}: column {column} has no 1, so X_{{N,1}} is not contained in it and the envelope is undefined")]
    Pathological { matrix: String, column: usize },
    #[error("matrix {0} is not reduced; call reduce first")]
    NotReduced(String),
    #[error("pivot {pivot} is not admissible for {matrix}")]
    BadPivot { matrix: String, pivot: usize },
    #[error(transparent)]
    Cross(#[from] CrossError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type Result<T> = std::result::Result<T, EnvelopeError>;

/// Result of the builder. Factor indices are global throughout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvelopeDescription {
    /// `{h ∈ [0,1)^N : expr(h) < 1}`.
    Closed(HExpr),
    /// `child × ∏_{k ∈ full_factors} D_k`.
    Product {
        full_factors: Vec<usize>,
        child: Box<EnvelopeDescription>,
    },
    /// Envelope of `(A_p × G) ∪ (D_p × B)` with `G` the envelope of
    /// `inner_cross` over `factors`.
    TwoFold {
        pivot: usize,
        factors: Vec<usize>,
        inner_cross: CrossMatrix,
        inner_branches: BranchSet,
        inner_env: Box<EnvelopeDescription>,
        closed_inner: Option<HExpr>,
        rule: Option<RuleId>,
    },
}

impl EnvelopeDescription {
    /// Single expression for the whole description when every node closes.
    /// A two-fold node becomes `max{h_p + inner, E_G}`, or `h_p + inner` when
    /// `E_G` is the constant 0 of a full product.
    pub fn flatten(&self) -> Option<HExpr> {
        match self {
            EnvelopeDescription::Closed(e) => Some(e.clone()),
            EnvelopeDescription::Product { child, .. } => child.flatten(),
            EnvelopeDescription::TwoFold {
                pivot,
                inner_env,
                closed_inner,
                ..
            } => {
                let inner = closed_inner.clone()?;
                let domain = inner_env.flatten()?;
                let own = HExpr::Sum(vec![HExpr::Var(*pivot), inner]);
                if domain == HExpr::zero() {
                    return Some(own);
                }
                Some(HExpr::Max(vec![own, domain]))
            }
        }
    }

    pub fn closed(&self) -> Option<&HExpr> {
        match self {
            EnvelopeDescription::Closed(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, EnvelopeDescription::Closed(_))
    }

    /// Renames factor `j` to `map[j]`.
    pub fn rename(&self, map: &[usize]) -> Self {
        match self {
            EnvelopeDescription::Closed(e) => EnvelopeDescription::Closed(e.rename(map)),
            EnvelopeDescription::Product {
                full_factors,
                child,
            } => EnvelopeDescription::Product {
                full_factors: full_factors.iter().map(|&k| map[k]).collect(),
                child: Box::new(child.rename(map)),
            },
            EnvelopeDescription::TwoFold {
                pivot,
                factors,
                inner_cross,
                inner_branches,
                inner_env,
                closed_inner,
                rule,
            } => EnvelopeDescription::TwoFold {
                pivot: map[*pivot],
                factors: factors.iter().map(|&k| map[k]).collect(),
                inner_cross: inner_cross.clone(),
                inner_branches: inner_branches.clone(),
                inner_env: Box::new(inner_env.rename(map)),
                closed_inner: closed_inner.as_ref().map(|e| e.rename(map)),
                rule: *rule,
            },
        }
    }
}

fn var_list(v: &[usize]) -> String {
    let names: Vec<String> = v.iter().map(|k| format!("h{}", k + 1)).collect();
    names.join(",")
}

impl fmt::Display for EnvelopeDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvelopeDescription::Closed(e) => write!(f, "{e}"),
            EnvelopeDescription::Product {
                full_factors,
                child,
            } => write!(f, "product(full=[{}],{child})", var_list(full_factors)),
            EnvelopeDescription::TwoFold {
                pivot,
                factors,
                inner_cross,
                inner_branches,
                inner_env,
                closed_inner,
                rule,
            } => {
                write!(
                    f,
                    "twofold(pivot=h{},factors=[{}],cross={inner_cross},branches={inner_branches},domain={inner_env},inner=",
                    pivot + 1,
                    var_list(factors)
                )?;
                match (closed_inner, rule) {
                    (Some(e), Some(r)) => write!(f, "{e} [{}])", r.name()),
                    _ => write!(f, "open)"),
                }
            }
        }
    }
}

/// A certified formula the recursion contradicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedConflict {
    pub case: String,
    pub matrix: CrossMatrix,
    pub certified: HExpr,
    pub derived: HExpr,
    pub witness: Vec<Rational>,
}

/// Memoising builder. Results are computed in local coordinates (the
/// matrix's own columns) and cached by matrix.
///
/// The certified table fills in cases the recursion leaves open. When both
/// exist and disagree the derived result is returned and the disagreement is
/// kept in [`EnvelopeBuilder::conflicts`].
#[derive(Debug, Clone)]
pub struct EnvelopeBuilder {
    rules: RuleSet,
    certified: bool,
    cache: HashMap<CrossMatrix, EnvelopeDescription>,
    conflicts: Vec<CertifiedConflict>,
}

impl Default for EnvelopeBuilder {
    fn default() -> Self {
        Self::new(RuleSet::full())
    }
}

impl EnvelopeBuilder {
    pub fn new(rules: RuleSet) -> Self {
        Self {
            rules,
            certified: true,
            cache: HashMap::new(),
            conflicts: Vec::new(),
        }
    }

    /// Disables the certified four-factor table, leaving the recursion alone.
    pub fn without_certified(mut self) -> Self {
        self.certified = false;
        self
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    /// Certified formulas contradicted so far, in discovery order.
    pub fn conflicts(&self) -> &[CertifiedConflict] {
        &self.conflicts
    }

    fn check(m: &CrossMatrix) -> Result<()> {
        if !m.is_antichain() {
            return Err(EnvelopeError::NotReduced(m.to_string()));
        }
        if let Some(column) = (0..m.n_factors()).find(|&k| m.rows().iter().all(|r| !r.bits()[k])) {
            return Err(EnvelopeError::Pathological {
                matrix: m.to_string(),
                column: column + 1,
            });
        }
        debug_assert!(covers_x_n1(m));
        Ok(())
    }

    /// Closed description when everything closes, structural otherwise.
    pub fn build(&mut self, m: &CrossMatrix) -> Result<EnvelopeDescription> {
        let d = self.explain(m)?;
        Ok(match d.flatten() {
            Some(e) => EnvelopeDescription::Closed(e),
            None => d,
        })
    }

    /// Structural description showing how the result was obtained.
    pub fn explain(&mut self, m: &CrossMatrix) -> Result<EnvelopeDescription> {
        Self::check(m)?;
        if let Some(d) = self.cache.get(m) {
            return Ok(d.clone());
        }
        let d = self.derive(m)?;
        self.cache.insert(m.clone(), d.clone());
        Ok(d)
    }

    fn derive(&mut self, m: &CrossMatrix) -> Result<EnvelopeDescription> {
        let n = m.n_factors();
        let class = classify(m);
        if class == Classification::FullProduct {
            return Ok(EnvelopeDescription::Closed(HExpr::zero()));
        }
        let full = full_columns(m);
        if !full.is_empty() {
            let rest: Vec<usize> = (0..n).filter(|k| !full.contains(k)).collect();
            let stripped = m.select_columns(&rest)?;
            let child = self.explain(&stripped)?.rename(&rest);
            return Ok(EnvelopeDescription::Product {
                full_factors: full,
                child: Box::new(child),
            });
        }
        if let Some(k) = class.nk_order(n) {
            return Ok(EnvelopeDescription::Closed(nk_envelope(n, k)?));
        }
        let recursive = self.recursive(m)?;
        if self.certified {
            if let Some(case) = certified_lookup(m) {
                let Some(e) = recursive.flatten() else {
                    return Ok(EnvelopeDescription::Closed(case.expr));
                };
                if let Comparison::Witness(h) = desc_equal(&case.expr, &e, n, &SampleSpec::quick(0))
                {
                    self.conflicts.push(CertifiedConflict {
                        case: case.name,
                        matrix: m.clone(),
                        certified: case.expr,
                        derived: e,
                        witness: h,
                    });
                    return Ok(recursive);
                }
                return Ok(EnvelopeDescription::Closed(case.expr));
            }
        }
        Ok(recursive)
    }

    /// Pivot search, then the product route, then the open two-fold node at
    /// the first pivot.
    fn recursive(&mut self, m: &CrossMatrix) -> Result<EnvelopeDescription> {
        let mut first = None;
        for p in 0..m.n_factors() {
            let d = self.two_fold(m, p)?;
            if d.flatten().is_some() {
                return Ok(d);
            }
            first.get_or_insert(d);
        }
        if let Some(e) = self.product_route(m)? {
            return Ok(EnvelopeDescription::Closed(e));
        }
        Ok(first.expect("at least two factors"))
    }

    /// The two-fold node obtained by pivoting on factor `pivot`.
    pub fn two_fold(&mut self, m: &CrossMatrix, pivot: usize) -> Result<EnvelopeDescription> {
        let n = m.n_factors();
        if pivot >= n || full_columns(m).contains(&pivot) || n < 3 {
            return Err(EnvelopeError::BadPivot {
                matrix: m.to_string(),
                pivot,
            });
        }
        let factors: Vec<usize> = (0..n).filter(|&k| k != pivot).collect();
        let drop = |bits: &[bool]| -> Vec<bool> { factors.iter().map(|&k| bits[k]).collect() };
        let all = BranchSet::new(n - 1, m.rows().iter().map(|r| drop(r.bits())).collect());
        let inner_cross = CrossMatrix::from_bit_rows(all.rows)?;
        let inner_branches = BranchSet::new(
            n - 1,
            m.rows()
                .iter()
                .filter(|r| r.bits()[pivot])
                .map(|r| drop(r.bits()))
                .collect(),
        );
        let inner_env = self.explain(&inner_cross)?.rename(&factors);
        let closed = inner_env.flatten().and_then(|g| {
            let nk = classify(&inner_cross).nk_order(n - 1);
            let dom = InnerDomain::new(factors.clone(), &g, nk);
            close_inner(&inner_branches, &dom, &self.rules)
        });
        let (closed_inner, rule) = match closed {
            Some((e, r)) => (Some(e), Some(r)),
            None => (None, None),
        };
        Ok(EnvelopeDescription::TwoFold {
            pivot,
            factors,
            inner_cross,
            inner_branches,
            inner_env: Box::new(inner_env),
            closed_inner,
            rule,
        })
    }

    /// Closed descriptions for every pivot that closes, in pivot order.
    pub fn closing_pivots(&mut self, m: &CrossMatrix) -> Result<Vec<(usize, HExpr)>> {
        Self::check(m)?;
        let full = full_columns(m);
        let mut out = Vec::new();
        if m.n_factors() < 3 || classify(m).nk_order(m.n_factors()).is_some() {
            return Ok(out);
        }
        for p in (0..m.n_factors()).filter(|p| !full.contains(p)) {
            if let Some(e) = self.two_fold(m, p)?.flatten() {
                out.push((p, e));
            }
        }
        Ok(out)
    }

    /// Envelope of a product of crosses as the product of their envelopes,
    /// when the rows split as `Q_1 × Q_2` along some column bipartition.
    pub fn product_route(&mut self, m: &CrossMatrix) -> Result<Option<HExpr>> {
        let n = m.n_factors();
        for mask in 0u32..(1 << (n - 1)) {
            let left: Vec<usize> = std::iter::once(0)
                .chain((1..n).filter(|k| mask >> (k - 1) & 1 == 1))
                .collect();
            let right: Vec<usize> = (0..n).filter(|k| !left.contains(k)).collect();
            if left.len() < 2 || right.len() < 2 {
                continue;
            }
            let proj = |cols: &[usize]| -> BTreeSet<Vec<bool>> {
                m.rows()
                    .iter()
                    .map(|r| cols.iter().map(|&k| r.bits()[k]).collect())
                    .collect()
            };
            let (p1, p2) = (proj(&left), proj(&right));
            if p1.len() * p2.len() != m.rows().len()
                || p1.iter().chain(&p2).any(|r| r.iter().all(|&b| !b))
            {
                continue;
            }
            let m1 = CrossMatrix::from_bit_rows(p1.into_iter().collect())?;
            let m2 = CrossMatrix::from_bit_rows(p2.into_iter().collect())?;
            let e1 = self.build(&m1)?.flatten();
            let e2 = self.build(&m2)?.flatten();
            if let (Some(e1), Some(e2)) = (e1, e2) {
                return Ok(Some(HExpr::Max(vec![e1.rename(&left), e2.rename(&right)])));
            }
        }
        Ok(None)
    }
}

/// [`EnvelopeBuilder::build`] with the full rule set.
pub fn build_envelope(m: &CrossMatrix) -> Result<EnvelopeDescription> {
    EnvelopeBuilder::default().build(m)
}
