//! Closed forms for the inner extremal function `h*_{B, G}` where `B` is a
//! union of branches and `G` a domain `{E < 1}` inside the unit box.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::expr::{int, rat, AffineForm, ExprError, HExpr, Rational, Result};
use crate::cross::BranchSet;

/// Identifier of the rule that closed an inner extremal function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RuleId {
    /// `B` contains the all-`D` branch, so `h* = 0`.
    Trivial,
    ClaimQ6,
    ClaimQ7,
    PropCenter,
    EnvInEnv,
    MaxLifting,
    Polyhedral,
}

impl RuleId {
    pub fn name(self) -> &'static str {
        match self {
            RuleId::Trivial => "trivial",
            RuleId::ClaimQ6 => "claim-q6",
            RuleId::ClaimQ7 => "claim-q7",
            RuleId::PropCenter => "prop-center",
            RuleId::EnvInEnv => "env-in-env",
            RuleId::MaxLifting => "max-lifting",
            RuleId::Polyhedral => "polyhedral",
        }
    }

    /// The last two are derived, checked against the grid oracle and
    /// against each other.
    pub fn provenance(self) -> &'static str {
        match self {
            RuleId::MaxLifting | RuleId::Polyhedral => "oracle-verified derived rule",
            _ => "closed-form identity",
        }
    }
}

/// Which rules the builder may use, in matching order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<RuleId>,
}

impl RuleSet {
    /// Named identities plus single-branch lifting.
    pub fn named() -> Self {
        Self {
            rules: vec![
                RuleId::Trivial,
                RuleId::ClaimQ6,
                RuleId::ClaimQ7,
                RuleId::PropCenter,
                RuleId::EnvInEnv,
                RuleId::MaxLifting,
            ],
        }
    }

    /// Everything, with the polyhedral rule as the last resort.
    pub fn full() -> Self {
        let mut s = Self::named();
        s.rules.push(RuleId::Polyhedral);
        s
    }

    pub fn contains(&self, r: RuleId) -> bool {
        self.rules.contains(&r)
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::full()
    }
}

/// The domain `G` of an inner problem: its factors (global indices), its
/// description over those factors, and the order `l` when `G` is the
/// envelope of the `(n, l)`-cross.
#[derive(Debug, Clone)]
pub struct InnerDomain {
    pub vars: Vec<usize>,
    /// Affine pieces of the description in local coordinates.
    pub forms: Vec<AffineForm>,
    pub nk: Option<usize>,
}

impl InnerDomain {
    pub fn new(vars: Vec<usize>, expr: &HExpr, nk: Option<usize>) -> Self {
        let width = vars
            .iter()
            .copied()
            .max()
            .map_or(0, |m| m + 1)
            .max(expr.arity());
        let forms = expr
            .affine_forms(width)
            .into_iter()
            .map(|f| AffineForm {
                coeffs: vars.iter().map(|&v| f.coeffs[v]).collect(),
                constant: f.constant,
            })
            .collect();
        Self { vars, forms, nk }
    }
}

/// `(h_1 + … + h_n) / k`, the description of the envelope of the
/// `(n, k)`-cross.
pub fn nk_envelope(n: usize, k: usize) -> Result<HExpr> {
    if k == 0 || k > n {
        return Err(ExprError::Arity("nk_envelope: 1 ≤ k ≤ n", k));
    }
    HExpr::scale(
        rat(1, k as i128),
        HExpr::sum_vars(&(0..n).collect::<Vec<_>>())?,
    )
}

/// `h*` of `∏_{a} A_a × ∏_{d} D_d` in the envelope of the `(N, k)`-cross
/// over the factors `a_slots ∪ d_slots`.
///
/// Without D-slots this is `max{(1/k) Σ h_a, max_a h_a}`.
pub fn rule_prop_center(a_slots: &[usize], d_slots: &[usize], k: usize) -> Result<HExpr> {
    if a_slots.is_empty() {
        return Err(ExprError::Arity("prop_center a_slots", 1));
    }
    let n = a_slots.len() + d_slots.len();
    if k == 0 || k > n {
        return Err(ExprError::Arity("prop_center: 1 ≤ k ≤ N", k));
    }
    let mut vars: Vec<usize> = a_slots.iter().chain(d_slots).copied().collect();
    vars.sort_unstable();
    let mut form = AffineForm::constant(n, Rational::zero());
    form.coeffs = vec![rat(1, k as i128); n];
    let a_local: Vec<usize> = a_slots.iter().map(|a| local(&vars, *a)).collect();
    let d_local: Vec<usize> = d_slots.iter().map(|d| local(&vars, *d)).collect();
    Ok(max_lifting_local(&a_local, &d_local, &[form]).rename(&vars))
}

fn local(vars: &[usize], v: usize) -> usize {
    vars.iter()
        .position(|&x| x == v)
        .expect("slot belongs to the factor set")
}

/// `max{0, (Σ h_j − k) / (l − k)}`, a lower bound for `h*` of the
/// `(n, k)`-cross inside the envelope of the `(n, l)`-cross. Equality holds
/// for `l = k + 1`; wider gaps miss partial-sum terms such as
/// `max{0, h_1 + h_2 − 1}` for `(3, 1, 3)`, so [`close_inner`] only uses it
/// there.
pub fn rule_env_in_env(n: usize, k: usize, l: usize) -> Result<HExpr> {
    if k == 0 || k >= l || l > n {
        return Err(ExprError::Arity("env_in_env: 1 ≤ k < l ≤ n", l));
    }
    let mut terms: Vec<HExpr> = (0..n).map(HExpr::Var).collect();
    terms.push(HExpr::Const(int(-(k as i128))));
    HExpr::max(vec![
        HExpr::zero(),
        HExpr::scale(rat(1, (l - k) as i128), HExpr::Sum(terms))?,
    ])
}

/// `h*` of `A_a × D_d` inside the envelope of `(A_a × D_d) ∪ (D_a × A_d)`.
pub fn rule_claim_q6(a_slot: usize, d_slot: usize) -> Result<HExpr> {
    if a_slot == d_slot {
        return Err(ExprError::Arity("claim_q6 distinct slots", 2));
    }
    Ok(HExpr::Var(a_slot))
}

/// `h*` of `A_{a1} × A_{a2} × D_d` inside the envelope of the `(3,2)`-cross:
/// `max{h_{a1}, h_{a2}, h_{a1} + h_{a2} + h_d − 1}`.
pub fn rule_claim_q7(a1: usize, a2: usize, d: usize) -> Result<HExpr> {
    if a1 == a2 || a1 == d || a2 == d {
        return Err(ExprError::Arity("claim_q7 distinct slots", 3));
    }
    HExpr::max(vec![
        HExpr::Var(a1),
        HExpr::Var(a2),
        HExpr::Sum(vec![
            HExpr::Var(a1),
            HExpr::Var(a2),
            HExpr::Var(d),
            HExpr::Const(int(-1)),
        ]),
    ])
}

/// `h*` of a single branch `∏ A_a × ∏ D_d` inside `{max_i (c_i·h + e_i) < 1}`
/// (local coordinates, unit box implied):
///
/// `max{0, (Σ_a c_ia h_a + Σ_{d∈T} c_id (h_d − 1)) / (1 − e_i − Σ_{d∈T} c_id)}`
/// over pieces `i` and subsets `T` of the D-slots with positive denominator.
pub fn max_lifting_local(a_slots: &[usize], d_slots: &[usize], forms: &[AffineForm]) -> HExpr {
    let n = a_slots.len() + d_slots.len();
    let mut pieces: Vec<AffineForm> = forms.to_vec();
    for j in 0..n {
        let mut f = AffineForm::constant(n, Rational::zero());
        f.coeffs[j] = Rational::one();
        pieces.push(f);
    }
    let mut out = vec![AffineForm::constant(n, Rational::zero())];
    for p in &pieces {
        for t in 0u32..(1 << d_slots.len()) {
            let in_t: Vec<usize> = (0..d_slots.len())
                .filter(|i| t >> i & 1 == 1)
                .map(|i| d_slots[i])
                .collect();
            if in_t.iter().any(|&d| p.coeffs[d].is_zero()) {
                continue;
            }
            let kappa =
                Rational::one() - p.constant - in_t.iter().map(|&d| p.coeffs[d]).sum::<Rational>();
            if !kappa.is_positive() {
                continue;
            }
            let mut f = AffineForm::constant(n, Rational::zero());
            for &a in a_slots {
                f.coeffs[a] = p.coeffs[a] / kappa;
            }
            for &d in &in_t {
                f.coeffs[d] = p.coeffs[d] / kappa;
                f.constant -= p.coeffs[d] / kappa;
            }
            out.push(f);
        }
    }
    HExpr::from_forms(&super::expr::prune_forms(out))
}

/// Exact `h*_{B, G}` for torus-invariant data: the maximum of all affine
/// functions `w·h + b` with `w ≥ 0`, `≤ 0` on every branch of `B` and
/// `≤ 1` on the closure of `G`, taken over the vertices of that polyhedron.
pub fn polyhedral_local(b: &BranchSet, forms: &[AffineForm]) -> HExpr {
    let n = b.n_factors;
    let vertices = maximal_vertices(n, forms);
    // constraints a·(w, b) ≤ β
    let mut cons: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for j in 0..n {
        let mut a = vec![Rational::zero(); n + 1];
        a[j] = -Rational::one();
        cons.push((a, Rational::zero()));
    }
    for row in &b.rows {
        let mut a: Vec<Rational> = row
            .iter()
            .map(|&x| if x { int(1) } else { int(0) })
            .collect();
        a.push(Rational::one());
        cons.push((a, Rational::zero()));
    }
    for v in &vertices {
        let mut a = v.clone();
        a.push(Rational::one());
        cons.push((a, Rational::one()));
    }
    cons.sort();
    cons.dedup();
    let mut out = vec![AffineForm::constant(n, Rational::zero())];
    for x in polytope_vertices(&cons, n + 1) {
        out.push(AffineForm {
            coeffs: x[..n].to_vec(),
            constant: x[n],
        });
    }
    HExpr::from_forms(&super::expr::prune_forms(out))
}

/// Vertices of `{q ∈ [0,1]^n : f(q) ≤ 1 ∀ f}` not dominated by another vertex.
fn maximal_vertices(n: usize, forms: &[AffineForm]) -> Vec<Vec<Rational>> {
    let mut cons: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for j in 0..n {
        let mut lo = vec![Rational::zero(); n];
        lo[j] = -Rational::one();
        cons.push((lo, Rational::zero()));
        let mut hi = vec![Rational::zero(); n];
        hi[j] = Rational::one();
        cons.push((hi, Rational::one()));
    }
    for f in forms {
        cons.push((f.coeffs.clone(), Rational::one() - f.constant));
    }
    cons.sort();
    cons.dedup();
    let all = polytope_vertices(&cons, n);
    all.iter()
        .filter(|v| {
            !all.iter()
                .any(|u| u != *v && v.iter().zip(u.iter()).all(|(a, b)| a <= b))
        })
        .cloned()
        .collect()
}

/// Brute-force vertex enumeration of `{x : a·x ≤ β}` in dimension `dim`.
fn polytope_vertices(cons: &[(Vec<Rational>, Rational)], dim: usize) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    let m = cons.len();
    if m < dim {
        return out;
    }
    let mut idx: Vec<usize> = (0..dim).collect();
    loop {
        let a: Vec<Vec<Rational>> = idx.iter().map(|&i| cons[i].0.clone()).collect();
        let rhs: Vec<Rational> = idx.iter().map(|&i| cons[i].1).collect();
        if let Some(x) = solve(a, rhs) {
            let feasible = cons
                .iter()
                .all(|(a, beta)| a.iter().zip(&x).map(|(p, q)| p * q).sum::<Rational>() <= *beta);
            if feasible && !out.contains(&x) {
                out.push(x);
            }
        }
        // next combination
        let Some(i) = (0..dim).rev().find(|&i| idx[i] < m - dim + i) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..dim {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out.sort();
    out
}

/// Gaussian elimination; `None` when the system is singular.
fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    let t = a[col][c] * f;
                    a[r][c] -= t;
                }
                let t = b[col] * f;
                b[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Tries each rule of `rules` in order; the result uses global indices.
pub fn close_inner(b: &BranchSet, dom: &InnerDomain, rules: &RuleSet) -> Option<(HExpr, RuleId)> {
    let n = dom.vars.len();
    debug_assert_eq!(b.n_factors, n);
    let single = b.is_single_row().then(|| &b.rows[0]);
    let slots = single.map(|r| {
        let d: Vec<usize> = (0..n).filter(|&j| r[j]).collect();
        let a: Vec<usize> = (0..n).filter(|&j| !r[j]).collect();
        (a, d)
    });
    let global = |v: &[usize]| -> Vec<usize> { v.iter().map(|&j| dom.vars[j]).collect() };
    for &rule in &rules.rules {
        let hit = match rule {
            RuleId::Trivial => b
                .rows
                .iter()
                .any(|r| r.iter().all(|&x| x))
                .then(HExpr::zero),
            RuleId::ClaimQ6 => match (&slots, dom.nk) {
                (Some((a, d)), Some(1)) if n == 2 && a.len() == 1 => {
                    rule_claim_q6(dom.vars[a[0]], dom.vars[d[0]]).ok()
                }
                _ => None,
            },
            RuleId::ClaimQ7 => match (&slots, dom.nk) {
                (Some((a, d)), Some(2)) if n == 3 && d.len() == 1 => {
                    rule_claim_q7(dom.vars[a[0]], dom.vars[a[1]], dom.vars[d[0]]).ok()
                }
                _ => None,
            },
            RuleId::PropCenter => match (&slots, dom.nk) {
                (Some((a, d)), Some(k)) if !a.is_empty() => {
                    rule_prop_center(&global(a), &global(d), k).ok()
                }
                _ => None,
            },
            RuleId::EnvInEnv => match (b.nk_order(), dom.nk) {
                (Some(k), Some(l)) if k >= 1 && l == k + 1 => {
                    rule_env_in_env(n, k, l).ok().map(|e| e.rename(&dom.vars))
                }
                _ => None,
            },
            RuleId::MaxLifting => slots
                .as_ref()
                .map(|(a, d)| max_lifting_local(a, d, &dom.forms).rename(&dom.vars)),
            RuleId::Polyhedral => Some(polyhedral_local(b, &dom.forms).rename(&dom.vars)),
        };
        if let Some(e) = hit {
            return Some((e, rule));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact agreement on the lattice of step 1/12 in `[0,1]^n`.
    fn same_function(a: &HExpr, b: &HExpr, n: usize) -> bool {
        let mut x = vec![0i128; n];
        loop {
            let h: Vec<Rational> = x.iter().map(|&k| rat(k, 12)).collect();
            if a.eval_unchecked(&h) != b.eval_unchecked(&h) {
                return false;
            }
            let Some(j) = (0..n).rev().find(|&j| x[j] < 12) else {
                return true;
            };
            x[j] += 1;
            x[j + 1..].iter_mut().for_each(|v| *v = 0);
        }
    }

    fn forms_of(e: &str, n: usize) -> Vec<AffineForm> {
        HExpr::parse(e).unwrap().affine_forms(n)
    }

    #[test]
    fn nk_envelope_examples() {
        assert_eq!(nk_envelope(2, 1).unwrap().to_string(), "sum(h1,h2)");
        assert_eq!(
            nk_envelope(3, 2).unwrap().to_string(),
            "scale(1/2,sum(h1,h2,h3))"
        );
        assert_eq!(
            nk_envelope(3, 3).unwrap().to_string(),
            "scale(1/3,sum(h1,h2,h3))"
        );
        assert!(nk_envelope(3, 0).is_err());
        assert!(nk_envelope(3, 4).is_err());
    }

    #[test]
    fn prop_center_examples() {
        let e = rule_prop_center(&[0, 1], &[], 1).unwrap();
        assert_eq!(e.to_string(), "sum(h1,h2)");
        let e = rule_prop_center(&[0, 1, 2], &[], 3).unwrap();
        let post = HExpr::parse("max(scale(1/3,sum(h1,h2,h3)),h1,h2,h3)").unwrap();
        assert!(same_function(&e, &post, 3));
        // A_1 × A_3 × D_4 in the envelope of the (3,2)-cross
        let e = rule_prop_center(&[0, 2], &[3], 2).unwrap();
        let q7 = rule_claim_q7(0, 2, 3).unwrap();
        assert!(same_function(&e, &q7, 4));
        assert!(rule_prop_center(&[], &[0, 1], 1).is_err());
    }

    #[test]
    fn env_in_env_examples() {
        assert_eq!(
            rule_env_in_env(2, 1, 2).unwrap().to_string(),
            "max(0,sum(h1,h2,-1))"
        );
        let e = rule_env_in_env(3, 1, 3).unwrap();
        assert_eq!(
            e.eval(&[rat(1, 2), rat(3, 10), rat(2, 5)]).unwrap(),
            rat(1, 10)
        );
        assert_eq!(e.eval(&[int(0); 3]).unwrap(), int(0));
        assert!(rule_env_in_env(3, 2, 2).is_err());
    }

    #[test]
    fn claim_q6_examples() {
        let e = rule_claim_q6(1, 3).unwrap();
        assert_eq!(e.to_string(), "h2");
        assert_eq!(e.eval(&[int(0); 4]).unwrap(), int(0));
        assert_eq!(
            e.eval(&[int(0), rat(3, 5), int(0), rat(3, 10)]).unwrap(),
            rat(3, 5)
        );
        assert!(rule_claim_q6(2, 2).is_err());
    }

    #[test]
    fn polyhedral_reproduces_named_identities() {
        // claim Q6: branch 01 in {h1 + h2 < 1}
        let b = BranchSet::new(2, vec![vec![false, true]]);
        let e = polyhedral_local(&b, &forms_of("sum(h1,h2)", 2));
        assert!(same_function(&e, &HExpr::Var(0), 2));
        // claim Q7: branch 001 in the (3,2) envelope
        let b = BranchSet::new(3, vec![vec![false, false, true]]);
        let e = polyhedral_local(&b, &forms_of("scale(1/2,sum(h1,h2,h3))", 3));
        let want = HExpr::parse("max(h1,h2,sum(h1,h2,h3,-1))").unwrap();
        assert!(same_function(&e, &want, 3));
        // env in env: (3,1)-cross inside the (3,2) envelope
        let b = BranchSet::new(
            3,
            vec![
                vec![true, false, false],
                vec![false, true, false],
                vec![false, false, true],
            ],
        );
        let e = polyhedral_local(&b, &forms_of("scale(1/2,sum(h1,h2,h3))", 3));
        assert!(same_function(&e, &rule_env_in_env(3, 1, 2).unwrap(), 3));
    }

    #[test]
    fn polyhedral_zero_branch_in_box_is_max() {
        let b = BranchSet::new(3, vec![vec![false; 3]]);
        let e = polyhedral_local(&b, &[]);
        assert!(same_function(
            &e,
            &HExpr::parse("max(h1,h2,h3)").unwrap(),
            3
        ));
    }

    #[test]
    fn close_inner_prefers_named_rules() {
        let dom = InnerDomain::new(vec![1, 3], &HExpr::parse("sum(h2,h4)").unwrap(), Some(1));
        let b = BranchSet::new(2, vec![vec![false, true]]);
        let (e, r) = close_inner(&b, &dom, &RuleSet::full()).unwrap();
        assert_eq!(r, RuleId::ClaimQ6);
        assert_eq!(e.to_string(), "h2");
        let b = BranchSet::new(2, vec![vec![false, true], vec![true, false]]);
        assert!(close_inner(&b, &dom, &RuleSet::named()).is_none());
        let (_, r) = close_inner(&b, &dom, &RuleSet::full()).unwrap();
        assert_eq!(r, RuleId::Polyhedral);
    }
}
