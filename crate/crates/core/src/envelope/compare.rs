//! Sampling comparison of descriptions `{e < 1}` on `[0,1)^N`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::expr::{rat, CompiledExpr, HExpr, Rational};
use super::rules::{rule_claim_q6, rule_prop_center};
use crate::cross::permutations;

/// Denominator of the random sample coordinates.
const RANDOM_DEN: i128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleSpec {
    /// Lattice points are `k / step_den`, `0 ≤ k < step_den`.
    pub step_den: u32,
    pub n_random: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn standard(seed: u64) -> Self {
        Self {
            step_den: 64,
            n_random: 10_000,
            seed,
        }
    }

    pub fn quick(seed: u64) -> Self {
        Self {
            step_den: 16,
            n_random: 500,
            seed,
        }
    }

    pub fn lattice_size(&self, n: usize) -> u64 {
        (self.step_den as u64).pow(n as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    /// First disagreeing point: lattice order first, then random order.
    Witness(Vec<Rational>),
}

impl Comparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, Comparison::Equal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescReport {
    pub case: String,
    pub result: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    pub samples: u64,
    pub step: String,
    pub seed: u64,
}

pub fn desc_equal(a: &HExpr, b: &HExpr, n: usize, spec: &SampleSpec) -> Comparison {
    desc_equal_counted(a, b, n, spec).0
}

pub fn desc_equal_report(
    case: &str,
    a: &HExpr,
    b: &HExpr,
    n: usize,
    spec: &SampleSpec,
) -> DescReport {
    let (cmp, samples) = desc_equal_counted(a, b, n, spec);
    let (result, witness) = match cmp {
        Comparison::Equal => ("equal".to_string(), None),
        Comparison::Witness(h) => (
            "witness".to_string(),
            Some(h.iter().map(|q| q.to_string()).collect()),
        ),
    };
    DescReport {
        case: case.to_string(),
        result,
        witness,
        samples,
        step: format!("1/{}", spec.step_den),
        seed: spec.seed,
    }
}

fn desc_equal_counted(a: &HExpr, b: &HExpr, n: usize, spec: &SampleSpec) -> (Comparison, u64) {
    let ca = CompiledExpr::new(a, n);
    let cb = CompiledExpr::new(b, n);
    let step = spec.step_den as i128;
    let (hit, scanned) = lattice_scan(&ca, &cb, n, step);
    if let Some(x) = hit {
        return (
            Comparison::Witness(x.iter().map(|&k| rat(k, step)).collect()),
            scanned,
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = vec![0i128; n];
    for i in 0..spec.n_random {
        x.iter_mut().for_each(|v| *v = rng.gen_range(0..RANDOM_DEN));
        if ca.below_one(&x, RANDOM_DEN) != cb.below_one(&x, RANDOM_DEN) {
            return (
                Comparison::Witness(x.iter().map(|&k| rat(k, RANDOM_DEN)).collect()),
                scanned + i as u64 + 1,
            );
        }
    }
    (Comparison::Equal, scanned + spec.n_random as u64)
}

/// Incremental odometer scan; keeps each affine piece's value up to date
/// with one addition per step.
fn lattice_scan(
    a: &CompiledExpr,
    b: &CompiledExpr,
    n: usize,
    step: i128,
) -> (Option<Vec<i128>>, u64) {
    struct Track<'a> {
        c: &'a CompiledExpr,
        vals: Vec<i128>,
        bound: i128,
    }
    impl Track<'_> {
        fn inside(&self) -> bool {
            self.vals.iter().all(|&v| v < self.bound)
        }
        fn shift(&mut self, j: usize, by: i128) {
            for (v, row) in self.vals.iter_mut().zip(&self.c.coeffs) {
                *v += row[j] * by;
            }
        }
    }
    fn mk(c: &CompiledExpr, step: i128) -> Track<'_> {
        Track {
            c,
            vals: c.consts.iter().map(|k| k * step).collect(),
            bound: c.den * step,
        }
    }
    let (mut ta, mut tb) = (mk(a, step), mk(b, step));
    let mut x = vec![0i128; n];
    let mut count = 0u64;
    loop {
        count += 1;
        if ta.inside() != tb.inside() {
            return (Some(x), count);
        }
        let mut j = n;
        loop {
            if j == 0 {
                return (None, count);
            }
            j -= 1;
            if x[j] + 1 < step {
                x[j] += 1;
                ta.shift(j, 1);
                tb.shift(j, 1);
                break;
            }
            ta.shift(j, -x[j]);
            tb.shift(j, -x[j]);
            x[j] = 0;
        }
    }
}

/// `max{h2 + h4, h1 + h2 + h3, h1 + h3 + h4}`.
pub fn qtilde_expr() -> HExpr {
    HExpr::parse("max(sum(h2,h4),sum(h1,h2,h3),sum(h1,h3,h4))").expect("valid literal")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QtildeMatch {
    pub candidate: String,
    /// Variable renaming `h_j ↦ h_{perm[j]}` applied to the candidate.
    pub permutation: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QtildeReport {
    pub target: String,
    pub candidates: usize,
    pub matches: Vec<QtildeMatch>,
    pub step: String,
    pub n_random: usize,
    pub seed: u64,
}

/// Compares `Q̃` with each four-variable candidate under all renamings of
/// the variables; a candidate matches at most once.
pub fn qtilde_check(candidates: &[(String, HExpr)], spec: &SampleSpec) -> QtildeReport {
    let target = qtilde_expr();
    let coarse = SampleSpec {
        step_den: 8,
        n_random: 0,
        seed: spec.seed,
    };
    let perms = permutations(4);
    let mut matches = Vec::new();
    for (name, e) in candidates {
        for p in &perms {
            let renamed = e.rename(p);
            if desc_equal(&target, &renamed, 4, &coarse).is_equal()
                && desc_equal(&target, &renamed, 4, spec).is_equal()
            {
                matches.push(QtildeMatch {
                    candidate: name.clone(),
                    permutation: p.clone(),
                });
                break;
            }
        }
    }
    QtildeReport {
        target: target.to_string(),
        candidates: candidates.len(),
        matches,
        step: format!("1/{}", spec.step_den),
        n_random: spec.n_random,
        seed: spec.seed,
    }
}

/// The two systems of conditions describing the same four-factor domain;
/// composite terms replaced by their closed forms.
#[derive(Debug, Clone)]
pub struct ConditionSystems {
    /// `h*` of `D_1 × A_3` in the envelope of the two-fold cross on (1, 3).
    pair13: HExpr,
    /// `h*` of `A_2 × D_4` in the envelope of the two-fold cross on (2, 4).
    pair24: HExpr,
}

impl Default for ConditionSystems {
    fn default() -> Self {
        Self::new()
    }
}

impl ConditionSystems {
    pub fn new() -> Self {
        Self {
            pair13: rule_prop_center(&[2], &[0], 1).expect("valid slots"),
            pair24: rule_claim_q6(1, 3).expect("valid slots"),
        }
    }

    /// Returns `(first system holds, second system holds)`.
    pub fn eval(&self, h: &[Rational]) -> (bool, bool) {
        let one = Rational::from_integer(1);
        let a = h[1] + h[3] < one;
        let b = h[0] + h[2] < one;
        let c13 = self.pair13.eval_unchecked(h);
        let c = c13 + self.pair24.eval_unchecked(h) < one;
        let f = h[1] + c13 < one;
        (a && b && c, a && b && f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemsReport {
    pub samples: usize,
    pub seed: u64,
    pub both_hold: usize,
    pub both_fail: usize,
    pub counterexamples: Vec<Vec<String>>,
}

pub fn systems_equiv_check(n_samples: usize, seed: u64) -> SystemsReport {
    let sys = ConditionSystems::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SystemsReport {
        samples: n_samples,
        seed,
        both_hold: 0,
        both_fail: 0,
        counterexamples: Vec::new(),
    };
    for _ in 0..n_samples {
        let h: Vec<Rational> = (0..4)
            .map(|_| rat(rng.gen_range(0..RANDOM_DEN), RANDOM_DEN))
            .collect();
        match sys.eval(&h) {
            (true, true) => report.both_hold += 1,
            (false, false) => report.both_fail += 1,
            _ => report
                .counterexamples
                .push(h.iter().map(|q| q.to_string()).collect()),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::expr::int;

    fn p(s: &str) -> HExpr {
        HExpr::parse(s).unwrap()
    }

    #[test]
    fn symmetric_q4_is_equal_to_itself_swapped() {
        let q4 = p("max(sum(h2,h4),sum(h1,h3))");
        let swapped = q4.rename(&[1, 0, 3, 2]);
        assert!(desc_equal(&q4, &swapped, 4, &SampleSpec::quick(0)).is_equal());
    }

    #[test]
    fn sum_versus_max_has_witness() {
        let spec = SampleSpec::quick(0);
        match desc_equal(&p("sum(h1,h2)"), &p("max(h1,h2)"), 2, &spec) {
            Comparison::Witness(h) => {
                let s = h[0] + h[1];
                assert!(s >= int(1) && h[0] < int(1) && h[1] < int(1));
            }
            Comparison::Equal => panic!("descriptions differ"),
        }
        let r = desc_equal_report("sum-vs-max", &p("sum(h1,h2)"), &p("max(h1,h2)"), 2, &spec);
        assert_eq!(r.result, "witness");
        // lattice-first witness in odometer order: (1/16, 15/16)
        assert_eq!(r.witness.unwrap(), vec!["1/16", "15/16"]);
    }

    #[test]
    fn clamped_q9_is_equal_at_full_resolution() {
        let a = p("sum(h1,scale(1/2,sum(h2,h3,h4,-1)))");
        let b = p("sum(h1,max(0,scale(1/2,sum(h2,h3,h4,-1))))");
        let r = desc_equal_report("q9-clamp", &a, &b, 4, &SampleSpec::standard(0));
        assert_eq!(r.result, "equal");
        assert_eq!(r.samples, 64u64.pow(4) + 10_000);
    }

    #[test]
    fn qtilde_matches_itself_once() {
        let spec = SampleSpec::quick(1);
        let cands = vec![
            ("q4".to_string(), p("max(sum(h2,h4),sum(h1,h3))")),
            ("self".to_string(), qtilde_expr()),
            (
                "relabelled".to_string(),
                qtilde_expr().rename(&[2, 3, 0, 1]),
            ),
        ];
        let r = qtilde_check(&cands, &spec);
        let names: Vec<&str> = r.matches.iter().map(|m| m.candidate.as_str()).collect();
        assert_eq!(names, ["self", "relabelled"]);
    }

    #[test]
    fn condition_systems_examples() {
        let sys = ConditionSystems::new();
        assert_eq!(sys.eval(&[int(0); 4]), (true, true));
        let h = [rat(9, 10), int(0), rat(9, 10), int(0)];
        assert_eq!(sys.eval(&h), (false, false));
        let r = systems_equiv_check(2000, 7);
        assert!(r.counterexamples.is_empty());
        assert_eq!(r.both_hold + r.both_fail, 2000);
    }
}
