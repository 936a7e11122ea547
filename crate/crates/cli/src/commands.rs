use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use across_core::cross::{
    classify as class_of, covers_x_n1, enumerate as enumerate_matrices, full_columns,
    reduce as reduce_matrix, CrossMatrix, EnumFilter,
};
use across_core::envelope::{
    desc_equal_report, nine_cases, qtilde_check, qtilde_expr, CertifiedConflict, EnvelopeBuilder,
    EnvelopeError, HExpr, Rational, RuleSet, SampleSpec,
};
use across_core::oracle::{
    solve_case, verify_identity, verify_report, GridParams, IdentityCase, Profile, VerifyReport,
};
use across_core::radial::{h_vector, parse_radii_csv, RadialModel};

use crate::report::Report;
use crate::{EnvelopeArgs, EvalArgs, InputError, RulesArg, VerifyArgs};

type Result<T> = std::result::Result<T, InputError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<CrossMatrix> {
    CrossMatrix::parse_text(&read(path)?)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn read_model(path: Option<&Path>, n: usize) -> Result<RadialModel> {
    match path {
        Some(p) => Ok(RadialModel::from_json(&read(p)?)?),
        None => Ok(RadialModel::uniform(n, 0.5, 1.0)?),
    }
}

fn rows_of(m: &CrossMatrix) -> Vec<String> {
    m.rows().iter().map(|r| r.to_string()).collect()
}

fn one_based(cols: &[usize]) -> Vec<usize> {
    cols.iter().map(|c| c + 1).collect()
}

fn empty_columns(m: &CrossMatrix) -> Vec<usize> {
    (0..m.n_factors())
        .filter(|&k| m.rows().iter().all(|r| !r.bits()[k]))
        .collect()
}

pub fn reduce(path: &Path) -> Result<Report> {
    let m = read_matrix(path)?;
    let r = reduce_matrix(&m);
    let removed = m.rows().len() - r.rows().len();
    let rows = rows_of(&r);
    let json = json!({ "n": r.n_factors(), "rows": rows, "removed": removed });
    let table = rows.iter().map(|s| vec![s.clone()]).collect();
    Ok(Report::new(r.to_text(), json).table(&["row"], table))
}

pub fn classify(path: &Path) -> Result<Report> {
    let m = read_matrix(path)?;
    let tag = class_of(&m).tag();
    let full = one_based(&full_columns(&m));
    let covers = covers_x_n1(&m);
    let text = format!(
        "class: {tag}\nreduced: {}\nfull columns: {full:?}\ncovers X_{{N,1}}: {covers}",
        m.is_antichain()
    );
    let json = json!({
        "rows": rows_of(&m),
        "class": tag,
        "reduced": m.is_antichain(),
        "full_columns": full,
        "covers_x_n1": covers,
    });
    let row = vec![
        m.to_string(),
        tag.clone(),
        m.is_antichain().to_string(),
        covers.to_string(),
    ];
    Ok(Report::new(text, json).table(&["matrix", "class", "reduced", "covers_x_n1"], vec![row]))
}

pub fn check(path: &Path) -> Result<Report> {
    let m = read_matrix(path)?;
    let n = m.n_factors();
    let reduced = m.is_antichain();
    let empty = one_based(&empty_columns(&m));
    let mut problems = Vec::new();
    if !reduced {
        problems.push("not reduced: some row lies below another; run `across reduce` first".into());
    }
    if !empty.is_empty() {
        problems.push(format!(
            "pathological: column(s) {empty:?} have no 1, so X_{{{n},1}} is not contained in the cross and its envelope is undefined"
        ));
    }
    let ok = problems.is_empty();
    let text = if ok {
        format!("ok: reduced and contains X_{{{n},1}}")
    } else {
        problems.join("\n")
    };
    let json = json!({
        "rows": rows_of(&m),
        "reduced": reduced,
        "covers_x_n1": empty.is_empty(),
        "empty_columns": empty,
        "ok": ok,
        "problems": problems,
    });
    let row = vec![
        m.to_string(),
        reduced.to_string(),
        empty.is_empty().to_string(),
        ok.to_string(),
    ];
    Ok(Report::new(text, json)
        .table(&["matrix", "reduced", "covers_x_n1", "ok"], vec![row])
        .fail_if(!ok))
}

fn conflict_json(c: &CertifiedConflict) -> Value {
    json!({
        "case": c.case,
        "certified": c.certified.to_string(),
        "derived": c.derived.to_string(),
        "witness": c.witness.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
    })
}

fn conflict_note(c: &CertifiedConflict) -> String {
    let w: Vec<String> = c.witness.iter().map(|q| q.to_string()).collect();
    format!(
        "note: certified {} formula {} disagrees with the derived one at h=({}); printing the derived one",
        c.case,
        c.certified,
        w.join(",")
    )
}

pub fn envelope(a: &EnvelopeArgs) -> Result<Report> {
    let mut m = read_matrix(&a.matrix)?;
    if a.reduce {
        m = reduce_matrix(&m);
    }
    let rules = match a.rules {
        RulesArg::Named => RuleSet::named(),
        RulesArg::Full => RuleSet::full(),
    };
    let mut b = EnvelopeBuilder::new(rules);
    if a.no_certified {
        b = b.without_certified();
    }
    let built = if a.explain {
        b.explain(&m)
    } else {
        b.build(&m)
    };
    let d = match built {
        Ok(d) => d,
        Err(e @ EnvelopeError::Pathological { .. }) => {
            let json = json!({ "rows": rows_of(&m), "error": e.to_string() });
            return Ok(Report::new(e.to_string(), json)
                .table(
                    &["matrix", "error"],
                    vec![vec![m.to_string(), e.to_string()]],
                )
                .fail_if(true));
        }
        Err(e) => return Err(e.into()),
    };
    let closed = d.flatten().is_some();
    let text = d.to_string();
    let json = json!({
        "rows": rows_of(&m),
        "closed": closed,
        "description": text,
        "conflicts": b.conflicts().iter().map(conflict_json).collect::<Vec<_>>(),
    });
    let row = vec![m.to_string(), closed.to_string(), text.clone()];
    let mut rep = Report::new(text, json).table(&["matrix", "closed", "description"], vec![row]);
    for c in b.conflicts() {
        rep = rep.note(conflict_note(c));
    }
    Ok(rep)
}

pub fn enumerate(n: usize, filters: Option<&[String]>) -> Result<Report> {
    let filters: Vec<EnumFilter> = match filters {
        Some(names) => names
            .iter()
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()?,
        None => EnumFilter::PAPER_N4.to_vec(),
    };
    let list = enumerate_matrices(n, &filters)?;
    let tagged: Vec<(String, String)> = list
        .iter()
        .map(|m| (m.to_string(), class_of(m).tag()))
        .collect();
    let mut text = format!("{} classes\n", list.len());
    for (m, t) in &tagged {
        text.push_str(&format!("{m} [{t}]\n"));
    }
    let json = json!({
        "n": n,
        "filters": filters.iter().map(|f| f.name()).collect::<Vec<_>>(),
        "count": list.len(),
        "matrices": list
            .iter()
            .zip(&tagged)
            .map(|(m, (_, t))| json!({ "rows": rows_of(m), "class": t }))
            .collect::<Vec<_>>(),
    });
    let rows = tagged.into_iter().map(|(m, t)| vec![m, t]).collect();
    Ok(Report::new(text, json).table(&["matrix", "class"], rows))
}

/// `1/2`, `3` or a plain decimal such as `0.25`, read exactly.
fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || InputError(format!("not a number: {s:?}"));
    if let Some((int_part, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: i128 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let den = 10i128.pow(frac.len() as u32);
        let num: i128 = frac.parse().map_err(|_| bad())?;
        return Ok(Rational::new(whole * den + num, den));
    }
    s.parse().map_err(|_| bad())
}

pub fn eval(a: &EvalArgs) -> Result<Report> {
    let (expr, label) = match (&a.expr, &a.matrix) {
        (Some(e), _) => (HExpr::parse(e)?, e.clone()),
        (None, Some(p)) => {
            let m = read_matrix(p)?;
            let d = EnvelopeBuilder::default().build(&m)?;
            let e = d
                .closed()
                .cloned()
                .ok_or_else(|| InputError(format!("{m}: envelope has no closed form")))?;
            (e, m.to_string())
        }
        (None, None) => unreachable!("clap requires a target"),
    };
    if let Some(h) = &a.h {
        let h: Vec<Rational> = h.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
        let v = expr.eval(&h)?;
        let inside = v < Rational::from_integer(1);
        let hs: Vec<String> = h.iter().map(|q| q.to_string()).collect();
        let text = format!("{expr} at h=({}) = {v}; inside: {inside}", hs.join(","));
        let json = json!({ "expr": label, "h": hs, "value": v.to_string(), "inside": inside });
        let row = vec![hs.join(" "), v.to_string(), inside.to_string()];
        return Ok(Report::new(text, json).table(&["h", "value", "inside"], vec![row]));
    }
    let points = match (&a.radii, &a.radii_csv) {
        (Some(r), _) => vec![r.clone()],
        (None, Some(p)) => parse_radii_csv(&read(p)?)?,
        (None, None) => unreachable!("clap requires a point"),
    };
    let n = points.first().map_or(0, |p| p.len());
    let model = read_model(a.model.as_deref(), n)?;
    let mut text = String::new();
    let mut items = Vec::new();
    let mut rows = Vec::new();
    for rho in &points {
        let h = h_vector(&model, rho)?;
        if expr.arity() > h.len() {
            return Err(InputError(format!(
                "expression uses {} factors, point has {}",
                expr.arity(),
                h.len()
            )));
        }
        let v = expr.eval_f64(&h);
        let inside = v < 1.0;
        text.push_str(&format!(
            "rho={rho:?} h={h:?} value={v:.6} inside: {inside}\n"
        ));
        items.push(json!({ "rho": rho, "h": h, "value": v, "inside": inside }));
        let join = |x: &[f64]| {
            x.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        rows.push(vec![join(rho), join(&h), v.to_string(), inside.to_string()]);
    }
    let json = json!({ "expr": label, "points": items });
    Ok(Report::new(text, json).table(&["rho", "h", "value", "inside"], rows))
}

pub fn nine(seed: u64) -> Report {
    let spec = SampleSpec::standard(seed);
    let mut b = EnvelopeBuilder::default().without_certified();
    let mut text = String::new();
    let mut items = Vec::new();
    let mut rows = Vec::new();
    let mut disagree = 0;
    for case in nine_cases() {
        let derived = b.build(&case.matrix).ok().and_then(|d| d.closed().cloned());
        let cmp = derived
            .as_ref()
            .map(|e| desc_equal_report(&case.name, &case.expr, e, 4, &spec));
        let agree = cmp.as_ref().is_some_and(|c| c.result == "equal");
        if !agree {
            disagree += 1;
        }
        let derived_s = derived.map_or("open".to_string(), |e| e.to_string());
        text.push_str(&format!(
            "{} {}\n  certified {}\n  derived   {}\n  {}\n",
            case.name,
            case.matrix,
            case.expr,
            derived_s,
            match &cmp {
                Some(c) if agree => format!("equal on {} samples", c.samples),
                Some(c) => format!(
                    "differ at h=({})",
                    c.witness.clone().unwrap_or_default().join(",")
                ),
                None => "recursion open".into(),
            }
        ));
        items.push(json!({
            "case": case.name,
            "rows": rows_of(&case.matrix),
            "certified": case.expr.to_string(),
            "derived": derived_s,
            "comparison": cmp,
        }));
        rows.push(vec![
            case.name.clone(),
            case.matrix.to_string(),
            case.expr.to_string(),
            derived_s,
            agree.to_string(),
        ]);
    }
    let json = json!({ "cases": items, "disagreements": disagree, "seed": seed });
    Report::new(text, json)
        .table(&["case", "matrix", "certified", "derived", "agree"], rows)
        .fail_if(disagree > 0)
}

pub fn qtilde(paths: &[std::path::PathBuf], with_target: bool, seed: u64) -> Result<Report> {
    let matrices = if paths.is_empty() {
        enumerate_matrices(4, &EnumFilter::PAPER_N4)?
    } else {
        paths
            .iter()
            .map(|p| read_matrix(p))
            .collect::<Result<_>>()?
    };
    let mut b = EnvelopeBuilder::default();
    let mut candidates = Vec::new();
    let mut open = Vec::new();
    for m in &matrices {
        if m.n_factors() != 4 {
            return Err(InputError(format!("{m}: candidates need four factors")));
        }
        match b.build(m)?.closed() {
            Some(e) => candidates.push((m.to_string(), e.clone())),
            None => open.push(m.to_string()),
        }
    }
    if with_target {
        candidates.push(("target".into(), qtilde_expr()));
    }
    let r = qtilde_check(&candidates, &SampleSpec::standard(seed));
    let mut text = format!(
        "target {}\n{} candidates, {} open, {} matches\n",
        r.target,
        r.candidates,
        open.len(),
        r.matches.len()
    );
    for m in &r.matches {
        text.push_str(&format!(
            "match {} under {:?}\n",
            m.candidate, m.permutation
        ));
    }
    let rows = r
        .matches
        .iter()
        .map(|m| vec![m.candidate.clone(), format!("{:?}", m.permutation)])
        .collect();
    let failed = !r.matches.is_empty();
    let json = json!({ "report": r, "open": open });
    Ok(Report::new(text, json)
        .table(&["candidate", "permutation"], rows)
        .fail_if(failed))
}

const REPORT_HEADER: [&str; 11] = [
    "case",
    "r",
    "R",
    "grid",
    "max_dev",
    "tolerance",
    "pass",
    "sweeps",
    "residual",
    "tol",
    "seed",
];

fn report_row(r: &VerifyReport) -> Vec<String> {
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    vec![
        r.case.clone(),
        join(&r.params.r),
        join(&r.params.big_r),
        r.grid
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join("x"),
        format!("{:e}", r.max_dev),
        format!("{:e}", r.tolerance),
        r.pass.to_string(),
        r.sweeps.to_string(),
        format!("{:e}", r.residual),
        format!("{:e}", r.tol),
        r.seed.to_string(),
    ]
}

fn report_line(r: &VerifyReport) -> String {
    format!(
        "{} {}: max_dev {:.3e} (tolerance {:.0e}) grid {:?} sweeps {} residual {:.1e} tol {:.0e} seed {}",
        if r.pass { "PASS" } else { "FAIL" },
        r.case,
        r.max_dev,
        r.tolerance,
        r.grid,
        r.sweeps,
        r.residual,
        r.tol,
        r.seed
    )
}

pub fn verify(a: &VerifyArgs, profile: Profile, seed: u64) -> Result<Report> {
    let case: IdentityCase = a.case.parse()?;
    let model = read_model(a.model.as_deref(), case.dim())?;
    let mut params = profile.params(case.dim());
    if let Some(p) = a.points {
        params.points = p;
    }
    if let Some(t) = a.tol {
        params.tol = t;
    }
    if let Some(s) = a.max_sweeps {
        params.max_sweeps = s;
    }
    if let Some(m) = a.margin {
        params.margin_cells = Some(m);
    }
    let sol = solve_case(&case, &model.factors, &params)?;
    if let Some(path) = &a.grid_out {
        fs::write(path, sol.solved.function.to_csv())
            .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    }
    let r = verify_report(&case, &model.factors, &params, seed, &sol);
    let json = serde_json::to_value(&r)?;
    Ok(Report::new(report_line(&r), json)
        .table(&REPORT_HEADER, vec![report_row(&r)])
        .fail_if(!r.pass))
}

pub fn verify_all(model: Option<&Path>, profile: Profile, seed: u64) -> Result<Report> {
    let model = read_model(model, 3)?;
    let mut reports = Vec::new();
    for case in IdentityCase::catalog() {
        let params: GridParams = profile.params(case.dim());
        reports.push(verify_identity(&case, &model.factors, &params, seed)?);
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    let mut text: String = reports.iter().map(|r| report_line(r) + "\n").collect();
    text.push_str(&format!("{} cases, {failed} failed\n", reports.len()));
    let json = json!({ "reports": reports, "failed": failed });
    let rows = reports.iter().map(report_row).collect();
    Ok(Report::new(text, json)
        .table(&REPORT_HEADER, rows)
        .fail_if(failed > 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("1/2").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational(".5").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("1").unwrap(), Rational::from_integer(1));
        assert!(parse_rational("0.").is_err());
        assert!(parse_rational("x").is_err());
    }
}
