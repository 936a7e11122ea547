//! The nine certified four-factor matrices and their envelope formulas.

use serde::Serialize;

use super::expr::HExpr;
use crate::cross::{canonical_form, CrossMatrix};

struct Entry {
    name: &'static str,
    rows: [&'static str; 5],
    formula: &'static str,
}

const TABLE: [Entry; 9] = [
    Entry {
        name: "Q1",
        rows: ["0001", "0110", "1000", "", ""],
        formula: "sum(h1,h4,max(h2,h3))",
    },
    Entry {
        name: "Q2",
        rows: ["0001", "1010", "1100", "", ""],
        formula: "sum(h4,max(h1,sum(h2,h3)))",
    },
    Entry {
        name: "Q3",
        rows: ["0011", "0101", "0110", "1001", "1010"],
        formula: "sum(h1,h2,max(sum(h3,h4,-1),0))",
    },
    Entry {
        name: "Q4",
        rows: ["0011", "0110", "1001", "1100", ""],
        formula: "max(sum(h2,h4),sum(h1,h3))",
    },
    Entry {
        name: "Q5",
        rows: ["0111", "1001", "1100", "", ""],
        formula: "sum(h1,max(h3,max(sum(h2,h4,-1),0)))",
    },
    Entry {
        name: "Q6",
        rows: ["0011", "1001", "1100", "", ""],
        formula: "max(sum(h1,h3),sum(h2,h4),sum(h2,h3))",
    },
    Entry {
        name: "Q7",
        rows: ["0011", "0101", "1001", "1010", ""],
        formula: "sum(h2,max(h1,h3,sum(h1,h3,h4,-1)))",
    },
    Entry {
        name: "Q8",
        rows: ["0001", "0110", "1010", "1100", ""],
        formula: "sum(h4,max(scale(1/2,sum(h1,h2,h3)),h1,h2,h3))",
    },
    Entry {
        name: "Q9",
        rows: ["0111", "1001", "1010", "1100", ""],
        formula: "sum(h1,scale(1/2,sum(h2,h3,h4,-1)))",
    },
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertifiedCase {
    pub name: String,
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: CrossMatrix,
    #[serde(serialize_with = "ser_expr")]
    pub expr: HExpr,
}

fn ser_matrix<S: serde::Serializer>(m: &CrossMatrix, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(m.rows().iter().map(|r| r.to_string()))
}

fn ser_expr<S: serde::Serializer>(e: &HExpr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

pub fn nine_cases() -> Vec<CertifiedCase> {
    TABLE
        .iter()
        .map(|e| {
            let rows: Vec<&str> = e.rows.iter().copied().filter(|r| !r.is_empty()).collect();
            CertifiedCase {
                name: e.name.to_string(),
                matrix: CrossMatrix::from_strs(&rows).expect("table rows are valid"),
                expr: HExpr::parse(e.formula).expect("table formulas parse"),
            }
        })
        .collect()
}

/// Certified formula for `m` when `m` is a column permutation of one of the
/// nine matrices, with the variables renamed to `m`'s columns.
pub fn certified_lookup(m: &CrossMatrix) -> Option<CertifiedCase> {
    if m.n_factors() != 4 {
        return None;
    }
    let (canon_m, perm_m) = canonical_form(m);
    nine_cases().into_iter().find_map(|case| {
        let (canon_q, perm_q) = canonical_form(&case.matrix);
        if canon_q != canon_m {
            return None;
        }
        let mut inv_q = [0; 4];
        for (i, &p) in perm_q.iter().enumerate() {
            inv_q[p] = i;
        }
        let map: Vec<usize> = (0..4).map(|c| perm_m[inv_q[c]]).collect();
        Some(CertifiedCase {
            name: case.name,
            matrix: m.clone(),
            expr: case.expr.rename(&map),
        })
    })
}
