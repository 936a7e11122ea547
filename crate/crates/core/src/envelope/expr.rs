//! Exact piecewise-linear expressions in the variables `h_1..h_N`.
//!
//! A description `{h ∈ [0,1)^N : e(h) < 1}` is carried by an [`HExpr`]. Every
//! constructor keeps scale factors nonnegative, so each expression is a max
//! of affine functions with nonnegative slopes: convex and nondecreasing in
//! every variable.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("scale coefficient {0} is negative")]
    NegativeScale(String),
    #[error("{0} needs at least {1} children")]
    Arity(&'static str, usize),
    #[error("h[{index}] = {value} lies outside [0,1]")]
    OutOfRange { index: usize, value: String },
    #[error("expression uses h{needed} but only {given} values were supplied")]
    Dimension { needed: usize, given: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, ExprError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HExpr {
    /// `h_j`, 0-based.
    Var(usize),
    Const(Rational),
    Scale(Rational, Box<HExpr>),
    Sum(Vec<HExpr>),
    Max(Vec<HExpr>),
}

impl HExpr {
    pub fn var(j: usize) -> Self {
        HExpr::Var(j)
    }

    pub fn constant(q: Rational) -> Self {
        HExpr::Const(q)
    }

    pub fn zero() -> Self {
        HExpr::Const(Rational::zero())
    }

    /// `q · e`; `q = 1` returns `e` unchanged.
    pub fn scale(q: Rational, e: HExpr) -> Result<Self> {
        if q.is_negative() {
            return Err(ExprError::NegativeScale(q.to_string()));
        }
        if q.is_one() {
            return Ok(e);
        }
        Ok(HExpr::Scale(q, Box::new(e)))
    }

    pub fn sum(children: Vec<HExpr>) -> Result<Self> {
        if children.is_empty() {
            return Err(ExprError::Arity("sum", 1));
        }
        Ok(HExpr::Sum(children))
    }

    /// `max` of the children; a single child is returned as is.
    pub fn max(mut children: Vec<HExpr>) -> Result<Self> {
        match children.len() {
            0 => Err(ExprError::Arity("max", 1)),
            1 => Ok(children.pop().unwrap()),
            _ => Ok(HExpr::Max(children)),
        }
    }

    pub fn sum_vars(vars: &[usize]) -> Result<Self> {
        Self::sum(vars.iter().map(|&j| HExpr::Var(j)).collect())
    }

    /// One past the largest variable index used, `0` for constants.
    pub fn arity(&self) -> usize {
        match self {
            HExpr::Var(j) => j + 1,
            HExpr::Const(_) => 0,
            HExpr::Scale(_, e) => e.arity(),
            HExpr::Sum(c) | HExpr::Max(c) => c.iter().map(HExpr::arity).max().unwrap_or(0),
        }
    }

    pub fn variables(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            HExpr::Var(j) => out.push(*j),
            HExpr::Const(_) => {}
            HExpr::Scale(_, e) => e.collect_vars(out),
            HExpr::Sum(c) | HExpr::Max(c) => c.iter().for_each(|e| e.collect_vars(out)),
        }
    }

    /// Exact evaluation; every component of `h` must lie in `[0,1]`.
    pub fn eval(&self, h: &[Rational]) -> Result<Rational> {
        for (index, v) in h.iter().enumerate() {
            if v.is_negative() || *v > Rational::one() {
                return Err(ExprError::OutOfRange {
                    index,
                    value: v.to_string(),
                });
            }
        }
        let needed = self.arity();
        if needed > h.len() {
            return Err(ExprError::Dimension {
                needed,
                given: h.len(),
            });
        }
        Ok(self.eval_unchecked(h))
    }

    pub(crate) fn eval_unchecked(&self, h: &[Rational]) -> Rational {
        match self {
            HExpr::Var(j) => h[*j],
            HExpr::Const(q) => *q,
            HExpr::Scale(q, e) => q * e.eval_unchecked(h),
            HExpr::Sum(c) => c.iter().map(|e| e.eval_unchecked(h)).sum(),
            HExpr::Max(c) => c
                .iter()
                .map(|e| e.eval_unchecked(h))
                .max()
                .expect("max has children"),
        }
    }

    /// Floating-point evaluation for the geometry layer.
    pub fn eval_f64(&self, h: &[f64]) -> f64 {
        match self {
            HExpr::Var(j) => h[*j],
            HExpr::Const(q) => to_f64(q),
            HExpr::Scale(q, e) => to_f64(q) * e.eval_f64(h),
            HExpr::Sum(c) => c.iter().map(|e| e.eval_f64(h)).sum(),
            HExpr::Max(c) => c
                .iter()
                .map(|e| e.eval_f64(h))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Renames `h_j` to `h_{map[j]}`.
    pub fn rename(&self, map: &[usize]) -> HExpr {
        match self {
            HExpr::Var(j) => HExpr::Var(map[*j]),
            HExpr::Const(q) => HExpr::Const(*q),
            HExpr::Scale(q, e) => HExpr::Scale(*q, Box::new(e.rename(map))),
            HExpr::Sum(c) => HExpr::Sum(c.iter().map(|e| e.rename(map)).collect()),
            HExpr::Max(c) => HExpr::Max(c.iter().map(|e| e.rename(map)).collect()),
        }
    }

    /// Max-of-affine normal form over `n` variables, with coefficientwise
    /// dominated pieces removed.
    pub fn affine_forms(&self, n: usize) -> Vec<AffineForm> {
        match self {
            HExpr::Var(j) => {
                let mut f = AffineForm::constant(n, Rational::zero());
                f.coeffs[*j] = Rational::one();
                vec![f]
            }
            HExpr::Const(q) => vec![AffineForm::constant(n, *q)],
            HExpr::Scale(q, e) => e.affine_forms(n).iter().map(|f| f.scaled(q)).collect(),
            HExpr::Sum(c) => {
                let mut acc = vec![AffineForm::constant(n, Rational::zero())];
                for child in c {
                    let forms = child.affine_forms(n);
                    let mut next = Vec::with_capacity(acc.len() * forms.len());
                    for a in &acc {
                        for b in &forms {
                            next.push(a.added(b));
                        }
                    }
                    acc = prune_forms(next);
                }
                acc
            }
            HExpr::Max(c) => prune_forms(c.iter().flat_map(|e| e.affine_forms(n)).collect()),
        }
    }

    /// Rebuilds an expression from a list of affine pieces.
    pub fn from_forms(forms: &[AffineForm]) -> HExpr {
        let pieces: Vec<HExpr> = forms.iter().map(AffineForm::to_expr).collect();
        HExpr::max(pieces).unwrap_or_else(|_| HExpr::zero())
    }

    pub fn to_prefix(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<HExpr> {
        let mut p = Parser {
            s: s.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for HExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, name: &str, c: &[HExpr]) -> fmt::Result {
            write!(f, "{name}(")?;
            for (i, e) in c.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str(")")
        }
        match self {
            HExpr::Var(j) => write!(f, "h{}", j + 1),
            HExpr::Const(q) => f.write_str(&fmt_rational(q)),
            HExpr::Scale(q, e) => write!(f, "scale({},{e})", fmt_rational(q)),
            HExpr::Sum(c) => list(f, "sum", c),
            HExpr::Max(c) => list(f, "max", c),
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ExprError {
        ExprError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("")
    }

    fn integer(&mut self) -> Result<i128> {
        self.skip_ws();
        let start = self.pos;
        if self.s.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err("expected an integer"))
    }

    fn rational(&mut self) -> Result<Rational> {
        let n = self.integer()?;
        if self.eat(b'/') {
            let d = self.integer()?;
            if d == 0 {
                return Err(self.err("zero denominator"));
            }
            Ok(rat(n, d))
        } else {
            Ok(int(n))
        }
    }

    fn args(&mut self) -> Result<Vec<HExpr>> {
        if !self.eat(b'(') {
            return Err(self.err("expected '('"));
        }
        let mut out = vec![self.expr()?];
        while self.eat(b',') {
            out.push(self.expr()?);
        }
        if !self.eat(b')') {
            return Err(self.err("expected ')'"));
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<HExpr> {
        self.skip_ws();
        match self.s.get(self.pos) {
            Some(c) if c.is_ascii_digit() || *c == b'-' => Ok(HExpr::Const(self.rational()?)),
            Some(_) => {
                let start = self.pos;
                let name = self.ident().to_string();
                match name.as_str() {
                    "h" => {
                        let j = self.integer()?;
                        if j < 1 {
                            return Err(self.err("variables start at h1"));
                        }
                        Ok(HExpr::Var(j as usize - 1))
                    }
                    "sum" => HExpr::sum(self.args()?),
                    "max" => {
                        let a = self.args()?;
                        if a.len() < 2 {
                            return Err(self.err("max needs at least 2 arguments"));
                        }
                        Ok(HExpr::Max(a))
                    }
                    "scale" => {
                        if !self.eat(b'(') {
                            return Err(self.err("expected '('"));
                        }
                        let q = self.rational()?;
                        if !self.eat(b',') {
                            return Err(self.err("expected ','"));
                        }
                        let e = self.expr()?;
                        if !self.eat(b')') {
                            return Err(self.err("expected ')'"));
                        }
                        if q.is_negative() {
                            return Err(ExprError::NegativeScale(q.to_string()));
                        }
                        Ok(HExpr::Scale(q, Box::new(e)))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.err("unknown token"))
                    }
                }
            }
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// `coeffs · h + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineForm {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl AffineForm {
    pub fn constant(n: usize, c: Rational) -> Self {
        Self {
            coeffs: vec![Rational::zero(); n],
            constant: c,
        }
    }

    fn scaled(&self, q: &Rational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
            constant: self.constant * q,
        }
    }

    fn added(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            constant: self.constant + other.constant,
        }
    }

    pub fn eval(&self, h: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(h)
            .map(|(c, x)| c * x)
            .sum::<Rational>()
            + self.constant
    }

    /// `self ≤ other` at every `h ≥ 0`, judged coefficientwise.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.constant <= other.constant
            && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a <= b)
    }

    /// `scale(1/d, sum(vars…, c))` with integer numerators where possible.
    pub fn to_expr(&self) -> HExpr {
        let den = self
            .coeffs
            .iter()
            .chain(std::iter::once(&self.constant))
            .fold(1i128, |acc, q| acc.lcm(q.denom()));
        let mut terms = Vec::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            let k = (c * int(den)).to_integer();
            if k == 0 {
                continue;
            }
            let v = HExpr::Var(j);
            terms.push(if k == 1 {
                v
            } else {
                HExpr::Scale(int(k), Box::new(v))
            });
        }
        let c = (self.constant * int(den)).to_integer();
        if c != 0 || terms.is_empty() {
            terms.push(HExpr::Const(int(c)));
        }
        let body = if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            HExpr::Sum(terms)
        };
        if den == 1 {
            body
        } else {
            HExpr::Scale(rat(1, den), Box::new(body))
        }
    }
}

/// Removes duplicates and pieces dominated by another piece.
pub fn prune_forms(mut forms: Vec<AffineForm>) -> Vec<AffineForm> {
    forms.sort();
    forms.dedup();
    let keep: Vec<bool> = (0..forms.len())
        .map(|i| {
            !forms
                .iter()
                .enumerate()
                .any(|(j, g)| i != j && forms[i].dominated_by(g))
        })
        .collect();
    forms
        .into_iter()
        .zip(keep)
        .filter_map(|(f, k)| k.then_some(f))
        .collect()
}

/// Integer image of a normal form: value at `x / scale` is
/// `(coeffs · x + consts · scale) / (den · scale)`.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    pub n: usize,
    pub den: i128,
    pub coeffs: Vec<Vec<i128>>,
    pub consts: Vec<i128>,
}

impl CompiledExpr {
    pub fn new(e: &HExpr, n: usize) -> Self {
        let forms = e.affine_forms(n);
        let den = forms
            .iter()
            .flat_map(|f| f.coeffs.iter().chain(std::iter::once(&f.constant)))
            .fold(1i128, |acc, q| acc.lcm(q.denom()));
        let scale = |q: &Rational| (q * int(den)).to_integer();
        Self {
            n,
            den,
            coeffs: forms
                .iter()
                .map(|f| f.coeffs.iter().map(scale).collect())
                .collect(),
            consts: forms.iter().map(|f| scale(&f.constant)).collect(),
        }
    }

    /// Whether `e(x / scale) < 1`.
    pub fn below_one(&self, x: &[i128], scale: i128) -> bool {
        let bound = self.den * scale;
        self.coeffs
            .iter()
            .zip(&self.consts)
            .all(|(a, c)| a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<i128>() + c * scale < bound)
    }
}
