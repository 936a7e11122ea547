//! Defining matrices of A-crosses.
//!
//! A row `α ∈ {0,1}^N` selects the branch `X_α = ∏ (D_j if α_j = 1 else A_j)`;
//! an A-cross is the union of the branches of its rows. Everything in this
//! module is exact combinatorics on those rows: ordering, reduction to an
//! antichain, classification, membership of abstract points, canonical forms
//! under column permutations and exhaustive enumeration for small `N`.
//!
//! Factor indices are 0-based throughout the API. Text renderings of
//! expressions use `h1..hN`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest `N` accepted by [`enumerate`].
pub const MAX_ENUMERATION_FACTORS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrossError {
    #[error("dimension mismatch: expected {expected} factors, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("an index needs at least 2 factors, got {0}")]
    TooFewFactors(usize),
    #[error("zero row: every branch needs at least one D-factor")]
    ZeroRow,
    #[error("a cross matrix needs at least one row")]
    NoRows,
    #[error("enumeration size {n} out of range (2..={max})")]
    Size { n: usize, max: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, CrossError>;

/// One row `α` of a defining matrix. Bit `j` is `true` when factor `j`
/// carries `D_j` and `false` when it carries `A_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryIndex {
    bits: Vec<bool>,
}

impl BinaryIndex {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.len() < 2 {
            return Err(CrossError::TooFewFactors(bits.len()));
        }
        if !bits.iter().any(|&b| b) {
            return Err(CrossError::ZeroRow);
        }
        Ok(Self { bits })
    }

    /// Builds an index from a `0`/`1` string such as `"0110"`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(parse_bits(s.trim(), 0)?)
    }

    pub fn from_mask(mask: u32, n: usize) -> Result<Self> {
        Self::new(mask_to_bits(mask, n))
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `|α|`, the number of D-factors.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Bit mask with column 0 as the most significant bit, so integer order
    /// agrees with lexicographic order.
    pub fn to_mask(&self) -> u32 {
        bits_to_mask(&self.bits)
    }

    pub fn complement(&self) -> Vec<bool> {
        self.bits.iter().map(|b| !b).collect()
    }
}

impl fmt::Display for BinaryIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn parse_bits(s: &str, line: usize) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CrossError::Parse {
                line,
                msg: format!("unexpected character {other:?}"),
            }),
        })
        .collect()
}

pub(crate) fn bits_to_mask(bits: &[bool]) -> u32 {
    bits.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b))
}

pub(crate) fn mask_to_bits(mask: u32, n: usize) -> Vec<bool> {
    (0..n).map(|j| mask >> (n - 1 - j) & 1 == 1).collect()
}

fn check_len(a: &[bool], b: &[bool]) -> Result<()> {
    if a.len() != b.len() {
        return Err(CrossError::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Lexicographic comparison of two rows of equal length.
pub fn lex_compare(a: &BinaryIndex, b: &BinaryIndex) -> Result<Ordering> {
    check_len(&a.bits, &b.bits)?;
    Ok(a.bits.cmp(&b.bits))
}

/// `a ≤ b` componentwise, i.e. the branch of `a` is contained in the branch of `b`.
pub fn dominates(a: &BinaryIndex, b: &BinaryIndex) -> Result<bool> {
    check_len(&a.bits, &b.bits)?;
    Ok(bits_le(&a.bits, &b.bits))
}

pub(crate) fn bits_le(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| !x || y)
}

/// Index bookkeeping for `D_α` and `A_α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorSplit {
    pub d_slots: Vec<usize>,
    pub a_slots: Vec<usize>,
}

pub fn split(a: &BinaryIndex) -> FactorSplit {
    split_bits(&a.bits)
}

pub(crate) fn split_bits(bits: &[bool]) -> FactorSplit {
    let (d, a): (Vec<_>, Vec<_>) = (0..bits.len()).partition(|&j| bits[j]);
    FactorSplit {
        d_slots: d,
        a_slots: a,
    }
}

/// Abstract point of `D_1 × … × D_N`: `in_a[j]` tells whether the `j`-th
/// coordinate lies in `A_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointFlags {
    pub in_a: Vec<bool>,
}

impl PointFlags {
    pub fn new(in_a: Vec<bool>) -> Self {
        Self { in_a }
    }
}

/// The defining matrix of an A-cross: distinct nonzero rows kept in
/// ascending lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CrossMatrix {
    n_factors: usize,
    rows: Vec<BinaryIndex>,
}

impl CrossMatrix {
    pub fn new(rows: Vec<BinaryIndex>) -> Result<Self> {
        let first = rows.first().ok_or(CrossError::NoRows)?;
        let n = first.len();
        for r in &rows {
            if r.len() != n {
                return Err(CrossError::Dimension {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        let rows: BTreeSet<BinaryIndex> = rows.into_iter().collect();
        Ok(Self {
            n_factors: n,
            rows: rows.into_iter().collect(),
        })
    }

    pub fn from_bit_rows(rows: Vec<Vec<bool>>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(BinaryIndex::new)
                .collect::<Result<_>>()?,
        )
    }

    /// Convenience constructor from strings like `["0011", "1100"]`.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|s| BinaryIndex::parse(s))
                .collect::<Result<_>>()?,
        )
    }

    pub fn from_masks(masks: &[u32], n: usize) -> Result<Self> {
        Self::new(
            masks
                .iter()
                .map(|&m| BinaryIndex::from_mask(m, n))
                .collect::<Result<_>>()?,
        )
    }

    /// All rows of `𝔦(N, k)`.
    pub fn nk_cross(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(CrossError::Dimension {
                expected: n,
                found: k,
            });
        }
        let masks: Vec<u32> = (1u32..(1 << n))
            .filter(|m| m.count_ones() as usize == k)
            .collect();
        Self::from_masks(&masks, n)
    }

    pub fn n_factors(&self) -> usize {
        self.n_factors
    }

    pub fn rows(&self) -> &[BinaryIndex] {
        &self.rows
    }

    pub fn masks(&self) -> Vec<u32> {
        self.rows.iter().map(BinaryIndex::to_mask).collect()
    }

    pub fn is_antichain(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, a)| {
            self.rows
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !bits_le(&a.bits, &b.bits))
        })
    }

    /// Rows with the column permutation applied: column `i` of the result is
    /// column `perm[i]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_factors {
            return Err(CrossError::Dimension {
                expected: self.n_factors,
                found: perm.len(),
            });
        }
        Self::from_bit_rows(
            self.rows
                .iter()
                .map(|r| perm.iter().map(|&p| r.bits[p]).collect())
                .collect(),
        )
    }

    /// Rows restricted to `cols` (in that order); duplicates merge.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        Self::from_bit_rows(
            self.rows
                .iter()
                .map(|r| cols.iter().map(|&p| r.bits[p]).collect())
                .collect(),
        )
    }

    /// Parses the matrix text format: one `0`/`1` row per line, blank lines
    /// and `#` comments ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut width = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bits = parse_bits(line, i + 1)?;
            match width {
                None => width = Some(bits.len()),
                Some(w) if w != bits.len() => {
                    return Err(CrossError::Parse {
                        line: i + 1,
                        msg: format!("row has {} columns, expected {w}", bits.len()),
                    })
                }
                _ => {}
            }
            rows.push(BinaryIndex::new(bits).map_err(|e| CrossError::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?);
        }
        Self::new(rows)
    }

    pub fn to_text(&self) -> String {
        self.rows.iter().map(|r| format!("{r}\n")).collect()
    }
}

impl fmt::Display for CrossMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| r.to_string()).collect();
        write!(f, "{{{}}}", rows.join(","))
    }
}

impl FromStr for CrossMatrix {
    type Err = CrossError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_text(s)
    }
}

/// Drops every row dominated by another row.
pub fn reduce(m: &CrossMatrix) -> CrossMatrix {
    let rows: Vec<BinaryIndex> = m
        .rows
        .iter()
        .filter(|a| !m.rows.iter().any(|b| b != *a && bits_le(&a.bits, &b.bits)))
        .cloned()
        .collect();
    CrossMatrix {
        n_factors: m.n_factors,
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum Classification {
    /// Single all-ones row, the `(N,N)`-cross.
    FullProduct,
    /// The `(N,1)`-cross.
    ClassicalCross,
    /// The `(N,k)`-cross for `1 < k < N`.
    NkCross(usize),
    /// Two rows `{α, ¬α}`, a two-fold cross after grouping variables.
    TwoFoldGrouped(String),
    General,
}

impl Classification {
    /// `Some(k)` whenever the row set is exactly `𝔦(N, k)`.
    pub fn nk_order(&self, n: usize) -> Option<usize> {
        match self {
            Classification::FullProduct => Some(n),
            Classification::ClassicalCross => Some(1),
            Classification::NkCross(k) => Some(*k),
            _ => None,
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Classification::FullProduct => "full-product".into(),
            Classification::ClassicalCross => "classical-cross".into(),
            Classification::NkCross(k) => format!("nk-cross({k})"),
            Classification::TwoFoldGrouped(a) => format!("two-fold-grouped({a})"),
            Classification::General => "general".into(),
        }
    }
}

pub fn classify(m: &CrossMatrix) -> Classification {
    let n = m.n_factors;
    if let Some(k) = nk_order_of(m) {
        return if k == n {
            Classification::FullProduct
        } else if k == 1 {
            Classification::ClassicalCross
        } else {
            Classification::NkCross(k)
        };
    }
    if m.rows.len() == 2 {
        let (a, b) = (&m.rows[0], &m.rows[1]);
        if a.complement() == b.bits {
            return Classification::TwoFoldGrouped(a.to_string());
        }
    }
    Classification::General
}

fn nk_order_of(m: &CrossMatrix) -> Option<usize> {
    let k = m.rows[0].weight();
    if m.rows.iter().any(|r| r.weight() != k) {
        return None;
    }
    let expected = binomial(m.n_factors, k);
    (m.rows.len() == expected).then_some(k)
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Whether every column carries a 1 somewhere, i.e. `X_{N,1} ⊆ Q`.
pub fn covers_x_n1(m: &CrossMatrix) -> bool {
    (0..m.n_factors).all(|k| m.rows.iter().any(|r| r.bits[k]))
}

/// Columns equal to 1 in every row; these factors split off as full `D_k`.
pub fn full_columns(m: &CrossMatrix) -> Vec<usize> {
    (0..m.n_factors)
        .filter(|&k| m.rows.iter().all(|r| r.bits[k]))
        .collect()
}

pub fn contains_point(m: &CrossMatrix, p: &PointFlags) -> Result<bool> {
    if p.in_a.len() != m.n_factors {
        return Err(CrossError::Dimension {
            expected: m.n_factors,
            found: p.in_a.len(),
        });
    }
    Ok(m.rows
        .iter()
        .any(|r| r.bits.iter().zip(&p.in_a).all(|(&d, &a)| d || a)))
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| cur[i] < cur[i + 1])
        else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

fn permuted_masks(masks: &[u32], n: usize, perm: &[usize]) -> Vec<u32> {
    let mut out: Vec<u32> = masks
        .iter()
        .map(|&m| {
            perm.iter()
                .fold(0u32, |acc, &p| (acc << 1) | (m >> (n - 1 - p) & 1))
        })
        .collect();
    out.sort_unstable();
    out
}

/// Lexicographically minimal column permutation of `m`, with the permutation
/// realising it (column `i` of the result is column `perm[i]` of `m`).
pub fn canonical_form(m: &CrossMatrix) -> (CrossMatrix, Vec<usize>) {
    let n = m.n_factors;
    let masks = m.masks();
    let (best, perm) = permutations(n)
        .into_iter()
        .map(|p| (permuted_masks(&masks, n, &p), p))
        .min()
        .expect("at least the identity permutation");
    let rows = best
        .iter()
        .map(|&b| BinaryIndex {
            bits: mask_to_bits(b, n),
        })
        .collect();
    (CrossMatrix { n_factors: n, rows }, perm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EnumFilter {
    Antichain,
    ColumnCovered,
    NoFullColumn,
    NotNk,
    NotTwofoldGrouped,
}

impl EnumFilter {
    pub const ALL: [EnumFilter; 5] = [
        EnumFilter::Antichain,
        EnumFilter::ColumnCovered,
        EnumFilter::NoFullColumn,
        EnumFilter::NotNk,
        EnumFilter::NotTwofoldGrouped,
    ];

    /// The filter set under which the four-factor examples are listed.
    pub const PAPER_N4: [EnumFilter; 4] = [
        EnumFilter::Antichain,
        EnumFilter::ColumnCovered,
        EnumFilter::NotNk,
        EnumFilter::NoFullColumn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnumFilter::Antichain => "antichain",
            EnumFilter::ColumnCovered => "column-covered",
            EnumFilter::NoFullColumn => "no-full-column",
            EnumFilter::NotNk => "not-nk",
            EnumFilter::NotTwofoldGrouped => "not-twofold-grouped",
        }
    }
}

impl FromStr for EnumFilter {
    type Err = CrossError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        EnumFilter::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| CrossError::Parse {
                line: 0,
                msg: format!("unknown filter {s:?}"),
            })
    }
}

fn passes(m: &CrossMatrix, filters: &BTreeSet<EnumFilter>) -> bool {
    filters.iter().all(|f| match f {
        EnumFilter::Antichain => m.is_antichain(),
        EnumFilter::ColumnCovered => covers_x_n1(m),
        EnumFilter::NoFullColumn => full_columns(m).is_empty(),
        EnumFilter::NotNk => classify(m).nk_order(m.n_factors).is_none(),
        EnumFilter::NotTwofoldGrouped => !matches!(classify(m), Classification::TwoFoldGrouped(_)),
    })
}

/// All canonical matrices over `{0,1}^n` passing `filters`, sorted.
///
/// Without the antichain filter every nonempty set of nonzero rows is a
/// candidate, which is only tractable up to `n = 4`.
pub fn enumerate(n: usize, filters: &[EnumFilter]) -> Result<Vec<CrossMatrix>> {
    if !(2..=MAX_ENUMERATION_FACTORS).contains(&n) {
        return Err(CrossError::Size {
            n,
            max: MAX_ENUMERATION_FACTORS,
        });
    }
    let filters: BTreeSet<EnumFilter> = filters.iter().copied().collect();
    let candidates = if filters.contains(&EnumFilter::Antichain) {
        antichains(n)
    } else {
        if n > 4 {
            return Err(CrossError::Size { n, max: 4 });
        }
        all_row_sets(n)
    };
    let mut seen = BTreeSet::new();
    for masks in candidates {
        let m = CrossMatrix::from_masks(&masks, n)?;
        if passes(&m, &filters) {
            seen.insert(canonical_form(&m).0);
        }
    }
    Ok(seen.into_iter().collect())
}

/// Nonempty antichains of nonzero vectors in `{0,1}^n`, as mask lists.
fn antichains(n: usize) -> Vec<Vec<u32>> {
    fn comparable(a: u32, b: u32) -> bool {
        a & b == a || a & b == b
    }
    fn go(next: u32, top: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        for m in next..top {
            if cur.iter().all(|&c| !comparable(c, m)) {
                cur.push(m);
                out.push(cur.clone());
                go(m + 1, top, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(1, 1 << n, &mut Vec::new(), &mut out);
    out
}

fn all_row_sets(n: usize) -> Vec<Vec<u32>> {
    let rows = (1u32 << n) - 1;
    (1u64..(1u64 << rows))
        .map(|set| {
            (0..rows)
                .filter(|i| set >> i & 1 == 1)
                .map(|i| i + 1)
                .collect()
        })
        .collect()
}

/// A set of branches over some factors where all-`A` rows are allowed.
/// Used for the sets `B` that appear inside the recursive envelope
/// construction; unlike [`CrossMatrix`] it may contain the zero row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BranchSet {
    pub n_factors: usize,
    pub rows: Vec<Vec<bool>>,
}

impl BranchSet {
    /// Sorted, deduplicated and reduced to an antichain.
    pub fn new(n_factors: usize, rows: Vec<Vec<bool>>) -> Self {
        let set: BTreeSet<Vec<bool>> = rows.into_iter().collect();
        let rows: Vec<Vec<bool>> = set.iter().cloned().collect();
        let reduced = rows
            .iter()
            .filter(|a| !rows.iter().any(|b| b != *a && bits_le(a, b)))
            .cloned()
            .collect();
        Self {
            n_factors,
            rows: reduced,
        }
    }

    pub fn is_single_row(&self) -> bool {
        self.rows.len() == 1
    }

    /// `Some(k)` when the rows are exactly the weight-`k` vectors.
    pub fn nk_order(&self) -> Option<usize> {
        let k = self.rows.first()?.iter().filter(|&&b| b).count();
        let uniform = self
            .rows
            .iter()
            .all(|r| r.iter().filter(|&&b| b).count() == k);
        (uniform && self.rows.len() == binomial(self.n_factors, k)).then_some(k)
    }
}

impl fmt::Display for BranchSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect();
        write!(f, "{{{}}}", rows.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(s: &str) -> BinaryIndex {
        BinaryIndex::parse(s).unwrap()
    }

    fn mat(rows: &[&str]) -> CrossMatrix {
        CrossMatrix::from_strs(rows).unwrap()
    }

    #[test]
    fn lex_order() {
        assert_eq!(lex_compare(&bi("011"), &bi("100")).unwrap(), Ordering::Less);
        assert_eq!(
            lex_compare(&bi("011"), &bi("011")).unwrap(),
            Ordering::Equal
        );
        assert!(lex_compare(&bi("011"), &bi("0110")).is_err());
        let q5 = ["0111", "1001", "1100"];
        let sorted = mat(&q5);
        let listed: Vec<String> = sorted.rows().iter().map(|r| r.to_string()).collect();
        assert_eq!(listed, q5);
    }

    #[test]
    fn dominance() {
        assert!(dominates(&bi("001"), &bi("011")).unwrap());
        assert!(!dominates(&bi("011"), &bi("100")).unwrap());
        assert!(dominates(&bi("11"), &bi("11")).unwrap());
        assert!(dominates(&bi("01"), &bi("011")).is_err());
    }

    #[test]
    fn construction_rejects_bad_rows() {
        assert_eq!(BinaryIndex::parse("000"), Err(CrossError::ZeroRow));
        assert_eq!(BinaryIndex::parse("1"), Err(CrossError::TooFewFactors(1)));
        assert!(CrossMatrix::from_strs(&["01", "011"]).is_err());
        assert_eq!(CrossMatrix::new(vec![]), Err(CrossError::NoRows));
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&mat(&["001", "011"])), mat(&["011"]));
        let anti = mat(&["0011", "0101", "1001"]);
        assert_eq!(reduce(&anti), anti);
        assert_eq!(reduce(&mat(&["01", "10", "11"])), mat(&["11"]));
    }

    #[test]
    fn split_examples() {
        let s = split(&bi("0110"));
        assert_eq!((s.d_slots, s.a_slots), (vec![1, 2], vec![0, 3]));
        let s = split(&bi("11"));
        assert_eq!((s.d_slots, s.a_slots), (vec![0, 1], vec![]));
        let s = split(&bi("0001"));
        assert_eq!((s.d_slots, s.a_slots), (vec![3], vec![0, 1, 2]));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(&mat(&["011", "101", "110"])),
            Classification::NkCross(2)
        );
        assert_eq!(
            classify(&mat(&["011", "100"])),
            Classification::TwoFoldGrouped("011".into())
        );
        assert_eq!(
            classify(&mat(&["0011", "0110", "1001", "1100"])),
            Classification::General
        );
        assert_eq!(classify(&mat(&["111"])), Classification::FullProduct);
        assert_eq!(
            classify(&mat(&["01", "10"])),
            Classification::ClassicalCross
        );
    }

    #[test]
    fn classify_every_nk_cross() {
        for n in 2..=5 {
            for k in 1..=n {
                let m = CrossMatrix::nk_cross(n, k).unwrap();
                assert_eq!(classify(&m).nk_order(n), Some(k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn x_n1_gate() {
        assert!(!covers_x_n1(&mat(&["001", "100"])));
        assert!(covers_x_n1(&mat(&["01", "10"])));
        assert!(covers_x_n1(&mat(&["0111", "1001", "1010", "1100"])));
    }

    #[test]
    fn full_column_examples() {
        assert_eq!(full_columns(&mat(&["011", "101"])), vec![2]);
        assert_eq!(full_columns(&mat(&["11"])), vec![0, 1]);
        assert!(full_columns(&mat(&["01", "10"])).is_empty());
    }

    #[test]
    fn membership() {
        let q4 = mat(&["0011", "0110", "1001", "1100"]);
        let p = PointFlags::new(vec![true, false, false, true]);
        assert!(contains_point(&q4, &p).unwrap());
        assert!(!contains_point(&q4, &PointFlags::new(vec![false; 4])).unwrap());
        assert!(contains_point(&q4, &PointFlags::new(vec![true; 4])).unwrap());
        assert!(contains_point(&q4, &PointFlags::new(vec![true; 3])).is_err());
    }

    #[test]
    fn canonical_examples() {
        let (c, perm) = canonical_form(&mat(&["10"]));
        assert_eq!(c, mat(&["01"]));
        assert_eq!(perm, vec![1, 0]);
        assert_eq!(mat(&["10"]).permute_columns(&perm).unwrap(), c);

        // Frozen from an exhaustive minimum over the 24 column permutations.
        let q1 = mat(&["0001", "0110", "1000"]);
        let shuffled = mat(&["0110", "0001", "1000"]);
        let expected = mat(&["0001", "0010", "1100"]);
        assert_eq!(canonical_form(&q1).0, expected);
        assert_eq!(canonical_form(&shuffled).0, expected);
    }

    #[test]
    fn enumerate_rejects_sizes() {
        assert!(enumerate(1, &[]).is_err());
        assert!(enumerate(6, &[EnumFilter::Antichain]).is_err());
        assert!(enumerate(5, &[EnumFilter::ColumnCovered]).is_err());
    }

    #[test]
    fn text_format() {
        let m = CrossMatrix::parse_text("# Q6\n0011\n\n1100 # last\n1001\n").unwrap();
        assert_eq!(m, mat(&["0011", "1001", "1100"]));
        assert_eq!(m.to_text(), "0011\n1001\n1100\n");
        assert!(matches!(
            CrossMatrix::parse_text("011\n10\n"),
            Err(CrossError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            CrossMatrix::parse_text("012\n"),
            Err(CrossError::Parse { line: 1, .. })
        ));
        assert!(CrossMatrix::parse_text("# nothing\n").is_err());
    }

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(5).len(), 120);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn branch_set_keeps_zero_rows_only_when_alone() {
        let b = BranchSet::new(3, vec![vec![false; 3]]);
        assert_eq!(b.rows.len(), 1);
        let b = BranchSet::new(3, vec![vec![false; 3], vec![true, false, false]]);
        assert_eq!(b.rows, vec![vec![true, false, false]]);
        let x31 = BranchSet::new(
            3,
            vec![
                vec![false, false, true],
                vec![false, true, false],
                vec![true, false, false],
            ],
        );
        assert_eq!(x31.nk_order(), Some(1));
    }
}
