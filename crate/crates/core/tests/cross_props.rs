use across_core::cross::*;
use proptest::prelude::*;

fn matrix(max_n: usize) -> impl Strategy<Value = CrossMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(1u32..(1 << n), 1..8)
            .prop_map(move |masks| CrossMatrix::from_masks(&masks, n).unwrap())
    })
}

fn matrix_and_perm() -> impl Strategy<Value = (CrossMatrix, Vec<usize>)> {
    matrix(5).prop_flat_map(|m| {
        let n = m.n_factors();
        (Just(m), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

fn flags(n: usize) -> Vec<PointFlags> {
    (0..1u32 << n)
        .map(|f| PointFlags::new((0..n).map(|j| f >> j & 1 == 1).collect()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduce_is_idempotent(m in matrix(5)) {
        let r = reduce(&m);
        prop_assert_eq!(reduce(&r), r.clone());
        prop_assert!(r.is_antichain());
    }

    #[test]
    fn reduce_keeps_the_union(m in matrix(5)) {
        let r = reduce(&m);
        for p in flags(m.n_factors()) {
            prop_assert_eq!(contains_point(&m, &p).unwrap(), contains_point(&r, &p).unwrap());
        }
    }

    #[test]
    fn canonical_form_is_orbit_invariant((m, perm) in matrix_and_perm()) {
        let moved = m.permute_columns(&perm).unwrap();
        prop_assert_eq!(canonical_form(&moved).0, canonical_form(&m).0);
    }

    #[test]
    fn canonical_perm_reproduces_the_form(m in matrix(5)) {
        let (c, perm) = canonical_form(&m);
        prop_assert_eq!(m.permute_columns(&perm).unwrap(), c);
    }

    #[test]
    fn x_n1_coverage_is_columnwise(m in matrix(5)) {
        let n = m.n_factors();
        let by_points = (0..n).all(|k| {
            let p = PointFlags::new((0..n).map(|j| j != k).collect());
            contains_point(&m, &p).unwrap()
        });
        let by_columns = (0..n).all(|k| m.rows().iter().any(|r| r.bits()[k]));
        prop_assert_eq!(covers_x_n1(&m), by_columns);
        prop_assert_eq!(covers_x_n1(&m), by_points);
    }

    #[test]
    fn text_round_trip(m in matrix(5)) {
        let back: CrossMatrix = m.to_text().parse().unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn nk_crosses_classify_exhaustively() {
    for n in 2..=5 {
        for k in 1..=n {
            let m = CrossMatrix::nk_cross(n, k).unwrap();
            assert_eq!(classify(&m).nk_order(n), Some(k), "n={n} k={k}");
            let expected = if k == n {
                Classification::FullProduct
            } else if k == 1 {
                Classification::ClassicalCross
            } else {
                Classification::NkCross(k)
            };
            assert_eq!(classify(&m), expected);
        }
    }
}

#[test]
fn reduce_preserves_union_exhaustively_for_small_n() {
    // every row set over two and three factors
    for n in 2..=3usize {
        let rows = (1u32 << n) - 1;
        for set in 1u32..(1 << rows) {
            let masks: Vec<u32> = (0..rows)
                .filter(|i| set >> i & 1 == 1)
                .map(|i| i + 1)
                .collect();
            let m = CrossMatrix::from_masks(&masks, n).unwrap();
            let r = reduce(&m);
            for p in flags(n) {
                assert_eq!(
                    contains_point(&m, &p).unwrap(),
                    contains_point(&r, &p).unwrap()
                );
            }
        }
    }
}

#[test]
fn enumeration_small_cases_are_empty() {
    let two = [
        EnumFilter::Antichain,
        EnumFilter::ColumnCovered,
        EnumFilter::NotNk,
    ];
    assert!(enumerate(2, &two).unwrap().is_empty());
    assert!(enumerate(3, &EnumFilter::ALL).unwrap().is_empty());
    // without the two-fold filter only {001, 110} survives over three factors
    let three = enumerate(3, &EnumFilter::PAPER_N4).unwrap();
    assert_eq!(
        three,
        vec![CrossMatrix::from_strs(&["001", "110"]).unwrap()]
    );
}

#[test]
fn enumeration_is_sorted_canonical_and_stable() {
    let a = enumerate(4, &EnumFilter::PAPER_N4).unwrap();
    let b = enumerate(4, &EnumFilter::PAPER_N4).unwrap();
    assert_eq!(a, b);
    assert!(a.windows(2).all(|w| w[0] < w[1]));
    for m in &a {
        assert_eq!(&canonical_form(m).0, m);
        assert!(m.is_antichain() && covers_x_n1(m) && full_columns(m).is_empty());
    }
}

#[test]
fn enumeration_rejects_large_n() {
    assert!(enumerate(6, &EnumFilter::ALL).is_err());
    assert!(enumerate(5, &[EnumFilter::ColumnCovered]).is_err());
}
