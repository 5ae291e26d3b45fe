use proptest::prelude::*;
use specforge_core::cube::{mask, Cube};
use specforge_core::minimizer::{minimize, minimize_with, CubeCover, MinimizeMode};

/// Truth table of a cover, computed point by point.
fn table(c: &CubeCover) -> Vec<bool> {
    (0..1u64 << c.n).map(|v| c.cubes.iter().any(|q| v & q.care == q.bits & q.care)).collect()
}

fn cover(n: usize, seeds: &[(u64, u64)]) -> CubeCover {
    CubeCover::new(n, seeds.iter().map(|&(c, b)| Cube::new(c & mask(n), b & c & mask(n))).collect())
}

fn disjoint(on: CubeCover, dc: &CubeCover) -> CubeCover {
    let n = on.n;
    CubeCover::new(n, on.cubes.into_iter().filter(|c| !dc.cubes.iter().any(|d| d.intersects(c))).collect())
}

fn seeds(max: usize) -> impl Strategy<Value = Vec<(u64, u64)>> {
    proptest::collection::vec((any::<u64>(), any::<u64>()), 0..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn minimized_covers_keep_their_truth_table(n in 1usize..=10, on in seeds(14), dc in seeds(4)) {
        let dc = cover(n, &dc);
        let on = disjoint(cover(n, &on), &dc);
        let m = minimize(&on, &dc);
        let (want, got, free) = (table(&on), table(&m), table(&dc));
        for v in 0..want.len() {
            if !free[v] {
                prop_assert_eq!(want[v], got[v], "point {:b}", v);
            }
        }
        prop_assert!(m.literals() <= on.literals() || m.len() < on.len());
    }

    #[test]
    fn greedy_and_exact_agree_on_the_function(n in 1usize..=8, on in seeds(10)) {
        let on = cover(n, &on);
        let none = CubeCover::empty(n);
        let e = minimize_with(&on, &none, MinimizeMode::Exact).cover;
        let g = minimize_with(&on, &none, MinimizeMode::Greedy).cover;
        prop_assert_eq!(table(&e), table(&on));
        prop_assert_eq!(table(&g), table(&on));
        prop_assert!(e.len() <= g.len());
    }

    #[test]
    fn pla_text_round_trips(n in 1usize..=10, on in seeds(8), dc in seeds(3)) {
        let on = cover(n, &on);
        let dc = cover(n, &dc);
        let (a, b) = CubeCover::from_pla(&on.to_pla(Some(&dc))).unwrap();
        prop_assert_eq!(table(&a), table(&on));
        prop_assert_eq!(table(&b), table(&dc));
    }
}

#[test]
fn xor_needs_every_point() {
    let on = CubeCover::new(2, vec![Cube::point(2, 0b01), Cube::point(2, 0b10)]);
    assert_eq!(minimize(&on, &CubeCover::empty(2)).len(), 2);
}

#[test]
fn full_space_is_one_empty_cube() {
    let on = CubeCover::new(3, (0..8).map(|v| Cube::point(3, v)).collect());
    let m = minimize(&on, &CubeCover::empty(3));
    assert_eq!(m.cubes, vec![Cube::new(0, 0)]);
}
