//! Structural invariants of the layered index under random updates.

mod common;

use std::collections::HashMap;

use common::brute_nn;
use mvd::{MvdConfig, MvdIndex, Point, PointId};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Op {
    Insert(f64, f64),
    /// Deletes the live point at this position of the sorted id list.
    Delete(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| Op::Insert(x, y)),
        any::<usize>().prop_map(Op::Delete),
    ]
}

/// Euler relation, edge bound and nesting, counted from the raw edge and
/// triangle lists.
fn check_layers(idx: &MvdIndex) -> Result<(), TestCaseError> {
    for (i, layer) in idx.layers().iter().enumerate() {
        layer
            .validate()
            .map_err(|e| TestCaseError::fail(format!("layer {i}: {e}")))?;
        let v = layer.len() as i64;
        if v < 3 {
            continue;
        }
        let e = layer.edges().len() as i64;
        let f = layer.triangles().len() as i64 + 1;
        prop_assert_eq!(v - e + f, 2, "layer {} V={} E={} F={}", i, v, e, f);
        prop_assert!(e <= 3 * v - 6, "layer {} E={} V={}", i, e, v);
    }
    idx.check_nesting().map_err(TestCaseError::fail)?;
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn layers_stay_planar_and_nested(
        n in 0usize..2000,
        k in 2usize..12,
        seed in any::<u64>(),
        demotion in any::<bool>(),
        ops in proptest::collection::vec(op(), 0..300),
    ) {
        let data: Vec<(PointId, Point)> = mvd::bench::gen_points(mvd::bench::Distribution::Uniform, n.max(1), seed)
            .into_iter()
            .take(n)
            .collect();
        let mut idx = MvdIndex::build_with(&data, MvdConfig { k, seed, demotion }).unwrap();
        let mut live: HashMap<PointId, Point> = data.iter().copied().collect();
        check_layers(&idx)?;
        for (step, op) in ops.into_iter().enumerate() {
            match op {
                Op::Insert(x, y) => {
                    let p = Point::new(x, y);
                    if live.values().any(|&q| q == p) {
                        continue;
                    }
                    live.insert(idx.insert_point(p).unwrap(), p);
                }
                Op::Delete(pos) if !live.is_empty() => {
                    let mut ids: Vec<PointId> = live.keys().copied().collect();
                    ids.sort();
                    let id = ids[pos % ids.len()];
                    idx.delete(id).unwrap();
                    live.remove(&id);
                }
                Op::Delete(_) => continue,
            }
            if step % 25 == 0 {
                check_layers(&idx)?;
            }
        }
        check_layers(&idx)?;
        prop_assert_eq!(idx.len(), live.len());
        let points: Vec<(PointId, Point)> = live.into_iter().collect();
        if !points.is_empty() {
            for i in 0..50 {
                let q = Point::new((i % 7) as f64 / 6.0, (i / 7) as f64 / 7.0);
                prop_assert_eq!(idx.nn(q).unwrap().0, brute_nn(&points, q));
            }
        }
    }
}
