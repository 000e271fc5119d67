use std::collections::HashSet;
use std::io::Cursor;

use fpppart::graph_io::{
    gen_complete, gen_preferential, gen_random, read_edge_list, write_edge_list, EdgeReader,
};
use fpppart::metrics::{accumulate, complete_graph_lower_bound, MetricsAccumulator};
use fpppart::partition::{plane_size_for, EdgeAssignment};
use fpppart::{compute_metrics, Edge, Method, Partitioner, PartitionerConfig, ReadOptions};
use proptest::prelude::*;

fn example_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/example.txt")
}

#[test]
fn example_file_reads_eight_edges() {
    let edges = read_edge_list(example_path(), ReadOptions::default()).unwrap();
    assert_eq!(edges.len(), 8);
    assert_eq!(edges[0], Edge::new(0, 1));
    assert_eq!(edges[7], Edge::new(6, 4));
}

#[test]
fn example_rf_is_fifteen_sevenths() {
    let edges = read_edge_list(example_path(), ReadOptions::default()).unwrap();
    for method in [Method::Fpp, Method::Dfpp] {
        let p = Partitioner::new(PartitionerConfig::new(method, 7)).unwrap();
        let out = p.partition(&edges);
        let pids: Vec<u32> = out.iter().map(|a| a.pid).collect();
        // canonical indices of (0:1:0) (0:1:1) (1:1:1) (1:0:1) (0:0:1) (1:1:0) (1:0:1) (1:0:0)
        assert_eq!(pids, vec![4, 5, 3, 1, 6, 2, 1, 0]);
        let r = compute_metrics(&out, 7).unwrap();
        assert_eq!((r.replicas, r.vertices), (15, 7));
        assert!(r.rf < 7f64.sqrt());
    }
}

/// Smallest RF over every split of K_5's ten edges into two halves of five.
fn k5_min_balanced_rf() -> f64 {
    let edges = gen_complete(5).unwrap();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << 10) {
        if mask.count_ones() != 5 {
            continue;
        }
        let mut sides = [HashSet::new(), HashSet::new()];
        for (i, e) in edges.iter().enumerate() {
            let side = &mut sides[(mask >> i & 1) as usize];
            side.insert(e.u);
            side.insert(e.v);
        }
        best = best.min((sides[0].len() + sides[1].len()) as f64 / 5.0);
    }
    best
}

#[test]
fn k5_lower_bound_against_exhaustive_search() {
    let bound = complete_graph_lower_bound(5, 2, 1.0).unwrap();
    assert!((bound - 1.2649).abs() < 1e-4);
    let best = k5_min_balanced_rf();
    assert_eq!(best, 1.8);
    assert!(best >= bound);
}

#[test]
fn plane_order_brackets_sqrt_n() {
    for q in 2u64..=(1 << 16) {
        if fpppart::field::prime_power(q).is_none() {
            continue;
        }
        let n = q * q + q + 1;
        // √n ≤ q+1 ≤ √n + 1, squared to stay in integers
        assert!(n <= (q + 1) * (q + 1));
        assert!(q * q <= n);
    }
    assert_eq!(plane_size_for(553).unwrap(), (23, 553));
}

#[test]
fn generated_graphs_survive_write_then_read() {
    let dir = tempfile::tempdir().unwrap();
    for (name, g) in [
        ("complete", gen_complete(30).unwrap()),
        ("random", gen_random(500, 3000, 1).unwrap()),
        ("pa", gen_preferential(400, 3, 2).unwrap()),
    ] {
        let path = dir.path().join(name);
        write_edge_list(std::fs::File::create(&path).unwrap(), &g).unwrap();
        assert_eq!(read_edge_list(&path, ReadOptions::default()).unwrap(), g);
    }
}

#[test]
fn preferential_degrees_are_skewed() {
    let g = gen_preferential(10_000, 5, 7).unwrap();
    let mut deg = vec![0u64; 10_000];
    for e in &g {
        deg[e.u as usize] += 1;
        deg[e.v as usize] += 1;
    }
    let max = *deg.iter().max().unwrap() as f64;
    let mean = 2.0 * g.len() as f64 / 10_000.0;
    assert!(max >= 5.0 * mean, "max {max} mean {mean}");
}

fn assignments() -> impl Strategy<Value = Vec<EdgeAssignment>> {
    prop::collection::vec(
        (0u64..200, 0u64..200, 0u32..13).prop_map(|(u, v, pid)| EdgeAssignment { u, v, pid }),
        0..300,
    )
}

proptest! {
    #[test]
    fn merge_is_split_invariant(recs in assignments(), cuts in prop::collection::vec(0usize..300, 0..6)) {
        let whole = compute_metrics(&recs, 13).unwrap();
        let mut bounds: Vec<usize> = cuts.into_iter().map(|c| c.min(recs.len())).collect();
        bounds.push(0);
        bounds.push(recs.len());
        bounds.sort_unstable();
        let pieces: Vec<MetricsAccumulator> = bounds
            .windows(2)
            .map(|w| accumulate(&recs[w[0]..w[1]], 13).unwrap())
            .collect();
        let forward = pieces.iter().cloned().reduce(MetricsAccumulator::merge).unwrap().finish();
        let backward = pieces.into_iter().rev().reduce(MetricsAccumulator::merge).unwrap().finish();
        prop_assert_eq!(&forward, &whole);
        prop_assert_eq!(&backward, &whole);
    }

    #[test]
    fn report_invariants(recs in assignments()) {
        let r = compute_metrics(&recs, 13).unwrap();
        prop_assert_eq!(r.edge_counts().iter().sum::<u64>(), r.edges);
        if r.edges > 0 {
            prop_assert!(r.rf >= 1.0);
            prop_assert!(r.alpha <= 1.0 && 1.0 <= r.balance);
        }
    }

    #[test]
    fn edge_list_text_roundtrip(edges in prop::collection::vec((any::<u64>(), any::<u64>()).prop_map(Edge::from), 0..100)) {
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &edges).unwrap();
        let back: Vec<Edge> = EdgeReader::new(Cursor::new(buf), ReadOptions::default())
            .collect::<Result<_, _>>()
            .unwrap();
        prop_assert_eq!(back, edges);
    }
}
