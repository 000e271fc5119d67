//! Partition quality metrics and checks of the replication bounds.
//!
//! Balance is `max_i |E_i| / (|E| / n)`, the replication factor is
//! `Σ_i |V(E_i)| / |V|`, and the load balance `α` is `min_i |E_i| · n / |E|`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::partition::{
    grid_side, mix64, plane_size_for, EdgeAssignment, Method, PartitionError, SurplusPolicy,
};
use crate::plane::ProjPlane;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("partition id {pid} out of range for {parts} partitions")]
    PidOutOfRange { pid: u32, parts: u64 },
    #[error("subsets {0} and {1} are disjoint")]
    DisjointSubsets(usize, usize),
    #[error("subset {subset} contains element {element} outside the ground set of size {ground}")]
    ElementOutOfRange {
        subset: usize,
        element: u32,
        ground: usize,
    },
    #[error("invalid argument: {0}")]
    Domain(String),
}

/// Mergeable exact accumulator: per-partition edge counts plus the sorted
/// set of partitions each vertex appears in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsAccumulator {
    parts: u64,
    edge_counts: Vec<u64>,
    vertex_parts: HashMap<u64, Vec<u32>>,
}

#[inline]
fn insert_sorted(set: &mut Vec<u32>, pid: u32) {
    if let Err(at) = set.binary_search(&pid) {
        set.insert(at, pid);
    }
}

impl MetricsAccumulator {
    pub fn new(parts: u64) -> Self {
        Self {
            parts,
            edge_counts: vec![0; parts as usize],
            vertex_parts: HashMap::new(),
        }
    }

    pub fn add(&mut self, a: &EdgeAssignment) -> Result<(), MetricsError> {
        if a.pid as u64 >= self.parts {
            return Err(MetricsError::PidOutOfRange {
                pid: a.pid,
                parts: self.parts,
            });
        }
        self.add_unchecked(a);
        Ok(())
    }

    fn add_unchecked(&mut self, a: &EdgeAssignment) {
        self.edge_counts[a.pid as usize] += 1;
        insert_sorted(self.vertex_parts.entry(a.u).or_default(), a.pid);
        if a.v != a.u {
            insert_sorted(self.vertex_parts.entry(a.v).or_default(), a.pid);
        }
    }

    pub fn merge(mut self, mut other: Self) -> Self {
        debug_assert_eq!(self.parts, other.parts);
        if other.vertex_parts.len() > self.vertex_parts.len() {
            std::mem::swap(&mut self, &mut other);
        }
        for (c, o) in self.edge_counts.iter_mut().zip(&other.edge_counts) {
            *c += o;
        }
        for (v, theirs) in other.vertex_parts {
            let mine = self.vertex_parts.entry(v).or_default();
            for pid in theirs {
                insert_sorted(mine, pid);
            }
        }
        self
    }

    /// Number of partitions each vertex appears in.
    pub fn vertex_replicas(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        self.vertex_parts.iter().map(|(&v, s)| (v, s.len()))
    }

    pub fn finish(&self) -> MetricsReport {
        let mut replica_sets = vec![0u64; self.parts as usize];
        let mut replicas = 0u64;
        let mut witness: Option<(usize, u64)> = None;
        for (&v, set) in &self.vertex_parts {
            replicas += set.len() as u64;
            for &pid in set {
                replica_sets[pid as usize] += 1;
            }
            let better = match witness {
                None => true,
                Some((best, w)) => set.len() > best || (set.len() == best && v < w),
            };
            if better {
                witness = Some((set.len(), v));
            }
        }
        let mut report = MetricsReport::from_counts(
            self.parts,
            &self.edge_counts,
            replica_sets,
            self.vertex_parts.len() as u64,
            replicas,
        );
        report.max_replicas = Some(witness.map_or(0, |(r, _)| r as u64));
        report.max_replica_vertex = witness.map(|(_, v)| v);
        report
    }
}

/// Exact metrics over a batch of assignments.
pub fn compute_metrics(
    assignments: &[EdgeAssignment],
    parts: u64,
) -> Result<MetricsReport, MetricsError> {
    Ok(accumulate(assignments, parts)?.finish())
}

/// Validates and folds a batch into an accumulator, in parallel when enabled.
pub fn accumulate(
    assignments: &[EdgeAssignment],
    parts: u64,
) -> Result<MetricsAccumulator, MetricsError> {
    if let Some(bad) = assignments.iter().find(|a| a.pid as u64 >= parts) {
        return Err(MetricsError::PidOutOfRange {
            pid: bad.pid,
            parts,
        });
    }
    Ok(par::fold_chunks(
        assignments,
        || MetricsAccumulator::new(parts),
        |acc, a| acc.add_unchecked(a),
        MetricsAccumulator::merge,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartStats {
    pub pid: u32,
    pub edges: u64,
    pub vertices: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub parts: u64,
    pub edges: u64,
    pub vertices: u64,
    /// `Σ_i |V(E_i)|`; `rf = replicas / vertices`.
    pub replicas: u64,
    pub balance: f64,
    pub rf: f64,
    pub alpha: f64,
    /// `None` in sketch mode.
    pub max_replicas: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_replica_vertex: Option<u64>,
    pub empty_parts: u64,
    /// True when vertex counts come from cardinality sketches.
    #[serde(default)]
    pub approximate: bool,
    pub per_part: Vec<PartStats>,
}

impl MetricsReport {
    fn from_counts(
        parts: u64,
        edge_counts: &[u64],
        replica_sets: Vec<u64>,
        vertices: u64,
        replicas: u64,
    ) -> Self {
        let edges: u64 = edge_counts.iter().sum();
        let (balance, alpha) = if edges == 0 {
            (0.0, 0.0)
        } else {
            let scale = parts as f64 / edges as f64;
            let max = edge_counts.iter().copied().max().unwrap_or(0);
            let min = edge_counts.iter().copied().min().unwrap_or(0);
            (max as f64 * scale, min as f64 * scale)
        };
        let rf = if vertices == 0 {
            0.0
        } else {
            replicas as f64 / vertices as f64
        };
        let per_part = edge_counts
            .iter()
            .zip(&replica_sets)
            .enumerate()
            .map(|(pid, (&edges, &vertices))| PartStats {
                pid: pid as u32,
                edges,
                vertices,
            })
            .collect();
        Self {
            parts,
            edges,
            vertices,
            replicas,
            balance,
            rf,
            alpha,
            max_replicas: None,
            max_replica_vertex: None,
            empty_parts: edge_counts.iter().filter(|&&c| c == 0).count() as u64,
            approximate: false,
            per_part,
        }
    }

    pub fn edge_counts(&self) -> Vec<u64> {
        self.per_part.iter().map(|p| p.edges).collect()
    }

    pub fn replica_sets(&self) -> Vec<u64> {
        self.per_part.iter().map(|p| p.vertices).collect()
    }

    /// One row per partition: `pid,edges,vertices`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pid,edges,vertices\n");
        for p in &self.per_part {
            out.push_str(&format!("{},{},{}\n", p.pid, p.edges, p.vertices));
        }
        out
    }
}

const HLL_BITS: u32 = 12;
const HLL_REGISTERS: usize = 1 << HLL_BITS;

/// HyperLogLog distinct counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hll {
    registers: Vec<u8>,
}

impl Default for Hll {
    fn default() -> Self {
        Self {
            registers: vec![0; HLL_REGISTERS],
        }
    }
}

impl Hll {
    pub fn insert(&mut self, item: u64) {
        let h = mix64(item ^ 0x5bd1_e995);
        let idx = (h >> (64 - HLL_BITS)) as usize;
        let rank = ((h << HLL_BITS) | (1 << (HLL_BITS - 1))).leading_zeros() as u8 + 1;
        if rank > self.registers[idx] {
            self.registers[idx] = rank;
        }
    }

    pub fn merge(&mut self, other: &Hll) {
        for (a, &b) in self.registers.iter_mut().zip(&other.registers) {
            *a = (*a).max(b);
        }
    }

    pub fn estimate(&self) -> f64 {
        let m = HLL_REGISTERS as f64;
        let alpha = 0.7213 / (1.0 + 1.079 / m);
        let sum: f64 = self.registers.iter().map(|&r| 2f64.powi(-(r as i32))).sum();
        let raw = alpha * m * m / sum;
        let zeros = self.registers.iter().filter(|&&r| r == 0).count();
        if raw <= 2.5 * m && zeros > 0 {
            m * (m / zeros as f64).ln()
        } else {
            raw
        }
    }
}

/// Approximate accumulator for streams too large for exact vertex sets.
/// Edge counts stay exact; vertex counts come from per-partition sketches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchAccumulator {
    parts: u64,
    edge_counts: Vec<u64>,
    per_part: Vec<Hll>,
    all: Hll,
}

impl SketchAccumulator {
    pub fn new(parts: u64) -> Self {
        Self {
            parts,
            edge_counts: vec![0; parts as usize],
            per_part: vec![Hll::default(); parts as usize],
            all: Hll::default(),
        }
    }

    pub fn add(&mut self, a: &EdgeAssignment) -> Result<(), MetricsError> {
        if a.pid as u64 >= self.parts {
            return Err(MetricsError::PidOutOfRange {
                pid: a.pid,
                parts: self.parts,
            });
        }
        self.add_unchecked(a);
        Ok(())
    }

    fn add_unchecked(&mut self, a: &EdgeAssignment) {
        let i = a.pid as usize;
        self.edge_counts[i] += 1;
        for w in [a.u, a.v] {
            self.per_part[i].insert(w);
            self.all.insert(w);
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        for (c, o) in self.edge_counts.iter_mut().zip(&other.edge_counts) {
            *c += o;
        }
        for (h, o) in self.per_part.iter_mut().zip(&other.per_part) {
            h.merge(o);
        }
        self.all.merge(&other.all);
        self
    }

    pub fn finish(&self) -> MetricsReport {
        let replica_sets: Vec<u64> = self
            .per_part
            .iter()
            .zip(&self.edge_counts)
            .map(|(h, &c)| {
                if c == 0 {
                    0
                } else {
                    h.estimate().round() as u64
                }
            })
            .collect();
        let replicas = replica_sets.iter().sum();
        let vertices = if self.edge_counts.iter().all(|&c| c == 0) {
            0
        } else {
            self.all.estimate().round() as u64
        };
        let mut report = MetricsReport::from_counts(
            self.parts,
            &self.edge_counts,
            replica_sets,
            vertices,
            replicas,
        );
        report.approximate = true;
        report
    }
}

/// Sketch counterpart of [`accumulate`].
pub fn sketch_accumulate(
    assignments: &[EdgeAssignment],
    parts: u64,
) -> Result<SketchAccumulator, MetricsError> {
    if let Some(bad) = assignments.iter().find(|a| a.pid as u64 >= parts) {
        return Err(MetricsError::PidOutOfRange {
            pid: bad.pid,
            parts,
        });
    }
    Ok(par::fold_chunks(
        assignments,
        || SketchAccumulator::new(parts),
        |acc, a| acc.add_unchecked(a),
        SketchAccumulator::merge,
    ))
}

/// Per-vertex replica bound guaranteed by a method at `parts` partitions.
pub fn method_bound(
    method: Method,
    parts: u64,
    surplus: SurplusPolicy,
) -> Result<u64, PartitionError> {
    Ok(match method {
        Method::Fpp | Method::Dfpp => {
            let (q, lines) = plane_size_for(parts)?;
            q + 1 + u64::from(surplus == SurplusPolicy::Fold && lines < parts)
        }
        Method::Edge2d => 2 * grid_side(parts) - 1,
        Method::Torus => {
            let s = grid_side(parts);
            s + s / 2
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub bound: u64,
    pub max_replicas: u64,
    /// A vertex exceeding the bound, when the check fails.
    pub witness: Option<u64>,
    pub pass: bool,
}

/// Checks that no vertex is replicated more than `bound` times.
pub fn check_constrained_bound(bound: u64, acc: &MetricsAccumulator) -> BoundCheck {
    let mut max = 0u64;
    let mut witness = None;
    for (v, r) in acc.vertex_replicas() {
        let r = r as u64;
        if r > max {
            max = r;
        }
        if r > bound && witness.is_none_or(|w| v < w) {
            witness = Some(v);
        }
    }
    BoundCheck {
        bound,
        max_replicas: max,
        witness,
        pass: witness.is_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyCheck {
    pub subsets: usize,
    /// Largest number of subsets sharing one element.
    pub r: u64,
    pub sqrt_n: f64,
    /// `r ≥ √n`.
    pub pass: bool,
}

/// For a pairwise-intersecting family of `n` subsets of a ground set, the
/// largest element multiplicity `r` satisfies `r ≥ √n`. Computes `r` and
/// checks it; errors when the family is not pairwise intersecting.
pub fn family_multiplicity_check(
    family: &[Vec<u32>],
    ground: usize,
) -> Result<FamilyCheck, MetricsError> {
    let mut count = vec![0u64; ground];
    let mut sorted: Vec<Vec<u32>> = Vec::with_capacity(family.len());
    for (i, s) in family.iter().enumerate() {
        let mut s = s.clone();
        s.sort_unstable();
        s.dedup();
        for &e in &s {
            let slot = count
                .get_mut(e as usize)
                .ok_or(MetricsError::ElementOutOfRange {
                    subset: i,
                    element: e,
                    ground,
                })?;
            *slot += 1;
        }
        sorted.push(s);
    }
    for i in 0..sorted.len() {
        for j in (i + 1)..sorted.len() {
            if !sorted_intersect(&sorted[i], &sorted[j]) {
                return Err(MetricsError::DisjointSubsets(i, j));
            }
        }
    }
    let r = count.into_iter().max().unwrap_or(0);
    let n = family.len() as u64;
    Ok(FamilyCheck {
        subsets: family.len(),
        r,
        sqrt_n: (n as f64).sqrt(),
        // r² ≥ n, in integers
        pass: r * r >= n,
    })
}

fn sorted_intersect(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// The lines of a plane as a subset family over its points.
pub fn fpp_line_family(plane: &ProjPlane) -> Vec<Vec<u32>> {
    plane.lines().map(<[u32]>::to_vec).collect()
}

/// Row-plus-column subsets of an `s × s` grid, one per cell.
pub fn edge2d_family(s: u64) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity((s * s) as usize);
    for r in 0..s {
        for c in 0..s {
            let mut set: Vec<u32> = (0..s).map(|x| (r * s + x) as u32).collect();
            set.extend((0..s).filter(|&y| y != r).map(|y| (y * s + c) as u32));
            out.push(set);
        }
    }
    out
}

/// Column-plus-half-row subsets of an `s × s` torus, one per cell.
pub fn torus_family(s: u64) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity((s * s) as usize);
    for r in 0..s {
        for c in 0..s {
            out.push(
                crate::partition::torus_subset(s, (r, c))
                    .map(|(a, b)| (a * s + b) as u32)
                    .collect(),
            );
        }
    }
    out
}

/// Lower bound on the replication factor of any `n`-way edge partition of
/// `K_m` with load balance `α`: `√α · √n · √((m-1)/m)`.
pub fn complete_graph_lower_bound(m: u64, n: u64, alpha: f64) -> Result<f64, MetricsError> {
    if m < 2 {
        return Err(MetricsError::Domain(format!(
            "m must be at least 2, got {m}"
        )));
    }
    if n < 1 {
        return Err(MetricsError::Domain("n must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(MetricsError::Domain(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(alpha.sqrt() * (n as f64).sqrt() * ((m - 1) as f64 / m as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(u: u64, v: u64, pid: u32) -> EdgeAssignment {
        EdgeAssignment { u, v, pid }
    }

    #[test]
    fn empty_stream() {
        let r = compute_metrics(&[], 7).unwrap();
        assert_eq!((r.balance, r.rf, r.alpha), (0.0, 0.0, 0.0));
        assert_eq!(r.empty_parts, 7);
        assert_eq!(r.max_replicas, Some(0));
    }

    #[test]
    fn single_partition() {
        let edges = [a(0, 1, 0), a(1, 2, 0), a(0, 2, 0)];
        let r = compute_metrics(&edges, 1).unwrap();
        assert_eq!((r.balance, r.rf, r.alpha), (1.0, 1.0, 1.0));
    }

    #[test]
    fn triangle_split_three_ways() {
        let edges = [a(0, 1, 0), a(1, 2, 1), a(0, 2, 2)];
        let r = compute_metrics(&edges, 3).unwrap();
        assert_eq!(r.replicas, 6);
        assert_eq!(r.rf, 2.0);
        assert_eq!(r.balance, 1.0);
        assert_eq!(r.replica_sets(), vec![2, 2, 2]);
    }

    #[test]
    fn out_of_range_pid() {
        assert_eq!(
            compute_metrics(&[a(0, 1, 3)], 3).unwrap_err(),
            MetricsError::PidOutOfRange { pid: 3, parts: 3 }
        );
    }

    #[test]
    fn self_loop_counts_vertex_once() {
        let r = compute_metrics(&[a(5, 5, 0)], 1).unwrap();
        assert_eq!((r.vertices, r.replicas), (1, 1));
    }

    #[test]
    fn bound_check_reports_witness() {
        let mut acc = MetricsAccumulator::new(4);
        for (v, pid) in [(1, 0), (2, 1), (3, 2)] {
            acc.add(&a(0, v, pid)).unwrap();
        }
        let ok = check_constrained_bound(3, &acc);
        assert!(ok.pass);
        assert_eq!(ok.max_replicas, 3);
        let bad = check_constrained_bound(2, &acc);
        assert!(!bad.pass);
        assert_eq!(bad.witness, Some(0));

        let mut one = MetricsAccumulator::new(1);
        one.add(&a(0, 1, 0)).unwrap();
        assert_eq!(check_constrained_bound(1, &one).max_replicas, 1);
    }

    #[test]
    fn family_checks() {
        let plane = ProjPlane::build(2).unwrap();
        let fam = family_multiplicity_check(&fpp_line_family(&plane), 7).unwrap();
        assert_eq!(fam.r, 3);
        assert!(fam.pass);

        let grid = family_multiplicity_check(&edge2d_family(3), 9).unwrap();
        assert_eq!(grid.r, 5);

        let single = family_multiplicity_check(&[vec![0]], 1).unwrap();
        assert_eq!(single.r, 1);
        assert!(single.pass);

        assert_eq!(
            family_multiplicity_check(&[vec![0], vec![1]], 2).unwrap_err(),
            MetricsError::DisjointSubsets(0, 1)
        );
        assert!(family_multiplicity_check(&[vec![5]], 2).is_err());
    }

    #[test]
    fn lower_bound_formula() {
        let b = complete_graph_lower_bound(5, 2, 1.0).unwrap();
        assert!((b - (2.0f64).sqrt() * (0.8f64).sqrt()).abs() < 1e-12);
        assert!(complete_graph_lower_bound(10, 1, 1.0).unwrap() < 1.0);
        let far = complete_graph_lower_bound(1_000_000, 49, 1.0).unwrap();
        assert!((far - 7.0).abs() < 1e-5);
        assert!(complete_graph_lower_bound(1, 2, 1.0).is_err());
        assert!(complete_graph_lower_bound(5, 0, 1.0).is_err());
        assert!(complete_graph_lower_bound(5, 2, 0.0).is_err());
        assert!(complete_graph_lower_bound(5, 2, 1.5).is_err());
    }

    #[test]
    fn sketch_is_close_to_exact() {
        let mut exact = MetricsAccumulator::new(4);
        let mut sketch = SketchAccumulator::new(4);
        for i in 0..50_000u64 {
            let rec = a(i, i + 1, (i % 4) as u32);
            exact.add(&rec).unwrap();
            sketch.add(&rec).unwrap();
        }
        let (e, s) = (exact.finish(), sketch.finish());
        assert!(s.approximate);
        assert_eq!(s.edges, e.edges);
        assert!((s.rf - e.rf).abs() / e.rf < 0.05, "{} vs {}", s.rf, e.rf);
        assert!((s.vertices as f64 - e.vertices as f64).abs() / (e.vertices as f64) < 0.05);
    }
}
