//! Constrained vertex-cut partitioners.
//!
//! Every method maps each vertex to a subset of partitions such that any two
//! subsets intersect, and sends an edge to a partition in the intersection of
//! its endpoints' subsets. A vertex is therefore replicated at most as many
//! times as its subset is large.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::prime_power;
use crate::graph_io::Edge;
use crate::matching::{perfect_matching, LinePointMatching, NoPerfectMatching};
use crate::par;
use crate::plane::{PlaneError, ProjPlane};

/// Smallest FPP partition count (the plane of order 2).
pub const MIN_PLANE_PARTS: u64 = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("{method} needs at least {min} partitions, got {parts}")]
    TooFewParts {
        method: Method,
        parts: u64,
        min: u64,
    },
    #[error("partition count {0} exceeds the 32-bit partition id space")]
    TooManyParts(u64),
    #[error(transparent)]
    Plane(#[from] PlaneError),
    #[error(transparent)]
    Matching(#[from] NoPerfectMatching),
    #[error("unknown method {0:?} (expected fpp, dfpp, edge2d or torus)")]
    UnknownMethod(String),
    #[error("unknown surplus policy {0:?} (expected empty or fold)")]
    UnknownSurplus(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fpp,
    Dfpp,
    Edge2d,
    Torus,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Fpp, Method::Dfpp, Method::Edge2d, Method::Torus];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fpp => "fpp",
            Method::Dfpp => "dfpp",
            Method::Edge2d => "edge2d",
            Method::Torus => "torus",
        }
    }

    fn min_parts(self) -> u64 {
        match self {
            Method::Fpp | Method::Dfpp => MIN_PLANE_PARTS,
            Method::Edge2d => 1,
            Method::Torus => 4,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| PartitionError::UnknownMethod(s.to_string()))
    }
}

/// What FPP does with the `n - n'` partitions beyond the largest plane.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurplusPolicy {
    #[default]
    #[serde(rename = "empty")]
    LeaveEmpty,
    /// Same-line edges of line `i` go to surplus partition `n' + i mod (n - n')`.
    Fold,
}

impl FromStr for SurplusPolicy {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "empty" | "leave_empty" => Ok(SurplusPolicy::LeaveEmpty),
            "fold" => Ok(SurplusPolicy::Fold),
            _ => Err(PartitionError::UnknownSurplus(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionerConfig {
    pub method: Method,
    pub parts: u64,
    pub seed: u64,
    #[serde(default)]
    pub surplus: SurplusPolicy,
    /// Mix vertex ids through a 64-bit avalanche before any modulo.
    #[serde(default)]
    pub hash_ids: bool,
}

impl PartitionerConfig {
    pub fn new(method: Method, parts: u64) -> Self {
        Self {
            method,
            parts,
            seed: 0,
            surplus: SurplusPolicy::LeaveEmpty,
            hash_ids: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_surplus(mut self, surplus: SurplusPolicy) -> Self {
        self.surplus = surplus;
        self
    }

    pub fn with_hash_ids(mut self, hash_ids: bool) -> Self {
        self.hash_ids = hash_ids;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeAssignment {
    pub u: u64,
    pub v: u64,
    pub pid: u32,
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Order-independent hash of `(seed, {u, v})`.
#[inline]
pub fn edge_hash(seed: u64, u: u64, v: u64) -> u64 {
    let (a, b) = if u <= v { (u, v) } else { (v, u) };
    mix64(mix64(mix64(seed) ^ a) ^ b)
}

/// Largest plane that fits in `n` partitions: returns `(q, q² + q + 1)`
/// for the largest prime power `q` with `q² + q + 1 ≤ n`.
pub fn plane_size_for(n: u64) -> Result<(u64, u64), PartitionError> {
    if n < MIN_PLANE_PARTS {
        return Err(PartitionError::TooFewParts {
            method: Method::Fpp,
            parts: n,
            min: MIN_PLANE_PARTS,
        });
    }
    let mut best = 2;
    let mut q = 3u64;
    while q * q + q < n {
        if prime_power(q).is_some() {
            best = q;
        }
        q += 1;
    }
    Ok((best, best * best + best + 1))
}

/// Vertex-to-line map.
#[inline]
pub fn psi(v: u64, lines: u64) -> u64 {
    v % lines
}

/// FPP assignment of edge `(u, v)` on `plane`.
///
/// Distinct lines meet in exactly one point, which is the partition. Edges
/// whose endpoints share a line go to `phi[line]` when a matching is given,
/// and otherwise to a point of that line chosen by hashing the seed and the
/// unordered endpoint pair.
#[inline]
pub fn fpp_assign(
    plane: &ProjPlane,
    matching: Option<&LinePointMatching>,
    seed: u64,
    u: u64,
    v: u64,
) -> u32 {
    let n = plane.size() as u64;
    let (lu, lv) = (psi(u, n) as usize, psi(v, n) as usize);
    if lu != lv {
        return plane.intersection_unchecked(lu, lv) as u32;
    }
    match matching {
        Some(m) => m.point_for(lu),
        None => {
            let line = plane.line(lu);
            line[(edge_hash(seed, u, v) % line.len() as u64) as usize]
        }
    }
}

/// Side of the square grid used by the grid-based methods.
pub fn grid_side(n: u64) -> u64 {
    let mut s = (n as f64).sqrt() as u64;
    while s * s < n {
        s += 1;
    }
    while s > 1 && (s - 1) * (s - 1) >= n {
        s -= 1;
    }
    s.max(1)
}

#[inline]
fn fold_cell(raw: u64, n: u64) -> u32 {
    (if raw < n { raw } else { raw % n }) as u32
}

/// 2D grid assignment: row from `u`, column from `v`, cells past `n` folded
/// back with a modulo.
#[inline]
pub fn edge2d_assign(n: u64, u: u64, v: u64) -> u32 {
    edge2d_on_grid(grid_side(n), n, u, v)
}

#[inline]
fn edge2d_on_grid(s: u64, n: u64, u: u64, v: u64) -> u32 {
    fold_cell((u % s) * s + (v % s), n)
}

/// Grid cell `(row, col)` of vertex `w` on an `s × s` torus.
#[inline]
pub fn torus_block(s: u64, w: u64) -> (u64, u64) {
    let g = w % (s * s);
    (g / s, g % s)
}

/// Whether `cell` belongs to the torus subset of `block`: the whole column
/// of the block plus the `⌊s/2⌋` cells to its right on the same row,
/// wrapping around.
#[inline]
pub fn torus_contains(s: u64, block: (u64, u64), cell: (u64, u64)) -> bool {
    if cell.1 == block.1 {
        return true;
    }
    cell.0 == block.0 && (cell.1 + s - block.1) % s <= s / 2
}

/// The cells of a torus subset: column first (rows ascending), then the
/// half row.
pub fn torus_subset(s: u64, block: (u64, u64)) -> impl Iterator<Item = (u64, u64)> {
    let (r, c) = block;
    (0..s)
        .map(move |row| (row, c))
        .chain((1..=s / 2).map(move |d| (r, (c + d) % s)))
}

/// Torus assignment: a seeded pseudo-random cell of `S_u ∩ S_v`.
pub fn torus_assign(n: u64, seed: u64, u: u64, v: u64) -> u32 {
    torus_on_grid(grid_side(n), n, seed, u, v)
}

fn torus_on_grid(s: u64, n: u64, seed: u64, u: u64, v: u64) -> u32 {
    let (a, b) = (torus_block(s, u), torus_block(s, v));
    // enumerate from the smaller block so the pick is symmetric in (u, v)
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let common = || torus_subset(s, a).filter(move |&c| torus_contains(s, b, c));
    let count = common().count() as u64;
    debug_assert!(count > 0, "torus subsets always intersect");
    let pick = (edge_hash(seed, u, v) % count) as usize;
    let (r, c) = common().nth(pick).expect("pick < count");
    fold_cell(r * s + c, n)
}

#[derive(Debug, Clone)]
enum Scheme {
    Plane {
        plane: ProjPlane,
        matching: Option<LinePointMatching>,
        surplus: u64,
    },
    Grid {
        side: u64,
    },
}

/// A configured partitioner with its precomputed tables. Assignment is a
/// pure function of the configuration and the edge.
#[derive(Debug, Clone)]
pub struct Partitioner {
    config: PartitionerConfig,
    scheme: Scheme,
}

impl Partitioner {
    pub fn new(config: PartitionerConfig) -> Result<Self, PartitionError> {
        let min = config.method.min_parts();
        if config.parts < min {
            return Err(PartitionError::TooFewParts {
                method: config.method,
                parts: config.parts,
                min,
            });
        }
        if config.parts > u32::MAX as u64 {
            return Err(PartitionError::TooManyParts(config.parts));
        }
        let scheme = match config.method {
            Method::Fpp | Method::Dfpp => {
                let (q, lines) = plane_size_for(config.parts)?;
                let plane = ProjPlane::build(q)?;
                let matching = match config.method {
                    Method::Dfpp => Some(perfect_matching(&plane)?),
                    _ => None,
                };
                let surplus = match config.surplus {
                    SurplusPolicy::LeaveEmpty => 0,
                    SurplusPolicy::Fold => config.parts - lines,
                };
                Scheme::Plane {
                    plane,
                    matching,
                    surplus,
                }
            }
            Method::Edge2d | Method::Torus => Scheme::Grid {
                side: grid_side(config.parts),
            },
        };
        Ok(Self { config, scheme })
    }

    pub fn config(&self) -> &PartitionerConfig {
        &self.config
    }

    pub fn parts(&self) -> u64 {
        self.config.parts
    }

    pub fn plane(&self) -> Option<&ProjPlane> {
        match &self.scheme {
            Scheme::Plane { plane, .. } => Some(plane),
            Scheme::Grid { .. } => None,
        }
    }

    pub fn matching(&self) -> Option<&LinePointMatching> {
        match &self.scheme {
            Scheme::Plane { matching, .. } => matching.as_ref(),
            Scheme::Grid { .. } => None,
        }
    }

    /// Number of partitions that can receive edges.
    pub fn used_parts(&self) -> u64 {
        match &self.scheme {
            Scheme::Plane { plane, surplus, .. } => plane.size() as u64 + surplus,
            Scheme::Grid { .. } => self.config.parts,
        }
    }

    /// Upper bound on the number of partitions any single vertex touches.
    pub fn replica_bound(&self) -> u64 {
        match (&self.scheme, self.config.method) {
            (Scheme::Plane { plane, surplus, .. }, _) => {
                plane.order() as u64 + 1 + u64::from(*surplus > 0)
            }
            (Scheme::Grid { side }, Method::Edge2d) => 2 * side - 1,
            (Scheme::Grid { side }, _) => side + side / 2,
        }
    }

    /// The id the methods hash on.
    #[inline]
    pub fn key(&self, id: u64) -> u64 {
        if self.config.hash_ids {
            mix64(id)
        } else {
            id
        }
    }

    #[inline]
    pub fn assign(&self, u: u64, v: u64) -> u32 {
        let (ku, kv) = (self.key(u), self.key(v));
        let seed = self.config.seed;
        match &self.scheme {
            Scheme::Plane {
                plane,
                matching,
                surplus,
            } => {
                if *surplus > 0 {
                    let n = plane.size() as u64;
                    let line = psi(ku, n);
                    if line == psi(kv, n) {
                        return (n + line % surplus) as u32;
                    }
                }
                fpp_assign(plane, matching.as_ref(), seed, ku, kv)
            }
            Scheme::Grid { side } => match self.config.method {
                Method::Edge2d => edge2d_on_grid(*side, self.config.parts, ku, kv),
                _ => torus_on_grid(*side, self.config.parts, seed, ku, kv),
            },
        }
    }

    #[inline]
    pub fn assign_edge(&self, e: &Edge) -> EdgeAssignment {
        EdgeAssignment {
            u: e.u,
            v: e.v,
            pid: self.assign(e.u, e.v),
        }
    }

    /// Assigns every edge, in input order, on the parallel path when enabled.
    pub fn partition(&self, edges: &[Edge]) -> Vec<EdgeAssignment> {
        par::map_collect(edges, |e| self.assign_edge(e))
    }

    pub fn partition_sequential(&self, edges: &[Edge]) -> Vec<EdgeAssignment> {
        par::sequential::map_collect(edges, |e| self.assign_edge(e))
    }

    /// The subset of partitions vertex `w` may be placed in, ascending.
    pub fn vertex_subset(&self, w: u64) -> Vec<u32> {
        let k = self.key(w);
        let mut out: Vec<u32> = match &self.scheme {
            Scheme::Plane { plane, surplus, .. } => {
                let n = plane.size() as u64;
                let line = psi(k, n);
                let mut v = plane.line(line as usize).to_vec();
                if *surplus > 0 {
                    v.push((n + line % surplus) as u32);
                }
                v
            }
            Scheme::Grid { side } => {
                let s = *side;
                let n = self.config.parts;
                match self.config.method {
                    Method::Edge2d => {
                        let (row, col) = (k % s, k % s);
                        (0..s)
                            .map(|c| fold_cell(row * s + c, n))
                            .chain((0..s).map(|r| fold_cell(r * s + col, n)))
                            .collect()
                    }
                    _ => torus_subset(s, torus_block(s, k))
                        .map(|(r, c)| fold_cell(r * s + c, n))
                        .collect(),
                }
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_sizes() {
        assert_eq!(plane_size_for(651).unwrap(), (25, 651));
        assert_eq!(plane_size_for(381).unwrap(), (19, 381));
        assert_eq!(plane_size_for(400).unwrap(), (19, 381));
        assert_eq!(plane_size_for(7).unwrap(), (2, 7));
        assert_eq!(plane_size_for(12).unwrap(), (2, 7));
        assert_eq!(plane_size_for(13).unwrap(), (3, 13));
        // q = 6 is skipped
        assert_eq!(plane_size_for(43).unwrap(), (5, 31));
        assert!(matches!(
            plane_size_for(6),
            Err(PartitionError::TooFewParts { parts: 6, .. })
        ));
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(7, 7), 0);
        assert_eq!(psi(13, 7), 6);
        assert_eq!(psi(0, 31), 0);
    }

    #[test]
    fn grid_side_is_ceil_sqrt() {
        for n in 1..2000u64 {
            let s = grid_side(n);
            assert!(s * s >= n && (s - 1) * (s - 1) < n, "n={n} s={s}");
        }
    }

    #[test]
    fn edge2d_examples() {
        assert_eq!(edge2d_assign(4, 0, 1), 1);
        assert_eq!(edge2d_assign(4, 2, 2), 0);
        assert_eq!(edge2d_assign(9, 4, 5), 5);
        // s = 3, cell 2*3+2 = 8 folds to 8 mod 7
        assert_eq!(edge2d_assign(7, 2, 2), 1);
    }

    #[test]
    fn fpp_examples() {
        let plane = ProjPlane::build(2).unwrap();
        assert_eq!(fpp_assign(&plane, None, 0, 0, 1), 4);
        assert_eq!(fpp_assign(&plane, None, 0, 6, 4), 0);
        let same = fpp_assign(&plane, None, 9, 0, 7);
        assert!(plane.line(0).contains(&same));
        assert_eq!(same, fpp_assign(&plane, None, 9, 7, 0));
    }

    #[test]
    fn torus_same_column_stays_in_column() {
        let s = grid_side(16);
        for seed in 0..8 {
            for (u, v) in [(1u64, 5u64), (2, 14), (3, 7)] {
                let pid = torus_assign(16, seed, u, v) as u64;
                assert_eq!(pid % s, torus_block(s, u).1);
            }
        }
    }

    #[test]
    fn config_validation() {
        let err = Partitioner::new(PartitionerConfig::new(Method::Fpp, 5)).unwrap_err();
        assert_eq!(
            err,
            PartitionError::TooFewParts {
                method: Method::Fpp,
                parts: 5,
                min: 7
            }
        );
        assert!(Partitioner::new(PartitionerConfig::new(Method::Torus, 3)).is_err());
        assert!(Partitioner::new(PartitionerConfig::new(Method::Edge2d, 0)).is_err());
        assert_eq!("DFPP".parse::<Method>().unwrap(), Method::Dfpp);
        assert!("grid".parse::<Method>().is_err());
        assert_eq!(
            "fold".parse::<SurplusPolicy>().unwrap(),
            SurplusPolicy::Fold
        );
    }

    #[test]
    fn fold_routes_same_line_edges_to_surplus() {
        let cfg = PartitionerConfig::new(Method::Dfpp, 10).with_surplus(SurplusPolicy::Fold);
        let p = Partitioner::new(cfg).unwrap();
        assert_eq!(p.used_parts(), 10);
        assert_eq!(p.replica_bound(), 4);
        // lines 0, 1, 2 go to surplus ids 7, 8, 9
        assert_eq!(p.assign(0, 7), 7);
        assert_eq!(p.assign(1, 8), 8);
        assert_eq!(p.assign(9, 2), 9);
        assert_eq!(p.assign(3, 10), 7);
        assert_eq!(p.assign(0, 1), 4);

        let empty = Partitioner::new(PartitionerConfig::new(Method::Dfpp, 10)).unwrap();
        assert_eq!(empty.used_parts(), 7);
        assert!(empty.assign(0, 7) < 7);
    }

    #[test]
    fn vertex_subsets_have_bounded_size() {
        for method in Method::ALL {
            for n in [7u64, 9, 16, 20, 31] {
                let p = Partitioner::new(PartitionerConfig::new(method, n)).unwrap();
                for w in 0..200 {
                    assert!(p.vertex_subset(w).len() as u64 <= p.replica_bound());
                }
            }
        }
    }
}
