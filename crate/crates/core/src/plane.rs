//! The projective plane PG(2, q).
//!
//! Points are normalized homogeneous triples, enumerated as every `(1, a, b)`
//! in ascending `(a, b)` order, then `(0, 1, a)`, then `(0, 0, 1)`. Line `i`
//! is the set of points orthogonal to point `i`, so lines and points share
//! one index space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError, FieldSpec};

/// Largest plane order that [`ProjPlane::build`] accepts. Line storage grows
/// as q³.
pub const MAX_PLANE_ORDER: u32 = 256;

const INTERSECTION_TABLE_LIMIT: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlaneError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("plane order {0} exceeds the supported maximum of {MAX_PLANE_ORDER}")]
    TooLarge(u64),
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    #[error("line {0} intersected with itself")]
    SameLine(usize),
    #[error("index {0} out of range for a plane with {1} points")]
    OutOfRange(usize, usize),
}

/// A normalized point: the first nonzero coordinate is 1. Coordinates are
/// canonical field encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjPoint(pub [u32; 3]);

/// Scales `raw` so that its first nonzero coordinate is 1.
pub fn normalize(field: &Field, raw: &[FieldElement; 3]) -> Result<ProjPoint, PlaneError> {
    let enc = [
        field.encode(&raw[0])?,
        field.encode(&raw[1])?,
        field.encode(&raw[2])?,
    ];
    normalize_enc(field, enc)
}

fn normalize_enc(field: &Field, raw: [u32; 3]) -> Result<ProjPoint, PlaneError> {
    let lead = raw
        .iter()
        .copied()
        .find(|&c| c != 0)
        .ok_or(PlaneError::ZeroVector)?;
    if lead == 1 {
        return Ok(ProjPoint(raw));
    }
    let s = field.inv_enc(lead)?;
    Ok(ProjPoint(raw.map(|c| field.mul_enc(c, s))))
}

fn dot(field: &Field, a: [u32; 3], b: [u32; 3]) -> u32 {
    let t0 = field.mul_enc(a[0], b[0]);
    let t1 = field.mul_enc(a[1], b[1]);
    let t2 = field.mul_enc(a[2], b[2]);
    field.add_enc(field.add_enc(t0, t1), t2)
}

fn cross(field: &Field, a: [u32; 3], b: [u32; 3]) -> [u32; 3] {
    let f =
        |x: usize, y: usize| field.sub_enc(field.mul_enc(a[x], b[y]), field.mul_enc(a[y], b[x]));
    [f(1, 2), f(2, 0), f(0, 1)]
}

#[derive(Debug, Clone)]
pub struct ProjPlane {
    field: Field,
    q: u32,
    points: Vec<ProjPoint>,
    /// Flattened `n × (q+1)` table of sorted point indices.
    lines: Vec<u32>,
    intersections: Option<Vec<u32>>,
}

impl ProjPlane {
    /// Builds PG(2, q). Fails unless `q` is a prime power no larger than
    /// [`MAX_PLANE_ORDER`].
    pub fn build(q: u64) -> Result<Self, PlaneError> {
        let spec = FieldSpec::for_order(q)?;
        if q > MAX_PLANE_ORDER as u64 {
            return Err(PlaneError::TooLarge(q));
        }
        let field = Field::new(spec);
        let q = q as u32;
        let n = (q * q + q + 1) as usize;

        let mut points = Vec::with_capacity(n);
        for a in 0..q {
            for b in 0..q {
                points.push(ProjPoint([1, a, b]));
            }
        }
        for a in 0..q {
            points.push(ProjPoint([0, 1, a]));
        }
        points.push(ProjPoint([0, 0, 1]));

        let mut plane = Self {
            field,
            q,
            points,
            lines: Vec::new(),
            intersections: None,
        };

        let mut lines = Vec::with_capacity(n * (q as usize + 1));
        for i in 0..n {
            let start = lines.len();
            plane.collect_line(i, &mut lines);
            lines[start..].sort_unstable();
        }
        plane.lines = lines;

        if n * n <= INTERSECTION_TABLE_LIMIT {
            let mut table = vec![u32::MAX; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let x = plane.intersect_on_demand(i, j) as u32;
                    table[i * n + j] = x;
                    table[j * n + i] = x;
                }
            }
            plane.intersections = Some(table);
        }
        Ok(plane)
    }

    /// Appends the `q+1` points orthogonal to point `i`.
    ///
    /// The solution space of `u·v = 0` is spanned by two of the cross
    /// products `u × e_k`; its points are `B` and `A + t·B` for every `t`.
    fn collect_line(&self, i: usize, out: &mut Vec<u32>) {
        let f = &self.field;
        let u = self.points[i].0;
        let basis = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        let mut spans: Vec<([u32; 3], ProjPoint)> = Vec::with_capacity(2);
        for e in basis {
            let c = cross(f, u, e);
            if let Ok(norm) = normalize_enc(f, c) {
                if spans.iter().all(|(_, seen)| *seen != norm) {
                    spans.push((c, norm));
                }
            }
            if spans.len() == 2 {
                break;
            }
        }
        let (a, _) = spans[0];
        let (b, b_norm) = spans[1];
        out.push(self.index_of(b_norm) as u32);
        for t in 0..self.q {
            let v = [0, 1, 2].map(|k| f.add_enc(a[k], f.mul_enc(t, b[k])));
            let p = normalize_enc(f, v).expect("independent spanning vectors");
            out.push(self.index_of(p) as u32);
        }
    }

    fn intersect_on_demand(&self, i: usize, j: usize) -> usize {
        let c = cross(&self.field, self.points[i].0, self.points[j].0);
        let p =
            normalize_enc(&self.field, c).expect("distinct points have a nonzero cross product");
        self.index_of(p)
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Number of points, which equals the number of lines.
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> ProjPoint {
        self.points[i]
    }

    /// Point indices on line `i`, ascending.
    #[inline]
    pub fn line(&self, i: usize) -> &[u32] {
        let k = self.q as usize + 1;
        &self.lines[i * k..(i + 1) * k]
    }

    pub fn lines(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.lines.chunks_exact(self.q as usize + 1)
    }

    /// Canonical index of a normalized point.
    pub fn index_of(&self, p: ProjPoint) -> usize {
        let q = self.q as usize;
        match p.0 {
            [1, a, b] => a as usize * q + b as usize,
            [0, 1, a] => q * q + a as usize,
            [0, 0, 1] => q * q + q,
            other => panic!("{other:?} is not normalized"),
        }
    }

    /// Whether point `j` lies on line `i`.
    pub fn incident(&self, i: usize, j: usize) -> bool {
        dot(&self.field, self.points[i].0, self.points[j].0) == 0
    }

    /// The unique point shared by lines `i` and `j`.
    pub fn line_intersection(&self, i: usize, j: usize) -> Result<usize, PlaneError> {
        let n = self.size();
        for x in [i, j] {
            if x >= n {
                return Err(PlaneError::OutOfRange(x, n));
            }
        }
        if i == j {
            return Err(PlaneError::SameLine(i));
        }
        Ok(self.intersection_unchecked(i, j))
    }

    /// [`line_intersection`](Self::line_intersection) without validation;
    /// `i != j` and both in range.
    #[inline]
    pub fn intersection_unchecked(&self, i: usize, j: usize) -> usize {
        match &self.intersections {
            Some(t) => t[i * self.size() + j] as usize,
            None => self.intersect_on_demand(i, j),
        }
    }

    pub fn has_intersection_table(&self) -> bool {
        self.intersections.is_some()
    }

    pub fn dump(&self) -> PlaneDump {
        PlaneDump {
            q: self.q,
            n: self.size(),
            field: self.field.spec().clone(),
            points: self.points.iter().map(|p| p.0).collect(),
            lines: self.lines().map(<[u32]>::to_vec).collect(),
        }
    }

    /// Exhaustively checks the incidence axioms.
    pub fn check_axioms(&self) -> AxiomReport {
        let n = self.size();
        let k = self.q as usize + 1;

        let line_sizes = self.lines().all(|l| {
            l.len() == k && l.windows(2).all(|w| w[0] < w[1]) && l.iter().all(|&p| (p as usize) < n)
        });

        let mut degree = vec![0usize; n];
        for l in self.lines() {
            for &p in l {
                degree[p as usize] += 1;
            }
        }
        let point_degrees = degree.iter().all(|&d| d == k);

        let duality = (0..n).all(|i| {
            self.line(i)
                .iter()
                .all(|&j| self.line(j as usize).binary_search(&(i as u32)).is_ok())
        });

        // Each line contributes one to every pair of its points; each point
        // contributes one to every pair of lines through it.
        let mut point_pairs = vec![0u8; n * n];
        let mut lines_through: Vec<Vec<usize>> = vec![Vec::with_capacity(k); n];
        for (i, l) in self.lines().enumerate() {
            for (x, &a) in l.iter().enumerate() {
                lines_through[a as usize].push(i);
                for &b in &l[x + 1..] {
                    let c = &mut point_pairs[a as usize * n + b as usize];
                    *c = c.saturating_add(1);
                }
            }
        }
        let points_join_once = (0..n).all(|a| ((a + 1)..n).all(|b| point_pairs[a * n + b] == 1));
        drop(point_pairs);

        let mut line_pairs = vec![0u8; n * n];
        for ls in &lines_through {
            for (x, &a) in ls.iter().enumerate() {
                for &b in &ls[x + 1..] {
                    let c = &mut line_pairs[a * n + b];
                    *c = c.saturating_add(1);
                }
            }
        }
        let lines_meet_once = (0..n).all(|a| ((a + 1)..n).all(|b| line_pairs[a * n + b] == 1));

        let frame =
            [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]].map(|c| self.index_of(ProjPoint(c)));
        let quadrangle = (0..4).all(|skip| {
            let triple: Vec<u32> = (0..4)
                .filter(|&x| x != skip)
                .map(|x| frame[x] as u32)
                .collect();
            !self
                .lines()
                .any(|l| triple.iter().all(|p| l.binary_search(p).is_ok()))
        });

        AxiomReport {
            q: self.q,
            points: n,
            lines: self.lines().len(),
            line_sizes,
            point_degrees,
            duality,
            lines_meet_once,
            points_join_once,
            quadrangle,
        }
    }
}

/// JSON-facing view of a plane.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneDump {
    pub q: u32,
    pub n: usize,
    pub field: FieldSpec,
    pub points: Vec<[u32; 3]>,
    pub lines: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub q: u32,
    pub points: usize,
    pub lines: usize,
    /// Every line has q+1 distinct points.
    pub line_sizes: bool,
    /// Every point lies on q+1 lines.
    pub point_degrees: bool,
    pub duality: bool,
    pub lines_meet_once: bool,
    pub points_join_once: bool,
    /// (1,0,0), (0,1,0), (0,0,1), (1,1,1) have no three collinear.
    pub quadrangle: bool,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        let n = (self.q * self.q + self.q + 1) as usize;
        self.points == n
            && self.lines == n
            && self.line_sizes
            && self.point_degrees
            && self.duality
            && self.lines_meet_once
            && self.points_join_once
            && self.quadrangle
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_enumeration_q2() {
        let plane = ProjPlane::build(2).unwrap();
        let expected = [
            [1, 0, 0],
            [1, 0, 1],
            [1, 1, 0],
            [1, 1, 1],
            [0, 1, 0],
            [0, 1, 1],
            [0, 0, 1],
        ];
        let got: Vec<[u32; 3]> = plane.points().iter().map(|p| p.0).collect();
        assert_eq!(got, expected);
        // line 0 is u0 = 0
        assert_eq!(plane.line(0), &[4, 5, 6]);
    }

    #[test]
    fn sizes() {
        for (q, n) in [(2, 7), (3, 13), (4, 21)] {
            let plane = ProjPlane::build(q).unwrap();
            assert_eq!(plane.size(), n);
            assert_eq!(plane.lines().len(), n);
            assert!(plane.lines().all(|l| l.len() == q as usize + 1));
        }
    }

    #[test]
    fn normalize_examples() {
        let f = Field::with_order(5).unwrap();
        let e = |v: u32| FieldElement::new(vec![v]);
        assert_eq!(
            normalize(&f, &[e(0), e(2), e(4)]).unwrap(),
            ProjPoint([0, 1, 2])
        );
        assert_eq!(
            normalize(&f, &[e(0), e(0), e(3)]).unwrap(),
            ProjPoint([0, 0, 1])
        );
        assert_eq!(
            normalize(&f, &[e(1), e(3), e(4)]).unwrap(),
            ProjPoint([1, 3, 4])
        );
        assert_eq!(
            normalize(&f, &[e(0), e(0), e(0)]),
            Err(PlaneError::ZeroVector)
        );
    }

    #[test]
    fn intersection_errors() {
        let plane = ProjPlane::build(2).unwrap();
        assert_eq!(plane.line_intersection(3, 3), Err(PlaneError::SameLine(3)));
        assert_eq!(
            plane.line_intersection(0, 7),
            Err(PlaneError::OutOfRange(7, 7))
        );
        assert_eq!(plane.line_intersection(0, 1), Ok(4));
        assert_eq!(plane.line_intersection(1, 0), Ok(4));
    }

    #[test]
    fn build_rejects_bad_orders() {
        assert!(matches!(
            ProjPlane::build(6),
            Err(PlaneError::Field(FieldError::NotPrimePower(6)))
        ));
        assert_eq!(
            ProjPlane::build(257).unwrap_err(),
            PlaneError::TooLarge(257)
        );
    }

    #[test]
    fn on_demand_matches_table() {
        let plane = ProjPlane::build(7).unwrap();
        assert!(plane.has_intersection_table());
        for i in 0..plane.size() {
            for j in 0..plane.size() {
                if i != j {
                    assert_eq!(
                        plane.intersection_unchecked(i, j),
                        plane.intersect_on_demand(i, j)
                    );
                }
            }
        }
    }
}
