//! Edge-list ingestion, assignment files, and synthetic graph generators.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::EdgeAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: u64,
    pub v: u64,
}

impl Edge {
    pub fn new(u: u64, v: u64) -> Self {
        Self { u, v }
    }

    /// The edge with endpoints sorted.
    pub fn unordered(self) -> Self {
        if self.u <= self.v {
            self
        } else {
            Self::new(self.v, self.u)
        }
    }
}

impl From<(u64, u64)> for Edge {
    fn from((u, v): (u64, u64)) -> Self {
        Self::new(u, v)
    }
}

#[derive(Debug, Error)]
pub enum GraphIoError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: cannot parse {text:?}")]
    Malformed { line: u64, text: String },
    #[error("binary assignment stream ends mid-record")]
    TruncatedRecord,
    #[error("assignment line {line}: partition id {pid} does not fit in 32 bits")]
    PidOverflow { line: u64, pid: u64 },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadOptions {
    pub comment: char,
    /// Drop repeats of an unordered pair (keeps the first occurrence).
    pub dedup: bool,
    pub drop_self_loops: bool,
    /// Abort on the first malformed line instead of skipping it.
    pub strict: bool,
}

impl Default for ReadOptions {
    fn default() -> Self {
        Self {
            comment: '#',
            dedup: false,
            drop_self_loops: false,
            strict: false,
        }
    }
}

/// Streaming reader over a whitespace-separated edge list. Extra columns
/// after the two ids are ignored. Memory is constant unless `dedup` is on.
pub struct EdgeReader<R> {
    input: R,
    opts: ReadOptions,
    buf: String,
    line_no: u64,
    skipped: u64,
    seen: HashSet<Edge>,
    failed: bool,
}

impl EdgeReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, opts: ReadOptions) -> Result<Self, GraphIoError> {
        Ok(Self::new(BufReader::new(File::open(path)?), opts))
    }
}

impl<R: BufRead> EdgeReader<R> {
    pub fn new(input: R, opts: ReadOptions) -> Self {
        Self {
            input,
            opts,
            buf: String::new(),
            line_no: 0,
            skipped: 0,
            seen: HashSet::new(),
            failed: false,
        }
    }

    /// Malformed lines skipped so far (lenient mode only).
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    fn parse(&self, line: &str) -> Option<Edge> {
        let mut it = line.split_whitespace();
        let u = it.next()?.parse().ok()?;
        let v = it.next()?.parse().ok()?;
        Some(Edge::new(u, v))
    }
}

impl<R: BufRead> Iterator for EdgeReader<R> {
    type Item = Result<Edge, GraphIoError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            }
            self.line_no += 1;
            let line = self.buf.trim();
            if line.is_empty() || line.starts_with(self.opts.comment) {
                continue;
            }
            let Some(edge) = self.parse(line) else {
                if self.opts.strict {
                    self.failed = true;
                    return Some(Err(GraphIoError::Malformed {
                        line: self.line_no,
                        text: line.to_string(),
                    }));
                }
                self.skipped += 1;
                continue;
            };
            if self.opts.drop_self_loops && edge.u == edge.v {
                continue;
            }
            if self.opts.dedup && !self.seen.insert(edge.unordered()) {
                continue;
            }
            return Some(Ok(edge));
        }
    }
}

/// Reads a whole edge list into memory.
pub fn read_edge_list(
    path: impl AsRef<Path>,
    opts: ReadOptions,
) -> Result<Vec<Edge>, GraphIoError> {
    EdgeReader::open(path, opts)?.collect()
}

pub fn write_edge_list<W: Write>(out: W, edges: &[Edge]) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    for e in edges {
        writeln!(out, "{}\t{}", e.u, e.v)?;
    }
    out.flush()
}

/// On-disk layout of assignment records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentFormat {
    /// `u<TAB>v<TAB>pid` per line.
    #[default]
    Tsv,
    /// Three little-endian `u64` per record.
    Bin,
}

pub fn write_assignments<W: Write>(
    out: &mut W,
    records: &[EdgeAssignment],
    format: AssignmentFormat,
) -> io::Result<()> {
    match format {
        AssignmentFormat::Tsv => {
            for r in records {
                writeln!(out, "{}\t{}\t{}", r.u, r.v, r.pid)?;
            }
        }
        AssignmentFormat::Bin => {
            let mut buf = [0u8; 24];
            for r in records {
                buf[..8].copy_from_slice(&r.u.to_le_bytes());
                buf[8..16].copy_from_slice(&r.v.to_le_bytes());
                buf[16..].copy_from_slice(&(r.pid as u64).to_le_bytes());
                out.write_all(&buf)?;
            }
        }
    }
    Ok(())
}

pub fn read_assignments<R: Read>(
    input: R,
    format: AssignmentFormat,
) -> Result<Vec<EdgeAssignment>, GraphIoError> {
    let mut input = BufReader::new(input);
    let mut out = Vec::new();
    match format {
        AssignmentFormat::Tsv => {
            for (i, line) in input.lines().enumerate() {
                let line = line?;
                let line_no = i as u64 + 1;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                let malformed = || GraphIoError::Malformed {
                    line: line_no,
                    text: trimmed.to_string(),
                };
                let mut it = trimmed.split_whitespace().map(str::parse::<u64>);
                let (Some(Ok(u)), Some(Ok(v)), Some(Ok(pid)), None) =
                    (it.next(), it.next(), it.next(), it.next())
                else {
                    return Err(malformed());
                };
                let pid = u32::try_from(pid)
                    .map_err(|_| GraphIoError::PidOverflow { line: line_no, pid })?;
                out.push(EdgeAssignment { u, v, pid });
            }
        }
        AssignmentFormat::Bin => {
            let mut buf = [0u8; 24];
            let mut record = 0u64;
            loop {
                let mut filled = 0;
                while filled < buf.len() {
                    match input.read(&mut buf[filled..])? {
                        0 => break,
                        k => filled += k,
                    }
                }
                if filled == 0 {
                    break;
                }
                if filled < buf.len() {
                    return Err(GraphIoError::TruncatedRecord);
                }
                record += 1;
                let word =
                    |i: usize| u64::from_le_bytes(buf[i * 8..(i + 1) * 8].try_into().unwrap());
                let pid = u32::try_from(word(2)).map_err(|_| GraphIoError::PidOverflow {
                    line: record,
                    pid: word(2),
                })?;
                out.push(EdgeAssignment {
                    u: word(0),
                    v: word(1),
                    pid,
                });
            }
        }
    }
    Ok(out)
}

/// All `m(m-1)/2` pairs of `K_m`, ascending.
pub fn gen_complete(m: u64) -> Result<Vec<Edge>, GraphIoError> {
    if m < 2 {
        return Err(GraphIoError::InvalidParams(format!(
            "complete graph needs m >= 2, got {m}"
        )));
    }
    Ok((0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| Edge::new(i, j)))
        .collect())
}

/// `e` distinct unordered pairs over `m` vertices chosen uniformly, sorted.
pub fn gen_random(m: u64, e: u64, seed: u64) -> Result<Vec<Edge>, GraphIoError> {
    let total = m.saturating_mul(m.saturating_sub(1)) / 2;
    if e > total {
        return Err(GraphIoError::InvalidParams(format!(
            "{e} edges requested but K_{m} has only {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks: Vec<u64> = index::sample(&mut rng, total as usize, e as usize)
        .into_iter()
        .map(|r| r as u64)
        .collect();
    ranks.sort_unstable();
    // ranks are sorted, so walk rows once instead of calling pair_at per rank
    let mut out = Vec::with_capacity(ranks.len());
    let (mut row, mut row_start) = (0u64, 0u64);
    for r in ranks {
        while r >= row_start + (m - 1 - row) {
            row_start += m - 1 - row;
            row += 1;
        }
        out.push(Edge::new(row, row + 1 + (r - row_start)));
    }
    Ok(out)
}

/// Preferential attachment: starts from `K_{d+1}`, then each new vertex
/// links to `d` distinct earlier vertices picked with probability
/// proportional to degree. Produces `d(d+1)/2 + d(m-d-1)` edges.
pub fn gen_preferential(m: u64, d: u64, seed: u64) -> Result<Vec<Edge>, GraphIoError> {
    if d < 1 || m <= d {
        return Err(GraphIoError::InvalidParams(format!(
            "preferential attachment needs m > d >= 1, got m={m} d={d}"
        )));
    }
    let mut edges = gen_complete(d + 1).unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // every edge contributes both endpoints, so sampling this list is
    // degree-proportional
    let mut ends: Vec<u64> = edges.iter().flat_map(|e| [e.u, e.v]).collect();
    let mut targets: Vec<u64> = Vec::with_capacity(d as usize);
    for w in (d + 1)..m {
        targets.clear();
        while (targets.len() as u64) < d {
            let t = ends[rng.random_range(0..ends.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        targets.sort_unstable();
        for &t in &targets {
            edges.push(Edge::new(t, w));
            ends.push(t);
            ends.push(w);
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn read_str(s: &str, opts: ReadOptions) -> Vec<Edge> {
        EdgeReader::new(Cursor::new(s), opts)
            .collect::<Result<_, _>>()
            .unwrap()
    }

    #[test]
    fn comments_and_blank_lines() {
        let got = read_str("0 1\n0 3\n# comment\n\n", ReadOptions::default());
        assert_eq!(got, vec![Edge::new(0, 1), Edge::new(0, 3)]);
    }

    #[test]
    fn dedup_is_unordered() {
        let opts = ReadOptions {
            dedup: true,
            ..Default::default()
        };
        assert_eq!(read_str("1 4\n4 1\n", opts), vec![Edge::new(1, 4)]);
        assert_eq!(read_str("1 4\n4 1\n", ReadOptions::default()).len(), 2);
    }

    #[test]
    fn self_loops() {
        let opts = ReadOptions {
            drop_self_loops: true,
            ..Default::default()
        };
        assert_eq!(read_str("3 3\n3 4\n", opts), vec![Edge::new(3, 4)]);
    }

    #[test]
    fn malformed_lines() {
        let mut reader = EdgeReader::new(
            Cursor::new("0 1\nfoo bar\n7\n2 3\n"),
            ReadOptions::default(),
        );
        let edges: Vec<Edge> = reader.by_ref().map(Result::unwrap).collect();
        assert_eq!(edges, vec![Edge::new(0, 1), Edge::new(2, 3)]);
        assert_eq!(reader.skipped(), 2);

        let strict = ReadOptions {
            strict: true,
            ..Default::default()
        };
        let res: Result<Vec<Edge>, _> =
            EdgeReader::new(Cursor::new("0 1\nfoo bar\n2 3\n"), strict).collect();
        assert!(matches!(res, Err(GraphIoError::Malformed { line: 2, .. })));
    }

    #[test]
    fn assignment_formats_roundtrip() {
        let recs = vec![
            EdgeAssignment { u: 0, v: 1, pid: 4 },
            EdgeAssignment {
                u: u64::MAX,
                v: 3,
                pid: 0,
            },
        ];
        for format in [AssignmentFormat::Tsv, AssignmentFormat::Bin] {
            let mut buf = Vec::new();
            write_assignments(&mut buf, &recs, format).unwrap();
            assert_eq!(read_assignments(Cursor::new(buf), format).unwrap(), recs);
        }
        let mut buf = Vec::new();
        write_assignments(&mut buf, &recs[..1], AssignmentFormat::Tsv).unwrap();
        assert_eq!(buf, b"0\t1\t4\n");
        let mut bin = Vec::new();
        write_assignments(&mut bin, &recs[..1], AssignmentFormat::Bin).unwrap();
        assert_eq!(bin.len(), 24);
        assert_eq!(bin[16], 4);
        assert!(matches!(
            read_assignments(Cursor::new(&bin[..20]), AssignmentFormat::Bin),
            Err(GraphIoError::TruncatedRecord)
        ));
        assert!(read_assignments(Cursor::new("1 2\n"), AssignmentFormat::Tsv).is_err());
    }

    #[test]
    fn complete_graphs() {
        assert_eq!(
            gen_complete(3).unwrap(),
            vec![Edge::new(0, 1), Edge::new(0, 2), Edge::new(1, 2)]
        );
        assert_eq!(gen_complete(5).unwrap().len(), 10);
        assert_eq!(gen_complete(50).unwrap().len(), 1225);
        assert!(gen_complete(1).is_err());
    }

    #[test]
    fn random_graphs() {
        let full = gen_random(10, 45, 3).unwrap();
        assert_eq!(full, gen_complete(10).unwrap());
        assert!(gen_random(1000, 0, 1).unwrap().is_empty());
        assert!(gen_random(10, 46, 0).is_err());

        let g = gen_random(1000, 20_000, 42).unwrap();
        assert_eq!(g.len(), 20_000);
        assert!(g.iter().all(|e| e.u < e.v && e.v < 1000));
        let distinct: HashSet<Edge> = g.iter().copied().collect();
        assert_eq!(distinct.len(), 20_000);
        assert_eq!(g, gen_random(1000, 20_000, 42).unwrap());
        assert_ne!(g, gen_random(1000, 20_000, 43).unwrap());
    }

    /// Maps a rank in `[0, m(m-1)/2)` to the unordered pair at that position in
    /// ascending lexicographic order.
    fn pair_at(m: u64, mut rank: u64) -> Edge {
        let mut i = 0;
        loop {
            let row = m - 1 - i;
            if rank < row {
                return Edge::new(i, i + 1 + rank);
            }
            rank -= row;
            i += 1;
        }
    }

    #[test]
    fn pair_ranks_cover_all_pairs() {
        let m = 9;
        let all: Vec<Edge> = (0..m * (m - 1) / 2).map(|r| pair_at(m, r)).collect();
        assert_eq!(all, gen_complete(m).unwrap());
    }

    #[test]
    fn preferential_graphs() {
        assert_eq!(
            gen_preferential(6, 5, 99).unwrap(),
            gen_complete(6).unwrap()
        );
        let g = gen_preferential(1000, 5, 1).unwrap();
        assert_eq!(g.len() as u64, 5 * (1000 - 6) + 15);
        assert!(g.iter().all(|e| e.u != e.v && e.v < 1000));
        let distinct: HashSet<Edge> = g.iter().map(|e| e.unordered()).collect();
        assert_eq!(distinct.len(), g.len());
        assert!(gen_preferential(5, 5, 0).is_err());
        assert!(gen_preferential(5, 0, 0).is_err());
    }
}
