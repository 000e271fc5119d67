//! Line-to-point perfect matching via Kuhn's augmenting paths.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plane::ProjPlane;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("maximum matching covers {matched} of {n} lines")]
pub struct NoPerfectMatching {
    pub matched: usize,
    pub n: usize,
}

/// `phi[i]` is the point chosen for line `i`. Always a bijection with
/// `phi[i] ∈ lines[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinePointMatching {
    phi: Vec<u32>,
}

impl LinePointMatching {
    #[inline]
    pub fn point_for(&self, line: usize) -> u32 {
        self.phi[line]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// Maximum bipartite matching, scanning left vertices in ascending order and
/// each neighbour list in the order given. Returns the right vertex matched
/// to each left vertex.
pub fn kuhn<'a, F>(left: usize, right: usize, neighbors: F) -> Vec<Option<u32>>
where
    F: Fn(usize) -> &'a [u32],
{
    let mut match_left: Vec<Option<u32>> = vec![None; left];
    let mut match_right: Vec<Option<usize>> = vec![None; right];
    let mut used = vec![false; left];
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for root in 0..left {
        used.iter_mut().for_each(|u| *u = false);
        used[root] = true;
        stack.clear();
        stack.push((root, 0));

        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            let adj = neighbors(v);
            if *next == adj.len() {
                stack.pop();
                continue;
            }
            let to = adj[*next];
            *next += 1;
            match match_right[to as usize] {
                None => {
                    // Each frame's last tried neighbour is its edge on the path.
                    for &(w, idx) in &stack {
                        let p = neighbors(w)[idx - 1];
                        match_right[p as usize] = Some(w);
                        match_left[w] = Some(p);
                    }
                    break;
                }
                Some(w) if !used[w] => {
                    used[w] = true;
                    stack.push((w, 0));
                }
                Some(_) => {}
            }
        }
    }
    match_left
}

/// Perfect matching between the lines and points of `plane`.
pub fn perfect_matching(plane: &ProjPlane) -> Result<LinePointMatching, NoPerfectMatching> {
    let n = plane.size();
    let matched = kuhn(n, n, |i| plane.line(i));
    let count = matched.iter().flatten().count();
    if count != n {
        return Err(NoPerfectMatching { matched: count, n });
    }
    Ok(LinePointMatching {
        phi: matched.into_iter().flatten().collect(),
    })
}
