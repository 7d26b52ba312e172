//! Exhaustive searches for legal routing sequences with a fixed routing vector.
//! Exponential; meant as ground truth on small instances.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::formal_sum::Config;
use crate::graph::{ArcId, Multigraph};
use crate::grm::{FaceId, GrmMultigraph};

/// Largest total routing vector accepted by the searches.
pub const SEQUENCE_ORACLE_BOUND: i64 = 24;

fn dense_bounded(v: &Config, what: &str) -> Result<Vec<i64>> {
    if !v.is_nonnegative() {
        return Err(Error::precondition(format!("{what} must be nonnegative")));
    }
    let d = v
        .to_dense_i64()
        .ok_or_else(|| Error::OracleBound(format!("{what} exceeds 64 bits")))?;
    let total: i64 = d.iter().sum();
    if total > SEQUENCE_ORACLE_BOUND {
        return Err(Error::OracleBound(format!(
            "{what} has {total} steps, more than {SEQUENCE_ORACLE_BOUND}"
        )));
    }
    Ok(d)
}

fn dense_i64(c: &Config, what: &str) -> Result<Vec<i64>> {
    c.to_dense_i64()
        .ok_or_else(|| Error::OracleBound(format!("{what} exceeds 64 bits")))
}

/// Searches an ordering of the arcs of `r` that is legal from `σ`.
pub fn free_sequence_search(g: &Multigraph, sigma: &Config, r: &Config) -> Result<Option<Vec<ArcId>>> {
    if sigma.universe() != g.vertex_universe() || r.universe() != g.arc_universe() {
        return Err(Error::UniverseMismatch("oracle inputs are not over this graph".into()));
    }
    let mut remaining = dense_bounded(r, "routing vector")?;
    let mut particles = dense_i64(sigma, "particle configuration")?;
    let mut dead = HashSet::new();
    let mut seq = Vec::new();
    let found = dfs(
        &mut remaining,
        &mut seq,
        &mut dead,
        &mut |a, forward| {
            let (t, h) = (g.tail(a), g.head(a));
            if forward {
                if particles[t] < 1 {
                    return false;
                }
                particles[t] -= 1;
                particles[h] += 1;
            } else {
                particles[h] -= 1;
                particles[t] += 1;
            }
            true
        },
    );
    Ok(found.then_some(seq))
}

/// Searches an ordering of the faces of `φ` that is legal from `(r, σ)`.
pub fn grm_sequence_search(grm: &GrmMultigraph, r: &Config, sigma: &Config, phi: &Config) -> Result<Option<Vec<FaceId>>> {
    let gv = grm.gv();
    if sigma.universe() != gv.vertex_universe() || r.universe() != gv.arc_universe() || phi.universe() != grm.face_universe() {
        return Err(Error::UniverseMismatch("oracle inputs are not over this mechanism".into()));
    }
    let mut remaining = dense_bounded(phi, "routing vector")?;
    let mut arcs = dense_i64(r, "arc configuration")?;
    let mut particles = dense_i64(sigma, "particle configuration")?;
    let mut dead = HashSet::new();
    let mut seq = Vec::new();
    let found = dfs(
        &mut remaining,
        &mut seq,
        &mut dead,
        &mut |f, forward| {
            let (ta, ha) = (grm.face_tail(f), grm.face_head(f));
            let (t, h) = (gv.tail(ta), gv.head(ta));
            if forward {
                if arcs[ta] < 1 || particles[t] < 1 {
                    return false;
                }
                arcs[ta] -= 1;
                arcs[ha] += 1;
                particles[t] -= 1;
                particles[h] += 1;
            } else {
                arcs[ha] -= 1;
                arcs[ta] += 1;
                particles[h] -= 1;
                particles[t] += 1;
            }
            true
        },
    );
    Ok(found.then_some(seq))
}

/// Depth-first search over orderings of a multiset. The state after a prefix
/// depends only on what remains, so failed remainders are memoised.
fn dfs<F: FnMut(usize, bool) -> bool>(
    remaining: &mut Vec<i64>,
    seq: &mut Vec<usize>,
    dead: &mut HashSet<Vec<i64>>,
    step: &mut F,
) -> bool {
    if remaining.iter().all(|&k| k == 0) {
        return true;
    }
    if dead.contains(remaining) {
        return false;
    }
    for i in 0..remaining.len() {
        if remaining[i] == 0 || !step(i, true) {
            continue;
        }
        remaining[i] -= 1;
        seq.push(i);
        if dfs(remaining, seq, dead, step) {
            return true;
        }
        seq.pop();
        remaining[i] += 1;
        step(i, false);
    }
    dead.insert(remaining.clone());
    false
}
