//! Free routing: particles move along arcs without rotors.
//!
//! A routing step along arc `a` is legal when `tail(a)` holds at least one
//! particle. This module decides linear and legal reachability, with or
//! without a prescribed routing vector, and extracts explicit sequences.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::formal_sum::Config;
use crate::graph::{ArcId, Multigraph, VertexId};
use crate::maxflow::FlowNetwork;

/// Default cap on the number of steps produced by [`extract_legal_sequence`].
pub const DEFAULT_EXTRACTION_CAP: u64 = 1_000_000;

fn check_arcs(g: &Multigraph, r: &Config) -> Result<()> {
    if r.universe() != g.arc_universe() {
        return Err(Error::UniverseMismatch("routing vector is not over the arcs of this graph".into()));
    }
    Ok(())
}

fn check_vertices(g: &Multigraph, c: &Config) -> Result<()> {
    if c.universe() != g.vertex_universe() {
        return Err(Error::UniverseMismatch("configuration is not over the vertices of this graph".into()));
    }
    Ok(())
}

/// `∂(r) = Σ r_a (head(a) - tail(a))`.
pub fn boundary(g: &Multigraph, r: &Config) -> Result<Config> {
    check_arcs(g, r)?;
    let mut out = Config::zero(g.vertex_universe());
    for (a, k) in r.iter() {
        let (t, h) = (g.tail(a), g.head(a));
        if t != h {
            out.add_coeff(h, k.clone())?;
            out.add_coeff(t, -k.clone())?;
        }
    }
    Ok(out)
}

/// Smallest vertex of each weak component, in block order.
pub fn default_basepoint(g: &Multigraph) -> Vec<VertexId> {
    g.weak_components().blocks().iter().map(|b| b[0]).collect()
}

/// Applies the boundary section attached to `basepoint` (one vertex per
/// weak component, in block order). The result `s` satisfies
/// `∂(s) = σ - Σ_w deg_w(σ)·basepoint(w)`.
pub fn section_apply(g: &Multigraph, basepoint: &[VertexId], sigma: &Config) -> Result<Config> {
    check_vertices(g, sigma)?;
    let part = g.weak_components();
    if basepoint.len() != part.blocks().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} basepoints for {} weak components",
            basepoint.len(),
            part.blocks().len()
        )));
    }
    // undirected BFS tree from each basepoint; parent[v] = (arc, sign of the arc along the path b -> v)
    let n = g.num_vertices();
    let mut parent: Vec<Option<(ArcId, i8, VertexId)>> = vec![None; n];
    let mut seen = vec![false; n];
    for (block, &b) in basepoint.iter().enumerate() {
        if b >= n || part.block_of(b) != block {
            return Err(Error::precondition(format!("basepoint {b} does not lie in weak component {block}")));
        }
        seen[b] = true;
        let mut queue = VecDeque::from([b]);
        while let Some(v) = queue.pop_front() {
            for &a in g.out_arcs(v) {
                let w = g.head(a);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((a, 1, v));
                    queue.push_back(w);
                }
            }
            for &a in g.in_arcs(v) {
                let w = g.tail(a);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((a, -1, v));
                    queue.push_back(w);
                }
            }
        }
    }
    let mut out = Config::zero(g.arc_universe());
    for (v, k) in sigma.iter() {
        let mut cur = v;
        while let Some((a, sign, up)) = parent[cur] {
            out.add_coeff(a, if sign > 0 { k.clone() } else { -k.clone() })?;
            cur = up;
        }
    }
    Ok(out)
}

/// Kirchhoff's law at every vertex, i.e. `∂(r) = 0`.
pub fn is_cycle(g: &Multigraph, r: &Config) -> Result<bool> {
    Ok(boundary(g, r)?.is_zero())
}

/// A routing vector from `σ` to `σ'`, or `None` when the degrees differ.
pub fn linear_reachable(g: &Multigraph, sigma: &Config, sigma2: &Config) -> Result<Option<Config>> {
    check_vertices(g, sigma)?;
    check_vertices(g, sigma2)?;
    let part = g.weak_components();
    let diff = sigma2.sub(sigma)?;
    if !diff.degree(&part)?.is_zero() {
        return Ok(None);
    }
    Ok(Some(section_apply(g, &default_basepoint(g), &diff)?))
}

/// Vertices with an out-arc in `r` on which `σ'` vanishes.
pub fn transitory_vertices(g: &Multigraph, r: &Config, sigma2: &Config) -> Result<BTreeSet<VertexId>> {
    check_arcs(g, r)?;
    check_vertices(g, sigma2)?;
    if !r.is_nonnegative() {
        return Err(Error::precondition("transitory vertices need a nonnegative routing vector"));
    }
    Ok(active_vertices(g, r)
        .into_iter()
        .filter(|&v| sigma2.get(v).is_zero())
        .collect())
}

/// Tails of the elements of a nonnegative vector.
pub fn active_vertices(g: &Multigraph, r: &Config) -> BTreeSet<VertexId> {
    r.elements().into_iter().map(|a| g.tail(a)).collect()
}

/// One escape arc per transitory vertex, without cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuidingSet {
    pub arcs: BTreeSet<ArcId>,
    pub exit: BTreeMap<VertexId, ArcId>,
}

fn check_linear(g: &Multigraph, sigma: &Config, r: &Config, sigma2: &Config) -> Result<()> {
    check_vertices(g, sigma)?;
    if sigma.add(&boundary(g, r)?)? != *sigma2 {
        return Err(Error::precondition("target differs from source plus the boundary of the routing vector"));
    }
    Ok(())
}

/// Whether the arc set `set` is guiding for `σ →_r σ'`.
pub fn is_guiding(g: &Multigraph, set: &BTreeSet<ArcId>, r: &Config, sigma: &Config, sigma2: &Config) -> Result<bool> {
    check_linear(g, sigma, r, sigma2)?;
    let trans = transitory_vertices(g, r, sigma2)?;
    if set.iter().any(|&a| a >= g.num_arcs() || !r.is_positive_at(a)) {
        return Ok(false);
    }
    // backward search from non-transitory vertices through arcs of the set
    let mut good: Vec<bool> = (0..g.num_vertices()).map(|v| !trans.contains(&v)).collect();
    let mut queue: VecDeque<VertexId> = (0..g.num_vertices()).filter(|&v| good[v]).collect();
    while let Some(w) = queue.pop_front() {
        for &a in g.in_arcs(w) {
            let v = g.tail(a);
            if set.contains(&a) && !good[v] {
                good[v] = true;
                queue.push_back(v);
            }
        }
    }
    Ok(good.into_iter().all(|b| b))
}

/// A guiding tree for `r` towards `σ'`, if the elements of `r` are guiding.
pub fn find_guiding_tree(g: &Multigraph, r: &Config, sigma2: &Config) -> Result<Option<GuidingSet>> {
    let trans = transitory_vertices(g, r, sigma2)?;
    let mut good: Vec<bool> = (0..g.num_vertices()).map(|v| !trans.contains(&v)).collect();
    let mut queue: VecDeque<VertexId> = (0..g.num_vertices()).filter(|&v| good[v]).collect();
    let mut exit = BTreeMap::new();
    while let Some(w) = queue.pop_front() {
        for &a in g.in_arcs(w) {
            let v = g.tail(a);
            if !good[v] && r.is_positive_at(a) {
                good[v] = true;
                exit.insert(v, a);
                queue.push_back(v);
            }
        }
    }
    if exit.len() != trans.len() {
        return Ok(None);
    }
    Ok(Some(GuidingSet {
        arcs: exit.values().copied().collect(),
        exit,
    }))
}

/// Decides whether some legal sequence leads from `σ` to `σ'` and returns a
/// legal routing vector when it does. The vector bounds a legal sequence
/// but need not be realisable exactly.
pub fn legal_vector_search(g: &Multigraph, sigma: &Config, sigma2: &Config) -> Result<Option<Config>> {
    check_vertices(g, sigma)?;
    check_vertices(g, sigma2)?;
    let diff = sigma.sub(sigma2)?;
    let plus: Vec<VertexId> = diff.iter().filter(|(_, k)| k.is_positive()).map(|(v, _)| v).collect();
    let minus: Vec<VertexId> = diff.iter().filter(|(_, k)| k.is_negative()).map(|(v, _)| v).collect();
    let supply: BigInt = plus.iter().map(|&v| diff.get(v)).sum();
    let demand: BigInt = minus.iter().map(|&v| -diff.get(v)).sum();
    if supply != demand {
        return Ok(None);
    }
    if supply.is_zero() {
        return Ok(Some(Config::zero(g.arc_universe())));
    }
    let blocked: BTreeSet<VertexId> = sigma2.iter().filter(|(_, k)| k.is_negative()).map(|(v, _)| v).collect();
    // nodes: 0 = source, 1 = sink, then V+ then V-
    let mut net = FlowNetwork::new(2 + plus.len() + minus.len());
    for (i, &v) in plus.iter().enumerate() {
        net.add_edge(0, 2 + i, diff.get(v));
    }
    for (j, &v) in minus.iter().enumerate() {
        net.add_edge(2 + plus.len() + j, 1, -diff.get(v));
    }
    let mut middle = Vec::new();
    for (i, &u) in plus.iter().enumerate() {
        let reach = g.reachable_avoiding(&[u], &blocked);
        for (j, &w) in minus.iter().enumerate() {
            if reach[w] {
                let e = net.add_edge(2 + i, 2 + plus.len() + j, supply.clone());
                middle.push((e, u, w));
            }
        }
    }
    if net.max_flow(0, 1) != supply {
        return Ok(None);
    }
    let mut r = Config::zero(g.arc_universe());
    for (e, u, w) in middle {
        let f = net.flow(e).clone();
        if f.is_positive() {
            for a in shortest_path(g, u, w, &blocked) {
                r.add_coeff(a, f.clone())?;
            }
        }
    }
    Ok(Some(r))
}

/// Arcs of a BFS-shortest directed path avoiding `blocked` tails.
fn shortest_path(g: &Multigraph, from: VertexId, to: VertexId, blocked: &BTreeSet<VertexId>) -> Vec<ArcId> {
    let mut via: Vec<Option<ArcId>> = vec![None; g.num_vertices()];
    let mut seen = vec![false; g.num_vertices()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to || blocked.contains(&v) {
            continue;
        }
        for &a in g.out_arcs(v) {
            let w = g.head(a);
            if !seen[w] {
                seen[w] = true;
                via[w] = Some(a);
                queue.push_back(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = to;
    while let Some(a) = via[cur] {
        path.push(a);
        cur = g.tail(a);
    }
    path.reverse();
    path
}

/// Decides `σ ⇒_r σ'`: a legal sequence whose routing vector is exactly `r`.
pub fn legal_with_vector(g: &Multigraph, sigma: &Config, r: &Config, sigma2: &Config) -> Result<bool> {
    check_arcs(g, r)?;
    check_linear(g, sigma, r, sigma2)?;
    if !r.is_nonnegative() {
        return Ok(false);
    }
    if active_vertices(g, r).iter().any(|&v| sigma2.is_negative_at(v)) {
        return Ok(false);
    }
    Ok(find_guiding_tree(g, r, sigma2)?.is_some())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegalSequence {
    pub start: Config,
    pub steps: Vec<ArcId>,
}

impl LegalSequence {
    /// Replays the sequence and returns the final configuration.
    pub fn replay(&self, g: &Multigraph) -> Result<Config> {
        replay_sequence(g, &self.start, &self.steps)
    }

    pub fn routing_vector(&self, g: &Multigraph) -> Config {
        Config::from_pairs(g.arc_universe(), self.steps.iter().map(|&a| (a, 1))).expect("steps are arcs")
    }
}

/// Routes along `steps` from `start`, failing on the first illegal step.
pub fn replay_sequence(g: &Multigraph, start: &Config, steps: &[ArcId]) -> Result<Config> {
    check_vertices(g, start)?;
    let mut sigma = start.clone();
    for (i, &a) in steps.iter().enumerate() {
        if a >= g.num_arcs() {
            return Err(Error::IndexOutOfRange {
                index: a,
                size: g.num_arcs(),
            });
        }
        let t = g.tail(a);
        if !sigma.is_positive_at(t) {
            return Err(Error::IllegalStep(format!(
                "step {i}: arc {} leaves {} which holds {}",
                g.arc_name(a),
                g.vertex_name(t),
                sigma.get(t)
            )));
        }
        sigma.add_coeff(t, -BigInt::one())?;
        sigma.add_coeff(g.head(a), BigInt::one())?;
    }
    Ok(sigma)
}

/// Greedy construction of a legal sequence with routing vector exactly `r`,
/// saving the tree arc of each transitory vertex for its last exit.
pub fn extract_legal_sequence(
    g: &Multigraph,
    sigma: &Config,
    r: &Config,
    tree: &GuidingSet,
    step_cap: u64,
) -> Result<LegalSequence> {
    let sigma2 = sigma.add(&boundary(g, r)?)?;
    if !legal_with_vector(g, sigma, r, &sigma2)? {
        return Err(Error::precondition("no legal sequence has this routing vector"));
    }
    let trans = transitory_vertices(g, r, &sigma2)?;
    if tree.exit.keys().copied().collect::<BTreeSet<_>>() != trans
        || tree.exit.iter().any(|(&v, &a)| g.tail(a) != v)
        || !is_guiding(g, &tree.arcs, r, sigma, &sigma2)?
    {
        return Err(Error::precondition("not a guiding tree for this routing"));
    }
    let mut remaining = r.to_dense();
    let mut cur = sigma.to_dense();
    // distinct remaining arcs per vertex
    let mut distinct = vec![0usize; g.num_vertices()];
    for a in r.support() {
        distinct[g.tail(a)] += 1;
    }
    let mut steps = Vec::new();
    let mut left: BigInt = r.total();
    while left.is_positive() {
        if steps.len() as u64 >= step_cap {
            return Err(Error::StepCapExceeded { cap: step_cap, partial: steps });
        }
        let pick = (0..g.num_arcs()).find(|&a| {
            let t = g.tail(a);
            remaining[a].is_positive()
                && cur[t].is_positive()
                && !(tree.exit.get(&t) == Some(&a) && distinct[t] > 1)
        });
        let Some(a) = pick else {
            return Err(Error::IllegalStep("greedy extraction is stuck".into()));
        };
        let (t, h) = (g.tail(a), g.head(a));
        remaining[a] -= 1;
        if remaining[a].is_zero() {
            distinct[t] -= 1;
        }
        cur[t] -= 1;
        cur[h] += 1;
        left -= 1;
        steps.push(a);
    }
    Ok(LegalSequence {
        start: sigma.clone(),
        steps,
    })
}

/// Convenience wrapper: a legal sequence realising `r`, if one exists.
pub fn legal_sequence_for(g: &Multigraph, sigma: &Config, r: &Config, step_cap: u64) -> Result<Option<LegalSequence>> {
    let sigma2 = sigma.add(&boundary(g, r)?)?;
    if !legal_with_vector(g, sigma, r, &sigma2)? {
        return Ok(None);
    }
    let tree = find_guiding_tree(g, r, &sigma2)?.expect("legal routing has a guiding tree");
    extract_legal_sequence(g, sigma, r, &tree, step_cap).map(Some)
}

/// Arcs that can be the last step of a legal sequence with vector `r`.
/// Only defined for legal routings; an illegal one is a precondition error.
pub fn compute_traces(g: &Multigraph, sigma: &Config, r: &Config, sigma2: &Config) -> Result<BTreeSet<ArcId>> {
    if !legal_with_vector(g, sigma, r, sigma2)? {
        return Err(Error::precondition("traces are only defined for a legal routing"));
    }
    let mut out = BTreeSet::new();
    for a in r.elements() {
        if is_trace(g, sigma, r, sigma2, a)? {
            out.insert(a);
        }
    }
    Ok(out)
}

/// Trace probe for one element `a` of `r`: the routing with `a` removed
/// must reach `σ' - ∂(a)` legally, and `tail(a)` must then hold a particle.
pub(crate) fn is_trace(g: &Multigraph, sigma: &Config, r: &Config, sigma2: &Config, a: ArcId) -> Result<bool> {
    let unit = Config::unit(g.arc_universe(), a)?;
    let before = sigma2.sub(&boundary(g, &unit)?)?;
    if !before.is_positive_at(g.tail(a)) {
        return Ok(false);
    }
    legal_with_vector(g, sigma, &r.sub(&unit)?, &before)
}
