//! Directed multigraphs and their component structure.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::formal_sum::{IndexKind, Universe};

pub type VertexId = usize;
pub type ArcId = usize;

/// Default vertex bound for the exhaustive arborescence enumerator.
pub const ARBORESCENCE_ORACLE_BOUND: usize = 10;

/// Finite directed multigraph with named vertices and arcs. Loops and
/// parallel arcs are allowed. Indices follow declaration order.
#[derive(Debug, Clone)]
pub struct Multigraph {
    vertex_names: Vec<String>,
    arc_names: Vec<String>,
    vertex_index: HashMap<String, VertexId>,
    arc_index: HashMap<String, ArcId>,
    tail: Vec<VertexId>,
    head: Vec<VertexId>,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
    vertex_universe: Universe,
    arc_universe: Universe,
}

#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    vertices: Vec<String>,
    arcs: Vec<(String, String, String)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, name: &str) -> Self {
        self.vertices.push(name.to_string());
        self
    }

    pub fn vertices<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.vertices.extend(names.into_iter().map(|s| s.as_ref().to_string()));
        self
    }

    pub fn arc(mut self, name: &str, tail: &str, head: &str) -> Self {
        self.arcs.push((name.to_string(), tail.to_string(), head.to_string()));
        self
    }

    pub fn build(self) -> Result<Multigraph> {
        let mut vertex_index = HashMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "vertex",
                    name: v.clone(),
                });
            }
        }
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (name, t, h) in &self.arcs {
            let lookup = |v: &String| {
                vertex_index.get(v).copied().ok_or_else(|| Error::UnknownId {
                    kind: "vertex",
                    name: v.clone(),
                })
            };
            arcs.push((name.clone(), lookup(t)?, lookup(h)?));
        }
        Multigraph::from_indexed(self.vertices, arcs, None)
    }
}

impl Multigraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Builds a graph from index-based arcs. `vertex_universe` lets a graph
    /// reuse an existing index set as its vertices (the face graph of a GRM
    /// has the arcs of the vertex graph as vertices).
    pub fn from_indexed(
        vertex_names: Vec<String>,
        arcs: Vec<(String, VertexId, VertexId)>,
        vertex_universe: Option<Universe>,
    ) -> Result<Multigraph> {
        let n = vertex_names.len();
        let mut vertex_index = HashMap::new();
        for (i, v) in vertex_names.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "vertex",
                    name: v.clone(),
                });
            }
        }
        let vertex_universe = match vertex_universe {
            Some(u) if u.size() != n => {
                return Err(Error::DimensionMismatch(format!(
                    "vertex universe of size {} for {} vertices",
                    u.size(),
                    n
                )))
            }
            Some(u) => u,
            None => Universe::fresh(IndexKind::Vertex, n),
        };
        let arc_kind = if vertex_universe.kind() == IndexKind::Arc {
            IndexKind::Face
        } else {
            IndexKind::Arc
        };
        let mut g = Multigraph {
            vertex_names,
            arc_names: Vec::with_capacity(arcs.len()),
            vertex_index,
            arc_index: HashMap::new(),
            tail: Vec::with_capacity(arcs.len()),
            head: Vec::with_capacity(arcs.len()),
            out_arcs: vec![Vec::new(); n],
            in_arcs: vec![Vec::new(); n],
            vertex_universe,
            arc_universe: Universe::fresh(arc_kind, arcs.len()),
        };
        for (i, (name, t, h)) in arcs.into_iter().enumerate() {
            if t >= n || h >= n {
                return Err(Error::IndexOutOfRange {
                    index: t.max(h),
                    size: n,
                });
            }
            if g.arc_index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateId { kind: "arc", name });
            }
            g.arc_names.push(name);
            g.tail.push(t);
            g.head.push(h);
            g.out_arcs[t].push(i);
            g.in_arcs[h].push(i);
        }
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arc_names.len()
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn arc_names(&self) -> &[String] {
        &self.arc_names
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v]
    }

    pub fn arc_name(&self, a: ArcId) -> &str {
        &self.arc_names[a]
    }

    pub fn vertex_index_map(&self) -> &HashMap<String, VertexId> {
        &self.vertex_index
    }

    pub fn arc_index_map(&self) -> &HashMap<String, ArcId> {
        &self.arc_index
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId> {
        self.vertex_index.get(name).copied().ok_or_else(|| Error::UnknownId {
            kind: "vertex",
            name: name.to_string(),
        })
    }

    pub fn arc(&self, name: &str) -> Result<ArcId> {
        self.arc_index.get(name).copied().ok_or_else(|| Error::UnknownId {
            kind: "arc",
            name: name.to_string(),
        })
    }

    pub fn tail(&self, a: ArcId) -> VertexId {
        self.tail[a]
    }

    pub fn head(&self, a: ArcId) -> VertexId {
        self.head[a]
    }

    /// Out-arcs of `v` in declaration order.
    pub fn out_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.out_arcs[v]
    }

    pub fn in_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.in_arcs[v]
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.out_arcs[v].is_empty()
    }

    pub fn sinks(&self) -> Vec<VertexId> {
        (0..self.num_vertices()).filter(|&v| self.is_sink(v)).collect()
    }

    pub fn vertex_universe(&self) -> Universe {
        self.vertex_universe
    }

    pub fn arc_universe(&self) -> Universe {
        self.arc_universe
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: v,
                size: self.num_vertices(),
            })
        }
    }

    pub fn weak_components(&self) -> ComponentPartition {
        let n = self.num_vertices();
        let mut block_of = vec![usize::MAX; n];
        let mut blocks = Vec::new();
        for start in 0..n {
            if block_of[start] != usize::MAX {
                continue;
            }
            let b = blocks.len();
            let mut members = vec![start];
            block_of[start] = b;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let nbrs = self.out_arcs[v]
                    .iter()
                    .map(|&a| self.head[a])
                    .chain(self.in_arcs[v].iter().map(|&a| self.tail[a]));
                for w in nbrs {
                    if block_of[w] == usize::MAX {
                        block_of[w] = b;
                        members.push(w);
                        queue.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            blocks.push(members);
        }
        ComponentPartition::new(ComponentKind::Weak, blocks, block_of, self.vertex_universe)
    }

    /// Strongly connected components in topological order (arcs between
    /// blocks go from lower to higher block index), and the indices of the
    /// leaf blocks, i.e. those with no outgoing arc.
    pub fn strong_and_leaf_components(&self) -> (ComponentPartition, Vec<usize>) {
        let n = self.num_vertices();
        // iterative Tarjan
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut next = 0;
        let mut sccs: Vec<Vec<VertexId>> = Vec::new();
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(VertexId, usize)> = vec![(root, 0)];
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                if *pos < self.out_arcs[v].len() {
                    let w = self.head[self.out_arcs[v][*pos]];
                    *pos += 1;
                    if index[w] == usize::MAX {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(u, _)) = call.last() {
                        low[u] = low[u].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        sccs.push(comp);
                    }
                }
            }
        }
        // Tarjan emits components in reverse topological order.
        sccs.reverse();
        let mut block_of = vec![0; n];
        for (b, comp) in sccs.iter().enumerate() {
            for &v in comp {
                block_of[v] = b;
            }
        }
        let leaves = (0..sccs.len())
            .filter(|&b| {
                sccs[b]
                    .iter()
                    .all(|&v| self.out_arcs[v].iter().all(|&a| block_of[self.head[a]] == b))
            })
            .collect();
        (
            ComponentPartition::new(ComponentKind::Strong, sccs, block_of, self.vertex_universe),
            leaves,
        )
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.strong_and_leaf_components().0.blocks().len() <= 1
    }

    /// True iff every vertex has a directed path to a sink.
    pub fn is_stopping(&self) -> bool {
        let n = self.num_vertices();
        let mut seen = vec![false; n];
        let mut queue: VecDeque<VertexId> = self.sinks().into();
        for &s in &queue {
            seen[s] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &a in &self.in_arcs[v] {
                let u = self.tail[a];
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// Directed path from `x` to `y` avoiding arcs whose tail is in `forbidden_tails`.
    pub fn directed_path_exists(&self, x: VertexId, y: VertexId, forbidden_tails: &BTreeSet<VertexId>) -> Result<bool> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        Ok(self.reachable_avoiding(&[x], forbidden_tails)[y])
    }

    /// Vertices reachable from `starts` without leaving through a forbidden tail.
    pub fn reachable_avoiding(&self, starts: &[VertexId], forbidden_tails: &BTreeSet<VertexId>) -> Vec<bool> {
        let mut seen = vec![false; self.num_vertices()];
        let mut queue = VecDeque::new();
        for &s in starts {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            if forbidden_tails.contains(&v) {
                continue;
            }
            for &a in &self.out_arcs[v] {
                let w = self.head[a];
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Counts arborescences rooted in `roots` by trying every choice of one
    /// out-arc per non-root vertex. Arcs leaving a root are never chosen.
    pub fn enumerate_arborescences(&self, roots: &BTreeSet<VertexId>) -> Result<u64> {
        self.enumerate_arborescences_bounded(roots, ARBORESCENCE_ORACLE_BOUND)
    }

    pub fn enumerate_arborescences_bounded(&self, roots: &BTreeSet<VertexId>, bound: usize) -> Result<u64> {
        let n = self.num_vertices();
        if n > bound {
            return Err(Error::OracleBound(format!("{n} vertices exceed the enumeration bound {bound}")));
        }
        for &r in roots {
            self.check_vertex(r)?;
        }
        let free: Vec<VertexId> = (0..n).filter(|v| !roots.contains(v)).collect();
        if free.iter().any(|&v| self.out_arcs[v].is_empty()) {
            return Ok(0);
        }
        let mut choice = vec![0usize; free.len()];
        let mut succ = vec![usize::MAX; n];
        let mut count = 0u64;
        loop {
            for (k, &v) in free.iter().enumerate() {
                succ[v] = self.head[self.out_arcs[v][choice[k]]];
            }
            if free.iter().all(|&v| reaches_root(v, &succ, roots, n)) {
                count += 1;
            }
            // odometer increment
            let mut k = 0;
            loop {
                if k == free.len() {
                    return Ok(count);
                }
                choice[k] += 1;
                if choice[k] < self.out_arcs[free[k]].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
}

fn reaches_root(mut v: VertexId, succ: &[usize], roots: &BTreeSet<VertexId>, n: usize) -> bool {
    for _ in 0..=n {
        if roots.contains(&v) {
            return true;
        }
        v = succ[v];
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Weak,
    Strong,
}

/// Partition of the vertex set into blocks.
#[derive(Debug, Clone)]
pub struct ComponentPartition {
    kind: ComponentKind,
    blocks: Vec<Vec<VertexId>>,
    block_of: Vec<usize>,
    ground: Universe,
    block_universe: Universe,
}

impl ComponentPartition {
    fn new(kind: ComponentKind, blocks: Vec<Vec<VertexId>>, block_of: Vec<usize>, ground: Universe) -> Self {
        let block_universe = Universe::fresh(IndexKind::Block, blocks.len());
        ComponentPartition {
            kind,
            blocks,
            block_of,
            ground,
            block_universe,
        }
    }

    pub fn kind(&self) -> ComponentKind {
        self.kind
    }

    pub fn blocks(&self) -> &[Vec<VertexId>] {
        &self.blocks
    }

    pub fn block_of(&self, v: VertexId) -> usize {
        self.block_of[v]
    }

    pub fn ground(&self) -> Universe {
        self.ground
    }

    pub fn block_universe(&self) -> Universe {
        self.block_universe
    }
}
