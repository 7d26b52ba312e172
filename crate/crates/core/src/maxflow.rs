//! Edmonds-Karp maximum flow with arbitrary-precision capacities.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: BigInt,
    flow: BigInt,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds `u -> v` with capacity `cap` and returns its handle.
    pub(crate) fn add_edge(&mut self, u: usize, v: usize, cap: BigInt) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge {
            to: v,
            cap,
            flow: BigInt::zero(),
        });
        self.edges.push(Edge {
            to: u,
            cap: BigInt::zero(),
            flow: BigInt::zero(),
        });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    pub(crate) fn flow(&self, edge: usize) -> &BigInt {
        &self.edges[edge].flow
    }

    fn residual(&self, e: usize) -> BigInt {
        &self.edges[e].cap - &self.edges[e].flow
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> BigInt {
        let mut total = BigInt::zero();
        if s == t {
            return total;
        }
        loop {
            let mut via = vec![usize::MAX; self.adj.len()];
            let mut queue = VecDeque::from([s]);
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.edges[e].to;
                    if !seen[v] && self.residual(e).is_positive() {
                        seen[v] = true;
                        via[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck: Option<BigInt> = None;
            let mut v = t;
            while v != s {
                let e = via[v];
                let r = self.residual(e);
                bottleneck = Some(match bottleneck {
                    Some(b) if b <= r => b,
                    _ => r,
                });
                v = self.edges[e ^ 1].to;
            }
            let b = bottleneck.expect("augmenting path is nonempty");
            let mut v = t;
            while v != s {
                let e = via[v];
                self.edges[e].flow += &b;
                self.edges[e ^ 1].flow -= &b;
                v = self.edges[e ^ 1].to;
            }
            total += b;
        }
    }
}
