//! Standard rotor-routing: rotor walks, run and flow certificates, recurrence.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::formal_sum::Config;
use crate::graph::{ArcId, Multigraph, VertexId};

/// Default cap on the number of routing operations of a walk.
pub const DEFAULT_WALK_CAP: u64 = 10_000_000;

/// A multigraph with a circular order `θ` on the out-arcs of every vertex.
#[derive(Debug, Clone)]
pub struct RotorMultigraph {
    graph: Multigraph,
    theta: Vec<ArcId>,
    theta_inv: Vec<ArcId>,
}

impl RotorMultigraph {
    /// `orders[v]` lists `A⁺(v)` in rotor order; `θ` maps each arc to the next, cyclically.
    pub fn from_orders(graph: Multigraph, orders: &[Vec<ArcId>]) -> Result<Self> {
        if orders.len() != graph.num_vertices() {
            return Err(Error::DimensionMismatch(format!(
                "{} rotor orders for {} vertices",
                orders.len(),
                graph.num_vertices()
            )));
        }
        let mut theta = vec![usize::MAX; graph.num_arcs()];
        for (v, order) in orders.iter().enumerate() {
            let given: BTreeSet<ArcId> = order.iter().copied().collect();
            let expected: BTreeSet<ArcId> = graph.out_arcs(v).iter().copied().collect();
            if given != expected || given.len() != order.len() {
                return Err(Error::precondition(format!(
                    "rotor order at {} does not list each out-arc exactly once",
                    graph.vertex_name(v)
                )));
            }
            for (i, &a) in order.iter().enumerate() {
                theta[a] = order[(i + 1) % order.len()];
            }
        }
        Self::from_theta(graph, theta)
    }

    /// Rotor order equal to the declaration order of out-arcs.
    pub fn with_declaration_order(graph: Multigraph) -> Self {
        let orders: Vec<Vec<ArcId>> = (0..graph.num_vertices()).map(|v| graph.out_arcs(v).to_vec()).collect();
        Self::from_orders(graph, &orders).expect("declaration order covers every out-set")
    }

    /// Checks that `theta` restricted to each out-set is a single cycle.
    pub fn from_theta(graph: Multigraph, theta: Vec<ArcId>) -> Result<Self> {
        if theta.len() != graph.num_arcs() {
            return Err(Error::DimensionMismatch(format!(
                "theta has {} entries for {} arcs",
                theta.len(),
                graph.num_arcs()
            )));
        }
        let mut theta_inv = vec![usize::MAX; graph.num_arcs()];
        for (a, &b) in theta.iter().enumerate() {
            if b >= graph.num_arcs() || graph.tail(b) != graph.tail(a) || theta_inv[b] != usize::MAX {
                return Err(Error::precondition(format!(
                    "theta is not a permutation of the out-arcs of {}",
                    graph.vertex_name(graph.tail(a))
                )));
            }
            theta_inv[b] = a;
        }
        for v in 0..graph.num_vertices() {
            let out = graph.out_arcs(v);
            if let Some(&first) = out.first() {
                let mut len = 1;
                let mut a = theta[first];
                while a != first {
                    a = theta[a];
                    len += 1;
                }
                if len != out.len() {
                    return Err(Error::precondition(format!(
                        "rotor at {} is not a single cycle",
                        graph.vertex_name(v)
                    )));
                }
            }
        }
        Ok(RotorMultigraph {
            graph,
            theta,
            theta_inv,
        })
    }

    pub fn graph(&self) -> &Multigraph {
        &self.graph
    }

    pub fn theta(&self, a: ArcId) -> ArcId {
        self.theta[a]
    }

    pub fn theta_inv(&self, a: ArcId) -> ArcId {
        self.theta_inv[a]
    }

    /// Out-arcs of `v` in rotor order starting from `start`.
    pub fn orbit(&self, start: ArcId) -> Vec<ArcId> {
        let mut out = vec![start];
        let mut a = self.theta[start];
        while a != start {
            out.push(a);
            a = self.theta[a];
        }
        out
    }

    /// Rotor order at `v` starting from its first declared out-arc.
    pub fn order_at(&self, v: VertexId) -> Vec<ArcId> {
        self.graph.out_arcs(v).first().map_or_else(Vec::new, |&a| self.orbit(a))
    }
}

/// One arc `ρ(v) ∈ A⁺(v)` per non-sink vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RotorConfiguration {
    assignment: Vec<Option<ArcId>>,
}

impl RotorConfiguration {
    pub fn new(g: &Multigraph, arcs: &[ArcId]) -> Result<Self> {
        let mut assignment = vec![None; g.num_vertices()];
        for &a in arcs {
            if a >= g.num_arcs() {
                return Err(Error::IndexOutOfRange {
                    index: a,
                    size: g.num_arcs(),
                });
            }
            let v = g.tail(a);
            if assignment[v].replace(a).is_some() {
                return Err(Error::precondition(format!("two rotor arcs at {}", g.vertex_name(v))));
            }
        }
        if let Some(v) = (0..g.num_vertices()).find(|&v| !g.is_sink(v) && assignment[v].is_none()) {
            return Err(Error::precondition(format!("no rotor arc at {}", g.vertex_name(v))));
        }
        Ok(RotorConfiguration { assignment })
    }

    /// Reads a 0/1 arc configuration with exactly one arc per non-sink vertex.
    pub fn from_config(g: &Multigraph, c: &Config) -> Result<Self> {
        if c.universe() != g.arc_universe() {
            return Err(Error::UniverseMismatch("rotor configuration is not over arcs".into()));
        }
        if c.iter().any(|(_, k)| !k.is_one()) {
            return Err(Error::precondition("rotor configuration coefficients must be 0 or 1"));
        }
        Self::new(g, &c.support().collect::<Vec<_>>())
    }

    /// First declared out-arc at every non-sink vertex.
    pub fn first_arcs(g: &Multigraph) -> Self {
        RotorConfiguration {
            assignment: (0..g.num_vertices()).map(|v| g.out_arcs(v).first().copied()).collect(),
        }
    }

    pub fn get(&self, v: VertexId) -> Option<ArcId> {
        self.assignment[v]
    }

    pub fn arcs(&self) -> impl Iterator<Item = ArcId> + '_ {
        self.assignment.iter().flatten().copied()
    }

    pub fn to_config(&self, g: &Multigraph) -> Config {
        Config::indicator(g.arc_universe(), self.arcs()).expect("rotor arcs are arcs")
    }

    fn set(&mut self, v: VertexId, a: ArcId) {
        self.assignment[v] = Some(a);
    }

    /// Applies `θ` at every vertex.
    pub fn turned(&self, rg: &RotorMultigraph) -> Self {
        RotorConfiguration {
            assignment: self.assignment.iter().map(|a| a.map(|a| rg.theta(a))).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Move the particle along `ρ(v)`, then turn the rotor.
    MoveTurn,
    /// Turn the rotor, then move along the new arc.
    TurnMove,
}

fn check_rotor_inputs(rg: &RotorMultigraph, rho: &RotorConfiguration, sigma: &Config) -> Result<()> {
    let g = rg.graph();
    if sigma.universe() != g.vertex_universe() {
        return Err(Error::UniverseMismatch("particle configuration is not over this graph".into()));
    }
    if rho.assignment.len() != g.num_vertices() {
        return Err(Error::precondition("rotor configuration belongs to another graph"));
    }
    Ok(())
}

/// One routing operation at `v`.
pub fn rotor_step(
    rg: &RotorMultigraph,
    rho: &RotorConfiguration,
    sigma: &Config,
    v: VertexId,
    convention: Convention,
) -> Result<(RotorConfiguration, Config)> {
    check_rotor_inputs(rg, rho, sigma)?;
    let g = rg.graph();
    let Some(cur) = rho.get(v) else {
        return Err(Error::IllegalStep(format!("{} is a sink", g.vertex_name(v))));
    };
    if !sigma.is_positive_at(v) {
        return Err(Error::IllegalStep(format!("no particle at {}", g.vertex_name(v))));
    }
    let mut rho1 = rho.clone();
    let arc = match convention {
        Convention::MoveTurn => cur,
        Convention::TurnMove => rg.theta(cur),
    };
    rho1.set(v, rg.theta(cur));
    let mut sigma1 = sigma.clone();
    sigma1.add_coeff(v, -BigInt::one())?;
    sigma1.add_coeff(g.head(arc), BigInt::one())?;
    Ok((rho1, sigma1))
}

/// Choice of the next vertex to route among those holding particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    CanonicalMin,
    ReverseCanonical,
    Fifo,
}

/// Arc-indexed nonnegative counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    values: Config,
}

impl Flow {
    pub fn new(values: Config) -> Result<Self> {
        if !values.is_nonnegative() {
            return Err(Error::precondition("flow values must be nonnegative"));
        }
        Ok(Flow { values })
    }

    pub fn get(&self, a: ArcId) -> BigInt {
        self.values.get(a)
    }

    pub fn values(&self) -> &Config {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkResult {
    pub rho: RotorConfiguration,
    pub sigma: Config,
    pub run: Flow,
    pub steps_per_vertex: Config,
}

/// Routes particles until every non-sink vertex is empty.
pub fn maximal_rotor_walk(
    rg: &RotorMultigraph,
    rho: &RotorConfiguration,
    sigma: &Config,
    policy: Policy,
    step_cap: u64,
) -> Result<WalkResult> {
    check_rotor_inputs(rg, rho, sigma)?;
    let g = rg.graph();
    if !sigma.is_nonnegative() {
        return Err(Error::precondition("rotor walks need a nonnegative particle configuration"));
    }
    if !g.is_stopping() {
        return Err(Error::NotStopping);
    }
    let n = g.num_vertices();
    let mut rho = rho.clone();
    let mut load: Vec<BigInt> = sigma.to_dense();
    let mut run = vec![0u64; g.num_arcs()];
    let mut fired = vec![0u64; n];
    let mut steps = 0u64;
    let routable = |v: VertexId, load: &[BigInt]| !g.is_sink(v) && load[v].is_positive();
    let mut ready: BTreeSet<VertexId> = (0..n).filter(|&v| routable(v, &load)).collect();
    let mut queue: VecDeque<VertexId> = ready.iter().copied().collect();
    loop {
        let v = match policy {
            Policy::CanonicalMin => ready.first().copied(),
            Policy::ReverseCanonical => ready.last().copied(),
            Policy::Fifo => queue.front().copied(),
        };
        let Some(v) = v else { break };
        if steps >= step_cap {
            return Err(Error::WalkStepCapExceeded { cap: step_cap });
        }
        steps += 1;
        let a = rho.get(v).expect("routable vertices are not sinks");
        let h = g.head(a);
        rho.set(v, rg.theta(a));
        load[v] -= 1;
        load[h] += 1;
        run[a] += 1;
        fired[v] += 1;
        if !routable(v, &load) {
            ready.remove(&v);
            if policy == Policy::Fifo {
                queue.pop_front();
            }
        } else if policy == Policy::Fifo {
            queue.rotate_left(1);
        }
        if routable(h, &load) && ready.insert(h) && policy == Policy::Fifo {
            queue.push_back(h);
        }
    }
    let sigma_out = Config::from_pairs(g.vertex_universe(), load.into_iter().enumerate())?;
    Ok(WalkResult {
        rho,
        sigma: sigma_out,
        run: Flow::new(Config::from_pairs(g.arc_universe(), run.into_iter().enumerate())?)?,
        steps_per_vertex: Config::from_pairs(g.vertex_universe(), fired.into_iter().enumerate())?,
    })
}

fn check_flow_inputs(rg: &RotorMultigraph, f: &Flow, rho: &RotorConfiguration, sigma: &Config, sigma1: &Config) -> Result<()> {
    check_rotor_inputs(rg, rho, sigma)?;
    if sigma1.universe() != rg.graph().vertex_universe() || f.values.universe() != rg.graph().arc_universe() {
        return Err(Error::UniverseMismatch("flow certificate is not over this graph".into()));
    }
    Ok(())
}

fn rotor_chain_holds(rg: &RotorMultigraph, f: &Flow, start: ArcId) -> bool {
    let top = f.get(start);
    let floor = &top - 1;
    let mut prev = top;
    for a in rg.orbit(start) {
        let x = f.get(a);
        if x > prev || x < floor {
            return false;
        }
        prev = x;
    }
    true
}

/// Flow conservation at every vertex and the rotor chain at every non-sink.
/// A final configuration with particles outside the sinks is rejected.
pub fn verify_flow(rg: &RotorMultigraph, f: &Flow, rho: &RotorConfiguration, sigma: &Config, sigma1: &Config) -> Result<bool> {
    check_flow_inputs(rg, f, rho, sigma, sigma1)?;
    let g = rg.graph();
    if sigma1.support().any(|v| !g.is_sink(v)) {
        return Ok(false);
    }
    for v in 0..g.num_vertices() {
        let inflow: BigInt = g.in_arcs(v).iter().map(|&a| f.get(a)).sum();
        let outflow: BigInt = g.out_arcs(v).iter().map(|&a| f.get(a)).sum();
        if inflow + sigma.get(v) != outflow + sigma1.get(v) {
            return Ok(false);
        }
    }
    Ok((0..g.num_vertices()).all(|v| rho.get(v).is_none_or(|a| rotor_chain_holds(rg, f, a))))
}

/// Final rotors read off a flow: the first arc after `ρ(v)` where `f` drops.
pub fn rotor_config_from_flow(rg: &RotorMultigraph, f: &Flow, rho: &RotorConfiguration) -> Result<RotorConfiguration> {
    let g = rg.graph();
    if f.values.universe() != g.arc_universe() || rho.assignment.len() != g.num_vertices() {
        return Err(Error::UniverseMismatch("flow is not over this graph".into()));
    }
    let mut out = rho.clone();
    for v in 0..g.num_vertices() {
        let Some(start) = rho.get(v) else { continue };
        if !rotor_chain_holds(rg, f, start) {
            return Err(Error::precondition(format!("rotor condition fails at {}", g.vertex_name(v))));
        }
        let top = f.get(start);
        if let Some(&a) = rg.orbit(start).iter().skip(1).find(|&&a| f.get(a) < top) {
            out.set(v, a);
        }
    }
    Ok(out)
}

fn has_cycle(g: &Multigraph, arcs: &HashMap<VertexId, ArcId>) -> bool {
    cycles_of(g, arcs).next().is_some()
}

/// Vertex cycles of a partial functional graph given by one arc per vertex.
fn cycles_of<'a>(g: &'a Multigraph, arcs: &'a HashMap<VertexId, ArcId>) -> impl Iterator<Item = Vec<ArcId>> + 'a {
    let n = g.num_vertices();
    let mut state = vec![0u8; n]; // 0 new, 1 on current path, 2 done
    let mut found = Vec::new();
    for s in 0..n {
        if state[s] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut v = s;
        loop {
            if state[v] == 1 {
                let pos = path.iter().position(|&(u, _)| u == v).expect("vertex on path");
                found.push(path[pos..].iter().map(|&(_, a)| a).collect());
                break;
            }
            if state[v] == 2 {
                break;
            }
            state[v] = 1;
            match arcs.get(&v) {
                Some(&a) => {
                    path.push((v, a));
                    v = g.head(a);
                }
                None => break,
            }
        }
        for (u, _) in path {
            state[u] = 2;
        }
        state[v] = state[v].max(2);
    }
    found.into_iter()
}

/// A flow is the run iff the last-exit arcs `θ⁻¹(ρ'(v))` of active vertices form no cycle.
pub fn verify_run(rg: &RotorMultigraph, f: &Flow, rho: &RotorConfiguration, sigma: &Config, sigma1: &Config) -> Result<bool> {
    if !verify_flow(rg, f, rho, sigma, sigma1)? {
        return Ok(false);
    }
    let g = rg.graph();
    let rho2 = rotor_config_from_flow(rg, f, rho)?;
    let last: HashMap<VertexId, ArcId> = (0..g.num_vertices())
        .filter(|&v| g.out_arcs(v).iter().any(|&a| f.get(a).is_positive()))
        .map(|v| (v, rg.theta_inv(rho2.get(v).expect("active vertices are not sinks"))))
        .collect();
    Ok(!has_cycle(g, &last))
}

/// Every cycle of `{θ⁻¹(ρ(v))}` must enter a vertex holding a particle.
pub fn is_recurrent_standard(rg: &RotorMultigraph, rho: &RotorConfiguration, sigma: &Config) -> Result<bool> {
    check_rotor_inputs(rg, rho, sigma)?;
    let g = rg.graph();
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let prev: HashMap<VertexId, ArcId> = (0..g.num_vertices())
        .filter_map(|v| rho.get(v).map(|a| (v, rg.theta_inv(a))))
        .collect();
    let ok = cycles_of(g, &prev).all(|cycle| cycle.iter().any(|&a| sigma.is_positive_at(g.head(a))));
    Ok(ok)
}

/// Ultimate periodicity of a single-particle walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodInfo {
    pub preperiod: u64,
    pub period: u64,
    pub routings_per_vertex: Vec<u64>,
}

/// Follows one particle from `(ρ, start)` until a state repeats.
pub fn single_particle_period(rg: &RotorMultigraph, rho: &RotorConfiguration, start: VertexId, step_cap: u64) -> Result<PeriodInfo> {
    let g = rg.graph();
    if start >= g.num_vertices() {
        return Err(Error::IndexOutOfRange {
            index: start,
            size: g.num_vertices(),
        });
    }
    let mut rho = rho.clone();
    let mut pos = start;
    let mut seen: HashMap<(Vec<Option<ArcId>>, VertexId), u64> = HashMap::new();
    let mut trail: Vec<VertexId> = Vec::new();
    for step in 0..=step_cap {
        if let Some(&first) = seen.get(&(rho.assignment.clone(), pos)) {
            let mut counts = vec![0u64; g.num_vertices()];
            for &v in &trail[first as usize..] {
                counts[v] += 1;
            }
            return Ok(PeriodInfo {
                preperiod: first,
                period: step - first,
                routings_per_vertex: counts,
            });
        }
        seen.insert((rho.assignment.clone(), pos), step);
        let Some(a) = rho.get(pos) else {
            return Err(Error::precondition("the particle reached a sink; the walk is finite"));
        };
        trail.push(pos);
        rho.set(pos, rg.theta(a));
        pos = g.head(a);
    }
    Err(Error::WalkStepCapExceeded { cap: step_cap })
}

/// Builds a run from an `i64` table, for fixtures and tests.
pub fn flow_from_values(g: &Multigraph, values: &[i64]) -> Result<Flow> {
    Flow::new(Config::from_dense(g.arc_universe(), values)?)
}

/// Number of routing operations recorded by a run, if it fits in `u64`.
pub fn total_steps(run: &Flow) -> Option<u64> {
    run.values().total().to_u64()
}
