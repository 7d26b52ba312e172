//! Legal reachability without a prescribed routing vector: the cyclic
//! decision procedure, recurrence, brute-force search and the 3-SAT-(2,2)
//! reduction.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::formal_sum::Config;
use crate::graph::{Multigraph, VertexId};
use crate::grm::{CyclicGrm, FaceId, GrmMultigraph};
use crate::zlinalg::primitive_period_vectors;

/// Source and target of a reachability question on a mechanism.
#[derive(Debug, Clone)]
pub struct LrgrmmInstance {
    pub grm: GrmMultigraph,
    pub r: Config,
    pub sigma: Config,
    pub r2: Config,
    pub sigma2: Config,
}

impl LrgrmmInstance {
    pub fn new(grm: GrmMultigraph, r: Config, sigma: Config, r2: Config, sigma2: Config) -> Result<Self> {
        let (au, vu) = (grm.gv().arc_universe(), grm.gv().vertex_universe());
        if r.universe() != au || r2.universe() != au || sigma.universe() != vu || sigma2.universe() != vu {
            return Err(Error::UniverseMismatch("instance configurations are not over its mechanism".into()));
        }
        Ok(LrgrmmInstance { grm, r, sigma, r2, sigma2 })
    }
}

/// Why a cyclic instance is unreachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unreachable {
    NotLinearlyEquivalent,
    NoNonnegativeVector,
    IllegalCanonicalVector,
}

impl Unreachable {
    pub fn code(self) -> &'static str {
        match self {
            Unreachable::NotLinearlyEquivalent => "not-linearly-equivalent",
            Unreachable::NoNonnegativeVector => "no-nonnegative-vector",
            Unreachable::IllegalCanonicalVector => "illegal-canonical-vector",
        }
    }
}

impl fmt::Display for Unreachable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reach {
    Reachable(Config),
    Unreachable(Unreachable),
}

impl Reach {
    pub fn witness(&self) -> Option<&Config> {
        match self {
            Reach::Reachable(phi) => Some(phi),
            Reach::Unreachable(_) => None,
        }
    }

    pub fn is_reachable(&self) -> bool {
        matches!(self, Reach::Reachable(_))
    }
}

/// A non-sink leaf component and the full turn of its primitive period vector.
#[derive(Debug, Clone)]
struct LeafPeriod {
    vertices: Vec<VertexId>,
    turn: Config,
}

fn leaf_periods(c: &CyclicGrm) -> Result<Vec<LeafPeriod>> {
    let mut out: Vec<LeafPeriod> = primitive_period_vectors(c.gv())
        .entries
        .into_iter()
        .map(|(vertices, p)| {
            let turn = c.full_turn(&p)?;
            Ok(LeafPeriod { vertices, turn })
        })
        .collect::<Result<_>>()?;
    out.sort_by_key(|l| l.vertices.iter().copied().min());
    Ok(out)
}

/// `F(p_i)` for the primitive period vector of every non-sink leaf component.
pub fn kernel_basis_cyclic(c: &CyclicGrm) -> Result<Vec<Config>> {
    Ok(leaf_periods(c)?.into_iter().map(|l| l.turn).collect())
}

fn shift_to_minimal(phi: &Config, turn: &Config) -> Result<Config> {
    // smallest k with phi + k·turn >= 0 on the support of turn
    let mut k: Option<BigInt> = None;
    for (f, t) in turn.iter() {
        let need = (-phi.get(f)).div_ceil(t);
        k = Some(match k {
            Some(cur) if cur >= need => cur,
            _ => need,
        });
    }
    match k {
        Some(k) => phi.combine(&k, turn),
        None => Ok(phi.clone()),
    }
}

/// Shifts every leaf block of `φ` to its smallest nonnegative representative;
/// `None` when a face outside the leaf blocks is negative.
pub fn minimal_nonneg_vector(c: &CyclicGrm, phi: &Config) -> Result<Option<Config>> {
    if phi.universe() != c.face_universe() {
        return Err(Error::UniverseMismatch("routing vector is not over the faces".into()));
    }
    let periods = leaf_periods(c)?;
    let mut out = phi.clone();
    for l in &periods {
        out = shift_to_minimal(&out, &l.turn)?;
    }
    Ok(out.is_nonnegative().then_some(out))
}

fn recurrent_in_block(c: &CyclicGrm, leaf: &LeafPeriod, r: &Config, sigma: &Config) -> Result<bool> {
    c.legal_with_vector_cyclic(r, sigma, &leaf.turn, r, sigma)
}

/// Whether `(r, σ)` routes legally to itself with vector `F(p)`.
pub fn is_recurrent_cyclic(c: &CyclicGrm, r: &Config, sigma: &Config) -> Result<bool> {
    if !c.gv().is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    match leaf_periods(c)?.first() {
        Some(leaf) => recurrent_in_block(c, leaf, r, sigma),
        None => Ok(r.universe() == c.gv().arc_universe() && sigma.universe() == c.gv().vertex_universe()),
    }
}

/// Canonical-vector decision for a strongly connected cyclic mechanism.
pub fn legal_reach_strongly_connected(
    c: &CyclicGrm,
    r: &Config,
    sigma: &Config,
    r2: &Config,
    sigma2: &Config,
) -> Result<Option<Config>> {
    if !c.gv().is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    match legal_reach_cyclic(c, r, sigma, r2, sigma2)? {
        Reach::Reachable(phi) => Ok(Some(phi)),
        Reach::Unreachable(Unreachable::NotLinearlyEquivalent) => Err(Error::NotLinearlyEquivalent),
        Reach::Unreachable(_) => Ok(None),
    }
}

/// Polynomial decision of legal reachability on a cyclic mechanism.
///
/// The part of `φ` outside leaf components is forced; each leaf block is
/// shifted to its minimal nonnegative representative, plus one full turn when
/// the target is recurrent on that block.
pub fn legal_reach_cyclic(c: &CyclicGrm, r: &Config, sigma: &Config, r2: &Config, sigma2: &Config) -> Result<Reach> {
    let Some((phi, _)) = c.solve_routing_vector(r, sigma, r2, sigma2)? else {
        return Ok(Reach::Unreachable(Unreachable::NotLinearlyEquivalent));
    };
    let mut canonical = phi;
    for leaf in leaf_periods(c)? {
        canonical = shift_to_minimal(&canonical, &leaf.turn)?;
        if recurrent_in_block(c, &leaf, r2, sigma2)? {
            canonical = canonical.add(&leaf.turn)?;
        }
    }
    if !canonical.is_nonnegative() {
        return Ok(Reach::Unreachable(Unreachable::NoNonnegativeVector));
    }
    if c.legal_with_vector_cyclic(r, sigma, &canonical, r2, sigma2)? {
        Ok(Reach::Reachable(canonical))
    } else {
        Ok(Reach::Unreachable(Unreachable::IllegalCanonicalVector))
    }
}

pub fn legal_reach_instance(c: &CyclicGrm, inst: &LrgrmmInstance) -> Result<Reach> {
    legal_reach_cyclic(c, &inst.r, &inst.sigma, &inst.r2, &inst.sigma2)
}

/// Limits for [`brute_force_reach`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_states: 2_000_000,
            max_depth: usize::MAX,
        }
    }
}

fn dense_state(r: &Config, sigma: &Config) -> Result<Vec<i64>> {
    let mut s = r
        .to_dense_i64()
        .ok_or_else(|| Error::OracleBound("arc coefficient exceeds 64 bits".into()))?;
    s.extend(
        sigma
            .to_dense_i64()
            .ok_or_else(|| Error::OracleBound("particle count exceeds 64 bits".into()))?,
    );
    Ok(s)
}

/// Breadth-first search over legal single-face steps.
///
/// The reachable state space is always finite, so `false` is definitive
/// unless a bound cuts the search short, which is reported as `Inconclusive`.
pub fn brute_force_reach(
    grm: &GrmMultigraph,
    r: &Config,
    sigma: &Config,
    r2: &Config,
    sigma2: &Config,
    bounds: SearchBounds,
) -> Result<bool> {
    let gv = grm.gv();
    let inst = LrgrmmInstance::new(grm.clone(), r.clone(), sigma.clone(), r2.clone(), sigma2.clone())?;
    let na = gv.num_arcs();
    let start = dense_state(&inst.r, &inst.sigma)?;
    let goal = dense_state(&inst.r2, &inst.sigma2)?;
    if start == goal {
        return Ok(true);
    }
    let moves: Vec<(usize, usize, usize, usize)> = (0..grm.num_faces())
        .map(|f| {
            let (t, h) = (grm.face_tail(f), grm.face_head(f));
            (t, h, gv.tail(t), gv.head(t))
        })
        .collect();
    let mut seen: HashSet<Vec<i64>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut truncated = false;
    while let Some((state, depth)) = queue.pop_front() {
        if depth >= bounds.max_depth {
            truncated = true;
            continue;
        }
        for &(t, h, vt, vh) in &moves {
            if state[t] < 1 || state[na + vt] < 1 {
                continue;
            }
            let mut next = state.clone();
            next[t] -= 1;
            next[h] += 1;
            next[na + vt] -= 1;
            next[na + vh] += 1;
            if next == goal {
                return Ok(true);
            }
            if seen.contains(&next) {
                continue;
            }
            if seen.len() >= bounds.max_states {
                truncated = true;
                continue;
            }
            seen.insert(next.clone());
            queue.push_back((next, depth + 1));
        }
    }
    if truncated {
        Err(Error::Inconclusive(format!(
            "search stopped after {} states without reaching the target",
            seen.len()
        )))
    } else {
        Ok(false)
    }
}

/// CNF where every variable occurs exactly twice positively and twice negatively,
/// each clause having three literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sat22Formula {
    n: usize,
    clauses: Vec<[i64; 3]>,
}

impl Sat22Formula {
    pub fn new(n: usize, clauses: Vec<[i64; 3]>) -> Result<Self> {
        let mut counts = vec![(0usize, 0usize); n];
        for (j, c) in clauses.iter().enumerate() {
            for &l in c {
                let i = l.unsigned_abs() as usize;
                if l == 0 || i > n {
                    return Err(Error::precondition(format!("clause {} has literal {l} outside 1..={n}", j + 1)));
                }
                if l > 0 {
                    counts[i - 1].0 += 1;
                } else {
                    counts[i - 1].1 += 1;
                }
            }
        }
        if let Some(i) = counts.iter().position(|&c| c != (2, 2)) {
            let (p, q) = counts[i];
            return Err(Error::precondition(format!(
                "variable {} occurs {p} times positively and {q} times negatively",
                i + 1
            )));
        }
        Ok(Sat22Formula { n, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[[i64; 3]] {
        &self.clauses
    }

    /// `p cnf n m` header, then clauses of three literals terminated by `0`.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut pending: Vec<i64> = Vec::new();
        let mut last_line = 0;
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            last_line = line_no;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if header.is_some() || parts.len() != 4 || parts[1] != "cnf" {
                    return Err(Error::parse(line_no, "expected a single `p cnf <vars> <clauses>` header"));
                }
                let n = parts[2].parse().map_err(|_| Error::parse(line_no, "bad variable count"))?;
                let m = parts[3].parse().map_err(|_| Error::parse(line_no, "bad clause count"))?;
                header = Some((n, m));
                continue;
            }
            if header.is_none() {
                return Err(Error::parse(line_no, "clause before the header"));
            }
            for tok in line.split_whitespace() {
                let lit: i64 = tok
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad literal {tok:?}")))?;
                if lit == 0 {
                    let c: [i64; 3] = pending
                        .as_slice()
                        .try_into()
                        .map_err(|_| Error::parse(line_no, format!("clause has {} literals, expected 3", pending.len())))?;
                    clauses.push(c);
                    pending.clear();
                } else {
                    pending.push(lit);
                }
            }
        }
        if !pending.is_empty() {
            return Err(Error::parse(last_line, "unterminated clause"));
        }
        let (n, m) = header.ok_or_else(|| Error::parse(last_line.max(1), "missing header"))?;
        if clauses.len() != m {
            return Err(Error::parse(last_line.max(1), format!("header announces {m} clauses, found {}", clauses.len())));
        }
        Sat22Formula::new(n, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for c in &self.clauses {
            out.push_str(&format!("{} {} {} 0\n", c[0], c[1], c[2]));
        }
        out
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> Result<bool> {
        if assignment.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "assignment has {} values for {} variables",
                assignment.len(),
                self.n
            )));
        }
        Ok(self.clauses.iter().all(|c| c.iter().any(|&l| lit_true(l, assignment))))
    }

    /// First satisfying assignment in binary counting order, by enumeration.
    pub fn satisfying_assignment(&self) -> Result<Option<Vec<bool>>> {
        if self.n > 24 {
            return Err(Error::OracleBound(format!("{} variables is too many to enumerate", self.n)));
        }
        for mask in 0u64..(1u64 << self.n) {
            let a: Vec<bool> = (0..self.n).map(|i| mask >> i & 1 == 1).collect();
            if self.is_satisfied_by(&a)? {
                return Ok(Some(a));
            }
        }
        Ok(None)
    }
}

fn lit_true(l: i64, assignment: &[bool]) -> bool {
    assignment[l.unsigned_abs() as usize - 1] == (l > 0)
}

/// The reduced instance with lookup tables for the gadget faces.
#[derive(Debug, Clone)]
pub struct Sat22Instance {
    pub instance: LrgrmmInstance,
    /// `[f1, f2, f3]` for the positive and negative chains of each variable.
    pub positive_faces: Vec<[FaceId; 3]>,
    pub negative_faces: Vec<[FaceId; 3]>,
    /// `(f01, f11)` per clause.
    pub clause_faces: Vec<(FaceId, FaceId)>,
}

/// Builds the reachability instance whose solutions encode satisfying assignments.
pub fn sat22_to_grm(f: &Sat22Formula) -> Result<Sat22Instance> {
    let (n, m) = (f.n, f.clauses.len());
    let mut vnames: Vec<String> = Vec::new();
    vnames.extend((1..=n).map(|i| format!("x{i}")));
    vnames.extend((1..=m).map(|j| format!("c{j}")));
    vnames.push("s".into());
    vnames.push("ssat".into());
    vnames.extend((1..=n).map(|i| format!("start{i}")));
    vnames.extend((1..=n).map(|i| format!("end{i}")));
    let x = |i: usize| i;
    let c = |j: usize| n + j;
    let (s, ssat) = (n + m, n + m + 1);
    let start = |i: usize| n + m + 2 + i;
    let end = |i: usize| 2 * n + m + 2 + i;

    let mut occurrences = vec![(Vec::new(), Vec::new()); n];
    for (j, cl) in f.clauses.iter().enumerate() {
        for &l in cl {
            let i = l.unsigned_abs() as usize - 1;
            if l > 0 {
                occurrences[i].0.push(j);
            } else {
                occurrences[i].1.push(j);
            }
        }
    }

    let mut arcs: Vec<(String, VertexId, VertexId)> = Vec::new();
    // per variable: start, pos1, pos2, neg1, neg2, end
    let mut var_arcs = Vec::with_capacity(n);
    for (i, (pos, neg)) in occurrences.iter().enumerate() {
        let base = arcs.len();
        arcs.push((format!("astart{}", i + 1), x(i), start(i)));
        for (k, &j) in pos.iter().enumerate() {
            arcs.push((format!("apos{}_{}", i + 1, k + 1), x(i), c(j)));
        }
        for (k, &j) in neg.iter().enumerate() {
            arcs.push((format!("aneg{}_{}", i + 1, k + 1), x(i), c(j)));
        }
        arcs.push((format!("aend{}", i + 1), x(i), end(i)));
        var_arcs.push(base);
    }
    let mut clause_arcs = Vec::with_capacity(m);
    for j in 0..m {
        clause_arcs.push(arcs.len());
        arcs.push((format!("asat{}", j + 1), c(j), ssat));
        arcs.push((format!("adrop{}", j + 1), c(j), s));
    }
    let gv = Multigraph::from_indexed(vnames, arcs, None)?;

    let mut faces: Vec<(String, usize, usize)> = Vec::new();
    let mut positive_faces = Vec::with_capacity(n);
    let mut negative_faces = Vec::with_capacity(n);
    for (i, &b) in var_arcs.iter().enumerate() {
        let (st, p1, p2, n1, n2, en) = (b, b + 1, b + 2, b + 3, b + 4, b + 5);
        let k = faces.len();
        faces.push((format!("fpos{}_1", i + 1), st, p1));
        faces.push((format!("fpos{}_2", i + 1), p1, p2));
        faces.push((format!("fpos{}_3", i + 1), p2, en));
        faces.push((format!("fneg{}_1", i + 1), st, n1));
        faces.push((format!("fneg{}_2", i + 1), n1, n2));
        faces.push((format!("fneg{}_3", i + 1), n2, en));
        positive_faces.push([k, k + 1, k + 2]);
        negative_faces.push([k + 3, k + 4, k + 5]);
    }
    let mut clause_faces = Vec::with_capacity(m);
    for (j, &b) in clause_arcs.iter().enumerate() {
        let k = faces.len();
        faces.push((format!("fsat{}", j + 1), b, b + 1));
        faces.push((format!("fdrop{}", j + 1), b + 1, b + 1));
        clause_faces.push((k, k + 1));
    }
    let grm = GrmMultigraph::new(gv, faces)?;
    let gv = grm.gv();
    let (au, vu) = (gv.arc_universe(), gv.vertex_universe());
    let n_big = BigInt::from(n);
    let sigma = Config::from_pairs(vu, (0..n).map(|i| (x(i), BigInt::from(3))))?;
    let mut sigma2 = Config::from_pairs(vu, (0..n).map(|i| (start(i), BigInt::from(1))))?;
    sigma2.add_coeff(ssat, BigInt::from(m))?;
    sigma2.add_coeff(s, BigInt::from(2) * n_big - BigInt::from(m))?;
    let r = Config::indicator(au, var_arcs.iter().copied().chain(clause_arcs.iter().copied()))?;
    let r2 = Config::indicator(
        au,
        var_arcs.iter().map(|&b| b + 5).chain(clause_arcs.iter().map(|&b| b + 1)),
    )?;
    Ok(Sat22Instance {
        instance: LrgrmmInstance::new(grm, r, sigma, r2, sigma2)?,
        positive_faces,
        negative_faces,
        clause_faces,
    })
}

/// Routing vector certifying the reduced instance from a satisfying assignment.
pub fn assignment_to_routing_vector(f: &Sat22Formula, assignment: &[bool], inst: &Sat22Instance) -> Result<Config> {
    if !f.is_satisfied_by(assignment)? {
        return Err(Error::precondition("assignment does not satisfy the formula"));
    }
    if inst.positive_faces.len() != f.n || inst.clause_faces.len() != f.clauses.len() {
        return Err(Error::DimensionMismatch("instance was built from a different formula".into()));
    }
    let mut phi = Config::zero(inst.instance.grm.face_universe());
    for (i, &value) in assignment.iter().enumerate() {
        let chain = if value { inst.positive_faces[i] } else { inst.negative_faces[i] };
        for face in chain {
            phi.add_coeff(face, BigInt::from(1))?;
        }
    }
    for (j, cl) in f.clauses.iter().enumerate() {
        let received = cl.iter().filter(|&&l| lit_true(l, assignment)).count();
        let (sat, drop) = inst.clause_faces[j];
        phi.add_coeff(sat, BigInt::from(1))?;
        phi.add_coeff(drop, BigInt::from(received - 1))?;
    }
    Ok(phi)
}
