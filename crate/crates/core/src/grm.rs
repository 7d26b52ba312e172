//! Generalized rotor mechanisms: a particle graph `G^V` coupled with a face
//! graph `G^A` on the arcs of `G^V`, and legality of routings with a given
//! face vector.

use std::collections::{BTreeSet, HashSet};
use std::ops::Deref;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::formal_sum::Config;
use crate::free_routing::{boundary, compute_traces, is_guiding, legal_with_vector};
use crate::graph::{ArcId, Multigraph, VertexId};
use crate::rotor::{Flow, RotorConfiguration, RotorMultigraph};
use crate::zlinalg::{solve_diophantine, IntMatrix};

pub type FaceId = usize;

#[derive(Debug, Clone)]
pub struct GrmMultigraph {
    gv: Multigraph,
    ga: Multigraph,
    owner: Vec<VertexId>,
}

impl GrmMultigraph {
    /// `faces` are `(name, tail arc, head arc)`; both arcs must leave the same vertex.
    pub fn new(gv: Multigraph, faces: Vec<(String, ArcId, ArcId)>) -> Result<Self> {
        let mut owner = Vec::with_capacity(faces.len());
        for (name, t, h) in &faces {
            for &a in [t, h] {
                if a >= gv.num_arcs() {
                    return Err(Error::IndexOutOfRange {
                        index: a,
                        size: gv.num_arcs(),
                    });
                }
            }
            if gv.tail(*t) != gv.tail(*h) {
                return Err(Error::precondition(format!(
                    "face {name} joins arcs leaving different vertices"
                )));
            }
            owner.push(gv.tail(*t));
        }
        let ga = Multigraph::from_indexed(gv.arc_names().to_vec(), faces, Some(gv.arc_universe()))?;
        Ok(GrmMultigraph { gv, ga, owner })
    }

    pub fn gv(&self) -> &Multigraph {
        &self.gv
    }

    pub fn ga(&self) -> &Multigraph {
        &self.ga
    }

    pub fn num_faces(&self) -> usize {
        self.ga.num_arcs()
    }

    pub fn face_names(&self) -> &[String] {
        self.ga.arc_names()
    }

    pub fn face(&self, name: &str) -> Result<FaceId> {
        self.ga.arc(name).map_err(|_| Error::UnknownId {
            kind: "face",
            name: name.to_string(),
        })
    }

    pub fn face_tail(&self, f: FaceId) -> ArcId {
        self.ga.tail(f)
    }

    pub fn face_head(&self, f: FaceId) -> ArcId {
        self.ga.head(f)
    }

    pub fn owner(&self, f: FaceId) -> VertexId {
        self.owner[f]
    }

    pub fn faces_of(&self, v: VertexId) -> impl Iterator<Item = FaceId> + '_ {
        (0..self.num_faces()).filter(move |&f| self.owner[f] == v)
    }

    pub fn face_universe(&self) -> crate::Universe {
        self.ga.arc_universe()
    }

    /// `tail^A(φ)`.
    pub fn tail_a(&self, phi: &Config) -> Result<Config> {
        self.check_faces(phi)?;
        let mut out = Config::zero(self.gv.arc_universe());
        for (f, k) in phi.iter() {
            out.add_coeff(self.face_tail(f), k.clone())?;
        }
        Ok(out)
    }

    fn check_faces(&self, phi: &Config) -> Result<()> {
        if phi.universe() != self.face_universe() {
            return Err(Error::UniverseMismatch("routing vector is not over the faces of this mechanism".into()));
        }
        Ok(())
    }

    /// `L(φ) = (∂^A φ, ∂^V tail^A φ)`.
    pub fn apply_l(&self, phi: &Config) -> Result<(Config, Config)> {
        let dr = boundary(&self.ga, phi)?;
        let ds = boundary(&self.gv, &self.tail_a(phi)?)?;
        Ok((dr, ds))
    }

    /// Matrix of `L`: arc rows, then vertex rows; one column per face.
    pub fn l_matrix(&self) -> IntMatrix {
        let (na, nv, nf) = (self.gv.num_arcs(), self.gv.num_vertices(), self.num_faces());
        let mut m = IntMatrix::zeros(na + nv, nf);
        for f in 0..nf {
            let (t, h) = (self.face_tail(f), self.face_head(f));
            if t != h {
                m[(h, f)] += 1;
                m[(t, f)] -= 1;
            }
            let (vt, vh) = (self.gv.tail(t), self.gv.head(t));
            if vt != vh {
                m[(na + vh, f)] += 1;
                m[(na + vt, f)] -= 1;
            }
        }
        let rows: Vec<String> = self
            .gv
            .arc_names()
            .iter()
            .chain(self.gv.vertex_names())
            .cloned()
            .collect();
        let labelled = m.clone().with_labels(Some(rows), Some(self.face_names().to_vec()));
        // arc and vertex names may collide; fall back to an unlabelled matrix
        labelled.unwrap_or(m)
    }

    fn check_pair(&self, r: &Config, sigma: &Config) -> Result<()> {
        if r.universe() != self.gv.arc_universe() || sigma.universe() != self.gv.vertex_universe() {
            return Err(Error::UniverseMismatch("configuration is not over this mechanism".into()));
        }
        Ok(())
    }

    /// Whether `(r', σ') = (r, σ) + L(φ)`.
    pub fn is_linear_step(&self, r: &Config, sigma: &Config, phi: &Config, r2: &Config, sigma2: &Config) -> Result<bool> {
        self.check_pair(r, sigma)?;
        self.check_pair(r2, sigma2)?;
        let (dr, ds) = self.apply_l(phi)?;
        Ok(r.add(&dr)? == *r2 && sigma.add(&ds)? == *sigma2)
    }

    /// Some `φ` with `(r', σ') = (r, σ) + L(φ)` and a basis of the integral kernel of `L`.
    pub fn solve_routing_vector(
        &self,
        r: &Config,
        sigma: &Config,
        r2: &Config,
        sigma2: &Config,
    ) -> Result<Option<(Config, Vec<Config>)>> {
        self.check_pair(r, sigma)?;
        self.check_pair(r2, sigma2)?;
        let mut rhs = r2.sub(r)?.to_dense();
        rhs.extend(sigma2.sub(sigma)?.to_dense());
        let Some(sol) = solve_diophantine(&self.l_matrix(), &rhs)? else {
            return Ok(None);
        };
        let fu = self.face_universe();
        let phi = Config::from_pairs(fu, sol.particular.into_iter().enumerate())?;
        let kernel = sol
            .kernel
            .into_iter()
            .map(|k| Config::from_pairs(fu, k.into_iter().enumerate()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some((phi, kernel)))
    }

    fn require_linear(&self, r: &Config, sigma: &Config, phi: &Config, r2: &Config, sigma2: &Config) -> Result<()> {
        if !self.is_linear_step(r, sigma, phi, r2, sigma2)? {
            return Err(Error::precondition("target differs from source plus L(φ)"));
        }
        Ok(())
    }

    /// Decides `(r, σ) ⇒_φ (r', σ')` for an arbitrary mechanism.
    pub fn legal_with_vector_grm(&self, r: &Config, sigma: &Config, phi: &Config, r2: &Config, sigma2: &Config) -> Result<bool> {
        self.require_linear(r, sigma, phi, r2, sigma2)?;
        if !phi.is_nonnegative() {
            return Ok(false);
        }
        if !legal_with_vector(&self.ga, r, phi, r2)? {
            return Ok(false);
        }
        let alpha = self.tail_a(phi)?;
        if !legal_with_vector(&self.gv, sigma, &alpha, sigma2)? {
            return Ok(false);
        }
        let exits: BTreeSet<ArcId> = compute_traces(&self.ga, r, phi, r2)?
            .into_iter()
            .map(|f| self.face_tail(f))
            .collect();
        is_guiding(&self.gv, &exits, &alpha, sigma, sigma2)
    }

    /// `F(p) = Σ_v p_v · (all faces owned by v)`.
    pub fn full_turn(&self, p: &Config) -> Result<Config> {
        if p.universe() != self.gv.vertex_universe() {
            return Err(Error::UniverseMismatch("period vector is not over the vertices".into()));
        }
        if !p.is_nonnegative() {
            return Err(Error::precondition("full turns need a nonnegative vector"));
        }
        if let Some(s) = p.support().find(|&v| self.gv.is_sink(v)) {
            return Err(Error::precondition(format!("{} is a sink", self.gv.vertex_name(s))));
        }
        let mut out = Config::zero(self.face_universe());
        for f in 0..self.num_faces() {
            out.add_coeff(f, p.get(self.owner[f]))?;
        }
        Ok(out)
    }
}

/// A mechanism whose face graph at every vertex is the single cycle `a -> θ(a)`.
#[derive(Debug, Clone)]
pub struct CyclicGrm {
    grm: GrmMultigraph,
    rotor: RotorMultigraph,
    face_of_arc: Vec<FaceId>,
}

impl Deref for CyclicGrm {
    type Target = GrmMultigraph;
    fn deref(&self) -> &GrmMultigraph {
        &self.grm
    }
}

fn face_names_for(g: &Multigraph) -> Vec<String> {
    let mut taken: HashSet<String> = HashSet::new();
    let mut names = Vec::with_capacity(g.num_arcs());
    for a in g.arc_names() {
        let stem = a.strip_prefix('a').filter(|s| !s.is_empty()).unwrap_or(a);
        let mut name = format!("f{stem}");
        if taken.contains(&name) {
            name = format!("f_{a}");
        }
        let mut k = 1;
        while taken.contains(&name) {
            name = format!("f_{a}_{k}");
            k += 1;
        }
        taken.insert(name.clone());
        names.push(name);
    }
    names
}

/// One face `(a, θ(a))` per arc, named after its tail arc.
pub fn build_cyclic_grm(rg: &RotorMultigraph) -> CyclicGrm {
    let g = rg.graph();
    let names = face_names_for(g);
    let faces = (0..g.num_arcs()).map(|a| (names[a].clone(), a, rg.theta(a))).collect();
    let grm = GrmMultigraph::new(g.clone(), faces).expect("θ preserves tails");
    CyclicGrm {
        grm,
        rotor: rg.clone(),
        face_of_arc: (0..g.num_arcs()).collect(),
    }
}

impl CyclicGrm {
    /// Recognises a cyclic mechanism: exactly one face leaves each arc and the
    /// faces at every vertex form one cycle.
    pub fn from_grm(grm: GrmMultigraph) -> Result<Self> {
        let gv = grm.gv();
        let mut theta = vec![usize::MAX; gv.num_arcs()];
        let mut face_of_arc = vec![usize::MAX; gv.num_arcs()];
        for f in 0..grm.num_faces() {
            let t = grm.face_tail(f);
            if theta[t] != usize::MAX {
                return Err(Error::precondition(format!("two faces leave arc {}", gv.arc_name(t))));
            }
            theta[t] = grm.face_head(f);
            face_of_arc[t] = f;
        }
        if let Some(a) = theta.iter().position(|&x| x == usize::MAX) {
            return Err(Error::precondition(format!("no face leaves arc {}", gv.arc_name(a))));
        }
        let rotor = RotorMultigraph::from_theta(gv.clone(), theta)?;
        Ok(CyclicGrm {
            grm,
            rotor,
            face_of_arc,
        })
    }

    pub fn grm(&self) -> &GrmMultigraph {
        &self.grm
    }

    pub fn rotor(&self) -> &RotorMultigraph {
        &self.rotor
    }

    pub fn theta(&self, a: ArcId) -> ArcId {
        self.rotor.theta(a)
    }

    pub fn face_of_arc(&self, a: ArcId) -> FaceId {
        self.face_of_arc[a]
    }

    /// Face vector of a standard rotor run: each traversal of `a` uses face `(a, θ(a))`.
    pub fn faces_from_run(&self, run: &Flow) -> Result<Config> {
        let mut out = Config::zero(self.face_universe());
        for (a, k) in run.values().iter() {
            out.add_coeff(self.face_of_arc[a], k.clone())?;
        }
        Ok(out)
    }

    /// `T_A = {a ∈ α : r'_{θ(a)} > 0} ∪ {a ∈ α : θ(a) ∉ α}` with `α = tail^A(φ)`.
    pub fn cyclic_trace_arcs(&self, phi: &Config, r2: &Config) -> Result<BTreeSet<ArcId>> {
        if !phi.is_nonnegative() {
            return Err(Error::precondition("trace arcs need a nonnegative routing vector"));
        }
        if r2.universe() != self.gv().arc_universe() {
            return Err(Error::UniverseMismatch("arc configuration is not over this mechanism".into()));
        }
        let alpha = self.tail_a(phi)?;
        Ok(alpha
            .elements()
            .into_iter()
            .filter(|&a| {
                let next = self.theta(a);
                r2.is_positive_at(next) || !alpha.is_positive_at(next)
            })
            .collect())
    }

    /// Decides `(r, σ) ⇒_φ (r', σ')` using the rotor-specific conditions.
    pub fn legal_with_vector_cyclic(&self, r: &Config, sigma: &Config, phi: &Config, r2: &Config, sigma2: &Config) -> Result<bool> {
        self.require_linear(r, sigma, phi, r2, sigma2)?;
        if !phi.is_nonnegative() {
            return Ok(false);
        }
        let gv = self.gv();
        let alpha = self.tail_a(phi)?;
        let active: BTreeSet<VertexId> = alpha.elements().into_iter().map(|a| gv.tail(a)).collect();
        if active.iter().any(|&v| sigma2.is_negative_at(v)) {
            return Ok(false);
        }
        if alpha.elements().into_iter().any(|a| r2.is_negative_at(a)) {
            return Ok(false);
        }
        let t_a = self.cyclic_trace_arcs(phi, r2)?;
        let covered: BTreeSet<VertexId> = t_a.iter().map(|&a| gv.tail(a)).collect();
        if active.iter().any(|v| !covered.contains(v)) {
            return Ok(false);
        }
        is_guiding(gv, &t_a, &alpha, sigma, sigma2)
    }

    /// Rotor-configuration form: `{a ∈ α : θ(a) ∈ ρ'}` must be guiding.
    pub fn legal_rotor_corollary(
        &self,
        rho: &Config,
        sigma: &Config,
        phi: &Config,
        rho2: &Config,
        sigma2: &Config,
    ) -> Result<bool> {
        let gv = self.gv();
        RotorConfiguration::from_config(gv, rho)?;
        RotorConfiguration::from_config(gv, rho2)?;
        if !sigma.is_nonnegative() || !sigma2.is_nonnegative() {
            return Err(Error::precondition("particle configurations must be nonnegative"));
        }
        if !phi.is_nonnegative() {
            return Err(Error::precondition("routing vector must be nonnegative"));
        }
        self.require_linear(rho, sigma, phi, rho2, sigma2)?;
        let alpha = self.tail_a(phi)?;
        let set: BTreeSet<ArcId> = alpha
            .elements()
            .into_iter()
            .filter(|&a| rho2.is_positive_at(self.theta(a)))
            .collect();
        is_guiding(gv, &set, &alpha, sigma, sigma2)
    }
}

/// `Σ_{a ∈ A⁺(v)} r_a` for every vertex.
pub fn arc_degree_at(g: &Multigraph, r: &Config, v: VertexId) -> BigInt {
    g.out_arcs(v).iter().map(|&a| r.get(a)).sum()
}
