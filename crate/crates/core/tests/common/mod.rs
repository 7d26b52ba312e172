#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rotorkit::grm::{build_cyclic_grm, CyclicGrm, GrmMultigraph};
use rotorkit::rotor::{RotorConfiguration, RotorMultigraph};
use rotorkit::text::{parse_graph, GraphFile};
use rotorkit::{Config, Multigraph, Universe};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> GraphFile {
    parse_graph(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// A configuration literal stored one group per line, with `#` comments.
pub fn literal_file(name: &str) -> String {
    fixture(name)
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cfg(u: Universe, pairs: &[(usize, i64)]) -> Config {
    Config::from_pairs(u, pairs.iter().copied()).unwrap()
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random multigraph on `n` vertices with `m` arcs (loops allowed).
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Multigraph {
    let arcs = (0..m)
        .map(|i| (format!("a{i}"), rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    Multigraph::from_indexed(names("v", n), arcs, None).unwrap()
}

/// Random graph where vertices `0..sinks` have no out-arcs and every other
/// vertex has between one and three.
pub fn random_graph_with_sinks(rng: &mut ChaCha8Rng, n: usize, sinks: usize) -> Multigraph {
    let mut arcs = Vec::new();
    for v in sinks..n {
        for _ in 0..rng.gen_range(1..=3) {
            arcs.push((format!("a{}", arcs.len()), v, rng.gen_range(0..n)));
        }
    }
    Multigraph::from_indexed(names("v", n), arcs, None).unwrap()
}

/// Random stopping graph: at least one sink, every vertex reaches a sink.
pub fn random_stopping_graph(rng: &mut ChaCha8Rng, max_vertices: usize) -> Multigraph {
    loop {
        let n = rng.gen_range(2..=max_vertices);
        let sinks = rng.gen_range(1..n);
        let g = random_graph_with_sinks(rng, n, sinks);
        if g.is_stopping() {
            return g;
        }
    }
}

pub fn random_orders(rng: &mut ChaCha8Rng, g: &Multigraph) -> RotorMultigraph {
    let orders: Vec<Vec<usize>> = (0..g.num_vertices())
        .map(|v| {
            let mut o = g.out_arcs(v).to_vec();
            o.shuffle(rng);
            o
        })
        .collect();
    RotorMultigraph::from_orders(g.clone(), &orders).unwrap()
}

pub fn random_rotor_config(rng: &mut ChaCha8Rng, g: &Multigraph) -> RotorConfiguration {
    let arcs: Vec<usize> = (0..g.num_vertices())
        .filter(|&v| !g.is_sink(v))
        .map(|v| *g.out_arcs(v).choose(rng).unwrap())
        .collect();
    RotorConfiguration::new(g, &arcs).unwrap()
}

pub fn random_particles(rng: &mut ChaCha8Rng, g: &Multigraph, total: usize) -> Config {
    let mut s = Config::zero(g.vertex_universe());
    for _ in 0..total {
        s.add_coeff(rng.gen_range(0..g.num_vertices()), BigInt::from(1)).unwrap();
    }
    s
}

pub fn random_config(rng: &mut ChaCha8Rng, u: Universe, lo: i64, hi: i64) -> Config {
    let vals: Vec<i64> = (0..u.size()).map(|_| rng.gen_range(lo..=hi)).collect();
    Config::from_dense(u, &vals).unwrap()
}

pub fn random_cyclic(rng: &mut ChaCha8Rng, max_vertices: usize) -> CyclicGrm {
    let n = rng.gen_range(1..=max_vertices);
    let sinks = rng.gen_range(0..n.min(2));
    let g = random_graph_with_sinks(rng, n, sinks);
    build_cyclic_grm(&random_orders(rng, &g))
}

/// Random mechanism: every arc gets between zero and two faces to arcs of the same out-set.
pub fn random_grm(rng: &mut ChaCha8Rng, max_vertices: usize) -> GrmMultigraph {
    let n = rng.gen_range(1..=max_vertices);
    let sinks = rng.gen_range(0..n.min(2));
    let g = random_graph_with_sinks(rng, n, sinks);
    let mut faces = Vec::new();
    for a in 0..g.num_arcs() {
        let out = g.out_arcs(g.tail(a));
        for _ in 0..rng.gen_range(0..=2) {
            let h = *out.choose(rng).unwrap();
            faces.push((format!("f{}", faces.len()), a, h));
        }
    }
    GrmMultigraph::new(g, faces).unwrap()
}

/// Random nonnegative face vector with total at most `max_total`.
pub fn random_face_vector(rng: &mut ChaCha8Rng, grm: &GrmMultigraph, max_total: usize) -> Config {
    let mut phi = Config::zero(grm.face_universe());
    if grm.num_faces() == 0 {
        return phi;
    }
    for _ in 0..rng.gen_range(0..=max_total) {
        phi.add_coeff(rng.gen_range(0..grm.num_faces()), BigInt::from(1)).unwrap();
    }
    phi
}

/// Applies up to `steps` random legal single-face steps.
pub fn random_legal_walk(rng: &mut ChaCha8Rng, grm: &GrmMultigraph, r: &Config, sigma: &Config, steps: usize) -> (Config, Config) {
    let gv = grm.gv();
    let (mut r, mut s) = (r.clone(), sigma.clone());
    for _ in 0..steps {
        let legal: Vec<usize> = (0..grm.num_faces())
            .filter(|&f| {
                let a = grm.face_tail(f);
                r.get(a).is_positive() && s.get(gv.tail(a)).is_positive()
            })
            .collect();
        let Some(&f) = legal.choose(rng) else { break };
        let unit = Config::unit(grm.face_universe(), f).unwrap();
        let (dr, ds) = grm.apply_l(&unit).unwrap();
        r = r.add(&dr).unwrap();
        s = s.add(&ds).unwrap();
    }
    (r, s)
}

pub fn is_unit_abs(x: &BigInt) -> bool {
    x.abs() == BigInt::from(1)
}

pub fn gcd_all(xs: impl IntoIterator<Item = BigInt>) -> BigInt {
    use num_integer::Integer;
    xs.into_iter().fold(BigInt::zero(), |acc, x| acc.gcd(&x))
}
