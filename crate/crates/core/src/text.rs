//! Line-oriented graph files.
//!
//! ```text
//! # comment
//! vertex <id>
//! arc <id> <tail> <head>
//! face <id> <owner> <tail arc> <head arc>
//! rotor <vertex> <arc> <arc> ...
//! ```
//!
//! A `rotor` line maps each listed arc to the next one and the last back to the
//! first; it must list the out-arcs of its vertex exactly once each. In a file
//! without faces, vertices lacking a rotor line turn through their out-arcs in
//! declaration order.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::formal_sum::Config;
use crate::graph::{ArcId, Multigraph, VertexId};
use crate::grm::{build_cyclic_grm, CyclicGrm, GrmMultigraph};
use crate::rotor::RotorMultigraph;

#[derive(Debug, Clone)]
pub struct GraphFile {
    graph: Multigraph,
    faces: Vec<(String, VertexId, ArcId, ArcId)>,
    rotors: Vec<Option<Vec<ArcId>>>,
}

fn expect_fields<'a>(line: usize, parts: &'a [&'a str], n: usize, usage: &str) -> Result<&'a [&'a str]> {
    if parts.len() != n {
        return Err(Error::parse(line, format!("expected `{usage}`")));
    }
    Ok(&parts[1..])
}

pub fn parse_graph(text: &str) -> Result<GraphFile> {
    let mut vertices: Vec<String> = Vec::new();
    let mut vindex: HashMap<String, VertexId> = HashMap::new();
    let mut arcs: Vec<(String, VertexId, VertexId)> = Vec::new();
    let mut aindex: HashMap<String, ArcId> = HashMap::new();
    let mut faces: Vec<(String, VertexId, ArcId, ArcId)> = Vec::new();
    let mut fnames: HashSet<String> = HashSet::new();
    let mut rotor_lines: Vec<(usize, VertexId, Vec<ArcId>)> = Vec::new();

    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parts: Vec<&str> = content.split_whitespace().collect();
        match parts[0] {
            "vertex" => {
                let f = expect_fields(line, &parts, 2, "vertex <id>")?;
                check_name(line, f[0])?;
                if vindex.insert(f[0].to_string(), vertices.len()).is_some() {
                    return Err(Error::parse(line, format!("duplicate vertex {:?}", f[0])));
                }
                vertices.push(f[0].to_string());
            }
            "arc" => {
                let f = expect_fields(line, &parts, 4, "arc <id> <tail> <head>")?;
                check_name(line, f[0])?;
                let (t, h) = (lookup(&vindex, "vertex", f[1], line)?, lookup(&vindex, "vertex", f[2], line)?);
                if aindex.insert(f[0].to_string(), arcs.len()).is_some() {
                    return Err(Error::parse(line, format!("duplicate arc {:?}", f[0])));
                }
                arcs.push((f[0].to_string(), t, h));
            }
            "face" => {
                let f = expect_fields(line, &parts, 5, "face <id> <owner> <tail arc> <head arc>")?;
                check_name(line, f[0])?;
                let owner = lookup(&vindex, "vertex", f[1], line)?;
                let (ta, ha) = (lookup(&aindex, "arc", f[2], line)?, lookup(&aindex, "arc", f[3], line)?);
                for (name, a) in [(f[2], ta), (f[3], ha)] {
                    if arcs[a].1 != owner {
                        return Err(Error::parse(line, format!("arc {name} does not leave {}", f[1])));
                    }
                }
                if !fnames.insert(f[0].to_string()) {
                    return Err(Error::parse(line, format!("duplicate face {:?}", f[0])));
                }
                faces.push((f[0].to_string(), owner, ta, ha));
            }
            "rotor" => {
                if parts.len() < 2 {
                    return Err(Error::parse(line, "expected `rotor <vertex> <arc>...`"));
                }
                let v = lookup(&vindex, "vertex", parts[1], line)?;
                let order = parts[2..].iter().map(|a| lookup(&aindex, "arc", a, line)).collect::<Result<Vec<_>>>()?;
                rotor_lines.push((line, v, order));
            }
            other => return Err(Error::parse(line, format!("unknown directive {other:?}"))),
        }
    }

    let n = vertices.len();
    let graph = Multigraph::from_indexed(vertices, arcs, None)?;
    let mut rotors: Vec<Option<Vec<ArcId>>> = vec![None; n];
    for (line, v, order) in rotor_lines {
        if rotors[v].is_some() {
            return Err(Error::parse(line, format!("second rotor line for {}", graph.vertex_name(v))));
        }
        let mut listed = order.clone();
        listed.sort_unstable();
        let mut out = graph.out_arcs(v).to_vec();
        out.sort_unstable();
        if listed != out {
            return Err(Error::parse(
                line,
                format!("rotor line must list every out-arc of {} exactly once", graph.vertex_name(v)),
            ));
        }
        if faces.iter().any(|f| f.1 == v) {
            return Err(Error::parse(line, format!("{} has both faces and a rotor line", graph.vertex_name(v))));
        }
        rotors[v] = Some(order);
    }
    Ok(GraphFile { graph, faces, rotors })
}

fn lookup(map: &HashMap<String, usize>, kind: &str, name: &str, line: usize) -> Result<usize> {
    map.get(name)
        .copied()
        .ok_or_else(|| Error::parse(line, format!("unknown {kind} {name:?}")))
}

fn check_name(line: usize, name: &str) -> Result<()> {
    if name.contains(['=', ',', '@']) {
        return Err(Error::parse(line, format!("identifier {name:?} may not contain '=', ',' or '@'")));
    }
    Ok(())
}

impl GraphFile {
    pub fn from_graph(graph: Multigraph) -> Self {
        let n = graph.num_vertices();
        GraphFile {
            graph,
            faces: Vec::new(),
            rotors: vec![None; n],
        }
    }

    pub fn from_rotor(rg: &RotorMultigraph) -> Self {
        let g = rg.graph().clone();
        let rotors = (0..g.num_vertices())
            .map(|v| (!g.is_sink(v)).then(|| rg.order_at(v)))
            .collect();
        GraphFile {
            graph: g,
            faces: Vec::new(),
            rotors,
        }
    }

    pub fn from_grm(grm: &GrmMultigraph) -> Self {
        let faces = (0..grm.num_faces())
            .map(|f| (grm.face_names()[f].clone(), grm.owner(f), grm.face_tail(f), grm.face_head(f)))
            .collect();
        GraphFile {
            graph: grm.gv().clone(),
            faces,
            rotors: vec![None; grm.gv().num_vertices()],
        }
    }

    pub fn graph(&self) -> &Multigraph {
        &self.graph
    }

    pub fn has_faces(&self) -> bool {
        !self.faces.is_empty()
    }

    fn order(&self, v: VertexId) -> Vec<ArcId> {
        self.rotors[v].clone().unwrap_or_else(|| self.graph.out_arcs(v).to_vec())
    }

    /// Standard rotor structure; unavailable when the file declares explicit faces.
    pub fn rotor(&self) -> Result<RotorMultigraph> {
        if self.has_faces() {
            return Err(Error::precondition("graph declares explicit faces, not rotor orders"));
        }
        let orders: Vec<Vec<ArcId>> = (0..self.graph.num_vertices()).map(|v| self.order(v)).collect();
        RotorMultigraph::from_orders(self.graph.clone(), &orders)
    }

    /// Explicit faces plus one cyclic face per arc at vertices described by rotor orders.
    pub fn grm(&self) -> Result<GrmMultigraph> {
        if !self.has_faces() {
            return Ok(self.cyclic()?.grm().clone());
        }
        let mut faces: Vec<(String, ArcId, ArcId)> =
            self.faces.iter().map(|(n, _, t, h)| (n.clone(), *t, *h)).collect();
        let taken: HashSet<String> = faces.iter().map(|f| f.0.clone()).collect();
        for v in 0..self.graph.num_vertices() {
            if let Some(order) = &self.rotors[v] {
                for (i, &a) in order.iter().enumerate() {
                    let mut name = format!("f_{}", self.graph.arc_name(a));
                    while taken.contains(&name) {
                        name.push('\'');
                    }
                    faces.push((name, a, order[(i + 1) % order.len()]));
                }
            }
        }
        GrmMultigraph::new(self.graph.clone(), faces)
    }

    pub fn cyclic(&self) -> Result<CyclicGrm> {
        if self.has_faces() {
            CyclicGrm::from_grm(self.grm()?)
        } else {
            Ok(build_cyclic_grm(&self.rotor()?))
        }
    }

    pub fn to_text(&self) -> String {
        let g = &self.graph;
        let mut out = String::new();
        for v in g.vertex_names() {
            out.push_str(&format!("vertex {v}\n"));
        }
        for a in 0..g.num_arcs() {
            out.push_str(&format!(
                "arc {} {} {}\n",
                g.arc_name(a),
                g.vertex_name(g.tail(a)),
                g.vertex_name(g.head(a))
            ));
        }
        for (name, owner, t, h) in &self.faces {
            out.push_str(&format!(
                "face {name} {} {} {}\n",
                g.vertex_name(*owner),
                g.arc_name(*t),
                g.arc_name(*h)
            ));
        }
        for (v, order) in self.rotors.iter().enumerate() {
            if let Some(order) = order {
                let arcs: Vec<&str> = order.iter().map(|&a| g.arc_name(a)).collect();
                out.push_str(&format!("rotor {} {}\n", g.vertex_name(v), arcs.join(" ")));
            }
        }
        out
    }
}

/// Parses a configuration literal such as `v2=3,v3=6` over the vertices of `g`.
pub fn parse_vertex_config(g: &Multigraph, text: &str) -> Result<Config> {
    Config::parse_with(g.vertex_universe(), text, g.vertex_index_map())
}

pub fn parse_arc_config(g: &Multigraph, text: &str) -> Result<Config> {
    Config::parse_with(g.arc_universe(), text, g.arc_index_map())
}

pub fn parse_face_config(grm: &GrmMultigraph, text: &str) -> Result<Config> {
    Config::parse_with(grm.face_universe(), text, grm.ga().arc_index_map())
}
