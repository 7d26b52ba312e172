//! Command-line front end: argument parsing, file loading and verdict output.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rotorkit::free_routing::{legal_vector_search, legal_with_vector, linear_reachable};
use rotorkit::grm::{CyclicGrm, GrmMultigraph};
use rotorkit::oracle::{free_sequence_search, grm_sequence_search};
use rotorkit::reach::{
    assignment_to_routing_vector, brute_force_reach, is_recurrent_cyclic, legal_reach_cyclic, sat22_to_grm, Reach,
    Sat22Formula, SearchBounds,
};
use rotorkit::rotor::{
    maximal_rotor_walk, single_particle_period, verify_flow, verify_run, Flow, Policy, RotorConfiguration,
    RotorMultigraph,
};
use rotorkit::text::{parse_arc_config, parse_face_config, parse_graph, parse_vertex_config, GraphFile};
use rotorkit::zlinalg::{arborescence_count, smith_normal_form, IntMatrix};
use rotorkit::{Config, Error, Multigraph};

#[derive(Parser)]
#[command(name = "rotorkit", version, about = "Reachability for rotor-routing and generalized rotor mechanisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linear or legal reachability between two configurations
    #[command(subcommand)]
    Check(CheckCommand),
    /// Run a maximal rotor walk until every particle sits in a sink
    Simulate(SimulateArgs),
    /// Verify a claimed flow or run of a rotor walk
    Certify {
        kind: CertificateKind,
        #[command(flatten)]
        args: CertifyArgs,
    },
    /// Smith normal form of an integer matrix
    Snf {
        /// Matrix file: `rows cols` then row-major integers
        #[arg(long)]
        matrix: String,
    },
    /// Preperiod and period of a single-particle walk
    Period(PeriodArgs),
    /// Count arborescences rooted in a vertex set
    Arborescences {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        roots: Vec<String>,
        /// Also enumerate them one by one
        #[arg(long)]
        enumerate: bool,
    },
    /// Build hard instances from formulas
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// Exhaustive searches for small instances
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Whether a configuration of a strongly connected cyclic mechanism is recurrent
    Recurrent {
        #[arg(long)]
        graph: PathBuf,
        /// Arc configuration
        #[arg(long = "from-r")]
        from_r: String,
        /// Particle configuration
        #[arg(long = "from")]
        from: String,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Whether some integer routing vector connects the configurations
    Linear(Instance),
    /// Whether a legal routing sequence connects the configurations
    Legal {
        #[command(flatten)]
        instance: Instance,
        /// Routing vector to test: arcs for free routing, faces for mechanisms
        #[arg(long)]
        vector: Option<String>,
    },
}

#[derive(Subcommand)]
enum ReduceCommand {
    /// Reachability instance from a formula where every variable occurs twice positively and twice negatively
    Sat22 {
        /// DIMACS file
        #[arg(long)]
        cnf: PathBuf,
        /// Write the graph file here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        /// Signed literals, e.g. `1,-2,-3`; prints the routing vector it induces
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        assignment: Option<Vec<i64>>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Breadth-first search over legal steps, or a sequence search when --vector is given
    Reach {
        #[command(flatten)]
        instance: Instance,
        #[arg(long)]
        vector: Option<String>,
        #[arg(long = "max-states", default_value_t = 2_000_000)]
        max_states: usize,
    },
}

#[derive(Args)]
struct Instance {
    #[arg(long)]
    graph: PathBuf,
    /// Source particle configuration
    #[arg(long = "from")]
    from: String,
    /// Target particle configuration
    #[arg(long = "to")]
    to: String,
    /// Source arc configuration (selects the mechanism model)
    #[arg(long = "from-r", requires = "to_r")]
    from_r: Option<String>,
    /// Target arc configuration
    #[arg(long = "to-r", requires = "from_r")]
    to_r: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Initial rotors as an arc literal; defaults to the first arc of every rotor order
    #[arg(long)]
    rotors: Option<String>,
    #[arg(long = "from")]
    from: String,
    #[arg(long, value_enum, default_value_t = PolicyArg::CanonicalMin)]
    policy: PolicyArg,
    #[arg(long = "max-steps", default_value_t = 10_000_000)]
    max_steps: u64,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    rotors: Option<String>,
    #[arg(long = "from")]
    from: String,
    /// Final particle configuration
    #[arg(long = "to")]
    to: String,
    /// Claimed arc counts
    #[arg(long)]
    flow: String,
}

#[derive(Args)]
struct PeriodArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    rotors: Option<String>,
    /// Starting vertex of the particle
    #[arg(long)]
    start: String,
    #[arg(long = "max-steps", default_value_t = 10_000_000)]
    max_steps: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    CanonicalMin,
    ReverseCanonical,
    Fifo,
}

#[derive(Clone, Copy, ValueEnum)]
enum CertificateKind {
    Flow,
    Run,
}

/// Decision plus `key: value` detail lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub yes: bool,
    pub details: Vec<(String, String)>,
}

impl Verdict {
    fn yes() -> Self {
        Verdict { yes: true, details: Vec::new() }
    }

    fn no(reason: &str) -> Self {
        Verdict { yes: false, details: vec![("reason".into(), reason.into())] }
    }

    fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.details.push((key.into(), value.into()));
        self
    }

    fn with_witness(self, literal: String) -> Self {
        if literal.is_empty() {
            self
        } else {
            self.with("witness", literal)
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::from(if self.yes { "YES\n" } else { "NO\n" });
        for (k, v) in &self.details {
            if v.contains('\n') {
                let _ = write!(out, "{k}:\n{v}");
                if !v.ends_with('\n') {
                    out.push('\n');
                }
            } else {
                let _ = writeln!(out, "{k}: {v}");
            }
        }
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.yes {
            0
        } else {
            1
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the text
/// to print with the exit code: 0 for YES, 1 for NO, 2 for errors.
pub fn run<I, T>(argv: I) -> (String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (e.render().to_string(), code);
        }
    };
    match dispatch(cli.command) {
        Ok(v) => (v.render(), v.exit_code()),
        Err(e) => (format!("error: {e:#}\n"), 2),
    }
}

fn dispatch(command: Command) -> Result<Verdict> {
    match command {
        Command::Check(CheckCommand::Linear(inst)) => check_linear(&inst),
        Command::Check(CheckCommand::Legal { instance, vector }) => check_legal(&instance, vector.as_deref()),
        Command::Simulate(args) => simulate(&args),
        Command::Certify { kind, args } => certify(kind, &args),
        Command::Snf { matrix } => snf(&matrix),
        Command::Period(args) => period(&args),
        Command::Arborescences { graph, roots, enumerate } => arborescences(&graph, &roots, enumerate),
        Command::Reduce(ReduceCommand::Sat22 { cnf, out, assignment }) => reduce_sat22(&cnf, out.as_deref(), assignment),
        Command::Oracle(OracleCommand::Reach { instance, vector, max_states }) => {
            oracle_reach(&instance, vector.as_deref(), max_states)
        }
        Command::Recurrent { graph, from_r, from } => recurrent(&graph, &from_r, &from),
    }
}

/// Reads `@path` arguments; `#` comments are dropped and lines joined by commas.
fn literal(arg: &str) -> Result<String> {
    let Some(path) = arg.strip_prefix('@') else {
        return Ok(arg.to_string());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(","))
}

fn load_graph(path: &Path) -> Result<GraphFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn vertices(g: &Multigraph, arg: &str) -> Result<Config> {
    parse_vertex_config(g, &literal(arg)?).with_context(|| format!("particle configuration `{arg}`"))
}

fn arcs(g: &Multigraph, arg: &str) -> Result<Config> {
    parse_arc_config(g, &literal(arg)?).with_context(|| format!("arc configuration `{arg}`"))
}

fn faces(m: &GrmMultigraph, arg: &str) -> Result<Config> {
    parse_face_config(m, &literal(arg)?).with_context(|| format!("face vector `{arg}`"))
}

fn rotors(rg: &RotorMultigraph, arg: Option<&str>) -> Result<RotorConfiguration> {
    let g = rg.graph();
    match arg {
        None => Ok(RotorConfiguration::from_config(g, &rotor_defaults(rg))?),
        Some(a) => Ok(RotorConfiguration::from_config(g, &arcs(g, a)?).context("rotor configuration")?),
    }
}

fn rotor_defaults(rg: &RotorMultigraph) -> Config {
    let g = rg.graph();
    let first = (0..g.num_vertices()).filter_map(|v| rg.order_at(v).first().copied());
    Config::indicator(g.arc_universe(), first).expect("arcs of the graph")
}

#[allow(clippy::large_enum_variant)]
enum Model {
    Free { g: Multigraph, sigma: Config, sigma2: Config },
    Mechanism { m: GrmMultigraph, cyclic: Option<CyclicGrm>, r: Config, sigma: Config, r2: Config, sigma2: Config },
}

fn model(inst: &Instance) -> Result<Model> {
    let file = load_graph(&inst.graph)?;
    let g = file.graph().clone();
    let sigma = vertices(&g, &inst.from)?;
    let sigma2 = vertices(&g, &inst.to)?;
    let (Some(from_r), Some(to_r)) = (&inst.from_r, &inst.to_r) else {
        return Ok(Model::Free { g, sigma, sigma2 });
    };
    let r = arcs(&g, from_r)?;
    let r2 = arcs(&g, to_r)?;
    let m = file.grm()?;
    let cyclic = CyclicGrm::from_grm(m.clone()).ok();
    Ok(Model::Mechanism { m, cyclic, r, sigma, r2, sigma2 })
}

fn check_linear(inst: &Instance) -> Result<Verdict> {
    Ok(match model(inst)? {
        Model::Free { g, sigma, sigma2 } => match linear_reachable(&g, &sigma, &sigma2)? {
            Some(r) => Verdict::yes().with_witness(r.format_with(g.arc_names())),
            None => Verdict::no("not-linearly-equivalent"),
        },
        Model::Mechanism { m, r, sigma, r2, sigma2, .. } => match m.solve_routing_vector(&r, &sigma, &r2, &sigma2)? {
            Some((phi, kernel)) => {
                let v = Verdict::yes().with_witness(phi.format_with(m.face_names()));
                kernel
                    .iter()
                    .fold(v, |v, k| v.with("kernel", k.format_with(m.face_names())))
            }
            None => Verdict::no("not-linearly-equivalent"),
        },
    })
}

fn check_legal(inst: &Instance, vector: Option<&str>) -> Result<Verdict> {
    Ok(match (model(inst)?, vector) {
        (Model::Free { g, sigma, sigma2 }, Some(vec)) => {
            let r = arcs(&g, vec)?;
            if sigma.add(&rotorkit::free_routing::boundary(&g, &r)?)? != sigma2 {
                Verdict::no("vector-does-not-connect")
            } else if legal_with_vector(&g, &sigma, &r, &sigma2)? {
                Verdict::yes().with_witness(r.format_with(g.arc_names()))
            } else {
                Verdict::no("illegal-vector")
            }
        }
        (Model::Free { g, sigma, sigma2 }, None) => {
            if linear_reachable(&g, &sigma, &sigma2)?.is_none() {
                Verdict::no("not-linearly-equivalent")
            } else {
                match legal_vector_search(&g, &sigma, &sigma2)? {
                    Some(r) => Verdict::yes().with_witness(r.format_with(g.arc_names())),
                    None => Verdict::no("no-legal-vector"),
                }
            }
        }
        (Model::Mechanism { m, cyclic, r, sigma, r2, sigma2 }, Some(vec)) => {
            let phi = faces(&m, vec)?;
            let legal = match &cyclic {
                _ if !m.is_linear_step(&r, &sigma, &phi, &r2, &sigma2)? => return Ok(Verdict::no("vector-does-not-connect")),
                Some(c) => c.legal_with_vector_cyclic(&r, &sigma, &phi, &r2, &sigma2)?,
                None => m.legal_with_vector_grm(&r, &sigma, &phi, &r2, &sigma2)?,
            };
            if legal {
                Verdict::yes().with_witness(phi.format_with(m.face_names()))
            } else {
                Verdict::no("illegal-vector")
            }
        }
        (Model::Mechanism { m, cyclic: Some(c), r, sigma, r2, sigma2 }, None) => {
            match legal_reach_cyclic(&c, &r, &sigma, &r2, &sigma2)? {
                Reach::Reachable(phi) => Verdict::yes().with_witness(phi.format_with(m.face_names())),
                Reach::Unreachable(why) => Verdict::no(why.code()),
            }
        }
        (Model::Mechanism { cyclic: None, .. }, None) => bail!(
            "legal reachability without --vector is only decided for cyclic mechanisms; \
             pass --vector or use `oracle reach` on small instances"
        ),
    })
}

fn rotor_graph(path: &Path) -> Result<RotorMultigraph> {
    Ok(load_graph(path)?.rotor()?)
}

fn simulate(args: &SimulateArgs) -> Result<Verdict> {
    let rg = rotor_graph(&args.graph)?;
    let g = rg.graph();
    let rho = rotors(&rg, args.rotors.as_deref())?;
    let sigma = vertices(g, &args.from)?;
    let policy = match args.policy {
        PolicyArg::CanonicalMin => Policy::CanonicalMin,
        PolicyArg::ReverseCanonical => Policy::ReverseCanonical,
        PolicyArg::Fifo => Policy::Fifo,
    };
    let w = maximal_rotor_walk(&rg, &rho, &sigma, policy, args.max_steps)?;
    Ok(Verdict::yes()
        .with_witness(w.run.values().format_with(g.arc_names()))
        .with("rotors", w.rho.to_config(g).format_with(g.arc_names()))
        .with("particles", w.sigma.format_with(g.vertex_names()))
        .with("steps", w.run.values().total().to_string()))
}

fn certify(kind: CertificateKind, args: &CertifyArgs) -> Result<Verdict> {
    let rg = rotor_graph(&args.graph)?;
    let g = rg.graph();
    let rho = rotors(&rg, args.rotors.as_deref())?;
    let sigma = vertices(g, &args.from)?;
    let sigma1 = vertices(g, &args.to)?;
    let flow = Flow::new(arcs(g, &args.flow)?)?;
    let ok = match kind {
        CertificateKind::Flow => verify_flow(&rg, &flow, &rho, &sigma, &sigma1)?,
        CertificateKind::Run => verify_run(&rg, &flow, &rho, &sigma, &sigma1)?,
    };
    Ok(match (ok, kind) {
        (true, _) => Verdict::yes(),
        (false, CertificateKind::Flow) => Verdict::no("not-a-flow"),
        (false, CertificateKind::Run) => Verdict::no("not-a-run"),
    })
}

fn snf(arg: &str) -> Result<Verdict> {
    let path = arg.strip_prefix('@').unwrap_or(arg);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let a = IntMatrix::parse(&text).with_context(|| format!("parsing {path}"))?;
    let sf = smith_normal_form(&a);
    let factors: Vec<String> = sf.invariant_factors().iter().map(|x| x.to_string()).collect();
    Ok(Verdict::yes()
        .with("invariant-factors", factors.join(" "))
        .with("rank", sf.rank().to_string())
        .with("diagonal", sf.d.to_text()))
}

fn period(args: &PeriodArgs) -> Result<Verdict> {
    let rg = rotor_graph(&args.graph)?;
    let g = rg.graph();
    let rho = rotors(&rg, args.rotors.as_deref())?;
    let start = g.vertex(&args.start)?;
    let p = single_particle_period(&rg, &rho, start, args.max_steps)?;
    let counts = Config::from_dense(g.vertex_universe(), &p.routings_per_vertex.iter().map(|&k| k as i64).collect::<Vec<_>>())?;
    Ok(Verdict::yes()
        .with("preperiod", p.preperiod.to_string())
        .with("period", p.period.to_string())
        .with("routings", counts.format_with(g.vertex_names())))
}

fn arborescences(path: &Path, roots: &[String], enumerate: bool) -> Result<Verdict> {
    let file = load_graph(path)?;
    let g = file.graph();
    let roots: BTreeSet<usize> = roots.iter().map(|r| g.vertex(r.trim())).collect::<Result<_, Error>>()?;
    let count = arborescence_count(g, &roots)?;
    let v = Verdict::yes().with("count", count.to_string());
    if enumerate {
        Ok(v.with("enumerated", g.enumerate_arborescences(&roots)?.to_string()))
    } else {
        Ok(v)
    }
}

fn reduce_sat22(cnf: &Path, out: Option<&Path>, assignment: Option<Vec<i64>>) -> Result<Verdict> {
    let text = std::fs::read_to_string(cnf).with_context(|| format!("reading {}", cnf.display()))?;
    let f = Sat22Formula::parse_dimacs(&text).with_context(|| format!("parsing {}", cnf.display()))?;
    let red = sat22_to_grm(&f)?;
    let inst = &red.instance;
    let g = inst.grm.gv();
    let graph_text = GraphFile::from_grm(&inst.grm).to_text();
    let mut v = Verdict::yes()
        .with("from-r", inst.r.format_with(g.arc_names()))
        .with("from", inst.sigma.format_with(g.vertex_names()))
        .with("to-r", inst.r2.format_with(g.arc_names()))
        .with("to", inst.sigma2.format_with(g.vertex_names()));
    if let Some(lits) = assignment {
        let values = assignment_values(f.num_vars(), &lits)?;
        let phi = assignment_to_routing_vector(&f, &values, &red)?;
        v = v.with_witness(phi.format_with(inst.grm.face_names()));
    }
    match out {
        Some(path) => {
            std::fs::write(path, graph_text).with_context(|| format!("writing {}", path.display()))?;
            Ok(v.with("graph", path.display().to_string()))
        }
        None => Ok(v.with("graph", graph_text)),
    }
}

fn assignment_values(n: usize, lits: &[i64]) -> Result<Vec<bool>> {
    let mut values = vec![None; n];
    for &l in lits {
        let i = l.unsigned_abs() as usize;
        if i == 0 || i > n {
            bail!("literal {l} is outside 1..={n}");
        }
        if values[i - 1].replace(l > 0).is_some() {
            bail!("variable {i} is assigned twice");
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| anyhow!("variable {} is unassigned", i + 1)))
        .collect()
}

fn oracle_reach(inst: &Instance, vector: Option<&str>, max_states: usize) -> Result<Verdict> {
    match (model(inst)?, vector) {
        (Model::Free { g, sigma, sigma2 }, Some(vec)) => {
            let r = arcs(&g, vec)?;
            if sigma.add(&rotorkit::free_routing::boundary(&g, &r)?)? != sigma2 {
                return Ok(Verdict::no("vector-does-not-connect"));
            }
            Ok(match free_sequence_search(&g, &sigma, &r)? {
                Some(seq) => Verdict::yes().with("sequence", names(g.arc_names(), &seq)),
                None => Verdict::no("no-legal-sequence"),
            })
        }
        (Model::Free { .. }, None) => bail!("the exhaustive search needs --vector, or --from-r and --to-r for a mechanism"),
        (Model::Mechanism { m, r, sigma, r2, sigma2, .. }, Some(vec)) => {
            let phi = faces(&m, vec)?;
            if !m.is_linear_step(&r, &sigma, &phi, &r2, &sigma2)? {
                return Ok(Verdict::no("vector-does-not-connect"));
            }
            Ok(match grm_sequence_search(&m, &r, &sigma, &phi)? {
                Some(seq) => Verdict::yes().with("sequence", names(m.face_names(), &seq)),
                None => Verdict::no("no-legal-sequence"),
            })
        }
        (Model::Mechanism { m, r, sigma, r2, sigma2, .. }, None) => {
            let bounds = SearchBounds { max_states, ..SearchBounds::default() };
            Ok(if brute_force_reach(&m, &r, &sigma, &r2, &sigma2, bounds)? {
                Verdict::yes()
            } else {
                Verdict::no("unreachable")
            })
        }
    }
}

fn names(table: &[String], seq: &[usize]) -> String {
    seq.iter().map(|&i| table[i].as_str()).collect::<Vec<_>>().join(" ")
}

fn recurrent(path: &Path, from_r: &str, from: &str) -> Result<Verdict> {
    let c = load_graph(path)?.cyclic()?;
    let g = c.gv();
    let r = arcs(g, from_r)?;
    let sigma = vertices(g, from)?;
    Ok(if is_recurrent_cyclic(&c, &r, &sigma)? {
        Verdict::yes()
    } else {
        Verdict::no("not-recurrent")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_witness_is_omitted() {
        assert_eq!(Verdict::yes().with_witness(String::new()).render(), "YES\n");
        assert_eq!(Verdict::yes().with_witness("a=1".into()).render(), "YES\nwitness: a=1\n");
        assert_eq!(Verdict::no("not-a-run").render(), "NO\nreason: not-a-run\n");
        assert_eq!(Verdict::yes().with("graph", "vertex u\n").render(), "YES\ngraph:\nvertex u\n");
    }

    #[test]
    fn at_paths_join_lines() {
        let path = std::env::temp_dir().join(format!("rotorkit-literal-{}", std::process::id()));
        std::fs::write(&path, "# header\na=1, b=2\n\nc=3 # trailing\n").unwrap();
        assert_eq!(literal(&format!("@{}", path.display())).unwrap(), "a=1, b=2,c=3");
        assert_eq!(literal("a=1").unwrap(), "a=1");
        std::fs::remove_file(&path).unwrap();
        assert!(literal("@/nonexistent/literal").is_err());
    }

    #[test]
    fn assignments_cover_every_variable_once() {
        assert_eq!(assignment_values(3, &[-2, 1, 3]).unwrap(), vec![true, false, true]);
        assert!(assignment_values(3, &[1, 2]).is_err());
        assert!(assignment_values(3, &[1, -1, 2, 3]).is_err());
        assert!(assignment_values(3, &[1, 2, 4]).is_err());
    }
}
