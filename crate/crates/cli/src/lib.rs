//! Command-line front end: reads the JSON formats of `floer_core::schema`,
//! runs one computation and prints a deterministic report.
//!
//! Exit codes: 0 success or passing verdict, 1 failing verdict, 2 bad input.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use floer_core::bott::{e1_page, gysin_check, lacunary_collapse, Collapse};
use floer_core::cobordism::{absolute_grading, closed_dimension, cobordism_map_degree, iota, TopologyNumbers};
use floer_core::complex::{ExactnessReport, HomologyResult, InducedMap};
use floer_core::flow::{BoundaryFlowData, Flavor};
use floer_core::grading::{format_rational, GradingKind};
use floer_core::models::{
    gen_blowup_model, gen_disk4, gen_hemisphere, gen_interval, gen_pin2_s3, gen_s3_tower, pin2_s3_module,
    HermitianModelSpec,
};
use floer_core::modules::{
    correction_terms, duality_terms, froyshov, r_tower_decompose, rho, rokhlin_lift_check, verify_u_tower, UModule,
};
use floer_core::schema::{
    parse_rational, path_from_file, FlowDataFile, FormFile, GysinFile, LevelsFile, PathFile, RModuleFile,
    SchemaError, UModuleFile,
};
use floer_core::spectral::{format_parameter, relative_grading_mod_d, spectral_flow_with, DEFAULT_TOL};
use floer_core::{Error, Exec};
use num_rational::Rational64;

#[derive(Debug, Parser)]
#[command(name = "floer", version, about = "Finite-model Floer homology calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FlavorArg {
    To,
    From,
    Bar,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::To => Flavor::To,
            FlavorArg::From => Flavor::From,
            FlavorArg::Bar => Flavor::Bar,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check degree typing and every boundary identity of a flow-data file.
    Validate { file: String },
    /// Homology of one flavor.
    Homology {
        #[arg(long, value_enum)]
        flavor: FlavorArg,
        file: String,
    },
    /// The three flavors, the maps between them and exactness at each term.
    Triangle { file: String },
    /// Print the dual flow data as JSON.
    Dual { file: String },
    /// Frøyshov invariant of a flow-data file with a U-cap, or of a U-module file.
    Froyshov { file: String },
    /// Assemble the U-action and i-image of a flow-data file with a U-cap.
    Umodule {
        file: String,
        /// Print the module as JSON instead of a report.
        #[arg(long)]
        json: bool,
    },
    /// ρ of a negative definite form.
    Rho {
        form: String,
        /// Search box radius; rejected unless it certifies the minimum.
        #[arg(long = "box")]
        box_radius: Option<i64>,
        /// Enumerate on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Tower decomposition and α, β, γ of an R-module file.
    CorrectionTerms {
        file: String,
        /// Check that α, β, γ all reduce to this Rokhlin bit.
        #[arg(long)]
        rokhlin: Option<u8>,
    },
    /// Spectral flow of a path of Hermitian matrices.
    SpectralFlow {
        path: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Also reduce the flow to a relative grading mod D.
        #[arg(long = "mod")]
        modulus: Option<i64>,
    },
    /// Print a built-in dataset as JSON.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Grading arithmetic for cobordisms.
    #[command(subcommand)]
    Grading(GradingCommand),
    /// Morse–Bott E1 pages, lacunary collapse and Gysin sequences.
    #[command(subcommand)]
    Bott(BottCommand),
}

#[derive(Debug, Subcommand)]
enum ModelCommand {
    Interval,
    Hemisphere,
    Disk4,
    /// Blow-up model of a Hermitian operator with simple spectrum.
    Hermitian {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        eigs: Vec<f64>,
    },
    /// Truncated S³ towers with N rungs each.
    S3 {
        #[arg(long)]
        levels: usize,
    },
    /// Morse–Bott levels of the Pin(2) picture of S³.
    #[command(name = "pin2-s3")]
    Pin2S3 {
        #[arg(long)]
        levels: usize,
        /// Print the R-module instead of the levels.
        #[arg(long)]
        module: bool,
    },
}

#[derive(Debug, Args)]
struct Topology {
    /// c1², an integer or p/q.
    #[arg(long = "c1sq", allow_hyphen_values = true, default_value = "0")]
    c1_sq: String,
    #[arg(long, allow_hyphen_values = true)]
    chi: i64,
    #[arg(long, allow_hyphen_values = true)]
    sigma: i64,
    #[arg(long = "b1-in", default_value_t = 0)]
    b1_in: i64,
    #[arg(long = "b1-out", default_value_t = 0)]
    b1_out: i64,
}

#[derive(Debug, Subcommand)]
enum GradingCommand {
    Iota(Topology),
    Degree(Topology),
    Absolute {
        #[arg(long = "gr-z", allow_hyphen_values = true)]
        gr_z: i64,
        #[command(flatten)]
        topology: Topology,
    },
    /// Expected dimension of the moduli space on a closed manifold.
    Closed {
        #[arg(long = "c1sq", allow_hyphen_values = true)]
        c1_sq: String,
        #[arg(long, allow_hyphen_values = true)]
        chi: i64,
        #[arg(long, allow_hyphen_values = true)]
        sigma: i64,
    },
}

#[derive(Debug, Subcommand)]
enum BottCommand {
    E1 { file: String },
    Collapse {
        file: String,
        /// Degree of the differentials, overriding the file.
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<i64>,
    },
    Gysin { file: String },
}

/// An error that stops the command before a verdict.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

/// Failed validation of well-formed data is a verdict; anything else about
/// the input is an input error.
fn core_failure(e: Error) -> Failure {
    let code = match e {
        Error::DegreeViolation(_)
        | Error::IdentityViolation(_)
        | Error::InvalidComplex(_)
        | Error::NotAChainMap(_)
        | Error::Triangle(_) => 1,
        _ => 2,
    };
    Failure { code, message: e.to_string() }
}

fn schema_failure(label: &str, e: SchemaError) -> Failure {
    Failure::input(format!("{label}: schema violation at {e}"))
}

struct Input {
    label: String,
    bytes: Vec<u8>,
}

impl Input {
    fn read(path: &str, stdin: &mut dyn Read) -> Result<Self, Failure> {
        let mut bytes = Vec::new();
        if path == "-" {
            stdin.read_to_end(&mut bytes).map_err(|e| Failure::input(format!("stdin: {e}")))?;
            return Ok(Self { label: "stdin".into(), bytes });
        }
        bytes = std::fs::read(path).map_err(|e| Failure::input(format!("{path}: {e}")))?;
        Ok(Self { label: path.into(), bytes })
    }

    fn digest(&self) -> String {
        format!("sha256:{}", hex::encode(Sha256::digest(&self.bytes)))
    }

    fn value(&self) -> Result<serde_json::Value, Failure> {
        serde_json::from_slice(&self.bytes).map_err(|e| {
            Failure::input(format!(
                "{}: malformed JSON at line {}, column {}: {}",
                self.label,
                e.line(),
                e.column(),
                strip_position(&e.to_string())
            ))
        })
    }

    fn parse<T: DeserializeOwned>(&self) -> Result<T, Failure> {
        parse_value(&self.label, self.value()?)
    }
}

fn strip_position(msg: &str) -> &str {
    msg.find(" at line ").map_or(msg, |k| &msg[..k])
}

fn escape_token(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

fn parse_value<T: DeserializeOwned>(label: &str, value: serde_json::Value) -> Result<T, Failure> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let mut pointer = String::new();
        for seg in e.path().iter() {
            use serde_path_to_error::Segment;
            match seg {
                Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
                Segment::Map { key } => pointer.push_str(&format!("/{}", escape_token(key))),
                Segment::Enum { variant } => pointer.push_str(&format!("/{}", escape_token(variant))),
                Segment::Unknown => {}
            }
        }
        if pointer.is_empty() {
            pointer.push('/');
        }
        Failure::input(format!("{label}: schema violation at {pointer}: {}", e.into_inner()))
    })
}

/// Lines of a report plus an optional pass/fail verdict.
#[derive(Default)]
struct Report {
    lines: Vec<String>,
    verdict: Option<bool>,
}

impl Report {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn verdict(&mut self, pass: bool) {
        self.verdict = Some(self.verdict.unwrap_or(true) && pass);
    }
}

enum Output {
    Report { digest: Option<String>, report: Report },
    Json(String),
}

fn json<T: Serialize>(value: &T) -> Output {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    Output::Json(text)
}

fn fmt_q(r: Rational64) -> String {
    format_rational(r)
}

fn dims_table(r: &mut Report, kind: GradingKind, title: &str, dims: &BTreeMap<i64, usize>) {
    r.line(format!("{title}:"));
    if dims.is_empty() {
        r.line("  (zero)");
    }
    for (&g, &d) in dims {
        r.line(format!("  {:>8}  {d}", kind.format(g)));
    }
    r.line(format!("  total     {}", dims.values().sum::<usize>()));
}

fn ranks(r: &mut Report, name: &str, m: &InducedMap) {
    let parts: Vec<String> = m
        .blocks
        .iter()
        .filter(|(_, b)| b.rows() > 0 && b.cols() > 0)
        .map(|(&g, _)| format!("{}:{}", m.kind.format(g), m.rank_at(g)))
        .collect();
    r.line(format!("{name} ranks: {}", if parts.is_empty() { "-".into() } else { parts.join(" ") }));
}

fn exactness(r: &mut Report, at: &str, e: &ExactnessReport) {
    let fails = e.failures();
    if fails.is_empty() {
        r.line(format!("exact at {at}: yes"));
    } else {
        let gs: Vec<String> = fails.iter().map(|g| g.to_string()).collect();
        r.line(format!("exact at {at}: no (gradings {})", gs.join(" ")));
    }
    r.verdict(e.exact());
}

fn load_flow(input: &Input) -> Result<BoundaryFlowData, Failure> {
    input.parse::<FlowDataFile>()?.into_flow().map_err(|e| schema_failure(&input.label, e))
}

fn homology_lines(r: &mut Report, title: &str, h: &HomologyResult) {
    dims_table(r, h.kind(), title, &h.dims());
}

fn topology(t: &Topology) -> Result<TopologyNumbers, Failure> {
    let c1 = parse_rational(&t.c1_sq).map_err(|m| Failure::input(format!("--c1sq: {m}")))?;
    Ok(TopologyNumbers::new(c1, t.chi, t.sigma, t.b1_in, t.b1_out))
}

fn run(cmd: &Command, stdin: &mut dyn Read) -> Result<Output, Failure> {
    let mut r = Report::default();
    let mut digest = None;
    let mut open = |path: &str| -> Result<Input, Failure> {
        let input = Input::read(path, stdin)?;
        digest = Some(input.digest());
        Ok(input)
    };
    match cmd {
        Command::Validate { file } => {
            let d = load_flow(&open(file)?)?;
            let report = d.validate();
            r.line(format!("dataset: {}", d.name));
            r.line(format!("points: {}", d.points().len()));
            let lines = report.lines();
            if lines.is_empty() {
                r.line("degree typing: ok");
                r.line("identities: ok");
            }
            for l in lines {
                r.line(l);
            }
            r.verdict(report.passed());
        }
        Command::Homology { flavor, file } => {
            let d = load_flow(&open(file)?)?;
            let flavor = Flavor::from(*flavor);
            let h = d.assemble(flavor).and_then(|c| c.homology_with(Exec::Sequential)).map_err(core_failure)?;
            r.line(format!("dataset: {}", d.name));
            homology_lines(&mut r, &format!("homology {flavor}"), &h);
        }
        Command::Triangle { file } => {
            let d = load_flow(&open(file)?)?;
            let t = d.triangle().map_err(core_failure)?;
            r.line(format!("dataset: {}", d.name));
            homology_lines(&mut r, "homology to", &t.h_to);
            homology_lines(&mut r, "homology from", &t.h_from);
            homology_lines(&mut r, "homology bar", &t.h_bar);
            ranks(&mut r, "i_*", &t.i_star);
            ranks(&mut r, "j_*", &t.j_star);
            ranks(&mut r, "p_*", &t.p_star);
            for (at, e) in ["to", "from", "bar"].iter().zip(&t.exactness) {
                exactness(&mut r, at, e);
            }
        }
        Command::Dual { file } => {
            let d = load_flow(&open(file)?)?;
            let dual = d.dualize().map_err(core_failure)?;
            return Ok(json(&FlowDataFile::from_flow(&dual)));
        }
        Command::Froyshov { file } => {
            let input = open(file)?;
            let value = input.value()?;
            let m = if value.get("points").is_some() {
                let d = parse_value::<FlowDataFile>(&input.label, value)?
                    .into_flow()
                    .map_err(|e| schema_failure(&input.label, e))?;
                r.line(format!("dataset: {}", d.name));
                UModule::from_flow(&d).map_err(core_failure)?
            } else {
                parse_value::<UModuleFile>(&input.label, value)?
                    .into_module()
                    .map_err(|e| schema_failure(&input.label, e))?
            };
            let tower = verify_u_tower(&m);
            for a in &tower.anomalies {
                r.line(format!("tower anomaly: {a}"));
            }
            if let Some(b) = tower.bottom() {
                r.line(format!("tower bottom: {}", m.kind.format(b)));
            }
            if tower.passed() {
                let h = froyshov(&m).map_err(core_failure)?;
                r.line(format!("h = {}", fmt_q(h)));
            }
            r.verdict(tower.passed());
        }
        Command::Umodule { file, json: as_json } => {
            let d = load_flow(&open(file)?)?;
            let m = UModule::from_flow(&d).map_err(core_failure)?;
            if *as_json {
                return Ok(json(&UModuleFile::from_module(&m)));
            }
            r.line(format!("dataset: {}", d.name));
            r.line("grading  dim  rank U  i-image");
            for (&g, &dim) in &m.dims {
                let img = m.i_image.get(&g).map_or(0, Vec::len);
                r.line(format!("{:>7}  {dim:>3}  {:>6}  {img:>7}", m.kind.format(g), m.u_rank(g)));
            }
            let tower = verify_u_tower(&m);
            for a in &tower.anomalies {
                r.line(format!("tower anomaly: {a}"));
            }
            let rungs: Vec<String> = tower.rungs.iter().map(|&g| m.kind.format(g)).collect();
            r.line(format!("tower rungs: {}", rungs.join(" ")));
            r.verdict(tower.passed());
        }
        Command::Rho { form, box_radius, sequential } => {
            let input = open(form)?;
            let q = input.parse::<FormFile>()?.into_form().map_err(|e| schema_failure(&input.label, e))?;
            let exec = if *sequential { Exec::Sequential } else { Exec::Parallel };
            let res = rho(&q, *box_radius, exec).map_err(core_failure)?;
            let w: Vec<String> = res.witness.iter().map(i64::to_string).collect();
            r.line(format!("rank = {}", q.rank()));
            r.line(format!("search radius = {}", res.radius));
            r.line(format!("min |Q(c)| = {}", res.min_norm));
            r.line(format!("witness = [{}]", w.join(", ")));
            r.line(format!("rho = {}", fmt_q(res.rho)));
        }
        Command::CorrectionTerms { file, rokhlin } => {
            let input = open(file)?;
            let m = input.parse::<RModuleFile>()?.into_module().map_err(|e| schema_failure(&input.label, e))?;
            let t = r_tower_decompose(&m).map_err(core_failure)?;
            r.line(format!("towers (a, b, c) = ({}, {}, {})", t.a, t.b, t.c));
            let terms = correction_terms(t.a, t.b, t.c).map_err(core_failure)?;
            r.line(format!("alpha = {}", terms.alpha));
            r.line(format!("beta = {}", terms.beta));
            r.line(format!("gamma = {}", terms.gamma));
            r.line(format!("reversed orientation = {}", duality_terms(terms)));
            if let Some(bit) = rokhlin {
                let ok = rokhlin_lift_check(terms, *bit).map_err(core_failure)?;
                r.line(format!("rokhlin lift ({bit}): {}", if ok { "ok" } else { "fails" }));
                r.verdict(ok);
            }
        }
        Command::SpectralFlow { path, tol, modulus } => {
            let input = open(path)?;
            let p = path_from_file(input.parse::<PathFile>()?).map_err(|e| schema_failure(&input.label, e))?;
            let res = spectral_flow_with(&p, *tol, Exec::Sequential).map_err(core_failure)?;
            r.line(format!("samples: {}", p.parameters().len()));
            r.line(format!("dimension: {}", p.dimension()));
            r.line(format!("tolerance: {tol:e}"));
            r.line(format!("crossings: {}", res.crossings.len()));
            for c in &res.crossings {
                r.line(format!("  t = {}  {:+}", format_parameter(c.t), c.direction));
            }
            r.line(format!("spectral flow = {}", res.flow));
            if let Some(d) = modulus {
                let g = relative_grading_mod_d(res.flow, *d).map_err(core_failure)?;
                r.line(format!("relative grading = {g}"));
            }
            if p.is_closed() {
                r.line("closed: yes");
                r.verdict(res.flow == 0);
            } else {
                r.line("closed: no");
            }
        }
        Command::Model(m) => {
            let data = match m {
                ModelCommand::Interval => gen_interval(),
                ModelCommand::Hemisphere => gen_hemisphere(),
                ModelCommand::Disk4 => gen_disk4(),
                ModelCommand::Hermitian { eigs } => {
                    let spec = HermitianModelSpec::simple(eigs).map_err(core_failure)?;
                    gen_blowup_model(&spec).map_err(core_failure)?
                }
                ModelCommand::S3 { levels } => gen_s3_tower(*levels, *levels),
                ModelCommand::Pin2S3 { levels, module } => {
                    if *module {
                        let m = pin2_s3_module(*levels).map_err(core_failure)?;
                        return Ok(json(&RModuleFile::from_module(&m)));
                    }
                    return Ok(json(&LevelsFile::Bare(gen_pin2_s3(*levels))));
                }
            };
            return Ok(json(&FlowDataFile::from_flow(&data)));
        }
        Command::Grading(g) => match g {
            GradingCommand::Iota(t) => {
                r.line(format!("iota = {}", iota(&topology(t)?).map_err(core_failure)?));
            }
            GradingCommand::Degree(t) => {
                r.line(format!("degree = {}", fmt_q(cobordism_map_degree(&topology(t)?).map_err(core_failure)?)));
            }
            GradingCommand::Absolute { gr_z, topology: t } => {
                let v = absolute_grading(*gr_z, &topology(t)?).map_err(core_failure)?;
                r.line(format!("absolute grading = {}", fmt_q(v)));
            }
            GradingCommand::Closed { c1_sq, chi, sigma } => {
                let c1 = parse_rational(c1_sq).map_err(|m| Failure::input(format!("--c1sq: {m}")))?;
                r.line(format!("closed dimension = {}", fmt_q(closed_dimension(c1, *chi, *sigma))));
            }
        },
        Command::Bott(b) => match b {
            BottCommand::E1 { file } => {
                let (levels, _) = open(file)?.parse::<LevelsFile>()?.into_parts();
                let page = e1_page(&levels);
                dims_table(&mut r, GradingKind::Integer, "E1", &page.dims);
                r.line(format!("euler characteristic = {}", page.euler_characteristic()));
            }
            BottCommand::Collapse { file, degree } => {
                let (levels, file_degree) = open(file)?.parse::<LevelsFile>()?.into_parts();
                let deg = degree.unwrap_or(file_degree);
                r.line(format!("differential degree = {deg}"));
                match lacunary_collapse(&levels, deg) {
                    Collapse::Collapsed(dims) => {
                        r.line("collapses at E1: yes");
                        dims_table(&mut r, GradingKind::Integer, "homology", &dims);
                        r.verdict(true);
                    }
                    Collapse::Refused(o) => {
                        r.line(format!(
                            "collapses at E1: no (level {} degree {} -> level {} degree {})",
                            o.from_level, o.from_degree, o.to_level, o.to_degree
                        ));
                        r.verdict(false);
                    }
                }
            }
            BottCommand::Gysin { file } => {
                let input = open(file)?;
                let (c, inv) =
                    input.parse::<GysinFile>()?.into_parts().map_err(|e| schema_failure(&input.label, e))?;
                let g = gysin_check(&c, &inv).map_err(core_failure)?;
                homology_lines(&mut r, "invariant homology", &g.h_invariant);
                homology_lines(&mut r, "total homology", &g.h_total);
                ranks(&mut r, "connecting", &g.connecting);
                for (at, e) in ["invariant (in)", "total", "invariant (out)"].iter().zip(&g.exactness) {
                    exactness(&mut r, at, e);
                }
                r.line(format!(
                    "transfer kills invariants: {}",
                    if g.transfer_kills_invariants { "yes" } else { "no" }
                ));
                r.verdict(g.passed());
            }
        },
    }
    Ok(Output::Report { digest, report: r })
}

fn render(argv: &[String], digest: Option<&str>, report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!("command: floer {}\n", argv.iter().skip(1).cloned().collect::<Vec<_>>().join(" ")));
    out.push_str(&format!("input: {}\n", digest.unwrap_or("none")));
    for l in &report.lines {
        out.push_str(l);
        out.push('\n');
    }
    match report.verdict {
        Some(true) => out.push_str("verdict: pass\n"),
        Some(false) => out.push_str("verdict: fail\n"),
        None => {}
    }
    out
}

/// Runs one command line. `argv[0]` is the program name.
pub fn dispatch(argv: &[String], stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match run(&cli.command, stdin) {
        Ok(Output::Json(text)) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Ok(Output::Report { digest, report }) => {
            let _ = stdout.write_all(render(argv, digest.as_deref(), &report).as_bytes());
            if report.verdict == Some(false) {
                1
            } else {
                0
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
