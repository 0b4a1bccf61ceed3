//! `sftmix`: runs the sft-core checks on a basic set and emits a versioned report.
//!
//! Exit codes: 0 when the command completed (whatever the verdict statuses),
//! 1 for usage or input format errors, 2 when a resource cap was hit.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use sft_core::certify::{
    block_gluing_evidence, mixing_verdict, primitivity_all_n_certificate, replay, Caps, Certificate, Status, Verdict,
};
use sft_core::holefill::{check_hfc_k, strong_specification_verdict, FillFailureCert, StrongSpecCaps};
use sft_core::oracle::{brute_fill_annulus, pattern_to_list, transfer_count_crosscheck};
use sft_core::primitivity::primitivity_analysis;
use sft_core::structure::{crisscross_closure, degeneracy_profile, k_crisscross};
use sft_core::{build_transition, catalog, edge, BasicSet, Direction, Error, Mode};

/// Schema tag carried by every report.
pub const SCHEMA: &str = "sftmix-report/1";

#[derive(Parser, Debug)]
#[command(name = "sftmix", version, about = "Mixing, gluing and strong specification checks for 2×2 shifts of finite type")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Basic set document (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Built-in basic set instead of --input.
    #[arg(long, global = true)]
    pub example: Option<String>,
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub q: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for the sampled oracle checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Adds wall-clock time to the report, which then is no longer byte-stable.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Structure profile: degeneracy, extendability, corner conditions, crisscross closure.
    Inspect,
    /// Direct primitivity analysis of H_n and V_n for 2 ≤ n ≤ --n.
    Primitivity,
    /// Primitivity-for-all-n certificates, or replay of a saved report.
    Certify {
        /// Report whose certificates are re-checked without any search.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Topological mixing verdict.
    Mixing,
    /// Strong specification via hole filling; --k and --m cap the width and hole side.
    Strongspec,
    /// Hole filling of width --k (default 2) around an --m × --n hole.
    Hfc,
    /// Edge-coloring transfer parts of order --n, connectors of order --m and the edge mixing verdict.
    Edge,
    /// Brute-force cross-checks; with --k, the annulus fill oracle at (--m, --n).
    Oracle,
    /// Full run: primitivity in both directions, mixing, block gluing and strong specification.
    Report,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputInfo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub p: usize,
    pub mode: Mode,
    pub patterns: usize,
    /// SHA-256 of the canonical basic-set JSON.
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub millis: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub input: InputInfo,
    pub caps: Value,
    pub verdicts: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = if matches!(e, Error::Resource(_)) { 2 } else { 1 };
        Failure { code, message: e.to_string() }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Parses `argv` (program name first), runs the command and returns the exit
/// code with the document to print on stdout, or the message for stderr.
pub fn run_command<I, S>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) { 0 } else { 1 };
            return (code, e.to_string());
        }
    };
    match execute(&cli) {
        Ok(report) => (0, render(&report, cli.format)),
        Err(f) => (f.code, f.message),
    }
}

/// Runs a parsed command, honouring `--threads`.
pub fn execute(cli: &Cli) -> Outcome<Report> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::usage("--threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Failure { code: 2, message: e.to_string() })?;
    let start = Instant::now();
    let mut report = pool.install(|| dispatch(cli))?;
    if cli.timing {
        report.timing = Some(Timing { millis: start.elapsed().as_millis() as u64 });
    }
    Ok(report)
}

fn read_text(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

/// Reads a basic-set document or an arrow-tile document.
pub fn load_input(text: &str) -> Outcome<(BasicSet, Option<String>)> {
    let value: Value = serde_json::from_str(text).map_err(|e| Failure::usage(format!("format error: {e}")))?;
    let name = value.get("name").and_then(Value::as_str).map(str::to_string);
    let set = if value.get("arrows").is_some() { edge::edge_set_from_json(text)? } else { BasicSet::from_json(text)? };
    if set.is_empty() {
        return Err(Failure::usage("format error: basic set has no patterns"));
    }
    Ok((set, name))
}

fn input(cli: &Cli) -> Outcome<(BasicSet, Option<String>)> {
    match (&cli.input, &cli.example) {
        (Some(path), None) => load_input(&read_text(path)?),
        (None, Some(name)) => match catalog::by_name(name) {
            Some(b) => Ok((b, Some(name.clone()))),
            None => Err(Failure::usage(format!("unknown example {name}; known: {}", catalog::NAMES.join(", ")))),
        },
        (Some(_), Some(_)) => Err(Failure::usage("give either --input or --example, not both")),
        (None, None) => Err(Failure::usage("missing --input")),
    }
}

pub fn digest(b: &BasicSet) -> String {
    hex::encode(Sha256::digest(b.to_json().as_bytes()))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Inspect => "inspect",
        Command::Primitivity => "primitivity",
        Command::Certify { .. } => "certify",
        Command::Mixing => "mixing",
        Command::Strongspec => "strongspec",
        Command::Hfc => "hfc",
        Command::Edge => "edge",
        Command::Oracle => "oracle",
        Command::Report => "report",
    }
}

fn caps_for(cli: &Cli, p: usize) -> Caps {
    let mut caps = Caps::for_alphabet(p);
    if let Some(m) = cli.m {
        caps.m_max = m;
    }
    if let Some(q) = cli.q {
        caps.q_max = q;
    }
    if let Some(n) = cli.n {
        caps.n_max = n;
    }
    caps
}

fn strong_caps(cli: &Cli) -> StrongSpecCaps {
    let d = StrongSpecCaps::default();
    StrongSpecCaps { k_max: cli.k.unwrap_or(d.k_max), mn_max: cli.m.unwrap_or(d.mn_max) }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn require(b: &BasicSet, mode: Mode) -> Outcome<()> {
    if b.mode() != mode {
        let want = if mode == Mode::Vertex { "vertex" } else { "edge" };
        return Err(Failure::usage(format!("this command needs a {want}-mode basic set")));
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Outcome<Report> {
    let (b, name) = input(cli)?;
    let p = b.p();
    let info = InputInfo { name, p, mode: b.mode(), patterns: b.len(), digest: digest(&b) };
    let caps = caps_for(cli, p);
    let (caps_value, verdicts, data) = match &cli.command {
        Command::Inspect => (Value::Null, Vec::new(), Some(inspect(&b)?)),
        Command::Primitivity => {
            require(&b, Mode::Vertex)?;
            let top = cli.n.unwrap_or(caps.direct_n).max(2);
            let mut rows = Vec::new();
            for n in 2..=top {
                for dir in [Direction::Horizontal, Direction::Vertical] {
                    let r = primitivity_analysis(&build_transition(&b, dir, n)?)?;
                    rows.push(json!({ "direction": dir, "n": n, "analysis": r }));
                }
            }
            (json!({ "n_max": top }), Vec::new(), Some(Value::Array(rows)))
        }
        Command::Certify { replay: Some(path) } => {
            let (verdicts, data) = replay_report(&b, &info, path)?;
            (Value::Null, verdicts, Some(data))
        }
        Command::Certify { replay: None } => {
            require(&b, Mode::Vertex)?;
            let v = [Direction::Horizontal, Direction::Vertical]
                .into_iter()
                .map(|dir| primitivity_all_n_certificate(&b, dir, &caps))
                .collect::<sft_core::Result<Vec<_>>>()?;
            (to_value(caps), v, None)
        }
        Command::Mixing => {
            let v = match b.mode() {
                Mode::Vertex => mixing_verdict(&b, &caps)?,
                Mode::Edge => edge::edge_certificates(&b, &caps)?,
            };
            (to_value(caps), vec![v], None)
        }
        Command::Strongspec => {
            require(&b, Mode::Vertex)?;
            let sc = strong_caps(cli);
            (to_value(sc), vec![strong_specification_verdict(&b, &sc)?], None)
        }
        Command::Hfc => {
            require(&b, Mode::Vertex)?;
            let (k, m, n) = (cli.k.unwrap_or(2), cli.m.unwrap_or(1), cli.n.unwrap_or(1));
            let r = check_hfc_k(&b, k, m, n)?;
            let mut data = to_value(&r);
            if let Some(cert) = FillFailureCert::from_hfc(&r) {
                data["certificate"] = to_value(Certificate::FillFailure(cert));
            }
            (json!({ "k": k, "m": m, "n": n }), Vec::new(), Some(data))
        }
        Command::Edge => {
            require(&b, Mode::Edge)?;
            let (n, m) = (cli.n.unwrap_or(2), cli.m.unwrap_or(2));
            let mut axes = serde_json::Map::new();
            for axis in [Direction::Horizontal, Direction::Vertical] {
                let fam = edge::build_edge_transfer(&b, axis, n)?;
                let parts: Vec<_> = (1..=p * p).map(|j| fam.part(j).map(|c| c.to_rows())).collect::<sft_core::Result<_>>()?;
                let conns: Vec<_> = edge::build_edge_connectors(&b, axis, m)?.iter().map(|c| c.to_rows()).collect();
                let key = if axis == Direction::Horizontal { "H" } else { "V" };
                axes.insert(
                    key.into(),
                    json!({ "non_degenerate": edge::edge_non_degenerate(&b, axis)?, "parts": parts, "connectors": conns }),
                );
            }
            let v = edge::edge_certificates(&b, &caps)?;
            let caps_value = json!({ "n": n, "m": m, "search": caps });
            (caps_value, vec![v], Some(Value::Object(axes)))
        }
        Command::Oracle => oracle(cli, &b)?,
        Command::Report => match b.mode() {
            Mode::Vertex => {
                let sc = strong_caps(cli);
                let v = vec![
                    primitivity_all_n_certificate(&b, Direction::Horizontal, &caps)?,
                    primitivity_all_n_certificate(&b, Direction::Vertical, &caps)?,
                    mixing_verdict(&b, &caps)?,
                    block_gluing_evidence(&b, &caps)?,
                    strong_specification_verdict(&b, &sc)?,
                ];
                (json!({ "search": caps, "strong_specification": sc }), v, None)
            }
            Mode::Edge => (json!({ "search": caps }), vec![edge::edge_certificates(&b, &caps)?], None),
        },
    };
    Ok(Report {
        schema: SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command_name(&cli.command).into(),
        input: info,
        caps: caps_value,
        verdicts,
        data,
        timing: None,
    })
}

fn inspect(b: &BasicSet) -> Outcome<Value> {
    if b.mode() == Mode::Edge {
        return Ok(json!({
            "non_degenerate_h": edge::edge_non_degenerate(b, Direction::Horizontal)?,
            "non_degenerate_v": edge::edge_non_degenerate(b, Direction::Vertical)?,
        }));
    }
    let (h2, v2) = b.transition_pair()?;
    let closure = crisscross_closure(b)?;
    Ok(json!({
        "h2": h2,
        "v2": v2,
        "profile": degeneracy_profile(b)?,
        "crisscross_3": k_crisscross(b, 3)?,
        "closure": { "patterns": closure.star.len(), "unchanged": closure.star == *b },
    }))
}

fn oracle(cli: &Cli, b: &BasicSet) -> Outcome<(Value, Vec<Verdict>, Option<Value>)> {
    if let Some(k) = cli.k {
        require(b, Mode::Vertex)?;
        let (m, n) = (cli.m.unwrap_or(1), cli.n.unwrap_or(1));
        let r = brute_fill_annulus(b, k, m, n)?;
        let witness = r.witness.as_ref().map(pattern_to_list);
        let data = json!({ "holds": r.holds, "examined": r.examined, "witness": witness });
        return Ok((json!({ "k": k, "m": m, "n": n }), Vec::new(), Some(data)));
    }
    let (m, n) = (cli.m.unwrap_or(4), cli.n.unwrap_or(4));
    let cross = transfer_count_crosscheck(b, m, n)?;
    let mut data = json!({ "crosscheck": cross, "passed": cross.passed() });
    if b.mode() == Mode::Vertex {
        let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
        let top = sft_core::transfer::max_order(b.p(), 256).max(3);
        let mut samples = Vec::new();
        for _ in 0..4 {
            let n = rng.gen_range(2..top);
            let q = rng.gen_range(1..=top - n);
            let dir = if rng.gen_bool(0.5) { Direction::Horizontal } else { Direction::Vertical };
            let ok = sft_core::verify_reduction(b, dir, n, q)?;
            samples.push(json!({ "check": "reduction", "direction": dir, "n": n, "q": q, "ok": ok }));
            let m = rng.gen_range(2..=top);
            let ok = sft_core::verify_connect_reduction(b, m, n, q)?;
            samples.push(json!({ "check": "connect-reduction", "m": m, "n": n, "q": q, "ok": ok }));
        }
        let all = samples.iter().all(|s| s["ok"] == json!(true));
        data["passed"] = json!(cross.passed() && all);
        data["sampled"] = Value::Array(samples);
    }
    Ok((json!({ "m": m, "n": n, "seed": cli.seed }), Vec::new(), Some(data)))
}

/// Re-checks every certificate of a saved report; statuses become what the replay reproduces.
fn replay_report(b: &BasicSet, info: &InputInfo, path: &Path) -> Outcome<(Vec<Verdict>, Value)> {
    let saved: Report =
        serde_json::from_str(&read_text(path)?).map_err(|e| Failure::usage(format!("format error in report: {e}")))?;
    if saved.schema != SCHEMA {
        return Err(Failure::usage(format!("unsupported report schema {}", saved.schema)));
    }
    if saved.input.digest != info.digest {
        return Err(Failure::usage("report was produced for a different basic set"));
    }
    let mut out = Vec::new();
    let mut rows = Vec::new();
    for v in saved.verdicts {
        let (status, error) = match replay(b, &v) {
            Ok(s) => (s, None),
            Err(Error::Certificate(why)) => (Status::Unknown, Some(why)),
            Err(e) => return Err(e.into()),
        };
        rows.push(json!({ "property": v.property, "direction": v.direction, "claimed": v.status, "replayed": status, "error": error }));
        let mut r = v;
        r.status = status;
        if let Some(why) = error {
            r.notes.push(format!("certificate rejected: {why}"));
        }
        out.push(r);
    }
    if let Some(cert) = saved.data.as_ref().and_then(|d| d.get("certificate")) {
        let cert: Certificate =
            serde_json::from_value(cert.clone()).map_err(|e| Failure::usage(format!("format error in certificate: {e}")))?;
        let Certificate::FillFailure(c) = &cert else {
            return Err(Failure::usage("only fill-failure certificates may appear outside verdicts"));
        };
        let replayed = match sft_core::holefill::replay_fill_failure(b, c) {
            Ok(s) => json!(s),
            Err(Error::Certificate(why)) => json!({ "rejected": why }),
            Err(e) => return Err(e.into()),
        };
        rows.push(json!({ "certificate": "fill-failure", "replayed": replayed }));
    }
    let reproduced = rows.iter().all(|r| r.get("claimed").map_or(r["replayed"] == json!("refuted"), |c| *c == r["replayed"]));
    Ok((out, json!({ "replay": rows, "reproduced": reproduced })))
}

/// `{"verdicts": [...]}` for a bare verdict list, or its text summary.
pub fn emit_report(verdicts: &[Verdict], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&json!({ "verdicts": verdicts })).expect("verdicts serialize") + "\n",
        Format::Text => verdicts.iter().map(verdict_line).collect(),
    }
}

fn verdict_line(v: &Verdict) -> String {
    let dir = match v.direction {
        Some(Direction::Horizontal) => " (H)",
        Some(Direction::Vertical) => " (V)",
        None => "",
    };
    let mut s = format!("{}{dir}: {}", v.property.name(), v.status.name());
    if !v.theorem.is_empty() {
        s += &format!(" via {}", v.theorem);
    }
    if let Certificate::StrongSpecification(c) = &v.certificate {
        s += &format!(" at k={}, ({},{})", c.k, c.m, c.n);
    }
    s.push('\n');
    for note in &v.notes {
        s += &format!("  - {note}\n");
    }
    s
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        Format::Text => {
            let i = &report.input;
            let mode = if i.mode == Mode::Vertex { "vertex" } else { "edge" };
            let mut s = format!("sftmix {} ({})\n", report.command, report.schema);
            s += &format!("input: {} p={} {mode} patterns={} sha256={}\n", i.name.as_deref().unwrap_or("-"), i.p, i.patterns, i.digest);
            s += &emit_report(&report.verdicts, Format::Text);
            if let Some(d) = &report.data {
                s += &format!("data: {}\n", serde_json::to_string(d).expect("data serializes"));
            }
            if let Some(t) = &report.timing {
                s += &format!("time: {} ms\n", t.millis);
            }
            s
        }
    }
}
