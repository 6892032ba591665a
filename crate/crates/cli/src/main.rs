use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mvcorr::correlations::{
    assemble_numeric, build_witness_w23, build_witness_w32, certificate_check, cyclic_w23_model,
    cyclic_w32_model, AnyTable, CertificateReport, WitnessId,
};
use mvcorr::optimizer::{sweep, to_csv, ModelCheckpoint, Schedule, SweepConfig};
use mvcorr::verify::{verify, Backend, Target, VerifyReport};
use mvcorr::words::{ping_pong_injectivity_check, PingPongReport, DEFAULT_ENUMERATION_CAP};
use serde::Serialize;
use serde_json::json;

mod config;

use config::{parse_dims, parse_format, Format, RunConfig};

/// Conventions every report carries.
const CONVENTIONS: [(&str, &str); 5] = [
    ("sign", "two-outcome PVMs come from S = E2 - E1: outcome 1 is the -1 eigenspace, outcome 2 the +1 eigenspace"),
    ("input_labels", "marginals are read at the other party's input 1; the first three-outcome combination is read at inputs (1,1)"),
    ("n", "n = 4: the representation of Z2*Z3 is induced from the index-3 subgroup <g, hgh> on C^3 (x) l2(Z)"),
    ("zeta_exponent", "zeta1 = sum_{j<0} (sqrt2)^j e_j (x) e_j on the identity coset"),
    ("entries", "table entries are (i,j) = <(E (x) F) zeta_j, zeta_i>, inner products linear in the first argument"),
];

#[derive(Parser)]
#[command(name = "mvcorr", version, about = "Matrix-valued correlation witnesses: exact checks, truncations, defect sweeps")]
struct Cli {
    /// TOML file with the same fields as the flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// text, json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the identities of one construction (prop15, thm21, lemma32, thm33).
    Verify {
        target: Option<String>,
        /// exact or cyclic.
        #[arg(long)]
        backend: Option<String>,
        /// Cyclic window M (sites −M..M−1).
        #[arg(long)]
        window: Option<i64>,
    },
    /// Injectivity of g ↦ g, u ↦ hgh on reduced words.
    EmbedCheck {
        /// Maximum syllable count.
        #[arg(long)]
        length: Option<usize>,
        /// Maximum |exponent| of u.
        #[arg(long)]
        exp: Option<i64>,
    },
    /// Invariants and witness residuals of a table in JSON.
    CertificateCheck {
        path: Option<PathBuf>,
        #[arg(long)]
        witness: Option<String>,
    },
    /// Multi-restart defect minimization sweep.
    Optimize {
        #[arg(long)]
        witness: Option<String>,
        /// Comma-separated d_AxD_B pairs, e.g. 2x2,3x3.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Output directory for defects.csv, summary.json and checkpoints.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a witness table (exact or cyclic) as JSON.
    Export {
        #[arg(long)]
        witness: Option<String>,
        #[arg(long)]
        backend: Option<String>,
        #[arg(long)]
        window: Option<i64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status plus message: 1 for failures, 2 for usage and parse errors.
#[derive(Debug)]
pub struct Exit {
    code: u8,
    msg: String,
}

impl Exit {
    pub fn usage(msg: impl Into<String>) -> Exit {
        Exit { code: 2, msg: msg.into() }
    }

    fn failure(msg: impl Into<String>) -> Exit {
        Exit { code: 1, msg: msg.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(n) = std::env::var("MVCORR_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: MVCORR_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn flags(command: Option<Command>) -> RunConfig {
    let mut c = RunConfig::default();
    let Some(command) = command else { return c };
    match command {
        Command::Verify { target, backend, window } => {
            c.command = Some("verify".into());
            c.target = target;
            c.backend = backend;
            c.window = window;
        }
        Command::EmbedCheck { length, exp } => {
            c.command = Some("embed-check".into());
            c.length = length;
            c.exp = exp;
        }
        Command::CertificateCheck { path, witness } => {
            c.command = Some("certificate-check".into());
            c.path = path;
            c.witness = witness;
        }
        Command::Optimize { witness, dims, restarts, seed, max_iters, out } => {
            c.command = Some("optimize".into());
            c.witness = witness;
            c.dims = dims;
            c.restarts = restarts;
            c.seed = seed;
            c.max_iters = max_iters;
            c.out = out;
        }
        Command::Export { witness, backend, window, out } => {
            c.command = Some("export".into());
            c.witness = witness;
            c.backend = backend;
            c.window = window;
            c.out = out;
        }
    }
    c
}

fn overlay(flags: RunConfig, file: RunConfig) -> RunConfig {
    RunConfig {
        command: flags.command.or(file.command),
        target: flags.target.or(file.target),
        backend: flags.backend.or(file.backend),
        window: flags.window.or(file.window),
        witness: flags.witness.or(file.witness),
        dims: flags.dims.or(file.dims),
        restarts: flags.restarts.or(file.restarts),
        seed: flags.seed.or(file.seed),
        max_iters: flags.max_iters.or(file.max_iters),
        out: flags.out.or(file.out),
        format: flags.format.or(file.format),
        length: flags.length.or(file.length),
        exp: flags.exp.or(file.exp),
        path: flags.path.or(file.path),
    }
}

fn run(cli: Cli) -> Result<u8, Exit> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let mut given = flags(cli.command);
    given.format = cli.format;
    let cfg = overlay(given, file);
    let format = parse_format(cfg.format.as_deref().unwrap_or("text"))?;
    match cfg.command.as_deref() {
        Some("verify") => cmd_verify(&cfg, format),
        Some("embed-check") => cmd_embed_check(&cfg, format),
        Some("certificate-check") => cmd_certificate_check(&cfg, format),
        Some("optimize") => cmd_optimize(&cfg, format),
        Some("export") => cmd_export(&cfg),
        Some(other) => Err(Exit::usage(format!("unknown command `{other}`"))),
        None => Err(Exit::usage("no command given (see --help)")),
    }
}

fn envelope_json<T: Serialize>(command: &str, report: &T) -> String {
    let conventions: serde_json::Map<_, _> =
        CONVENTIONS.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let doc = json!({
        "version": mvcorr::VERSION,
        "command": command,
        "conventions": conventions,
        "report": report,
    });
    serde_json::to_string_pretty(&doc).expect("reports serialize")
}

fn text_header(out: &mut String, title: &str) {
    writeln!(out, "mvcorr {}  {title}", mvcorr::VERSION).unwrap();
    for (k, v) in CONVENTIONS {
        writeln!(out, "  convention {k}: {v}").unwrap();
    }
}

fn parse_witness(s: Option<&str>) -> Result<WitnessId, Exit> {
    let s = s.ok_or_else(|| Exit::usage("--witness is required (32 or 23)"))?;
    s.parse().map_err(Exit::usage)
}

fn parse_backend(cfg: &RunConfig) -> Result<Backend, Exit> {
    match cfg.backend.as_deref().unwrap_or("exact") {
        "exact" => Ok(Backend::Exact),
        "cyclic" => {
            let window = cfg.window.unwrap_or(8);
            if window < 2 {
                return Err(Exit::usage(format!("--window must be at least 2, got {window}")));
            }
            Ok(Backend::Cyclic { window })
        }
        other => Err(Exit::usage(format!("unknown backend `{other}` (expected exact or cyclic)"))),
    }
}

fn cmd_verify(cfg: &RunConfig, format: Format) -> Result<u8, Exit> {
    let name = cfg.target.as_deref().ok_or_else(|| Exit::usage("verify needs a target"))?;
    let target = match name {
        "prop15" => Target::ShiftPair,
        "thm21" => Target::ThreeInput,
        "lemma32" => Target::InducedPair,
        "thm33" => Target::ThreeOutcome,
        other => {
            return Err(Exit::usage(format!(
                "unknown target `{other}` (expected prop15, thm21, lemma32 or thm33)"
            )))
        }
    };
    let backend = parse_backend(cfg)?;
    let report = verify(target, backend).map_err(|e| Exit::failure(e.to_string()))?;
    match format {
        Format::Json => println!("{}", envelope_json("verify", &report)),
        Format::Text => print!("{}", render_verify(name, &report)),
        Format::Csv => return Err(Exit::usage("verify has no csv output")),
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn render_verify(name: &str, r: &VerifyReport) -> String {
    let mut out = String::new();
    text_header(&mut out, &format!("verify {name}  backend {}", r.backend));
    if let Some(n) = r.n {
        writeln!(out, "n = {n}").unwrap();
    }
    for c in &r.checks {
        let tag = match c.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "info",
        };
        writeln!(out, "  [{tag}] {}: {} (expected {}) ≈ {:.12}", c.name, c.actual, c.expected, c.decimal).unwrap();
    }
    for m in &r.matrices {
        writeln!(out, "{} =", m.name).unwrap();
        for (sym, dec) in m.symbolic.iter().zip(&m.decimal) {
            let s: Vec<_> = sym.iter().map(|x| format!("{x:>10}")).collect();
            let d: Vec<_> = dec.iter().map(|z| format_complex(*z)).collect();
            writeln!(out, "  [{}]   ≈ [{}]", s.join(" "), d.join(" ")).unwrap();
        }
    }
    if let (Some(res), Some(env)) = (r.residual, r.envelope) {
        writeln!(out, "residual {res:e}  envelope {env:e}").unwrap();
    }
    writeln!(out, "result: {}", if r.passed { "PASS" } else { "FAIL" }).unwrap();
    out
}

fn format_complex(z: [f64; 2]) -> String {
    if z[1] == 0.0 {
        format!("{:>9.6}", z[0])
    } else {
        format!("{:.6}{:+.6}i", z[0], z[1])
    }
}

fn cmd_embed_check(cfg: &RunConfig, format: Format) -> Result<u8, Exit> {
    let length = cfg.length.unwrap_or(8);
    let exp = cfg.exp.unwrap_or(4);
    if length < 1 || exp < 1 {
        return Err(Exit::usage("--length and --exp must be at least 1"));
    }
    let report = ping_pong_injectivity_check(length, exp, DEFAULT_ENUMERATION_CAP)
        .map_err(|e| Exit::failure(e.to_string()))?;
    match format {
        Format::Json => println!("{}", envelope_json("embed-check", &report)),
        Format::Text => print!("{}", render_embed(&report)),
        Format::Csv => return Err(Exit::usage("embed-check has no csv output")),
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn render_embed(r: &PingPongReport) -> String {
    let mut out = String::new();
    text_header(&mut out, &format!("embed-check  length {}  exp {}", r.max_syllables, r.max_exponent));
    writeln!(out, "words checked: {}", r.words_checked).unwrap();
    writeln!(out, "distinct images: {}", r.distinct_images).unwrap();
    writeln!(out, "collisions: {}", r.collisions).unwrap();
    writeln!(out, "syllable length of (hgh)^n:").unwrap();
    for (i, l) in r.power_lengths.iter().enumerate().take(10) {
        writeln!(out, "  n = {:>2}: {l}", i + 1).unwrap();
    }
    writeln!(out, "  ... strictly increasing up to n = {}: {}", r.power_lengths.len(), r.powers_strictly_increasing).unwrap();
    writeln!(out, "result: {}", if r.passed { "PASS" } else { "FAIL" }).unwrap();
    out
}

fn cmd_certificate_check(cfg: &RunConfig, format: Format) -> Result<u8, Exit> {
    let path = cfg.path.as_deref().ok_or_else(|| Exit::usage("certificate-check needs a path"))?;
    let witness = parse_witness(cfg.witness.as_deref())?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Exit::usage(format!("cannot read {}: {e}", path.display())))?;
    let table = AnyTable::from_json_str(&text).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))?;
    let report = certificate_check(&table, witness).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))?;
    match format {
        Format::Json => println!("{}", envelope_json("certificate-check", &report)),
        Format::Text => print!("{}", render_certificate(path, &report)),
        Format::Csv => return Err(Exit::usage("certificate-check has no csv output")),
    }
    Ok(if report.valid() { 0 } else { 1 })
}

fn render_certificate(path: &Path, r: &CertificateReport) -> String {
    let mut out = String::new();
    text_header(&mut out, &format!("certificate-check {}  witness {}", path.display(), r.witness));
    writeln!(out, "table: field {}, n = {}, m = {}, k = {}", r.field, r.n, r.m, r.k).unwrap();
    if r.invariant_violations.is_empty() {
        writeln!(out, "invariants: ok").unwrap();
    }
    for v in &r.invariant_violations {
        writeln!(out, "  [violation] {v}").unwrap();
    }
    for (name, value, sym) in &r.components {
        match sym {
            Some(s) => writeln!(out, "  {name}: {s} ≈ {value:e}").unwrap(),
            None => writeln!(out, "  {name}: {value:e}").unwrap(),
        }
    }
    match &r.total_symbolic {
        Some(s) => writeln!(out, "defect: {s} ≈ {:e}", r.total).unwrap(),
        None => writeln!(out, "defect: {:e}", r.total).unwrap(),
    }
    out
}

fn cmd_optimize(cfg: &RunConfig, format: Format) -> Result<u8, Exit> {
    let witness = parse_witness(cfg.witness.as_deref())?;
    let dims = parse_dims(cfg.dims.as_deref().ok_or_else(|| Exit::usage("--dims is required"))?)?;
    let restarts = cfg.restarts.unwrap_or(50);
    if restarts == 0 {
        return Err(Exit::usage("--restarts must be at least 1"));
    }
    let mut schedule = Schedule::default();
    if let Some(n) = cfg.max_iters {
        schedule.max_iters = n;
    }
    let sweep_cfg = SweepConfig {
        witness,
        dims,
        restarts,
        master_seed: cfg.seed.unwrap_or(42),
        schedule,
    };
    let mut outcome = sweep(&sweep_cfg).map_err(|e| Exit::failure(e.to_string()))?;
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).map_err(|e| Exit::failure(format!("{}: {e}", dir.display())))?;
        for (report, best) in outcome.reports.iter_mut().zip(&outcome.best) {
            let name = format!("best_{}_{}x{}.json", report.witness, report.da, report.db);
            let json = serde_json::to_string(&ModelCheckpoint::from(best)).expect("checkpoint serializes");
            write_file(&dir.join(&name), &json)?;
            report.checkpoint = Some(name);
        }
        write_file(&dir.join("defects.csv"), &to_csv(&outcome.reports))?;
        let summary = json!({ "config": sweep_cfg, "reports": outcome.reports });
        write_file(&dir.join("summary.json"), &envelope_json("optimize", &summary))?;
    }
    match format {
        Format::Csv => print!("{}", to_csv(&outcome.reports)),
        Format::Json => {
            let summary = json!({ "config": sweep_cfg, "reports": outcome.reports });
            println!("{}", envelope_json("optimize", &summary));
        }
        Format::Text => {
            let mut out = String::new();
            text_header(&mut out, &format!("optimize  witness {witness}  seed {}", sweep_cfg.master_seed));
            for r in &outcome.reports {
                writeln!(
                    out,
                    "{}x{}: best defect {:e} (restart {}, {} runs, {:.2} s)",
                    r.da,
                    r.db,
                    r.best_defect,
                    r.best_restart,
                    r.runs.len(),
                    r.wall_time_s
                )
                .unwrap();
            }
            writeln!(out, "empirical values only; no lower bound on the finite-dimensional defect is claimed").unwrap();
            print!("{out}");
        }
    }
    Ok(0)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Exit> {
    std::fs::write(path, contents).map_err(|e| Exit::failure(format!("{}: {e}", path.display())))
}

fn cmd_export(cfg: &RunConfig) -> Result<u8, Exit> {
    let witness = parse_witness(cfg.witness.as_deref())?;
    let backend = parse_backend(cfg)?;
    let fail = |e: mvcorr::CorrelationError| Exit::failure(e.to_string());
    let table = match (witness, backend) {
        (WitnessId::W32, Backend::Exact) => AnyTable::Exact(build_witness_w32().map_err(fail)?.1),
        (WitnessId::W23, Backend::Exact) => AnyTable::Exact(build_witness_w23().map_err(fail)?.1),
        (WitnessId::W32, Backend::Cyclic { window }) => {
            AnyTable::Numeric(assemble_numeric(&cyclic_w32_model(window).map_err(fail)?).map_err(fail)?)
        }
        (WitnessId::W23, Backend::Cyclic { window }) => {
            AnyTable::Numeric(assemble_numeric(&cyclic_w23_model(window).map_err(fail)?).map_err(fail)?)
        }
    };
    let json = table.to_json_string();
    match &cfg.out {
        Some(p) => write_file(p, &json)?,
        None => println!("{json}"),
    }
    Ok(0)
}
