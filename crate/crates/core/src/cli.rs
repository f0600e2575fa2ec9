//! Command-line front end. `run` takes the argument list and output streams
//! so that it can be driven in-process as well as from the binary.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::cap_threshold::{cap_angle, find_c0};
use crate::error::Error;
use crate::half_space_moments::{compute_a, compute_b, compute_sc};
use crate::mountain_pass::lambda_const;
use crate::q_form::{
    build_kappa_unchecked, build_q, is_admissible, kappa_q_kappa, quadratic_value, TestVector,
};
use crate::quadrature::QuadratureSpec;
use crate::report::Report;
use crate::suites::{run_suite, Suite, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "bubblecalc",
    version,
    about = "Half-space bubble constants, quadratic-form certificates and threshold tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print A, B, S_c, Λ, T_c and the cap angle for one (n, c)
    Constants {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Print the quadratic form, its reduction, κ and the sign of κ𝒬κᵀ
    Qmatrix {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        c: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2.0 / 3.0)]
        a: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Tabulate the threshold c₀(n) for n in [MIN, MAX]
    Threshold {
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], required = true)]
        n: Vec<u32>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run verification suites and emit a JSON report
    Verify {
        #[arg(long, default_value = "all", value_parser = PossibleValuesParser::new(Suite::NAMES))]
        suite: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Omit the timestamp so that reports are byte-stable
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(msg) => Failure::Usage(msg),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Output streams of one invocation. Write errors are ignored so that a
/// closed pipe (output piped into `head`) is not fatal.
struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    colour: bool,
}

impl Io<'_> {
    fn emit(&mut self, text: &str) {
        let _ = writeln!(self.out, "{text}");
    }

    fn note(&mut self, text: &str) {
        let _ = writeln!(self.err, "{text}");
    }

    fn warn(&mut self, msg: &str) {
        if self.colour {
            self.note(&format!("\x1b[33mwarning:\x1b[0m {msg}"));
        } else {
            self.note(&format!("warning: {msg}"));
        }
    }

    fn print_csv<K: Display>(&mut self, header: &str, rows: &[(K, Option<f64>)]) {
        self.emit(header);
        for (k, v) in rows {
            self.emit(&format!("{k},{}", csv_value(*v)));
        }
    }

    fn print_json<T: Serialize>(&mut self, value: &T) {
        self.emit(&serde_json::to_string_pretty(value).expect("serialisable"));
    }
}

fn csv_value(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn constants(io: &mut Io, n: u32, c: f64, format: Format) -> Result<(), Failure> {
    if n < 3 {
        return Err(Failure::Usage("n must be ≥ 3".into()));
    }
    let quad = QuadratureSpec::default();
    let t_c = -c / (n as f64 - 2.0);
    let a = compute_a(n, t_c, &quad)?;
    let b = compute_b(n, t_c, &quad)?;
    let sc = compute_sc(n, c, &quad)?;
    let lambda = if n >= 7 {
        lambda_const(n, c, a, b).ok()
    } else {
        None
    };
    let cap = (c < 0.0).then(|| cap_angle(n, c));
    let rows = [
        ("A", Some(a)),
        ("B", Some(b)),
        ("S_c_closed", Some(sc.closed)),
        ("S_c_integral", Some(sc.integral)),
        ("lambda", lambda),
        ("t_c", Some(t_c)),
        ("cap_angle", cap),
    ];
    match format {
        Format::Csv => io.print_csv("quantity,value", &rows),
        Format::Json => {
            let mut map = serde_json::Map::new();
            map.insert("n".into(), json!(n));
            map.insert("c".into(), json!(c));
            for (k, v) in rows {
                map.insert(k.into(), json!(v));
            }
            io.print_json(&map);
        }
    }
    Ok(())
}

fn matrix_rows(m: &nalgebra::Matrix4<f64>) -> Vec<[f64; 4]> {
    (0..4)
        .map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)], m[(i, 3)]])
        .collect()
}

fn qmatrix(io: &mut Io, n: u32, c: f64, a: f64, format: Format) -> Result<(), Failure> {
    if n < 7 {
        return Err(Failure::Usage(format!("n must be ≥ 7, got {n}")));
    }
    if c > 0.0 {
        return Err(Failure::Usage(format!(
            "the quadratic form is defined for c ≤ 0, got {c}"
        )));
    }
    let t_c = -c / (n as f64 - 2.0);
    let admissible = is_admissible(a);
    if !admissible {
        io.warn(&format!(
            "a = {a} is not admissible (7a² − 8a + 2 ≥ 0); the sign of κ𝒬κᵀ is not guaranteed"
        ));
    }
    let q = build_q(n, t_c)?;
    let kappa = build_kappa_unchecked(n, t_c, a)?;
    let value = kappa_q_kappa(&q, &kappa);
    let v = quadratic_value(&q, &TestVector::new(a, t_c))?;
    match format {
        Format::Json => io.print_json(&json!({
            "n": n,
            "c": c,
            "t_c": t_c,
            "a": a,
            "admissible": admissible,
            "q_form1": matrix_rows(&q.form1),
            "q_form2": matrix_rows(&q.form2),
            "q_bar": matrix_rows(&q.q_bar),
            "kappa": [kappa.kappa2, kappa.kappa1, kappa.kappa0, kappa.last],
            "kappa_q_kappa": value,
            "v_q_bar_v": v.via_matrix,
            "v_q_bar_v_closed": v.via_closed_form,
            "negative": value < 0.0,
        })),
        Format::Csv => {
            let mut rows: Vec<(String, Option<f64>)> = Vec::new();
            for (label, m) in [
                ("q_form1", &q.form1),
                ("q_form2", &q.form2),
                ("q_bar", &q.q_bar),
            ] {
                for i in 0..4 {
                    for j in i..4 {
                        rows.push((format!("{label}_{}{}", i + 1, j + 1), Some(m[(i, j)])));
                    }
                }
            }
            for (i, k) in kappa.as_row().iter().enumerate() {
                rows.push((format!("kappa_{}", i + 1), Some(*k)));
            }
            rows.push(("kappa_q_kappa".into(), Some(value)));
            rows.push(("v_q_bar_v".into(), Some(v.via_matrix)));
            rows.push(("negative".into(), Some(if value < 0.0 { 1.0 } else { 0.0 })));
            io.print_csv("quantity,value", &rows);
        }
    }
    Ok(())
}

fn threshold(io: &mut Io, range: &[u32], tol: f64, format: Format) -> Result<(), Failure> {
    let (lo, hi) = (range[0], range[1]);
    if lo < 7 || hi < lo {
        return Err(Failure::Usage(format!("need 7 ≤ MIN ≤ MAX, got {lo} {hi}")));
    }
    if !(tol > 0.0) {
        return Err(Failure::Usage("tol must be positive".into()));
    }
    let table = (lo..=hi)
        .map(|n| find_c0(n, tol))
        .collect::<Result<Vec<_>, _>>()?;
    match format {
        Format::Csv => {
            let rows: Vec<_> = table.iter().map(|t| (t.n, Some(t.c0))).collect();
            io.print_csv("n,c0", &rows);
        }
        Format::Json => io.print_json(&json!({ "tol": tol, "rows": table })),
    }
    if table.iter().any(|t| t.unbounded) {
        io.warn("no violation found for some n; c0 reported as infinite");
    }
    Ok(())
}

fn verify(
    io: &mut Io,
    suite: &str,
    tol: Option<f64>,
    seed: u64,
    deterministic: bool,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let suite: Suite = suite.parse()?;
    let cases = run_suite(suite, &VerifyConfig::new(tol, seed));
    let mut report = Report::new(suite.name(), seed, cases);
    if !deterministic {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        report = report.with_timestamp(now);
    }
    let json = report.to_json();
    match out {
        Some(path) => std::fs::write(&path, json + "\n")
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?,
        None => io.emit(&json),
    }
    io.note(&format!(
        "{}: {} passed, {} failed",
        suite.name(),
        report.summary.pass,
        report.summary.fail
    ));
    if report.all_passed() {
        Ok(())
    } else {
        for case in report.cases.iter().filter(|c| !c.pass) {
            io.note(&format!("  failed: {}", case.name));
        }
        Err(Failure::Verification)
    }
}

/// Run one invocation; returns the process exit code (0 success, 1 runtime or
/// verification failure, 2 usage error).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, colour: bool) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut io = Io { out, err, colour };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = if colour {
                e.render().ansi().to_string()
            } else {
                e.render().to_string()
            };
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(io.out, "{text}");
            } else {
                let _ = write!(io.err, "{text}");
            }
            return code as u8;
        }
    };
    let result = match cli.command {
        Command::Constants { n, c, format } => constants(&mut io, n, c, format),
        Command::Qmatrix { n, c, a, format } => qmatrix(&mut io, n, c, a, format),
        Command::Threshold { n, tol, format } => threshold(&mut io, &n, tol, format),
        Command::Verify {
            suite,
            tol,
            seed,
            deterministic,
            out,
        } => verify(&mut io, &suite, tol, seed, deterministic, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Verification) => 1,
        Err(Failure::Runtime(msg)) => {
            io.note(&format!("error: {msg}"));
            1
        }
        Err(Failure::Usage(msg)) => {
            io.note(&format!("error: {msg}"));
            2
        }
    }
}
