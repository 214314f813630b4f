mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{cmd_family, cmd_ix_tangent, cmd_scroll, cmd_secant, cmd_veronese, RunConfig};
use glab_core::FieldTag;
use report::{ConfigEcho, Report};

/// Exact-arithmetic verification suites for families of projective lines:
/// quadric embeddings, secant defects, projections, scrolls, and incidence
/// tangent spaces.
#[derive(Debug, Parser)]
#[command(name = "glab", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Coefficient field; only "q" (the rationals) is accepted here.
    #[arg(long, global = true, value_name = "FIELD")]
    field: Option<String>,

    /// Work over F_p for a prime p > 10^6 instead of the rationals.
    #[arg(long, global = true, value_name = "P")]
    prime: Option<u64>,

    /// Random trials per sampled check.
    #[arg(long, global = true, value_name = "T")]
    trials: Option<usize>,

    /// First-order (jet) trials where a check uses them.
    #[arg(long, global = true, value_name = "J")]
    jet_trials: Option<usize>,

    /// Seed for all randomized sampling; defaults to GLAB_SEED, then 0.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,

    /// Write the JSON report to this path; "-" prints the JSON to stdout
    /// instead of the human summary.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<String>,

    /// Lift the size guards on n and r (runs may get very slow).
    #[arg(long, global = true)]
    unsafe_size: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check the degree-2 family of lines indexed by P^n and its canonical
    /// projection.
    Veronese {
        #[arg(long)]
        n: usize,
    },
    /// Tabulate secant span dimensions and defects for the degree-2 family.
    Secant {
        #[arg(long)]
        n: usize,
        /// Largest secant order to test; defaults to n.
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Check the rational normal scroll of planes, its dual presentation,
    /// and the lift that splits the merge projection.
    Scroll {
        #[arg(long)]
        r: usize,
    },
    /// Compare the linearized incidence equations for a pair of lines and a
    /// small plane against their closed form.
    IxTangent {
        #[arg(long)]
        n: usize,
    },
    /// Operate on a user-supplied family given as a JSON document.
    Family {
        #[command(subcommand)]
        action: FamilyCmd,
    },
}

#[derive(Debug, Subcommand)]
enum FamilyCmd {
    /// Validate a family document and run the generic health checks.
    Check {
        /// Family document: {"ambient", "param_dim", "degree", "rows"}.
        path: PathBuf,
        /// Optional projection center: {"ambient", "rows"} of spanning rows.
        #[arg(long)]
        center: Option<PathBuf>,
    },
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, String> {
    if cli.field.is_some() && cli.prime.is_some() {
        return Err("choose either --field q or --prime P, not both".into());
    }
    let field = match cli.prime {
        Some(p) => {
            if p <= 1_000_000 {
                return Err(format!(
                    "prime {p} is too small; sampling needs p > 1000000"
                ));
            }
            FieldTag::prime(p).map_err(|e| e.to_string())?
        }
        None => match cli.field.as_deref() {
            None | Some("q") | Some("Q") => FieldTag::Rationals,
            Some(other) => {
                return Err(format!(
                    "unknown field {other:?}; use --field q or --prime P"
                ))
            }
        },
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => match std::env::var("GLAB_SEED") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| format!("GLAB_SEED must be an unsigned integer, got {v:?}"))?,
            Err(_) => 0,
        },
    };
    let trials = cli.trials.unwrap_or(20);
    if trials == 0 {
        return Err("--trials must be at least 1".into());
    }
    Ok(RunConfig {
        field,
        trials,
        jet_trials: cli.jet_trials.unwrap_or(20),
        seed,
    })
}

fn field_label(field: FieldTag) -> String {
    match field {
        FieldTag::Rationals => "q".into(),
        FieldTag::Prime(p) => format!("prime:{p}"),
    }
}

fn soundness_note(field: FieldTag) -> Option<String> {
    match field {
        FieldTag::Rationals => None,
        FieldTag::Prime(p) => Some(format!(
            "over F_{p} each randomized rank trial can undershoot the generic value with \
             probability at most d/{p} for defining degree d; reported dimensions are \
             certified lower bounds and equalities hold up to that per-trial error"
        )),
    }
}

fn guard(value: usize, low: usize, high: usize, what: &str, unsafe_size: bool) -> Result<(), String> {
    if value < low {
        return Err(format!("{what} must be at least {low}, got {value}"));
    }
    if value > high && !unsafe_size {
        return Err(format!(
            "{what} = {value} exceeds the size guard {high}; pass --unsafe-size to override"
        ));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    let cfg = resolve_config(cli)?;
    let mut echo = ConfigEcho {
        field: field_label(cfg.field),
        n: None,
        kmax: None,
        r: None,
        family: None,
        center: None,
        trials: cfg.trials,
        jet_trials: cfg.jet_trials,
        seed: cfg.seed,
    };

    let started = Instant::now();
    let (command, output) = match &cli.command {
        Cmd::Veronese { n } => {
            guard(*n, 1, 6, "n", cli.unsafe_size)?;
            echo.n = Some(*n);
            ("veronese", cmd_veronese(*n, &cfg))
        }
        Cmd::Secant { n, kmax } => {
            guard(*n, 1, 6, "n", cli.unsafe_size)?;
            let kmax = kmax.unwrap_or(*n);
            if kmax < 1 || kmax > *n {
                return Err(format!("kmax must lie in 1..={n}, got {kmax}"));
            }
            echo.n = Some(*n);
            echo.kmax = Some(kmax);
            ("secant", cmd_secant(*n, kmax, &cfg))
        }
        Cmd::Scroll { r } => {
            guard(*r, 1, 4, "r", cli.unsafe_size)?;
            echo.r = Some(*r);
            ("scroll", cmd_scroll(*r, &cfg))
        }
        Cmd::IxTangent { n } => {
            guard(*n, 2, 4, "n", cli.unsafe_size)?;
            echo.n = Some(*n);
            ("ix-tangent", cmd_ix_tangent(*n, &cfg))
        }
        Cmd::Family { action } => match action {
            FamilyCmd::Check { path, center } => {
                echo.family = Some(path.display().to_string());
                echo.center = center.as_ref().map(|c| c.display().to_string());
                (
                    "family check",
                    cmd_family(path, center.as_deref(), &cfg),
                )
            }
        },
    };
    let output = output.map_err(|e| e.to_string())?;

    let pass = output.checks.iter().all(|c| c.pass);
    let report = Report {
        schema: 1,
        command: command.into(),
        config: echo,
        checks: output.checks,
        pass,
        soundness: soundness_note(cfg.field),
        timing_ms: started.elapsed().as_millis(),
    };

    let json_text = serde_json::to_string_pretty(&report)
        .map_err(|e| format!("report serialization failed: {e}"))?;
    match cli.json.as_deref() {
        Some("-") => emit_stdout(&format!("{json_text}\n")),
        Some(path) => {
            std::fs::write(path, format!("{json_text}\n"))
                .map_err(|e| format!("{path}: {e}"))?;
            emit_stdout(&report.render_human(&output.notes));
        }
        None => {
            emit_stdout(&report.render_human(&output.notes));
        }
    }

    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Print without panicking when the reader closes the pipe early.
fn emit_stdout(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
