use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use zxcliff::circuit::{gate_matrix_product, parse_circuit};
use zxcliff::harness::{self, BenchReport};
use zxcliff::ruleset::{audit, load_ruleset};
use zxcliff::{
    default_ruleset, extract_circuit, find_path_cover, normal_forms, optimise, scalar_free_equal, simple_form,
    translate, Circuit, Diagram, FlowError, OptimiseError, OptimiserConfig,
};

const EXIT_NOT_A_CIRCUIT: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "zxcliff", version, about = "Clifford circuit optimisation by ZX-calculus rewriting")]
struct Cli {
    /// Base seed for randomised commands.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for bench.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimise a circuit file.
    Optimize {
        circuit: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the proof trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Check the output against the input with the matrix oracle.
        #[arg(long)]
        verify: bool,
        /// Axiomatic rewriting only: no oracle-backed normalisation.
        #[arg(long)]
        no_fallback: bool,
        #[arg(long, default_value_t = 50)]
        max_iters: usize,
    },
    /// Compare two circuit files up to global phase.
    Verify { a: PathBuf, b: PathBuf },
    /// Optimise random circuits and report size and timing statistics.
    Bench {
        /// Comma-separated widths.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3])]
        width: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Also write the CSV report here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        no_fallback: bool,
        /// Treat optimiser errors as fatal.
        #[arg(long)]
        strict: bool,
    },
    /// Rule set maintenance.
    Rules {
        #[command(subcommand)]
        cmd: RulesCmd,
    },
    /// Diagram JSON in, circuit text out.
    Extract {
        diagram: PathBuf,
        /// Fail with exit code 2 when no causal flow exists.
        #[arg(long)]
        require_flow: bool,
    },
    /// Circuit text in, diagram JSON out.
    Translate {
        circuit: PathBuf,
        /// Fuse to simple form first.
        #[arg(long)]
        simple: bool,
    },
    /// Normal form tables.
    Nf {
        #[command(subcommand)]
        cmd: NfCmd,
    },
}

#[derive(Subcommand)]
enum RulesCmd {
    /// Re-run the soundness audit over a rule directory (shipped rules by default).
    Check { dir: Option<PathBuf> },
}

#[derive(Subcommand)]
enum NfCmd {
    /// CC1 table and CC2 family statistics as JSON.
    Dump,
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_circuit(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn same_semantics(a: &Circuit, b: &Circuit) -> Result<bool> {
    Ok(scalar_free_equal(&gate_matrix_product(a)?, &gate_matrix_product(b)?, zxcliff::semantics::DEFAULT_TOL)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Optimize {
            circuit,
            out,
            trace,
            verify,
            no_fallback,
            max_iters,
        } => {
            let c = read_circuit(&circuit)?;
            let cfg = OptimiserConfig {
                max_global_iters: max_iters,
                semantic_fallback: !no_fallback,
                ..Default::default()
            };
            let r = match optimise(&c, &cfg) {
                Ok(r) => r,
                Err(OptimiseError::Flow(e @ FlowError::NotACircuit { .. })) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(EXIT_NOT_A_CIRCUIT));
                }
                Err(e) => return Err(e.into()),
            };
            if let Some(p) = trace {
                fs::write(&p, r.trace.to_json()).with_context(|| format!("writing {}", p.display()))?;
            }
            let ok = !verify || same_semantics(&c, &r.circuit)?;
            if cli.json {
                let v = serde_json::json!({
                    "circuit": r.circuit.to_text(),
                    "stats": r.stats,
                    "verified": verify.then_some(ok),
                });
                println!("{}", serde_json::to_string_pretty(&v)?);
                if let Some(p) = out {
                    fs::write(&p, r.circuit.to_text())?;
                }
            } else {
                write_or_print(out.as_deref(), &r.circuit.to_text())?;
                let s = &r.stats;
                eprintln!(
                    "size {} -> {} ({} rule applications, {:.1} ms)",
                    s.input_size, s.output_size, s.rewrite_steps, s.millis
                );
            }
            if !ok {
                eprintln!("error: output is not equivalent to the input");
                return Ok(ExitCode::from(EXIT_VERIFY_FAILED));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { a, b } => {
            let (ca, cb) = (read_circuit(&a)?, read_circuit(&b)?);
            let equal = same_semantics(&ca, &cb)?;
            if cli.json {
                println!("{}", serde_json::json!({ "equal": equal }));
            } else {
                println!("{equal}");
            }
            Ok(if equal { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VERIFY_FAILED) })
        }
        Cmd::Bench {
            width,
            depth,
            count,
            csv,
            no_fallback,
            strict,
        } => {
            anyhow::ensure!(depth >= 1 && count >= 1, "depth and count must be at least 1");
            anyhow::ensure!(width.iter().all(|w| *w >= 1), "widths must be at least 1");
            let cfg = OptimiserConfig {
                semantic_fallback: !no_fallback,
                ..Default::default()
            };
            let reports: Vec<BenchReport> = width
                .iter()
                .map(|w| harness::bench(*w, depth, count, cli.seed, cli.jobs, &cfg))
                .collect();
            if let Some(p) = csv {
                fs::write(&p, harness::csv(&reports))?;
            }
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&reports)?);
            } else {
                print!("{}", harness::table(&reports));
            }
            for r in &reports {
                for run in r.runs.iter().filter(|x| x.error.is_some()) {
                    eprintln!("width {} seed {}: {}", r.width, run.seed, run.error.as_deref().unwrap_or(""));
                }
            }
            let errors = reports.iter().any(|r| r.errors > 0);
            let failed = reports.iter().any(|r| r.verified < 1.0);
            Ok(if failed || (strict && errors) {
                ExitCode::from(EXIT_VERIFY_FAILED)
            } else {
                ExitCode::SUCCESS
            })
        }
        Cmd::Rules {
            cmd: RulesCmd::Check { dir },
        } => {
            let loaded;
            let set = match dir {
                Some(d) => {
                    loaded = load_ruleset(&d)?;
                    &loaded
                }
                None => default_ruleset(),
            };
            let rows = audit(set);
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                println!("{:<14} {:<22} {:>5} {:>4} {:>4} {:>8}", "group", "name", "sound", "lhs", "rhs", "µs");
                for r in &rows {
                    println!(
                        "{:<14} {:<22} {:>5} {:>4} {:>4} {:>8}",
                        r.group, r.name, r.sound, r.lhs_size, r.rhs_size, r.micros
                    );
                }
            }
            let bad = rows.iter().filter(|r| !r.sound).count();
            if bad > 0 {
                eprintln!("{bad} unsound entries");
                return Ok(ExitCode::from(EXIT_VERIFY_FAILED));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Extract { diagram, require_flow } => {
            let text = fs::read_to_string(&diagram).with_context(|| format!("reading {}", diagram.display()))?;
            let d = Diagram::from_json(&text)?;
            let attempt = |d: &Diagram| find_path_cover(d).and_then(|pc| extract_circuit(d, &pc));
            match attempt(&d).or_else(|_| attempt(&simple_form(&d))) {
                Ok(c) => {
                    print!("{}", c.to_text());
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(if require_flow {
                        ExitCode::from(EXIT_NOT_A_CIRCUIT)
                    } else {
                        ExitCode::SUCCESS
                    })
                }
            }
        }
        Cmd::Translate { circuit, simple } => {
            let c = read_circuit(&circuit)?;
            let d = translate(&c);
            let d = if simple { simple_form(&d) } else { d };
            println!("{}", d.to_json_pretty());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Nf { cmd: NfCmd::Dump } => {
            println!("{}", serde_json::to_string_pretty(&normal_forms::summary())?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
