use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use cosetlab::obfuscate::Tamper;
use cosetlab::pvqfhe::{corpus, parse_bits, PseudoDetCircuit};
use cosetlab_lab::experiments::{collapsing_point, obf_demo, pvqfhe_demo};
use cosetlab_lab::{parse_seed, run, RunConfig, REGISTRY};

#[derive(Parser)]
#[command(name = "lab", about = "Seeded experiments over coset states, one-shot signatures and their applications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered experiments.
    List,
    /// Run one registered experiment and write its JSON report.
    Run(RunArgs),
    /// Entries and distance of the coset-projection channel at one (n, k).
    Collapsing {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// `exact` or `mc`.
        #[arg(long, default_value = "exact")]
        mode: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value = "0")]
        seed: String,
    },
    /// Verifiable QFHE pipeline on one circuit and input.
    Pvqfhe {
        #[command(subcommand)]
        action: DemoAction,
    },
    /// Obfuscate a circuit and evaluate it on one input.
    Obf {
        #[command(subcommand)]
        action: ObfAction,
    },
}

#[derive(Args)]
struct RunArgs {
    experiment: String,
    #[arg(long, default_value = "0")]
    seed: String,
    #[arg(long)]
    trials: Option<usize>,
    /// Extra `key=value` parameters.
    #[arg(long = "param", value_parser = parse_kv)]
    params: Vec<(String, String)>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    /// Corpus name or path to a circuit JSON file.
    #[arg(long)]
    circuit: String,
    /// Input bits, e.g. `10`.
    #[arg(long)]
    input: String,
    #[arg(long, default_value = "0")]
    seed: String,
}

#[derive(Subcommand)]
enum DemoAction {
    Demo(DemoArgs),
}

#[derive(Subcommand)]
enum ObfAction {
    Demo {
        #[command(flatten)]
        demo: DemoArgs,
        /// Corrupt the transcript: ciphertext, proof, opening or signature.
        #[arg(long)]
        tamper: Option<Tamper>,
    },
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())).ok_or_else(|| format!("expected key=value, got '{s}'"))
}

fn load_circuit(spec: &str) -> Result<PseudoDetCircuit> {
    if let Some((_, q)) = corpus().into_iter().find(|(name, _)| *name == spec) {
        return Ok(q);
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("'{spec}' is neither a corpus circuit nor a readable file"))?;
    Ok(PseudoDetCircuit::from_json(&text)?)
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serialises"));
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    match Cli::parse().command {
        Command::List => {
            for e in REGISTRY {
                println!("{:<24} {}", e.name, e.about);
            }
            Ok(true)
        }
        Command::Run(a) => {
            let mut config = RunConfig::new(&a.experiment, &a.seed);
            config.trials = a.trials;
            config.params = a.params.into_iter().collect();
            let report = run(&config)?;
            match &a.out {
                Some(path) => std::fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?,
                None => println!("{}", report.to_json()),
            }
            eprintln!("{}", report.status_line());
            for c in report.failed_checks() {
                eprintln!("  failed: {} (observed {}, expected {}, tolerance {})", c.name, c.observed, c.expected, c.tolerance);
            }
            Ok(report.pass)
        }
        Command::Collapsing { n, k, mode, samples, seed } => {
            let p = collapsing_point(n, k, &mode, samples, &parse_seed(&seed)?)?;
            print_json(&p);
            Ok(true)
        }
        Command::Pvqfhe { action: DemoAction::Demo(d) } => {
            let q = load_circuit(&d.circuit)?;
            let x = parse_bits(&d.input)?;
            let demo = pvqfhe_demo(&q, &x, &parse_seed(&d.seed)?)?;
            print_json(&demo);
            Ok(demo.accepted && demo.decrypted == Some(demo.expected))
        }
        Command::Obf { action: ObfAction::Demo { demo: d, tamper } } => {
            let q = load_circuit(&d.circuit)?;
            let x = parse_bits(&d.input)?;
            let demo = obf_demo(&q, &x, tamper, &parse_seed(&d.seed)?)?;
            print_json(&demo);
            // A tampered run succeeds when it is rejected.
            Ok(match tamper {
                None => demo.output == Some(demo.expected),
                Some(_) => demo.output.is_none(),
            })
        }
    }
}
