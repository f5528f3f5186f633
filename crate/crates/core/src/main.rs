use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use strata::checker::Status;
use strata::contract::{normalize, parse_contract};
use strata::dsl::{export_uppaal_like, parse_component, parse_component_with, Narrowing, ParseOptions};
use strata::explore::ExploreOptions;
use strata::system::{check_composable, compose_system, load_system, normalize_system, LoadOptions};
use strata::verifier::{verify_component, verify_system, VerificationReport, VerifyOptions};

/// Directory for reports when `--report` is not given.
const REPORT_DIR_VAR: &str = "STRATA_REPORT_DIR";

#[derive(Parser)]
#[command(name = "strata", version, about = "Layered contract verification of composed components")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse components (.pml), contracts (.ctr) and systems (.mrt) and
    /// print every diagnostic
    Parse {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Compose a system and print the size of its state space
    Compose {
        system: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Verify a system layer by layer, or a single component against its contract
    Verify {
        /// A .mrt system, or a .pml component together with --contract
        input: PathBuf,
        #[arg(long)]
        contract: Option<PathBuf>,
        /// Evaluate every layer even after a failure
        #[arg(long)]
        no_short_circuit: bool,
        /// Where to write the JSON report
        #[arg(long)]
        report: Option<PathBuf>,
        /// Record per-property timings in the report
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Print a component in timed-automata template form
    Translate {
        component: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Summarize a saved report
    Report {
        report: PathBuf,
        /// Also print the witness of every failing property
        #[arg(long)]
        witnesses: bool,
    },
}

#[derive(Args)]
struct RunFlags {
    /// Abort exploration beyond this many states
    #[arg(long, default_value_t = ExploreOptions::default().state_limit)]
    state_limit: usize,
    /// Restrict an integer variable: `var=lo..hi` or `Comp.var=lo..hi`
    #[arg(long, value_parser = Narrowing::parse)]
    narrow: Vec<Narrowing>,
    /// Swap in a mutant declared in the system file
    #[arg(long)]
    mutate: Option<String>,
    /// Write the explored state space as Graphviz
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Exploration and checking threads
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl RunFlags {
    fn explore(&self) -> ExploreOptions {
        ExploreOptions {
            state_limit: self.state_limit,
            workers: self.workers.max(1),
        }
    }

    fn load(&self) -> LoadOptions {
        LoadOptions {
            mutant: self.mutate.clone(),
            narrow: self.narrow.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Parse { paths } => Ok(cmd_parse(&paths)),
        Command::Compose { system, run } => cmd_compose(&system, &run),
        Command::Verify {
            input,
            contract,
            no_short_circuit,
            report,
            timings,
            run,
        } => {
            let opts = VerifyOptions {
                short_circuit: !no_short_circuit,
                explore: run.explore(),
                include_timings: timings,
            };
            cmd_verify(&input, contract.as_deref(), report, &opts, &run)
        }
        Command::Translate { component, output } => cmd_translate(&component, output.as_deref()),
        Command::Report { report, witnesses } => cmd_report(&report, witnesses),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Diagnostics for one file, empty when it is clean.
fn parse_one(path: &Path) -> Vec<String> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let src = match ext {
        "mrt" => None,
        _ => match read(path) {
            Ok(s) => Some(s),
            Err(e) => return vec![e],
        },
    };
    let here = path.display();
    match ext {
        "pml" => match parse_component(src.as_deref().unwrap()) {
            Ok(c) => {
                println!(
                    "{here}: ok ({} locations, {} edges)",
                    c.locations.len(),
                    c.edges.len()
                );
                Vec::new()
            }
            Err(e) => e.diagnostics().iter().map(|d| format!("{here}:{d}")).collect(),
        },
        "ctr" => match parse_contract(src.as_deref().unwrap()) {
            Ok(k) => {
                println!("{here}: ok ({} properties)", k.property_count());
                Vec::new()
            }
            Err(e) => vec![format!("{here}: {e}")],
        },
        "mrt" => {
            let checked = load_system(path, &LoadOptions::default()).and_then(|spec| {
                let (layout, _) = check_composable(&spec)?;
                normalize_system(&spec, &layout).map(|w| (spec, w))
            });
            match checked {
                Ok((spec, w)) => {
                    let props: usize = w.iter().map(|c| c.obligations.len()).sum();
                    println!(
                        "{here}: ok ({} components, {props} properties)",
                        spec.components.len()
                    );
                    Vec::new()
                }
                Err(e) => vec![format!("{here}: {e}")],
            }
        }
        _ => vec![format!("{here}: unknown file kind (expected .pml, .ctr or .mrt)")],
    }
}

fn cmd_parse(paths: &[PathBuf]) -> ExitCode {
    let mut clean = true;
    for p in paths {
        for d in parse_one(p) {
            clean = false;
            eprintln!("{d}");
        }
    }
    if clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_compose(system: &Path, run: &RunFlags) -> Result<ExitCode, String> {
    let spec = load_system(system, &run.load()).map_err(|e| e.to_string())?;
    let model = compose_system(&spec, run.explore()).map_err(|e| e.to_string())?;
    let lts = &model.space.lts;
    println!("system {}", model.name);
    println!("states      {}", lts.state_count());
    println!("transitions {}", lts.transitions().len());
    println!("actions     {}", lts.alphabet().len());
    for (i, set) in model.sync_sets.iter().enumerate() {
        let names: Vec<&str> = set.iter().map(|a| a.name()).collect();
        println!("sync {}: {{{}}}", i + 1, names.join(", "));
    }
    if let Some(p) = &run.dot {
        write(p, &lts.to_dot(&model.name))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn default_report_path(name: &str) -> Option<PathBuf> {
    std::env::var_os(REPORT_DIR_VAR).map(|d| PathBuf::from(d).join(format!("{name}.json")))
}

fn cmd_verify(
    input: &Path,
    contract: Option<&Path>,
    report_path: Option<PathBuf>,
    opts: &VerifyOptions,
    run: &RunFlags,
) -> Result<ExitCode, String> {
    let report = if input.extension().is_some_and(|e| e == "pml") {
        let contract = contract.ok_or("verifying a single component needs --contract")?;
        let k = parse_contract(&read(contract)?).map_err(|e| format!("{}: {e}", contract.display()))?;
        // The contract names the instance its properties qualify with.
        let popts = ParseOptions {
            name: Some(k.component.clone()),
            ..Default::default()
        };
        let c = parse_component_with(&read(input)?, &popts)
            .map_err(|e| format!("{}:\n{e}", input.display()))?;
        if let Some(p) = &run.dot {
            let w = normalize(&c, &k).map_err(|e| e.to_string())?;
            let space = strata::verifier::isolated_space(&w, opts.explore).map_err(|e| e.to_string())?;
            write(p, &space.lts.to_dot(&c.name))?;
        }
        verify_component(&c, &k, opts)
    } else {
        let spec = load_system(input, &run.load()).map_err(|e| e.to_string())?;
        if let Some(p) = &run.dot {
            let model = compose_system(&spec, opts.explore).map_err(|e| e.to_string())?;
            write(p, &model.space.lts.to_dot(&model.name))?;
        }
        verify_system(&spec, opts)
    };
    print!("{}", report.summary_table());
    for (_, v) in report.verdicts() {
        if !matches!(v.status, Status::Pass | Status::Skipped) {
            match &v.message {
                Some(m) => println!("{} {}: {m}", v.status, v.property),
                None => println!("{} {}", v.status, v.property),
            }
            for line in &v.witness {
                println!("    {line}");
            }
        }
    }
    if let Some(p) = report_path.or_else(|| default_report_path(&report.system)) {
        write(&p, &report.to_json())?;
        println!("report written to {}", p.display());
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn cmd_translate(component: &Path, output: Option<&Path>) -> Result<ExitCode, String> {
    let c = parse_component(&read(component)?).map_err(|e| format!("{}:\n{e}", component.display()))?;
    let text = export_uppaal_like(&c);
    match output {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(path: &Path, witnesses: bool) -> Result<ExitCode, String> {
    let report = VerificationReport::from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    println!("system {} ({} states)", report.system, report.state_count);
    print!("{}", report.summary_table());
    for (facet, v) in report.verdicts() {
        println!("  [{facet}] {:<24} {}", v.property, v.status);
        if witnesses && !v.witness.is_empty() {
            for line in &v.witness {
                println!("      {line}");
            }
        }
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}
