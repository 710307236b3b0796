//! Batch front end: closed-form budget calculations, mechanism runs on CSV
//! microdata, brute-force verification, budget-gaming demonstrations, and
//! table reconstruction.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 enumeration cap
//! exceeded, 4 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dpspec::config::RunConfig;
use dpspec::csvio::{read_dataset_csv, write_dataset_csv};
use dpspec::divergences::{psa_plb_bound, zcdp_to_adp, OutputPremetricKind};
use dpspec::error::Error;
use dpspec::exact::{parse_rational, sig10};
use dpspec::invariants::{derive_invariants, evaluate_contingency_tables, TablesDocument};
use dpspec::reconstruct::{agreement, reconstruct, PublishedTables, ReconstructionReport};
use dpspec::report::{RunManifest, REPORT_SCHEMA_INVARIANTS, REPORT_SCHEMA_SWAP};
use dpspec::verifier::{run_battery, run_gaming_scenario, verify_psa, GamingScenarioKind};
use dpspec::Result;

#[derive(Parser)]
#[command(
    name = "dpspec",
    version,
    about = "Protection-loss accounting and brute-force verification for record swapping"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a closed-form budget: swap bound (--p with --b) or zCDP
    /// conversion (--rho with --delta)
    Plb {
        /// Swap rate in (0,1); decimals and fractions are read exactly
        #[arg(long)]
        p: Option<String>,
        /// Largest matching-group size
        #[arg(long)]
        b: Option<u64>,
        /// zCDP budget
        #[arg(long)]
        rho: Option<f64>,
        /// Failure mass in (0,1]
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Run the configured mechanism on a CSV; write the released CSV, the
    /// invariant tables, and a run manifest
    Swap {
        #[arg(long)]
        config: PathBuf,
        input: PathBuf,
        /// Overrides the config's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Verify the swap bound by brute force on one instance, or run the
    /// seeded instance battery when the config has a [battery] section
    Verify {
        #[arg(long)]
        config: PathBuf,
        input: Option<PathBuf>,
        /// Overrides the config's swap rate
        #[arg(long)]
        p: Option<String>,
        /// Report path (default report.json / battery-report.json)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the swapping-induced invariant tables of a CSV
    Invariants {
        #[arg(long)]
        config: PathBuf,
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a budget-gaming demonstration on its built-in fixture
    Game {
        /// One of: refine-strata, increase-delta, refine-granularity,
        /// add-invariants
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate all record multisets consistent with published tables
    Reconstruct {
        /// Tables document (the invariants JSON format)
        tables: PathBuf,
        /// Config providing the schema
        #[arg(long)]
        config: PathBuf,
        /// Ground-truth CSV for agreement scoring
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e))
        }
    }
}

fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => 3,
        Error::Io(_) | Error::Json(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Plb { p, b, rho, delta } => cmd_plb(p, b, rho, delta),
        Command::Swap {
            config,
            input,
            seed,
            out,
        } => cmd_swap(&config, &input, seed, &out),
        Command::Verify {
            config,
            input,
            p,
            out,
        } => cmd_verify(&config, input.as_deref(), p, out.as_deref()),
        Command::Invariants { config, input, out } => {
            cmd_invariants(&config, &input, out.as_deref())
        }
        Command::Game { scenario, out } => cmd_game(&scenario, out.as_deref()),
        Command::Reconstruct {
            tables,
            config,
            truth,
            out,
        } => cmd_reconstruct(&tables, &config, truth.as_deref(), out.as_deref()),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_plb(p: Option<String>, b: Option<u64>, rho: Option<f64>, delta: Option<f64>) -> Result<u8> {
    match (p, b, rho, delta) {
        (Some(p), Some(b), None, None) => {
            let rate = parse_rational(&p)?;
            let bound = psa_plb_bound(&rate, b)?;
            println!("{}", sig10(bound.to_f64()));
            Ok(0)
        }
        (None, None, Some(rho), Some(delta)) => {
            let eps = zcdp_to_adp(rho, delta)?;
            println!("{}", sig10(eps));
            Ok(0)
        }
        _ => Err(Error::InvalidParameter(
            "pass either --p with --b, or --rho with --delta".into(),
        )),
    }
}

fn cmd_swap(config_path: &Path, input: &Path, seed_flag: Option<u64>, out_dir: &Path) -> Result<u8> {
    let (config, config_hash) = RunConfig::load(config_path)?;
    let schema = config.build_schema()?;
    let dataset = read_dataset_csv(input, &schema)?;
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let mechanism = config.build_mechanism(&schema, config_dir, Some(&dataset))?;
    let seed = seed_flag.or(config.seed).unwrap_or(0);

    let released = mechanism.sample(&dataset, seed)?;

    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("swapped.csv");
    write_dataset_csv(&csv_path, &released)?;
    println!("wrote {}", csv_path.display());

    let manifest = RunManifest::new()
        .with_config_hash(config_hash.clone())
        .with_seed(seed);
    let spec = derive_invariants(&schema)?;
    let tables = evaluate_contingency_tables(&released, &spec)?;
    let document = TablesDocument {
        report_schema: REPORT_SCHEMA_INVARIANTS.to_string(),
        n: released.n(),
        tables,
        manifest: Some(serde_json::to_value(&manifest)?),
    };
    write_json(&out_dir.join("invariants.json"), &document)?;

    let run_record = serde_json::json!({
        "report_schema": REPORT_SCHEMA_SWAP,
        "mechanism": mechanism.name(),
        "input": input.display().to_string(),
        "released_csv": csv_path.display().to_string(),
        "n": released.n(),
        "manifest": manifest,
    });
    write_json(&out_dir.join("manifest.json"), &run_record)?;
    println!(
        "released {} records with {} (seed {seed})",
        released.n(),
        mechanism.name()
    );
    Ok(0)
}

fn cmd_verify(
    config_path: &Path,
    input: Option<&Path>,
    p_flag: Option<String>,
    out: Option<&Path>,
) -> Result<u8> {
    let (config, config_hash) = RunConfig::load(config_path)?;
    let caps = config.build_caps();

    if let Some(battery_cfg) = config.build_battery()? {
        let report = run_battery(&battery_cfg, &caps)?;
        for inst in &report.instances {
            println!(
                "instance {:>3}: n={} b={} p={} universe={} eps={} bound={} {}",
                inst.id,
                inst.n_records,
                inst.largest_group,
                inst.swap_rate,
                inst.universe_size,
                inst.eps_tight.rendered,
                inst.bound.rendered,
                if inst.pass { "PASS" } else { "FAIL" }
            );
        }
        println!("battery: {}/{} instances passed", report.passed, report.total);
        let path = out
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("battery-report.json"));
        write_json(&path, &report)?;
        return Ok(if report.all_pass { 0 } else { 4 });
    }

    let input = input.ok_or_else(|| {
        Error::InvalidParameter("verify needs an input CSV (or a [battery] config)".into())
    })?;
    if let Some(kind) = config.build_output_premetric()? {
        if kind != OutputPremetricKind::Multiplicative {
            return Err(Error::Config(
                "verification checks the closed-form swap bound, which is stated for the \
                 max-log-ratio premetric; remove [premetric] or set output = \"multiplicative\""
                    .into(),
            ));
        }
    }
    let schema = config.build_schema()?;
    let dataset = read_dataset_csv(input, &schema)?;
    let p = match p_flag {
        Some(text) => parse_rational(&text)?,
        None => config.swap_rate()?,
    };

    let mut report = verify_psa(&dataset, &p, &caps)?;
    report.manifest = RunManifest::new().with_config_hash(config_hash);

    println!(
        "universe {} members, eps_tight {} vs bound {} (gap {}): {}",
        report.universe_size,
        report.eps_tight.rendered,
        report.budget.rendered,
        report.gap.map(sig10).unwrap_or_else(|| "n/a".into()),
        if report.pass { "PASS" } else { "FAIL" }
    );
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("report.json"));
    write_json(&path, &report)?;
    Ok(if report.pass { 0 } else { 4 })
}

fn cmd_invariants(config_path: &Path, input: &Path, out: Option<&Path>) -> Result<u8> {
    let (config, config_hash) = RunConfig::load(config_path)?;
    let schema = config.build_schema()?;
    let dataset = read_dataset_csv(input, &schema)?;
    let spec = derive_invariants(&schema)?;
    let tables = evaluate_contingency_tables(&dataset, &spec)?;
    for table in &tables {
        println!(
            "table over ({}): {} nonzero cells, total {}",
            table.variables.join(","),
            table.cells.len(),
            table.total()
        );
    }
    let document = TablesDocument {
        report_schema: REPORT_SCHEMA_INVARIANTS.to_string(),
        n: dataset.n(),
        tables,
        manifest: Some(serde_json::to_value(
            RunManifest::new().with_config_hash(config_hash),
        )?),
    };
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("invariants.json"));
    write_json(&path, &document)?;
    Ok(0)
}

fn cmd_game(scenario: &str, out: Option<&Path>) -> Result<u8> {
    let kind = GamingScenarioKind::parse(scenario)?;
    let report = run_gaming_scenario(kind, &dpspec::Caps::default())?;
    println!(
        "{}: nominal eps {} -> {} (distributions identical: {})",
        report.scenario,
        report.before.nominal_eps.rendered,
        report.after.nominal_eps.rendered,
        report.distributions_identical
    );
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(format!("scenario-{}.json", kind.name())));
    write_json(&path, &report)?;
    Ok(0)
}

fn cmd_reconstruct(
    tables_path: &Path,
    config_path: &Path,
    truth: Option<&Path>,
    out: Option<&Path>,
) -> Result<u8> {
    let (config, _) = RunConfig::load(config_path)?;
    let schema = config.build_schema()?;
    let caps = config.build_caps();

    let text = std::fs::read_to_string(tables_path)?;
    let document: TablesDocument = serde_json::from_str(&text)?;
    if document.report_schema != REPORT_SCHEMA_INVARIANTS {
        return Err(Error::Config(format!(
            "unexpected tables document schema {:?}",
            document.report_schema
        )));
    }
    let published = PublishedTables::from_document(&document)?;
    let result = reconstruct(&published, &schema, &caps)?;
    let agreement_report = match truth {
        Some(path) => {
            let truth_ds = read_dataset_csv(path, &schema)?;
            Some(agreement(&result, &truth_ds)?)
        }
        None => None,
    };
    println!(
        "scanned {} candidate multisets, {} consistent",
        result.candidates_scanned,
        result.count()
    );
    if let Some(agree) = &agreement_report {
        println!(
            "agreement with truth: best {} expected {}",
            sig10(agree.best),
            sig10(agree.expected)
        );
    }
    let report = ReconstructionReport::new(&result, agreement_report);
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("reconstruction.json"));
    write_json(&path, &report)?;
    Ok(0)
}
