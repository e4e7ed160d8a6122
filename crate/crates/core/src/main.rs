use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use boss::analysis;
use boss::config::FileConfig;
use boss::golden;
use boss::sim::{DecoderChoice, Simulator};

#[derive(Parser)]
#[command(name = "boss", version, about = "BOSS code simulation and analysis")]
struct Cli {
    /// Suppress progress output on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo BLER campaign from a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output; stdout when neither this nor the config sets one.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        min_errors: Option<u64>,
        #[arg(long)]
        max_trials: Option<u64>,
        #[arg(long, value_enum)]
        decoder: Option<DecoderChoice>,
        /// Worker threads (0: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Analytical BLER of the single-layer K = 1, A = {1} code.
    Analyze {
        /// Takes M and G from a config file.
        #[arg(long, conflicts_with_all = ["blocklength", "blocks"])]
        config: Option<PathBuf>,
        #[arg(long, short = 'm')]
        blocklength: Option<usize>,
        #[arg(long, short = 'g')]
        blocks: Option<usize>,
        /// Comma-separated Eb/N0 grid in dB (defaults to the config grid).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eb_n0_db: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit or check conformance vectors.
    Golden {
        #[arg(value_parser = ["emit", "check"])]
        action: String,
        #[arg(long, default_value = "golden")]
        dir: PathBuf,
    },
    /// Print bit budget, rate and power of a configuration.
    Info {
        #[arg(long)]
        config: PathBuf,
    },
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn output(out: Option<&PathBuf>) -> std::io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    })
}

fn run(cli: Cli) -> CliResult {
    let quiet = cli.quiet;
    match cli.command {
        Command::Simulate {
            config,
            seed,
            out,
            min_errors,
            max_trials,
            decoder,
            workers,
        } => {
            let file = FileConfig::load(&config)?;
            let mut cfg = file.campaign()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out = Some(o);
            }
            if let Some(n) = min_errors {
                cfg.min_errors = n;
            }
            if let Some(n) = max_trials {
                cfg.max_trials = n;
            }
            if let Some(d) = decoder {
                cfg.decoder = d;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if cfg.eb_n0_db.is_empty() {
                return Err("config has an empty [simulation] eb_n0_db grid".into());
            }
            let to_stdout = cfg.out.is_none();
            let sim = Simulator::new(cfg)?;
            let points = sim.run_campaign(|p| {
                if !quiet {
                    eprintln!(
                        "Eb/N0 {:>6.2} dB  trials {:>10}  errors {:>6}  BLER {:.3e}",
                        p.eb_n0_db, p.trials, p.block_errors, p.bler
                    );
                }
            })?;
            if to_stdout {
                boss::sim::write_csv(std::io::stdout(), &points)?;
            }
        }
        Command::Analyze {
            config,
            blocklength,
            blocks,
            mut eb_n0_db,
            out,
        } => {
            let (m, g) = match config {
                Some(path) => {
                    let file = FileConfig::load(&path)?;
                    if eb_n0_db.is_empty() {
                        eb_n0_db = file.simulation.eb_n0_db.clone();
                    }
                    (file.blocklength, file.blocks)
                }
                None => (
                    blocklength.ok_or("--blocklength is required without --config")?,
                    blocks.ok_or("--blocks is required without --config")?,
                ),
            };
            if eb_n0_db.is_empty() {
                return Err("no Eb/N0 points given".into());
            }
            let mut w = csv::Writer::from_writer(output(out.as_ref())?);
            w.write_record([
                "eb_n0_db",
                "noise_var",
                "p_stage1",
                "p_stage2_given",
                "p_bler",
            ])?;
            for db in eb_n0_db {
                let p = analysis::p_bler(m, g, db)?;
                w.write_record([
                    db.to_string(),
                    format!("{:e}", p.noise_var),
                    format!("{:e}", p.p_stage1),
                    format!("{:e}", p.p_stage2_given),
                    format!("{:e}", p.p_bler),
                ])?;
                w.flush()?;
            }
        }
        Command::Golden { action, dir } => {
            if action == "emit" {
                for p in golden::emit(&dir)? {
                    if !quiet {
                        eprintln!("wrote {}", p.display());
                    }
                }
            } else {
                let problems = golden::check(&dir)?;
                for p in &problems {
                    eprintln!("{p}");
                }
                if !problems.is_empty() {
                    return Err(format!("{} conformance mismatches", problems.len()).into());
                }
                if !quiet {
                    eprintln!("all vectors match");
                }
            }
        }
        Command::Info { config } => {
            let file = FileConfig::load(&config)?;
            let params = file.code_params().validate()?;
            let b = params.bit_budget();
            let mut s = std::io::stdout().lock();
            writeln!(s, "blocklength M      {}", params.blocklength())?;
            writeln!(s, "blocks G           {}", params.blocks())?;
            writeln!(s, "block bits B0      {}", b.block_bits)?;
            for (l, lb) in b.layers.iter().enumerate() {
                writeln!(
                    s,
                    "layer {:<2}           |M|={} position {} level {}",
                    l + 1,
                    lb.candidate_size,
                    lb.position_bits,
                    lb.level_bits
                )?;
            }
            writeln!(s, "total bits         {}", b.total)?;
            writeln!(s, "payload bits       {}", params.payload_bits())?;
            writeln!(s, "rate               {}", b.rate())?;
            writeln!(s, "average power E_s  {}", params.average_power())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
