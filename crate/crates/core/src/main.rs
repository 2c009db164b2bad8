use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cvqkd::error::{Error, Result};
use cvqkd::keyrate::{secret_key_rate, SpectrumPath};
use cvqkd::sweep::config::DistanceGrid;
use cvqkd::sweep::csv::format_float;
use cvqkd::sweep::optimize::{optimize_variance, SearchMethod};
use cvqkd::sweep::run::grid;
use cvqkd::sweep::validate::run_validation;
use cvqkd::sweep::{load_config, sweep_correlation, sweep_csv, PathChoice, SweepConfig, VaSetting};

#[derive(Parser)]
#[command(
    name = "cvqkd",
    version,
    about = "Key rates for PSK and Gaussian CV-QKD"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Key rate against distance, written as CSV.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// Print the effective configuration and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Correlations Z4, Z8 and ZG against modulation variance.
    Correlations {
        /// start:stop:step
        #[arg(long, default_value = "0:3:0.05")]
        va_grid: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Best modulation variance at each grid point.
    Optimize {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run the cross-check suite and print a pass/fail table.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Each flag overrides the config key of the same meaning.
#[derive(Args)]
struct ParamArgs {
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// PSK4, PSK8, Gaussian; comma separated.
    #[arg(long)]
    protocol: Option<String>,
    /// homodyne, heterodyne; comma separated.
    #[arg(long)]
    detection: Option<String>,
    /// Modulation variance or "optimize".
    #[arg(long = "va")]
    va: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    eps_ele: Option<String>,
    #[arg(long)]
    mu_db_per_km: Option<String>,
    /// Comma separated excess noise values.
    #[arg(long)]
    excess_noise_list: Option<String>,
    /// start:stop:step in km.
    #[arg(long)]
    distance_km: Option<String>,
    /// ClosedForm, Matrix or Both.
    #[arg(long)]
    path: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output file; "-" for standard output.
    #[arg(long)]
    output: Option<String>,
    /// Worker threads for the grid.
    #[arg(long)]
    threads: Option<usize>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<SweepConfig> {
        let mut config = match &self.config {
            Some(path) => load_config(path).map_err(|e| match e {
                Error::Io(io) => Error::config("config", format!("{}: {io}", path.display())),
                other => other,
            })?,
            None => SweepConfig::default(),
        };
        let overrides = [
            ("protocol", &self.protocol),
            ("detection", &self.detection),
            ("V_A", &self.va),
            ("beta", &self.beta),
            ("eta", &self.eta),
            ("eps_ele", &self.eps_ele),
            ("mu_db_per_km", &self.mu_db_per_km),
            ("excess_noise_list", &self.excess_noise_list),
            ("distance_km", &self.distance_km),
            ("path", &self.path),
            ("seed", &self.seed),
            ("output", &self.output),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                config.set(key, value)?;
            }
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn correlations(va_grid: &str, output: Option<&PathBuf>) -> Result<()> {
    let mut probe = SweepConfig::default();
    probe.set("distance_km", va_grid).map_err(|e| match e {
        Error::Config { message, .. } => Error::config("va_grid", message),
        other => other,
    })?;
    let DistanceGrid { start, stop, step } = probe.distance;
    if start < 0.0 || step <= 0.0 || stop < start {
        return Err(Error::config(
            "va_grid",
            "need 0 <= start <= stop and step > 0",
        ));
    }
    let mut text = String::from("V_A,Z4,Z8,ZG\n");
    for row in sweep_correlation(&probe.distance.points())? {
        let fields = [row.va, row.z4, row.z8, row.zg].map(format_float);
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    emit(&text, output)
}

fn optimize(config: &SweepConfig, threads: Option<usize>) -> Result<()> {
    let path = match config.path {
        PathChoice::ClosedForm => SpectrumPath::ClosedForm,
        PathChoice::Matrix | PathChoice::Both => SpectrumPath::Matrix,
    };
    let reference = match config.va {
        VaSetting::Fixed(va) => va,
        VaSetting::Optimize => 1.0,
    };
    let run = || -> Result<Vec<String>> {
        use rayon::prelude::*;
        grid(config)
            .par_iter()
            .map(|p| {
                let link = config.link(p.length_km, p.excess_noise)?;
                let det = config.detector(p.detection)?;
                let opt = optimize_variance(p.protocol, &link, &det, config.beta, path)?;
                let fixed = secret_key_rate(
                    &p.protocol.scheme(reference)?,
                    &link,
                    &det,
                    config.beta,
                    path,
                )?;
                let method = match opt.method {
                    SearchMethod::GoldenSection => "golden_section",
                    SearchMethod::GridScan => "grid_scan",
                };
                Ok(format!(
                    "{},{},{},{},{},{},{},{}",
                    p.protocol.name(),
                    p.detection.name(),
                    format_float(p.length_km),
                    format_float(p.excess_noise),
                    format_float(opt.x),
                    format_float(opt.value),
                    format_float(fixed.delta_i),
                    method
                ))
            })
            .collect()
    };
    let lines = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Domain(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let mut text = format!(
        "protocol,detection,L_km,epsilon,V_A_opt,delta_I_opt,delta_I_at_{},method\n",
        format_float(reference)
    );
    for line in lines {
        text.push_str(&line);
        text.push('\n');
    }
    emit(&text, config.output.as_ref())
}

fn validate(seed: u64) -> Result<bool> {
    let checks = run_validation(seed)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:width$}  {}", c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep {
            params,
            print_config,
        } => {
            let config = params.resolve()?;
            if print_config {
                print!("{}", config.to_config_string());
                return Ok(ExitCode::SUCCESS);
            }
            let text = sweep_csv(&config, params.threads)?;
            emit(&text, config.output.as_ref())?;
        }
        Command::Correlations { va_grid, output } => correlations(&va_grid, output.as_ref())?,
        Command::Optimize { params } => optimize(&params.resolve()?, params.threads)?,
        Command::Validate { seed } => {
            if !validate(seed)? {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
