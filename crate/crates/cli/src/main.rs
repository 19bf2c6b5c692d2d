use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use rand::Rng;

use thznoma::beamforming::cosine_similarity;
use thznoma::channel::{bs_user_channel, noise_power, steering_vector};
use thznoma::pairing::{hungarian, CostMatrix};
use thznoma::power::circuit_power;
use thznoma::{run_realization, substream, sweep, SimConfig, SweepAxis, SweepResult};
use thznoma_cli::{emit_results, parse_config, write_manifest, CliError, OutputFormat};

/// Link-level simulator for an energy-efficient full-duplex cooperative NOMA
/// downlink in indoor THz networks, with an mmWave benchmark plan.
#[derive(Parser)]
#[command(name = "thznoma", version, about)]
struct Cli {
    /// JSON scenario file; missing keys keep built-in defaults
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed (overrides config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo realizations per point (overrides config)
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Single KEY=VALUE config override; repeatable
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output format for result files
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Output path (sweep/run) or path prefix (compare-bands)
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One Monte Carlo ensemble at the configured operating point
    Run,
    /// Monte Carlo ensembles over a grid of axis values
    Sweep {
        /// Axis to vary: bs_power | min_rate | num_users | band
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values (band accepts thz,mmwave)
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Paired THz and mmWave sweeps over the minimum edge rate
    CompareBands,
    /// Fast self-checks of the core invariants on small instances
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(1);
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Honor THZ_SIM_THREADS: a positive value caps the rayon worker count,
/// 0 (or unset) keeps the automatic default.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("THZ_SIM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("THZ_SIM_THREADS must be a nonnegative integer, got `{raw}`"))?;
    if n == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot configure {n} worker threads: {e}"))
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    let mut config = parse_config(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(n) = cli.realizations {
        config.num_realizations = n;
    }

    match cli.command {
        Command::Run => cmd_run(&config, cli.format, cli.out.as_deref()),
        Command::Sweep { axis, values } => {
            cmd_sweep(&config, &axis, &values, cli.format, cli.out.as_deref())
        }
        Command::CompareBands => cmd_compare_bands(&config, cli.format, cli.out.as_deref()),
        Command::Validate => Ok(cmd_validate(&config)),
    }
}

fn sim_error(e: thznoma::SimError) -> CliError {
    CliError::MalformedConfig { detail: e.to_string() }
}

fn print_points(result: &SweepResult) {
    println!(
        "{:>14}  {:>13}  {:>13}  {:>13}  {:>13}  {:>8}",
        "axis_value", "EE (bit/J)", "sum rate", "power (W)", "center rate", "infeas."
    );
    for p in &result.points {
        let s = &p.summary;
        println!(
            "{:>14}  {:>13.5e}  {:>13.5e}  {:>13.6}  {:>13.5e}  {:>8.4}",
            p.axis_value,
            s.mean_ee_bits_per_joule,
            s.mean_sum_rate_bps,
            s.mean_consumed_power_w,
            s.mean_center_rate_bps,
            s.infeasibility_rate,
        );
    }
}

fn emit_with_manifest(
    result: &SweepResult,
    config: &SimConfig,
    format: OutputFormat,
    path: &std::path::Path,
) -> Result<(), CliError> {
    emit_results(result, format, path)?;
    let manifest = write_manifest(config, path, vec![path.to_path_buf()])?;
    println!("wrote {} (manifest {})", path.display(), manifest.display());
    Ok(())
}

fn cmd_run(
    config: &SimConfig,
    format: OutputFormat,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, CliError> {
    let result = sweep(config, SweepAxis::BsPower, &[config.bs_power_w]).map_err(sim_error)?;
    let s = result.points[0].summary;
    println!(
        "seed {}  realizations {}  pairs {}",
        s.master_seed, s.num_realizations, config.num_pairs
    );
    println!("mean EE             {:.6e} bit/J", s.mean_ee_bits_per_joule);
    println!("EE std dev          {:.6e} bit/J", s.var_ee_bits_per_joule.sqrt());
    println!("mean sum rate       {:.6e} bit/s", s.mean_sum_rate_bps);
    println!("mean consumed power {:.6} W", s.mean_consumed_power_w);
    println!("mean center rate    {:.6e} bit/s", s.mean_center_rate_bps);
    println!("infeasibility rate  {:.6}", s.infeasibility_rate);
    if let Some(path) = out {
        emit_with_manifest(&result, config, format, path)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_axis_value(axis: SweepAxis, token: &str) -> Result<f64, CliError> {
    let token = token.trim();
    if axis == SweepAxis::Band {
        match token.to_ascii_lowercase().as_str() {
            "thz" => return Ok(0.0),
            "mmwave" | "mmw" => return Ok(1.0),
            _ => {}
        }
    }
    token.parse::<f64>().map_err(|_| CliError::MalformedConfig {
        detail: format!("cannot parse `{token}` as a value for axis {}", axis.as_str()),
    })
}

fn cmd_sweep(
    config: &SimConfig,
    axis: &str,
    value_tokens: &[String],
    format: OutputFormat,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, CliError> {
    let axis = SweepAxis::from_str(axis).map_err(|detail| CliError::MalformedConfig { detail })?;
    let values = value_tokens
        .iter()
        .map(|t| parse_axis_value(axis, t))
        .collect::<Result<Vec<f64>, _>>()?;
    let result = sweep(config, axis, &values).map_err(sim_error)?;
    println!("sweep over {} ({} points)", axis.as_str(), result.points.len());
    print_points(&result);
    let default_path = PathBuf::from(format!("sweep_{}.{}", axis.as_str(), format.extension()));
    let path = out.map(|p| p.to_path_buf()).unwrap_or(default_path);
    emit_with_manifest(&result, config, format, &path)?;
    Ok(ExitCode::SUCCESS)
}

/// Table-1 minimum-rate grid used by the band comparison (bit/s).
const MIN_RATE_GRID_BPS: [f64; 4] = [5e9, 10e9, 15e9, 20e9];

fn cmd_compare_bands(
    config: &SimConfig,
    format: OutputFormat,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, CliError> {
    let prefix = out
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("compare_bands"));
    let mut outputs = Vec::new();
    for (label, band_config) in [("thz", config.clone()), ("mmwave", config.mmwave_counterpart())]
    {
        let result = sweep(&band_config, SweepAxis::MinRate, &MIN_RATE_GRID_BPS)
            .map_err(sim_error)?;
        println!("{label} band, min-rate sweep:");
        print_points(&result);
        let path = PathBuf::from(format!(
            "{}_{label}.{}",
            prefix.display(),
            format.extension()
        ));
        emit_results(&result, format, &path)?;
        println!("wrote {}", path.display());
        outputs.push(path);
    }
    let manifest = write_manifest(config, &outputs[0], outputs.clone())?;
    println!("manifest {}", manifest.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(config: &SimConfig) -> ExitCode {
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("ok   {name}: {detail}");
        } else {
            println!("FAIL {name}: {detail}");
            all_ok = false;
        }
    };

    // Spot values of the noise and circuit-power formulas.
    let sigma_dbm = 10.0 * (noise_power(137e9, 10.0) * 1e3).log10();
    check(
        "noise power",
        (sigma_dbm - (-52.6328)).abs() < 0.01,
        format!("sigma^2(137 GHz, NF 10 dB) = {sigma_dbm:.4} dBm"),
    );
    let cp = circuit_power(&SimConfig::default());
    check(
        "circuit power",
        (cp - 0.6).abs() < 1e-12,
        format!("default chain draws {cp} W"),
    );

    // Hungarian optimality against exhaustive search on small instances.
    let mut rng = substream(101, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let cost = CostMatrix::from_fn(5, |_, _| rng.random_range(0..100) as f64);
        let solved = hungarian(&cost).unwrap().total_cost;
        let brute = brute_force_min(&cost);
        worst = worst.max((solved - brute).abs());
    }
    check(
        "pairing optimality",
        worst == 0.0,
        format!("100 random 5x5 instances, max deviation {worst}"),
    );

    // Correlation metric against its closed form.
    let mut rng = substream(102, 0);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1usize..=16);
        let theta_u: f64 = rng.random_range(-1.5..1.5);
        let theta_b: f64 = rng.random_range(-1.5..1.5);
        let cfg = SimConfig { num_antennas: n, ..config.clone() };
        let h = bs_user_channel(&cfg, 2.0, theta_u).unwrap();
        let w = steering_vector(n, theta_b);
        let by_inner = cosine_similarity(&h, &w).unwrap();
        worst = worst.max((by_inner - fejer_similarity(n, theta_u.sin(), theta_b.sin())).abs());
    }
    check(
        "beam correlation",
        worst < 1e-12,
        format!("200 random cases, max |inner - closed form| = {worst:.2e}"),
    );

    // Edge users of feasible pairs get exactly the minimum rate, and the
    // relay's decode SINR balances the side-link SNR.
    let mut worst_rate = 0.0f64;
    let mut worst_balance = 0.0f64;
    for i in 0..25 {
        let mut rng = substream(config.master_seed, i);
        let r = run_realization(config, &mut rng).unwrap();
        for p in &r.pairs {
            if let (Some(rates), Some(sinrs)) = (&p.rates, &p.sinrs) {
                worst_rate = worst_rate
                    .max((rates.edge_bps - config.min_rate_bps).abs() / config.min_rate_bps);
                worst_balance =
                    worst_balance.max((sinrs.edge_at_center - sinrs.edge).abs() / sinrs.edge);
            }
        }
    }
    check(
        "edge rate guarantee",
        worst_rate < 1e-6,
        format!("25 drops, max relative rate error {worst_rate:.2e}"),
    );
    check(
        "SIC balance",
        worst_balance < 1e-9,
        format!("25 drops, max relative SINR imbalance {worst_balance:.2e}"),
    );

    // Scheduling-independence of the ensemble aggregate.
    let small = SimConfig {
        num_realizations: 25,
        ..config.clone()
    };
    let run_in_pool = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| thznoma::run_monte_carlo(&small).unwrap())
    };
    let serial = run_in_pool(1);
    let parallel = run_in_pool(4);
    check(
        "determinism",
        serial == parallel,
        "25-drop ensemble identical on 1 and 4 workers".to_string(),
    );

    if all_ok {
        println!("all checks passed");
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn brute_force_min(cost: &CostMatrix) -> f64 {
    fn recurse(cost: &CostMatrix, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == cost.size() {
            *best = best.min(acc);
            return;
        }
        for j in 0..cost.size() {
            if !used[j] {
                used[j] = true;
                recurse(cost, row + 1, used, acc + cost.at(row, j), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    recurse(cost, 0, &mut vec![false; cost.size()], 0.0, &mut best);
    best
}

fn fejer_similarity(n: usize, sin_user: f64, sin_beam: f64) -> f64 {
    let half = std::f64::consts::PI * (sin_user - sin_beam) / 2.0;
    if half.sin().abs() < 1e-12 {
        return 1.0;
    }
    ((n as f64 * half).sin() / (n as f64 * half.sin())).abs()
}
