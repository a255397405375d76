//! `mf` — experiments on discrete Fourier-Mellin transforms of trace
//! functions over finite fields.
//!
//! Every subcommand reads a plain-text `key = value` config (see
//! `docs/CONFIG.md`), runs its experiment, writes one JSON report plus
//! the experiment's CSV tables into `--out`, and exits 0 exactly when
//! every asserted criterion passed.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use mf_core::experiments::{run, ExperimentConfig, RunOutput};
use mf_core::gf::build_field;

#[derive(Parser)]
#[command(name = "mf", version, about = "Fourier-Mellin character-sum experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Deterministic seed override (config `seed` key otherwise).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for the JSON report and CSV tables.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Report format(s) to write.
    #[arg(long, global = true, default_value = "csv")]
    format: Format,

    /// Cesàro averaging over extension degrees (`cesaro`) or fixed
    /// levels (`none`, default).
    #[arg(long, global = true, default_value = "none")]
    average: String,

    /// Worker threads for the bulk kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Print the arithmetic data of one finite field F_{p^n}.
    Field,
    /// Full spectrum of a descriptor over one group of rational points.
    Mellin,
    /// Unitary Frobenius classes of a shipped descriptor, with residuals.
    Frobclass,
    /// Fourth/eighth moment sweeps of character families.
    Moments,
    /// Exhaustive Sidon verdicts for the shipped embeddings.
    Sidon,
    /// Von Mangoldt variance in residue classes, both routes.
    Variance,
    /// Genus-2 Jacobian classes against the symplectic constraints.
    Jacobian,
    /// Fourier L-functions of point masses: rational form and roots.
    Lhat,
    /// Determinant ratios against the Gauss-sum product formula.
    Detratio,
    /// Kloosterman–Salié slices and the full-family fourth moment.
    Kloosterman,
}

fn expected_experiment(cmd: &Command) -> &'static str {
    match cmd {
        Command::Field => "field",
        Command::Mellin => "mellin",
        Command::Frobclass => "frobclass",
        Command::Moments => "moment_sweep",
        Command::Sidon => "sidon",
        Command::Variance => "variance",
        Command::Jacobian => "jacobian_st",
        Command::Lhat => "lhat",
        Command::Detratio => "det_ratio",
        Command::Kloosterman => "kloosterman_salie",
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool");
    }
    let code = match run_cli(&cli) {
        Ok(passed) => {
            if passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    let path = cli.config.as_ref().ok_or("--config <file> is required")?;
    let mut text = std::fs::read_to_string(path)?;
    if let Some(seed) = cli.seed {
        text.push_str(&format!("\nseed = {seed}\n"));
    }
    if cli.average == "cesaro" {
        text.push_str("\naverage = cesaro\n");
    }
    Ok(ExperimentConfig::parse(&text)?)
}

fn run_cli(cli: &Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match &cli.command {
        Command::Field => {
            let cfg = load_config(cli)?;
            if cfg.experiment != "field" {
                return Err("config's experiment key must be `field`".into());
            }
            let p = cfg.u64("p")?;
            let n = cfg.u64("n")? as usize;
            let k = build_field(p, n)?;
            println!("F_{{{p}^{n}}}: order {}", k.order());
            println!("modulus coefficients (low to high): {:?}", k.modulus());
            println!("generator (packed index): {}", k.generator().index());
            println!("dlog tables: {}", k.has_tables());
            Ok(true)
        }
        Command::Mellin => {
            let cfg = load_config(cli)?;
            if cfg.experiment != "mellin" {
                return Err("config's experiment key must be `mellin`".into());
            }
            let out = run_mellin(&cfg)?;
            emit(cli, out)
        }
        cmd => {
            let cfg = load_config(cli)?;
            let want = expected_experiment(cmd);
            if cfg.experiment != want {
                return Err(
                    format!("config is for `{}`, expected `{want}`", cfg.experiment).into()
                );
            }
            let out = run(&cfg)?;
            emit(cli, out)
        }
    }
}

/// Spectrum export: CSV with columns (char exponents..., re, im).
fn run_mellin(cfg: &ExperimentConfig) -> Result<RunOutput, Box<dyn std::error::Error>> {
    use mf_core::experiments::{Csv, Report};
    use mf_core::fftutil;
    use mf_core::gf::Tower;
    use mf_core::mellin::SpectrumMethod;
    use mf_core::tracefn::ObjectDescriptor;
    use mf_core::C64;

    let start = std::time::Instant::now();
    let which = cfg.get("descriptor")?;
    let p = cfg.u64("p")?;
    let n = cfg.u64_or("n", 1)? as usize;
    let method = match cfg.get_or("method", "fft").as_str() {
        "naive" => SpectrumMethod::Naive,
        _ => SpectrumMethod::Fft,
    };
    let mut report = Report::new("mellin");
    for (k, v) in cfg.echo() {
        report.echo_input(&k, v);
    }
    let tower = Tower::new(p, n)?;
    let kn = tower.level(n);

    let (dims, values, label): (Vec<u64>, Vec<C64>, String) = match which {
        "legendre_ga" => {
            // additive group (Z/p)^n
            let desc = ObjectDescriptor::legendre_ga();
            let vals = desc.line_values(&tower, n)?;
            (vec![p; n], vals, "legendre-ga".into())
        }
        "kloosterman_gm" => {
            // multiplicative group, cyclic of order q - 1, indexed by dlog
            let desc = ObjectDescriptor::kloosterman_gm(2);
            let vals = desc.line_values(&tower, n)?;
            let order = kn.order() - 1;
            let mut by_log = vec![C64::new(0.0, 0.0); order as usize];
            let mut cur = 1u64;
            for slot in by_log.iter_mut() {
                *slot = vals[cur as usize];
                cur = kn.mul(kn.elem(cur), kn.generator()).index();
            }
            (vec![order], by_log, "kloosterman-gm".into())
        }
        "kloosterman_diag" | "gauss_degenerate" => {
            if n != 1 {
                return Err("diagonal spectra are exported at n = 1".into());
            }
            let desc = if which == "kloosterman_diag" {
                ObjectDescriptor::kloosterman_diagonal()
            } else {
                ObjectDescriptor::gauss_degenerate(cfg.u64_or("eta_exp", 1)?, cfg.u64_or("b", 1)?)
            };
            // values on G_m x G_a in (dlog, additive) layout
            let vals = desc.line_values(&tower, 1)?;
            let mut grid = vec![C64::new(0.0, 0.0); ((p - 1) * p) as usize];
            let mut cur = 1u64;
            for j in 0..(p - 1) {
                // diagonal support y = x
                grid[(j * p + cur) as usize] = vals[cur as usize];
                cur = kn.mul(kn.elem(cur), kn.generator()).index();
            }
            (vec![p - 1, p], grid, which.to_string())
        }
        other => return Err(format!("unknown mellin descriptor `{other}`").into()),
    };

    let t0 = std::time::Instant::now();
    let spectrum = match method {
        SpectrumMethod::Fft => {
            let mut v = values.clone();
            fftutil::dft_multi(&mut v, &dims);
            v
        }
        SpectrumMethod::Naive => {
            mf_core::mellin::spectrum_from_values(&dims, &values, n, &label, SpectrumMethod::Naive)?
                .values
        }
    };
    report.observe("spectrum-wall-seconds", t0.elapsed().as_secs_f64(), "wall-clock measurement");

    // orthogonality: sum of spectrum = |G| * t(e)
    let total: C64 = spectrum.iter().sum();
    let group: u64 = dims.iter().product();
    let t_e = match which {
        "legendre_ga" => values[0],
        "kloosterman_gm" => values[0],
        _ => C64::new(0.0, 0.0),
    };
    let mass: f64 = spectrum.iter().map(|s| s.norm()).sum::<f64>();
    let resid = (total - t_e * group as f64).norm() / mass.max(1.0);
    report.assert_at_most(
        "orthogonality",
        resid,
        1e-9,
        "character orthogonality: sum of the spectrum equals |G| t(e)",
    );

    let mut header: Vec<String> = (0..dims.len()).map(|i| format!("c{i}")).collect();
    header.push("re".into());
    header.push("im".into());
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut csv = Csv::new(&header_refs);
    for (flat, s) in spectrum.iter().enumerate() {
        let mut row = Vec::with_capacity(dims.len() + 2);
        let mut t = flat as u64;
        let mut expo = vec![0u64; dims.len()];
        for (i, &d) in dims.iter().enumerate().rev() {
            expo[i] = t % d;
            t /= d;
        }
        for e in expo {
            row.push(e.to_string());
        }
        row.push(mf_core::experiments::report::fmt_f64(s.re));
        row.push(mf_core::experiments::report::fmt_f64(s.im));
        csv.row(&row);
    }
    let mut report = report;
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(RunOutput { report, csv: vec![(format!("spectrum_{label}.csv"), csv.finish())] })
}

fn emit(cli: &Cli, out: RunOutput) -> Result<bool, Box<dyn std::error::Error>> {
    std::fs::create_dir_all(&cli.out)?;
    if matches!(cli.format, Format::Csv | Format::Both) {
        for (name, text) in &out.csv {
            std::fs::write(cli.out.join(name), text)?;
        }
    }
    // the JSON report is always written; it carries the pass/fail data
    let name = format!("report_{}.json", out.report.experiment);
    std::fs::write(cli.out.join(name), out.report.to_json())?;
    for m in &out.report.measurements {
        let status = match m.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "info",
        };
        println!("[{status}] {}: {:.6e}", m.name, m.value);
    }
    let ok = out.report.all_passed();
    println!(
        "{}: {} ({:.2}s)",
        out.report.experiment,
        if ok { "all criteria passed" } else { "FAILURES present" },
        out.report.wall_seconds
    );
    Ok(ok)
}
