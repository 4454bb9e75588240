use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spectral_tails::config::{load_potential, load_scenario};
use spectral_tails::counting::n_curve;
use spectral_tails::gauge::{inspect, remainder_decay_fit, second_order_decay_fit, GaugeData, DEFAULT_EPSILON};
use spectral_tails::potentials::{ray_directions, AngularLimit, Potential};
use spectral_tails::scenarios::{exit_code, render_text, run, write_outputs};
use spectral_tails::semiclassical::{log_energy_grid, ncl, NclQuery, DEFAULT_TOLERANCE};
use spectral_tails::sphere::{
    cd_constant, finiteness_predicate, fourier_profile, spectrum_of, sphere_eigs_circle, SphereSpectrum,
    MIN_CIRCLE_CUTOFF,
};
use spectral_tails::{Error, Result};

#[derive(Parser)]
#[command(name = "spectral-tails", version, about = "Eigenvalue counting below the essential spectrum for oscillating, decaying potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write curve.csv, report.txt and report.json.
    Run {
        config: PathBuf,
        /// Output directory (default: runs/<scenario name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Potential utilities.
    Potential {
        #[command(subcommand)]
        command: PotentialCommand,
    },
    /// Gauge-transform utilities.
    Gauge {
        #[command(subcommand)]
        command: GaugeCommand,
    },
    /// Semiclassical counting function as CSV (E, N_cl, error).
    Ncl {
        config: PathBuf,
        #[command(flatten)]
        energies: EnergyArgs,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Sphere spectrum and the log-law constant C_d(L).
    Cd {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// L ≡ c.
        #[arg(long, allow_hyphen_values = true, group = "profile")]
        constant: Option<f64>,
        /// d = 1 only: "L(−1),L(+1)".
        #[arg(long, allow_hyphen_values = true, group = "profile")]
        endpoints: Option<String>,
        /// d = 2 only: "a0;k:a:b;k:a:b…" for a0 + Σ a cos kθ + b sin kθ.
        #[arg(long, allow_hyphen_values = true, group = "profile")]
        fourier: Option<String>,
        /// Fourier cutoff for circle spectra.
        #[arg(long, default_value_t = MIN_CIRCLE_CUTOFF)]
        cutoff: usize,
    },
    /// Converged eigenvalue counts as CSV.
    Count {
        config: PathBuf,
        #[command(flatten)]
        energies: EnergyArgs,
        /// Grid-point cap (applies to the dimension of the config).
        #[arg(long)]
        max_points: Option<usize>,
        /// Wall-clock budget per energy.
        #[arg(long)]
        max_seconds: Option<f64>,
    },
}

#[derive(Subcommand)]
enum PotentialCommand {
    /// Sample η, W and V = ηW on a uniform grid: CSV x1..xd, eta, W, V.
    Eval {
        config: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        half_width: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
}

#[derive(Subcommand)]
enum GaugeCommand {
    /// φ coefficients, ψ₀, decay budget and residuals as key = value lines.
    Inspect {
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        /// Also write Φ and V_eff sampled along rays to this CSV.
        #[arg(long)]
        rays: Option<PathBuf>,
        /// Skip the far-field remainder decay fits.
        #[arg(long)]
        no_decay: bool,
    },
}

#[derive(Args)]
struct EnergyArgs {
    /// Comma-separated energies, e.g. "-0.1,-0.01".
    #[arg(long, allow_hyphen_values = true)]
    energies: Option<String>,
    /// Log-spaced range start (negative).
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long, default_value_t = 10)]
    points: usize,
}

impl EnergyArgs {
    fn values(&self) -> Result<Vec<f64>> {
        if let Some(list) = &self.energies {
            return list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("bad energy {s:?}")))
                })
                .collect();
        }
        match (self.from, self.to) {
            (Some(a), Some(b)) if a < 0.0 && b < 0.0 && self.points >= 2 => {
                Ok(log_energy_grid(a.abs().log10(), b.abs().log10(), self.points))
            }
            _ => Err(Error::InvalidParameter(
                "give --energies or a negative --from/--to range".into(),
            )),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Potential {
            command: PotentialCommand::Eval { config, half_width, points },
        } => cmd_eval(&config, half_width, points).map(|_| 0),
        Command::Gauge {
            command: GaugeCommand::Inspect { config, epsilon, rays, no_decay },
        } => cmd_inspect(&config, epsilon, rays.as_deref(), !no_decay).map(|_| 0),
        Command::Ncl { config, energies, tolerance } => cmd_ncl(&config, &energies.values()?, tolerance).map(|_| 0),
        Command::Cd { dim, constant, endpoints, fourier, cutoff } => {
            cmd_cd(dim, constant, endpoints.as_deref(), fourier.as_deref(), cutoff).map(|_| 0)
        }
        Command::Count { config, energies, max_points, max_seconds } => {
            cmd_count(&config, &energies.values()?, max_points, max_seconds).map(|_| 0)
        }
    }
}

fn cmd_run(config: &Path, out: Option<PathBuf>) -> Result<i32> {
    let (spec, warnings) = load_scenario(config)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let mut report = run(&spec)?;
    report.notes.extend(warnings);
    let dir = out.unwrap_or_else(|| Path::new("runs").join(&spec.name));
    write_outputs(&dir, &mut report)?;
    print!("{}", render_text(&report));
    Ok(exit_code(report.verdict))
}

fn cmd_eval(config: &Path, half_width: f64, points: usize) -> Result<()> {
    let (v, _) = load_potential(config)?;
    let d = v.dim();
    if points < 2 {
        return Err(Error::InvalidParameter("need at least 2 points per axis".into()));
    }
    let total = points.checked_pow(d as u32).filter(|&n| n <= 10_000_000);
    let total = total.ok_or_else(|| Error::Resource("sample grid too large".into()))?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.extend(["eta", "W", "V"].map(String::from));
    w.write_record(&header)?;
    let step = 2.0 * half_width / (points - 1) as f64;
    let mut x = vec![0.0; d];
    for idx in 0..total {
        let mut k = idx;
        for xi in x.iter_mut() {
            *xi = -half_width + step * (k % points) as f64;
            k /= points;
        }
        let eta = v.eta.eval(&x);
        let wv = v.w.eval(&x);
        let mut rec: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
        rec.extend([eta, wv, v.eval(&x)].map(|v| format!("{v:e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_inspect(config: &Path, epsilon: f64, rays: Option<&Path>, decay: bool) -> Result<()> {
    let (v, _) = load_potential(config)?;
    let gauge = GaugeData::new(v.eta.clone(), v.w.clone(), epsilon)?;
    let r = inspect(&gauge)?;
    let mut out = io::stdout().lock();
    writeln!(out, "dim = {}", r.dim)?;
    writeln!(out, "eta_mean = {}", r.eta_mean)?;
    for (i, m) in r.phi_modes.iter().enumerate() {
        writeln!(
            out,
            "phi_mode[{i}] = frequency {:?}, coefficient {} {:+}i",
            m.frequency, m.coefficient.re, m.coefficient.im
        )?;
    }
    writeln!(out, "added_conjugates = {}", r.added_conjugates)?;
    writeln!(out, "psi0 = {}", r.psi_mean)?;
    writeln!(out, "rho = {}", r.budget.rho)?;
    writeln!(out, "rho_star = {}", r.budget.rho_star)?;
    writeln!(out, "rho_double_star = {}", r.budget.rho_double_star)?;
    writeln!(out, "sup_phi = {:e}", r.sup_phi)?;
    writeln!(out, "sup_grad_phi = {:e}", r.sup_grad_phi)?;
    writeln!(out, "sup_hessian_phi = {:e}", r.sup_hessian_phi)?;
    writeln!(out, "poisson_residual_exact = {:e}", r.poisson_residual_exact)?;
    writeln!(out, "poisson_residual_fd = {:e}", r.poisson_residual_fd)?;
    writeln!(out, "identity_residual = {:e}", r.identity_residual)?;
    match r.min_frequency_gap {
        Some(g) => writeln!(out, "min_frequency_gap = {g}")?,
        None => writeln!(out, "min_frequency_gap = none")?,
    }
    writeln!(out, "epsilon = {}", r.epsilon)?;
    if decay && v.w.support_radius().is_none() {
        let fit = if v.eta.mean == 0.0 {
            second_order_decay_fit(&gauge)?
        } else {
            remainder_decay_fit(&gauge)?
        };
        writeln!(out, "remainder_decay_slope = {}", fit.slope)?;
        writeln!(out, "remainder_decay_target = {}", -fit.rho_star)?;
        writeln!(out, "remainder_decay_pass = {}", fit.pass)?;
    }
    if let Some(path) = rays {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["ray", "r", "Phi", "V_eff"])?;
        for (k, dir) in ray_directions(gauge.dim(), 8, 7).iter().enumerate() {
            for i in 0..=400 {
                let r = 0.25 * i as f64;
                let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
                w.write_record([
                    k.to_string(),
                    format!("{r}"),
                    format!("{:e}", gauge.big_phi(&x)),
                    format!("{:e}", gauge.effective_potential(&x)),
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_ncl(config: &Path, energies: &[f64], tol: f64) -> Result<()> {
    let (v, _) = load_potential(config)?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["E", "N_cl", "error"])?;
    for &e in energies {
        let r = ncl(&NclQuery::new(&v, e).with_tolerance(tol))?;
        w.write_record([format!("{e:e}"), format!("{:.10e}", r.value), format!("{:.3e}", r.error)])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_fourier(s: &str) -> Result<(f64, Vec<(u32, f64, f64)>)> {
    let bad = || Error::InvalidParameter(format!("bad Fourier profile {s:?}; expected a0;k:a:b;…"));
    let mut parts = s.split(';');
    let a0: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let mut terms = Vec::new();
    for p in parts.filter(|p| !p.trim().is_empty()) {
        let f: Vec<&str> = p.split(':').collect();
        if f.len() != 3 {
            return Err(bad());
        }
        terms.push((
            f[0].trim().parse().map_err(|_| bad())?,
            f[1].trim().parse().map_err(|_| bad())?,
            f[2].trim().parse().map_err(|_| bad())?,
        ));
    }
    Ok((a0, terms))
}

fn cmd_cd(dim: usize, constant: Option<f64>, endpoints: Option<&str>, fourier: Option<&str>, cutoff: usize) -> Result<()> {
    let spectrum: SphereSpectrum = if let Some(c) = constant {
        spectrum_of(&AngularLimit::constant(dim, c))?
    } else if let Some(s) = endpoints {
        if dim != 1 {
            return Err(Error::InvalidParameter("--endpoints needs --dim 1".into()));
        }
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad endpoints {s:?}"))))
            .collect::<Result<_>>()?;
        if v.len() != 2 {
            return Err(Error::InvalidParameter("--endpoints takes two values".into()));
        }
        spectrum_of(&AngularLimit {
            dim: 1,
            profile: spectral_tails::potentials::AngularProfile::Endpoints { minus: v[0], plus: v[1] },
            verification: Vec::new(),
        })?
    } else if let Some(s) = fourier {
        if dim != 2 {
            return Err(Error::InvalidParameter("--fourier needs --dim 2".into()));
        }
        let (a0, terms) = parse_fourier(s)?;
        sphere_eigs_circle(&fourier_profile(a0, terms), cutoff)?
    } else {
        return Err(Error::InvalidParameter("give one of --constant, --endpoints, --fourier".into()));
    };
    let cd = cd_constant(&spectrum)?;
    let mut out = io::stdout().lock();
    writeln!(out, "dim = {}", spectrum.dim)?;
    writeln!(out, "shift = {}", spectrum.shift())?;
    writeln!(out, "C_d = {cd:.12}")?;
    writeln!(out, "finitely_many = {}", finiteness_predicate(&spectrum))?;
    writeln!(out, "tail_bound = {}", spectrum.tail_bound)?;
    writeln!(out)?;
    writeln!(out, "j,lambda")?;
    for (j, l) in spectrum.eigenvalues.iter().enumerate() {
        writeln!(out, "{},{l:.12e}", j + 1)?;
    }
    Ok(())
}

fn cmd_count(config: &Path, energies: &[f64], max_points: Option<usize>, max_seconds: Option<f64>) -> Result<()> {
    let (v, mut policy) = load_potential(config)?;
    if let Some(n) = max_points {
        policy.caps.max_points_1d = n;
        policy.caps.max_points_2d = n;
    }
    if max_seconds.is_some() {
        policy.max_seconds = max_seconds;
    }
    let results = n_curve(&v, energies, &policy)?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["E", "count_dirichlet", "count_neumann", "R_final", "h_final", "converged"])?;
    for r in results {
        w.write_record([
            format!("{:e}", r.energy),
            r.dirichlet.to_string(),
            r.neumann.to_string(),
            format!("{}", r.half_width),
            format!("{}", r.spacing),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
