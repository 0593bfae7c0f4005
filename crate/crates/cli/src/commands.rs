use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hardcore::dynamics::{crossing_time, run_chain, Init};
use hardcore::enumerate::{barrier_measures, conductance_lower_bound, exact_spectral_gap, occupancy_profile};
use hardcore::exponents::{
    find_stationary_points, phi1, phi1_gradient, phi1_hessian, verify_appendix_polynomials, DensityPoint,
};
use hardcore::graphgen::{sample_graph, BipartiteMultigraph};
use hardcore::moments::{conditioning_summary, moment_point, tau, tau_by_quadrature};
use hardcore::treegibbs::semi_invariant_fixed_points;

use crate::config::ExperimentConfig;
use crate::experiment::run_experiment;

#[derive(Debug, Parser)]
#[command(name = "hardcore", version, about = "Hard-core model on random regular bipartite graphs")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file, or directory for `experiment`. Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph from RG(n, d) in the text format.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Tree fixed points over a λ grid.
    Tree {
        #[arg(long)]
        d: u32,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long)]
        lambda_grid: String,
    },
    /// First- and second-moment exponents.
    #[command(subcommand)]
    Exponents(ExponentsCmd),
    /// Exact moments, τ and the cycle series.
    #[command(subcommand)]
    Moments(MomentsCmd),
    /// Exact per-graph quantities by enumeration.
    #[command(subcommand)]
    Enumerate(EnumerateCmd),
    /// Glauber dynamics.
    #[command(subcommand)]
    Dynamics(DynamicsCmd),
    /// Run an experiment config into an artifact directory.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExponentsCmd {
    /// Φ₁ with gradient norm and Hessian eigenvalues on a grid over the triangle.
    Phi1Landscape {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        lambda: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 50)]
        grid: usize,
    },
    /// Stationary points of the second-moment exponent at fixed (α, β).
    Stationary {
        #[arg(long)]
        d: u32,
        /// Defaults to 1/d.
        #[arg(long)]
        alpha: Option<f64>,
        /// Defaults to 1/d.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 500)]
        starts: usize,
    },
    /// Sign checks of the polynomials behind the interior maximum.
    VerifyPolys {
        #[arg(long)]
        d: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum MomentsCmd {
    /// E[Z²]/E[Z]² along a list of n, at a = αn, b = βn.
    Ratio {
        #[arg(long)]
        d: u32,
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        /// Defaults to 1/d.
        #[arg(long)]
        alpha: Option<f64>,
        /// Defaults to 1/d.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// τ in closed form, by quadrature and from the cycle series.
    Tau {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Per-length terms λ_i δ_i² of the cycle series.
    Conditioning {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 40)]
        i_max: usize,
    },
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph in the text format (see `gen`).
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub lambda: f64,
}

#[derive(Debug, Subcommand)]
pub enum EnumerateCmd {
    /// Log-weights W[a][b]; rows a, columns b.
    Profile {
        #[command(flatten)]
        g: GraphArgs,
    },
    /// Barrier measures and the conductance bound at threshold t.
    Barrier {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, default_value_t = 0)]
        t: usize,
    },
    /// Exact spectral gap of the Glauber chain.
    Gap {
        #[command(flatten)]
        g: GraphArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Start {
    Empty,
    Left,
    Right,
}

#[derive(Debug, Subcommand)]
pub enum DynamicsCmd {
    /// Magnetization trace of one Glauber chain.
    Run {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        steps: u64,
        #[arg(long, value_enum, default_value_t = Start::Left)]
        init: Start,
        #[arg(long, default_value_t = 1)]
        sample_every: u64,
    },
    /// Steps until the magnetization first reaches 0 from the all-left start.
    Crossing {
        #[command(flatten)]
        g: GraphArgs,
        /// Censoring limit per run.
        #[arg(long)]
        steps: u64,
        #[arg(long, default_value_t = 20)]
        runs: usize,
    },
}

/// What a successful command reports back to the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    ChecksFailed,
}

/// `start:stop:step` (inclusive of `stop` up to rounding) or `a,b,c`.
pub fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parse = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in grid"));
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (parse(start)?, parse(stop)?, parse(step)?);
            if !(h > 0.0) || b < a {
                bail!("grid {spec:?} needs step > 0 and stop >= start");
            }
            let k = ((b - a) / h + 1e-9).floor() as usize;
            (0..=k).map(|i| a + i as f64 * h).collect()
        }
        [_] => spec.split(',').map(parse).collect::<anyhow::Result<Vec<_>>>()?,
        _ => bail!("grid {spec:?} is neither start:stop:step nor a list"),
    };
    if grid.is_empty() {
        bail!("grid {spec:?} is empty");
    }
    Ok(grid)
}

fn emit(out: Option<&Path>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(body.as_bytes()).context("writing to stdout"),
    }
}

fn load_graph(path: &Path) -> anyhow::Result<BipartiteMultigraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(BipartiteMultigraph::from_text(&text)?)
}

fn densities(alpha: Option<f64>, beta: Option<f64>, d: u32) -> (f64, f64) {
    let x = 1.0 / d as f64;
    (alpha.unwrap_or(x), beta.unwrap_or(x))
}

pub fn run(cli: Cli) -> anyhow::Result<Status> {
    if cli.threads == Some(0) {
        bail!("--threads must be positive");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build()?;
    let out = cli.out.as_deref();
    let seed = cli.seed.unwrap_or(0);
    pool.install(|| match cli.command {
        Command::Gen { n, d } => {
            emit(out, &sample_graph(n, d, seed)?.to_text())?;
            Ok(Status::Ok)
        }
        Command::Tree { d, lambda_grid } => {
            let mut csv = String::from("lambda,p_star,p1,p2,is_unique\n");
            for l in parse_grid(&lambda_grid)? {
                let t = semi_invariant_fixed_points(l, d)?;
                let _ = writeln!(csv, "{},{},{},{},{}", l, t.p_star, t.p1, t.p2, t.is_unique);
            }
            emit(out, &csv)?;
            Ok(Status::Ok)
        }
        Command::Exponents(cmd) => exponents(cmd, out),
        Command::Moments(cmd) => moments(cmd, out),
        Command::Enumerate(cmd) => enumerate(cmd, out),
        Command::Dynamics(cmd) => dynamics(cmd, out, seed),
        Command::Experiment { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = cli.seed {
                cfg.seed = Some(s);
            }
            let outcome = run_experiment(&cfg, out, cli.threads)?;
            for c in &outcome.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("wrote {} files to {}", outcome.files.len() + 1, outcome.dir.display());
            Ok(if outcome.all_passed() { Status::Ok } else { Status::ChecksFailed })
        }
    })
}

fn exponents(cmd: ExponentsCmd, out: Option<&Path>) -> anyhow::Result<Status> {
    match cmd {
        ExponentsCmd::Phi1Landscape { d, lambda, grid } => {
            if grid < 2 {
                bail!("--grid must be at least 2");
            }
            let mut csv = String::from("alpha,beta,value,grad_norm,eig1,eig2\n");
            let h = 1.0 / grid as f64;
            for i in 0..grid {
                for j in 0..grid - i - 1 {
                    let p = DensityPoint::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)?;
                    let g = phi1_gradient(&p, lambda, d);
                    let hs = phi1_hessian(&p, d);
                    let m = 0.5 * (hs[0][0] + hs[1][1]);
                    let r = (0.25 * (hs[0][0] - hs[1][1]).powi(2) + hs[0][1] * hs[0][1]).sqrt();
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{}",
                        p.alpha,
                        p.beta,
                        phi1(&p, lambda, d),
                        g[0].hypot(g[1]),
                        m - r,
                        m + r
                    );
                }
            }
            emit(out, &csv)?;
            Ok(Status::Ok)
        }
        ExponentsCmd::Stationary { d, alpha, beta, lambda, starts } => {
            let (a, b) = densities(alpha, beta, d);
            let r = find_stationary_points(&DensityPoint::new(a, b)?, lambda, d, starts)?;
            let mut csv = String::from("gamma,delta,epsilon,value,grad_norm,eig1,eig2,eig3,is_max,hits\n");
            for c in &r.clusters {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{},{}",
                    c.point.gamma,
                    c.point.delta,
                    c.point.epsilon,
                    c.value,
                    c.gradient_norm,
                    c.eigenvalues[0],
                    c.eigenvalues[1],
                    c.eigenvalues[2],
                    c.is_max,
                    c.hits
                );
            }
            emit(out, &csv)?;
            eprintln!(
                "{} clusters from {} starts ({} failed); unique maximum in region: {}",
                r.clusters.len(),
                r.n_starts,
                r.failed_starts,
                r.unique_in_region
            );
            Ok(Status::Ok)
        }
        ExponentsCmd::VerifyPolys { d } => {
            let r = verify_appendix_polynomials(d);
            let mut csv = String::from("kind,name,lo,hi,claim,grid_min,grid_max,certified,holds,expected\n");
            for c in &r.checks {
                let _ = writeln!(
                    csv,
                    "sign,{},{},{},{:?},{},{},{},{},true",
                    c.name, c.interval.0, c.interval.1, c.claim, c.grid_min, c.grid_max, c.certified, c.holds
                );
            }
            for i in &r.identities {
                let _ = writeln!(csv, "identity,{},,,,{},,,{},{}", i.name, i.max_residual, i.holds, i.expected);
            }
            emit(out, &csv)?;
            Ok(if r.all_as_expected() { Status::Ok } else { Status::ChecksFailed })
        }
    }
}

fn moments(cmd: MomentsCmd, out: Option<&Path>) -> anyhow::Result<Status> {
    let csv = match cmd {
        MomentsCmd::Ratio { d, n_list, alpha, beta, lambda } => {
            if n_list.is_empty() {
                bail!("--n-list is empty");
            }
            let (al, be) = densities(alpha, beta, d);
            let t = tau(al, be, d)?;
            let mut csv = String::from("n,a,b,log_ez,log_ez2,ratio,tau,abs_err\n");
            for n in n_list {
                let (a, b) = ((al * n as f64).round() as usize, (be * n as f64).round() as usize);
                let p = moment_point(n, a, b, lambda, d)?;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    n,
                    a,
                    b,
                    p.log_ez,
                    p.log_ez2,
                    p.ratio,
                    t,
                    (p.ratio - t).abs()
                );
            }
            csv
        }
        MomentsCmd::Tau { d, alpha, beta } => {
            let (a, b) = densities(alpha, beta, d);
            let q = tau_by_quadrature(a, b, d)?;
            let s = conditioning_summary(a, b, d, 40)?;
            format!(
                "alpha,beta,d,closed_form,two_d,three_d,series_40,max_pairwise_diff\n{a},{b},{d},{},{},{},{},{}\n",
                q.closed_form,
                q.two_d,
                q.three_d,
                s.partial_sum.exp(),
                q.max_pairwise_diff
            )
        }
        MomentsCmd::Conditioning { d, alpha, beta, i_max } => {
            let (a, b) = densities(alpha, beta, d);
            let s = conditioning_summary(a, b, d, i_max)?;
            let mut csv = String::from("i,lambda_i,delta_i,term,partial_sum\n");
            let mut partial = 0.0;
            for ((i, l), dl) in s.lengths.iter().zip(&s.lambdas).zip(&s.deltas) {
                partial += l * dl * dl;
                let _ = writeln!(csv, "{i},{l},{dl},{},{partial}", l * dl * dl);
            }
            csv
        }
    };
    emit(out, &csv)?;
    Ok(Status::Ok)
}

fn enumerate(cmd: EnumerateCmd, out: Option<&Path>) -> anyhow::Result<Status> {
    match cmd {
        EnumerateCmd::Profile { g } => {
            emit(out, &occupancy_profile(&load_graph(&g.graph)?, g.lambda)?.to_csv())?;
            Ok(Status::Ok)
        }
        EnumerateCmd::Barrier { g, t } => {
            let graph = load_graph(&g.graph)?;
            let m = barrier_measures(&graph, g.lambda, t)?;
            let c = conductance_lower_bound(&graph, g.lambda, t)?;
            emit(
                out,
                &format!(
                    "t,mu_i1,mu_i2,mu_ib,bottleneck_ratio,lobe,mu_a,bound,applicable,lobe_only_bound\n\
                     {},{},{},{},{},{},{},{},{},{}\n",
                    m.t,
                    m.mu_i1,
                    m.mu_i2,
                    m.mu_ib,
                    m.bottleneck_ratio,
                    c.lobe,
                    c.mu_a,
                    c.bound,
                    c.applicable,
                    c.lobe_only_bound
                ),
            )?;
            Ok(Status::Ok)
        }
        EnumerateCmd::Gap { g } => {
            let s = exact_spectral_gap(&load_graph(&g.graph)?, g.lambda)?;
            emit(
                out,
                &format!(
                    "n_states,gap,second_eigenvalue_modulus,detailed_balance_residual\n{},{},{},{}\n",
                    s.n_states, s.gap, s.second_eigenvalue_modulus, s.detailed_balance_residual
                ),
            )?;
            Ok(if s.detailed_balance_residual <= 1e-12 { Status::Ok } else { Status::ChecksFailed })
        }
    }
}

fn dynamics(cmd: DynamicsCmd, out: Option<&Path>, seed: u64) -> anyhow::Result<Status> {
    match cmd {
        DynamicsCmd::Run { g, steps, init, sample_every } => {
            let graph = load_graph(&g.graph)?;
            let init = match init {
                Start::Empty => Init::Empty,
                Start::Left => Init::FillLeft,
                Start::Right => Init::FillRight,
            };
            emit(out, &run_chain(&graph, g.lambda, steps, init, sample_every, seed)?.to_csv())?;
        }
        DynamicsCmd::Crossing { g, steps, runs } => {
            let graph = load_graph(&g.graph)?;
            let c = crossing_time(&graph, g.lambda, steps, runs, seed)?;
            let mut csv = String::from("run,steps,censored\n");
            for (r, t) in c.times.iter().enumerate() {
                let _ = writeln!(csv, "{r},{},{}", t.unwrap_or(c.max_steps), t.is_none());
            }
            emit(out, &csv)?;
            eprintln!("median {} steps, {} of {} runs censored at {}", c.median, c.censored, runs, c.max_steps);
        }
    }
    Ok(Status::Ok)
}
