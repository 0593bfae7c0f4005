//! Running a configured experiment into an artifact directory.
//!
//! The directory holds the CSVs, `summary.md` with one PASS/FAIL line per
//! check, and `manifest.json` listing the config, crate version, seed and a
//! SHA-256 for every other file. Nothing depends on wall time or thread
//! count, so a rerun reproduces every file byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use hardcore::enumerate::{barrier_from_profile, occupancy_counts, BarrierMeasures, OccupancyProfile};
use hardcore::graphgen::sample_graph_indexed;
use hardcore::moments::{conditioning_summary, moment_point, size_biased_cycle_check, tau};
use hardcore::treegibbs::{lambda_c, semi_invariant_fixed_points, symmetric_fixed_point};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{validate_config, ExperimentConfig, ExperimentKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    name: &'a str,
    kind: ExperimentKind,
    crate_version: &'static str,
    seed: Option<u64>,
    /// The config with the output directory and thread count removed.
    config: ExperimentConfig,
    checks: &'a [Check],
    files: &'a [FileEntry],
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub dir: PathBuf,
    pub checks: Vec<Check>,
    pub files: Vec<FileEntry>,
}

impl ExperimentOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// CSV tables plus checks produced by one experiment kind.
struct Produced {
    tables: Vec<(&'static str, String)>,
    checks: Vec<Check>,
}

/// Validate, run and write. `out` overrides `cfg.out`; `threads` overrides
/// `cfg.threads`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    threads: Option<usize>,
) -> anyhow::Result<ExperimentOutcome> {
    let violations = validate_config(cfg);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        bail!("invalid config:\n  {}", list.join("\n  "));
    }
    let dir = out.map(Path::to_path_buf).or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from(&cfg.name));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.or(cfg.threads).unwrap_or(0)).build()?;
    let produced = pool.install(|| match cfg.kind {
        ExperimentKind::PhaseDiagram => phase_diagram(cfg),
        ExperimentKind::RatioConvergence => ratio_convergence(cfg),
        ExperimentKind::BottleneckTrend => bottleneck_trend(cfg),
        ExperimentKind::Conditioning => conditioning(cfg),
    })?;

    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    let mut write = |name: &str, body: &str| -> anyhow::Result<()> {
        fs::write(dir.join(name), body).with_context(|| format!("writing {name}"))?;
        files.push(FileEntry { path: name.to_string(), sha256: hex::encode(Sha256::digest(body)), bytes: body.len() });
        Ok(())
    };
    for (name, body) in &produced.tables {
        write(name, body)?;
    }
    write("summary.md", &summary(cfg, &produced))?;

    let mut recorded = cfg.clone();
    recorded.out = None;
    recorded.threads = None;
    let manifest = Manifest {
        name: &cfg.name,
        kind: cfg.kind,
        crate_version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: recorded,
        checks: &produced.checks,
        files: &files,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(ExperimentOutcome { dir, checks: produced.checks, files })
}

fn summary(cfg: &ExperimentConfig, p: &Produced) -> String {
    let mut s = format!("# {}\n\nkind: {:?}, d = {}, seed = {:?}\n\n", cfg.name, cfg.kind, cfg.d, cfg.seed);
    for c in &p.checks {
        let _ = writeln!(s, "- {} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = p.checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(s, "\n{} checks, {failed} failed", p.checks.len());
    s.push_str("\nfiles:\n");
    for (name, _) in &p.tables {
        let _ = writeln!(s, "- {name}");
    }
    s
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len();
    if m % 2 == 1 {
        xs[m / 2]
    } else {
        0.5 * (xs[m / 2 - 1] + xs[m / 2])
    }
}

fn phase_diagram(cfg: &ExperimentConfig) -> anyhow::Result<Produced> {
    let d = cfg.d;
    let lc = lambda_c(d)?;
    let rows = cfg.lambda.par_iter().map(|&l| semi_invariant_fixed_points(l, d)).collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("lambda,lambda_c,p_star,p1,p2,is_unique\n");
    let (mut regime_ok, mut order_ok) = (true, true);
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{},{},{}", r.lambda, lc, r.p_star, r.p1, r.p2, r.is_unique);
        if (r.lambda - lc).abs() > 1e-6 * lc && r.is_unique != (r.lambda < lc) {
            regime_ok = false;
        }
        if !r.is_unique && !(r.p1 < r.p_star && r.p_star < r.p2) {
            order_ok = false;
        }
    }
    let at_critical = symmetric_fixed_point(lc, d)?;
    let checks = vec![
        Check::new("p1 = p2 exactly below lambda_c", regime_ok, format!("lambda_c = {lc}")),
        Check::new("p1 < p* < p2 above lambda_c", order_ok, format!("{} grid points", rows.len())),
        Check::new(
            "p* = 1/d at lambda_c",
            (at_critical - 1.0 / d as f64).abs() <= 1e-8,
            format!("p*(lambda_c) = {at_critical}"),
        ),
    ];
    Ok(Produced { tables: vec![("phase_diagram.csv", csv)], checks })
}

fn ratio_convergence(cfg: &ExperimentConfig) -> anyhow::Result<Produced> {
    let d = cfg.d;
    let lambda = cfg.lambda.first().copied().unwrap_or(1.0);
    let mut ns = cfg.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let third = 1.0 / d as f64;
    let t = tau(third, third, d)?;
    let points = ns
        .iter()
        .map(|&n| moment_point(n, n / d as usize, n / d as usize, lambda, d))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("n,a,b,log_ez,log_ez2,ratio,tau,abs_err\n");
    let mut errs = Vec::new();
    for p in &points {
        let err = (p.ratio - t).abs();
        errs.push(err);
        let _ = writeln!(csv, "{},{},{},{},{},{},{},{}", p.n, p.a, p.b, p.log_ez, p.log_ez2, p.ratio, t, err);
    }
    let (first, last) = (errs[0], errs[errs.len() - 1]);
    let checks = vec![
        Check::new("abs_err strictly decreasing in n", strictly_decreasing(&errs), format!("{errs:?}")),
        Check::new(
            "abs_err at largest n below a quarter of the smallest",
            last < 0.25 * first,
            format!("{last} vs {first}"),
        ),
    ];
    Ok(Produced { tables: vec![("ratio_convergence.csv", csv)], checks })
}

fn bottleneck_trend(cfg: &ExperimentConfig) -> anyhow::Result<Produced> {
    let d = cfg.d;
    let seed = cfg.seed.expect("validated");
    let lc = lambda_c(d)?;
    let mut ns = cfg.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut per_graph = String::from("n,graph,lambda,t,mu_i1,mu_i2,mu_ib,bottleneck_ratio\n");
    let mut trend = String::from("n,lambda,t,median_bottleneck_ratio,median_mu_ib\n");
    // medians[(lambda index, t index)][n index]
    let mut medians = vec![vec![Vec::new(); cfg.t.len()]; cfg.lambda.len()];
    for &n in &ns {
        let counts = (0..cfg.samples as u64)
            .into_par_iter()
            .map(|k| occupancy_counts(&sample_graph_indexed(n, d as usize, seed, k)?))
            .collect::<Result<Vec<_>, _>>()?;
        for (li, &lambda) in cfg.lambda.iter().enumerate() {
            for (ti, &t) in cfg.t.iter().enumerate() {
                let measures: Vec<BarrierMeasures> = counts
                    .iter()
                    .map(|c| barrier_from_profile(&OccupancyProfile { n, lambda, counts: c.clone() }, t))
                    .collect();
                for (k, m) in measures.iter().enumerate() {
                    let _ = writeln!(
                        per_graph,
                        "{n},{k},{lambda},{t},{},{},{},{}",
                        m.mu_i1, m.mu_i2, m.mu_ib, m.bottleneck_ratio
                    );
                }
                let mr = median(&mut measures.iter().map(|m| m.bottleneck_ratio).collect::<Vec<_>>());
                let mb = median(&mut measures.iter().map(|m| m.mu_ib).collect::<Vec<_>>());
                let _ = writeln!(trend, "{n},{lambda},{t},{mr},{mb}");
                medians[li][ti].push(mr);
            }
        }
    }
    let mut checks = Vec::new();
    for (li, &lambda) in cfg.lambda.iter().enumerate() {
        for (ti, &t) in cfg.t.iter().enumerate() {
            let m = &medians[li][ti];
            let dec = strictly_decreasing(m);
            let detail = format!("medians {m:?}");
            if lambda > lc {
                checks.push(Check::new(format!("median ratio decreases with n (lambda={lambda}, t={t})"), dec, detail));
            } else {
                checks.push(Check::new(
                    format!("no monotone decrease below lambda_c (lambda={lambda}, t={t})"),
                    !dec,
                    detail,
                ));
            }
        }
    }
    Ok(Produced { tables: vec![("bottleneck_trend.csv", trend), ("bottleneck_graphs.csv", per_graph)], checks })
}

fn conditioning(cfg: &ExperimentConfig) -> anyhow::Result<Produced> {
    let d = cfg.d;
    let x = 1.0 / d as f64;
    let s = conditioning_summary(x, x, d, cfg.i_max)?;
    let mut series = String::from("i,lambda_i,delta_i,term,partial_sum\n");
    let mut partial = 0.0;
    for ((i, l), dl) in s.lengths.iter().zip(&s.lambdas).zip(&s.deltas) {
        let term = l * dl * dl;
        partial += term;
        let _ = writeln!(series, "{i},{l},{dl},{term},{partial}");
    }
    let mut checks = vec![
        Check::new(
            "truncated series matches closed form",
            (s.partial_sum - s.closed_form_sum).abs() <= 1e-6,
            format!("partial {} vs closed {}", s.partial_sum, s.closed_form_sum),
        ),
        Check::new(
            "exp(series) equals tau",
            (s.closed_form_sum.exp() - s.tau_closed_form).abs() <= 1e-10,
            format!("tau = {}", s.tau_closed_form),
        ),
    ];
    let mut tables = vec![("conditioning_series.csv", series)];
    if cfg.samples > 0 {
        let seed = cfg.seed.expect("validated");
        let mut csv = String::from("n,a,b,lengths,estimate,standard_error,target,z_score\n");
        for &n in &cfg.n {
            let a = n / d as usize;
            let r = size_biased_cycle_check(n, a, a, &[2, 4], d, cfg.samples, seed)?;
            for e in &r.estimates {
                let lengths: Vec<String> = e.lengths.iter().map(|i| i.to_string()).collect();
                let _ = writeln!(
                    csv,
                    "{n},{a},{a},{},{},{},{},{}",
                    lengths.join("x"),
                    e.estimate,
                    e.standard_error,
                    e.target,
                    e.z_score
                );
            }
            // X₄ and the joint moment converge slowly in n; only X₂ is checked.
            let x2 = &r.estimates[0];
            checks.push(Check::new(
                format!("size-biased E[Y X_2]/E[Y] within 4 SE (n={n})"),
                !r.inconclusive && x2.z_score < 4.0,
                format!("{} +- {} vs {}", x2.estimate, x2.standard_error, x2.target),
            ));
        }
        tables.push(("size_biased.csv", csv));
    }
    Ok(Produced { tables, checks })
}
