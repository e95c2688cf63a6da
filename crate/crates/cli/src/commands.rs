use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::thread;

use serde::Serialize;
use serde_json::{json, Value};

use qmarkov::io::{matrix_to_csv, parse_matrix, write_trajectory, MatrixDocument, MatrixKind, FORMAT_VERSION};
use qmarkov::markov::{simulate_chain, stationary, Distribution, Label, RngState, StochasticMatrix, Trajectory, RNG_ALGORITHM};
use qmarkov::qubit::{qubit_transition_matrix, simulate_register, QubitChainSpec};
use qmarkov::spin::{coin_toss_stream, simulate_measurements, spin_transition_matrix, QuantumState, SpinChainSpec};
use qmarkov::stats::{bit_summary, compare_rows, empirical_matrix, transition_counts, EmpiricalMatrix, RowComparison, TransitionCounts};
use qmarkov::verify::{self, Perturbation};
use qmarkov::{Error, HalfInt};

use crate::args::{Beta, Format, Kind, SimulateArgs, Source, StationaryArgs, VerifyArgs};
use crate::config::RunConfig;
use crate::CliError;

/// Rendered result plus the exit status it should produce.
pub struct Outcome {
    pub body: String,
    pub code: u8,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, code: 0 }
    }
}

pub fn spin_matrix(s: HalfInt, beta: Beta, seed: u64, format: Format) -> Result<Outcome, CliError> {
    let mut config = RunConfig::new("spin-matrix", seed, format);
    config.s = Some(s);
    config.beta = Some(beta.radians());
    config.beta_pi = beta.beta_pi;
    let spec = SpinChainSpec::new(s, beta.radians())?;
    let matrix = spin_transition_matrix(&spec)?;
    let mut doc = MatrixDocument::new(MatrixKind::Spin, &matrix);
    doc.s = Some(s);
    doc.beta = Some(spec.beta);
    Ok(Outcome::ok(render_matrix(doc, &matrix, &config, format)))
}

pub fn qubit_matrix(n: u32, beta: Beta, seed: u64, format: Format) -> Result<Outcome, CliError> {
    let mut config = RunConfig::new("qubit-matrix", seed, format);
    config.n = Some(n);
    config.beta = Some(beta.radians());
    config.beta_pi = beta.beta_pi;
    let spec = QubitChainSpec::new(n, beta.radians())?;
    let matrix = qubit_transition_matrix(&spec)?;
    let mut doc = MatrixDocument::new(MatrixKind::Qubit, &matrix);
    doc.n = Some(n);
    doc.beta = Some(spec.beta);
    Ok(Outcome::ok(render_matrix(doc, &matrix, &config, format)))
}

fn render_matrix(mut doc: MatrixDocument, matrix: &StochasticMatrix, config: &RunConfig, format: Format) -> String {
    match format {
        Format::Json => {
            if let Value::Object(map) = config.to_value() {
                doc.params = map;
            }
            let mut text = doc.to_json();
            text.push('\n');
            text
        }
        Format::Csv => config.comment() + &matrix_to_csv(matrix),
        Format::Table => {
            let mut out = config.comment();
            let width = 14;
            let _ = write!(out, "{:>8}", "from\\to");
            for l in matrix.labels() {
                let _ = write!(out, "{:>width$}", l.to_string());
            }
            out.push('\n');
            for (l, row) in matrix.labels().iter().zip(matrix.rows()) {
                let _ = write!(out, "{:>8}", l.to_string());
                for v in row {
                    let _ = write!(out, "{v:>width$.10}");
                }
                out.push('\n');
            }
            out
        }
    }
}

/// A chain resolved from the command line, with its analytic matrix.
enum Chain {
    Spin(SpinChainSpec),
    Qubit(QubitChainSpec),
    File(StochasticMatrix),
}

impl Chain {
    fn resolve(source: &Source) -> Result<Self, CliError> {
        let need_beta = || source.beta().ok_or_else(|| CliError::Usage("--beta or --beta-pi is required".into()));
        match source.kind {
            Kind::Spin => {
                let s = source.s.ok_or_else(|| CliError::Usage("--s is required".into()))?;
                Ok(Chain::Spin(SpinChainSpec::new(s, need_beta()?)?))
            }
            Kind::Qubit => {
                let n = source.n.ok_or_else(|| CliError::Usage("--n is required".into()))?;
                Ok(Chain::Qubit(QubitChainSpec::new(n, need_beta()?)?))
            }
            Kind::MatrixFile => {
                let path = source.file.as_ref().ok_or_else(|| CliError::Usage("--file is required".into()))?;
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let matrix = parse_matrix(&text).map_err(|e| CliError::Input { path: path.clone(), source: e })?;
                Ok(Chain::File(matrix))
            }
        }
    }

    fn matrix(&self) -> Result<StochasticMatrix, CliError> {
        Ok(match self {
            Chain::Spin(spec) => spin_transition_matrix(spec)?,
            Chain::Qubit(spec) => qubit_transition_matrix(spec)?,
            Chain::File(m) => m.clone(),
        })
    }

    fn run(&self, theory: &StochasticMatrix, initial: usize, steps: usize, rng: &mut RngState) -> Result<Trajectory, Error> {
        match self {
            Chain::Spin(spec) => {
                let m = spec.s.projections().nth(initial).expect("initial index is in range");
                let psi = QuantumState::basis(spec.s, m)?;
                Ok(simulate_measurements(spec, &psi, steps, rng)?.0)
            }
            Chain::Qubit(spec) => {
                let j = spec.outcomes().nth(initial).expect("initial index is in range");
                simulate_register(spec, j, steps, rng)
            }
            Chain::File(matrix) => {
                let start = Distribution::point_mass(theory.labels().to_vec(), initial)?;
                simulate_chain(matrix, &start, steps, rng)
            }
        }
    }
}

#[derive(Serialize)]
struct TrajectorySummary {
    stream: u64,
    steps: usize,
    initial: Label,
    #[serde(rename = "final")]
    last: Label,
    empirical: EmpiricalMatrix,
    rows: Vec<RowComparison>,
    max_tv: f64,
    pass: bool,
}

#[derive(Serialize)]
struct PooledSummary {
    empirical: EmpiricalMatrix,
    rows: Vec<RowComparison>,
    max_tv: f64,
    pass: bool,
}

fn summarize_counts(counts: &TransitionCounts, theory: &StochasticMatrix, tv_limit: f64) -> Result<(EmpiricalMatrix, Vec<RowComparison>, f64, bool), Error> {
    let rows = compare_rows(counts, theory, tv_limit)?;
    let max_tv = rows.iter().map(|r| r.tv).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.pass);
    Ok((empirical_matrix(counts), rows, max_tv, pass))
}

pub fn simulate(args: &SimulateArgs, seed: u64, format: Format) -> Result<Outcome, CliError> {
    let mut config = RunConfig::new("simulate", seed, format).with_source(&args.source);
    config.steps = Some(args.steps);
    config.trajectories = Some(args.trajectories);
    config.tv_limit = Some(args.tv_limit);

    let chain = Chain::resolve(&args.source)?;
    let theory = chain.matrix()?;
    let initial = match &args.initial {
        None => 0,
        Some(text) => theory
            .position(&Label::parse(text))
            .ok_or_else(|| CliError::Usage(format!("initial outcome `{text}` is not one of the chain's labels")))?,
    };
    config.initial = Some(theory.labels()[initial].to_string());

    let k = args.trajectories;
    let trajectories: Vec<Trajectory> = if k == 1 {
        vec![chain.run(&theory, initial, args.steps, &mut RngState::stream(seed, 0))?]
    } else {
        let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(k as usize) as u64;
        let mut slots: Vec<Option<Result<Trajectory, Error>>> = (0..k).map(|_| None).collect();
        thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let (chain, theory) = (&chain, &theory);
                    scope.spawn(move || {
                        (w..k)
                            .step_by(workers as usize)
                            .map(|i| (i, chain.run(theory, initial, args.steps, &mut RngState::stream(seed, i))))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, t) in h.join().expect("simulation threads do not panic") {
                    slots[i as usize] = Some(t);
                }
            }
        });
        slots.into_iter().map(|t| t.expect("every stream is simulated")).collect::<Result<_, _>>()?
    };

    if let Some(path) = &args.trajectory {
        for (i, t) in trajectories.iter().enumerate() {
            let target = if k == 1 { path.clone() } else { suffixed(path, i) };
            let file = File::create(&target).map_err(|e| CliError::io(&target, e))?;
            write_trajectory(BufWriter::new(file), t, Some(config.to_value())).map_err(|e| CliError::io(&target, e))?;
        }
    }

    let mut summaries = Vec::with_capacity(trajectories.len());
    let mut pooled = TransitionCounts::empty(theory.labels().to_vec());
    for t in &trajectories {
        let counts = transition_counts(t);
        pooled.merge(&counts)?;
        let (empirical, rows, max_tv, pass) = summarize_counts(&counts, &theory, args.tv_limit)?;
        summaries.push(TrajectorySummary {
            stream: t.stream,
            steps: t.steps(),
            initial: t.outcome(0).clone(),
            last: t.outcome(t.steps()).clone(),
            empirical,
            rows,
            max_tv,
            pass,
        });
    }
    let pooled = if k > 1 {
        let (empirical, rows, max_tv, pass) = summarize_counts(&pooled, &theory, args.tv_limit)?;
        Some(PooledSummary { empirical, rows, max_tv, pass })
    } else {
        None
    };

    let body = match format {
        Format::Json => {
            let doc = json!({
                "config": config,
                "theory": { "labels": theory.labels(), "rows": theory.rows() },
                "trajectories": summaries,
                "pooled": pooled,
                "rng": RNG_ALGORITHM,
                "version": FORMAT_VERSION,
            });
            to_json_line(&doc)
        }
        Format::Csv => {
            let mut out = config.comment();
            out.push_str("stream,from,visits,tv,chi_square,dof,critical_999,pass\n");
            for s in &summaries {
                for r in &s.rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        s.stream,
                        r.label,
                        r.visits,
                        r.tv,
                        opt(r.chi_square),
                        opt(r.dof),
                        opt(r.critical_999),
                        r.pass
                    );
                }
            }
            out
        }
        Format::Table => {
            let mut out = config.comment();
            for s in &summaries {
                let _ = writeln!(out, "stream {}: {} steps, max TV {:.6}, {}", s.stream, s.steps, s.max_tv, verdict(s.pass));
                let _ = writeln!(out, "{:>8} {:>10} {:>10} {:>12} {:>5} {:>10}", "from", "visits", "tv", "chi2", "dof", "result");
                for r in &s.rows {
                    let _ = writeln!(
                        out,
                        "{:>8} {:>10} {:>10.6} {:>12} {:>5} {:>10}",
                        r.label.to_string(),
                        r.visits,
                        r.tv,
                        r.chi_square.map_or("-".into(), |c| format!("{c:.4}")),
                        opt(r.dof),
                        verdict(r.pass)
                    );
                }
            }
            if let Some(p) = &pooled {
                let _ = writeln!(out, "pooled: max TV {:.6}, {}", p.max_tv, verdict(p.pass));
            }
            out
        }
    };
    Ok(Outcome::ok(body))
}

fn suffixed(path: &Path, index: usize) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(format!(".{index}"));
    PathBuf::from(name)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string(value).expect("outputs always serialize");
    text.push('\n');
    text
}

fn parse_perturbation(text: &str) -> Result<Perturbation, CliError> {
    let bad = || CliError::Usage(format!("--perturb expects N:J:J'=DELTA[@BETA], got `{text}`"));
    let (site, change) = text.split_once('=').ok_or_else(bad)?;
    let (delta, beta) = match change.split_once('@') {
        Some((d, b)) => (d, Some(b.parse::<f64>().map_err(|_| bad())?)),
        None => (change, None),
    };
    let mut parts = site.split(':');
    let (Some(n), Some(j), Some(jp), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(bad());
    };
    Ok(Perturbation {
        n: n.parse().map_err(|_| bad())?,
        j: j.parse().map_err(|_| bad())?,
        j_prime: jp.parse().map_err(|_| bad())?,
        delta: delta.parse().map_err(|_| bad())?,
        beta,
    })
}

pub fn verify(args: &VerifyArgs, seed: u64, format: Format) -> Result<Outcome, CliError> {
    let betas = if args.betas.is_empty() { verify::DEFAULT_BETAS.to_vec() } else { args.betas.clone() };
    let mut config = RunConfig::new("verify", seed, format);
    config.n_max = Some(args.n_max);
    config.betas = Some(betas.clone());
    config.perturb = args.perturb.clone();
    let perturbation = args.perturb.as_deref().map(parse_perturbation).transpose()?;
    let report = verify::sweep(args.n_max, &betas, perturbation.as_ref())?;
    let code = if report.passed() { 0 } else { 4 };

    let body = match format {
        Format::Json => to_json_line(&json!({
            "config": config,
            "passed": report.passed(),
            "report": report,
            "version": FORMAT_VERSION,
        })),
        Format::Csv => {
            let mut out = config.comment();
            out.push_str("check,n,beta,j,j_prime,value,reference,difference,tolerance\n");
            for f in &report.failures {
                let check = serde_json::to_value(f.check).expect("checks serialize");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    check.as_str().unwrap_or_default(),
                    f.n,
                    f.beta,
                    opt(f.j),
                    opt(f.j_prime),
                    f.value,
                    f.reference,
                    f.difference,
                    f.tolerance
                );
            }
            out
        }
        Format::Table => {
            let mut out = config.comment();
            let _ = writeln!(
                out,
                "{} entries over N = 1..{} and {} angles: {}",
                report.entries_checked,
                report.n_max,
                report.betas.len(),
                verdict(report.passed())
            );
            let _ = writeln!(out, "max |formula - enumeration| = {:.3e}", report.max_formula_difference);
            let _ = writeln!(out, "max branch disagreement      = {:.3e}", report.max_branch_difference);
            let _ = writeln!(out, "max |row sum - 1|            = {:.3e}", report.max_row_sum_error);
            for f in &report.failures {
                let _ = writeln!(
                    out,
                    "FAIL {:?} N={} beta={} j={} j'={}: {} vs {} (diff {:.3e})",
                    f.check,
                    f.n,
                    f.beta,
                    opt(f.j),
                    opt(f.j_prime),
                    f.value,
                    f.reference,
                    f.difference
                );
            }
            out
        }
    };
    Ok(Outcome { body, code })
}

pub fn stationary_distribution(args: &StationaryArgs, seed: u64, format: Format) -> Result<Outcome, CliError> {
    let mut config = RunConfig::new("stationary", seed, format).with_source(&args.source);
    config.tol = Some(args.tol);
    config.max_iters = Some(args.max_iters);
    let matrix = Chain::resolve(&args.source)?.matrix()?;

    let (distribution, iterations, residual, converged) = match stationary(&matrix, args.tol, args.max_iters) {
        Ok(st) => (st.distribution, st.iterations, st.residual, true),
        Err(Error::ConvergenceFailure { iterations, residual, last }) => (*last, iterations, residual, false),
        Err(e) => return Err(e.into()),
    };

    let body = match format {
        Format::Json => to_json_line(&json!({
            "config": config,
            "converged": converged,
            "labels": distribution.labels(),
            "distribution": distribution.probs(),
            "iterations": iterations,
            "residual": residual,
            "version": FORMAT_VERSION,
        })),
        Format::Csv | Format::Table => {
            let mut out = config.comment();
            let _ = writeln!(out, "# converged={converged} iterations={iterations} residual={residual}");
            if format == Format::Csv {
                out.push_str("label,probability\n");
                for (l, p) in distribution.labels().iter().zip(distribution.probs()) {
                    let _ = writeln!(out, "{l},{p}");
                }
            } else {
                for (l, p) in distribution.labels().iter().zip(distribution.probs()) {
                    let _ = writeln!(out, "{:>8} {p:>20.15}", l.to_string());
                }
            }
            out
        }
    };
    if converged {
        Ok(Outcome::ok(body))
    } else {
        eprintln!("qmarkov: no convergence after {iterations} iterations (residual {residual:e})");
        Ok(Outcome { body, code: 3 })
    }
}

pub fn coin_toss(count: usize, seed: u64, format: Format) -> Result<Outcome, CliError> {
    let mut config = RunConfig::new("coin-toss", seed, format);
    config.count = Some(count);
    let bits = coin_toss_stream(count, &mut RngState::stream(seed, 0));
    let summary = bit_summary(&bits).ok();

    let body = match format {
        Format::Json => {
            let text: String = bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
            to_json_line(&json!({
                "config": config,
                "bits": text,
                "summary": summary,
                "rng": RNG_ALGORITHM,
                "version": FORMAT_VERSION,
            }))
        }
        Format::Csv => {
            let mut out = config.comment();
            out.reserve(2 * bits.len() + 4);
            out.push_str("bit\n");
            for &b in &bits {
                out.push(if b == 1 { '1' } else { '0' });
                out.push('\n');
            }
            out
        }
        Format::Table => {
            let mut out = config.comment();
            match summary {
                Some(s) => {
                    let _ = writeln!(out, "{:<22}{}", "bits", s.count);
                    let _ = writeln!(out, "{:<22}{}", "ones", s.ones);
                    let _ = writeln!(out, "{:<22}{:.6}", "mean", s.mean);
                    let _ = writeln!(out, "{:<22}{:.6}", "lag-1 autocorrelation", s.lag1_autocorrelation);
                    let _ = writeln!(out, "{:<22}{:.4} (0.999 critical {:.4})", "chi-square (1 dof)", s.chi_square, s.critical_999);
                }
                None => {
                    let _ = writeln!(out, "{:<22}{count} (too few for statistics)", "bits");
                }
            }
            out
        }
    };
    Ok(Outcome::ok(body))
}
