use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kstab::invariants::{self, NormReport, DEFAULT_TOL};
use kstab::io::{self, NamedConfig};
use kstab::lab::{self, ProductWitness, SpectrumMode, DEFAULT_POINT_BUDGET};
use kstab::quantize::{ehrhart_fit, weight_spectrum, SubtorusDirections};
use kstab::rational::{fmt_real, QVec, Q};
use kstab::{Error, Result};

/// Toric K-stability invariants with exact rational arithmetic.
#[derive(Parser)]
#[command(name = "kstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(clap::Args)]
struct Opts {
    /// JSON input: one configuration or {"configs": [...]}.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Exponent of the norm or moment.
    #[arg(long, global = true, default_value_t = 2.0)]
    p: f64,
    /// Comma-separated dilation levels.
    #[arg(long, global = true, value_delimiter = ',')]
    k: Vec<u64>,
    /// Torus directions: "full", "none" or a JSON basis matrix such as [[1,0]].
    #[arg(long, global = true, default_value = "full")]
    torus: String,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Projected)]
    mode: Mode,
    /// Absolute tolerance of the infimum-norm descent.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Emit JSON instead of text/CSV.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Ehrhart fit of N_k and the weight sum; F0 and F1.
    Ehrhart,
    /// Weight spectrum CSV at each level in --k.
    Weights,
    /// Donaldson–Futaki invariant.
    Df,
    /// Plain L^p norm of f − mean.
    Norm,
    /// L^p norm orthogonal to the torus Hamiltonians.
    ReducedNorm,
    /// Infimum of twisted norms over the torus.
    InfNorm,
    /// Continuous projection onto torus Hamiltonians and relative DF.
    Project,
    /// Quantized moments against the continuous target (CSV).
    Moments,
    /// Product test configuration detector.
    DetectProduct,
    /// Relative stability scan over all configurations (CSV).
    Scan,
}

#[derive(ValueEnum, Clone, Copy)]
enum Mode {
    Projected,
    Raw,
}

struct Output {
    text: String,
    json: Value,
}

fn q(x: &Q) -> Value {
    Value::String(x.to_string())
}

fn qv(xs: &[Q]) -> Value {
    Value::Array(xs.iter().map(q).collect())
}

fn tuple(xs: &[Q]) -> String {
    format!("({})", xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
}

fn norm_json(r: &NormReport) -> Value {
    json!({
        "kind": r.kind,
        "p": fmt_real(r.p),
        "value": fmt_real(r.value),
        "exact_inner": r.exact_inner.as_ref().map(q),
    })
}

fn norm_text(r: &NormReport) -> String {
    match &r.exact_inner {
        Some(inner) => format!("value = {}, inner = {inner}", fmt_real(r.value)),
        None => format!("value = {}", fmt_real(r.value)),
    }
}

fn torus(spec: &str, dim: usize) -> Result<SubtorusDirections> {
    match spec {
        "full" => Ok(SubtorusDirections::full(dim)),
        "none" => Ok(SubtorusDirections::none(dim)),
        m => SubtorusDirections::new(dim, io::parse_basis(m).map_err(|e| Error::invalid(format!("--torus: {e}")))?),
    }
}

fn integer_p(p: f64) -> Result<u32> {
    if p >= 1.0 && p.fract() == 0.0 && p <= u32::MAX as f64 {
        Ok(p as u32)
    } else {
        Err(Error::invalid(format!("--p must be a positive integer for this command, got {p}")))
    }
}

fn point_budget() -> Result<u64> {
    match std::env::var("KSTAB_POINT_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| Error::invalid(format!("KSTAB_POINT_BUDGET: not an integer: {v}"))),
        Err(_) => Ok(DEFAULT_POINT_BUDGET),
    }
}

fn levels(opts: &Opts) -> Result<&[u64]> {
    if opts.k.is_empty() {
        return Err(Error::invalid("--k is required for this command"));
    }
    if opts.k.contains(&0) {
        return Err(Error::invalid("--k values must be positive"));
    }
    Ok(&opts.k)
}

/// Runs a command on one configuration.
fn run_one(cmd: Command, c: &NamedConfig, opts: &Opts) -> Result<Output> {
    let tc = &c.config;
    let w = || torus(&opts.torus, tc.dim());
    Ok(match cmd {
        Command::Ehrhart => {
            let fit = ehrhart_fit(tc)?;
            let d = tc.denominator_q();
            let w_poly: QVec = fit.w_poly.iter().map(|x| x / &d).collect();
            let (f0, f1) = (&fit.f0 / &d, &fit.f1 / &d);
            let text = format!(
                "period = {}\nN(k) = {}\nw(k) = {}\nF0 = {f0}\nF1 = {f1}\n",
                fit.period,
                tuple(&fit.n_poly),
                tuple(&w_poly)
            );
            let json = json!({"period": fit.period, "n_poly": qv(&fit.n_poly), "w_poly": qv(&w_poly), "f0": q(&f0), "f1": q(&f1)});
            Output { text, json }
        }
        Command::Weights => {
            let mut text = String::new();
            let mut rows = Vec::new();
            for &k in levels(opts)? {
                let spec = weight_spectrum(tc, k)?;
                let csv = io::spectrum_csv(&spec);
                text.push_str(if text.is_empty() { &csv } else { csv.split_once('\n').map_or("", |s| s.1) });
                rows.push(json!({
                    "k": k,
                    "n_k": spec.n_k(),
                    "trace": q(&spec.trace),
                    "points": spec.points,
                    "raw_weights": qv(&spec.raw_weights),
                    "centered_weights": qv(&spec.centered_weights),
                }));
            }
            Output { text, json: json!({"denominator": tc.denominator().to_string(), "spectra": rows}) }
        }
        Command::Df => {
            let df = invariants::df(tc)?;
            Output { text: format!("DF = {df}\n"), json: json!({"df": q(&df)}) }
        }
        Command::Norm => {
            let r = invariants::norm_p(tc, opts.p)?;
            Output { text: format!("norm: {}\n", norm_text(&r)), json: norm_json(&r) }
        }
        Command::ReducedNorm => {
            let r = invariants::reduced_norm(tc, &w()?, opts.p)?;
            Output { text: format!("reduced norm: {}\n", norm_text(&r)), json: norm_json(&r) }
        }
        Command::InfNorm => {
            let w = w()?;
            let (r, l) = invariants::infimum_norm(tc, &w, opts.p, opts.tol)?;
            let reduced = invariants::reduced_norm(tc, &w, opts.p)?;
            let text = format!(
                "infimum norm: {}\nreduced norm: {}\nminimizer: slope = {}, constant = {}\n",
                norm_text(&r),
                norm_text(&reduced),
                tuple(&l.slope),
                l.constant
            );
            let json = json!({
                "infimum": norm_json(&r),
                "reduced": norm_json(&reduced),
                "minimizer": {"slope": qv(&l.slope), "constant": q(&l.constant)},
            });
            Output { text, json }
        }
        Command::Project => {
            let w = w()?;
            let proj = invariants::continuous_projection(tc.function(), tc.polytope(), &w)?;
            let dft = invariants::df_relative(tc, &w)?;
            let text = format!(
                "coefficients = {}\nprojection: slope = {}, constant = {}\nresidual mean square = {}\nDF_T = {dft}\n",
                tuple(&proj.coefficients),
                tuple(&proj.projected.slope),
                proj.projected.constant,
                proj.residual_mean_square
            );
            let json = json!({
                "coefficients": qv(&proj.coefficients),
                "projected": {"slope": qv(&proj.projected.slope), "constant": q(&proj.projected.constant)},
                "residual_mean_square": q(&proj.residual_mean_square),
                "df_relative": q(&dft),
            });
            Output { text, json }
        }
        Command::Moments => {
            let p = integer_p(opts.p)?;
            let ks = if opts.k.is_empty() { lab::default_k_list(tc, point_budget()?) } else { levels(opts)?.to_vec() };
            let mode = match opts.mode {
                Mode::Projected => SpectrumMode::Projected,
                Mode::Raw => SpectrumMode::Raw,
            };
            let r = lab::moment_convergence(tc, &w()?, p, &ks, mode)?;
            let json = json!({
                "p": p,
                "k": r.k_list,
                "m_k": qv(&r.quantized_moments),
                "target": q(&r.continuous_target),
                "residuals": r.residuals.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>(),
                "fitted_rate": r.fitted_rate.map(fmt_real),
                "oscillatory": r.oscillatory,
                "extrapolated_limit": r.extrapolated_limit.as_ref().map(q),
            });
            Output { text: r.to_csv(), json }
        }
        Command::DetectProduct => {
            let d = lab::product_detector(tc, &w()?)?;
            match d.witness {
                ProductWitness::Direction(v) => Output {
                    text: format!("product: true, direction = {}\n", tuple(&v)),
                    json: json!({"product": true, "direction": qv(&v)}),
                },
                ProductWitness::Residual { function, exact_inner } => Output {
                    text: format!("product: false, residual mean square = {exact_inner}\n"),
                    json: json!({"product": false, "residual_mean_square": q(&exact_inner), "residual": function}),
                },
            }
        }
        Command::Scan => unreachable!("scan runs over the whole batch"),
    })
}

fn run(cli: &Cli) -> Result<String> {
    let opts = &cli.opts;
    let path = opts.input.as_ref().ok_or_else(|| Error::invalid("--input is required"))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    let configs = io::parse_input(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    if let Command::Scan = cli.command {
        let dim = configs[0].config.dim();
        if configs.iter().any(|c| c.config.dim() != dim) {
            return Err(Error::invalid("scan needs configurations of a common dimension"));
        }
        let corpus: Vec<_> = configs.into_iter().map(|c| (c.id, c.config)).collect();
        let s = lab::stability_scan(&corpus, &torus(&opts.torus, dim)?)?;
        if opts.json {
            let records: Vec<Value> = s
                .records
                .iter()
                .map(|r| {
                    json!({
                        "id": r.id, "df": q(&r.df), "df_relative": q(&r.df_relative),
                        "norm1": q(&r.reduced_norm1), "ratio": r.ratio.as_ref().map(q), "product": r.product,
                    })
                })
                .collect();
            let v = json!({
                "records": records,
                "empirical_delta": s.empirical_delta.as_ref().map(q),
                "destabilizing": s.destabilizing,
            });
            return Ok(format!("{v:#}\n"));
        }
        let mut out = s.to_csv();
        if let Some(delta) = &s.empirical_delta {
            let _ = writeln!(out, "# empirical delta = {delta}");
        }
        if !s.destabilizing.is_empty() {
            let _ = writeln!(out, "# DF_T < 0: {}", s.destabilizing.join(" "));
        }
        return Ok(out);
    }
    let single = configs.len() == 1;
    let mut text = String::new();
    let mut items = Vec::new();
    for c in &configs {
        let out = run_one(cli.command, c, opts).map_err(|e| with_id(e, &c.id))?;
        if !single {
            let _ = writeln!(text, "[{}]", c.id);
        }
        text.push_str(&out.text);
        items.push(json!({"id": c.id, "result": out.json}));
    }
    if opts.json {
        let v = if single { items.pop().unwrap()["result"].take() } else { Value::Array(items) };
        return Ok(format!("{v:#}\n"));
    }
    Ok(text)
}

/// Tags a computational error with the configuration it came from.
fn with_id(e: Error, id: &str) -> Error {
    match e {
        Error::DegenerateGram { context } => Error::DegenerateGram { context: format!("{context} [{id}]") },
        Error::NonConvergence { context, iterations } => {
            Error::NonConvergence { context: format!("{context} [{id}]"), iterations }
        }
        Error::FitMismatch { k, detail } => Error::FitMismatch { k, detail: format!("{detail} [{id}]") },
        other => other,
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Ehrhart => "ehrhart",
        Command::Weights => "weights",
        Command::Df => "df",
        Command::Norm => "norm",
        Command::ReducedNorm => "reduced-norm",
        Command::InfNorm => "inf-norm",
        Command::Project => "project",
        Command::Moments => "moments",
        Command::DetectProduct => "detect-product",
        Command::Scan => "scan",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Some(path) = &cli.opts.output {
                if let Err(e) = std::fs::write(path, out) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {e}", command_name(cli.command));
            ExitCode::from(if e.is_computational() { 3 } else { 2 })
        }
    }
}
