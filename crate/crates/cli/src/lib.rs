//! Front end of the `dqpt` binary: argument handling, dispatch and output.
//!
//! [`run`] returns the process exit status: `0` on success, `2` for bad
//! arguments (with usage text), `1` for numerical or I/O failures.

pub mod args;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::{CommandFactory, Parser};
use dqpt::{
    critical_set, critical_times, ed_rate_function, lambda_max_vs_flux, local_maxima, qwz_critical_pairs,
    rate_function, size_sweep, solve_critical_momenta, thermo_series, CriticalSet64, EdQuench, Lattice, Momentum,
    MomentumGrid, PeakSelection, QuenchSpec64, RateSeries64, TimeWindow, TwistAxis,
};
use serde_json::{json, Value};

use args::{Axis, Cli, Command, Format, LatticeArgs, ModelArgs, ModelKind, Peak, TimeArgs};
pub use output::{read_series, write_series};
use output::{emit, json_num, render_series, render_table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] dqpt::Error),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Library(
                dqpt::Error::InvalidArgument(_) | dqpt::Error::BasisMismatch(_) | dqpt::Error::DimensionTooLarge { .. },
            ) => 2,
            CliError::Library(_) | CliError::Io(_) => 1,
        }
    }
}

type Res<T> = Result<T, CliError>;

/// Runs the CLI with the process's standard streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Runs the CLI writing to the given streams.
pub fn run_with<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match args::merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}\n\n{}", Cli::command().render_usage());
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                if !text.contains("Usage:") {
                    let _ = writeln!(stderr, "\n{}", usage_for(&argv));
                }
                2
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    let name = subcommand_name(&cli.command);
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            let _ = writeln!(stderr, "error: {e}");
            if code == 2 {
                let mut cmd = Cli::command();
                cmd.build();
                if let Some(sub) = cmd.find_subcommand_mut(name) {
                    let _ = writeln!(stderr, "\n{}", sub.render_usage());
                }
            }
            code
        }
    }
}

/// Usage line of the subcommand named in `argv`, or of the whole program.
fn usage_for(argv: &[OsString]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let name = argv
        .iter()
        .filter_map(|a| a.to_str())
        .find(|a| args::SUBCOMMANDS.contains(a));
    match name.and_then(|n| cmd.find_subcommand_mut(n)) {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Rate(_) => "rate",
        Command::Critical(_) => "critical",
        Command::FluxScan(_) => "flux-scan",
        Command::Scaling(_) => "scaling",
        Command::Thermo(_) => "thermo",
        Command::Ed(_) => "ed",
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Res<()> {
    let (summary, to_file) = match cmd {
        Command::Rate(a) => (cmd_rate(&a, stdout)?, a.output.out.is_some()),
        Command::Critical(a) => (cmd_critical(&a, stdout)?, a.output.out.is_some()),
        Command::FluxScan(a) => (cmd_flux_scan(&a, stdout)?, a.output.out.is_some()),
        Command::Scaling(a) => (cmd_scaling(&a, stdout)?, a.output.out.is_some()),
        Command::Thermo(a) => (cmd_thermo(&a, stdout)?, a.output.out.is_some()),
        Command::Ed(a) => (cmd_ed(&a, stdout)?, a.output.out.is_some()),
    };
    // keep stdout clean for data when it carries the output
    let sink: &mut dyn Write = if to_file { stdout } else { stderr };
    writeln!(sink, "{summary}").map_err(|e| CliError::Io(e.to_string()))
}

fn need<T>(v: Option<T>, flag: &str, model: &str) -> Res<T> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for --model {model}")))
}

fn quench_from(m: &ModelArgs, l: Option<usize>) -> Res<QuenchSpec64> {
    let q = match m.model {
        ModelKind::Ssh => QuenchSpec64::ssh(need(m.gi, "gi", "ssh")?, need(m.gf, "gf", "ssh")?)?,
        ModelKind::Creutz => QuenchSpec64::creutz(
            need(m.theta_i, "theta-i", "creutz")?,
            need(m.theta_f, "theta-f", "creutz")?,
            m.jv,
        )?,
        ModelKind::LrSsh => QuenchSpec64::long_range_ssh(
            m.j1,
            need(m.j2i, "j2i", "lr-ssh")?,
            need(m.j2f, "j2f", "lr-ssh")?,
            need(m.alpha, "alpha", "lr-ssh")?,
            need(l, "L", "lr-ssh")?,
        )?,
        ModelKind::Qwz => QuenchSpec64::qwz(need(m.mui, "mui", "qwz")?, need(m.muf, "muf", "qwz")?)?,
    };
    Ok(q)
}

fn twist(axis: Axis) -> TwistAxis {
    match axis {
        Axis::X => TwistAxis::X,
        Axis::Y => TwistAxis::Y,
        Axis::Both => TwistAxis::Both,
    }
}

fn lattice_from(m: &ModelArgs, l: &LatticeArgs) -> Res<Lattice> {
    if m.model == ModelKind::Qwz {
        let lx = need(l.lx.or(l.l), "Lx (or --L)", "qwz")?;
        let ly = need(l.ly.or(l.l), "Ly (or --L)", "qwz")?;
        Ok(Lattice::Square {
            lx,
            ly,
            axis: twist(l.axis),
        })
    } else {
        let name = match m.model {
            ModelKind::Ssh => "ssh",
            ModelKind::Creutz => "creutz",
            _ => "lr-ssh",
        };
        Ok(Lattice::Chain(need(l.l, "L", name)?))
    }
}

/// Critical data for the lattice; an empty set when no critical momentum exists.
fn critical_for(q: &QuenchSpec64, lattice: &Lattice, n_max: usize) -> Res<CriticalSet64> {
    let result = match *lattice {
        Lattice::Chain(l) => critical_set(q, l, n_max),
        Lattice::Square { lx, ly, axis } => qwz_critical_pairs(q, lx, ly, axis, n_max),
    };
    match result {
        Ok(s) => Ok(s),
        Err(dqpt::Error::NoSolution(_)) => Ok(CriticalSet64 {
            quench: *q,
            sizes: match *lattice {
                Lattice::Chain(l) => vec![l],
                Lattice::Square { lx, ly, .. } => vec![lx, ly],
            },
            pairs: Vec::new(),
            t_star_interval: None,
        }),
        Err(e) => Err(e.into()),
    }
}

fn first_critical_time(set: &CriticalSet64) -> Option<f64> {
    set.pairs
        .iter()
        .filter_map(|p| p.t_star.first().copied())
        .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.min(t))))
}

/// Sampling window; without `--dt`/`--steps`, at least 400 samples precede `t1`.
fn window_from(t: &TimeArgs, t1: Option<f64>) -> Res<TimeWindow<f64>> {
    if !(t.tmax.is_finite() && t.tmax > 0.0) {
        return Err(CliError::Usage(format!("--tmax must be positive, got {}", t.tmax)));
    }
    if let Some(n) = t.steps {
        if n < 2 {
            return Err(CliError::Usage(format!("--steps must be >= 2, got {n}")));
        }
        return Ok(TimeWindow::span(0.0, t.tmax, n));
    }
    let default = t.tmax / TimeWindow::<f64>::DEFAULT_STEPS as f64;
    let dt = match t.dt {
        Some(dt) if !(dt.is_finite() && dt > 0.0) => {
            return Err(CliError::Usage(format!("--dt must be positive, got {dt}")));
        }
        Some(dt) => dt,
        None => t1.map_or(default, |t1| default.min(t1 / 400.0)),
    };
    let w = TimeWindow::with_dt(0.0, t.tmax, dt);
    Ok(if w.steps < 2 { TimeWindow::span(0.0, t.tmax, 2) } else { w })
}

fn check_flux(phi: f64, flag: &str) -> Res<f64> {
    if (0.0..std::f64::consts::TAU).contains(&phi) {
        Ok(phi)
    } else {
        Err(CliError::Usage(format!("--{flag} must lie in [0, 2pi), got {phi}")))
    }
}

fn fmt_short(x: f64) -> String {
    if x.is_finite() { format!("{x:.6}") } else { output::fmt_num(x) }
}

fn peak_summary(series: &RateSeries64) -> String {
    match local_maxima(series).first() {
        Some(&(t, l)) => format!("first peak t = {}, lambda = {}", fmt_short(t), fmt_short(l)),
        None => "no interior peak".into(),
    }
}

fn phi_c_summary(set: &CriticalSet64) -> String {
    if set.is_empty() {
        return "no critical momentum".into();
    }
    let mut phis: Vec<String> = Vec::new();
    for p in &set.pairs {
        let v: Vec<String> = p.phi_c.iter().map(|x| format!("{:.6}", x / std::f64::consts::PI)).collect();
        let v = v.join("/");
        if !phis.contains(&v) {
            phis.push(v);
        }
    }
    let more = if phis.len() > 4 { ", ..." } else { "" };
    phis.truncate(4);
    format!("phi_c/pi = {}{more}", phis.join(", "))
}

fn cmd_rate(a: &args::RateArgs, stdout: &mut dyn Write) -> Res<String> {
    let l_hint = a.lattice.l;
    let q = quench_from(&a.model, l_hint)?;
    let lattice = lattice_from(&a.model, &a.lattice)?;
    let flux = check_flux(a.flux, "flux")?;
    let grid = match lattice {
        Lattice::Square { lx, ly, axis: TwistAxis::Both } => {
            MomentumGrid::square(lx, ly, flux, check_flux(a.flux_y.unwrap_or(flux), "flux-y")?)?
        }
        _ => lattice.grid(flux)?,
    };
    let set = critical_for(&q, &lattice, 1)?;
    let window = window_from(&a.time, first_critical_time(&set))?;
    let mut times = window.times();
    if a.with_critical_times {
        let full = critical_for(&q, &lattice, 64)?;
        times.extend(full.pairs.iter().flat_map(|p| p.t_star.iter().copied()).filter(|&t| t <= a.time.tmax));
        times.sort_by(f64::total_cmp);
        times.dedup();
    }
    let mut series = rate_function(&q, &grid, &times)?;
    series.metadata.insert("dt".into(), window.dt().to_string());
    emit(&render_series(&series, a.output.format), a.output.out.as_deref(), stdout)?;
    Ok(format!("{}; {}", peak_summary(&series), phi_c_summary(&set)))
}

fn momentum_json(k: &Momentum<f64>) -> (Value, Value) {
    let pi = std::f64::consts::PI;
    match *k {
        Momentum::One(k) => (json_num(k), json_num(k / pi)),
        Momentum::Two(x, y) => (json!([json_num(x), json_num(y)]), json!([json_num(x / pi), json_num(y / pi)])),
    }
}

fn critical_json(set: &CriticalSet64) -> Value {
    let pi = std::f64::consts::PI;
    let pairs: Vec<Value> = set
        .pairs
        .iter()
        .map(|p| {
            let (k, k_pi) = momentum_json(&p.k_c);
            let axis = p.axis.map(|a| match a {
                TwistAxis::X => "x",
                TwistAxis::Y => "y",
                TwistAxis::Both => "both",
            });
            let phi_c: Vec<Value> = p.phi_c.iter().map(|&x| json_num(x)).collect();
            let phi_c_pi: Vec<Value> = p.phi_c.iter().map(|&x| json_num(x / pi)).collect();
            let (phi_c, phi_c_pi) = if phi_c.len() == 1 {
                (phi_c[0].clone(), phi_c_pi[0].clone())
            } else {
                (Value::Array(phi_c), Value::Array(phi_c_pi))
            };
            json!({
                "k_c": k,
                "k_c_over_pi": k_pi,
                "epsilon_f": json_num(p.epsilon_f_kc),
                "phi_c": phi_c,
                "phi_c_over_pi": phi_c_pi,
                "axis": axis,
                "t_star": p.t_star.iter().map(|&t| json_num(t)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "quench": {
            "initial": format!("{:?}", set.quench.initial),
            "final": format!("{:?}", set.quench.post),
        },
        "sizes": set.sizes,
        "t_star_interval": set.t_star_interval.map(|(a, b)| vec![json_num(a), json_num(b)]),
        "pairs": pairs,
    })
}

fn cmd_critical(a: &args::CriticalArgs, stdout: &mut dyn Write) -> Res<String> {
    if a.n_max == 0 {
        return Err(CliError::Usage("--n must be >= 1".into()));
    }
    let q = quench_from(&a.model, a.lattice.l)?;
    let lattice = lattice_from(&a.model, &a.lattice)?;
    let set = critical_for(&q, &lattice, a.n_max)?;
    let text = match a.output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&critical_json(&set)).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let width = set.pairs.first().map_or(0, |p| p.t_star.len());
            let mut out = String::from("k_c_x,k_c_y,epsilon_f,phi_c_x,phi_c_y");
            for n in 1..=width {
                out.push_str(&format!(",t_star_{n}"));
            }
            out.push('\n');
            for p in &set.pairs {
                let (kx, ky) = match p.k_c {
                    Momentum::One(k) => (k, f64::NAN),
                    Momentum::Two(x, y) => (x, y),
                };
                let mut cells = vec![kx, ky, p.epsilon_f_kc, p.phi_c[0], p.phi_c.get(1).copied().unwrap_or(f64::NAN)];
                cells.extend(&p.t_star);
                let cells: Vec<String> = cells.into_iter().map(output::fmt_num).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
    };
    emit(&text, a.output.out.as_deref(), stdout)?;
    let t1 = first_critical_time(&set).map_or_else(|| "none".to_string(), fmt_short);
    Ok(format!("{} pair(s); {}; t1* = {t1}", set.pairs.len(), phi_c_summary(&set)))
}

fn cmd_flux_scan(a: &args::FluxScanArgs, stdout: &mut dyn Write) -> Res<String> {
    let q = quench_from(&a.model, a.lattice.l)?;
    let lattice = lattice_from(&a.model, &a.lattice)?;
    let phi_min = check_flux(a.phi_min, "phi-min")?;
    let phi_max = check_flux(a.phi_max, "phi-max")?;
    if phi_max < phi_min {
        return Err(CliError::Usage("--phi-max must not be below --phi-min".into()));
    }
    if a.phi_count == 0 {
        return Err(CliError::Usage("--phi-count must be >= 1".into()));
    }
    let mut fluxes: Vec<f64> = if a.phi_count == 1 {
        vec![phi_min]
    } else {
        let step = (phi_max - phi_min) / (a.phi_count - 1) as f64;
        (0..a.phi_count)
            .map(|j| if j + 1 == a.phi_count { phi_max } else { phi_min + step * j as f64 })
            .collect()
    };
    let set = critical_for(&q, &lattice, 1)?;
    if a.with_critical_flux {
        fluxes.extend(set.pairs.iter().flat_map(|p| p.phi_c.iter().copied()).filter(|&p| p > 0.0 || phi_min == 0.0));
        fluxes.sort_by(f64::total_cmp);
        fluxes.dedup();
    }
    let window = window_from(&a.time, first_critical_time(&set))?;
    let selection = match a.peak {
        Peak::First => PeakSelection::First,
        Peak::Highest => PeakSelection::Highest,
    };
    let points = lambda_max_vs_flux(&q, lattice, &fluxes, &window, selection)?;
    let rows: Vec<Vec<Option<f64>>> = points.iter().map(|p| vec![Some(p.phi), p.t_peak, p.lambda_max]).collect();
    emit(&render_table(&["phi", "t_peak", "lambda_max"], &rows, a.output.format), a.output.out.as_deref(), stdout)?;
    let best = points
        .iter()
        .filter_map(|p| p.lambda_max.map(|l| (p.phi, l)))
        .fold(None, |b: Option<(f64, f64)>, p| match b {
            Some(b) if b.1 >= p.1 => Some(b),
            _ => Some(p),
        });
    let head = match best {
        Some((phi, l)) => format!(
            "largest peak {} at phi/pi = {:.6}",
            fmt_short(l),
            phi / std::f64::consts::PI
        ),
        None => "no peak in window".into(),
    };
    Ok(format!("{head}; {}", phi_c_summary(&set)))
}

fn cmd_scaling(a: &args::ScalingArgs, stdout: &mut dyn Write) -> Res<String> {
    if a.model.model == ModelKind::Qwz {
        return Err(CliError::Usage("scaling runs on chains; --model qwz is not supported".into()));
    }
    let largest = a.sizes.iter().copied().max();
    let q = quench_from(&a.model, largest)?;
    let flux = check_flux(a.flux, "flux")?;
    let t1 = largest
        .and_then(|l| critical_for(&q, &Lattice::Chain(l.max(2)), 1).ok())
        .and_then(|s| first_critical_time(&s));
    let window = window_from(&a.time, t1)?;
    let points = size_sweep(&q, &a.sizes, flux, &window)?;
    let rows: Vec<Vec<Option<f64>>> = points
        .iter()
        .map(|p| vec![Some(p.size as f64), p.t_peak, p.lambda_max])
        .collect();
    emit(&render_table(&["size", "t_peak", "lambda_max"], &rows, a.output.format), a.output.out.as_deref(), stdout)?;
    let peaks: Vec<f64> = points.iter().filter_map(|p| p.t_peak).collect();
    let lo = peaks.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = peaks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(if peaks.is_empty() {
        "no peak in window".into()
    } else {
        format!("t_peak in [{}, {}] over {} sizes", fmt_short(lo), fmt_short(hi), points.len())
    })
}

fn cmd_thermo(a: &args::ThermoArgs, stdout: &mut dyn Write) -> Res<String> {
    if a.model.model == ModelKind::Qwz {
        return Err(CliError::Usage("thermo is defined for chains; --model qwz is not supported".into()));
    }
    let q = quench_from(&a.model, a.l)?;
    let t1 = match solve_critical_momenta(&q) {
        Ok(ks) => {
            let mut t1: Option<f64> = None;
            for k in ks {
                let t = critical_times(&q, k, 1)?[0];
                t1 = Some(t1.map_or(t, |m| m.min(t)));
            }
            t1
        }
        Err(dqpt::Error::NoSolution(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let window = window_from(&a.time, t1)?;
    let series = thermo_series(&q, &window.times())?;
    emit(&render_series(&series, a.output.format), a.output.out.as_deref(), stdout)?;
    let t1 = t1.map_or_else(|| "none".to_string(), fmt_short);
    Ok(format!("{}; t1* = {t1}", peak_summary(&series)))
}

fn cmd_ed(a: &args::EdArgs, stdout: &mut dyn Write) -> Res<String> {
    let flux = check_flux(a.flux, "flux")?;
    let quench = EdQuench::new(a.l, a.u, a.j1, a.j2i, a.j2f, flux)?;
    let window = window_from(&a.time, None)?;
    let series = ed_rate_function(&quench, &window.times())?;
    emit(&render_series(&series, a.output.format), a.output.out.as_deref(), stdout)?;
    let (i, l) = series
        .lambda
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &l)| if l > b.1 { (i, l) } else { b });
    Ok(format!(
        "max lambda = {} at t = {}; {}",
        fmt_short(l),
        fmt_short(series.times.get(i).copied().unwrap_or(f64::NAN)),
        peak_summary(&series)
    ))
}

/// Convenience for tests and scripts: runs `argv` and returns `(status, stdout, stderr)`.
pub fn run_captured<I, S>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}
