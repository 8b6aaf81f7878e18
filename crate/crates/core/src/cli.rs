//! Command-line front end.
//!
//! Every command writes either CSV (parameter echo on `#` lines, then a column
//! header and data rows) or JSON to stdout or, with `--out`, to a file that is
//! written to a temporary sibling and renamed into place.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid or inconsistent
//! parameters.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use crate::error::Error;
use crate::model::{classify_family, double_well_floor, FAMILIES};
use crate::oracle::{self, ShootingConfig, ShootingResult};
use crate::spectrum::{self, EigenState, Parity};
use crate::wavefn::{self, WaveSample};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_INVALID: u8 = 2;

/// Largest degree covered when `--N` is omitted.
const DEFAULT_MAX_N: usize = 3;

#[derive(Debug, Parser)]
#[command(
    name = "heunwell",
    version,
    about = "Confluent Heun polynomial bound states of the hyperbolic double well -U0 sinh^4(x/d)/cosh^6(x/d)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solvability class of (q, p) family members (all members without --q/--p).
    Classify,
    /// Special strengths U0 with their energies and node counts.
    SpecialValues,
    /// Closed-form energies and second-condition determinants at a given U0.
    Spectrum,
    /// Sampled, normalized wavefunction of a polynomial state (or a shooting state with --numeric).
    Wavefunction,
    /// Cross-validation of closed-form results against Numerov shooting.
    Verify,
    /// Bound-state spectrum at a given U0 by Numerov shooting.
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    S,
    A,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::S => Parity::Symmetric,
            ParityArg::A => Parity::Antisymmetric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Polynomial degree N (default: every N from 0 to 3)
    #[arg(long = "N", global = true)]
    pub n_index: Option<usize>,
    /// Parity: s (symmetric) or a (antisymmetric); default both
    #[arg(long, value_enum, global = true)]
    pub parity: Option<ParityArg>,
    /// Width parameter d
    #[arg(long, default_value_t = 1.0, global = true)]
    pub d: f64,
    /// Potential strength U0 = 2 m V0 / hbar^2
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub u0: Option<f64>,
    /// Upper end of the special-strength search
    #[arg(long, default_value_t = 5000.0, global = true)]
    pub u0_max: f64,
    /// Energy eps = 2 m E / hbar^2 (target for --numeric, lower scan bound for scan)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Half-width of the sampling window (default 6 d)
    #[arg(long, global = true)]
    pub x_max: Option<f64>,
    /// Number of sample points (odd)
    #[arg(long, default_value_t = 4001, global = true)]
    pub points: usize,
    /// Tolerance: bisection tolerance on U0 for special-values/wavefunction
    /// (default 1e-10), relative energy agreement for verify (default 1e-6)
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Numerov step in z = x/d
    #[arg(long, default_value_t = oracle::DEFAULT_STEP, global = true)]
    pub step: f64,
    /// Energy cells for shooting scans
    #[arg(long, default_value_t = 400, global = true)]
    pub brackets: usize,
    /// Family index q for classify
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<i32>,
    /// Member index p for classify
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p: Option<i32>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Output file (default stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Use Numerov shooting instead of the closed form (wavefunction)
    #[arg(long, global = true)]
    pub numeric: bool,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::invalid(e.to_string())
    }
}

/// Rendered output of a command and its exit code.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub code: u8,
}

/// Runs a parsed command line, writing output and returning the exit code.
pub fn run(cli: &Cli) -> u8 {
    let result = execute(cli).and_then(|out| {
        emit(&out.text, cli.options.out.as_deref())?;
        Ok(out.code)
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Runs a command and returns its rendered output without writing it.
pub fn execute(cli: &Cli) -> Result<Output, Failure> {
    let o = &cli.options;
    if !(o.d > 0.0 && o.d.is_finite()) {
        return Err(Failure::invalid(format!("--d must be positive, got {}", o.d)));
    }
    if let Some(tol) = o.tol {
        if !(tol > 0.0) {
            return Err(Failure::invalid(format!("--tol must be positive, got {tol}")));
        }
    }
    match cli.command {
        Command::Classify => cmd_classify(o),
        Command::SpecialValues => cmd_special_values(o),
        Command::Spectrum => cmd_spectrum(o),
        Command::Wavefunction => cmd_wavefunction(o),
        Command::Verify => cmd_verify(o),
        Command::Scan => cmd_scan(o),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let Some(path) = out else {
        return match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                Err(Failure::invalid(format!("cannot write to stdout: {e}")))
            }
            _ => Ok(()),
        };
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text)
        .and_then(|()| fs::rename(&tmp, path))
        .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))
}

fn parities(o: &Options) -> Vec<Parity> {
    match o.parity {
        Some(p) => vec![p.into()],
        None => Parity::BOTH.to_vec(),
    }
}

fn degrees(o: &Options) -> Vec<usize> {
    match o.n_index {
        Some(n) => vec![n],
        None => (0..=DEFAULT_MAX_N).collect(),
    }
}

fn x_max(o: &Options) -> Result<f64, Failure> {
    let x = o.x_max.unwrap_or(6.0 * o.d);
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::invalid(format!("--x-max must be positive, got {x}")))
    }
}

fn require_u0(o: &Options) -> Result<f64, Failure> {
    match o.u0 {
        Some(u0) if u0 > 0.0 && u0.is_finite() => Ok(u0),
        Some(u0) => Err(Failure::invalid(format!("--u0 must be positive, got {u0}"))),
        None => Err(Failure::invalid("--u0 is required")),
    }
}

fn shooting_config(o: &Options) -> Result<ShootingConfig, Failure> {
    if !(o.step > 0.0 && o.step < 0.1) {
        return Err(Failure::invalid(format!(
            "--step must lie in (0, 0.1), got {}",
            o.step
        )));
    }
    Ok(ShootingConfig {
        step: o.step,
        ..Default::default()
    })
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(command: &str, echo: &[(&str, String)], columns: &[&str]) -> Self {
        let mut text = format!("# heunwell {command}\n");
        if !echo.is_empty() {
            let pairs: Vec<String> = echo.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(text, "# {}", pairs.join(" "));
        }
        let _ = writeln!(text, "{}", columns.join(","));
        Self { text }
    }

    fn comment(&mut self, line: &str) {
        let _ = writeln!(self.text, "# {line}");
    }

    fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "all".to_string(), |v| v.to_string())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

/// JSON record of one state.
#[derive(Debug, Serialize)]
pub struct StateRecord {
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n_index: Option<usize>,
    pub parity: Parity,
    pub u0: f64,
    pub d: f64,
    pub eps: f64,
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
}

impl StateRecord {
    fn analytic(state: &EigenState, nodes: usize) -> Self {
        Self {
            n_index: Some(state.n_index),
            parity: state.parity,
            u0: state.u0,
            d: state.d,
            eps: state.eps,
            nodes,
            coefficients: Some(state.polynomial()),
        }
    }

    fn numeric(result: &ShootingResult, u0: f64, d: f64) -> Self {
        Self {
            n_index: None,
            parity: result.parity,
            u0,
            d,
            eps: result.eps,
            nodes: result.n_nodes,
            coefficients: None,
        }
    }
}

fn cmd_classify(o: &Options) -> Result<Output, Failure> {
    let members: Vec<(i32, i32)> = match (o.q, o.p) {
        (Some(q), Some(p)) => vec![(q, p)],
        (None, None) => FAMILIES
            .iter()
            .flat_map(|&q| (-2..=q).step_by(2).map(move |p| (q, p)))
            .collect(),
        _ => return Err(Failure::invalid("--q and --p must be given together")),
    };
    let rows = members
        .into_iter()
        .map(|(q, p)| classify_family(q, p).map(|c| (q, p, c)))
        .collect::<Result<Vec<_>, _>>()?;

    let text = match o.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                q: i32,
                p: i32,
                class: &'static str,
            }
            json(
                &rows
                    .iter()
                    .map(|&(q, p, c)| Row { q, p, class: c.tag() })
                    .collect::<Vec<_>>(),
            )
        }
        Format::Csv => {
            let mut csv = Csv::new("classify", &[], &["q", "p", "class"]);
            for (q, p, c) in rows {
                csv.row(&[q.to_string(), p.to_string(), c.tag().to_string()]);
            }
            csv.text
        }
    };
    Ok(Output { text, code: EXIT_OK })
}

/// Node count predicted for the `k`-th special strength (ascending) of degree `N`.
pub fn expected_nodes(n_index: usize, parity: Parity, k: usize) -> Option<usize> {
    let top = match parity {
        Parity::Symmetric => 2 * n_index,
        Parity::Antisymmetric => 2 * n_index + 1,
    };
    top.checked_sub(2 * k)
}

struct SpecialRow {
    state: EigenState,
    nodes: usize,
    expected: Option<usize>,
}

fn special_rows(
    n_index: usize,
    parity: Parity,
    o: &Options,
    tol: f64,
) -> Result<Vec<SpecialRow>, Failure> {
    let x_max = x_max(o)?;
    let roots = spectrum::special_strengths(
        n_index,
        parity,
        o.d,
        o.u0_max,
        spectrum::DEFAULT_GRID_STEP,
        tol,
    )?;
    roots
        .into_iter()
        .enumerate()
        .map(|(k, u0)| {
            let state = spectrum::build_state(n_index, parity, u0, o.d)?;
            let nodes = wavefn::sample(&state, x_max, o.points)?.nodes;
            Ok(SpecialRow {
                state,
                nodes,
                expected: expected_nodes(n_index, parity, k),
            })
        })
        .collect()
}

fn cmd_special_values(o: &Options) -> Result<Output, Failure> {
    let tol = o.tol.unwrap_or(spectrum::DEFAULT_ROOT_TOL);
    let explicit = o.n_index.is_some() && o.parity.is_some();
    let mut rows = Vec::new();
    for n in degrees(o) {
        for parity in parities(o) {
            // below-threshold ranges are skipped when scanning every (N, parity)
            if !explicit && o.d * o.u0_max.sqrt() <= parity.offset(n) {
                continue;
            }
            rows.extend(special_rows(n, parity, o, tol)?);
        }
    }
    if rows.is_empty() {
        return Err(Failure::invalid(format!(
            "no special strengths for N = {}, parity {} with U0 <= {}",
            opt(o.n_index),
            opt(o.parity.map(|p| Parity::from(p).code())),
            o.u0_max
        )));
    }
    let law_broken = rows.iter().any(|r| r.expected != Some(r.nodes));

    let text = match o.format {
        Format::Json => json(
            &rows
                .iter()
                .map(|r| StateRecord::analytic(&r.state, r.nodes))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut csv = Csv::new(
                "special-values",
                &[
                    ("N", opt(o.n_index)),
                    ("parity", opt(o.parity.map(|p| Parity::from(p).code()))),
                    ("d", o.d.to_string()),
                    ("u0_max", o.u0_max.to_string()),
                    ("tol", tol.to_string()),
                    ("grid_step", spectrum::DEFAULT_GRID_STEP.to_string()),
                ],
                &["N", "parity", "u0", "eps", "nodes"],
            );
            for r in &rows {
                csv.row(&[
                    r.state.n_index.to_string(),
                    r.state.parity.code().to_string(),
                    r.state.u0.to_string(),
                    r.state.eps.to_string(),
                    r.nodes.to_string(),
                ]);
            }
            if law_broken {
                csv.comment("node counts deviate from 2N - 2k (s) / 2N + 1 - 2k (a)");
            }
            csv.text
        }
    };
    let code = if law_broken { EXIT_VERIFY_FAILED } else { EXIT_OK };
    Ok(Output { text, code })
}

fn cmd_spectrum(o: &Options) -> Result<Output, Failure> {
    let u0 = require_u0(o)?;
    let mut rows = Vec::new();
    for parity in parities(o) {
        let ns: Vec<usize> = match o.n_index {
            Some(n) => vec![n],
            None => (0..)
                .take_while(|&n| o.d * u0.sqrt() > parity.offset(n))
                .collect(),
        };
        for n in ns {
            let eps = spectrum::eigenvalue(n, parity, u0, o.d)?;
            let params = spectrum::first_condition_params(n, parity, u0, o.d)?;
            rows.push((n, parity, eps, spectrum::delta_determinant(&params, n)));
        }
    }
    if rows.is_empty() {
        return Err(Failure::invalid(format!(
            "U0 = {u0} is below every bound-state threshold (d sqrt(U0) > 3)"
        )));
    }
    rows.sort_by_key(|r| (r.0, r.1));

    let text = match o.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                #[serde(rename = "N")]
                n: usize,
                parity: Parity,
                u0: f64,
                d: f64,
                eps: f64,
                determinant: f64,
            }
            json(
                &rows
                    .iter()
                    .map(|&(n, parity, eps, det)| Row {
                        n,
                        parity,
                        u0,
                        d: o.d,
                        eps,
                        determinant: det,
                    })
                    .collect::<Vec<_>>(),
            )
        }
        Format::Csv => {
            let mut csv = Csv::new(
                "spectrum",
                &[("u0", u0.to_string()), ("d", o.d.to_string())],
                &["N", "parity", "eps", "determinant"],
            );
            for (n, parity, eps, det) in rows {
                csv.row(&[
                    n.to_string(),
                    parity.code().to_string(),
                    eps.to_string(),
                    det.to_string(),
                ]);
            }
            csv.text
        }
    };
    Ok(Output { text, code: EXIT_OK })
}

/// Resamples a wave onto a uniform grid by linear interpolation.
fn resample(wave: &WaveSample, x_max: f64, points: usize) -> Result<WaveSample, Error> {
    let (lo, hi) = (wave.grid[0], wave.grid[wave.grid.len() - 1]);
    if x_max > hi || -x_max < lo {
        return Err(Error::InvalidGrid(format!(
            "x_max = {x_max} exceeds the integration window [{lo}, {hi}]"
        )));
    }
    if points < 3 || points.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "point count must be odd and at least 3, got {points}"
        )));
    }
    let spacing = (hi - lo) / (wave.grid.len() - 1) as f64;
    let half = (points / 2) as f64;
    let grid: Vec<f64> = (0..points)
        .map(|i| x_max * (i as f64 - half) / half)
        .collect();
    let values = grid
        .iter()
        .map(|&x| {
            let pos = ((x - lo) / spacing).clamp(0.0, (wave.grid.len() - 1) as f64);
            let i = (pos.floor() as usize).min(wave.grid.len() - 2);
            let frac = pos - i as f64;
            wave.values[i] * (1.0 - frac) + wave.values[i + 1] * frac
        })
        .collect();
    WaveSample::new(grid, values)
}

fn cmd_wavefunction(o: &Options) -> Result<Output, Failure> {
    let u0 = require_u0(o)?;
    let x_max = x_max(o)?;

    let (record, wave, label) = if o.numeric {
        let target = o
            .eps
            .ok_or_else(|| Failure::invalid("--numeric needs --eps"))?;
        let config = shooting_config(o)?;
        let states = oracle::spectrum_scan(u0, o.d, double_well_floor(u0), o.brackets, &config)?;
        let wanted: Option<Parity> = o.parity.map(Into::into);
        let best = states
            .iter()
            .filter(|s| wanted.is_none_or(|p| s.parity == p))
            .min_by(|a, b| (a.eps - target).abs().total_cmp(&(b.eps - target).abs()))
            .ok_or_else(|| Failure::invalid(format!("no bound state found at U0 = {u0}")))?;
        info!("numeric state at eps = {} ({} nodes)", best.eps, best.n_nodes);
        let wave = wavefn::normalize(&resample(&best.wave, x_max, o.points)?)?;
        (StateRecord::numeric(best, u0, o.d), wave, "numerov")
    } else {
        let n = o
            .n_index
            .ok_or_else(|| Failure::invalid("--N is required (or use --numeric)"))?;
        let parity: Parity = o
            .parity
            .ok_or_else(|| Failure::invalid("--parity is required (or use --numeric)"))?
            .into();
        let tol = o.tol.unwrap_or(spectrum::DEFAULT_ROOT_TOL);
        let special =
            spectrum::snap_special_strength(n, parity, u0, o.d, spectrum::SNAP_WINDOW, tol)?;
        let state = spectrum::build_state(n, parity, special, o.d)?;
        let wave = wavefn::normalize(&wavefn::sample(&state, x_max, o.points)?)?;
        (StateRecord::analytic(&state, wave.nodes), wave, "closed-form")
    };

    let text = match o.format {
        Format::Json => {
            #[derive(Serialize)]
            struct WaveRecord<'a> {
                method: &'a str,
                state: &'a StateRecord,
                x: &'a [f64],
                psi: &'a [f64],
                density: Vec<f64>,
            }
            json(&WaveRecord {
                method: label,
                state: &record,
                x: &wave.grid,
                psi: &wave.values,
                density: wave.density(),
            })
        }
        Format::Csv => {
            let mut echo = vec![("method", label.to_string())];
            if let Some(n) = record.n_index {
                echo.push(("N", n.to_string()));
            }
            echo.extend([
                ("parity", record.parity.code().to_string()),
                ("u0", record.u0.to_string()),
                ("d", record.d.to_string()),
                ("eps", record.eps.to_string()),
                ("nodes", wave.nodes.to_string()),
                ("x_max", x_max.to_string()),
                ("points", o.points.to_string()),
            ]);
            if let Some(c) = &record.coefficients {
                let list: Vec<String> = c.iter().map(f64::to_string).collect();
                echo.push(("coefficients", list.join(";")));
            }
            let mut csv = Csv::new("wavefunction", &echo, &["x", "psi", "psi2"]);
            for (x, v) in wave.grid.iter().zip(&wave.values) {
                csv.row(&[x.to_string(), v.to_string(), (v * v).to_string()]);
            }
            csv.text
        }
    };
    Ok(Output { text, code: EXIT_OK })
}

fn cmd_scan(o: &Options) -> Result<Output, Failure> {
    let u0 = require_u0(o)?;
    let eps_min = o.eps.unwrap_or_else(|| double_well_floor(u0));
    let config = shooting_config(o)?;
    let states = oracle::spectrum_scan(u0, o.d, eps_min, o.brackets, &config)?;
    let text = match o.format {
        Format::Json => json(
            &states
                .iter()
                .map(|s| StateRecord::numeric(s, u0, o.d))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut csv = Csv::new(
                "scan",
                &[
                    ("u0", u0.to_string()),
                    ("d", o.d.to_string()),
                    ("eps_min", eps_min.to_string()),
                    ("brackets", o.brackets.to_string()),
                    ("step", o.step.to_string()),
                ],
                &["index", "parity", "eps", "nodes", "mismatch"],
            );
            for (i, s) in states.iter().enumerate() {
                csv.row(&[
                    i.to_string(),
                    s.parity.code().to_string(),
                    s.eps.to_string(),
                    s.n_nodes.to_string(),
                    s.mismatch.to_string(),
                ]);
            }
            csv.text
        }
    };
    Ok(Output { text, code: EXIT_OK })
}

/// One line of the verification report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: String, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Mean `|schrodinger_residual|` over 101 points in `[-4d, 4d]`, relative to
/// `max |eps psi|` on the same points.
pub fn residual_ratio(state: &EigenState) -> f64 {
    let h = wavefn::default_residual_step(state);
    let xs: Vec<f64> = (0..=100).map(|i| state.d * (-4.0 + 0.08 * i as f64)).collect();
    let mean = xs
        .iter()
        .map(|&x| wavefn::schrodinger_residual(state, x, h).abs())
        .sum::<f64>()
        / xs.len() as f64;
    let scale = xs
        .iter()
        .map(|&x| (state.eps * wavefn::psi(state, x)).abs())
        .fold(0.0, f64::max);
    mean / scale
}

/// Shoots the same-parity eigenvalue nearest a closed-form state.
pub fn shoot_state(state: &EigenState, config: &ShootingConfig) -> Result<ShootingResult, Error> {
    let width = 0.01 * state.eps.abs();
    oracle::shoot_eigenvalue(
        state.u0,
        state.d,
        state.eps - width,
        state.eps + width,
        state.parity,
        config,
    )
}

/// Closed-form versus shooting checks for every special state with `N <= n_max`.
pub fn verification_checks(
    n_max: usize,
    d: f64,
    u0_max: f64,
    rel_tol: f64,
    config: &ShootingConfig,
) -> Result<Vec<Check>, Error> {
    let mut checks = Vec::new();
    for n in 0..=n_max {
        for parity in Parity::BOTH {
            let tag = format!("N={n} {}", parity.code());
            let roots = spectrum::special_strengths(
                n,
                parity,
                d,
                u0_max,
                spectrum::DEFAULT_GRID_STEP,
                spectrum::DEFAULT_ROOT_TOL,
            )?;
            checks.push(Check::new(
                format!("root-count {tag}"),
                roots.len() == n + 1,
                format!("{} roots, expected {}", roots.len(), n + 1),
            ));
            for (k, &u0) in roots.iter().enumerate() {
                let label = format!("{tag} U0={u0:.4}");
                let state = spectrum::build_state(n, parity, u0, d)?;
                let nodes = wavefn::sample(&state, 6.0 * d, 6001)?.nodes;
                let expected = expected_nodes(n, parity, k);
                checks.push(Check::new(
                    format!("node-law {label}"),
                    expected == Some(nodes),
                    format!("{nodes} nodes, expected {}", opt(expected)),
                ));

                let ratio = residual_ratio(&state);
                checks.push(Check::new(
                    format!("residual {label}"),
                    ratio <= 1e-3,
                    format!("mean |r| / max |eps psi| = {ratio:.3e}"),
                ));

                match shoot_state(&state, config) {
                    Ok(shot) => {
                        let rel = (shot.eps - state.eps).abs() / state.eps.abs();
                        checks.push(Check::new(
                            format!("energy {label}"),
                            rel <= rel_tol,
                            format!(
                                "closed form {} vs shooting {} (rel {rel:.3e}, tol {rel_tol:e})",
                                state.eps, shot.eps
                            ),
                        ));
                        checks.push(Check::new(
                            format!("oracle-nodes {label}"),
                            shot.n_nodes == nodes,
                            format!("shooting {} vs closed form {nodes}", shot.n_nodes),
                        ));
                    }
                    Err(e) => checks.push(Check::new(
                        format!("energy {label}"),
                        false,
                        e.to_string(),
                    )),
                }
            }
        }
    }
    Ok(checks)
}

fn cmd_verify(o: &Options) -> Result<Output, Failure> {
    let n_max = o.n_index.unwrap_or(2);
    let rel_tol = o.tol.unwrap_or(1e-6);
    let config = shooting_config(o)?;
    let checks = verification_checks(n_max, o.d, o.u0_max, rel_tol, &config)?;
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();

    let text = match o.format {
        Format::Json => json(&checks),
        Format::Csv => {
            let mut csv = Csv::new(
                "verify",
                &[
                    ("N_max", n_max.to_string()),
                    ("d", o.d.to_string()),
                    ("u0_max", o.u0_max.to_string()),
                    ("tol", rel_tol.to_string()),
                    ("step", o.step.to_string()),
                ],
                &["check", "status", "detail"],
            );
            for c in &checks {
                csv.row(&[
                    c.name.clone(),
                    if c.passed { "pass" } else { "FAIL" }.to_string(),
                    format!("\"{}\"", c.detail.replace('"', "'")),
                ]);
            }
            csv.comment(&format!(
                "{} checks, {} failed",
                checks.len(),
                failed.len()
            ));
            csv.text
        }
    };
    for c in &failed {
        eprintln!("FAIL {}: {}", c.name, c.detail);
    }
    let code = if failed.is_empty() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    };
    Ok(Output { text, code })
}
