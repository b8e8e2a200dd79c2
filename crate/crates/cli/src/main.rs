use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;

use fctk::asymptotics::{fig1_dataset, FIG1_HEADER};
use fctk::contour::{contour_eval, msp_consistency, msp_value, verify_h_max, QuadratureGrid};
use fctk::empirical::EmpiricalMeasure;
use fctk::fuss_catalan::FussCatalanDist;
use fctk::poly::{
    build_f, build_p, eval_bigfloat_with_cap, eval_exact, parse_rational, rescale_arg, ModelParams,
    DEFAULT_PRECISION_CAP,
};
use fctk::rmt::{moment_with_error, sample_trials};
use fctk::saddle::{rho, PhiCoordinate};
use fctk::table::{sig17, write_csv};
use fctk::zeros::{default_tol, isolate_zeros};
use fctk::{BigFloatValue, Error};

#[derive(Parser, Debug)]
#[command(
    name = "fctk",
    version,
    about = "Fuss-Catalan polynomials, their zeros and asymptotics"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long)]
    r: u32,
    /// Offsets nu_1..nu_r, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    nu: Vec<u32>,
    #[arg(long)]
    n: u32,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Error> {
        ModelParams::new(self.r, self.nu.clone(), self.n)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficients or values of F_n (or the monic P_n).
    Poly {
        #[command(flatten)]
        model: ModelArgs,
        /// Evaluate at this rational (`p/q` or decimal).
        #[arg(long)]
        eval_x: Option<String>,
        /// Use the argument n^r x.
        #[arg(long)]
        rescaled: bool,
        /// The monic P_n instead of F_n.
        #[arg(long)]
        monic: bool,
        /// Also report a big-float value with this many bits.
        #[arg(long)]
        bits: Option<u32>,
    },
    /// Enclosures of the zeros of F_n(n^r x).
    Zeros {
        #[command(flatten)]
        model: ModelArgs,
        /// Enclosure width (`p/q` or decimal).
        #[arg(long)]
        tol: Option<String>,
        /// Print only the KS distance to the Fuss-Catalan law.
        #[arg(long)]
        ks: bool,
    },
    /// The Fuss-Catalan distribution.
    Fc {
        #[command(subcommand)]
        action: FcAction,
    },
    /// Normalized polynomial against the cosine approximant on an angle window.
    Fig1 {
        #[arg(long, default_value_t = 3)]
        r: u32,
        #[arg(long, value_delimiter = ',', default_value = "2,4,5")]
        nu: Vec<u32>,
        #[arg(long, default_value_t = 150)]
        n: u32,
        #[arg(long, default_value_t = 0.5 * PI / 4.0)]
        phi_lo: f64,
        #[arg(long, default_value_t = 0.55 * PI / 4.0)]
        phi_hi: f64,
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
    /// Independent numerical checks.
    Oracle {
        #[command(subcommand)]
        check: OracleCheck,
    },
    /// Random-matrix simulation summary.
    Rmt {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the pooled values, one per line.
        #[arg(long)]
        spectra: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct TableArgs {
    /// A single point.
    #[arg(long, conflicts_with_all = ["from", "to"])]
    x: Option<f64>,
    #[arg(long, requires = "to")]
    from: Option<f64>,
    #[arg(long, requires = "from")]
    to: Option<f64>,
    #[arg(long, default_value_t = 101)]
    points: usize,
}

#[derive(Subcommand, Debug)]
enum FcAction {
    Density {
        #[arg(long)]
        r: u32,
        #[command(flatten)]
        table: TableArgs,
    },
    Cdf {
        #[arg(long)]
        r: u32,
        #[command(flatten)]
        table: TableArgs,
    },
    Quantile {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        p: f64,
    },
    /// Exact and quadrature moment of order k.
    Moment {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: u32,
    },
    Sample {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Both sides of the binomial integral identity of order k.
    Identity {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCheck {
    /// Trapezoid evaluation of the torus integral against the exact value.
    Contour {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 256)]
        m: usize,
    },
    /// Two-saddle approximation and its agreement with the asymptotic formula.
    Msp {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        phi: f64,
    },
    /// Grid maximum of |exp(-p)|.
    Hmax {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value_t = 256)]
        m: usize,
    },
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Out = Box<dyn Write>;

/// Output opened on first use, so a run rejected during validation leaves
/// no file behind.
struct LazyOut {
    path: Option<PathBuf>,
    inner: Option<Out>,
}

impl LazyOut {
    fn get(&mut self) -> io::Result<&mut Out> {
        if self.inner.is_none() {
            let w: Out = match &self.path {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(BufWriter::new(io::stdout())),
            };
            self.inner = Some(w);
        }
        Ok(self.inner.as_mut().expect("just opened"))
    }

    fn finish(&mut self) -> io::Result<()> {
        match self.inner.as_mut() {
            Some(w) => w.flush(),
            None => Ok(()),
        }
    }
}

fn write_json<T: Serialize>(out: &mut Out, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)
}

fn precision_cap() -> Result<u32, Error> {
    match std::env::var("FCTK_PRECISION_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("FCTK_PRECISION_CAP={v:?} is not a bit count"))),
        Err(_) => Ok(DEFAULT_PRECISION_CAP),
    }
}

fn clamp_phi(r: u32, phi: f64) -> Result<PhiCoordinate, Error> {
    let (c, moved) = PhiCoordinate::clamped(r, phi)?;
    if moved {
        eprintln!("note: phi = {phi} clamped to {}", c.phi());
    }
    Ok(c)
}

fn grid_points(t: &TableArgs) -> Result<Vec<f64>, Error> {
    match (t.x, t.from, t.to) {
        (Some(x), _, _) => Ok(vec![x]),
        (None, Some(a), Some(b)) => {
            if t.points < 2 || a.is_nan() || b.is_nan() || a >= b {
                return Err(Error::Domain(format!(
                    "need from < to and at least 2 points, got [{a}, {b}] with {}",
                    t.points
                )));
            }
            let step = (b - a) / (t.points - 1) as f64;
            Ok((0..t.points)
                .map(|k| {
                    if k + 1 == t.points {
                        b
                    } else {
                        a + step * k as f64
                    }
                })
                .collect())
        }
        _ => Err(Error::Domain("give --x or --from/--to".into())),
    }
}

#[derive(Serialize)]
struct PolyValue {
    x: String,
    value: String,
    approx: String,
}

#[derive(Serialize)]
struct ZeroRow {
    index: usize,
    lo: f64,
    hi: f64,
    mid: f64,
}

#[derive(Serialize)]
struct XValue {
    x: f64,
    value: f64,
}

#[derive(Serialize)]
struct MomentReport {
    r: u32,
    k: u32,
    exact: String,
    quadrature: f64,
}

#[derive(Serialize)]
struct IdentityReport {
    r: u32,
    k: u32,
    lhs: f64,
    rhs: String,
}

#[derive(Serialize)]
struct ContourReport {
    x: f64,
    m: usize,
    contour: f64,
    exact: f64,
    rel_error: f64,
    imag: f64,
    scale: f64,
}

#[derive(Serialize)]
struct MspReport {
    phi: f64,
    x: f64,
    log_amplitude: f64,
    phase: f64,
    value: f64,
    pr_discrepancy: f64,
}

#[derive(Serialize)]
struct HmaxReport {
    phi: f64,
    m: usize,
    argmax: Vec<f64>,
    distance: f64,
    cell: f64,
    within_cell: bool,
}

#[derive(Serialize)]
struct MomentSummary {
    k: u32,
    empirical: f64,
    std_error: f64,
    exact: f64,
}

#[derive(Serialize)]
struct RmtSummary {
    r: u32,
    nu: Vec<u32>,
    n: u32,
    trials: usize,
    seed: u64,
    ks: f64,
    moments: Vec<MomentSummary>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::InvalidParams("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
    }
    let json = cli.format == Format::Json;
    let mut sink = LazyOut {
        path: cli.out.clone(),
        inner: None,
    };
    macro_rules! out {
        () => {
            sink.get()?
        };
    }

    match cli.command {
        Command::Poly {
            model,
            eval_x,
            rescaled,
            monic,
            bits,
        } => {
            let params = model.params()?;
            let mut poly = if monic {
                build_p(&params)
            } else {
                build_f(&params)
            };
            if rescaled {
                poly = rescale_arg(&poly, &params);
            }
            match eval_x {
                None => {
                    if json {
                        write_json(out!(), &poly.to_document(&params))?;
                    } else {
                        let rows: Vec<Vec<String>> = poly
                            .coeffs()
                            .iter()
                            .enumerate()
                            .map(|(k, c)| vec![k.to_string(), c.to_string()])
                            .collect();
                        write_csv(out!(), &["k", "coeff"], &rows)?;
                    }
                }
                Some(xs) => {
                    let x = parse_rational(&xs)?;
                    let exact = eval_exact(&poly, &x);
                    let approx = match bits {
                        Some(b) => {
                            let xf = BigFloatValue::from_rational(&x, b.max(64));
                            eval_bigfloat_with_cap(&poly, &xf, b, precision_cap()?)?.to_string()
                        }
                        None => sig17(exact.to_f64().unwrap_or(f64::NAN)),
                    };
                    let row = PolyValue {
                        x: x.to_string(),
                        value: exact.to_string(),
                        approx,
                    };
                    if json {
                        write_json(out!(), &row)?;
                    } else {
                        write_csv(
                            out!(),
                            &["x", "value", "approx"],
                            &[vec![row.x, row.value, row.approx]],
                        )?;
                    }
                }
            }
        }
        Command::Zeros { model, tol, ks } => {
            let params = model.params()?;
            let tol = match tol {
                Some(t) => parse_rational(&t)?,
                None => default_tol(),
            };
            let poly = rescale_arg(&build_f(&params), &params);
            let zeros = isolate_zeros(&poly, &tol)?;
            if ks {
                let d = FussCatalanDist::new(params.r())?;
                let m = EmpiricalMeasure::new(zeros.iter().map(|z| z.midpoint_f64()).collect());
                let value = m.ks_distance(|x| d.cdf(x));
                if json {
                    write_json(out!(), &serde_json::json!({ "ks": value }))?;
                } else {
                    writeln!(out!(), "{}", sig17(value))?;
                }
            } else {
                let rows: Vec<ZeroRow> = zeros
                    .iter()
                    .enumerate()
                    .map(|(i, z)| ZeroRow {
                        index: i,
                        lo: z.lo.to_f64().unwrap_or(f64::NAN),
                        hi: z.hi.to_f64().unwrap_or(f64::NAN),
                        mid: z.midpoint_f64(),
                    })
                    .collect();
                if json {
                    write_json(out!(), &rows)?;
                } else {
                    let rows: Vec<Vec<String>> = rows
                        .iter()
                        .map(|z| vec![z.index.to_string(), sig17(z.lo), sig17(z.hi), sig17(z.mid)])
                        .collect();
                    write_csv(out!(), &["index", "lo", "hi", "mid"], &rows)?;
                }
            }
        }
        Command::Fc { action } => run_fc(action, json, &mut sink)?,
        Command::Fig1 {
            r,
            nu,
            n,
            phi_lo,
            phi_hi,
            count,
        } => {
            let params = ModelParams::new(r, nu, n)?;
            let rows = fig1_dataset(&params, phi_lo, phi_hi, count)?;
            if json {
                let v: Vec<_> = rows
                    .iter()
                    .map(
                        |r| serde_json::json!({ "phi": r.phi, "F_tilde": r.f_tilde, "c_n": r.c_n }),
                    )
                    .collect();
                write_json(out!(), &v)?;
            } else {
                let rows: Vec<Vec<String>> = rows.iter().map(|r| r.csv_fields()).collect();
                write_csv(out!(), &FIG1_HEADER, &rows)?;
            }
        }
        Command::Oracle { check } => match check {
            OracleCheck::Contour { model, x, m } => {
                let params = model.params()?;
                let grid = QuadratureGrid::new(params.r(), m)?;
                let xq = num_rational::BigRational::from_float(x)
                    .ok_or_else(|| Error::Domain(format!("x = {x} is not finite")))?;
                let v = contour_eval(&params, x, &grid)?;
                let exact = eval_exact(&rescale_arg(&build_f(&params), &params), &xq)
                    .to_f64()
                    .unwrap_or(f64::NAN);
                let report = ContourReport {
                    x,
                    m,
                    contour: v.value,
                    exact,
                    rel_error: (v.value - exact).abs() / exact.abs(),
                    imag: v.imag,
                    scale: v.scale,
                };
                write_json(out!(), &report)?;
            }
            OracleCheck::Msp { model, phi } => {
                let params = model.params()?;
                let c = clamp_phi(params.r(), phi)?;
                let v = msp_value(&params, &c)?;
                let report = MspReport {
                    phi: c.phi(),
                    x: rho(&c),
                    log_amplitude: v.log_amplitude,
                    phase: v.phase,
                    value: v.value(),
                    pr_discrepancy: msp_consistency(&params, &c)?,
                };
                write_json(out!(), &report)?;
            }
            OracleCheck::Hmax { r, phi, m } => {
                let c = clamp_phi(r, phi)?;
                let h = verify_h_max(&c, m)?;
                let report = HmaxReport {
                    phi: c.phi(),
                    m,
                    within_cell: h.distance <= h.cell,
                    argmax: h.argmax,
                    distance: h.distance,
                    cell: h.cell,
                };
                write_json(out!(), &report)?;
            }
        },
        Command::Rmt {
            model,
            trials,
            seed,
            spectra,
        } => {
            let params = model.params()?;
            let d = FussCatalanDist::new(params.r())?;
            let samples = sample_trials(&params, trials, seed)?;
            let pooled = EmpiricalMeasure::new(
                samples
                    .iter()
                    .flat_map(|s| s.values.iter().copied())
                    .collect(),
            );
            let moments = (1..=3)
                .map(|k| {
                    let (empirical, std_error) = moment_with_error(&samples, k);
                    MomentSummary {
                        k,
                        empirical,
                        std_error,
                        exact: d.moment_exact(k).to_f64().unwrap_or(f64::NAN),
                    }
                })
                .collect();
            let summary = RmtSummary {
                r: params.r(),
                nu: params.nu().to_vec(),
                n: params.n(),
                trials,
                seed,
                ks: pooled.ks_distance(|x| d.cdf(x)),
                moments,
            };
            if let Some(path) = spectra {
                let mut w = BufWriter::new(File::create(path)?);
                for v in pooled.points() {
                    writeln!(w, "{}", sig17(*v))?;
                }
                w.flush()?;
            }
            write_json(out!(), &summary)?;
        }
    }
    sink.finish()?;
    Ok(())
}

fn run_fc(action: FcAction, json: bool, sink: &mut LazyOut) -> Result<(), Failure> {
    let table = |d: &FussCatalanDist, t: &TableArgs, f: &dyn Fn(&FussCatalanDist, f64) -> f64| {
        grid_points(t).map(|xs| {
            xs.into_iter()
                .map(|x| XValue { x, value: f(d, x) })
                .collect::<Vec<_>>()
        })
    };
    let emit_table = |rows: Vec<XValue>, out: &mut Out| -> io::Result<()> {
        if json {
            write_json(out, &rows)
        } else {
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![sig17(r.x), sig17(r.value)])
                .collect();
            write_csv(out, &["x", "value"], &rows)
        }
    };
    match action {
        FcAction::Density { r, table: t } => {
            let d = FussCatalanDist::new(r)?;
            let rows = table(&d, &t, &|d, x| d.density_x(x))?;
            emit_table(rows, sink.get()?)?;
        }
        FcAction::Cdf { r, table: t } => {
            let d = FussCatalanDist::new(r)?;
            let rows = table(&d, &t, &|d, x| d.cdf(x))?;
            emit_table(rows, sink.get()?)?;
        }
        FcAction::Quantile { r, p } => {
            let d = FussCatalanDist::new(r)?;
            let x = d.quantile(p)?;
            let out = sink.get()?;
            if json {
                write_json(out, &serde_json::json!({ "p": p, "value": x }))?;
            } else {
                write_csv(out, &["p", "value"], &[vec![sig17(p), sig17(x)]])?;
            }
        }
        FcAction::Moment { r, k } => {
            let d = FussCatalanDist::new(r)?;
            let report = MomentReport {
                r,
                k,
                exact: d.moment_exact(k).to_string(),
                quadrature: d.moment_quadrature(k)?,
            };
            let out = sink.get()?;
            if json {
                write_json(out, &report)?;
            } else {
                write_csv(
                    out,
                    &["k", "exact", "quadrature"],
                    &[vec![k.to_string(), report.exact, sig17(report.quadrature)]],
                )?;
            }
        }
        FcAction::Sample { r, count, seed } => {
            let d = FussCatalanDist::new(r)?;
            let draws = d.sample(count, seed);
            let out = sink.get()?;
            if json {
                write_json(out, &draws)?;
            } else {
                for x in draws {
                    writeln!(out, "{}", sig17(x))?;
                }
            }
        }
        FcAction::Identity { r, k } => {
            let d = FussCatalanDist::new(r)?;
            let (lhs, rhs) = d.identity_check(k)?;
            let report = IdentityReport {
                r,
                k,
                lhs,
                rhs: rhs.to_string(),
            };
            let out = sink.get()?;
            if json {
                write_json(out, &report)?;
            } else {
                write_csv(
                    out,
                    &["k", "lhs", "rhs"],
                    &[vec![k.to_string(), sig17(lhs), report.rhs]],
                )?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.kind(), "message": e.to_string() })
            );
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
        // a closed downstream pipe (`fctk fig1 | head`) is not a failure
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": "IoError", "message": e.to_string() })
            );
            ExitCode::from(1)
        }
    }
}
