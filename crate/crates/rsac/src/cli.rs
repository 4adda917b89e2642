//! Command-line surface: argument parsing, table acquisition, and
//! machine-readable output.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
//! 3 capacity, 4 quadrature convergence failure. Data goes to stdout,
//! diagnostics to stderr, and identical invocations produce byte-identical
//! stdout.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytic::{self, QuadratureSpec};
use crate::bias;
use crate::coefficients;
use crate::counting::{self, ClassConstraint, CountReport, RatioParam};
use crate::error::{Error, Result};
use crate::sieve::{PrimeTables, TablesBuilder};

/// Relative-residual threshold for the `verify` command.
pub const VERIFY_THRESHOLD: f64 = 1e-6;

/// JSON schema tag emitted by every command.
pub const SCHEMA: &str = "rsac/1";

#[derive(Debug, Parser)]
#[command(
    name = "rsac",
    about = "Counting toolkit for products of two proportional primes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Output format (default: csv; table1 defaults to plain text)
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Sieve limit override (default: smallest limit the command needs)
    #[arg(long, global = true)]
    sieve_limit: Option<u64>,

    /// Worker threads for table construction (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    /// Table cache file; RSAC_CACHE in the environment overrides this
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact count at one point, with the analytic main term and series
    Count {
        #[arg(long)]
        x: u64,
        /// Proportionality bound as an exact rational "num/den"
        #[arg(long)]
        r: RatioParam,
        /// Class constraint "a:d" on the smaller prime
        #[arg(long, default_value = "0:1")]
        c1: ClassConstraint,
        /// Class constraint "a:d" on the larger prime
        #[arg(long, default_value = "0:1")]
        c2: ClassConstraint,
        /// Extra series truncation order beyond the default 2, 4, 6
        #[arg(long)]
        n: Option<u32>,
    },
    /// The first ten expansion polynomials
    Table1,
    /// Exact rational coefficients of one expansion polynomial
    Coeffs {
        #[arg(long)]
        k: u32,
    },
    /// Evaluate the logarithmic-integral variant at one point
    Fr {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        r: RatioParam,
    },
    /// Bias ratios: classical semiprime ratio, or the proportional-pair
    /// ratio when --r is given
    Bias {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        r: Option<RatioParam>,
        #[arg(long)]
        c1: Option<ClassConstraint>,
        #[arg(long)]
        c2: Option<ClassConstraint>,
    },
    /// Race two class pairs over a geometric grid
    Race {
        /// Modulus for the default class pairs (3,3) vs (1,1)
        #[arg(long)]
        d: u64,
        #[arg(long)]
        r: RatioParam,
        /// Geometric grid "lo:hi:points"
        #[arg(long)]
        grid: GridSpec,
        /// First class pair "a1:a2" (classes mod d for p and q)
        #[arg(long)]
        pair1: Option<String>,
        /// Second class pair "a1:a2"
        #[arg(long)]
        pair2: Option<String>,
    },
    /// Run an identity suite; exits 1 if any residual exceeds 1e-6
    Verify {
        #[arg(long, default_value = "identities")]
        suite: String,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        r: RatioParam,
    },
}

/// Validated run configuration shared by all commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sieve_limit: Option<u64>,
    pub moduli: Vec<u64>,
    pub quadrature: QuadratureSpec,
    pub threads: usize,
    pub cache_path: Option<PathBuf>,
}

impl RunConfig {
    fn from_args(args: &RunArgs) -> Result<RunConfig> {
        let threads = match args.threads {
            Some(t) => t as usize,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let cache_path = match std::env::var_os("RSAC_CACHE") {
            Some(p) => Some(PathBuf::from(p)),
            None => args.cache.clone(),
        };
        let quadrature = QuadratureSpec::default();
        quadrature.validate()?;
        Ok(RunConfig {
            sieve_limit: args.sieve_limit,
            moduli: Vec::new(),
            quadrature,
            threads,
            cache_path,
        })
    }

    /// Build or load tables covering `needed_limit` and `self.moduli`.
    fn tables(&self, needed_limit: u64) -> Result<PrimeTables> {
        let limit = self.sieve_limit.unwrap_or(needed_limit).max(2);
        if let Some(path) = &self.cache_path {
            if let Ok(t) = PrimeTables::load_cache(path) {
                let has_moduli = self
                    .moduli
                    .iter()
                    .all(|d| *d == 1 || t.moduli().contains(d));
                if t.limit() >= limit && has_moduli {
                    return Ok(t);
                }
            }
            let t = self.build(limit)?;
            t.save_cache(path)?;
            Ok(t)
        } else {
            self.build(limit)
        }
    }

    fn build(&self, limit: u64) -> Result<PrimeTables> {
        TablesBuilder::new(limit)
            .moduli(&self.moduli)
            .threads(self.threads)
            .build()
    }
}

/// Geometric grid request `lo:hi:points`; accepts scientific notation.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub lo: u64,
    pub hi: u64,
    pub points: u32,
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidParam(format!(
                "grid {s:?} is not lo:hi:points"
            )));
        }
        let parse = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParam(format!("bad grid component {t:?}")))
        };
        let lo = parse(parts[0])?;
        let hi = parse(parts[1])?;
        let points = parse(parts[2])?;
        if !(lo >= 1.0 && hi >= lo && (1.0..=1e6).contains(&points)) {
            return Err(Error::InvalidParam(format!("grid {s:?} out of range")));
        }
        Ok(GridSpec {
            lo: lo.round() as u64,
            hi: hi.round() as u64,
            points: points.round() as u32,
        })
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cfg = match RunConfig::from_args(&cli.run) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("rsac: {e}");
            return e.exit_code();
        }
    };
    let format = cli.run.format;
    match dispatch(cli.command, cfg, format) {
        Ok((payload, code)) => {
            print!("{payload}");
            code
        }
        Err(e) => {
            eprintln!("rsac: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(
    command: Command,
    mut cfg: RunConfig,
    format: Option<OutputFormat>,
) -> Result<(String, i32)> {
    match command {
        Command::Count { x, r, c1, c2, n } => {
            cfg.moduli = vec![c1.d(), c2.d()];
            let tables = cfg.tables(r.sqrt_rx_floor(x))?;
            let mut report = CountReport::compute(&tables, x, r, c1, c2, &cfg.quadrature)?;
            if let Some(n) = n {
                let s = coefficients::series_eval(x as f64, r.as_f64(), n)?;
                report.series_values.insert(n, s);
                if s > 0.0 {
                    let scale = (bias::euler_phi(c1.d()) * bias::euler_phi(c2.d())) as f64;
                    report
                        .deviations
                        .insert(format!("series_{n}"), scale * report.exact as f64 / s - 1.0);
                }
            }
            let row = CountRow::from_report(&report);
            Ok((
                render(&[row], format.unwrap_or(OutputFormat::Csv), "count"),
                0,
            ))
        }
        Command::Table1 => {
            let rows: Vec<CoeffRow> = coefficients::table1().iter().flat_map(coeff_rows).collect();
            match format {
                None => Ok((coefficients::table1_text(), 0)),
                Some(f) => Ok((render(&rows, f, "table1"), 0)),
            }
        }
        Command::Coeffs { k } => {
            let poly = coefficients::ak_polynomial(k)?;
            let rows = coeff_rows(&poly);
            Ok((
                render(&rows, format.unwrap_or(OutputFormat::Csv), "coeffs"),
                0,
            ))
        }
        Command::Fr { x, r } => {
            let fr = analytic::f_r(x as f64, r, &cfg.quadrature)?;
            let row = FrRow {
                x,
                r: r.to_string(),
                fr,
            };
            Ok((render(&[row], format.unwrap_or(OutputFormat::Csv), "fr"), 0))
        }
        Command::Bias { x, r, c1, c2 } => {
            let fmt = format.unwrap_or(OutputFormat::Csv);
            match r {
                None => {
                    if c1.is_some() || c2.is_some() {
                        return Err(Error::InvalidParam(
                            "class constraints on bias require --r".into(),
                        ));
                    }
                    cfg.moduli = vec![4];
                    let tables = cfg.tables(x / 3)?;
                    let ratio = bias::dummit_ratio(&tables, x)?;
                    let all = ClassConstraint::all();
                    let c34 = ClassConstraint::new(3, 4)?;
                    let row = DummitRow {
                        x,
                        pairs_33_mod4: counting::count_semiprime_pairs(
                            &tables, x, c34, c34, false,
                        )?,
                        odd_pairs: counting::count_semiprime_pairs(&tables, x, all, all, true)?,
                        ratio,
                        expected_ratio: 1.0 + bias::BETA / (x as f64).ln().ln(),
                    };
                    Ok((render(&[row], fmt, "bias"), 0))
                }
                Some(r) => {
                    let c1 = c1.unwrap_or(ClassConstraint::new(3, 4)?);
                    let c2 = c2.unwrap_or(ClassConstraint::new(3, 4)?);
                    cfg.moduli = vec![c1.d(), c2.d()];
                    let tables = cfg.tables(r.sqrt_rx_floor(x))?;
                    let restricted = counting::count_rsa_classes(&tables, x, r, c1, c2)?;
                    let total = counting::count_rsa_decomposed(&tables, x, r)?;
                    let ratio = bias::rsa_bias_ratio(&tables, x, r, c1, c2)?;
                    let row = RsaBiasRow {
                        x,
                        r: r.to_string(),
                        c1: c1.to_string(),
                        c2: c2.to_string(),
                        restricted,
                        total,
                        phi_scale: bias::euler_phi(c1.d()) * bias::euler_phi(c2.d()),
                        ratio,
                    };
                    Ok((render(&[row], fmt, "bias"), 0))
                }
            }
        }
        Command::Race {
            d,
            r,
            grid,
            pair1,
            pair2,
        } => {
            let parse_pair = |s: Option<String>, default: (u64, u64)| -> Result<bias::ClassPair> {
                let (a1, a2) = match s {
                    None => default,
                    Some(s) => {
                        let (a, b) = s.split_once(':').ok_or_else(|| {
                            Error::InvalidParam(format!("pair {s:?} is not a1:a2"))
                        })?;
                        let a = a
                            .trim()
                            .parse::<u64>()
                            .map_err(|_| Error::InvalidParam(format!("bad pair {s:?}")))?;
                        let b = b
                            .trim()
                            .parse::<u64>()
                            .map_err(|_| Error::InvalidParam(format!("bad pair {s:?}")))?;
                        (a, b)
                    }
                };
                Ok((ClassConstraint::new(a1, d)?, ClassConstraint::new(a2, d)?))
            };
            if d < 4 && (pair1.is_none() || pair2.is_none()) {
                return Err(Error::InvalidParam(
                    "default race pairs need d >= 4; pass --pair1/--pair2".into(),
                ));
            }
            let p1 = parse_pair(pair1, (3, 3))?;
            let p2 = parse_pair(pair2, (1, 1))?;
            cfg.moduli = vec![d];
            let tables = cfg.tables(r.sqrt_rx_floor(grid.hi))?;
            let xs = bias::geometric_grid(grid.lo, grid.hi, grid.points)?;
            let records = bias::race(&tables, r, p1, p2, &xs)?;
            let rows: Vec<RaceRow> = records.iter().map(RaceRow::from_record).collect();
            Ok((
                render(&rows, format.unwrap_or(OutputFormat::Csv), "race"),
                0,
            ))
        }
        Command::Verify { suite, x, r } => {
            if suite != "identities" {
                return Err(Error::InvalidParam(format!(
                    "unknown verify suite {suite:?} (available: identities)"
                )));
            }
            let rows = run_identity_suite(&mut cfg, x, r)?;
            let failed = rows.iter().any(|row| row.status == "FAIL");
            Ok((
                render(&rows, format.unwrap_or(OutputFormat::Csv), "verify"),
                if failed { 1 } else { 0 },
            ))
        }
    }
}

/// The identity suite: the two partial-summation identities for the
/// all-primes and 3 mod 4 constraints, the half-Li-squared closed form,
/// and the derivative closed form against a central finite difference.
fn run_identity_suite(cfg: &mut RunConfig, x: u64, r: RatioParam) -> Result<Vec<VerifyRow>> {
    cfg.moduli = vec![4];
    let tables = cfg.tables(counting::isqrt(x))?;
    let mut rows = Vec::new();
    let all = ClassConstraint::all();
    let c34 = ClassConstraint::new(3, 4)?;
    for (s1, label) in [(all, "0:1"), (c34, "3:4")] {
        let residuals = analytic::verify_summation_identities(&tables, x, r, s1, &cfg.quadrature)?;
        for res in residuals {
            // the half-Li-squared identity is class-independent: report once
            if res.identity_label == "half_li_squared" && label != "0:1" {
                continue;
            }
            let s1_col = if res.identity_label == "half_li_squared" {
                "-".to_string()
            } else {
                label.to_string()
            };
            rows.push(VerifyRow::from_residual(&res, s1_col, x, r));
        }
    }

    // derivative closed form vs central finite difference of the
    // antiderivative expression, valid from 4r upward
    let xf = x as f64;
    if xf >= 4.0 * r.as_f64() {
        let spec = QuadratureSpec {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_subdivisions: 60,
        };
        let h = 5e-4 * xf;
        let fd = (analytic::g_r(xf + h, r, &spec)? - analytic::g_r(xf - h, r, &spec)?) / (2.0 * h);
        let cl = analytic::gr_derivative(xf, r)?;
        let abs = (fd - cl).abs();
        let rel = abs / fd.abs().max(1.0);
        rows.push(VerifyRow {
            identity: "derivative_closed_form".into(),
            s1: "-".into(),
            x,
            r: r.to_string(),
            lhs: fd,
            rhs: cl,
            abs_residual: abs,
            rel_residual: rel,
            status: if rel <= VERIFY_THRESHOLD {
                "PASS"
            } else {
                "FAIL"
            }
            .into(),
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Output rows. Each row type defines its CSV header and cells; JSON output
// mirrors the same fields one-to-one.

trait CsvRow: Serialize {
    fn header(&self) -> String;
    fn cells(&self) -> Vec<String>;
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn render<R: CsvRow>(rows: &[R], format: OutputFormat, command: &str) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = rows.first().map(|r| r.header()).unwrap_or_default();
            out.push('\n');
            for row in rows {
                out.push_str(&row.cells().join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Envelope<'a, R: Serialize> {
                schema: &'static str,
                command: &'a str,
                rows: &'a [R],
            }
            let env = Envelope {
                schema: SCHEMA,
                command,
                rows,
            };
            let mut out = serde_json::to_string(&env).expect("serializable rows");
            out.push('\n');
            out
        }
    }
}

#[derive(Debug, Serialize)]
struct CountRow {
    x: u64,
    r: String,
    c1: String,
    c2: String,
    exact: u64,
    fr: Option<f64>,
    series: std::collections::BTreeMap<u32, f64>,
    deviations: std::collections::BTreeMap<String, f64>,
}

impl CountRow {
    fn from_report(rep: &CountReport) -> CountRow {
        CountRow {
            x: rep.x,
            r: rep.r.to_string(),
            c1: rep.c1.to_string(),
            c2: rep.c2.to_string(),
            exact: rep.exact,
            fr: rep.fr_value,
            series: rep.series_values.clone(),
            deviations: rep.deviations.clone(),
        }
    }
}

impl CsvRow for CountRow {
    fn header(&self) -> String {
        let mut cols = vec![
            "x".to_string(),
            "r".to_string(),
            "c1".to_string(),
            "c2".to_string(),
            "exact".to_string(),
            "fr".to_string(),
        ];
        cols.extend(self.series.keys().map(|n| format!("series_{n}")));
        cols.extend(self.deviations.keys().map(|l| format!("dev_{l}")));
        cols.join(",")
    }
    fn cells(&self) -> Vec<String> {
        let mut cells = vec![
            self.x.to_string(),
            self.r.clone(),
            self.c1.clone(),
            self.c2.clone(),
            self.exact.to_string(),
            opt_cell(self.fr),
        ];
        cells.extend(self.series.values().map(|v| v.to_string()));
        cells.extend(self.deviations.values().map(|v| v.to_string()));
        cells
    }
}

#[derive(Debug, Serialize)]
struct CoeffRow {
    k: u32,
    j: u32,
    numerator: String,
    denominator: String,
}

fn coeff_rows(poly: &coefficients::AkPolynomial) -> Vec<CoeffRow> {
    poly.coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| CoeffRow {
            k: poly.k(),
            j: i as u32 + 1,
            numerator: c.numer().to_string(),
            denominator: c.denom().to_string(),
        })
        .collect()
}

impl CsvRow for CoeffRow {
    fn header(&self) -> String {
        "k,j,numerator,denominator".to_string()
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            self.j.to_string(),
            self.numerator.clone(),
            self.denominator.clone(),
        ]
    }
}

#[derive(Debug, Serialize)]
struct FrRow {
    x: u64,
    r: String,
    fr: f64,
}

impl CsvRow for FrRow {
    fn header(&self) -> String {
        "x,r,fr".to_string()
    }
    fn cells(&self) -> Vec<String> {
        vec![self.x.to_string(), self.r.clone(), self.fr.to_string()]
    }
}

#[derive(Debug, Serialize)]
struct DummitRow {
    x: u64,
    pairs_33_mod4: u64,
    odd_pairs: u64,
    ratio: f64,
    /// Annotation only: the documented expectation 1 + beta / log log x.
    expected_ratio: f64,
}

impl CsvRow for DummitRow {
    fn header(&self) -> String {
        "x,pairs_33_mod4,odd_pairs,ratio,expected_ratio".to_string()
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.x.to_string(),
            self.pairs_33_mod4.to_string(),
            self.odd_pairs.to_string(),
            self.ratio.to_string(),
            self.expected_ratio.to_string(),
        ]
    }
}

#[derive(Debug, Serialize)]
struct RsaBiasRow {
    x: u64,
    r: String,
    c1: String,
    c2: String,
    restricted: u64,
    total: u64,
    phi_scale: u64,
    ratio: f64,
}

impl CsvRow for RsaBiasRow {
    fn header(&self) -> String {
        "x,r,c1,c2,restricted,total,phi_scale,ratio".to_string()
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.x.to_string(),
            self.r.clone(),
            self.c1.clone(),
            self.c2.clone(),
            self.restricted.to_string(),
            self.total.to_string(),
            self.phi_scale.to_string(),
            self.ratio.to_string(),
        ]
    }
}

#[derive(Debug, Serialize)]
struct RaceRow {
    x: u64,
    count_pair1: u64,
    count_pair2: u64,
    lead: i64,
    lead_fraction: f64,
}

impl RaceRow {
    fn from_record(rec: &bias::RaceRecord) -> RaceRow {
        RaceRow {
            x: rec.x,
            count_pair1: rec.count_pair1,
            count_pair2: rec.count_pair2,
            lead: rec.lead,
            lead_fraction: rec.cumulative_lead_fraction,
        }
    }
}

impl CsvRow for RaceRow {
    fn header(&self) -> String {
        "x,count_pair1,count_pair2,lead,lead_fraction".to_string()
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.x.to_string(),
            self.count_pair1.to_string(),
            self.count_pair2.to_string(),
            self.lead.to_string(),
            self.lead_fraction.to_string(),
        ]
    }
}

#[derive(Debug, Serialize)]
struct VerifyRow {
    identity: String,
    s1: String,
    x: u64,
    r: String,
    lhs: f64,
    rhs: f64,
    abs_residual: f64,
    rel_residual: f64,
    status: String,
}

impl VerifyRow {
    fn from_residual(
        res: &analytic::IdentityResidual,
        s1: String,
        x: u64,
        r: RatioParam,
    ) -> VerifyRow {
        VerifyRow {
            identity: res.identity_label.clone(),
            s1,
            x,
            r: r.to_string(),
            lhs: res.lhs,
            rhs: res.rhs,
            abs_residual: res.abs_residual,
            rel_residual: res.rel_residual,
            status: if res.rel_residual <= VERIFY_THRESHOLD {
                "PASS"
            } else {
                "FAIL"
            }
            .into(),
        }
    }
}

impl CsvRow for VerifyRow {
    fn header(&self) -> String {
        "identity,s1,x,r,lhs,rhs,abs_residual,rel_residual,status".to_string()
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.identity.clone(),
            self.s1.clone(),
            self.x.to_string(),
            self.r.clone(),
            self.lhs.to_string(),
            self.rhs.to_string(),
            self.abs_residual.to_string(),
            self.rel_residual.to_string(),
            self.status.clone(),
        ]
    }
}
