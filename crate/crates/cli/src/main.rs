//! jordan-orbits command-line harness.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;

use jordan_orbits::cayley::{cayley_fd_report, cayley_symbolic_report};
use jordan_orbits::config::{parse_levi, Config, MatrixLiteral};
use jordan_orbits::measures::{check_equivariance, gaussian, polar_ratio_check, polar_scaling_check};
use jordan_orbits::models::{frame, LeviElement};
use jordan_orbits::rankk::{l2_certificate_report, rankk_fourier_check, stability_restriction_check};
use jordan_orbits::registry::{list_cases, lookup_case, CaseDescriptor};
use jordan_orbits::report::{emit_report, exit_code, Format};
use jordan_orbits::spherical::{bessel_selftest, phi_l2_verdict, rank1_fourier_check, SphericalParams};
use jordan_orbits::suite::{run_suite, suite_mode, FOURIER_SPREAD_TOL, RANDOM_LEVI_SPREAD};
use jordan_orbits::{AlgebraElement, Mode, PolarMeasure, QuadratureSpec, VerificationReport};

#[derive(Parser)]
#[command(name = "jordan-orbits", version, about = "Numerical checks on Jordan-algebra orbit measures")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with [global], [quadrature] and per-subcommand sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// json | csv | text
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Gauss-Legendre points per radial panel.
    #[arg(long, global = true)]
    quad_points: Option<usize>,
    #[arg(long, global = true)]
    angle_points: Option<usize>,
    #[arg(long, global = true)]
    mc_samples: Option<u64>,
    /// deterministic | monte_carlo | hybrid
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Comma-separated truncation radii.
    #[arg(long, global = true, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
}

#[derive(Args, Default)]
struct CaseOpts {
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// List the case table.
    Cases {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Polar formula: open-orbit ratios (k = n) or rank-k scaling (k < n).
    VerifyPolar {
        #[command(flatten)]
        case: CaseOpts,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Pushforward ratio of the rank-k measure against its character.
    VerifyEquivariance {
        #[command(flatten)]
        case: CaseOpts,
        #[arg(long)]
        k: Option<usize>,
        /// Levi element: one matrix literal, or a JSON array of two for pair models.
        #[arg(long)]
        levi: Option<String>,
        /// Number of random Levi elements when --levi is absent.
        #[arg(long)]
        random: Option<usize>,
    },
    /// L² verdict for Φ_t by growing truncations.
    PhiL2Scan {
        #[command(flatten)]
        case: CaseOpts,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
    },
    /// Bessel kernel against closed forms.
    BesselSelftest,
    /// Rank-one Fourier transform against Φ_{-d}; the origin is always included.
    Rank1Fourier {
        #[command(flatten)]
        case: CaseOpts,
        /// Matrix literal; repeatable.
        #[arg(long)]
        x: Vec<String>,
    },
    /// Rank-k Monte Carlo Fourier transform against the k-th power of rank one.
    RankkFourier {
        #[command(flatten)]
        case: CaseOpts,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        x: Option<String>,
    },
    /// Cayley identity on complex symmetric matrices.
    CayleyCheck {
        #[arg(long)]
        n: Option<usize>,
        /// Exponent for the finite-difference check.
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        /// Random points for the finite-difference check.
        #[arg(long)]
        points: Option<usize>,
        /// Largest integer exponent for the symbolic check.
        #[arg(long)]
        s_max: Option<u32>,
    },
    /// Exact exponent bookkeeping for the rank-k L² argument.
    L2Certificate {
        #[command(flatten)]
        case: CaseOpts,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Kernel agreement between a Peirce subalgebra and the whole algebra.
    StabilityCheck {
        #[command(flatten)]
        case: CaseOpts,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Every check for one case.
    Suite {
        #[command(flatten)]
        case: CaseOpts,
    },
}

impl Command {
    fn section(&self) -> &'static str {
        match self {
            Command::Cases { .. } => "cases",
            Command::VerifyPolar { .. } => "verify-polar",
            Command::VerifyEquivariance { .. } => "verify-equivariance",
            Command::PhiL2Scan { .. } => "phi-l2-scan",
            Command::BesselSelftest => "bessel-selftest",
            Command::Rank1Fourier { .. } => "rank1-fourier",
            Command::RankkFourier { .. } => "rankk-fourier",
            Command::CayleyCheck { .. } => "cayley-check",
            Command::L2Certificate { .. } => "l2-certificate",
            Command::StabilityCheck { .. } => "stability-check",
            Command::Suite { .. } => "suite",
        }
    }
}

/// Command line, then config section, then `[global]`.
struct Resolver<'a> {
    cfg: &'a Config,
    section: &'static str,
}

impl Resolver<'_> {
    fn get<T: DeserializeOwned>(&self, cli: Option<T>, key: &str) -> Result<Option<T>> {
        match cli {
            Some(v) => Ok(Some(v)),
            None => Ok(self.cfg.get(self.section, key)?),
        }
    }

    fn or<T: DeserializeOwned>(&self, cli: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.get(cli, key)?.unwrap_or(default))
    }

    fn case(&self, opts: &CaseOpts) -> Result<CaseDescriptor> {
        let id: String = self
            .get(opts.case.clone(), "case")?
            .ok_or_else(|| anyhow!("--case is required"))?;
        let n = self.or(opts.n, "n", 2)?;
        Ok(lookup_case(&id, n)?)
    }

    /// A matrix literal from the command line (JSON text) or the config
    /// (JSON text or an inline table).
    fn literal(&self, cli: Option<&String>, key: &str) -> Result<Option<serde_json::Value>> {
        if let Some(text) = cli {
            return Ok(Some(serde_json::from_str(text).with_context(|| format!("--{key}"))?));
        }
        Ok(match self.cfg.get::<serde_json::Value>(self.section, key)? {
            Some(serde_json::Value::String(s)) => Some(serde_json::from_str(&s).with_context(|| key.to_string())?),
            other => other,
        })
    }

    fn element(&self, case: &CaseDescriptor, v: serde_json::Value) -> Result<AlgebraElement<f64>> {
        let lit: MatrixLiteral = serde_json::from_value(v)?;
        Ok(lit.to_element(case)?)
    }
}

fn quadrature(global: &GlobalOpts, cfg: &Config, section: &str) -> Result<QuadratureSpec> {
    let mut q = cfg.quadrature(section)?;
    if let Some(v) = global.seed {
        q.seed = v;
    }
    if let Some(v) = global.quad_points {
        q.points_per_axis = v;
    }
    if let Some(v) = global.angle_points {
        q.angle_points = v;
    }
    if let Some(v) = global.mc_samples {
        q.mc_samples = v;
    }
    if let Some(m) = &global.mode {
        q.mode = m.parse::<Mode>()?;
    }
    if let Some(r) = &global.radii {
        q.truncation_radii = r.clone();
    }
    q.validate()?;
    Ok(q)
}

/// Hybrid mode pays grid cost times MC cost, so single checks resolve it
/// the way the suite does.
fn resolved(mut q: QuadratureSpec, case: &CaseDescriptor) -> QuadratureSpec {
    q.mode = suite_mode(case, &q);
    q
}

fn rank(res: &Resolver, cli: Option<usize>, case: &CaseDescriptor, default: usize) -> Result<usize> {
    let k = res.or(cli, "k", default)?;
    if k == 0 || k > case.n {
        bail!("k = {k} out of range for n = {}", case.n);
    }
    Ok(k)
}

fn cases_text(cases: &[CaseDescriptor]) -> String {
    let mut out = format!(
        "{:<10} {:<12} {:<10} {:<16} {:>2} {:>2} {:>2} {:>4} {:>3}  {}\n",
        "id", "group", "field", "model", "n", "d", "e", "dim", "r", "backend"
    );
    for c in cases {
        out.push_str(&format!(
            "{:<10} {:<12} {:<10} {:<16} {:>2} {:>2} {:>2} {:>4} {:>3}  {}\n",
            c.case_id.to_string(),
            c.group_name,
            format!("{:?}", c.base_field).to_lowercase(),
            format!("{:?}", c.model_kind).to_lowercase(),
            c.n,
            c.d,
            c.e,
            c.ambient_dim,
            c.r(),
            if c.backend_available { "yes" } else { "no" }
        ));
    }
    out
}

fn run(cli: &Cli, cfg: &Config) -> Result<(Vec<VerificationReport>, Option<String>)> {
    let section = cli.command.section();
    let res = Resolver { cfg, section };
    let quad = || quadrature(&cli.global, cfg, section);
    let reports = match &cli.command {
        Command::Cases { n } => {
            let mut cases = list_cases();
            if let Some(n) = res.get(*n, "n")? {
                cases = cases
                    .into_iter()
                    .filter_map(|c| match c.fixed_rank() {
                        Some(f) if f != n => None,
                        _ => lookup_case(&c.case_id.to_string(), n).ok(),
                    })
                    .collect();
            }
            let format = cli.global.format.clone().or(res.get(None, "format")?);
            let doc = match format.as_deref() {
                Some("json") => serde_json::to_string_pretty(&cases)? + "\n",
                Some("text") | None => cases_text(&cases),
                Some(other) => bail!("cases supports json or text, not `{other}`"),
            };
            return Ok((Vec::new(), Some(doc)));
        }
        Command::VerifyPolar { case, k } => {
            let case = res.case(case)?;
            let k = rank(&res, *k, &case, case.n)?;
            let q = resolved(quad()?, &case);
            if k == case.n {
                polar_ratio_check(&case, &q)?
            } else {
                vec![polar_scaling_check(&case, PolarMeasure::Rank(k), &q)?]
            }
        }
        Command::VerifyEquivariance { case, k, levi, random } => {
            let case = res.case(case)?;
            let k = rank(&res, *k, &case, 1)?;
            let q = resolved(quad()?, &case);
            let levis: Vec<LeviElement<f64>> = match res.literal(levi.as_ref(), "levi")? {
                Some(v) => vec![parse_levi(&case, &v.to_string())?],
                None => {
                    let count = res.or(*random, "random", 1)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(q.seed);
                    (0..count)
                        .map(|_| LeviElement::random(&case, RANDOM_LEVI_SPREAD, &mut rng))
                        .collect::<jordan_orbits::Result<_>>()?
                }
            };
            levis
                .iter()
                .map(|l| check_equivariance(&case, k, l, gaussian, &q))
                .collect::<jordan_orbits::Result<_>>()?
        }
        Command::PhiL2Scan { case, t } => {
            let case = res.case(case)?;
            let t = res.get(*t, "t")?.ok_or_else(|| anyhow!("--t is required"))?;
            vec![phi_l2_verdict(&SphericalParams { case, t }, &quad()?)?]
        }
        Command::BesselSelftest => bessel_selftest()?,
        Command::Rank1Fourier { case, x } => {
            let case = res.case(case)?;
            let q = resolved(quad()?, &case);
            let mut pts = vec![AlgebraElement::zeros(&case)?];
            if x.is_empty() {
                match res.literal(None, "x")? {
                    Some(v) => pts.push(res.element(&case, v)?),
                    None => {
                        let f = frame::<f64>(&case)?;
                        pts.push(f[0].clone());
                        pts.push(f[0].scale(2.0));
                        pts.push(f.iter().skip(1).fold(f[0].clone(), |a, y| &a + y));
                    }
                }
            } else {
                for text in x {
                    let v = res.literal(Some(text), "x")?.expect("given");
                    pts.push(res.element(&case, v)?);
                }
            }
            vec![rank1_fourier_check(&case, &pts, &q, FOURIER_SPREAD_TOL)?]
        }
        Command::RankkFourier { case, k, x } => {
            let case = res.case(case)?;
            let k = rank(&res, *k, &case, 2.min(case.n))?;
            let mut q = quad()?;
            q.mode = Mode::MonteCarlo;
            let x = match res.literal(x.as_ref(), "x")? {
                Some(v) => res.element(&case, v)?,
                None => frame::<f64>(&case)?[0].scale(0.5),
            };
            vec![rankk_fourier_check(&case, k, &x, &q)?]
        }
        Command::CayleyCheck { n, s, points, s_max } => {
            let case = lookup_case("sp_c", res.or(*n, "n", 2)?)?;
            let q = quad()?;
            let s = res.or(*s, "s", 3.0)?;
            let points = res.or(*points, "points", 5)?;
            let s_max = res.or(*s_max, "s_max", 4)?;
            vec![cayley_symbolic_report(&case, s_max)?, cayley_fd_report(&case, s, points, q.seed)?]
        }
        Command::L2Certificate { case, k } => {
            let case = res.case(case)?;
            let k = rank(&res, *k, &case, 1)?;
            vec![l2_certificate_report(&case, k)?]
        }
        Command::StabilityCheck { case, k } => {
            let case = res.case(case)?;
            let k = rank(&res, *k, &case, 1)?;
            let q = quad()?;
            let mut rng = ChaCha8Rng::seed_from_u64(q.seed);
            vec![stability_restriction_check(&case, k, &mut rng)?]
        }
        Command::Suite { case } => {
            let case = res.case(case)?;
            run_suite(&case, &quad()?)
        }
    };
    Ok((reports, None))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = (|| -> Result<i32> {
        let cfg = match &cli.global.config {
            Some(p) => Config::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => Config::default(),
        };
        let (reports, doc) = run(&cli, &cfg)?;
        let (doc, code) = match doc {
            Some(d) => (d, 0),
            None => {
                let format: Format = match cli.global.format.clone().or(cfg.get(cli.command.section(), "format")?) {
                    Some(f) => f.parse()?,
                    None => Format::Json,
                };
                (emit_report(&reports, format)?, exit_code(&reports))
            }
        };
        match &cli.global.out {
            Some(p) => std::fs::write(p, doc).with_context(|| format!("writing {}", p.display()))?,
            None => print!("{doc}"),
        }
        Ok(code)
    })();
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
