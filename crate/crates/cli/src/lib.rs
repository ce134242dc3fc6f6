//! Command-line front end: kernel files in, tab-separated reports out.
//!
//! [`run`] is the whole program minus process plumbing, so it can be driven
//! from tests.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chaos_core::experiments::Thresholds;
use chaos_core::moments::{CustomMoments, DEFAULT_BUDGET};
use chaos_core::numfmt::{fmt12, fmt12_opt};
use chaos_core::{
    contraction_table, diagnose_with_budget, fourth_moment_expanded, fourth_moment_structured,
    moment_bruteforce, parse_kernel_file, product_moment_bruteforce,
    product_second_moment_structured, prop41_residuals, simulate, universality_run, variance_exact,
    vector_diagnose, Error, KernelFamily, MomentProvider, ProviderKind, RngSpec, SymmetricKernel,
    WeightVector,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "chaos",
    version,
    about = "Exact moments, contractions and normality diagnostics for homogeneous sums"
)]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Contraction norms ‖g ⋆ᵣˡ g‖, one row per (r, l).
    Contract {
        #[arg(long)]
        kernel: PathBuf,
        /// Print the contraction inequality residuals instead.
        #[arg(long)]
        inequalities: bool,
    },
    /// Exact moments by brute-force expansion or the structured routes.
    Moments {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long, default_value = "poisson", value_parser = parse_provider)]
        provider: ProviderArg,
        #[arg(long, value_enum, default_value_t = MomentMethod::Structured)]
        method: MomentMethod,
        /// Moment order for the brute-force route.
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Variance, fourth moment, gap and contraction statistics.
    Diagnose {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long, default_value = "poisson", value_parser = parse_provider)]
        provider: ProviderArg,
        /// Largest brute-force expansion used as a cross-check.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: f64,
    },
    /// Monte Carlo moments and distances to the normal law.
    Simulate {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long, default_value = "poisson", value_parser = parse_provider)]
        provider: ProviderArg,
        #[command(flatten)]
        mc: McArgs,
        /// Variance of the reference normal (default: exact variance).
        #[arg(long)]
        sigma2: Option<f64>,
    },
    /// Swap the coordinate law along a kernel family and track the diagnostics.
    Universality {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 2)]
        q: usize,
        /// Comma-separated provider list.
        #[arg(
            long,
            alias = "provider",
            value_delimiter = ',',
            default_value = "gaussian,rademacher,poisson"
        )]
        providers: Vec<ProviderKind>,
        /// Comma-separated, strictly increasing sequence indices.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<usize>,
        #[command(flatten)]
        mc: McArgs,
        /// Constant intensity for the counterexample family.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        gap_threshold: f64,
        #[arg(long, default_value_t = 0.05)]
        contraction_threshold: f64,
        #[arg(long, default_value_t = 0.05)]
        w1_threshold: f64,
    },
    /// Covariance residuals and componentwise statistics of a vector of sums.
    VectorDiagnose {
        /// One kernel file per component; intensities come from the first.
        #[arg(long = "kernel", required = true)]
        kernels: Vec<PathBuf>,
        /// Target covariance, rows separated by ';', entries by ','.
        #[arg(long)]
        cov: String,
    },
    /// E[(Q_p Q_q)²] by brute force against the product-formula decomposition.
    ProductCheck {
        /// Exactly two kernel files sharing N and λ.
        #[arg(long = "kernel", required = true, num_args = 1)]
        kernels: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: f64,
    },
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of independent random substreams.
    #[arg(long, default_value_t = 16)]
    streams: usize,
}

impl McArgs {
    fn spec(&self) -> chaos_core::Result<RngSpec> {
        RngSpec::new(self.seed, self.streams)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MomentMethod {
    Bruteforce,
    Structured,
}

#[derive(Clone, Debug)]
enum ProviderArg {
    Kind(ProviderKind),
    Custom(Vec<f64>),
}

impl ProviderArg {
    fn resolve(&self, w: &WeightVector) -> chaos_core::Result<MomentProvider> {
        match self {
            ProviderArg::Kind(k) => Ok(k.resolve(w)),
            ProviderArg::Custom(m) => Ok(MomentProvider::Custom(CustomMoments::new(m.clone())?)),
        }
    }
}

fn parse_provider(s: &str) -> Result<ProviderArg, String> {
    if let Some(list) = s.strip_prefix("custom:") {
        let moments = list
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad moment {x:?}: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(ProviderArg::Custom(moments));
    }
    s.parse::<ProviderKind>()
        .map(ProviderArg::Kind)
        .map_err(|e| e.to_string())
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
        {
            Ok(pool) => pool.install(|| execute(&cli.command)),
            Err(e) => Err(Failure::Io(format!("thread pool: {e}"))),
        },
        None => execute(&cli.command),
    };
    let report = match result {
        Ok(r) => r,
        Err(Failure::Core(e)) => {
            let code = if e.is_runtime() { 2 } else { 1 };
            return Outcome {
                code,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            };
        }
        Err(Failure::Io(msg)) => {
            return Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: {msg}\n"),
            };
        }
    };
    match &cli.out {
        Some(path) => match std::fs::write(path, &report) {
            Ok(()) => Outcome {
                code: 0,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: writing {}: {e}\n", path.display()),
            },
        },
        None => Outcome {
            code: 0,
            stdout: report,
            stderr: String::new(),
        },
    }
}

fn load(path: &Path) -> Result<(SymmetricKernel, WeightVector), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
    parse_kernel_file(&text).map_err(Failure::from)
}

/// Kernels that must share `N` and `λ`; the intensities of the first win.
fn load_all(paths: &[PathBuf]) -> Result<(Vec<SymmetricKernel>, WeightVector), Failure> {
    let mut fs = Vec::with_capacity(paths.len());
    let mut weights: Option<WeightVector> = None;
    for p in paths {
        let (f, w) = load(p)?;
        if let Some(first) = &weights {
            if first.len() != w.len() {
                return Err(Error::SizeMismatch {
                    left: first.len(),
                    right: w.len(),
                }
                .into());
            }
            if first != &w {
                return Err(Error::DimensionMismatch(format!(
                    "{} has different intensities from the first kernel",
                    p.display()
                ))
                .into());
            }
        } else {
            weights = Some(w);
        }
        fs.push(f);
    }
    Ok((fs, weights.expect("at least one kernel")))
}

fn key_values(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("#key\tvalue\n");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k}\t{v}");
    }
    out
}

fn execute(command: &Command) -> Result<String, Failure> {
    match command {
        Command::Contract {
            kernel,
            inequalities,
        } => {
            let (f, w) = load(kernel)?;
            let mut out = String::new();
            if *inequalities {
                out.push_str("#name\tlhs\trhs\tslack\n");
                for r in prop41_residuals(&f, &w)? {
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{}\t{}",
                        r.name,
                        fmt12(r.lhs),
                        fmt12(r.rhs),
                        fmt12(r.slack)
                    );
                }
            } else {
                let table = contraction_table(&f, &w)?;
                out.push_str("#r\tl\tnorm\tnorm_sq\n");
                for (&(r, l), &v) in &table.rows {
                    let _ = writeln!(out, "{r}\t{l}\t{}\t{}", fmt12(v), fmt12(v * v));
                }
            }
            Ok(out)
        }
        Command::Moments {
            kernel,
            provider,
            method,
            order,
        } => {
            let (f, w) = load(kernel)?;
            let provider = provider.resolve(&w)?;
            let (label, value, route) = match method {
                MomentMethod::Bruteforce => (
                    format!("m{order}"),
                    moment_bruteforce(&f, &provider, *order)?,
                    "bruteforce",
                ),
                MomentMethod::Structured => match &provider {
                    MomentProvider::Poisson(pw) => {
                        ("m4".to_string(), fourth_moment_structured(&f, pw)?, "chaos")
                    }
                    other => (
                        "m4".to_string(),
                        fourth_moment_expanded(&f, other)?,
                        "expanded",
                    ),
                },
            };
            Ok(key_values(&[
                ("q", f.order().to_string()),
                ("N", f.size().to_string()),
                ("provider", provider.name().to_string()),
                ("method", route.to_string()),
                ("var_exact", fmt12(variance_exact(&f))),
                (label.as_str(), fmt12(value)),
            ]))
        }
        Command::Diagnose {
            kernel,
            provider,
            budget,
        } => {
            let (f, w) = load(kernel)?;
            let provider = provider.resolve(&w)?;
            let d = diagnose_with_budget(&f, &w, &provider, *budget)?;
            let mut pairs = vec![
                ("q", d.q.to_string()),
                ("N", d.n.to_string()),
                ("provider", d.provider.clone()),
                ("method", d.method.to_string()),
                ("var_exact", fmt12(d.var_exact)),
                ("m4_exact", fmt12(d.m4_exact)),
                ("m4_bruteforce", fmt12_opt(d.m4_bruteforce)),
                ("gap", fmt12(d.gap)),
                ("cond3a", fmt12_opt(d.cond3a)),
                (
                    "max_contraction",
                    fmt12_opt(d.contraction_table.max_diagonal_contraction()),
                ),
                ("int_g4", fmt12(d.contraction_table.int_g4)),
            ];
            let names: Vec<String> = d
                .contraction_table
                .rows
                .keys()
                .map(|(r, l)| format!("contraction[{r},{l}]"))
                .collect();
            for (name, v) in names.iter().zip(d.contraction_table.rows.values()) {
                pairs.push((name.as_str(), fmt12(*v)));
            }
            Ok(key_values(&pairs))
        }
        Command::Simulate {
            kernel,
            provider,
            mc,
            sigma2,
        } => {
            let (f, w) = load(kernel)?;
            let provider = provider.resolve(&w)?;
            let s = simulate(&f, &provider, mc.samples, &mc.spec()?, *sigma2)?;
            Ok(key_values(&[
                ("provider", provider.name().to_string()),
                ("n_samples", s.n_samples.to_string()),
                ("seed", mc.seed.to_string()),
                ("streams", mc.streams.to_string()),
                ("sigma2", fmt12(s.sigma2)),
                ("var_exact", fmt12(variance_exact(&f))),
                ("mean", fmt12(s.mean)),
                ("variance", fmt12(s.variance)),
                ("m2_empirical", fmt12(s.m2_empirical)),
                ("se_m2", fmt12(s.se_m2)),
                ("m4_empirical", fmt12(s.m4_empirical)),
                ("se_m4", fmt12(s.se_m4)),
                ("w1", fmt12(s.w1)),
                ("ks", fmt12(s.ks)),
            ]))
        }
        Command::Universality {
            family,
            q,
            providers,
            grid,
            mc,
            lambda,
            gap_threshold,
            contraction_threshold,
            w1_threshold,
        } => {
            let fam = match (family.as_str(), lambda) {
                ("counterexample", Some(l)) => {
                    chaos_core::experiments::counterexample_family_with_lambda(*q, *l)?
                }
                (_, Some(_)) => {
                    return Err(Error::DimensionMismatch(
                        "--lambda only applies to the counterexample family".into(),
                    )
                    .into())
                }
                (name, None) => KernelFamily::by_name(name, *q)?,
            };
            let thresholds = Thresholds {
                gap: *gap_threshold,
                contraction: *contraction_threshold,
                w1: *w1_threshold,
            };
            let report =
                universality_run(&fam, providers, grid, mc.samples, &mc.spec()?, thresholds)?;
            Ok(universality_table(&report))
        }
        Command::VectorDiagnose { kernels, cov } => {
            let (fs, w) = load_all(kernels)?;
            let cov = parse_matrix(cov)?;
            let r = vector_diagnose(&fs, &w, &cov)?;
            let mut out =
                String::from("#kind\ti\tj\tq\texact\ttarget\tresidual\tstatistic\tm4_exact\tgap\n");
            for p in &r.pairs {
                let _ = writeln!(
                    out,
                    "pair\t{}\t{}\tNA\t{}\t{}\t{}\tNA\tNA\tNA",
                    p.i,
                    p.j,
                    fmt12(p.exact),
                    fmt12(p.target),
                    fmt12(p.residual)
                );
            }
            for c in &r.components {
                let _ = writeln!(
                    out,
                    "component\t{}\t{}\t{}\tNA\tNA\tNA\t{}\t{}\t{}",
                    c.index,
                    c.index,
                    c.q,
                    fmt12(c.statistic),
                    fmt12(c.m4_exact),
                    fmt12(c.gap)
                );
            }
            Ok(out)
        }
        Command::ProductCheck { kernels, budget } => {
            if kernels.len() != 2 {
                return Err(Error::DimensionMismatch(format!(
                    "product-check needs exactly two kernels, got {}",
                    kernels.len()
                ))
                .into());
            }
            let (fs, w) = load_all(kernels)?;
            let (terms, structured) = product_second_moment_structured(&fs[0], &fs[1], &w)?;
            let provider = MomentProvider::Poisson(w);
            let brute =
                product_moment_bruteforce(&[&fs[0], &fs[0], &fs[1], &fs[1]], &provider, *budget)?;
            let rel = (structured - brute).abs() / brute.abs().max(f64::MIN_POSITIVE);
            let mut out = String::from("#kind\tk\tvalue\n");
            for (k, v) in &terms {
                let _ = writeln!(out, "term\t{k}\t{}", fmt12(*v));
            }
            let _ = writeln!(out, "structured\tNA\t{}", fmt12(structured));
            let _ = writeln!(out, "bruteforce\tNA\t{}", fmt12(brute));
            let _ = writeln!(out, "rel_diff\tNA\t{}", fmt12(rel));
            if rel > 1e-9 {
                return Err(Error::OracleMismatch {
                    left: structured,
                    right: brute,
                }
                .into());
            }
            Ok(out)
        }
    }
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim().parse::<f64>().map_err(|e| {
                        Failure::Core(Error::DimensionMismatch(format!("bad entry {x:?}: {e}")))
                    })
                })
                .collect()
        })
        .collect()
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn universality_table(report: &chaos_core::UniversalityReport) -> String {
    let mut out = String::from(
        "#kind\tn\tN\tprovider\tvar_exact\tm4_exact\tgap\tmax_contraction\tcond3a\tw1\tks\t\
         m4_empirical\tse_m4\tgap_decreasing\tcontraction_decreasing\tfinal_gap_below\t\
         final_contraction_below\tfinal_w1_below\n",
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "row\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\tNA\tNA\tNA\tNA\tNA",
            r.n,
            r.size,
            r.provider,
            fmt12(r.var_exact),
            fmt12(r.m4_exact),
            fmt12(r.gap),
            fmt12_opt(r.max_contraction),
            fmt12_opt(r.cond3a),
            fmt12(r.w1),
            fmt12(r.ks),
            fmt12(r.m4_empirical),
            fmt12(r.se_m4)
        );
    }
    for t in &report.trends {
        let _ = writeln!(
            out,
            "trend\tNA\tNA\t{}\tNA\tNA\tNA\tNA\tNA\tNA\tNA\tNA\tNA\t{}\t{}\t{}\t{}\t{}",
            t.provider,
            flag(t.gap_decreasing),
            flag(t.contraction_decreasing),
            flag(t.final_gap_below),
            flag(t.final_contraction_below),
            flag(t.final_w1_below)
        );
    }
    out
}
