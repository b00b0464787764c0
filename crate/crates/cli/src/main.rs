use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use hyperforge::cauchy::{self, CauchyConfig};
use hyperforge::coord::{self, CoordConfig};
use hyperforge::criteria::{self, PropertyBRanges};
use hyperforge::schedule::TargetSchedule;
use hyperforge::verify::{self, OrbitReport};
use hyperforge::{Bundle, Product, SpaceId, SpaceSpec, WeightSpec};
use hyperforge_cli::export::{write_csv, write_json};
use hyperforge_cli::expr::parse_to_element;
use hyperforge_cli::CliError;

/// Truncated hypercyclic-algebra generators for weighted backward shifts.
#[derive(Parser)]
#[command(name = "hyperforge", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Space identifiers.
    Spaces {
        #[command(subcommand)]
        cmd: SpacesCmd,
    },
    /// Finite-horizon witnesses for the hypotheses on the weight and the basis.
    Criteria {
        #[command(subcommand)]
        cmd: CriteriaCmd,
    },
    /// Run a construction and write its bundle.
    Build {
        #[command(subcommand)]
        cmd: BuildCmd,
    },
    /// Reports on a stored bundle.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum SpacesCmd {
    List,
}

#[derive(Args)]
struct CriteriaArgs {
    #[arg(long)]
    space: String,
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    horizon_n: Option<u64>,
    #[arg(long)]
    horizon_q: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CriteriaCmd {
    /// Increasing `p_k` with `v_{p_k+n}^{-1} e_{p_k+n} → 0`.
    Hc {
        #[command(flatten)]
        args: CriteriaArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Also require `|v_{p_k+n}|^{-1} → 0`.
        #[arg(long)]
        growth: bool,
        #[arg(long, default_value_t = coord::DEFAULT_PK_SCAN_LIMIT)]
        scan_limit: u64,
    },
    /// `v_n^{-1} e_n → 0` on the horizon.
    Mixing {
        #[command(flatten)]
        args: CriteriaArgs,
    },
    PropA {
        #[command(flatten)]
        args: CriteriaArgs,
    },
    PropB {
        #[command(flatten)]
        args: CriteriaArgs,
    },
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    space: String,
    #[arg(long)]
    weight: String,
    /// JSON list of target sequences.
    #[arg(long)]
    targets: PathBuf,
    #[arg(long)]
    rounds: u64,
    /// Bundle path; the bundle goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BuildCmd {
    /// Single generator, coordinatewise product.
    Coord {
        #[command(flatten)]
        args: BuildArgs,
        #[arg(long, default_value_t = criteria::DEFAULT_R_MAX)]
        horizon_q: u32,
        #[arg(long, default_value_t = coord::DEFAULT_SCAN_BUDGET)]
        scan_budget: u64,
    },
    /// Single generator, Cauchy product.
    Cauchy {
        #[command(flatten)]
        args: BuildArgs,
        #[arg(long, default_value_t = cauchy::block::DEFAULT_BLOCK_BUDGET)]
        block_budget: u64,
        #[arg(long, default_value_t = cauchy::DEFAULT_TIGHTEN_BUDGET)]
        tighten_budget: u32,
    },
    /// `K` generators with pairwise zero coordinatewise products.
    AlgebrableCoord {
        #[command(flatten)]
        args: BuildArgs,
        #[arg(long, short = 'k', default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = criteria::DEFAULT_R_MAX)]
        horizon_q: u32,
        #[arg(long, default_value_t = coord::DEFAULT_SCAN_BUDGET)]
        scan_budget: u64,
    },
    /// `K` generators scaled by the columns of Λ, Cauchy product.
    AlgebrableCauchy {
        #[command(flatten)]
        args: BuildArgs,
        #[arg(long, short = 'k', default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = cauchy::block::DEFAULT_BLOCK_BUDGET)]
        block_budget: u64,
        #[arg(long, default_value_t = cauchy::DEFAULT_TIGHTEN_BUDGET)]
        tighten_budget: u32,
    },
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// `‖T^a (x^{(k)})^j − y‖` against the construction's bound.
    Power {
        #[command(flatten)]
        args: ReportArgs,
        #[arg(long)]
        j: u32,
        #[arg(long, default_value_t = 1)]
        generator: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Orbit report for an algebra element such as "x1^2 + 0.3*x1^3".
    Element {
        #[command(flatten)]
        args: ReportArgs,
        #[arg(long)]
        element: String,
        #[arg(long, default_value_t = cauchy::lambda::DEFAULT_FORM_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Pairwise coordinatewise products of the generators.
    ZeroProducts {
        #[command(flatten)]
        args: ReportArgs,
    },
    /// Brute-force substitution against the expansion in the blocks.
    Expansion {
        #[command(flatten)]
        args: ReportArgs,
        #[arg(long)]
        element: String,
        #[arg(long, default_value_t = verify::DEFAULT_DEGREE_CAP)]
        degree_cap: u32,
    },
    /// Recompute every stored certificate.
    Certificates {
        #[command(flatten)]
        args: ReportArgs,
    },
    /// Generators vanish at `mγ_r` while `p_r^m` does not.
    Obstruction {
        #[command(flatten)]
        args: ReportArgs,
    },
}

/// Prints `value`, writes it to `out` when given, and turns `pass` into the exit status.
fn emit<T: Serialize>(value: &T, out: Option<&Path>, pass: bool) -> Result<ExitCode, CliError> {
    if let Some(path) = out {
        write_json(value, path)?;
    }
    let text = serde_json::to_string_pretty(value).map_err(hyperforge::Error::from)?;
    print_out(&text);
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Writes to stdout, ignoring a closed pipe.
fn print_out(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn weight_arg(w: &Option<String>) -> Result<WeightSpec, CliError> {
    let w = w
        .as_deref()
        .ok_or_else(|| CliError::Usage("this criterion needs --weight".into()))?;
    Ok(WeightSpec::parse(w)?)
}

fn run_criteria(cmd: CriteriaCmd) -> Result<ExitCode, CliError> {
    match cmd {
        CriteriaCmd::Hc {
            args,
            count,
            growth,
            scan_limit,
        } => {
            let space = SpaceSpec::parse(&args.space, None)?;
            let w = weight_arg(&args.weight)?;
            let wit = criteria::find_pk_witness(
                &space,
                &w,
                count,
                args.horizon_n.unwrap_or(0),
                args.horizon_q.unwrap_or(criteria::DEFAULT_R_MAX),
                growth,
                scan_limit,
            )?;
            criteria::check_pk_witness(&space, &w, &wit)?;
            emit(
                &json!({"criterion": "hc", "space": space, "weight": w, "witness": wit, "pass": true}),
                args.out.as_deref(),
                true,
            )
        }
        CriteriaCmd::Mixing { args } => {
            let space = SpaceSpec::parse(&args.space, None)?;
            let w = weight_arg(&args.weight)?;
            let rep = criteria::check_mixing(
                &space,
                &w,
                args.horizon_n.unwrap_or(criteria::DEFAULT_N_MAX),
                args.horizon_q.unwrap_or(criteria::DEFAULT_R_MAX),
                args.tol.unwrap_or(1e-3),
            );
            let pass = rep.pass;
            emit(
                &json!({"criterion": "mixing", "space": space, "weight": w, "report": rep, "pass": pass}),
                args.out.as_deref(),
                pass,
            )
        }
        CriteriaCmd::PropA { args } => {
            let space = SpaceSpec::parse(&args.space, None)?;
            let wit = criteria::property_a_witness(
                &space,
                args.horizon_q.unwrap_or(criteria::DEFAULT_R_MAX),
                args.horizon_n.unwrap_or(criteria::DEFAULT_N_MAX),
            )?;
            criteria::check_property_a(&wit)?;
            emit(
                &json!({"criterion": "prop-a", "witness": wit, "pass": true}),
                args.out.as_deref(),
                true,
            )
        }
        CriteriaCmd::PropB { args } => {
            let space = SpaceSpec::parse(&args.space, None)?;
            let mut ranges = PropertyBRanges::default();
            if let Some(q) = args.horizon_q {
                ranges.r_max = q;
                ranges.t_max = q;
            }
            if let Some(n) = args.horizon_n {
                ranges.n_max = n;
            }
            let wit = criteria::property_b_witness(&space, ranges)?;
            emit(
                &json!({"criterion": "prop-b", "witness": wit, "pass": true}),
                args.out.as_deref(),
                true,
            )
        }
    }
}

fn load_inputs(
    args: &BuildArgs,
    product: Product,
) -> Result<(SpaceSpec, WeightSpec, Vec<hyperforge::FiniteSeq>), CliError> {
    let space = SpaceSpec::parse(&args.space, Some(product))?;
    let weight = WeightSpec::parse(&args.weight)?;
    let targets = TargetSchedule::load_targets(&args.targets)?;
    if args.rounds == 0 {
        return Err(CliError::Usage("--rounds must be at least 1".into()));
    }
    Ok((space, weight, targets))
}

fn finish_build(bundle: Bundle, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let pass = bundle.all_pass();
    match out {
        Some(path) => {
            bundle.save(path)?;
            let kind = match &bundle {
                Bundle::Coordinatewise(_) => "coordinatewise",
                Bundle::Cauchy(_) => "cauchy",
            };
            emit(
                &json!({
                    "bundle_id": bundle.id(),
                    "kind": kind,
                    "rounds": bundle.rounds(),
                    "generators": bundle.generator_count(),
                    "out": path,
                    "pass": pass,
                }),
                None,
                pass,
            )
        }
        None => emit(&bundle, None, pass),
    }
}

fn run_build(cmd: BuildCmd) -> Result<ExitCode, CliError> {
    match cmd {
        BuildCmd::Coord {
            args,
            horizon_q,
            scan_budget,
        } => build_coord(&args, 1, horizon_q, scan_budget),
        BuildCmd::AlgebrableCoord {
            args,
            k,
            horizon_q,
            scan_budget,
        } => {
            if k == 0 {
                return Err(CliError::Usage("-k must be at least 1".into()));
            }
            build_coord(&args, k, horizon_q, scan_budget)
        }
        BuildCmd::Cauchy {
            args,
            block_budget,
            tighten_budget,
        } => build_cauchy(&args, None, block_budget, tighten_budget),
        BuildCmd::AlgebrableCauchy {
            args,
            k,
            block_budget,
            tighten_budget,
        } => {
            if k == 0 {
                return Err(CliError::Usage("-k must be at least 1".into()));
            }
            build_cauchy(&args, Some(k), block_budget, tighten_budget)
        }
    }
}

fn build_coord(
    args: &BuildArgs,
    k: u32,
    horizon_q: u32,
    scan_budget: u64,
) -> Result<ExitCode, CliError> {
    let (space, weight, targets) = load_inputs(args, Product::Coordinatewise)?;
    let mut cfg = CoordConfig::new(space, weight, targets, args.rounds);
    cfg.classes = k;
    cfg.horizon_q = horizon_q;
    cfg.scan_budget = scan_budget;
    finish_build(
        Bundle::Coordinatewise(coord::build(&cfg)?),
        args.out.as_deref(),
    )
}

fn build_cauchy(
    args: &BuildArgs,
    k: Option<usize>,
    block_budget: u64,
    tighten_budget: u32,
) -> Result<ExitCode, CliError> {
    let (space, weight, targets) = load_inputs(args, Product::Cauchy)?;
    let mut cfg = CauchyConfig::new(space, weight, targets, args.rounds);
    cfg.generators = k;
    cfg.block_budget = block_budget;
    cfg.tighten_budget = tighten_budget;
    finish_build(Bundle::Cauchy(cauchy::build(&cfg)?), args.out.as_deref())
}

fn emit_orbit(
    rep: &OrbitReport,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<ExitCode, CliError> {
    if let Some(path) = csv {
        write_csv(rep, path)?;
    }
    emit(rep, out, rep.pass())
}

fn run_verify(cmd: VerifyCmd) -> Result<ExitCode, CliError> {
    match cmd {
        VerifyCmd::Power {
            args,
            j,
            generator,
            csv,
        } => {
            let bundle = Bundle::load(&args.bundle)?;
            let rep = verify::orbit_power_report(&bundle, j, generator)?;
            emit_orbit(&rep, args.out.as_deref(), csv.as_deref())
        }
        VerifyCmd::Element {
            args,
            element,
            threshold,
            csv,
        } => {
            let z = parse_to_element(&element)?;
            let bundle = Bundle::load(&args.bundle)?;
            let rep = verify::orbit_element_report_with(&bundle, &z, threshold)?;
            emit_orbit(&rep, args.out.as_deref(), csv.as_deref())
        }
        VerifyCmd::ZeroProducts { args } => {
            let rep = verify::zero_product_report(&Bundle::load(&args.bundle)?)?;
            emit(&rep, args.out.as_deref(), rep.pass)
        }
        VerifyCmd::Expansion {
            args,
            element,
            degree_cap,
        } => {
            let z = parse_to_element(&element)?;
            let rep = verify::expansion_oracle(&Bundle::load(&args.bundle)?, &z, degree_cap)?;
            emit(&rep, args.out.as_deref(), rep.pass)
        }
        VerifyCmd::Certificates { args } => {
            let rep = verify::recheck_certificates(&Bundle::load(&args.bundle)?);
            emit(&rep, args.out.as_deref(), rep.pass)
        }
        VerifyCmd::Obstruction { args } => {
            let rep = verify::non_finite_generation_witness(&Bundle::load(&args.bundle)?)?;
            emit(&rep, args.out.as_deref(), rep.pass)
        }
    }
}

fn list_spaces() -> Result<ExitCode, CliError> {
    let spaces: Vec<_> = SpaceId::builtins()
        .into_iter()
        .map(|id| {
            let name = match id {
                SpaceId::Lp(_) => "l_p:<p>".to_string(),
                other => other.to_string(),
            };
            json!({"id": name, "product": id.product()})
        })
        .collect();
    emit(&json!({"spaces": spaces}), None, true)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.cmd {
        Cmd::Spaces {
            cmd: SpacesCmd::List,
        } => list_spaces(),
        Cmd::Criteria { cmd } => run_criteria(cmd),
        Cmd::Build { cmd } => run_build(cmd),
        Cmd::Verify { cmd } => run_verify(cmd),
    }
}

fn fail(e: &CliError) -> ExitCode {
    let mut obj = json!({"code": e.code(), "message": e.to_string()});
    if let Some(pos) = e.position() {
        obj["position"] = json!(pos);
    }
    print_out(&serde_json::to_string_pretty(&json!({ "error": obj })).expect("plain json"));
    ExitCode::from(e.exit_status() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.to_string())),
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
