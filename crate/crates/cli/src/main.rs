use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orbitcount_cli::output::{ints, optional_real, real, reals, Table};
use orbitcount_cli::{checks, CliError};
use orbitcount_core::counting::{
    chebotarev_distribution, equidistribution_many, exact_window_count, margulis_total, predict_count, sweep_at,
    CountOptions, CountQuery, FiniteQuotient, DEFAULT_PERIOD_CAP,
};
use orbitcount_core::graph_shift::PrimeCycle;
use orbitcount_core::homology_weights::{default_eps_grid, generation_check, lattice_length_heuristic};
use orbitcount_core::legendre::{direction_hull, solve_u, SolveOptions};
use orbitcount_core::model::{builtin_model, parse_model, serialize_model, ModelSpec};
use orbitcount_core::thermo::{flow_pressure, pressure_gradient, pressure_hessian};
use orbitcount_core::Execution;

/// Pressure, entropy and periodic-orbit counts for symbolic suspension flows.
#[derive(Debug, Parser)]
#[command(name = "orbitcount", version)]
struct Cli {
    /// Model file to load.
    #[arg(long, global = true, conflicts_with = "builtin")]
    model: Option<PathBuf>,
    /// Builtin model: full2, goldenmean or bench3.
    #[arg(long, global = true)]
    builtin: Option<String>,
    /// Largest symbolic period exact counts may enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_PERIOD_CAP)]
    cap: usize,
    /// Run enumerations on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    /// Count the model's removed cycles too.
    #[arg(long, global = true)]
    include_removed: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone)]
struct RealVec(Vec<f64>);

#[derive(Debug, Clone)]
struct IntVec(Vec<i64>);

fn parse_reals(s: &str) -> Result<RealVec, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("`{x}` is not a number")))
        .collect::<Result<_, _>>()
        .map(RealVec)
}

fn parse_ints(s: &str) -> Result<IntVec, String> {
    s.split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| format!("`{x}` is not an integer")))
        .collect::<Result<_, _>>()
        .map(IntVec)
}

#[derive(Debug, Args)]
struct WindowArgs {
    /// Right end of the length window (T - delta, T].
    #[arg(long = "T", allow_hyphen_values = true)]
    t: f64,
    /// Window width.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Direction, comma-separated.
    #[arg(long, value_parser = parse_reals, allow_hyphen_values = true)]
    rho: RealVec,
    /// Class offset, comma-separated; zero when omitted.
    #[arg(long, value_parser = parse_ints, allow_hyphen_values = true)]
    alpha: Option<IntVec>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the model and report its lattice diagnostics.
    Validate,
    /// Print the model in canonical file form.
    Show,
    /// Flow pressure, gradient and Hessian at each --u.
    Pressure {
        #[arg(long = "u", value_parser = parse_reals, allow_hyphen_values = true, required = true)]
        u: Vec<RealVec>,
    },
    /// Entropy and dual parameter at each --rho.
    Entropy {
        #[arg(long, value_parser = parse_reals, allow_hyphen_values = true, required = true)]
        rho: Vec<RealVec>,
    },
    /// Vertices of the hull of normalized cycle classes up to period --n.
    Hull {
        #[arg(long)]
        n: usize,
    },
    /// Exact number of prime orbits in the window with class floor(T rho) + alpha.
    Count(WindowArgs),
    /// Asymptotic prediction for the same query as `count`.
    Predict(WindowArgs),
    /// Exact and predicted counts for T = Tmin, Tmin + step, ..., Tmax.
    Sweep {
        #[arg(long = "Tmin")]
        t_min: f64,
        #[arg(long = "Tmax")]
        t_max: f64,
        #[arg(long)]
        step: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, value_parser = parse_reals, allow_hyphen_values = true)]
        rho: RealVec,
        #[arg(long, value_parser = parse_ints, allow_hyphen_values = true)]
        alpha: Option<IntVec>,
    },
    /// Prime orbits of length at most T against exp(hT)/(hT).
    Margulis {
        #[arg(long = "T")]
        t: f64,
    },
    /// Class frequencies in a finite quotient over prime orbits of period <= --n.
    Chebotarev {
        /// Reduce classes modulo this integer in every coordinate.
        #[arg(long = "mod", conflicts_with = "quotient", required_unless_present = "quotient")]
        modulus: Option<i64>,
        /// A quotient declared in the model file.
        #[arg(long)]
        quotient: Option<String>,
        #[arg(long)]
        n: usize,
    },
    /// Cycle averages of edge observables against their equilibrium averages.
    Equidist {
        #[command(flatten)]
        window: WindowArgs,
        /// Per-edge values, comma-separated, or `edges` for every edge indicator.
        #[arg(long, allow_hyphen_values = true, required = true)]
        obs: Vec<String>,
    },
    /// Run the built-in closed-form and oracle checks.
    Check,
}

struct Context {
    model: ModelSpec,
    opts: CountOptions,
    removed: Vec<PrimeCycle>,
}

fn load(cli: &Cli) -> Result<Context, CliError> {
    let model = match (&cli.model, &cli.builtin) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::Read { path: path.display().to_string(), source })?;
            parse_model(&text)?
        }
        (None, Some(name)) => builtin_model(name)?,
        (None, None) => return Err(CliError::Usage("pass --model <FILE> or --builtin <NAME>".into())),
    };
    for w in &model.warnings {
        eprintln!("warning: {w}");
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let removed = if cli.include_removed { Vec::new() } else { model.removed.clone() };
    Ok(Context { model, opts: CountOptions { period_cap: cli.cap, exec }, removed })
}

fn check_len(found: usize, expected: usize, what: &str) -> Result<(), CliError> {
    if found == expected {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} needs {expected} entries, found {found}")))
    }
}

impl Context {
    fn query(&self, w: &WindowArgs) -> Result<CountQuery, CliError> {
        let d = self.model.dim();
        check_len(w.rho.0.len(), d, "--rho")?;
        let alpha = w.alpha.as_ref().map_or_else(|| vec![0; d], |a| a.0.clone());
        check_len(alpha.len(), d, "--alpha")?;
        Ok(CountQuery { t: w.t, delta: w.delta, rho: w.rho.0.clone(), alpha, removed: self.removed.clone() })
    }

    fn observables(&self, specs: &[String]) -> Result<Vec<(String, Vec<f64>)>, CliError> {
        let g = &self.model.graph;
        let mut out = Vec::new();
        for spec in specs {
            if spec == "edges" {
                for (e, (i, j)) in g.edges().iter().enumerate() {
                    let mut phi = vec![0.0; g.edge_count()];
                    phi[e] = 1.0;
                    out.push((format!("{i}>{j}"), phi));
                }
            } else {
                let phi = parse_reals(spec).map_err(CliError::Usage)?.0;
                check_len(phi.len(), g.edge_count(), "--obs")?;
                out.push((reals(&phi), phi));
            }
        }
        Ok(out)
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let stdout = io::stdout().lock();
    if let Command::Check = cli.command {
        let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
        let outcomes = checks::run_all(exec);
        let mut out = stdout;
        for o in &outcomes {
            writeln!(out, "{o}")?;
        }
        let failed = outcomes.iter().filter(|o| !o.passed).count();
        return if failed == 0 { Ok(()) } else { Err(CliError::ChecksFailed { failed }) };
    }
    let ctx = load(cli)?;
    let (g, w) = (&ctx.model.graph, &ctx.model.weights);
    match &cli.command {
        Command::Check => unreachable!("handled above"),
        Command::Show => {
            let mut out = stdout;
            out.write_all(serialize_model(&ctx.model).as_bytes())?;
        }
        Command::Validate => {
            let report = generation_check(g, w, 6);
            let flags = lattice_length_heuristic(g, w, 8, &default_eps_grid());
            let removed: Vec<String> = ctx.model.removed.iter().map(ToString::to_string).collect();
            let mut t = Table::new(
                stdout,
                &["name", "vertices", "edges", "dim", "removed", "generates", "rank", "divisors", "flagged_eps"],
            )?;
            t.row([
                ctx.model.name.clone(),
                g.vertex_count().to_string(),
                g.edge_count().to_string(),
                ctx.model.dim().to_string(),
                removed.join(";"),
                report.generates.to_string(),
                report.rank.to_string(),
                ints(&report.divisors),
                reals(&flags),
            ])?;
            t.finish()?;
        }
        Command::Pressure { u } => {
            let mut t = Table::new(stdout, &["u", "pressure", "gradient", "hessian"])?;
            for RealVec(u) in u {
                check_len(u.len(), ctx.model.dim(), "--u")?;
                let p = flow_pressure(g, w, u)?;
                let grad = pressure_gradient(g, w, u)?;
                let h = pressure_hessian(g, w, u)?;
                let row_major: Vec<f64> = h.transpose().iter().copied().collect();
                t.row([reals(u), real(p), reals(&grad), reals(&row_major)])?;
            }
            t.finish()?;
        }
        Command::Entropy { rho } => {
            let mut t = Table::new(stdout, &["rho", "u", "entropy", "det_hessian"])?;
            for RealVec(rho) in rho {
                check_len(rho.len(), ctx.model.dim(), "--rho")?;
                let dd = solve_u(g, w, rho, SolveOptions::default())?;
                t.row([reals(rho), reals(&dd.u), real(dd.entropy), real(dd.hessian_h.determinant())])?;
            }
            t.finish()?;
        }
        Command::Hull { n } => {
            let hull = direction_hull(g, w, *n);
            let mut t = Table::new(stdout, &["vertex", "dimension"])?;
            for v in &hull.vertices {
                t.row([reals(v), hull.dimension.to_string()])?;
            }
            t.finish()?;
        }
        Command::Count(args) => {
            let q = ctx.query(args)?;
            let exact = exact_window_count(g, w, &q, ctx.opts)?;
            let mut t = Table::new(stdout, &["T", "delta", "target_class", "exact"])?;
            t.row([real(q.t), real(q.delta), ints(&q.target_class()), exact.to_string()])?;
            t.finish()?;
        }
        Command::Predict(args) => {
            let q = ctx.query(args)?;
            let dd = solve_u(g, w, &q.rho, SolveOptions::default())?;
            let predicted = predict_count(&dd, &q)?;
            let mut t = Table::new(stdout, &["T", "delta", "target_class", "predicted"])?;
            t.row([real(q.t), real(q.delta), ints(&q.target_class()), real(predicted)])?;
            t.finish()?;
        }
        Command::Sweep { t_min, t_max, step, delta, rho, alpha } => {
            if !(*step > 0.0 && t_min <= t_max) {
                return Err(CliError::Usage("sweep needs step > 0 and Tmin <= Tmax".into()));
            }
            let d = ctx.model.dim();
            check_len(rho.0.len(), d, "--rho")?;
            let alpha = alpha.as_ref().map_or_else(|| vec![0; d], |a| a.0.clone());
            check_len(alpha.len(), d, "--alpha")?;
            let t_list: Vec<f64> =
                (0..).map(|i| t_min + i as f64 * step).take_while(|t| *t <= t_max + 1e-9 * step).collect();
            let dd = solve_u(g, w, &rho.0, SolveOptions::default())?;
            let rows = sweep_at(g, w, &dd, &alpha, *delta, &t_list, &ctx.removed, ctx.opts)?;
            let mut t = Table::new(stdout, &["T", "delta", "target_class", "exact", "predicted", "ratio"])?;
            for (tv, row) in t_list.iter().zip(rows) {
                match row {
                    Ok(r) => t.row([
                        real(r.t),
                        real(r.delta),
                        ints(&r.target_class),
                        r.exact.to_string(),
                        real(r.predicted),
                        optional_real(r.ratio),
                    ])?,
                    Err(e) => {
                        eprintln!("T = {tv}: {e}");
                        t.row([real(*tv), real(*delta), String::new(), String::new(), String::new(), String::new()])?;
                    }
                }
            }
            t.finish()?;
        }
        Command::Margulis { t: tv } => {
            let r = margulis_total(g, w, &ctx.removed, *tv, ctx.opts)?;
            let mut t = Table::new(stdout, &["T", "exact", "reference", "ratio"])?;
            t.row([real(r.t), r.exact.to_string(), real(r.reference), real(r.ratio())])?;
            t.finish()?;
        }
        Command::Chebotarev { modulus, quotient, n } => {
            let quot = match (modulus, quotient) {
                (Some(m), _) => FiniteQuotient::cyclic(ctx.model.dim(), *m)?,
                (None, Some(name)) => ctx.model.quotient(name)?,
                (None, None) => unreachable!("clap requires one of --mod and --quotient"),
            };
            let report = chebotarev_distribution(g, w, &ctx.removed, &quot, *n, ctx.opts.exec)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            let mut t = Table::new(stdout, &["class", "count", "frequency", "reference"])?;
            for c in &report.classes {
                t.row([c.label.clone(), c.count.to_string(), real(c.frequency), real(c.reference)])?;
            }
            t.finish()?;
        }
        Command::Equidist { window, obs } => {
            let q = ctx.query(window)?;
            let observables = ctx.observables(obs)?;
            let dd = solve_u(g, w, &q.rho, SolveOptions::default())?;
            let phis: Vec<Vec<f64>> = observables.iter().map(|(_, phi)| phi.clone()).collect();
            let reports = equidistribution_many(g, w, &dd, &q, &phis, ctx.opts)?;
            let mut t = Table::new(stdout, &["observable", "empirical", "expected", "cycles"])?;
            for ((label, _), r) in observables.iter().zip(reports) {
                t.row([label.clone(), real(r.empirical), real(r.expected), r.cycles.to_string()])?;
            }
            t.finish()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
