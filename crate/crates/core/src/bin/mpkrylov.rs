use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mpkrylov::bench::{self, Orderings, SolveOptions, SweepPlan};
use mpkrylov::problems::{self, parse_real, ProblemSpec, Rhs};
use mpkrylov::solver::Ordering;
use mpkrylov::{Error, PrecondSpec, Result, SolverConfig, Variant};

/// Multipreconditioned GMRES solver and sweep harness.
#[derive(Parser)]
#[command(name = "mpkrylov", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve and report its convergence history.
    Solve(SolveArgs),
    /// Sweep weights and orderings of a preconditioner pair over problems.
    Sweep(SweepArgs),
    /// Write a generated problem to Matrix Market files.
    Gen(GenArgs),
}

#[derive(Args)]
struct SystemArgs {
    /// Generated problem, e.g. `convdiff:grid=32,eps=0.1` or `anisodiff:grid=16,eps=0.01`.
    #[arg(long)]
    problem: Option<String>,
    /// Matrix Market coordinate file.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Right-hand side: `ones`, `random[:seed]` or a vector file.
    #[arg(long)]
    rhs: Option<String>,
    /// Seed for random right-hand sides and random column selection.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SystemArgs {
    fn problem(&self) -> Result<Option<ProblemSpec>> {
        self.problem.as_deref().map(str::parse).transpose()
    }

    fn rhs(&self) -> Result<Option<Rhs>> {
        let Some(s) = self.rhs.as_deref() else {
            return Ok(None);
        };
        Ok(Some(match s.parse()? {
            Rhs::Random { .. } if s.trim() == "random" => Rhs::Random { seed: self.seed },
            rhs => rhs,
        }))
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Comma-separated preconditioners: identity, jacobi, ssor[:omega=w], ilu0,
    /// badscale[:gamma=g], scaled:gamma=g, combo:w*p+w*p.
    #[arg(long, default_value = "ilu0")]
    precond: String,
    /// gmres, fgmres, fgmres_cyclic, mpgmres (complete) or smpgmres (selective).
    #[arg(long, default_value = "gmres")]
    variant: String,
    /// Selective strategy: lincomb, columns[:s1,s2,...] (one-based) or random.
    #[arg(long, default_value = "lincomb")]
    selection: String,
    /// Weight on the leading preconditioner, or one weight per preconditioner.
    #[arg(long)]
    alpha: Option<String>,
    /// forward, reverse, or a one-based permutation such as 2,1,3.
    #[arg(long, default_value = "forward")]
    ordering: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    maxit: usize,
    /// Write the JSON convergence history here.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Write `iteration residual` plot data here.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Write the solution vector here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Threads for preconditioner applications within a block.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// Problem row; repeat for several rows. Defaults to `convdiff:grid=32`.
    #[arg(long)]
    problem: Vec<String>,
    /// Diffusion values applied to every problem, e.g. `1e-1,1e-1.5,1e-2`.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<String>,
    #[arg(long)]
    rhs: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exactly two preconditioners.
    #[arg(long, default_value = "ilu0,ssor")]
    precond: String,
    /// Weights on the leading preconditioner, in column order.
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.7,0.5,0.3,0.1")]
    alpha: Vec<f64>,
    /// forward, reverse or both.
    #[arg(long, default_value = "both")]
    ordering: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    maxit: usize,
    /// Output prefix; writes `<out>.csv` and `<out>.md`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent solves (default: all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Matrix output path.
    #[arg(long)]
    out: PathBuf,
    /// Right-hand side output path.
    #[arg(long)]
    rhs_out: Option<PathBuf>,
}

fn parse_ordering(s: &str) -> Result<Ordering> {
    match s.trim() {
        "forward" => Ok(Ordering::Forward),
        "reverse" => Ok(Ordering::Reverse),
        "both" => Err(Error::Usage("solve takes a single ordering".into())),
        list => list
            .split(',')
            .map(|t| match t.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::Usage(format!("bad ordering '{s}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Ordering::Custom),
    }
}

fn solve(args: SolveArgs) -> Result<i32> {
    if let Some(n) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    let preconds = PrecondSpec::parse_list(&args.precond)?;
    let variant: Variant = args.variant.parse()?;
    let mut config = SolverConfig::new(variant)
        .with_tol(args.tol)
        .with_maxit(args.maxit)
        .with_selection(bench::parse_selection(&args.selection, args.system.seed)?)
        .with_ordering(parse_ordering(&args.ordering)?);
    config.parallel = args.workers != Some(1);
    if let Some(alpha) = &args.alpha {
        config = config.with_weights(bench::parse_alpha(alpha, preconds.len())?);
    }
    let opts = SolveOptions {
        problem: args.system.problem()?,
        matrix: args.system.matrix.clone(),
        rhs: args.system.rhs()?,
        preconds,
        config,
        history: args.history,
        plot: args.plot,
        out: args.out,
    };
    let outcome = bench::run_solve(&opts)?;
    println!("{}", outcome.summary);
    Ok(bench::exit_code(&outcome.report))
}

fn sweep(args: SweepArgs) -> Result<i32> {
    let pair = PrecondSpec::parse_list(&args.precond)?;
    let pair: [PrecondSpec; 2] = pair
        .try_into()
        .map_err(|_| Error::Usage("sweep needs exactly two preconditioners".into()))?;
    let rhs = match args.rhs.as_deref() {
        None => Rhs::Ones,
        Some("random") => Rhs::Random { seed: args.seed },
        Some(s) => s.parse()?,
    };
    let bases = if args.problem.is_empty() {
        vec![ProblemSpec::convdiff(32, 0.1, problems::Wind::Recirculating)]
    } else {
        args.problem
            .iter()
            .map(|p| p.parse())
            .collect::<Result<Vec<ProblemSpec>>>()?
    };
    let eps = args
        .eps
        .iter()
        .map(|e| parse_real(e))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for base in &bases {
        if eps.is_empty() {
            rows.push(base.clone());
        } else {
            rows.extend(eps.iter().map(|&e| base.with_eps(e)));
        }
    }
    for row in &mut rows {
        row.rhs = rhs.clone();
    }

    let mut plan = SweepPlan::new(rows, pair);
    plan.alphas = args.alpha;
    plan.orderings = args.ordering.parse::<Orderings>()?;
    plan.tol = args.tol;
    plan.maxit = args.maxit;
    plan.workers = args.workers;
    let outcome = bench::run_sweep(&plan)?;

    print!("{}", outcome.markdown);
    if let Some(prefix) = &args.out {
        let csv = prefix.with_extension("csv");
        let md = prefix.with_extension("md");
        if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::Io {
                path: dir.to_path_buf(),
                source: e,
            })?;
        }
        fs::write(&csv, &outcome.csv).map_err(|e| Error::Io { path: csv, source: e })?;
        fs::write(&md, &outcome.markdown).map_err(|e| Error::Io { path: md, source: e })?;
    }
    Ok(0)
}

fn gen(args: GenArgs) -> Result<i32> {
    let problem = args.system.problem()?;
    let (a, b) = bench::load_system(
        problem.as_ref(),
        args.system.matrix.as_deref(),
        args.system.rhs()?.as_ref(),
    )?;
    problems::write_matrix_market(&a, &args.out)?;
    if let Some(path) = &args.rhs_out {
        problems::write_vector(&b, path)?;
    }
    println!(
        "wrote {} ({} rows, {} nonzeros)",
        args.out.display(),
        a.n(),
        a.nnz()
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Sweep(args) => sweep(args),
        Command::Gen(args) => gen(args),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
