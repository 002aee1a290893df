//! `weiss`: build generalized Weiss operators from a producing function,
//! emit the induced PDEs, construct their closed-form null functions, and
//! verify everything numerically.
//!
//! Exit codes: 0 pass/ok, 1 verification failure, 2 parse or validation
//! error, 3 degenerate producing function, 4 unrecognized self-consistency
//! pattern, 5 inconclusive (domain exhausted or evaluation failure).

mod problem;

use clap::{Args, Parser, Subcommand, ValueEnum};
use problem::{parse_domain_flag, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use weiss_core::diffop::{build_weiss, divide_common_factor, q_potential, WeissOperator};
use weiss_core::error::Error;
use weiss_core::expr::{rat, EmitFormat, Expr, SampleDomain};
use weiss_core::nullspace::{general_null, solve_self_consistent};
use weiss_core::verify::{
    residual_check, theorem_suite, CheckOptions, Mutation, TheoremConfig, VerificationReport,
};

#[derive(Parser)]
#[command(name = "weiss", version, about = "Generalized Weiss operator toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the pre-Schwarzian V, the potential Q, and the factor list.
    EmitOperator(ProblemArgs),
    /// Print the left-hand side of the induced PDE.
    EmitPde(EmitPdeArgs),
    /// Print the null function (or all solution branches, when the
    /// operator coefficients contain the unknown).
    Solve(ProblemArgs),
    /// Residual-check a candidate solution at random sample points.
    Verify(VerifyArgs),
    /// Run the randomized operator/null-function test suite.
    TheoremCheck(TheoremArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Latex,
}

impl Format {
    fn emit(self) -> EmitFormat {
        match self {
            Format::Plain => EmitFormat::Plain,
            Format::Latex => EmitFormat::Latex,
        }
    }
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem file (TOML).
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
    /// Residual tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Sample count override.
    #[arg(long)]
    samples: Option<usize>,
    /// RNG seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Domain override or extra axis, `VAR:LO:HI` (repeatable).
    #[arg(long = "domain", value_name = "VAR:LO:HI")]
    domain: Vec<String>,
    /// Emit one machine-readable JSON record instead of text.
    #[arg(long)]
    machine: bool,
}

#[derive(Args)]
struct EmitPdeArgs {
    #[command(flatten)]
    common: ProblemArgs,
    /// Divide out the common factor and normalize the leading coefficient.
    #[arg(long)]
    paper_form: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: ProblemArgs,
    /// Candidate expression; defaults to the solved null function with the
    /// problem's solution coefficients (symbols bound to random rationals).
    #[arg(long)]
    candidate: Option<String>,
}

#[derive(Args)]
struct TheoremArgs {
    /// Dimensions are drawn from 1..=dims (at most 4).
    #[arg(long, default_value_t = 3)]
    dims: u32,
    /// Order indices are drawn from 0..=max_n (at most 8).
    #[arg(long, default_value_t = 4)]
    max_n: u32,
    #[arg(long, default_value_t = 100)]
    trials: u32,
    #[arg(long, default_value_t = weiss_core::defaults::SEED)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    machine: bool,
    /// Test hook: flip the sign of one factor coefficient.
    #[arg(long, hide = true)]
    inject_flip_factor: Option<usize>,
    /// Test hook: corrupt the pre-Schwarzian.
    #[arg(long, hide = true)]
    inject_corrupt_pre_schwarzian: bool,
}

/// One machine-readable record per run.
#[derive(Serialize)]
struct MachineRecord {
    command: String,
    verdict: String,
    max_residual: Option<f64>,
    tolerance: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    rendered_expressions: BTreeMap<String, String>,
}

impl MachineRecord {
    fn new(command: &str) -> Self {
        MachineRecord {
            command: command.to_string(),
            verdict: "ok".to_string(),
            max_residual: None,
            tolerance: None,
            samples: None,
            seed: None,
            rendered_expressions: BTreeMap::new(),
        }
    }

    fn print(&self) {
        println!("{}", serde_json::to_string(self).expect("serializable record"));
    }
}

const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_PATTERN: u8 = 4;
const EXIT_INCONCLUSIVE: u8 = 5;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::EmitOperator(args) => cmd_emit_operator(&args),
        Command::EmitPde(args) => cmd_emit_pde(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::TheoremCheck(args) => cmd_theorem_check(&args),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

type CmdResult = Result<u8, (u8, String)>;
type DomainAxes = Vec<(String, f64, f64)>;

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::DegenerateProducingFunction => EXIT_DEGENERATE,
        Error::PatternNotRecognized(..) => EXIT_PATTERN,
        Error::DomainExhausted(_) => EXIT_INCONCLUSIVE,
        _ => EXIT_INVALID,
    }
}

fn load(args: &ProblemArgs) -> Result<(Problem, CheckOptions), (u8, String)> {
    let mut problem = Problem::load(&args.problem).map_err(|m| (EXIT_INVALID, m))?;
    let mut options = problem.options;
    if let Some(tol) = args.tol {
        options.tol = tol;
    }
    if let Some(samples) = args.samples {
        options.samples = samples;
    }
    if let Some(seed) = args.seed {
        options.seed = seed;
    }
    problem.options = options;
    Ok((problem, options))
}

fn domain_overrides(args: &ProblemArgs) -> Result<DomainAxes, (u8, String)> {
    args.domain
        .iter()
        .map(|raw| parse_domain_flag(raw).map_err(|m| (EXIT_INVALID, m)))
        .collect()
}

fn build_operator(problem: &Problem) -> Result<WeissOperator, (u8, String)> {
    build_weiss(&problem.operator, &problem.phi, problem.order_n)
        .map_err(|e| (exit_code_for(&e), e.to_string()))
}

fn cmd_emit_operator(args: &ProblemArgs) -> CmdResult {
    let (problem, options) = load(args)?;
    let op = build_operator(&problem)?;
    let q = q_potential(&problem.operator, &problem.phi)
        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
    let fmt = args.format.emit();

    let mut record = MachineRecord::new("emit-operator");
    record.seed = Some(options.seed);
    record
        .rendered_expressions
        .insert("V".into(), op.pre_schwarzian().emit(fmt));
    record.rendered_expressions.insert("Q".into(), q.emit(fmt));
    for (j, c) in op.factor_coefficients().iter().enumerate() {
        record
            .rendered_expressions
            .insert(format!("factor[{j}]"), factor_display(c, args.format));
    }

    if args.machine {
        record.print();
    } else {
        println!("V = {}", record.rendered_expressions["V"]);
        println!("Q = {}", record.rendered_expressions["Q"]);
        for (j, _) in op.factor_coefficients().iter().enumerate() {
            println!(
                "factor[{j}] = {}",
                record.rendered_expressions[&format!("factor[{j}]")]
            );
        }
    }
    Ok(0)
}

/// Renders one bracket `D + c V`.
fn factor_display(c: &weiss_core::expr::Rat, format: Format) -> String {
    let c_str = Expr::Rational(c.abs()).emit(format.emit());
    if c.is_zero() {
        "D".to_string()
    } else if c.is_negative() {
        format!("D - {c_str}*V")
    } else {
        format!("D + {c_str}*V")
    }
}

fn cmd_emit_pde(args: &EmitPdeArgs) -> CmdResult {
    let (problem, options) = load(&args.common)?;
    let op = build_operator(&problem)?;
    let mut pde = op.expand_pde(&problem.unknown);
    if args.paper_form {
        pde = divide_common_factor(&pde, &problem.unknown);
    }
    let rendered = pde.emit(args.common.format.emit());

    if args.common.machine {
        let mut record = MachineRecord::new("emit-pde");
        record.seed = Some(options.seed);
        record.rendered_expressions.insert("pde".into(), rendered);
        record.print();
    } else {
        println!("{rendered}");
    }
    Ok(0)
}

/// Computes the solution branches: the general null function when the
/// operator is linear in the unknown, the self-consistent branches
/// otherwise.
fn solve_branches(problem: &Problem) -> Result<Vec<Expr>, (u8, String)> {
    if problem.is_linear() {
        let nf = general_null(
            &problem.operator,
            &problem.phi,
            problem.order_n,
            &problem.solution_coefficients,
        )
        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
        Ok(vec![nf.expr])
    } else {
        let sol = solve_self_consistent(
            &problem.operator,
            &problem.phi,
            problem.order_n,
            &problem.solution_coefficients,
            &problem.unknown,
        )
        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
        Ok(sol.branches)
    }
}

fn cmd_solve(args: &ProblemArgs) -> CmdResult {
    let (problem, options) = load(args)?;
    let branches = solve_branches(&problem)?;
    let fmt = args.format.emit();

    if args.machine {
        let mut record = MachineRecord::new("solve");
        record.seed = Some(options.seed);
        for (i, branch) in branches.iter().enumerate() {
            record
                .rendered_expressions
                .insert(format!("branch[{i}]"), branch.emit(fmt));
        }
        record.print();
    } else {
        for branch in &branches {
            println!("{}", branch.emit(fmt));
        }
    }
    Ok(0)
}

/// Binds free solution-coefficient symbols to random rationals in
/// `[-2, 2]`, redrawing (with a budget) when the binding leaves no
/// admissible sample points (e.g. a radicand forced negative).
fn bind_candidates(
    problem: &Problem,
    branches: &[Expr],
    pde: &Expr,
    dom: &SampleDomain,
    options: &CheckOptions,
) -> Result<(Vec<Expr>, Vec<VerificationReport>), (u8, String)> {
    let free_symbols: Vec<String> = problem
        .solution_coefficients
        .iter()
        .filter_map(|c| match c {
            Expr::Var(name) => Some(name.clone()),
            _ => None,
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0xb1bd);
    let budget = if free_symbols.is_empty() { 1 } else { 24 };
    let mut last_note = String::new();
    for _ in 0..budget {
        let mut bindings = BTreeMap::new();
        for name in &free_symbols {
            // Random rational in [-2, 2].
            bindings.insert(name.clone(), Expr::Rational(rat(rng.random_range(-8..=8), 4)));
        }
        let bound: Vec<Expr> = branches
            .iter()
            .map(|b| b.substitute(&bindings))
            .collect();
        let mut reports = Vec::with_capacity(bound.len());
        let mut inconclusive = false;
        for candidate in &bound {
            let report = residual_check(pde, &problem.unknown, candidate, dom, options)
                .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            if let Some(note) = &report.note {
                last_note = note.clone();
                inconclusive = true;
                break;
            }
            reports.push(report);
        }
        if !inconclusive {
            return Ok((bound, reports));
        }
    }
    Err((
        EXIT_INCONCLUSIVE,
        format!("no admissible coefficient binding found: {last_note}"),
    ))
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let (problem, options) = load(&args.common)?;
    let overrides = domain_overrides(&args.common)?;
    let dom = problem
        .sample_domain(&overrides)
        .map_err(|m| (EXIT_INVALID, m))?;
    let op = build_operator(&problem)?;
    let pde = op.expand_pde(&problem.unknown);

    let (candidates, reports) = match &args.candidate {
        Some(text) => {
            let candidate = problem
                .context
                .parse(text)
                .map_err(|e| (EXIT_INVALID, format!("candidate `{text}`: {e}")))?;
            let report = residual_check(&pde, &problem.unknown, &candidate, &dom, &options)
                .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            (vec![candidate], vec![report])
        }
        None => {
            let branches = solve_branches(&problem)?;
            bind_candidates(&problem, &branches, &pde, &dom, &options)?
        }
    };

    let fmt = args.common.format.emit();
    let all_passed = reports.iter().all(|r| r.passed());
    let inconclusive = reports.iter().any(|r| r.note.is_some());
    let worst = reports
        .iter()
        .map(|r| r.max_residual)
        .fold(0.0f64, f64::max);

    if args.common.machine {
        let mut record = MachineRecord::new("verify");
        record.verdict = if inconclusive {
            "inconclusive".into()
        } else if all_passed {
            "pass".into()
        } else {
            "fail".into()
        };
        record.max_residual = Some(worst);
        record.tolerance = Some(options.tol);
        record.samples = Some(options.samples);
        record.seed = Some(options.seed);
        record
            .rendered_expressions
            .insert("pde".into(), pde.emit(fmt));
        for (i, candidate) in candidates.iter().enumerate() {
            record
                .rendered_expressions
                .insert(format!("candidate[{i}]"), candidate.emit(fmt));
        }
        record.print();
    } else {
        for (i, (candidate, report)) in candidates.iter().zip(&reports).enumerate() {
            if candidates.len() > 1 {
                println!("# branch {i}: {}", candidate.emit(fmt));
            }
            print!("{}", report.render_text());
        }
    }

    if inconclusive {
        Ok(EXIT_INCONCLUSIVE)
    } else if all_passed {
        Ok(0)
    } else {
        Ok(EXIT_FAIL)
    }
}

fn cmd_theorem_check(args: &TheoremArgs) -> CmdResult {
    if args.dims == 0 || args.dims > 4 {
        return Err((EXIT_INVALID, format!("--dims must be in 1..=4, got {}", args.dims)));
    }
    if args.max_n > 8 {
        return Err((EXIT_INVALID, format!("--max-n must be at most 8, got {}", args.max_n)));
    }
    let mutation = if let Some(j) = args.inject_flip_factor {
        Some(Mutation::FlipFactorSign(j))
    } else if args.inject_corrupt_pre_schwarzian {
        Some(Mutation::CorruptPreSchwarzian)
    } else {
        None
    };
    let cfg = TheoremConfig {
        dims: args.dims,
        min_n: 0,
        max_n: args.max_n,
        trials: args.trials,
        seed: args.seed,
        samples: args.samples.unwrap_or(weiss_core::defaults::SAMPLES),
        tol: args.tol.unwrap_or(1e-7),
        mutation,
    };
    let report = theorem_suite(&cfg).map_err(|e| (exit_code_for(&e), e.to_string()))?;

    if args.machine {
        let mut record = MachineRecord::new("theorem-check");
        record.verdict = if report.all_passed() { "pass" } else { "fail" }.into();
        record.tolerance = Some(cfg.tol);
        record.samples = Some(cfg.samples);
        record.seed = Some(cfg.seed);
        record
            .rendered_expressions
            .insert("trials".into(), report.outcomes.len().to_string());
        record
            .rendered_expressions
            .insert("passes".into(), report.passes.to_string());
        record
            .rendered_expressions
            .insert("failures".into(), report.failures.to_string());
        record.print();
    } else {
        println!(
            "trials = {}, passed = {}, failed = {}",
            report.outcomes.len(),
            report.passes,
            report.failures
        );
        for outcome in report.outcomes.iter().filter(|o| !o.passed) {
            println!(
                "failed trial {} (seed {}, d = {}, n = {}): {}",
                outcome.trial, cfg.seed, outcome.dim, outcome.n, outcome.detail
            );
        }
    }
    if report.all_passed() {
        Ok(0)
    } else {
        Ok(EXIT_FAIL)
    }
}
