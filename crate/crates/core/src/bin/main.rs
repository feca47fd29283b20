use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use ltl_workbench::automata::{build_dfa_finitary, classify, dump_dfa, dump_dra, dump_nba, ltl_to_dra, ltl_to_nba, Limits};
use ltl_workbench::family::{counterexample_pair, gridworld, instantiate_from_witness, simple_pair, CounterexamplePair, Shape};
use ltl_workbench::harness::{
    bound_report, curve_rows, group_curves, intercept_rows, read_csv, render_svg, sweep, write_csv, BoundStatus,
    CurveRow, Environment, ExperimentConfig, InterceptRow,
};
use ltl_workbench::learn::{learn_finitary, train, Algo, Hyper};
use ltl_workbench::ltl::{parse, parse_inferring_alphabet, Alphabet, Ltl};
use ltl_workbench::mdp::{load_model, load_policy, model_to_json, policy_to_json, Labeling, Mdp};
use ltl_workbench::probcheck::{optimal_value, policy_value};
use ltl_workbench::schemes::{build_product, Scheme, SchemeParams};
use ltl_workbench::witness::find_uncommittable;
use ltl_workbench::Error;

#[derive(Parser)]
#[command(name = "ltl-workbench", version, about = "LTL objectives for reinforcement learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct FormulaArgs {
    /// Formula text, e.g. 'G (a -> F b)'.
    formula: String,
    /// Comma-separated atom order; defaults to the sorted atoms of the formula.
    #[arg(long, value_delimiter = ',')]
    atoms: Option<Vec<String>>,
}

impl FormulaArgs {
    fn parse(&self) -> Result<Ltl> {
        Ok(match &self.atoms {
            Some(atoms) => parse(&self.formula, &Alphabet::new(atoms.iter())?)?,
            None => parse_inferring_alphabet(&self.formula)?,
        })
    }
}

#[derive(clap::Args)]
struct SchemeArgs {
    #[arg(long, default_value = "multi-discount")]
    scheme: Scheme,
    #[arg(long, default_value_t = SchemeParams::default().gamma)]
    gamma: f64,
    #[arg(long, default_value_t = SchemeParams::default().gamma_b)]
    gamma_b: f64,
    #[arg(long, default_value_t = SchemeParams::default().zeta)]
    zeta: f64,
}

impl SchemeArgs {
    fn params(&self) -> SchemeParams {
        SchemeParams {
            gamma: self.gamma,
            gamma_b: self.gamma_b,
            zeta: self.zeta,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AutomatonKind {
    Nba,
    Dra,
    Dfa,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Simple,
    Counterexample,
    WitnessPair,
    Gridworld,
}

#[derive(Subcommand)]
enum Command {
    /// Report guarantee, safety and finitary membership.
    Classify(FormulaArgs),
    /// Print an uncommittable witness.
    Witness(FormulaArgs),
    /// Print an automaton in the text dump format.
    Dump {
        #[arg(long, value_enum, default_value = "dra")]
        kind: AutomatonKind,
        #[command(flatten)]
        formula: FormulaArgs,
    },
    /// Satisfaction probability of a policy, or the optimum without one.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Write the certified optimal policy here.
        #[arg(long)]
        policy_out: Option<PathBuf>,
    },
    /// Emit model files of a built-in family.
    Gen {
        #[arg(value_enum)]
        family: Family,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        /// `k,l,u,v,m,n` for the counterexample family.
        #[arg(long, value_delimiter = ',')]
        shape: Option<Vec<usize>>,
        /// Formula for the witness pair.
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, value_delimiter = ',')]
        atoms: Option<Vec<String>>,
        /// Output path; pairs write `<stem>_m1.json` and `<stem>_m2.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the reward-scheme product as a model file.
    Build {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a tabular learner and write the greedy policy.
    Train {
        #[arg(long, default_value = "q")]
        algo: Algo,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample-based learner for finitary formulas.
    Finitary {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate ε-optimality probabilities over a (p, N) grid.
    Sweep {
        #[arg(long, default_value = "simple")]
        env: Environment,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value = "q")]
        algo: Algo,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long = "budgets", value_delimiter = ',')]
        n: Option<Vec<u64>>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        target_se: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interpolated budgets at which each curve reaches the cutoff.
    Intercept {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        cutoff: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare intercepts with the sample lower bound.
    Checkbound {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Render curves as an SVG line chart.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<(Mdp, Labeling)> {
    Ok(load_model(&read(path)?)?)
}

/// Parses over the model's atoms, falling back to the formula's own atoms
/// when it mentions any the model lacks.
fn formula_for(text: &str, lab: &Labeling) -> Result<Ltl> {
    match parse(text, &lab.alphabet) {
        Err(Error::UnknownAtom(_)) => Ok(parse_inferring_alphabet(text)?),
        other => Ok(other?),
    }
}

fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    if (0..=20).contains(&digits) {
        format!("{x:.prec$}", prec = digits as usize)
    } else {
        format!("{x:.11e}")
    }
}

fn write_pair(pair: &CounterexamplePair, lab: &Labeling, out: Option<&Path>) -> Result<()> {
    let (a, b) = (model_to_json(&pair.m1, lab), model_to_json(&pair.m2, lab));
    match out {
        Some(path) => {
            let stem = path.with_extension("");
            let stem = stem.to_string_lossy();
            emit(Some(Path::new(&format!("{stem}_m1.json"))), &a)?;
            emit(Some(Path::new(&format!("{stem}_m2.json"))), &b)
        }
        None => emit(None, &format!("{{\n\"m1\": {a},\n\"m2\": {b}\n}}\n")),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Classify(args) => {
            let f = args.parse()?;
            let r = classify(&f, &Limits::default())?;
            println!("guarantee\t{}", r.in_guarantee);
            println!("safety\t{}", r.in_safety);
            println!("finitary\t{}", r.in_finitary);
            if let Some(h) = r.horizon {
                println!("horizon\t{h}");
            }
        }
        Command::Witness(args) => {
            let f = args.parse()?;
            let w = find_uncommittable(&f, &Limits::default())?;
            print!("{}", w.display(&f.alphabet));
        }
        Command::Dump { kind, formula } => {
            let f = formula.parse()?;
            let limits = Limits::default();
            let text = match kind {
                AutomatonKind::Nba => dump_nba(&ltl_to_nba(&f, &limits)?),
                AutomatonKind::Dra => dump_dra(&ltl_to_dra(&f, &limits)?),
                AutomatonKind::Dfa => dump_dfa(&build_dfa_finitary(&f, &limits)?.0),
            };
            print!("{text}");
        }
        Command::Eval {
            model,
            formula,
            policy,
            policy_out,
        } => {
            let (mdp, lab) = load(&model)?;
            let f = formula_for(&formula, &lab)?;
            let result = match policy {
                Some(path) => {
                    let pol = load_policy(&read(&path)?, &mdp, &lab)?;
                    policy_value(&mdp, &lab, &f, &pol)?
                }
                None => optimal_value(&mdp, &lab, &f)?,
            };
            println!("{}", sig12(result.value));
            if let (Some(path), Some(pol)) = (policy_out, &result.policy) {
                emit(Some(&path), &policy_to_json(pol, &mdp))?;
            }
        }
        Command::Gen {
            family,
            p,
            shape,
            formula,
            atoms,
            out,
        } => match family {
            Family::Simple => {
                let pair = simple_pair(p)?;
                write_pair(&pair, &pair.labeling, out.as_deref())?;
            }
            Family::Counterexample => {
                let Some(&[k, l, u, v, m, n]) = shape.as_deref()
                else {
                    bail!("--shape k,l,u,v,m,n is required");
                };
                let pair = counterexample_pair(Shape { k, l, u, v, m, n }, p)?;
                write_pair(&pair, &pair.reach_labeling, out.as_deref())?;
            }
            Family::WitnessPair => {
                let Some(text) = formula else {
                    bail!("--formula is required");
                };
                let f = FormulaArgs { formula: text, atoms }.parse()?;
                let w = find_uncommittable(&f, &Limits::default())?;
                let pair = instantiate_from_witness(&w, &f, p)?;
                write_pair(&pair, &pair.labeling, out.as_deref())?;
            }
            Family::Gridworld => {
                let (mdp, lab, _) = gridworld(p)?;
                emit(out.as_deref(), &model_to_json(&mdp, &lab))?;
            }
        },
        Command::Build {
            scheme,
            model,
            formula,
            out,
        } => {
            let (mdp, lab) = load(&model)?;
            let f = formula_for(&formula, &lab)?;
            let prod = build_product(scheme.scheme, &mdp, &lab, &f, &scheme.params())?;
            let text = serde_json::to_string_pretty(&prod.to_model_file())?;
            emit(out.as_deref(), &text)?;
        }
        Command::Train {
            algo,
            scheme,
            model,
            formula,
            steps,
            seed,
            out,
        } => {
            let (mdp, lab) = load(&model)?;
            let f = formula_for(&formula, &lab)?;
            let prod = build_product(scheme.scheme, &mdp, &lab, &f, &scheme.params())?;
            let pol = train(algo, &prod, &Hyper::defaults(algo), steps, seed);
            emit(out.as_deref(), &policy_to_json(&pol, &mdp))?;
        }
        Command::Finitary {
            model,
            formula,
            epsilon,
            delta,
            seed,
            out,
        } => {
            let (mdp, lab) = load(&model)?;
            let f = formula_for(&formula, &lab)?;
            let (pol, cert) = learn_finitary(&mdp, &lab, &f, epsilon, delta, seed)?;
            eprintln!(
                "horizon {} samples per pair {} samples used {}",
                cert.horizon, cert.samples_per_pair, cert.samples_used
            );
            emit(out.as_deref(), &policy_to_json(&pol, &mdp))?;
        }
        Command::Sweep {
            env,
            scheme,
            algo,
            p,
            n,
            epsilon,
            target_se,
            seed,
            out,
        } => {
            let mut cfg = ExperimentConfig::new(env, scheme.scheme, algo, seed);
            cfg.params = scheme.params();
            cfg.epsilon = epsilon;
            cfg.target_se = target_se;
            if let Some(p) = p {
                cfg.p_grid = p;
            }
            if let Some(n) = n {
                cfg.n_grid = n;
            }
            let points = sweep(&cfg)?;
            let mut buf = Vec::new();
            write_csv(&curve_rows(&cfg, &points), &mut buf)?;
            emit(out.as_deref(), &String::from_utf8(buf)?)?;
        }
        Command::Intercept { input, cutoff, out } => {
            let rows: Vec<CurveRow> = read_csv(read(&input)?.as_bytes())?;
            let mut buf = Vec::new();
            write_csv(&intercept_rows(&rows, cutoff), &mut buf)?;
            emit(out.as_deref(), &String::from_utf8(buf)?)?;
        }
        Command::Checkbound { input, delta } => {
            let rows: Vec<InterceptRow> = read_csv(read(&input)?.as_bytes())?;
            let pairs: Vec<(f64, Option<f64>)> = rows.iter().map(|r| (r.p, r.n_star)).collect();
            let mut violated = false;
            println!("p\tintercept\tbound\tstatus");
            for e in bound_report(&pairs, delta) {
                let n = e.intercept.map_or_else(|| "-".to_string(), |n| format!("{n:.2}"));
                let status = match e.status {
                    BoundStatus::Satisfied { margin } => format!("ok (margin {margin:.2})"),
                    BoundStatus::Censored => "censored".to_string(),
                    BoundStatus::Violated { margin } => {
                        violated = true;
                        format!("VIOLATED (margin {margin:.2})")
                    }
                };
                println!("{}\t{n}\t{:.2}\t{status}", e.p, e.bound);
            }
            if violated {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Plot { input, out } => {
            let rows: Vec<CurveRow> = read_csv(read(&input)?.as_bytes())?;
            emit(Some(&out), &render_svg(&group_curves(&rows)))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
