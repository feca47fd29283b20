//! Monte-Carlo estimation of the probability that a learner returns an
//! ε-optimal policy, grid sweeps, intercepts and the sample lower bound.

mod plot;

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automata::Limits;
use crate::error::{Error, Result};
use crate::family::{gridworld, instantiate_from_witness, simple_pair};
use crate::learn::{train, Algo, Hyper};
use crate::ltl::{parse, Alphabet, Ltl};
use crate::mdp::{Labeling, Mdp};
use crate::probcheck::{optimal_value, policy_value};
use crate::schemes::{build_product, ProductMdp, Scheme, SchemeParams};
use crate::witness::find_uncommittable;

pub use plot::render_svg;

/// Environment variable capping worker threads.
pub const THREADS_VAR: &str = "WORKBENCH_THREADS";
pub const MIN_REPETITIONS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum Environment {
    /// One member of the simple pair (1 or 2).
    Simple(u8),
    /// Both members of the simple pair; the smaller estimate is reported.
    SimpleMin,
    /// The pair built from a witness of `formula` over `atoms`.
    WitnessPair { formula: String, atoms: Vec<String> },
    Gridworld,
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Environment::Simple(1) => f.write_str("simple"),
            Environment::Simple(i) => write!(f, "simple{i}"),
            Environment::SimpleMin => f.write_str("simple-min"),
            Environment::WitnessPair { formula, .. } => write!(f, "witness-pair:{formula}"),
            Environment::Gridworld => f.write_str("gridworld"),
        }
    }
}

impl FromStr for Environment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Environment> {
        match s {
            "simple" | "simple1" => Ok(Environment::Simple(1)),
            "simple2" => Ok(Environment::Simple(2)),
            "simple-min" => Ok(Environment::SimpleMin),
            "gridworld" => Ok(Environment::Gridworld),
            _ => match s.strip_prefix("witness-pair:") {
                Some(formula) => Ok(Environment::WitnessPair {
                    formula: formula.to_string(),
                    atoms: vec!["a".into(), "b".into()],
                }),
                None => Err(Error::InvalidConfig(format!("unknown environment `{s}`"))),
            },
        }
    }
}

/// One learning problem: an MDP, its labeling and the objective.
#[derive(Debug, Clone)]
pub struct Instance {
    pub mdp: Mdp,
    pub labeling: Labeling,
    pub formula: Ltl,
}

impl Environment {
    pub fn is_first_pair(&self) -> bool {
        !matches!(self, Environment::Gridworld)
    }

    /// The MDPs evaluated at one value of `p`.
    pub fn instances(&self, p: f64) -> Result<Vec<Instance>> {
        let member = |mdp: &Mdp, labeling: &Labeling, formula: &Ltl| Instance {
            mdp: mdp.clone(),
            labeling: labeling.clone(),
            formula: formula.clone(),
        };
        Ok(match self {
            Environment::Simple(i) => {
                let pair = simple_pair(p)?;
                match i {
                    1 => vec![member(&pair.m1, &pair.labeling, &pair.reach)],
                    2 => vec![member(&pair.m2, &pair.labeling, &pair.reach)],
                    _ => return Err(Error::InvalidConfig(format!("the simple pair has no member {i}"))),
                }
            }
            Environment::SimpleMin => {
                let pair = simple_pair(p)?;
                vec![
                    member(&pair.m1, &pair.labeling, &pair.reach),
                    member(&pair.m2, &pair.labeling, &pair.reach),
                ]
            }
            Environment::WitnessPair { formula, atoms } => {
                let f = parse(formula, &Alphabet::new(atoms.iter())?)?;
                let wit = find_uncommittable(&f, &Limits::default())?;
                let pair = instantiate_from_witness(&wit, &f, p)?;
                vec![member(&pair.m1, &pair.labeling, &f), member(&pair.m2, &pair.labeling, &f)]
            }
            Environment::Gridworld => {
                let (mdp, lab, f) = gridworld(p)?;
                vec![member(&mdp, &lab, &f)]
            }
        })
    }
}

/// Geometric progression from `from` to `to` with `steps` points.
pub fn geometric(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|i| from * (to / from).powf(i as f64 / (steps - 1) as f64))
            .collect(),
    }
}

/// Sample budgets on a geometric grid, rounded to integers.
pub fn budget_grid(from: f64, to: f64, steps: usize) -> Vec<u64> {
    geometric(from, to, steps).into_iter().map(|n| n.round() as u64).collect()
}

pub fn default_p_grid(env: &Environment) -> Vec<f64> {
    if env.is_first_pair() {
        (1..=5).map(|i| 10f64.powf(-((i + 1) as f64) / 2.0)).collect()
    } else {
        geometric(0.9, 0.6, 5)
    }
}

pub fn default_n_grid(env: &Environment) -> Vec<u64> {
    if env.is_first_pair() {
        budget_grid(1e1, 1e5, 21)
    } else {
        budget_grid(3540.0, 9e4, 21)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub environment: Environment,
    pub scheme: Scheme,
    pub algo: Algo,
    pub hyper: Hyper,
    pub params: SchemeParams,
    pub epsilon: f64,
    pub p_grid: Vec<f64>,
    pub n_grid: Vec<u64>,
    pub target_se: f64,
    pub cutoff: f64,
    pub delta: f64,
    pub master_seed: u64,
    /// Hard cap on repetitions per grid cell.
    pub max_repetitions: usize,
}

impl ExperimentConfig {
    /// A configuration on the default grids for `environment`.
    pub fn new(environment: Environment, scheme: Scheme, algo: Algo, master_seed: u64) -> Self {
        ExperimentConfig {
            p_grid: default_p_grid(&environment),
            n_grid: default_n_grid(&environment),
            environment,
            scheme,
            algo,
            hyper: Hyper::defaults(algo),
            params: SchemeParams::default(),
            epsilon: 0.1,
            target_se: 0.01,
            cutoff: 0.9,
            delta: 0.1,
            master_seed,
            max_repetitions: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.p_grid.is_empty() || self.n_grid.is_empty() {
            return fail("grids must be nonempty");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return fail("epsilon must be positive");
        }
        if self.target_se.is_nan() || self.target_se <= 0.0 {
            return fail("target standard error must be positive");
        }
        if self.max_repetitions < MIN_REPETITIONS {
            return fail("repetition cap is below the repetition floor");
        }
        self.hyper.validate()?;
        self.params.validate()
    }
}

/// Estimated probability of an ε-optimal outcome at one `(p, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub pac_estimate: f64,
    pub stderr: f64,
    pub repetitions: usize,
}

/// Binomial standard error with one pseudo-success and one pseudo-failure.
pub fn adjusted_stderr(successes: usize, n: usize) -> f64 {
    let p = (successes as f64 + 1.0) / (n as f64 + 2.0);
    (p * (1.0 - p) / n as f64).sqrt()
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one repetition; a pure function of its grid coordinates.
pub fn repetition_seed(master: u64, p_index: usize, n_index: usize, rep: usize) -> u64 {
    [p_index as u64, n_index as u64, rep as u64]
        .into_iter()
        .fold(splitmix(master), |acc, x| splitmix(acc ^ splitmix(x)))
}

/// Products and optimal values of every member at one `p`.
pub struct Prepared {
    members: Vec<(Instance, ProductMdp, f64)>,
}

impl Prepared {
    pub fn new(cfg: &ExperimentConfig, p: f64) -> Result<Prepared> {
        let members = cfg
            .environment
            .instances(p)?
            .into_iter()
            .map(|inst| {
                let prod = build_product(cfg.scheme, &inst.mdp, &inst.labeling, &inst.formula, &cfg.params)?;
                let opt = optimal_value(&inst.mdp, &inst.labeling, &inst.formula)?.value;
                Ok((inst, prod, opt))
            })
            .collect::<Result<_>>()?;
        Ok(Prepared { members })
    }

    /// Optimal satisfaction probability of each member.
    pub fn optimal_values(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.2).collect()
    }
}

fn trial(cfg: &ExperimentConfig, member: &(Instance, ProductMdp, f64), n: u64, seed: u64) -> Result<bool> {
    let (inst, prod, opt) = member;
    let pol = train(cfg.algo, prod, &cfg.hyper, n, seed);
    let v = policy_value(&inst.mdp, &inst.labeling, &inst.formula, &pol)?.value;
    Ok(v >= opt - cfg.epsilon)
}

const BATCH: usize = 64;

fn estimate_member(
    cfg: &ExperimentConfig,
    member: &(Instance, ProductMdp, f64),
    seeds: impl Fn(usize) -> u64 + Sync,
    p: f64,
    n: u64,
) -> Result<CurvePoint> {
    let mut outcomes: Vec<bool> = Vec::new();
    let mut successes = 0;
    loop {
        let start = outcomes.len();
        let batch: Vec<bool> = (start..start + BATCH)
            .into_par_iter()
            .map(|r| trial(cfg, member, n, seeds(r)))
            .collect::<Result<_>>()?;
        for ok in batch {
            outcomes.push(ok);
            successes += usize::from(ok);
            let reps = outcomes.len();
            let se = adjusted_stderr(successes, reps);
            if (reps >= MIN_REPETITIONS && se <= cfg.target_se) || reps >= cfg.max_repetitions {
                return Ok(CurvePoint {
                    p,
                    n,
                    pac_estimate: successes as f64 / reps as f64,
                    stderr: se,
                    repetitions: reps,
                });
            }
        }
    }
}

/// Estimates one grid cell. Repetitions stop at the first count, at least
/// the floor, whose adjusted standard error meets the target.
pub fn estimate_pac_prob(cfg: &ExperimentConfig, prepared: &Prepared, p_index: usize, n_index: usize) -> Result<CurvePoint> {
    let (p, n) = (cfg.p_grid[p_index], cfg.n_grid[n_index]);
    let mut best: Option<CurvePoint> = None;
    for (k, member) in prepared.members.iter().enumerate() {
        let seeds = |r: usize| repetition_seed(cfg.master_seed ^ ((k as u64) << 32), p_index, n_index, r);
        let point = estimate_member(cfg, member, seeds, p, n)?;
        if best.is_none_or(|b| point.pac_estimate < b.pac_estimate) {
            best = Some(point);
        }
    }
    Ok(best.expect("environments have at least one member"))
}

/// Runs `f` on a pool capped by [`THREADS_VAR`].
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var(THREADS_VAR).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Every grid cell, in p-major then N order.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    with_thread_cap(|| {
        let prepared: Vec<Prepared> = cfg
            .p_grid
            .par_iter()
            .map(|&p| Prepared::new(cfg, p))
            .collect::<Result<_>>()?;
        let cells: Vec<(usize, usize)> = (0..cfg.p_grid.len())
            .flat_map(|i| (0..cfg.n_grid.len()).map(move |j| (i, j)))
            .collect();
        cells
            .par_iter()
            .map(|&(i, j)| estimate_pac_prob(cfg, &prepared[i], i, j))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub environment: String,
    pub scheme: String,
    pub algo: String,
    pub p: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub epsilon: f64,
    pub pac_estimate: f64,
    pub stderr: f64,
    pub repetitions: usize,
    pub master_seed: u64,
}

impl CurveRow {
    pub fn point(&self) -> CurvePoint {
        CurvePoint {
            p: self.p,
            n: self.n,
            pac_estimate: self.pac_estimate,
            stderr: self.stderr,
            repetitions: self.repetitions,
        }
    }
}

pub fn curve_rows(cfg: &ExperimentConfig, points: &[CurvePoint]) -> Vec<CurveRow> {
    points
        .iter()
        .map(|pt| CurveRow {
            environment: cfg.environment.to_string(),
            scheme: cfg.scheme.to_string(),
            algo: cfg.algo.to_string(),
            p: pt.p,
            n: pt.n,
            epsilon: cfg.epsilon,
            pac_estimate: pt.pac_estimate,
            stderr: pt.stderr,
            repetitions: pt.repetitions,
            master_seed: cfg.master_seed,
        })
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_error)
}

/// Curves keyed by environment, scheme, algorithm and `p`, in order of
/// first appearance, each sorted by `N`.
pub fn group_curves(rows: &[CurveRow]) -> Vec<(CurveKey, Vec<CurvePoint>)> {
    let mut groups: Vec<(CurveKey, Vec<CurvePoint>)> = Vec::new();
    for row in rows {
        let key = CurveKey {
            environment: row.environment.clone(),
            scheme: row.scheme.clone(),
            algo: row.algo.clone(),
            p: row.p,
        };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push(row.point()),
            None => groups.push((key, vec![row.point()])),
        }
    }
    for (_, pts) in &mut groups {
        pts.sort_by_key(|pt| pt.n);
    }
    groups
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveKey {
    pub environment: String,
    pub scheme: String,
    pub algo: String,
    pub p: f64,
}

fn crossing(curve: &[CurvePoint], cutoff: f64, shift: f64) -> Option<f64> {
    let value = |pt: &CurvePoint| pt.pac_estimate + shift * pt.stderr;
    let i = curve.iter().position(|pt| value(pt) >= cutoff)?;
    if i == 0 {
        return Some(curve[0].n as f64);
    }
    let (a, b) = (&curve[i - 1], &curve[i]);
    let (la, lb) = ((a.n as f64).ln(), (b.n as f64).ln());
    let t = (cutoff - value(a)) / (value(b) - value(a));
    Some((la + t * (lb - la)).exp())
}

/// Budget at which the curve first reaches `cutoff`, interpolated linearly
/// in `(ln N, estimate)` between the bracketing points.
pub fn find_intercept(curve: &[CurvePoint], cutoff: f64) -> Option<f64> {
    crossing(curve, cutoff, 0.0)
}

/// Intercepts of the curve shifted up and down by `k` standard errors.
/// The upward shift crosses first; a missing crossing is infinite.
pub fn intercept_band(curve: &[CurvePoint], cutoff: f64, k: f64) -> (f64, f64) {
    let inf = |x: Option<f64>| x.unwrap_or(f64::INFINITY);
    (inf(crossing(curve, cutoff, k)), inf(crossing(curve, cutoff, -k)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterceptRow {
    pub environment: String,
    pub scheme: String,
    pub algo: String,
    pub p: f64,
    pub cutoff: f64,
    /// Empty when the curve never reaches the cutoff.
    pub n_star: Option<f64>,
}

pub fn intercept_rows(rows: &[CurveRow], cutoff: f64) -> Vec<InterceptRow> {
    group_curves(rows)
        .into_iter()
        .map(|(key, pts)| InterceptRow {
            environment: key.environment,
            scheme: key.scheme,
            algo: key.algo,
            p: key.p,
            cutoff,
            n_star: find_intercept(&pts, cutoff),
        })
        .collect()
}

/// Minimum number of samples any learner needs at `p` to be ε-optimal with
/// probability `1 - delta`.
pub fn sample_lower_bound(p: f64, delta: f64) -> f64 {
    (2.0 * delta).ln() / (1.0 - p).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundStatus {
    Satisfied { margin: f64 },
    Censored,
    Violated { margin: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundEntry {
    pub p: f64,
    pub intercept: Option<f64>,
    pub bound: f64,
    pub status: BoundStatus,
}

/// Compares every intercept against [`sample_lower_bound`]. Missing
/// intercepts are censored, not violations.
pub fn bound_report(intercepts: &[(f64, Option<f64>)], delta: f64) -> Vec<BoundEntry> {
    intercepts
        .iter()
        .map(|&(p, intercept)| {
            let bound = sample_lower_bound(p, delta).max(0.0);
            let status = match intercept {
                None => BoundStatus::Censored,
                Some(n) if n >= bound => BoundStatus::Satisfied { margin: n - bound },
                Some(n) => BoundStatus::Violated { margin: n - bound },
            };
            BoundEntry { p, intercept, bound, status }
        })
        .collect()
}

/// [`bound_report`], failing with `BoundViolated` on any violation.
pub fn check_lower_bound(intercepts: &[(f64, Option<f64>)], delta: f64) -> Result<Vec<BoundEntry>> {
    let report = bound_report(intercepts, delta);
    let bad: Vec<String> = report
        .iter()
        .filter(|e| matches!(e.status, BoundStatus::Violated { .. }))
        .map(|e| format!("p={} N*={:?} < {}", e.p, e.intercept, e.bound))
        .collect();
    if bad.is_empty() {
        Ok(report)
    } else {
        Err(Error::BoundViolated(bad.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(n: u64, est: f64) -> CurvePoint {
        CurvePoint {
            p: 0.1,
            n,
            pac_estimate: est,
            stderr: 0.01,
            repetitions: 100,
        }
    }

    #[test]
    fn interpolated_intercept() {
        let n = find_intercept(&[pt(10, 0.1), pt(100, 0.85), pt(178, 0.93)], 0.9).unwrap();
        let expected = (100f64.ln() + 0.05 / 0.08 * (178f64.ln() - 100f64.ln())).exp();
        assert!((n - expected).abs() < 1e-9);
        assert!((n - 143.4).abs() < 0.05);
        assert_eq!(find_intercept(&[pt(10, 0.2), pt(100, 0.7)], 0.9), None);
        let (lo, hi) = intercept_band(&[pt(100, 0.85), pt(178, 0.93)], 0.9, 2.0);
        assert!(lo < n && n < hi);
    }

    #[test]
    fn lower_bound_values() {
        assert!((sample_lower_bound(0.1, 0.1) - 15.27).abs() < 0.01);
        assert!((sample_lower_bound(0.01, 0.1) - 160.1).abs() < 0.05);
        assert_eq!(sample_lower_bound(0.3, 0.5), 0.0);
        let report = check_lower_bound(&[(0.1, Some(20.0)), (0.01, None)], 0.1).unwrap();
        assert_eq!(report[1].status, BoundStatus::Censored);
        assert!(matches!(check_lower_bound(&[(0.01, Some(100.0))], 0.1), Err(Error::BoundViolated(_))));
    }

    #[test]
    fn default_grids() {
        let env = Environment::Simple(1);
        let ps = default_p_grid(&env);
        assert_eq!(ps.len(), 5);
        assert!((ps[0] - 0.1).abs() < 1e-15 && (ps[4] - 1e-3).abs() < 1e-15);
        let ns = default_n_grid(&env);
        assert_eq!((ns.len(), ns[0], ns[20]), (21, 10, 100_000));
        let g = default_n_grid(&Environment::Gridworld);
        assert_eq!((g[0], g[20]), (3540, 90_000));
        let gp = default_p_grid(&Environment::Gridworld);
        assert!((gp[0] - 0.9).abs() < 1e-15 && (gp[4] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn stderr_and_seeds() {
        assert!((adjusted_stderr(0, 98) - (1.0 / 100.0 * 99.0 / 100.0 / 98.0f64).sqrt()).abs() < 1e-15);
        assert_ne!(repetition_seed(1, 0, 0, 0), repetition_seed(1, 0, 0, 1));
        assert_ne!(repetition_seed(1, 1, 0, 0), repetition_seed(1, 0, 1, 0));
        assert_eq!(repetition_seed(7, 2, 3, 4), repetition_seed(7, 2, 3, 4));
    }

    #[test]
    fn environment_names() {
        for name in ["simple", "simple2", "simple-min", "gridworld", "witness-pair:F a"] {
            assert_eq!(name.parse::<Environment>().unwrap().to_string(), name);
        }
        assert!("maze".parse::<Environment>().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let cfg = ExperimentConfig::new(Environment::Simple(1), Scheme::MultiDiscount, Algo::Q, 3);
        let rows = curve_rows(&cfg, &[pt(10, 0.0), pt(100, 0.95)]);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("environment,scheme,algo,p,N,epsilon,pac_estimate,stderr,repetitions,master_seed\n"));
        let back: Vec<CurveRow> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        let ints = intercept_rows(&back, 0.9);
        assert_eq!(ints.len(), 1);
        let mut buf = Vec::new();
        write_csv(&ints, &mut buf).unwrap();
        let again: Vec<InterceptRow> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(again, ints);
    }

    #[test]
    fn small_sweep_is_reproducible() {
        let mut cfg = ExperimentConfig::new(Environment::Simple(1), Scheme::MultiDiscount, Algo::Q, 11);
        cfg.p_grid = vec![0.5];
        cfg.n_grid = vec![10, 2000];
        cfg.target_se = 0.05;
        let a = sweep(&cfg).unwrap();
        assert_eq!(a, sweep(&cfg).unwrap());
        assert!(a.iter().all(|pt| pt.stderr <= 0.05 && pt.repetitions >= MIN_REPETITIONS));
        assert!(a[1].pac_estimate > a[0].pac_estimate);
    }
}
