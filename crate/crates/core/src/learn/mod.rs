//! Tabular learners over reward-scheme products and a sample-based learner
//! for finitary formulas.

mod finitary;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mdp::FiniteMemoryPolicy;
use crate::schemes::ProductMdp;

pub use finitary::{learn_finitary, PacCertificate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Q,
    DoubleQ,
    Sarsa,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Q, Algo::DoubleQ, Algo::Sarsa];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Q => "q",
            Algo::DoubleQ => "double-q",
            Algo::Sarsa => "sarsa",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algo> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm `{s}`")))
    }
}

/// Learner hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    /// Learning rate is `lr_k / (lr_k + t)` after `t` prior updates of the pair.
    pub lr_k: f64,
    pub explore_start: f64,
    pub explore_end: f64,
    pub reset_every: usize,
    pub lambda: f64,
    pub q_init: f64,
}

impl Hyper {
    pub fn defaults(algo: Algo) -> Hyper {
        let (lr_k, explore_end) = match algo {
            Algo::Q => (10.0, 0.1),
            Algo::DoubleQ => (30.0, 0.1),
            Algo::Sarsa => (10.0, 1e-3),
        };
        Hyper {
            lr_k,
            explore_start: 1.0,
            explore_end,
            reset_every: 10,
            lambda: 0.0,
            q_init: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lr_k > 0.0
            && 0.0 <= self.explore_end
            && self.explore_end <= self.explore_start
            && self.explore_start <= 1.0
            && self.reset_every >= 1
            && self.q_init.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("hyperparameters out of range: {self:?}")))
        }
    }
}

struct Table {
    q: Vec<f64>,
    visits: Vec<u32>,
}

impl Table {
    fn new(len: usize, init: f64) -> Self {
        Table {
            q: vec![init; len],
            visits: vec![0; len],
        }
    }

    fn update(&mut self, i: usize, target: f64, lr_k: f64) {
        let rate = lr_k / (lr_k + self.visits[i] as f64);
        self.visits[i] = self.visits[i].saturating_add(1);
        self.q[i] += rate * (target - self.q[i]);
    }
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = a;
        }
    }
    best
}

fn argmax_random<R: Rng>(values: &[f64], rng: &mut R) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = values.iter().filter(|&&v| v == best).count();
    let pick = if ties > 1 { rng.random_range(0..ties) } else { 0 };
    values
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v == best)
        .nth(pick)
        .map_or(0, |(a, _)| a)
}

struct Learner<'a> {
    algo: Algo,
    prod: &'a ProductMdp,
    hyper: &'a Hyper,
    tables: Vec<Table>,
    scratch: Vec<f64>,
}

impl Learner<'_> {
    fn combined(&mut self, x: usize) -> &[f64] {
        let na = self.prod.num_actions;
        let range = x * na..(x + 1) * na;
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.tables[0].q[range.clone()]);
        if let Some(second) = self.tables.get(1) {
            for (s, v) in self.scratch.iter_mut().zip(&second.q[range]) {
                *s += v;
            }
        }
        &self.scratch
    }

    fn behave<R: Rng>(&mut self, x: usize, explore: f64, rng: &mut R) -> usize {
        if rng.random::<f64>() < explore {
            rng.random_range(0..self.prod.num_actions)
        } else {
            let values = self.combined(x).to_vec();
            argmax_random(&values, rng)
        }
    }

    fn greedy_rows(&mut self) -> Vec<Vec<f64>> {
        (0..self.prod.num_states())
            .map(|x| {
                let values = self.combined(x);
                let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let ties = values.iter().filter(|&&v| v == best).count() as f64;
                values.iter().map(|&v| if v == best { 1.0 / ties } else { 0.0 }).collect()
            })
            .collect()
    }
}

/// Outcome of a training run on the product.
#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    /// Greedy action distribution per product state; exact ties split evenly.
    pub rows: Vec<Vec<f64>>,
    /// Transitions drawn from the product.
    pub samples: u64,
}

/// Trains on `prod` for exactly `budget` sampled transitions.
pub fn train_product(algo: Algo, prod: &ProductMdp, hyper: &Hyper, budget: u64, seed: u64) -> Trained {
    let na = prod.num_actions;
    let len = prod.num_states() * na;
    let tables = match algo {
        Algo::DoubleQ => vec![Table::new(len, hyper.q_init), Table::new(len, hyper.q_init)],
        _ => vec![Table::new(len, hyper.q_init)],
    };
    let mut learner = Learner {
        algo,
        prod,
        hyper,
        tables,
        scratch: Vec::with_capacity(na),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let explore_at = |t: u64| {
        let frac = if budget == 0 { 0.0 } else { t as f64 / budget as f64 };
        hyper.explore_start + (hyper.explore_end - hyper.explore_start) * frac
    };
    let mut x = prod.initial;
    let mut steps = 0;
    let mut pending: Option<usize> = None;
    let mut samples = 0;
    for t in 0..budget {
        let explore = explore_at(t);
        let a = match pending.take() {
            Some(a) => a,
            None => learner.behave(x, explore, &mut rng),
        };
        let edge = prod.sample(x, a, &mut rng);
        samples += 1;
        let y = edge.next;
        let terminal = prod.episodic && prod.is_sink(y);
        let i = x * na + a;
        let lr_k = learner.hyper.lr_k;
        match learner.algo {
            Algo::Q => {
                let table = &mut learner.tables[0];
                let future = if terminal {
                    0.0
                } else {
                    table.q[y * na..(y + 1) * na].iter().copied().fold(f64::NEG_INFINITY, f64::max)
                };
                table.update(i, edge.reward + edge.discount * future, lr_k);
            }
            Algo::DoubleQ => {
                let k = usize::from(rng.random::<bool>());
                let future = if terminal {
                    0.0
                } else {
                    let b = argmax_lowest(&learner.tables[k].q[y * na..(y + 1) * na]);
                    learner.tables[1 - k].q[y * na + b]
                };
                learner.tables[k].update(i, edge.reward + edge.discount * future, lr_k);
            }
            Algo::Sarsa => {
                let future = if terminal {
                    0.0
                } else {
                    let b = learner.behave(y, explore_at(t + 1), &mut rng);
                    pending = Some(b);
                    learner.tables[0].q[y * na + b]
                };
                learner.tables[0].update(i, edge.reward + edge.discount * future, lr_k);
            }
        }
        steps += 1;
        x = y;
        if steps >= hyper.reset_every || terminal {
            x = prod.initial;
            steps = 0;
            pending = None;
        }
    }
    Trained {
        rows: learner.greedy_rows(),
        samples,
    }
}

/// [`train_product`] read back as a policy on the environment.
pub fn train(algo: Algo, prod: &ProductMdp, hyper: &Hyper, budget: u64, seed: u64) -> FiniteMemoryPolicy {
    prod.to_policy(&train_product(algo, prod, hyper, budget, seed).rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::simple_pair;
    use crate::probcheck::policy_value;
    use crate::schemes::{build_product, Scheme, SchemeParams};

    fn m1_product(p: f64) -> (ProductMdp, crate::family::CounterexamplePair) {
        let pair = simple_pair(p).unwrap();
        let prod =
            build_product(Scheme::MultiDiscount, &pair.m1, &pair.labeling, &pair.reach, &SchemeParams::default())
                .unwrap();
        (prod, pair)
    }

    #[test]
    fn names_and_defaults() {
        for a in Algo::ALL {
            assert_eq!(a.name().parse::<Algo>().unwrap(), a);
            Hyper::defaults(a).validate().unwrap();
        }
        assert_eq!(Hyper::defaults(Algo::DoubleQ).lr_k, 30.0);
        assert_eq!(Hyper::defaults(Algo::Sarsa).explore_end, 1e-3);
        assert!("ql".parse::<Algo>().is_err());
    }

    #[test]
    fn zero_budget_splits_ties() {
        let (prod, _) = m1_product(0.1);
        let out = train_product(Algo::Q, &prod, &Hyper::defaults(Algo::Q), 0, 1);
        assert_eq!(out.samples, 0);
        assert!(out.rows.iter().all(|r| r == &vec![0.5, 0.5]));
    }

    #[test]
    fn deterministic_in_seed() {
        let (prod, _) = m1_product(0.1);
        for algo in Algo::ALL {
            let h = Hyper::defaults(algo);
            let a = train_product(algo, &prod, &h, 2000, 5);
            assert_eq!(a.samples, 2000);
            assert_eq!(a, train_product(algo, &prod, &h, 2000, 5));
        }
    }

    #[test]
    fn learns_easy_instance() {
        let (prod, pair) = m1_product(0.5);
        for algo in Algo::ALL {
            let pol = train(algo, &prod, &Hyper::defaults(algo), 20_000, 3);
            let v = policy_value(&pair.m1, &pair.labeling, &pair.reach, &pol).unwrap().value;
            assert!(v > 0.99, "{algo}: {v}");
        }
    }
}
