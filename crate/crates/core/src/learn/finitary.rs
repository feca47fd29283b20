use std::collections::{HashMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automata::{build_dfa_finitary, Limits};
use crate::error::{Error, Result};
use crate::ltl::Ltl;
use crate::mdp::{sample_step, translate_letters, FiniteMemoryPolicy, Labeling, Mdp, Memory};

/// Sample accounting of one [`learn_finitary`] run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacCertificate {
    pub epsilon: f64,
    pub delta: f64,
    /// Total generative-model calls.
    pub samples_used: u64,
    pub horizon: usize,
    /// Calls per product state, action and step.
    pub samples_per_pair: u64,
}

/// Learns an `epsilon`-optimal policy for a finitary `f` with probability at
/// least `1 - delta` from generative-model samples of `mdp`.
///
/// The policy remembers the automaton state and the elapsed step count
/// (saturating at the horizon).
pub fn learn_finitary(
    mdp: &Mdp,
    lab: &Labeling,
    f: &Ltl,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<(FiniteMemoryPolicy, PacCertificate)> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidTolerance(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidTolerance(format!("delta must lie in (0, 1), got {delta}")));
    }
    let (dfa, horizon) = build_dfa_finitary(f, &Limits::default())?;
    let flab = lab.reindex(&f.alphabet);
    let na = mdp.num_actions();

    let start = (mdp.initial, dfa.initial);
    let mut index = HashMap::from([(start, 0usize)]);
    let mut states = vec![start];
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let (s, q) = states[x];
        let q2 = dfa.next(q, flab.label(s));
        for a in 0..na {
            for &(t, _) in mdp.dist(s, a) {
                let len = states.len();
                let id = *index.entry((t, q2)).or_insert(len);
                if id == len {
                    states.push((t, q2));
                    queue.push_back(id);
                }
            }
        }
    }
    let n = states.len();
    let reward: Vec<f64> = states
        .iter()
        .map(|&(s, q)| {
            let entered = !dfa.is_accepting_sink(q) && dfa.is_accepting_sink(dfa.next(q, flab.label(s)));
            if entered {
                1.0
            } else {
                0.0
            }
        })
        .collect();

    let m = if horizon == 0 {
        0
    } else {
        let h = horizon as f64;
        let count = (4.0 * n as f64 * na as f64 * h / delta).ln();
        (2.0 * h * h / (epsilon * epsilon) * count).ceil() as u64
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut value = vec![0.0; n];
    let mut greedy = vec![0usize; horizon * n];
    let mut counts = vec![0u64; mdp.num_states()];
    for step in (0..horizon).rev() {
        let mut next_value = vec![0.0; n];
        for x in 0..n {
            let (s, q) = states[x];
            let q2 = dfa.next(q, flab.label(s));
            let mut best = (f64::NEG_INFINITY, 0);
            for a in 0..na {
                counts.iter_mut().for_each(|c| *c = 0);
                for _ in 0..m {
                    counts[sample_step(mdp, s, a, &mut rng)?] += 1;
                }
                let future: f64 = counts
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| c > 0)
                    .map(|(t, &c)| c as f64 * value[index[&(t, q2)]])
                    .sum::<f64>()
                    / m as f64;
                let qv = reward[x] + future;
                if qv > best.0 {
                    best = (qv, a);
                }
            }
            next_value[x] = best.0;
            greedy[step * n + x] = best.1;
        }
        value = next_value;
    }

    let span = horizon + 1;
    let k = dfa.num_states() * span;
    let translated = translate_letters(&lab.alphabet, &f.alphabet);
    let mut update = Vec::with_capacity(k * translated.len());
    for q in 0..dfa.num_states() {
        for t in 0..span {
            for &l in &translated {
                update.push(dfa.next(q, l) * span + (t + 1).min(horizon));
            }
        }
    }
    let memory = Memory::new(lab.alphabet.num_letters(), update, dfa.initial * span)?;
    let mut decision = vec![0.0; mdp.num_states() * k * na];
    for s in 0..mdp.num_states() {
        for mem in 0..k {
            let (q, t) = (mem / span, mem % span);
            let a = match index.get(&(s, q)) {
                Some(&x) if t < horizon => greedy[t * n + x],
                _ => 0,
            };
            decision[(s * k + mem) * na + a] = 1.0;
        }
    }
    let policy = FiniteMemoryPolicy::new(memory, mdp.num_states(), na, decision)?;
    let cert = PacCertificate {
        epsilon,
        delta,
        samples_used: m * (n * na * horizon) as u64,
        horizon,
        samples_per_pair: m,
    };
    Ok((policy, cert))
}
