//! JSON model and policy files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FiniteMemoryPolicy, Labeling, Mdp, Memory};
use crate::error::{Error, Result};
use crate::ltl::{Alphabet, Letter};

/// Row sums within this distance of 1 are renormalized on load.
pub const LOAD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub src: String,
    pub action: String,
    pub dst: String,
    pub prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    /// Atom order; defaults to the sorted atoms used in `labels`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<String>>,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub initial: String,
    pub transitions: Vec<TransitionRow>,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<String>>,
}

fn index(names: &[String], name: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::InvalidModel(format!("unknown {what} `{name}`")))
}

impl ModelFile {
    pub fn alphabet(&self) -> Result<Alphabet> {
        match &self.atoms {
            Some(atoms) => Alphabet::new(atoms.iter()),
            None => {
                let mut atoms: Vec<&String> = self.labels.values().flatten().collect();
                atoms.sort();
                atoms.dedup();
                Alphabet::new(atoms)
            }
        }
    }

    pub fn to_model(&self) -> Result<(Mdp, Labeling)> {
        let (n, na) = (self.states.len(), self.actions.len());
        let mut trans: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n * na];
        for row in &self.transitions {
            let s = index(&self.states, &row.src, "state")?;
            let a = index(&self.actions, &row.action, "action")?;
            let t = index(&self.states, &row.dst, "state")?;
            let dist = &mut trans[s * na + a];
            match dist.iter_mut().find(|(u, _)| *u == t) {
                Some(e) => e.1 += row.prob,
                None => dist.push((t, row.prob)),
            }
        }
        for (i, dist) in trans.iter_mut().enumerate() {
            let sum: f64 = dist.iter().map(|(_, p)| p).sum();
            if dist.is_empty() || (sum - 1.0).abs() > LOAD_TOLERANCE {
                return Err(Error::InvalidModel(format!(
                    "state `{}` action `{}` has total probability {sum}",
                    self.states[i / na],
                    self.actions[i % na]
                )));
            }
            for e in dist.iter_mut() {
                e.1 /= sum;
            }
        }
        let initial = index(&self.states, &self.initial, "state")?;
        let mdp = Mdp::new(self.states.clone(), self.actions.clone(), initial, trans)?;
        let alphabet = self.alphabet()?;
        let mut letters = vec![Letter::EMPTY; n];
        for (state, atoms) in &self.labels {
            let s = index(&self.states, state, "state")?;
            letters[s] = alphabet
                .letter(atoms)
                .map_err(|e| Error::InvalidModel(e.to_string()))?;
        }
        Ok((mdp, Labeling::new(alphabet, letters)?))
    }

    pub fn from_model(mdp: &Mdp, lab: &Labeling) -> ModelFile {
        let mut transitions = Vec::new();
        for s in 0..mdp.num_states() {
            for a in 0..mdp.num_actions() {
                for &(t, p) in mdp.dist(s, a) {
                    transitions.push(TransitionRow {
                        src: mdp.state_names[s].clone(),
                        action: mdp.action_names[a].clone(),
                        dst: mdp.state_names[t].clone(),
                        prob: p,
                        reward: None,
                        discount: None,
                    });
                }
            }
        }
        let labels = (0..mdp.num_states())
            .filter(|&s| lab.label(s) != Letter::EMPTY)
            .map(|s| {
                let atoms = lab.alphabet.letter_atoms(lab.label(s));
                (mdp.state_names[s].clone(), atoms.into_iter().map(String::from).collect())
            })
            .collect();
        ModelFile {
            atoms: Some(lab.alphabet.names().to_vec()),
            states: mdp.state_names.clone(),
            actions: mdp.action_names.clone(),
            initial: mdp.state_names[mdp.initial].clone(),
            transitions,
            labels,
        }
    }
}

pub fn load_model(text: &str) -> Result<(Mdp, Labeling)> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.to_model()
}

pub fn model_to_json(mdp: &Mdp, lab: &Labeling) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(mdp, lab)).expect("serializable")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryFile {
    pub initial: usize,
    /// One row per memory state, one successor per letter.
    pub update: Vec<Vec<usize>>,
}

/// Policy file: optional memory over the model's letters, and for every
/// state one action distribution per memory state, in action order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<MemoryFile>,
    pub decision: BTreeMap<String, Vec<Vec<f64>>>,
}

pub fn load_policy(text: &str, mdp: &Mdp, lab: &Labeling) -> Result<FiniteMemoryPolicy> {
    let file: PolicyFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidPolicy(e.to_string()))?;
    let num_letters = lab.alphabet.num_letters();
    let memory = match &file.memory {
        None => Memory::trivial(num_letters),
        Some(m) => {
            if m.update.iter().any(|r| r.len() != num_letters) {
                return Err(Error::AlphabetMismatch(format!(
                    "memory rows must have one entry per letter ({num_letters})"
                )));
            }
            Memory::new(num_letters, m.update.concat(), m.initial)?
        }
    };
    let k = memory.num_states();
    let na = mdp.num_actions();
    let mut decision = vec![f64::NAN; mdp.num_states() * k * na];
    for (state, rows) in &file.decision {
        let s = mdp
            .state_index(state)
            .ok_or_else(|| Error::InvalidPolicy(format!("unknown state `{state}`")))?;
        if rows.len() != k || rows.iter().any(|r| r.len() != na) {
            return Err(Error::InvalidPolicy(format!("state `{state}` has a malformed row")));
        }
        for (m, row) in rows.iter().enumerate() {
            decision[(s * k + m) * na..(s * k + m + 1) * na].copy_from_slice(row);
        }
    }
    if decision.iter().any(|p| p.is_nan()) {
        return Err(Error::InvalidPolicy("policy does not cover every state".into()));
    }
    FiniteMemoryPolicy::new(memory, mdp.num_states(), na, decision)
}

pub fn policy_to_json(pol: &FiniteMemoryPolicy, mdp: &Mdp) -> String {
    let k = pol.memory.num_states();
    let memory = (k > 1).then(|| MemoryFile {
        initial: pol.memory.initial,
        update: pol.memory.update.chunks(pol.memory.num_letters).map(<[usize]>::to_vec).collect(),
    });
    let decision = (0..mdp.num_states())
        .map(|s| {
            let rows = (0..k).map(|m| pol.action_dist(s, m).to_vec()).collect();
            (mdp.state_names[s].clone(), rows)
        })
        .collect();
    serde_json::to_string_pretty(&PolicyFile { memory, decision }).expect("serializable")
}
