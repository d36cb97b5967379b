//! JSON documents for automata and the parse/emit pair for each.
//!
//! Colors are indices; letters are symbol names resolved against the
//! document's alphabet list.  A missing `reset` means the clock is left
//! unchanged.  Parsing validates, so a returned automaton is always
//! well-formed; errors from the JSON layer carry line/column positions.

use serde::{Deserialize, Serialize};

use crate::automaton::{ColorSet, ValidationReport, WeightedBuchiAutomaton, MAX_COLORS};
use crate::timed::{
    ClockAtom, ClockConstraint, Location, TimedAutomaton, TimedEdge, TimedValidationReport,
};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    InvalidAutomaton(#[from] ValidationReport),
    #[error(transparent)]
    InvalidTimedAutomaton(#[from] TimedValidationReport),
    #[error("record {record}: unknown label {label:?}")]
    UnknownLabel { record: usize, label: String },
    #[error("record {record}: color index {color} exceeds the supported maximum of {}", MAX_COLORS - 1)]
    ColorTooLarge { record: usize, color: usize },
    #[error("exactly one clock is required, the document declares {found}")]
    ClockCount { found: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WbaDocument {
    #[serde(default)]
    pub alphabet: Vec<String>,
    pub colors: usize,
    pub states: usize,
    pub initial: usize,
    pub transitions: Vec<WbaTransitionRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WbaTransitionRecord {
    pub src: usize,
    pub dst: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub colors: Vec<usize>,
    pub weight: i64,
}

/// Clock declaration: a single name, or a list (rejected unless singleton).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClockDecl {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WtbaDocument {
    #[serde(default)]
    pub alphabet: Vec<String>,
    pub colors: usize,
    pub clock: ClockDecl,
    pub locations: Vec<LocationRecord>,
    pub initial: usize,
    pub edges: Vec<TimedEdgeRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocationRecord {
    pub name: String,
    #[serde(default)]
    pub invariant: Vec<ClockAtom>,
    pub rate: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimedEdgeRecord {
    pub src: usize,
    pub dst: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub colors: Vec<usize>,
    #[serde(default)]
    pub guard: Vec<ClockAtom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset: Option<u32>,
}

fn resolve_label(
    alphabet: &[String],
    record: usize,
    label: &Option<String>,
) -> Result<Option<usize>, FormatError> {
    match label {
        None => Ok(None),
        Some(name) => alphabet
            .iter()
            .position(|a| a == name)
            .map(Some)
            .ok_or_else(|| FormatError::UnknownLabel {
                record,
                label: name.clone(),
            }),
    }
}

fn color_set(record: usize, colors: &[usize]) -> Result<ColorSet, FormatError> {
    let mut set = ColorSet::EMPTY;
    for &color in colors {
        if color >= MAX_COLORS {
            return Err(FormatError::ColorTooLarge { record, color });
        }
        set.insert(color);
    }
    Ok(set)
}

fn label_name(alphabet: &[String], letter: Option<usize>) -> Option<String> {
    letter.map(|i| alphabet.get(i).cloned().unwrap_or_else(|| format!("a{i}")))
}

/// Names `a0..` for an automaton that only knows its alphabet size.
fn generated_alphabet(len: usize) -> Vec<String> {
    (0..len).map(|i| format!("a{i}")).collect()
}

impl WbaDocument {
    pub fn to_automaton(&self) -> Result<WeightedBuchiAutomaton, FormatError> {
        let mut a = WeightedBuchiAutomaton::new(
            self.alphabet.len(),
            self.colors,
            self.states,
            self.initial,
        );
        for (i, record) in self.transitions.iter().enumerate() {
            let letter = resolve_label(&self.alphabet, i, &record.label)?;
            let colors = color_set(i, &record.colors)?;
            a.add_labeled_transition(record.src, record.dst, letter, record.weight, colors);
        }
        a.validate()?;
        Ok(a)
    }

    pub fn from_automaton(a: &WeightedBuchiAutomaton) -> Self {
        let alphabet = generated_alphabet(a.alphabet_len);
        WbaDocument {
            transitions: a
                .transitions
                .iter()
                .map(|t| WbaTransitionRecord {
                    src: t.src,
                    dst: t.dst,
                    label: label_name(&alphabet, t.letter),
                    colors: t.colors.iter().collect(),
                    weight: t.weight,
                })
                .collect(),
            alphabet,
            colors: a.color_count,
            states: a.state_count,
            initial: a.initial,
        }
    }
}

impl WtbaDocument {
    pub fn to_automaton(&self) -> Result<TimedAutomaton, FormatError> {
        let clock = match &self.clock {
            ClockDecl::One(name) => name.clone(),
            ClockDecl::Many(names) if names.len() == 1 => names[0].clone(),
            ClockDecl::Many(names) => return Err(FormatError::ClockCount { found: names.len() }),
        };
        let locations = self
            .locations
            .iter()
            .map(|l| Location {
                name: l.name.clone(),
                invariant: ClockConstraint {
                    atoms: l.invariant.clone(),
                },
                rate: l.rate,
            })
            .collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, record) in self.edges.iter().enumerate() {
            edges.push(TimedEdge {
                src: record.src,
                dst: record.dst,
                letter: resolve_label(&self.alphabet, i, &record.label)?,
                colors: color_set(i, &record.colors)?,
                guard: ClockConstraint {
                    atoms: record.guard.clone(),
                },
                reset: record.reset,
            });
        }
        let t = TimedAutomaton {
            alphabet_len: self.alphabet.len(),
            color_count: self.colors,
            clock,
            locations,
            initial: self.initial,
            edges,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn from_automaton(t: &TimedAutomaton) -> Self {
        let alphabet = generated_alphabet(t.alphabet_len);
        WtbaDocument {
            colors: t.color_count,
            clock: ClockDecl::One(t.clock.clone()),
            locations: t
                .locations
                .iter()
                .map(|l| LocationRecord {
                    name: l.name.clone(),
                    invariant: l.invariant.atoms.clone(),
                    rate: l.rate,
                })
                .collect(),
            initial: t.initial,
            edges: t
                .edges
                .iter()
                .map(|e| TimedEdgeRecord {
                    src: e.src,
                    dst: e.dst,
                    label: label_name(&alphabet, e.letter),
                    colors: e.colors.iter().collect(),
                    guard: e.guard.atoms.clone(),
                    reset: e.reset,
                })
                .collect(),
            alphabet,
        }
    }
}

pub fn parse_wba(bytes: &[u8]) -> Result<WeightedBuchiAutomaton, FormatError> {
    let document: WbaDocument = serde_json::from_slice(bytes)?;
    document.to_automaton()
}

pub fn emit_wba(a: &WeightedBuchiAutomaton) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&WbaDocument::from_automaton(a))
        .expect("document serialization cannot fail");
    out.push(b'\n');
    out
}

pub fn parse_wtba(bytes: &[u8]) -> Result<TimedAutomaton, FormatError> {
    let document: WtbaDocument = serde_json::from_slice(bytes)?;
    document.to_automaton()
}

pub fn emit_wtba(t: &TimedAutomaton) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&WtbaDocument::from_automaton(t))
        .expect("document serialization cannot fail");
    out.push(b'\n');
    out
}
