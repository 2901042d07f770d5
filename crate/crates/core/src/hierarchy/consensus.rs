//! Weighted consensus: a group's stance is valid iff the normalized weight
//! of members holding `valid` reaches the threshold.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{HierarchyError, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Slack for the `>=` comparison so that `phi == theta` computed through
/// floating-point normalization still counts as reaching the threshold.
const BOUNDARY_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Valid,
    Invalid,
}

/// A member's stance before consensus; `Neutral` counts like `Invalid`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RawStance {
    Valid,
    Invalid,
    Neutral,
}

impl RawStance {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "valid" => Some(RawStance::Valid),
            "invalid" => Some(RawStance::Invalid),
            "neutral" => Some(RawStance::Neutral),
            _ => None,
        }
    }
}

impl From<Stance> for RawStance {
    fn from(s: Stance) -> Self {
        match s {
            Stance::Valid => RawStance::Valid,
            Stance::Invalid => RawStance::Invalid,
        }
    }
}

/// Member stances on one fact.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ballot {
    stances: BTreeMap<String, RawStance>,
}

impl Ballot {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, RawStance)>,
        S: Into<String>,
    {
        Self {
            stances: entries.into_iter().map(|(m, s)| (m.into(), s)).collect(),
        }
    }

    pub fn stances(&self) -> &BTreeMap<String, RawStance> {
        &self.stances
    }

    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.stances.keys().map(String::as_str)
    }

    /// Parses `member stance` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut stances = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| HierarchyError::Config {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [member, stance] = fields.as_slice() else {
                return Err(err("expected `member valid|invalid|neutral`".into()));
            };
            let stance =
                RawStance::parse(stance).ok_or_else(|| err(format!("unknown stance `{stance}`")))?;
            if stances.insert((*member).to_owned(), stance).is_some() {
                return Err(err(format!("member `{member}` voted twice")));
            }
        }
        Ok(Self { stances })
    }
}

/// Member weights and threshold `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusConfig {
    weights: BTreeMap<String, f64>,
    threshold: f64,
}

impl ConsensusConfig {
    pub fn new(weights: BTreeMap<String, f64>, threshold: f64) -> Result<Self> {
        Self::check_weights(&weights)?;
        Self::check_threshold(threshold)?;
        Ok(Self { weights, threshold })
    }

    /// Equal weights for every member.
    pub fn uniform<'a, I>(members: I, threshold: f64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        Self::new(members.into_iter().map(|m| (m.to_owned(), 1.0)).collect(), threshold)
    }

    pub(crate) fn check_threshold(theta: f64) -> Result<()> {
        if theta > 0.0 && theta <= 1.0 {
            Ok(())
        } else {
            Err(HierarchyError::InvalidThreshold(theta))
        }
    }

    pub(crate) fn check_weights(weights: &BTreeMap<String, f64>) -> Result<()> {
        let valid = weights.values().all(|w| w.is_finite() && *w >= 0.0)
            && weights.values().any(|w| *w > 0.0);
        if valid {
            Ok(())
        } else {
            Err(HierarchyError::InvalidWeights)
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    /// Normalized weight of the members voting `valid`.
    pub fn support(&self, ballot: &Ballot) -> Result<f64> {
        if !ballot.stances.keys().eq(self.weights.keys()) {
            let missing: Vec<&str> = self
                .weights
                .keys()
                .filter(|m| !ballot.stances.contains_key(*m))
                .map(String::as_str)
                .collect();
            let extra: Vec<&str> = ballot
                .stances
                .keys()
                .filter(|m| !self.weights.contains_key(*m))
                .map(String::as_str)
                .collect();
            return Err(HierarchyError::WeightMismatch(format!(
                "missing {missing:?}, unexpected {extra:?}"
            )));
        }
        let total: f64 = self.weights.values().sum();
        let valid: f64 = ballot
            .stances
            .iter()
            .filter(|(_, s)| **s == RawStance::Valid)
            .map(|(m, _)| self.weights[m])
            .sum();
        Ok(valid / total)
    }
}

/// `Valid` iff the normalized weight of `valid` votes is at least the
/// threshold. Neutral and invalid votes contribute nothing.
pub fn group_stance(ballot: &Ballot, config: &ConsensusConfig) -> Result<Stance> {
    let phi = config.support(ballot)?;
    Ok(if phi + BOUNDARY_EPSILON >= config.threshold {
        Stance::Valid
    } else {
        Stance::Invalid
    })
}
