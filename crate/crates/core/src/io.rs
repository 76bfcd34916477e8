//! JSON schemas for ensembles, channels, puncturing patterns and parallel
//! assignments.
//!
//! ```json
//! {"lambda": [[2, 0.25105], [3, 0.30938]], "rho": [[7, 0.63676], [8, 0.36324]]}
//! {"kind": "biawgn", "sigma": 0.9, "erasure_prefix": 0.1}
//! {"pattern": [[2, 0.07886], [10, 0.07206]]}
//! {"entries": [{"p": 0.5, "q": 0.5, "channel": {"kind": "bec", "epsilon": 0.2}}]}
//! ```
//!
//! Degrees are listed in increasing order; coefficients are edge-perspective.

use serde::{Deserialize, Serialize};

use crate::channels::{ChannelKind, ChannelModel};
use crate::degree_distributions::{DegreePolynomial, EnsembleSpec, Perspective, Side};
use crate::error::{Error, Result};
use crate::puncturing::PuncturingPattern;
use crate::rate_bounds::{ParallelAssignment, ParallelEntry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub lambda: Vec<(u32, f64)>,
    pub rho: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelKindFile {
    Bec { epsilon: f64 },
    Bsc { delta: f64 },
    Biawgn { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    #[serde(flatten)]
    pub kind: ChannelKindFile,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub erasure_prefix: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternFile {
    pub pattern: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryFile {
    pub p: f64,
    pub q: f64,
    pub channel: ChannelFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentFile {
    pub entries: Vec<EntryFile>,
}

/// Bundled inputs for the threshold table: one ensemble and the puncturing
/// patterns of its rows (the first row is unpunctured).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub ensemble: EnsembleFile,
    pub patterns: Vec<Vec<(u32, f64)>>,
}

const TABLE1_JSON: &str = include_str!("../data/table1.json");

fn parse<'a, D: Deserialize<'a>>(text: &'a str, what: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn parse_ensemble(text: &str) -> Result<EnsembleSpec<f64>> {
    parse::<EnsembleFile>(text, "ensemble")?.to_ensemble()
}

pub fn parse_channel(text: &str) -> Result<ChannelModel<f64>> {
    parse::<ChannelFile>(text, "channel")?.to_channel()
}

pub fn parse_pattern(text: &str) -> Result<PuncturingPattern<f64>> {
    PuncturingPattern::new(parse::<PatternFile>(text, "pattern")?.pattern)
}

pub fn parse_assignment(text: &str) -> Result<ParallelAssignment<f64>> {
    parse::<AssignmentFile>(text, "assignment")?.to_assignment()
}

/// Ensemble and row patterns of the bundled threshold table.
pub fn bundled_table1() -> Result<(EnsembleSpec<f64>, Vec<PuncturingPattern<f64>>)> {
    let file: TableFile = parse(TABLE1_JSON, "bundled table")?;
    let e = file.ensemble.to_ensemble()?;
    let patterns = file
        .patterns
        .into_iter()
        .map(PuncturingPattern::new)
        .collect::<Result<Vec<_>>>()?;
    Ok((e, patterns))
}

impl EnsembleFile {
    pub fn to_ensemble(&self) -> Result<EnsembleSpec<f64>> {
        let lambda = DegreePolynomial::new(self.lambda.clone(), Perspective::Edge, Side::Variable)?;
        let rho = DegreePolynomial::new(self.rho.clone(), Perspective::Edge, Side::Check)?;
        EnsembleSpec::new(lambda, rho)
    }

    pub fn from_ensemble(e: &EnsembleSpec<f64>) -> Self {
        EnsembleFile {
            lambda: e.lambda().terms().to_vec(),
            rho: e.rho().terms().to_vec(),
        }
    }
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<ChannelModel<f64>> {
        let kind = match self.kind {
            ChannelKindFile::Bec { epsilon } => ChannelKind::Bec { epsilon },
            ChannelKindFile::Bsc { delta } => ChannelKind::Bsc { delta },
            ChannelKindFile::Biawgn { sigma } => ChannelKind::Biawgn { sigma },
        };
        ChannelModel::new(kind, self.erasure_prefix)
    }

    pub fn from_channel(ch: &ChannelModel<f64>) -> Self {
        let kind = match ch.kind() {
            ChannelKind::Bec { epsilon } => ChannelKindFile::Bec { epsilon },
            ChannelKind::Bsc { delta } => ChannelKindFile::Bsc { delta },
            ChannelKind::Biawgn { sigma } => ChannelKindFile::Biawgn { sigma },
        };
        ChannelFile {
            kind,
            erasure_prefix: ch.erasure_prefix(),
        }
    }
}

impl AssignmentFile {
    pub fn to_assignment(&self) -> Result<ParallelAssignment<f64>> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                Ok(ParallelEntry {
                    p: e.p,
                    q: e.q,
                    channel: e.channel.to_channel()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ParallelAssignment::new(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_schema() {
        let ch = parse_channel(r#"{"kind":"biawgn","sigma":0.9}"#).unwrap();
        assert_eq!(ch, ChannelModel::biawgn(0.9).unwrap());
        let ch = parse_channel(r#"{"kind":"bsc","delta":0.1,"erasure_prefix":0.25}"#).unwrap();
        assert_eq!(ch.erasure_prefix(), 0.25);
        assert!(parse_channel(r#"{"kind":"bec","epsilon":1.0}"#).is_err());
        assert!(matches!(
            parse_channel(r#"{"kind":"awgn","sigma":1}"#),
            Err(Error::Parse(_))
        ));
        let back = serde_json::to_string(&ChannelFile::from_channel(&ch)).unwrap();
        assert_eq!(parse_channel(&back).unwrap(), ch);
    }

    #[test]
    fn ensemble_schema() {
        let e = parse_ensemble(r#"{"lambda":[[3,1.0]],"rho":[[6,1.0]]}"#).unwrap();
        assert!((e.design_rate().unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            parse_ensemble(r#"{"lambda":[[3,1.0]],"rho":[[6,1.0]],"x":1}"#),
            Err(Error::Parse(_))
        ));
        assert!(parse_ensemble(r#"{"lambda":[[3,0.5]],"rho":[[6,1.0]]}"#).is_err());
    }

    #[test]
    fn assignment_schema() {
        let a = parse_assignment(
            r#"{"entries":[{"p":0.5,"q":0.5,"channel":{"kind":"bec","epsilon":0.2}},
                           {"p":0.5,"q":0.5,"channel":{"kind":"bec","epsilon":0.4}}]}"#,
        )
        .unwrap();
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn bundled_table_loads() {
        let (e, patterns) = bundled_table1().unwrap();
        assert_eq!(patterns.len(), 9);
        assert!(patterns[0].is_empty());
        assert!((e.design_rate().unwrap() - 0.5).abs() < 5e-3);
    }
}
