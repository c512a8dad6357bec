use std::collections::BTreeMap;
use std::path::Path;

use modcon::database::{Database, DependencySet};
use modcon::formulas::{parse_deps, parse_group_presentation, parse_lattice_conjunction, parse_ring_system};
use modcon::groups::GroupPresentation;
use modcon::lattice::LatticeConjunction;
use modcon::matring::RingSystem;
use modcon::reductions::{DepsFormula, GcFormula, LatticeFormula, PipelineArtifact, RelalgFormula, Stage};
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map_err(|e| CliError::Io("stdin".into(), e))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// An artifact: either a pipeline envelope or bare text in the stage grammar.
pub fn read_artifact(path: &Path, stage: Option<Stage>) -> Result<PipelineArtifact, CliError> {
    let text = read_text(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let art = if v.get("stage").is_some() && v.get("formula").is_some() {
            serde_json::from_value(v).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
        } else {
            let stage = stage.ok_or_else(|| CliError::Usage("bare JSON formula needs --from".into()))?;
            PipelineArtifact { stage, formula: v, provenance: Vec::new() }
        };
        if let Some(s) = stage {
            if art.stage != s {
                return Err(CliError::Usage(format!("input is a {} artifact, expected {s}", art.stage)));
            }
        }
        return Ok(art);
    }
    let stage = stage.unwrap_or_else(|| guess_stage(&text));
    let parsed = |e: modcon::formulas::ParseError| CliError::Parse(format!("{}: {e}", path.display()));
    let formula = match stage {
        Stage::Group => serde_json::to_value(parse_group_presentation(&text).map_err(parsed)?),
        Stage::Lattice => serde_json::to_value(LatticeFormula::plain(parse_lattice_conjunction(&text).map_err(parsed)?)),
        Stage::Ring => serde_json::to_value(parse_ring_system(&text).map_err(parsed)?),
        Stage::Deps => {
            let deps = parse_deps(&text).map_err(parsed)?;
            serde_json::to_value(DepsFormula { attrs: deps.attrs(), deps })
        }
        Stage::Relalg | Stage::Gc => {
            return Err(CliError::Usage(format!("the {stage} stage has no text form; pass a JSON artifact")))
        }
    }
    .expect("formula serializes");
    Ok(PipelineArtifact { stage, formula, provenance: Vec::new() })
}

/// Stage of bare text by its leading keyword; lattice otherwise.
fn guess_stage(text: &str) -> Stage {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .and_then(|l| l.split_whitespace().next())
        .unwrap_or("");
    match first {
        "gens" | "rel" => Stage::Group,
        "idem" => Stage::Ring,
        "fd" | "emvd" => Stage::Deps,
        _ => Stage::Lattice,
    }
}

/// Typed view of an artifact's formula.
pub enum Formula {
    Group(GroupPresentation),
    Lattice(LatticeFormula),
    Ring(RingSystem),
    Relalg(RelalgFormula),
    Deps(DepsFormula),
    Gc(GcFormula),
}

fn payload<T: DeserializeOwned>(art: &PipelineArtifact) -> Result<T, CliError> {
    art.payload().map_err(|e| CliError::Parse(e.to_string()))
}

impl Formula {
    pub fn of(art: &PipelineArtifact) -> Result<Self, CliError> {
        Ok(match art.stage {
            Stage::Group => Formula::Group(payload(art)?),
            Stage::Lattice => match payload::<LatticeFormula>(art) {
                Ok(lf) => Formula::Lattice(lf),
                Err(_) => Formula::Lattice(LatticeFormula::plain(payload::<LatticeConjunction>(art)?)),
            },
            Stage::Ring => Formula::Ring(payload(art)?),
            Stage::Relalg => Formula::Relalg(payload(art)?),
            Stage::Deps => match payload::<DepsFormula>(art) {
                Ok(df) => Formula::Deps(df),
                Err(_) => {
                    let deps: DependencySet = payload(art)?;
                    Formula::Deps(DepsFormula { attrs: deps.attrs(), deps })
                }
            },
            Stage::Gc => Formula::Gc(payload(art)?),
        })
    }
}

/// Assignment map, also accepted wrapped in a search result.
pub fn read_assignment<T: DeserializeOwned>(path: &Path) -> Result<BTreeMap<String, T>, CliError> {
    let mut v: Value = read_json(path)?;
    if let Some(outcome) = v.get_mut("outcome") {
        v = match outcome.get_mut("assignment") {
            Some(a) => a.take(),
            None => return Err(CliError::Usage(format!("{}: search result has no witness", path.display()))),
        };
    }
    serde_json::from_value(v).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn read_database(path: &Path) -> Result<Database, CliError> {
    read_json(path)
}
