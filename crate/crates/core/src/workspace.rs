//! Loading named morphisms, machines, series and probes from JSON.
//!
//! ```json
//! {
//!   "morphisms": {"mu": {"elements": ["1", "A", "B"], "identity": "1",
//!                        "table": [["1","A","B"],["A","A","B"],["B","B","B"]],
//!                        "letters": {"a": "A", "b": "B"}}},
//!   "machines": {"f": {"kind": "marble", "k": 1, "morphism": "mu", "lambda": {"a": 1, "b": 0}}},
//!   "series": {"ff": {"op": "cauchy", "args": [{"machine": "f"}, {"machine": "f"}]}},
//!   "probes": {"p": {"alphas": ["b", "b"], "us": ["a"], "omega": 1, "xs": [3, 4], "ys": [3, 4]}}
//! }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Morphism, MorphismDoc};
use crate::catalog;
use crate::decide::ProbeDoc;
use crate::machines::{MachineDoc, MachineError, NestedMachine};
use crate::series::{SeriesDoc, SeriesExpr};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoadError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("{path}: malformed JSON: {reason}")]
    Parse { path: String, reason: String },
    #[error("{at}: {reason}")]
    Validation { at: String, reason: String },
    #[error("unknown {what} {name:?}")]
    Unknown { what: &'static str, name: String },
}

fn validation(at: impl Into<String>, reason: impl ToString) -> LoadError {
    LoadError::Validation { at: at.into(), reason: reason.to_string() }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceDoc {
    #[serde(default)]
    pub morphisms: BTreeMap<String, MorphismDoc>,
    #[serde(default)]
    pub machines: BTreeMap<String, MachineDoc>,
    #[serde(default)]
    pub series: BTreeMap<String, SeriesDoc>,
    #[serde(default)]
    pub probes: BTreeMap<String, ProbeDoc>,
}

/// A validated workspace.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    pub morphisms: BTreeMap<String, Arc<Morphism>>,
    pub machines: BTreeMap<String, NestedMachine>,
    pub series: BTreeMap<String, SeriesExpr>,
    pub probes: BTreeMap<String, ProbeDoc>,
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|e| LoadError::Io { path: path.display().to_string(), reason: e.to_string() })
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, path: &str) -> Result<T, LoadError> {
    serde_json::from_str(text).map_err(|e| LoadError::Parse { path: path.into(), reason: e.to_string() })
}

impl WorkspaceDoc {
    /// Validates every entry. Relative `file` leaves of series are read
    /// from `dir`.
    pub fn build(&self, dir: &Path) -> Result<Workspace, LoadError> {
        let mut ws = Workspace { probes: self.probes.clone(), ..Workspace::default() };
        for (name, doc) in &self.morphisms {
            let mu = doc.build().map_err(|e| validation(format!("morphisms.{name}"), e))?;
            ws.morphisms.insert(name.clone(), Arc::new(mu));
        }
        let resolve = |name: &str| -> Result<MorphismDoc, MachineError> {
            self.morphisms
                .get(name)
                .cloned()
                .ok_or_else(|| MachineError::InvalidDoc(format!("unknown morphism {name:?}")))
        };
        for (name, doc) in &self.machines {
            let m = doc.build(&resolve).map_err(|e| validation(format!("machines.{name}"), e))?;
            ws.machines.insert(name.clone(), m);
        }
        for (name, doc) in &self.series {
            let at = format!("series.{name}");
            let machines = &ws.machines;
            let mut leaf = |d: &SeriesDoc| -> crate::Result<NestedMachine> {
                match d {
                    SeriesDoc::Machine { machine } => machines
                        .get(machine)
                        .cloned()
                        .ok_or_else(|| LoadError::Unknown { what: "machine", name: machine.clone() }.into()),
                    SeriesDoc::File { file } => Ok(load_machine_file(&dir.join(file), &resolve)?),
                    SeriesDoc::Op { .. } => unreachable!("operators are not leaves"),
                }
            };
            let e = doc.build(&mut leaf).map_err(|e| validation(at.clone(), e))?;
            e.validate().map_err(|e| validation(at.clone(), e))?;
            ws.series.insert(name.clone(), e);
        }
        for (name, doc) in &self.probes {
            if doc.alphas.len() != doc.us.len() + 1 {
                return Err(validation(format!("probes.{name}"), "the words αᵢ must outnumber the words uᵢ by one"));
            }
        }
        Ok(ws)
    }
}

fn load_machine_file(
    path: &Path,
    resolve: &dyn Fn(&str) -> Result<MorphismDoc, MachineError>,
) -> Result<NestedMachine, LoadError> {
    let name = path.display().to_string();
    let doc: MachineDoc = parse(&read(path)?, &name)?;
    doc.build(resolve).map_err(|e| validation(name, e))
}

impl Workspace {
    pub fn load(path: impl AsRef<Path>) -> Result<Workspace, LoadError> {
        let path = path.as_ref();
        let doc: WorkspaceDoc = parse(&read(path)?, &path.display().to_string())?;
        doc.build(path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_json(text: &str) -> Result<Workspace, LoadError> {
        let doc: WorkspaceDoc = parse(text, "<input>")?;
        doc.build(Path::new("."))
    }

    /// Finds a machine by workspace name, catalog name, `file.json#name`
    /// or machine file path.
    pub fn machine(&self, spec: &str) -> Result<NestedMachine, LoadError> {
        if let Some(m) = self.machines.get(spec) {
            return Ok(m.clone());
        }
        if let Some(m) = catalog::by_name(spec) {
            return Ok(m);
        }
        if let Some((file, name)) = spec.split_once('#') {
            let ws = Workspace::load(file)?;
            return ws.machines.get(name).cloned().ok_or(LoadError::Unknown { what: "machine", name: name.into() });
        }
        let path = PathBuf::from(spec);
        if !path.exists() {
            return Err(LoadError::Unknown { what: "machine", name: spec.into() });
        }
        let text = read(&path)?;
        let value: serde_json::Value = parse(&text, spec)?;
        if value.get("kind").is_some() {
            let resolve = |name: &str| -> Result<MorphismDoc, MachineError> {
                self.morphisms
                    .get(name)
                    .map(|m| MorphismDoc::from_morphism(m))
                    .ok_or_else(|| MachineError::InvalidDoc(format!("unknown morphism {name:?}")))
            };
            return load_machine_file(&path, &resolve);
        }
        let ws = Workspace::load(&path)?;
        match ws.machines.len() {
            1 => Ok(ws.machines.into_values().next().unwrap()),
            n => Err(validation(spec, format!("the workspace holds {n} machines; pick one with {spec}#name"))),
        }
    }

    /// Finds a morphism by workspace name, catalog name or file holding a
    /// morphism document.
    pub fn morphism(&self, spec: &str) -> Result<Arc<Morphism>, LoadError> {
        if let Some(m) = self.morphisms.get(spec) {
            return Ok(m.clone());
        }
        match spec {
            "signs" => return Ok(catalog::signs_morphism()),
            "block" => return Ok(catalog::block_morphism()),
            _ => {}
        }
        if let Some((file, name)) = spec.split_once('#') {
            let ws = Workspace::load(file)?;
            return ws.morphisms.get(name).cloned().ok_or(LoadError::Unknown { what: "morphism", name: name.into() });
        }
        let path = PathBuf::from(spec);
        if !path.exists() {
            return Err(LoadError::Unknown { what: "morphism", name: spec.into() });
        }
        let doc: MorphismDoc = parse(&read(&path)?, spec)?;
        doc.build().map(Arc::new).map_err(|e| validation(spec, e))
    }

    /// Finds a series by workspace name or file holding a series document
    /// whose leaves name machines of this workspace or files.
    pub fn series(&self, spec: &str) -> Result<SeriesExpr, LoadError> {
        if let Some(s) = self.series.get(spec) {
            return Ok(s.clone());
        }
        let path = PathBuf::from(spec);
        if !path.exists() {
            return Err(LoadError::Unknown { what: "series", name: spec.into() });
        }
        let doc: SeriesDoc = parse(&read(&path)?, spec)?;
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let mut leaf = |d: &SeriesDoc| -> crate::Result<NestedMachine> {
            match d {
                SeriesDoc::Machine { machine } => Ok(self.machine(machine)?),
                SeriesDoc::File { file } => Ok(self.machine(&dir.join(file).display().to_string())?),
                SeriesDoc::Op { .. } => unreachable!("operators are not leaves"),
            }
        };
        let e = doc.build(&mut leaf).map_err(|e| validation(spec, e))?;
        e.validate().map_err(|e| validation(spec, e))?;
        Ok(e)
    }
}
