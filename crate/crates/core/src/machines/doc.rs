//! JSON form of nested machines.
//!
//! ```json
//! {"kind": "marble", "k": 2, "morphism": "mu",
//!  "selector": {"a": 0, "b": [[1, 1], [1, 0]]},
//!  "externals": [{"kind": "marble", "k": 1, "lambda": {"a": 1, "b": 0}}, ...]}
//! ```
//!
//! Per-letter tables are either a constant or a matrix indexed
//! `[left element][right element]` in the element order of the morphism
//! document. Marked letters of pebble machines use the key `^a` and default
//! to the entry of `a`. A dense `[left][letter][right]` array is accepted
//! too. Externals inherit the morphism of the top-level machine, which is
//! restricted to its image on loading.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Elem, Letter, Morphism, MorphismDoc};

use super::{MachineError, MachineKind, NestedMachine, Node};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MorphismRef {
    Name(String),
    Inline(MorphismDoc),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Table<T> {
    Const(T),
    Matrix(Vec<Vec<T>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaTable<T> {
    PerLetter(BTreeMap<String, Table<T>>),
    Dense(Vec<Vec<Vec<T>>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDoc {
    pub kind: MachineKind,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<MorphismRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaTable<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selector: Option<LambdaTable<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub externals: Vec<MachineDoc>,
}

fn invalid(msg: impl Into<String>) -> MachineError {
    MachineError::InvalidDoc(msg.into())
}

/// Loads a morphism document and restricts it to its image. The second
/// component lists, for each element of the result, its index in the
/// document.
pub(crate) fn load_morphism(doc: &MorphismDoc) -> Result<(Arc<Morphism>, Vec<Elem>), MachineError> {
    let raw = doc.build()?;
    let original = raw.image();
    let (mu, _) = raw.restrict_to_image();
    Ok((Arc::new(mu), original))
}

struct Ctx<'a> {
    mu: &'a Arc<Morphism>,
    original: &'a [Elem],
    doc_size: usize,
}

impl Ctx<'_> {
    fn letter_key(&self, a: Letter) -> (String, String) {
        let base = self.mu.alphabet_len();
        let name = self.mu.alphabet()[a % base].clone();
        if a >= base {
            (format!("^{name}"), name)
        } else {
            (name.clone(), name)
        }
    }

    fn dense<T: Copy>(&self, table: &LambdaTable<T>, nletters: usize, what: &str) -> Result<Vec<T>, MachineError> {
        let size = self.mu.monoid().len();
        let mut out = Vec::with_capacity(size * nletters * size);
        if let LambdaTable::PerLetter(map) = table {
            for key in map.keys() {
                let plain = key.strip_prefix('^').unwrap_or(key);
                if self.mu.letter_by_name(plain).is_none() {
                    return Err(invalid(format!("{what}: unknown letter {key:?}")));
                }
            }
        }
        for m in 0..size {
            for a in 0..nletters {
                for n in 0..size {
                    out.push(self.entry(table, m, a, n, what)?);
                }
            }
        }
        Ok(out)
    }

    fn entry<T: Copy>(
        &self,
        table: &LambdaTable<T>,
        m: Elem,
        a: Letter,
        n: Elem,
        what: &str,
    ) -> Result<T, MachineError> {
        let (om, on) = (self.original[m], self.original[n]);
        match table {
            LambdaTable::PerLetter(map) => {
                let (key, fallback) = self.letter_key(a);
                let t = map
                    .get(&key)
                    .or_else(|| map.get(&fallback))
                    .ok_or_else(|| invalid(format!("{what}: no entry for letter {key:?}")))?;
                match t {
                    Table::Const(v) => Ok(*v),
                    Table::Matrix(rows) => {
                        if rows.len() != self.doc_size || rows.iter().any(|r| r.len() != self.doc_size) {
                            return Err(invalid(format!("{what}: matrix for {key:?} must be {0}×{0}", self.doc_size)));
                        }
                        Ok(rows[om][on])
                    }
                }
            }
            LambdaTable::Dense(cube) => {
                let base = self.mu.alphabet_len();
                let row = cube.get(om).ok_or_else(|| invalid(format!("{what}: dense table too small")))?;
                let letter = row.get(a).or_else(|| row.get(a % base));
                letter.and_then(|r| r.get(on)).copied().ok_or_else(|| invalid(format!("{what}: dense table too small")))
            }
        }
    }
}

impl MachineDoc {
    /// Builds the machine, resolving a named morphism through `resolve`.
    pub fn build(
        &self,
        resolve: &dyn Fn(&str) -> Result<MorphismDoc, MachineError>,
    ) -> Result<NestedMachine, MachineError> {
        let mdoc = match &self.morphism {
            Some(MorphismRef::Inline(d)) => d.clone(),
            Some(MorphismRef::Name(name)) => resolve(name)?,
            None => return Err(invalid("the top-level machine needs a morphism")),
        };
        let (mu, original) = load_morphism(&mdoc)?;
        let ctx = Ctx { mu: &mu, original: &original, doc_size: mdoc.elements.len() };
        self.build_level(&ctx, None)
    }

    /// Builds a machine over an already loaded morphism (no restriction).
    pub fn build_over(&self, mu: &Arc<Morphism>) -> Result<NestedMachine, MachineError> {
        let original: Vec<Elem> = mu.monoid().elements().collect();
        let ctx = Ctx { mu, original: &original, doc_size: original.len() };
        self.build_level(&ctx, None)
    }

    fn build_level(&self, ctx: &Ctx<'_>, parent: Option<MachineKind>) -> Result<NestedMachine, MachineError> {
        if let Some(kind) = parent {
            if self.kind != kind {
                return Err(invalid("externals must have the kind of their parent"));
            }
            if self.morphism.is_some() {
                return Err(invalid("externals inherit the morphism of the top-level machine"));
            }
        }
        let nletters = super::letters_for(self.kind, ctx.mu);
        match self.k {
            0 => Err(invalid("k must be at least 1")),
            1 => {
                if self.selector.is_some() || !self.externals.is_empty() {
                    return Err(invalid("a level-1 machine has a lambda table only"));
                }
                let lambda = self.lambda.as_ref().ok_or_else(|| invalid("missing lambda"))?;
                let table = ctx.dense(lambda, nletters, "lambda")?;
                Ok(NestedMachine {
                    kind: self.kind,
                    level: 1,
                    nletters,
                    morphism: ctx.mu.clone(),
                    node: Node::Base(table.into_iter().map(u128::from).collect()),
                })
            }
            k => {
                if self.lambda.is_some() {
                    return Err(invalid("a machine of level at least 2 has a selector, not a lambda"));
                }
                let selector = self.selector.as_ref().ok_or_else(|| invalid("missing selector"))?;
                let table = ctx.dense(selector, nletters, "selector")?;
                let mut externals = Vec::with_capacity(self.externals.len());
                for h in &self.externals {
                    if h.k != k - 1 {
                        return Err(invalid(format!("externals of a level-{k} machine must have k = {}", k - 1)));
                    }
                    externals.push(h.build_level(ctx, Some(self.kind))?);
                }
                NestedMachine::nested(self.kind, ctx.mu.clone(), externals, |m, a, n| {
                    table[(m * nletters + a) * ctx.mu.monoid().len() + n]
                })
            }
        }
    }

    /// Serializes a machine with its morphism inline.
    pub fn from_machine(machine: &NestedMachine) -> Self {
        let mut doc = Self::level_doc(machine);
        doc.morphism = Some(MorphismRef::Inline(MorphismDoc::from_morphism(machine.morphism())));
        doc
    }

    fn level_doc(machine: &NestedMachine) -> Self {
        let mu = machine.morphism();
        let size = mu.monoid().len();
        let base = mu.alphabet_len();
        let key = |a: Letter| {
            if a >= base {
                format!("^{}", mu.alphabet()[a - base])
            } else {
                mu.alphabet()[a].clone()
            }
        };
        fn per_letter<T: Copy + PartialEq>(
            nletters: usize,
            size: usize,
            key: &dyn Fn(Letter) -> String,
            get: &dyn Fn(Elem, Letter, Elem) -> T,
        ) -> LambdaTable<T> {
            let mut map = BTreeMap::new();
            for a in 0..nletters {
                let rows: Vec<Vec<T>> = (0..size).map(|m| (0..size).map(|n| get(m, a, n)).collect()).collect();
                let first = rows[0][0];
                let table =
                    if rows.iter().flatten().all(|&v| v == first) { Table::Const(first) } else { Table::Matrix(rows) };
                map.insert(key(a), table);
            }
            LambdaTable::PerLetter(map)
        }
        match &machine.node {
            Node::Base(_) => MachineDoc {
                kind: machine.kind,
                k: 1,
                morphism: None,
                lambda: Some(per_letter(machine.nletters, size, &key, &|m, a, n| {
                    u64::try_from(machine.output(m, a, n).unwrap()).expect("output fits in u64")
                })),
                selector: None,
                externals: Vec::new(),
            },
            Node::Nested { externals, .. } => MachineDoc {
                kind: machine.kind,
                k: machine.level,
                morphism: None,
                lambda: None,
                selector: Some(per_letter(machine.nletters, size, &key, &|m, a, n| machine.selector(m, a, n).unwrap())),
                externals: externals.iter().map(Self::level_doc).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn roundtrip_itpow() {
        let m = catalog::itpow2();
        let doc = MachineDoc::from_machine(&m);
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let back: MachineDoc = serde_json::from_str(&text).unwrap();
        let built = back.build(&|_| unreachable!()).unwrap();
        assert_eq!(built, m);
    }

    #[test]
    fn roundtrip_pebble() {
        let m = catalog::nb_product(MachineKind::Pebble);
        let doc = MachineDoc::from_machine(&m);
        let back: MachineDoc = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(back.build(&|_| unreachable!()).unwrap(), m);
    }

    #[test]
    fn restricts_to_image_and_reads_original_indices() {
        let text = r#"{
            "kind": "marble", "k": 1,
            "morphism": {"elements": ["0", "1", "2", "3"], "identity": "0",
                         "table": [["0","1","2","3"],["1","2","3","0"],["2","3","0","1"],["3","0","1","2"]],
                         "letters": {"a": "2"}},
            "lambda": {"a": [[0,0,5,0],[0,0,0,0],[7,0,0,0],[0,0,0,0]]}
        }"#;
        let doc: MachineDoc = serde_json::from_str(text).unwrap();
        let m = doc.build(&|_| unreachable!()).unwrap();
        assert_eq!(m.morphism().monoid().len(), 2);
        // a: left 0, right 2 → 5. aa: positions see (0, 2) then (2, 0).
        assert_eq!(m.eval(&[0]).unwrap(), 0);
        assert_eq!(m.eval(&[0, 0]).unwrap(), 12);
    }

    #[test]
    fn rejects_missing_entries() {
        let text = r#"{"kind": "blind", "k": 1, "morphism": "mu", "lambda": {"b": 1}}"#;
        let doc: MachineDoc = serde_json::from_str(text).unwrap();
        let mdoc = MorphismDoc::from_morphism(catalog::trivial_morphism(2).as_ref());
        let err = doc.build(&|_| Ok(mdoc.clone())).unwrap_err();
        assert!(matches!(err, MachineError::InvalidDoc(_)));
    }
}
