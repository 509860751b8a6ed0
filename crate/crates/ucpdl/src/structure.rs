//! Finite relational structures and their JSON encoding.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::{Map, Value};
use thiserror::Error;

use crate::ast::Name;
use crate::graph::UGraph;

/// Dense world index into [`Structure::worlds`].
pub type World = usize;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct HigherRelation {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<World>>,
}

/// Worlds plus unary, binary and higher-arity relations.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Structure {
    worlds: Vec<String>,
    index: HashMap<String, World>,
    unary: BTreeMap<Name, BTreeSet<World>>,
    binary: BTreeMap<Name, BTreeSet<(World, World)>>,
    higher: BTreeMap<Name, HigherRelation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("unknown world {0:?}")]
    UnknownWorld(String),
    #[error("world {0:?} declared twice")]
    DuplicateWorld(String),
    #[error("relation {name} has arity {expected}, got a tuple of length {found}")]
    Arity { name: Name, expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct FormatError {
    pub path: String,
    pub message: String,
}

fn format_err(path: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError { path: path.into(), message: message.into() }
}

impl Structure {
    pub fn new() -> Self {
        Self::default()
    }

    /// Structure over worlds named by the given ids.
    pub fn with_worlds<S: AsRef<str>>(ids: impl IntoIterator<Item = S>) -> Result<Self, StructureError> {
        let mut k = Structure::new();
        for id in ids {
            k.add_world(id.as_ref())?;
        }
        Ok(k)
    }

    /// Worlds `w0..w{n-1}`.
    pub fn numbered(n: usize) -> Self {
        Structure::with_worlds((0..n).map(|i| format!("w{i}"))).expect("distinct ids")
    }

    pub fn add_world(&mut self, id: &str) -> Result<World, StructureError> {
        if self.index.contains_key(id) {
            return Err(StructureError::DuplicateWorld(id.to_string()));
        }
        let w = self.worlds.len();
        self.worlds.push(id.to_string());
        self.index.insert(id.to_string(), w);
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_name(&self, w: World) -> &str {
        &self.worlds[w]
    }

    pub fn world(&self, id: &str) -> Result<World, StructureError> {
        self.index.get(id).copied().ok_or_else(|| StructureError::UnknownWorld(id.to_string()))
    }

    pub fn declare_unary(&mut self, p: impl Into<Name>) {
        self.unary.entry(p.into()).or_default();
    }

    pub fn declare_binary(&mut self, a: impl Into<Name>) {
        self.binary.entry(a.into()).or_default();
    }

    /// Returns whether the fact is new.
    pub fn add_unary(&mut self, p: impl Into<Name>, w: World) -> bool {
        assert!(w < self.len(), "world index out of range");
        self.unary.entry(p.into()).or_default().insert(w)
    }

    pub fn add_binary(&mut self, a: impl Into<Name>, u: World, v: World) -> bool {
        assert!(u < self.len() && v < self.len(), "world index out of range");
        self.binary.entry(a.into()).or_default().insert((u, v))
    }

    pub fn declare_relation(&mut self, r: impl Into<Name>, arity: usize) -> Result<(), StructureError> {
        let name = r.into();
        let rel = self.higher.entry(name.clone()).or_insert(HigherRelation { arity, tuples: BTreeSet::new() });
        if rel.arity != arity {
            return Err(StructureError::Arity { name, expected: rel.arity, found: arity });
        }
        Ok(())
    }

    pub fn add_tuple(&mut self, r: impl Into<Name>, tuple: Vec<World>) -> Result<bool, StructureError> {
        assert!(tuple.iter().all(|&w| w < self.len()), "world index out of range");
        let name = r.into();
        self.declare_relation(name.clone(), tuple.len())?;
        Ok(self.higher.get_mut(&name).expect("declared").tuples.insert(tuple))
    }

    pub fn unary(&self) -> &BTreeMap<Name, BTreeSet<World>> {
        &self.unary
    }

    pub fn binary(&self) -> &BTreeMap<Name, BTreeSet<(World, World)>> {
        &self.binary
    }

    pub fn higher(&self) -> &BTreeMap<Name, HigherRelation> {
        &self.higher
    }

    pub fn is_kripke(&self) -> bool {
        self.higher.is_empty()
    }

    /// Undirected co-occurrence graph over worlds, ignoring self-tuples.
    pub fn gaifman(&self) -> UGraph {
        let mut g = UGraph::new(self.len());
        for &(u, v) in self.binary.values().flatten() {
            if u != v {
                g.add_edge(u, v);
            }
        }
        for t in self.higher.values().flat_map(|r| r.tuples.iter()) {
            for (i, &u) in t.iter().enumerate() {
                for &v in &t[i + 1..] {
                    if u != v {
                        g.add_edge(u, v);
                    }
                }
            }
        }
        g
    }

    /// Gaifman distance; `None` when the worlds lie in different components.
    pub fn distance(&self, u: &str, v: &str) -> Result<Option<usize>, StructureError> {
        let (u, v) = (self.world(u)?, self.world(v)?);
        Ok(self.gaifman().bfs(u)[v])
    }

    pub fn same_component(&self, u: &str, v: &str) -> Result<bool, StructureError> {
        self.distance(u, v).map(|d| d.is_some())
    }

    /// Reads the JSON structure format.
    pub fn load(bytes: &[u8]) -> Result<Structure, FormatError> {
        let value: Value =
            serde_json::from_slice(bytes).map_err(|e| format_err("$", format!("invalid JSON: {e}")))?;
        let top = value.as_object().ok_or_else(|| format_err("$", "expected an object"))?;
        for key in top.keys() {
            if !matches!(key.as_str(), "worlds" | "unary" | "binary" | "relations") {
                return Err(format_err(format!("$.{key}"), "unknown section"));
            }
        }
        let mut k = Structure::new();
        if let Some(ws) = top.get("worlds") {
            for (i, w) in as_array(ws, "$.worlds")?.iter().enumerate() {
                let path = format!("$.worlds[{i}]");
                let id = w.as_str().ok_or_else(|| format_err(&path, "expected a string"))?;
                k.add_world(id).map_err(|e| format_err(&path, e.to_string()))?;
            }
        }
        let world_at = |k: &Structure, v: &Value, path: &str| -> Result<World, FormatError> {
            let id = v.as_str().ok_or_else(|| format_err(path, "expected a world id"))?;
            k.world(id).map_err(|e| format_err(path, e.to_string()))
        };
        if let Some(section) = top.get("unary") {
            for (p, ws) in as_object(section, "$.unary")? {
                let base = format!("$.unary.{p}");
                k.declare_unary(p.as_str());
                for (i, w) in as_array(ws, &base)?.iter().enumerate() {
                    let path = format!("{base}[{i}]");
                    let w = world_at(&k, w, &path)?;
                    if !k.add_unary(p.as_str(), w) {
                        return Err(format_err(path, "duplicate tuple"));
                    }
                }
            }
        }
        if let Some(section) = top.get("binary") {
            for (a, pairs) in as_object(section, "$.binary")? {
                let base = format!("$.binary.{a}");
                k.declare_binary(a.as_str());
                for (i, pair) in as_array(pairs, &base)?.iter().enumerate() {
                    let path = format!("{base}[{i}]");
                    let t = as_array(pair, &path)?;
                    if t.len() != 2 {
                        return Err(format_err(path, "expected a pair"));
                    }
                    let u = world_at(&k, &t[0], &format!("{path}[0]"))?;
                    let v = world_at(&k, &t[1], &format!("{path}[1]"))?;
                    if !k.add_binary(a.as_str(), u, v) {
                        return Err(format_err(path, "duplicate tuple"));
                    }
                }
            }
        }
        if let Some(section) = top.get("relations") {
            for (r, body) in as_object(section, "$.relations")? {
                let base = format!("$.relations.{r}");
                let obj = as_object(body, &base)?;
                for key in obj.keys() {
                    if key != "arity" && key != "tuples" {
                        return Err(format_err(format!("{base}.{key}"), "unknown field"));
                    }
                }
                let arity = obj
                    .get("arity")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| format_err(format!("{base}.arity"), "expected a natural number"))?
                    as usize;
                if arity < 3 {
                    return Err(format_err(format!("{base}.arity"), "arity must be at least 3"));
                }
                k.declare_relation(r.as_str(), arity).map_err(|e| format_err(&base, e.to_string()))?;
                let tuples = match obj.get("tuples") {
                    Some(t) => as_array(t, &format!("{base}.tuples"))?.clone(),
                    None => Vec::new(),
                };
                for (i, t) in tuples.iter().enumerate() {
                    let path = format!("{base}.tuples[{i}]");
                    let items = as_array(t, &path)?;
                    if items.len() != arity {
                        return Err(format_err(path, format!("expected {arity} worlds, got {}", items.len())));
                    }
                    let tuple = items
                        .iter()
                        .enumerate()
                        .map(|(j, w)| world_at(&k, w, &format!("{path}[{j}]")))
                        .collect::<Result<Vec<_>, _>>()?;
                    if !k.add_tuple(r.as_str(), tuple).map_err(|e| format_err(&path, e.to_string()))? {
                        return Err(format_err(path, "duplicate tuple"));
                    }
                }
            }
        }
        Ok(k)
    }

    /// Canonical JSON: sorted keys, worlds in declared order, tuples sorted by world order.
    pub fn save(&self) -> String {
        let name = |w: &World| Value::String(self.worlds[*w].clone());
        let mut binary = Map::new();
        for (a, pairs) in &self.binary {
            let items = pairs.iter().map(|(u, v)| Value::Array(vec![name(u), name(v)])).collect();
            binary.insert(a.to_string(), Value::Array(items));
        }
        let mut relations = Map::new();
        for (r, rel) in &self.higher {
            let mut body = Map::new();
            body.insert("arity".into(), Value::from(rel.arity));
            let tuples = rel.tuples.iter().map(|t| Value::Array(t.iter().map(name).collect())).collect();
            body.insert("tuples".into(), Value::Array(tuples));
            relations.insert(r.to_string(), Value::Object(body));
        }
        let mut unary = Map::new();
        for (p, ws) in &self.unary {
            unary.insert(p.to_string(), Value::Array(ws.iter().map(name).collect()));
        }
        let mut top = Map::new();
        top.insert("binary".into(), Value::Object(binary));
        top.insert("relations".into(), Value::Object(relations));
        top.insert("unary".into(), Value::Object(unary));
        top.insert("worlds".into(), Value::Array(self.worlds.iter().cloned().map(Value::String).collect()));
        let mut out = serde_json::to_string_pretty(&Value::Object(top)).expect("serializable");
        out.push('\n');
        out
    }

    /// Substructure induced by `keep`, with worlds in the given order.
    pub fn induced(&self, keep: &[World]) -> Structure {
        let mut k = Structure::with_worlds(keep.iter().map(|&w| self.worlds[w].clone())).expect("distinct");
        let pos: HashMap<World, World> = keep.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        for (p, ws) in &self.unary {
            k.declare_unary(p.clone());
            for w in ws.iter().filter_map(|w| pos.get(w)) {
                k.add_unary(p.clone(), *w);
            }
        }
        for (a, es) in &self.binary {
            k.declare_binary(a.clone());
            for (u, v) in es {
                if let (Some(&u), Some(&v)) = (pos.get(u), pos.get(v)) {
                    k.add_binary(a.clone(), u, v);
                }
            }
        }
        for (r, rel) in &self.higher {
            k.declare_relation(r.clone(), rel.arity).expect("fresh");
            for t in &rel.tuples {
                if let Some(t) = t.iter().map(|w| pos.get(w).copied()).collect::<Option<Vec<_>>>() {
                    k.add_tuple(r.clone(), t).expect("arity");
                }
            }
        }
        k
    }
}

fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>, FormatError> {
    v.as_array().ok_or_else(|| format_err(path, "expected an array"))
}

fn as_object<'v>(v: &'v Value, path: &str) -> Result<&'v Map<String, Value>, FormatError> {
    v.as_object().ok_or_else(|| format_err(path, "expected an object"))
}
