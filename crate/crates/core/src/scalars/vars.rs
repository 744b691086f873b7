//! Process-wide variable table.
//!
//! Every complex parameter is interned as a pair of adjacent ids: the base
//! variable `a` at an even slot and its conjugate `~a` right after it. Real
//! variables occupy a single slot and are fixed by conjugation. The table is
//! append-only; readers never block each other.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};

/// Name of the distinguished real curve parameter.
pub const CURVE_VAR: &str = "t";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Base,
    Conj,
    Real,
}

#[derive(Debug)]
struct Entry {
    name: String,
    kind: VarKind,
}

#[derive(Default, Debug)]
struct Table {
    entries: Vec<Entry>,
    by_name: HashMap<String, VarId>,
}

fn table() -> &'static RwLock<Table> {
    static TABLE: OnceLock<RwLock<Table>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(Table::default()))
}

fn kind_name(k: VarKind) -> &'static str {
    match k {
        VarKind::Base | VarKind::Conj => "a complex parameter",
        VarKind::Real => "a real variable",
    }
}

fn intern(name: &str, kind: VarKind) -> Result<VarId> {
    let found = table().read().unwrap().by_name.get(name).copied();
    if let Some(id) = found {
        let existing = self::kind(id);
        return if existing == kind {
            Ok(id)
        } else {
            Err(Error::VariableKindConflict { name: name.to_string(), existing: kind_name(existing) })
        };
    }
    let mut t = table().write().unwrap();
    if t.by_name.contains_key(name) {
        drop(t);
        return intern(name, kind);
    }
    let id = VarId(t.entries.len() as u32);
    t.entries.push(Entry { name: name.to_string(), kind });
    if kind == VarKind::Base {
        t.entries.push(Entry { name: name.to_string(), kind: VarKind::Conj });
    }
    t.by_name.insert(name.to_string(), id);
    Ok(id)
}

/// Interns a complex parameter, returning the id of its base variable.
pub fn param(name: &str) -> Result<VarId> {
    if name == CURVE_VAR {
        return Err(Error::VariableKindConflict { name: name.into(), existing: "a real variable" });
    }
    intern(name, VarKind::Base)
}

/// Interns a real variable.
pub fn real(name: &str) -> Result<VarId> {
    intern(name, VarKind::Real)
}

/// The curve parameter `t`, always real.
pub fn curve_var() -> VarId {
    real(CURVE_VAR).expect("t is always real")
}

pub fn lookup(name: &str) -> Option<VarId> {
    if name == CURVE_VAR {
        return Some(curve_var());
    }
    table().read().unwrap().by_name.get(name).copied()
}

pub fn kind(id: VarId) -> VarKind {
    table().read().unwrap().entries[id.0 as usize].kind
}

pub fn name(id: VarId) -> String {
    table().read().unwrap().entries[id.0 as usize].name.clone()
}

/// The conjugate partner of a variable (identity on real variables).
pub fn conj(id: VarId) -> VarId {
    match kind(id) {
        VarKind::Base => VarId(id.0 + 1),
        VarKind::Conj => VarId(id.0 - 1),
        VarKind::Real => id,
    }
}

/// The base variable for `id` (itself unless `id` is a conjugate slot).
pub fn base(id: VarId) -> VarId {
    match kind(id) {
        VarKind::Conj => VarId(id.0 - 1),
        _ => id,
    }
}

/// Display name: conjugate slots print as `~name`.
pub fn display(id: VarId) -> String {
    let t = table().read().unwrap();
    let e = &t.entries[id.0 as usize];
    match e.kind {
        VarKind::Conj => format!("~{}", e.name),
        _ => e.name.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_adjacent() {
        let a = param("vars_test_a").unwrap();
        assert_eq!(conj(a).0, a.0 + 1);
        assert_eq!(conj(conj(a)), a);
        assert_eq!(display(conj(a)), "~vars_test_a");
        let t = curve_var();
        assert_eq!(conj(t), t);
    }

    #[test]
    fn kind_conflicts_are_rejected() {
        real("vars_test_r").unwrap();
        assert!(param("vars_test_r").is_err());
        assert!(param("t").is_err());
    }
}
