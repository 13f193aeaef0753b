//! The precision prelude: opaque proof constants declared in `prelude.grip`.
//!
//! The built-in file can be replaced by setting `GRIP_PRELUDE` to a path.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::surface::{parse_file_with, Scope, SourceFile};
use crate::syntax::{Context, Name, Tm};

pub const BUILTIN: &str = include_str!("../prelude.grip");

pub const ENV_VAR: &str = "GRIP_PRELUDE";

struct Loaded {
    file: SourceFile,
    scope: Scope,
    types: HashMap<String, Tm>,
}

static PRELUDE: OnceLock<Result<Loaded, String>> = OnceLock::new();

fn load() -> Result<Loaded, String> {
    let text = match std::env::var(ENV_VAR) {
        Ok(path) if !path.is_empty() => std::fs::read_to_string(&path)
            .map_err(|e| format!("cannot read prelude `{path}`: {e}"))?,
        _ => BUILTIN.to_string(),
    };
    let file = parse_file_with(&text, &Scope::new()).map_err(|ds| {
        let msgs: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
        format!("prelude does not parse:\n{}", msgs.join("\n"))
    })?;
    let scope = Scope::from_file(&file);
    let types = file
        .decls
        .iter()
        .filter(|d| d.body.is_none())
        .map(|d| (d.name.clone(), d.ty.clone()))
        .collect();
    Ok(Loaded { file, scope, types })
}

fn loaded() -> &'static Loaded {
    match PRELUDE.get_or_init(load) {
        Ok(l) => l,
        Err(e) => panic!("{e}"),
    }
}

/// Load the prelude, reporting a bad override instead of panicking.
pub fn try_init() -> Result<(), String> {
    match PRELUDE.get_or_init(load) {
        Ok(_) => Ok(()),
        Err(e) => Err(e.clone()),
    }
}

/// Names the parser resolves: every prelude constant.
pub fn scope() -> Scope {
    loaded().scope.clone()
}

pub fn file() -> &'static SourceFile {
    &loaded().file
}

/// Declared types of the prelude constants.
pub fn types() -> &'static HashMap<String, Tm> {
    &loaded().types
}

pub fn type_of(name: &str) -> Option<&'static Tm> {
    loaded().types.get(name)
}

/// The prelude as a list of declarations, in file order.
pub fn prelude() -> Context {
    let mut ctx = Context::new();
    for d in &file().decls {
        ctx.push(Name::new(&d.name), d.ty.clone());
    }
    ctx
}

/// Suffix a level-indexed constant name, e.g. `lreflTy` at 0 is `lreflTy0`.
pub fn at(name: &str, level: u32) -> String {
    format!("{name}{level}")
}
