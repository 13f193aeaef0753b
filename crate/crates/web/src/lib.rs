//! Browser bindings: check a program, evaluate one of its definitions, and
//! decide type precision. Every call returns a JSON document.

use grip_core::eval::{normalize, trace, DEFAULT_FUEL};
use grip_core::precision::{decide_type_prec, PrecResult};
use grip_core::surface::{parse_file, parse_term, print, SourceFile};
use grip_core::typeck::{check_decl, check_file, Env};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn parse(source: &str) -> Result<SourceFile, Value> {
    parse_file(source).map_err(|ds| {
        json!({
            "ok": false,
            "errors": ds.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        })
    })
}

/// Typecheck every declaration; report each type or each error.
#[wasm_bindgen]
pub fn check_program(source: &str) -> String {
    let src = match parse(source) {
        Ok(s) => s,
        Err(doc) => return doc.to_string(),
    };
    let doc = match check_file(&Env::new(), &src) {
        Ok(js) => json!({
            "ok": true,
            "declarations": src.decls.iter().zip(&js).map(|(d, j)| json!({
                "name": d.name, "type": print(&j.ty),
            })).collect::<Vec<_>>(),
        }),
        Err(es) => json!({
            "ok": false,
            "errors": es.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        }),
    };
    doc.to_string()
}

/// Normalize definition `name` (the last definition when empty).
#[wasm_bindgen]
pub fn evaluate(source: &str, name: &str, with_trace: bool) -> String {
    let src = match parse(source) {
        Ok(s) => s,
        Err(doc) => return doc.to_string(),
    };
    let decl = if name.is_empty() {
        src.decls.iter().rev().find(|d| d.body.is_some())
    } else {
        src.get(name)
    };
    let Some(decl) = decl else {
        return json!({"ok": false, "errors": [format!("no definition `{name}`")]}).to_string();
    };
    let Some(body) = &decl.body else {
        return json!({"ok": false, "errors": [format!("`{}` is an axiom", decl.name)]}).to_string();
    };
    if let Err(e) = check_decl(&Env::new(), decl) {
        return json!({"ok": false, "errors": [e.to_string()]}).to_string();
    }
    let doc = if with_trace {
        match trace(body, DEFAULT_FUEL) {
            Ok((v, tr)) => json!({
                "ok": true,
                "name": decl.name,
                "value": print(&v),
                "steps": tr.steps,
                "trace": tr.to_text(),
            }),
            Err(e) => json!({"ok": false, "errors": [e.to_string()]}),
        }
    } else {
        match normalize(body, DEFAULT_FUEL) {
            Ok(v) => json!({"ok": true, "name": decl.name, "value": print(&v)}),
            Err(e) => json!({"ok": false, "errors": [e.to_string()]}),
        }
    };
    doc.to_string()
}

/// Decide `a <=[level] b` between closed types.
#[wasm_bindgen]
pub fn type_precision(a: &str, b: &str, level: u32) -> String {
    let parsed = parse_term(a).and_then(|ta| parse_term(b).map(|tb| (ta, tb)));
    let (ta, tb) = match parsed {
        Ok(p) => p,
        Err(ds) => return json!({"ok": false, "errors": [ds[0].to_string()]}).to_string(),
    };
    let doc = match decide_type_prec(&ta, &tb, level) {
        Ok(PrecResult::Holds(w)) => json!({
            "ok": true,
            "verdict": "holds",
            "derivation": w.derivation.to_string(),
        }),
        Ok(PrecResult::Fails(path)) => json!({"ok": true, "verdict": "fails", "path": path}),
        Ok(PrecResult::UnknownUpToBound { checked, .. }) => {
            json!({"ok": true, "verdict": "unknown", "checked": checked})
        }
        Err(e) => json!({"ok": false, "errors": [e.to_string()]}),
    };
    doc.to_string()
}
