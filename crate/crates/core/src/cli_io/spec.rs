//! Spec documents.
//!
//! ```json
//! {"schema_version": 1, "kind": "cylinder", "window": {"x": [-2.5, 2.5]}}
//! {"kind": "toric_polytope", "halfspaces": [[1,0,0],[-1,0,3],[0,1,0],[0,-1,3]]}
//! {"kind": "product", "left": {"kind": "disk"}, "right": {"kind": "linear", "n": 1}}
//! {"kind": "almost_toric", "halfspaces": [...], "marked": [{"point": [1,1], "multiplicity": 1}]}
//! {"kind": "lagrangian_bundle", "n": 2, "k": 1}
//! ```
//!
//! Other top-level keys: `bounds` (chart bounds per coordinate), `compact`,
//! `zero_fibre_bs`, `lattice_offset`. Window keys are `x` or `x1 .. xn`
//! (one per action), or the window is an array of `[lo, hi]` / `null`.

use serde_json::{Map, Value};

use crate::bohr_sommerfeld::{Halfspace, Polytope, Window};
use crate::error::{Error, Result};
use crate::models::{make_model, Interval, ModelKind, ModelSpec};
use crate::quantisation::{FibrationBase, FibrationDescriptor, MarkedPoint};

pub const SPEC_SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSpec {
    pub descriptor: FibrationDescriptor,
    pub window: Window,
}

impl ParsedSpec {
    /// Chart model, when the base is a model chart.
    pub fn model_spec(&self) -> Option<&ModelSpec> {
        match &self.descriptor.base {
            FibrationBase::ModelChart(s) => Some(s),
            _ => None,
        }
    }
}

fn err(path: &str, reason: impl Into<String>) -> Error {
    Error::schema(path, reason)
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn check_keys(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<()> {
    for k in obj.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(err(&format!("{path}.{k}"), format!("unknown field; expected one of {allowed:?}")));
        }
    }
    Ok(())
}

fn get_usize(obj: &Map<String, Value>, key: &str, path: &str) -> Result<usize> {
    let p = format!("{path}.{key}");
    let v = obj.get(key).ok_or_else(|| err(&p, "missing field"))?;
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| err(&p, format!("expected a non-negative integer, got {v}")))
}

fn get_bool(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<bool>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_bool()
            .map(Some)
            .ok_or_else(|| err(&format!("{path}.{key}"), format!("expected a boolean, got {v}"))),
    }
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| err(path, format!("expected a finite number, got {v}")))
}

fn integer(v: &Value, path: &str) -> Result<i64> {
    if let Some(i) = v.as_i64() {
        return Ok(i);
    }
    match v.as_f64() {
        Some(f) if f.fract() == 0.0 && f.abs() < 9e15 => Ok(f as i64),
        _ => Err(err(path, format!("expected an integer, got {v}"))),
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn interval(v: &Value, path: &str) -> Result<Option<Interval>> {
    if v.is_null() {
        return Ok(None);
    }
    let a = array(v, path)?;
    if a.len() != 2 {
        return Err(err(path, format!("expected [lo, hi], got {} entries", a.len())));
    }
    let side = |i: usize, inf: f64| -> Result<f64> {
        if a[i].is_null() {
            Ok(inf)
        } else {
            number(&a[i], &format!("{path}[{i}]"))
        }
    };
    let iv = Interval::new(side(0, f64::NEG_INFINITY)?, side(1, f64::INFINITY)?);
    if iv.lo >= iv.hi {
        return Err(err(path, format!("empty interval ({}, {})", iv.lo, iv.hi)));
    }
    Ok(Some(iv))
}

fn polytope(obj: &Map<String, Value>, path: &str) -> Result<Polytope> {
    let p = format!("{path}.halfspaces");
    let rows = array(obj.get("halfspaces").ok_or_else(|| err(&p, "missing field"))?, &p)?;
    if rows.is_empty() {
        return Err(err(&p, "no halfspaces"));
    }
    let mut hs = Vec::with_capacity(rows.len());
    let mut width = None;
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{p}[{i}]");
        let r = array(row, &rp)?;
        if r.len() < 2 {
            return Err(err(&rp, "a row needs at least one normal entry and an offset"));
        }
        if *width.get_or_insert(r.len()) != r.len() {
            return Err(err(&rp, "rows have different lengths"));
        }
        let normal = r[..r.len() - 1]
            .iter()
            .enumerate()
            .map(|(j, v)| integer(v, &format!("{rp}[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        let offset = number(&r[r.len() - 1], &format!("{rp}[{}]", r.len() - 1))?;
        hs.push(Halfspace { normal, offset });
    }
    Polytope::new(hs).map_err(|e| match e {
        Error::UnboundedPolytope => err(&p, "polytope is unbounded"),
        Error::InvalidPolytope(m) => err(&p, m),
        other => other,
    })
}

fn dims(obj: &Map<String, Value>, path: &str, with_k: bool) -> Result<(usize, usize)> {
    let n = get_usize(obj, "n", path)?;
    if n == 0 {
        return Err(err(&format!("{path}.n"), "n must be at least 1"));
    }
    let k = if with_k { get_usize(obj, "k", path)? } else { 0 };
    if k > n {
        return Err(err(&format!("{path}.k"), format!("invalid (n,k) = ({n},{k}): need k <= n")));
    }
    Ok((n, k))
}

const MODEL_KEYS: &[&str] = &["kind", "n", "k", "left", "right", "halfspaces", "bounds"];

fn model_spec(obj: &Map<String, Value>, path: &str) -> Result<ModelSpec> {
    let kind_path = format!("{path}.kind");
    let kind = obj
        .get("kind")
        .ok_or_else(|| err(&kind_path, "missing field"))?
        .as_str()
        .ok_or_else(|| err(&kind_path, "expected a string"))?;
    let spec = match kind {
        "cylinder" => ModelSpec::cylinder(),
        "disk" => ModelSpec::disk(),
        "focus_focus" => ModelSpec::focus_focus(),
        "linear" => ModelSpec::linear(dims(obj, path, false)?.0),
        "liouville" => {
            let (n, k) = dims(obj, path, true)?;
            ModelSpec::liouville(n, k)
        }
        "elliptic" => {
            let (n, k) = dims(obj, path, true)?;
            ModelSpec::elliptic(n, k)
        }
        "product" => {
            let sub = |key: &str| -> Result<ModelSpec> {
                let p = format!("{path}.{key}");
                let o = object(obj.get(key).ok_or_else(|| err(&p, "missing field"))?, &p)?;
                check_keys(o, &p, MODEL_KEYS)?;
                model_spec(o, &p)
            };
            ModelSpec::product(sub("left")?, sub("right")?)
        }
        "toric_polytope" => ModelSpec::new(ModelKind::ToricPolytope(polytope(obj, path)?)),
        other => {
            return Err(err(
                &kind_path,
                format!("unknown model kind {other:?}"),
            ))
        }
    };
    let spec = match obj.get("bounds") {
        None => spec,
        Some(v) => {
            let p = format!("{path}.bounds");
            let b = array(v, &p)?
                .iter()
                .enumerate()
                .map(|(i, iv)| Ok(interval(iv, &format!("{p}[{i}]"))?.unwrap_or(Interval::REAL_LINE)))
                .collect::<Result<Vec<_>>>()?;
            spec.with_bounds(b)
        }
    };
    make_model(spec.clone()).map_err(|e| err(path, e.to_string()))?;
    Ok(spec)
}

/// Window from an object keyed by action name or an array of intervals.
pub fn parse_window(v: &Value, rank: usize, path: &str) -> Result<Window> {
    let mut actions = vec![None; rank];
    match v {
        Value::Object(o) => {
            for (key, iv) in o {
                let kp = format!("{path}.{key}");
                let j = match key.as_str() {
                    "x" if rank == 1 => 1,
                    k => k
                        .strip_prefix('x')
                        .and_then(|s| s.parse::<usize>().ok())
                        .filter(|&j| (1..=rank).contains(&j))
                        .ok_or_else(|| {
                            err(&kp, format!("unknown action; expected x1..x{rank}"))
                        })?,
                };
                actions[j - 1] = interval(iv, &kp)?;
            }
        }
        Value::Array(a) => {
            if a.len() > rank {
                return Err(err(path, format!("{} intervals for {rank} actions", a.len())));
            }
            for (j, iv) in a.iter().enumerate() {
                actions[j] = interval(iv, &format!("{path}[{j}]"))?;
            }
        }
        _ => return Err(err(path, "expected an object or an array")),
    }
    Ok(Window::new(actions))
}

/// Parse and validate a spec document.
pub fn parse_spec(text: &str) -> Result<ParsedSpec> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        err("$", format!("malformed JSON at line {} column {}: {e}", e.line(), e.column()))
    })?;
    let obj = object(&root, "$")?;
    if let Some(v) = obj.get("schema_version") {
        match v.as_u64() {
            Some(SPEC_SCHEMA_VERSION) => {}
            _ => {
                return Err(err(
                    "$.schema_version",
                    format!("unsupported version {v}; expected {SPEC_SCHEMA_VERSION}"),
                ))
            }
        }
    }
    let mut allowed = MODEL_KEYS.to_vec();
    allowed.extend([
        "schema_version",
        "window",
        "compact",
        "zero_fibre_bs",
        "lattice_offset",
        "marked",
    ]);
    check_keys(obj, "$", &allowed)?;
    let kind = obj.get("kind").and_then(Value::as_str).unwrap_or_default();
    let (base, rank, default_compact) = match kind {
        "lagrangian_bundle" => {
            let (n, k) = dims(obj, "$", true)?;
            (FibrationBase::LagrangianBundle { fibre_rank: k, base_dim: n }, n, false)
        }
        "toric_polytope" => {
            let p = polytope(obj, "$")?;
            let d = p.dimension();
            (FibrationBase::ToricPolytope(p), d, true)
        }
        "almost_toric" => {
            let p = polytope(obj, "$")?;
            if p.dimension() != 2 {
                return Err(err("$.halfspaces", "almost toric base must be 2-dimensional"));
            }
            let marked = match obj.get("marked") {
                None => Vec::new(),
                Some(v) => array(v, "$.marked")?
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let mp = format!("$.marked[{i}]");
                        let mo = object(m, &mp)?;
                        check_keys(mo, &mp, &["point", "multiplicity"])?;
                        let pp = format!("{mp}.point");
                        let pt = array(mo.get("point").ok_or_else(|| err(&pp, "missing field"))?, &pp)?
                            .iter()
                            .enumerate()
                            .map(|(j, x)| number(x, &format!("{pp}[{j}]")))
                            .collect::<Result<Vec<_>>>()?;
                        if pt.len() != 2 {
                            return Err(err(&pp, "expected a point in the plane"));
                        }
                        let mult = match mo.get("multiplicity") {
                            None => 1,
                            Some(_) => get_usize(mo, "multiplicity", &mp)?,
                        };
                        if mult < 1 {
                            return Err(err(&format!("{mp}.multiplicity"), "multiplicity must be at least 1"));
                        }
                        Ok(MarkedPoint { point: pt, multiplicity: mult as u32 })
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            (FibrationBase::AlmostToric4 { polytope: p, marked }, 2, true)
        }
        _ => {
            let spec = model_spec(obj, "$")?;
            let rank = make_model(spec.clone())?.rank();
            (FibrationBase::ModelChart(spec), rank, false)
        }
    };
    if kind != "almost_toric" && obj.contains_key("marked") {
        return Err(err("$.marked", "only almost_toric specs carry marked points"));
    }
    let window = match obj.get("window") {
        None => Window::unbounded(),
        Some(v) => parse_window(v, rank, "$.window")?,
    };
    let lattice_offset = match obj.get("lattice_offset") {
        None => None,
        Some(v) => Some(
            array(v, "$.lattice_offset")?
                .iter()
                .enumerate()
                .map(|(i, x)| number(x, &format!("$.lattice_offset[{i}]")))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let descriptor = FibrationDescriptor {
        base,
        compact: get_bool(obj, "compact", "$")?.unwrap_or(default_compact),
        zero_fibre_bs: get_bool(obj, "zero_fibre_bs", "$")?.unwrap_or(true),
        lattice_offset,
    };
    descriptor.validate()?;
    Ok(ParsedSpec { descriptor, window })
}
