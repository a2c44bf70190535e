//! Parsing and serialization: graphs as JSON edge lists or dense CSV,
//! signals as JSON arrays (reals or [re, im] pairs) or single-column CSV.
//! Complex values always serialize as [re, im].

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::graph_model::ShiftGraph;
use crate::{C64, Error, Result};

fn bad(msg: impl Into<String>) -> Error {
    Error::MalformedInput(msg.into())
}

/// JSON graph: `{"n": int, "edges": [[from, to, weight?], ...]}` with
/// default weight 1.
pub fn graph_from_json(text: &str) -> Result<ShiftGraph> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| bad("graph JSON must be an object"))?;
    let n = obj
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("graph JSON needs a positive integer field 'n'"))? as usize;
    let edges_v = obj
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("graph JSON needs an array field 'edges'"))?;
    let mut edges = Vec::with_capacity(edges_v.len());
    for (i, e) in edges_v.iter().enumerate() {
        let arr = e.as_array().ok_or_else(|| bad(format!("edge {i} is not an array")))?;
        if arr.len() < 2 || arr.len() > 3 {
            return Err(bad(format!("edge {i} must be [from, to] or [from, to, weight]")));
        }
        let from = arr[0]
            .as_u64()
            .ok_or_else(|| bad(format!("edge {i}: 'from' is not a nonnegative integer")))?
            as usize;
        let to = arr[1]
            .as_u64()
            .ok_or_else(|| bad(format!("edge {i}: 'to' is not a nonnegative integer")))?
            as usize;
        let w = if arr.len() == 3 {
            arr[2].as_f64().ok_or_else(|| bad(format!("edge {i}: weight is not a number")))?
        } else {
            1.0
        };
        edges.push((from, to, w));
    }
    ShiftGraph::from_edges(n, &edges)
}

/// Dense CSV graph: N rows of N comma-separated reals, row i / column j =
/// weight of edge j -> i.
pub fn graph_from_csv(text: &str) -> Result<ShiftGraph> {
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let n = rows.len();
    if n < 2 {
        return Err(bad("CSV graph needs at least 2 rows"));
    }
    let mut a = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != n {
            return Err(bad(format!("CSV row {i} has {} cells, expected {n}", cells.len())));
        }
        for (j, cell) in cells.iter().enumerate() {
            a[(i, j)] = cell
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("CSV cell ({i},{j}) is not a number: '{cell}'")))?;
        }
    }
    ShiftGraph::from_matrix(a)
}

/// Pick the parser by content: objects are JSON edge lists, anything else
/// is tried as CSV.
pub fn graph_from_text(text: &str) -> Result<ShiftGraph> {
    if text.trim_start().starts_with('{') {
        graph_from_json(text)
    } else {
        graph_from_csv(text)
    }
}

fn complex_from_value(v: &Value, what: &str) -> Result<C64> {
    if let Some(x) = v.as_f64() {
        return Ok(C64::new(x, 0.0));
    }
    if let Some(pair) = v.as_array() {
        if pair.len() == 2 {
            let re = pair[0].as_f64().ok_or_else(|| bad(format!("{what}: bad real part")))?;
            let im = pair[1].as_f64().ok_or_else(|| bad(format!("{what}: bad imaginary part")))?;
            return Ok(C64::new(re, im));
        }
    }
    Err(bad(format!("{what}: expected a number or an [re, im] pair")))
}

/// Signal: JSON array of reals or of [re, im] pairs.
pub fn signal_from_json(text: &str) -> Result<Vec<C64>> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
    let arr = v.as_array().ok_or_else(|| bad("signal JSON must be an array"))?;
    if arr.is_empty() {
        return Err(bad("signal is empty"));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| complex_from_value(x, &format!("signal entry {i}")))
        .collect()
}

/// Signal: single CSV column of reals.
pub fn signal_from_csv(text: &str) -> Result<Vec<C64>> {
    let vals: Result<Vec<C64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map(|x| C64::new(x, 0.0))
                .map_err(|_| bad(format!("CSV signal line is not a number: '{l}'")))
        })
        .collect();
    let vals = vals?;
    if vals.is_empty() {
        return Err(bad("signal is empty"));
    }
    Ok(vals)
}

pub fn signal_from_text(text: &str) -> Result<Vec<C64>> {
    if text.trim_start().starts_with('[') {
        signal_from_json(text)
    } else {
        signal_from_csv(text)
    }
}

pub fn complex_to_value(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn signal_to_value(values: &DVector<C64>) -> Value {
    Value::Array(values.iter().map(|&z| complex_to_value(z)).collect())
}

pub fn matrix_to_value(m: &DMatrix<C64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_value(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn real_matrix_to_value(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn real_matrix_to_csv(m: &DMatrix<f64>) -> String {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect::<Vec<_>>().join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}
