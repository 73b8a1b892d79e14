//! Metric reports as JSON or aligned text. Numbers are rounded to four
//! decimals; undefined values become `null` (JSON) or `-` (text).

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::metrics::{DepthScores, SegScores};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Json,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::invalid(format!("unknown report format '{other}'"))),
        }
    }
}

pub fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

fn num(v: Option<f64>) -> Value {
    v.filter(|x| x.is_finite()).map_or(Value::Null, |x| json!(round4(x)))
}

pub fn seg_scores_json(s: &SegScores) -> Value {
    json!({
        "mIoU": num(s.mean_iou),
        "per_class_iou": s.iou.iter().map(|&v| num(v)).collect::<Vec<_>>(),
        "pixel_acc": num(s.pixel_accuracy),
        "class_acc": num(s.class_accuracy),
    })
}

pub fn depth_scores_json(d: &DepthScores) -> Value {
    json!({
        "rmse_lin": num(Some(d.rmse_lin)),
        "rmse_log": num(Some(d.rmse_log)),
        "abs_rel": num(Some(d.abs_rel)),
        "sqr_rel": num(Some(d.sqr_rel)),
        "delta_1": num(Some(d.delta_1)),
        "delta_2": num(Some(d.delta_2)),
        "delta_3": num(Some(d.delta_3)),
        "count": d.count,
    })
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), "-".into())),
        Value::Number(n) => {
            let text = match (n.as_u64(), n.as_i64(), n.as_f64()) {
                (Some(u), _, _) => u.to_string(),
                (_, Some(i), _) => i.to_string(),
                (_, _, Some(f)) => format!("{f:.4}"),
                _ => n.to_string(),
            };
            out.push((prefix.to_string(), text));
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
    }
}

/// Two-column table, keys left-aligned, values right-aligned.
pub fn render_text(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let kw = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let vw = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<kw$}  {v:>vw$}\n")).collect()
}

pub fn render(v: &Value, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(v).expect("values serialize") + "\n",
        ReportFormat::Text => render_text(v),
    }
}

pub fn write_report(path: impl AsRef<Path>, v: &Value, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render(v, format)).map_err(Error::at_path(path))?;
    Ok(())
}

/// Inserts `key` into a JSON object.
pub fn with_entry(mut v: Value, key: &str, entry: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert(key.to_string(), entry);
    } else {
        let mut map = Map::new();
        map.insert(key.to_string(), entry);
        v = Value::Object(map);
    }
    v
}
