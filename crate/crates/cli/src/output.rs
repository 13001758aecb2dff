use num_complex::Complex64;
use serde_json::{json, Map, Value};

use lcspec_core::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, enough to round-trip any `f64`.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn config_value(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).unwrap_or(Value::Null)
}

/// A JSON object that starts with the tool version and resolved config.
pub fn report(cfg: &RunConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("version".into(), json!(VERSION));
    m.insert("config".into(), config_value(cfg));
    m
}

pub fn json_document(m: Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).unwrap_or_default();
    s.push('\n');
    s
}

/// CSV with `#` comment lines carrying the version, the resolved config
/// (as one-line JSON) and any extra notes, then the header and rows.
pub fn csv_document(
    cfg: &RunConfig,
    notes: &[String],
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<String, String> {
    let mut buf = Vec::new();
    buf.extend_from_slice(format!("# lcspec {VERSION}\n").as_bytes());
    buf.extend_from_slice(format!("# config: {}\n", config_value(cfg)).as_bytes());
    for n in notes {
        buf.extend_from_slice(format!("# {n}\n").as_bytes());
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(r).map_err(|e| e.to_string())?;
    }
    let buf = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(buf).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            let s = float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
    }
}
