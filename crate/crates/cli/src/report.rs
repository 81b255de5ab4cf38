//! Report encoding: every floating-point number becomes a decimal string
//! with 17 significant digits, which round-trips exactly.

use serde::Serialize;
use serde_json::Value;

pub fn decimal(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rewrites all non-integer JSON numbers as 17-digit decimal strings.
pub fn encode_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(decimal(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(a) => Value::Array(a.into_iter().map(encode_numbers).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, encode_numbers(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize to JSON")
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always render");
    s.push('\n');
    s
}

/// Quotes a CSV field when needed.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn decimals_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = decimal(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let digits = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17);
        }
    }

    #[test]
    fn integers_stay_numbers() {
        let v = encode_numbers(json!({"n": 3, "x": 0.5, "a": [1.5, "s", true, null]}));
        assert_eq!(v["n"], json!(3));
        assert_eq!(v["x"], json!("5.0000000000000000e-1"));
        assert_eq!(v["a"][0], json!("1.5000000000000000e0"));
        assert_eq!(v["a"][1], json!("s"));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("max(a, b)"), "\"max(a, b)\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
