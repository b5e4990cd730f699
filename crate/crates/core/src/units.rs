//! Serde helpers for latencies that may be infinite.

/// Finite values as JSON numbers, infinity as the string `"inf"`.
pub mod ms_or_inf {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str("inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Text(t) => parse(&t).map_err(de::Error::custom),
        }
    }

    pub fn parse(t: &str) -> Result<f64, String> {
        match t.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => Ok(f64::INFINITY),
            other => other.parse::<f64>().map_err(|e| format!("bad latency {t:?}: {e}")),
        }
    }
}

pub(crate) fn fmt_ms(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "inf".to_string()
    }
}
