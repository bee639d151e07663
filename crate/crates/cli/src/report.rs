use serde::Serialize;
use serde_json::Value;

/// Bumped whenever the report layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct ReportFile<'a> {
    schema: u32,
    command: &'a str,
    invocation: &'a [String],
    version: &'static str,
    seed: Option<u64>,
    config: &'a Value,
    results: &'a Value,
    warnings: &'a [String],
}

pub struct Report {
    invocation: Vec<String>,
    pub seed: Option<u64>,
    pub config: Value,
    pub results: Value,
    warnings: Vec<String>,
}

impl Report {
    pub fn new(invocation: Vec<String>) -> Self {
        Self {
            invocation,
            seed: None,
            config: Value::Null,
            results: Value::Null,
            warnings: Vec::new(),
        }
    }

    pub fn warn(&mut self, message: &str) {
        eprintln!("warning: {message}");
        self.warnings.push(message.to_string());
    }

    pub fn to_json(&self, command: &str) -> String {
        let file = ReportFile {
            schema: SCHEMA_VERSION,
            command,
            invocation: &self.invocation,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            config: &self.config,
            results: &self.results,
            warnings: &self.warnings,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("reports are serializable");
        s.push('\n');
        s
    }
}

/// Six significant digits, trailing zeros dropped.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=9).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.5), "0.5");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(0.158655253931457), "0.158655");
        assert_eq!(sig6(-1234.5678), "-1234.57");
        assert_eq!(sig6(3.0e-9), "3.00000e-9");
        assert_eq!(sig6(0.0), "0");
    }
}
