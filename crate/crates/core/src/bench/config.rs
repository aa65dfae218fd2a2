//! `key = value` config files. Keys are flag names without the leading
//! dashes; `_` and `-` are interchangeable. `#` starts a comment.

use crate::error::{Error, Result};

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| Error::Parse {
            line: i + 1,
            message: message.to_string(),
        };
        let (k, v) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(err("empty key"));
        }
        if key == "config" {
            return Err(err("config files cannot include other config files"));
        }
        let value = v.trim().trim_matches('"').to_string();
        out.push((key, value));
    }
    Ok(out)
}

/// `[("epochs", "5")]` → `["--epochs", "5"]`.
pub fn config_to_args(pairs: &[(String, String)]) -> Vec<String> {
    pairs
        .iter()
        .flat_map(|(k, v)| [format!("--{k}"), v.clone()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let text = "# experiment\ndata = synthetic:spectrum-b\nbatch_frac=0.05  # large batch\n\nseeds = \"1,2\"\n";
        let pairs = parse_config(text).unwrap();
        assert_eq!(
            pairs,
            vec![
                ("data".to_string(), "synthetic:spectrum-b".to_string()),
                ("batch-frac".to_string(), "0.05".to_string()),
                ("seeds".to_string(), "1,2".to_string()),
            ]
        );
        assert_eq!(config_to_args(&pairs[1..2]), vec!["--batch-frac", "0.05"]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_config("a = 1\nnonsense\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_config("config = x.conf").is_err());
        assert!(parse_config(" = 3").is_err());
    }
}
