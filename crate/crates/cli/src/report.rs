//! Human-readable rendering of run reports.

use std::path::Path;

use crate::campaign::RunReport;
use crate::CliError;

pub fn load_report(path: &Path) -> Result<RunReport, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Artifact(format!("cannot open {}: {e}", path.display())))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| CliError::Artifact(format!("malformed report {}: {e}", path.display())))
}

/// Render one pass/fail table per report file.
pub fn render(paths: &[std::path::PathBuf]) -> Result<String, CliError> {
    if paths.is_empty() {
        return Err(CliError::Artifact("no report files given".into()));
    }
    let mut out = String::new();
    for path in paths {
        let report = load_report(path)?;
        out.push_str(&format!(
            "== {} (seed {}) — {}\n",
            report.mode,
            report.seed,
            if report.pass { "PASS" } else { "FAIL" }
        ));
        let width = report
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(16)
            .max(16);
        out.push_str(&format!(
            "{:<width$}  {:>12}  {:>2}  {:>9}  verdict\n",
            "check", "value", "", "tolerance"
        ));
        for c in &report.checks {
            out.push_str(&format!(
                "{:<width$}  {:>12.4e}  {:>2}  {:>9.1e}  {}\n",
                c.name,
                c.value,
                c.comparison,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            ));
        }
        for note in &report.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_file_is_an_artifact_error() {
        let err = render(&[std::path::PathBuf::from("/nonexistent/report.json")]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn malformed_report_is_an_artifact_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        std::fs::write(&path, "{ not json").unwrap();
        let err = render(&[path]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
