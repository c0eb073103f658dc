//! File emission and ingestion: provenance-stamped CSV, pretty JSON, the
//! state dump schema, and a gnuplot-ready matrix writer.

use std::path::Path;

use catlab_core::phase::{Amplitude, CoherentLabel, CoherentTerm, SpinLabel, SpinMotionState};
use catlab_core::wigner::WignerGrid;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

/// Write a CSV with a `# config-hash:` provenance comment, a header row,
/// and LF line endings. Floats use the shortest round-trip form.
pub fn write_csv(
    path: &Path,
    config_hash: &str,
    header: &[&str],
    rows: &[Vec<f64>],
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&format!("# config-hash: {config_hash}\n"));
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Read a CSV written by [`write_csv`] (or hand-made in the same shape):
/// returns the header names and the numeric rows. `#` lines are skipped.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if header.is_none() {
            header = Some(line.split(',').map(|s| s.trim().to_string()).collect());
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let v = field.trim().parse::<f64>().map_err(|_| {
                CliError::Config(format!(
                    "{}:{}: not a number: `{field}`",
                    path.display(),
                    idx + 1
                ))
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    let header =
        header.ok_or_else(|| CliError::Config(format!("{}: no header row", path.display())))?;
    Ok((header, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("JSON encode: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// gnuplot "nonuniform matrix" file: first row is the x axis, each further
/// row is `p W(x1,p) W(x2,p) ...` (`plot '...' nonuniform matrix with image`).
pub fn write_gnuplot_matrix(
    path: &Path,
    config_hash: &str,
    grid: &WignerGrid,
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&format!("# config-hash: {config_hash}\n"));
    let mut first = vec![grid.x.len().to_string()];
    first.extend(grid.x.iter().map(|v| format!("{v}")));
    out.push_str(&first.join(" "));
    out.push('\n');
    for (ip, p) in grid.p.iter().enumerate() {
        let mut row = vec![format!("{p}")];
        row.extend((0..grid.x.len()).map(|ix| format!("{}", grid.value(ix, ip))));
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// JSON schema of a simulated state dump.
#[derive(Debug, Serialize, Deserialize)]
pub struct StateDump {
    pub config_hash: String,
    pub program: String,
    pub theta: f64,
    pub phi: f64,
    pub brightness: f64,
    pub norm: f64,
    pub terms: Vec<TermDump>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TermDump {
    pub amp_re: f64,
    pub amp_im: f64,
    pub spin: String,
    pub alpha_re: f64,
    pub alpha_im: f64,
}

pub fn dump_terms(state: &SpinMotionState) -> Vec<TermDump> {
    state
        .terms()
        .iter()
        .map(|t| TermDump {
            amp_re: t.amp.re,
            amp_im: t.amp.im,
            spin: match t.spin {
                SpinLabel::Up => "up".to_string(),
                SpinLabel::Down => "down".to_string(),
            },
            alpha_re: t.label.alpha().re,
            alpha_im: t.label.alpha().im,
        })
        .collect()
}

/// Rebuild a state from a dump; the exact inverse of [`dump_terms`].
pub fn state_from_dump(terms: &[TermDump]) -> Result<SpinMotionState, CliError> {
    let mut parsed = Vec::with_capacity(terms.len());
    for t in terms {
        let spin = match t.spin.as_str() {
            "up" => SpinLabel::Up,
            "down" => SpinLabel::Down,
            other => {
                return Err(CliError::Config(format!(
                    "state dump: unknown spin `{other}`"
                )))
            }
        };
        let label = CoherentLabel::new(Amplitude::new(t.alpha_re, t.alpha_im))
            .map_err(|e| CliError::Config(format!("state dump: {e}")))?;
        parsed.push(CoherentTerm::new(
            Amplitude::new(t.amp_re, t.amp_im),
            spin,
            label,
        ));
    }
    SpinMotionState::new(parsed).map_err(|e| CliError::Config(format!("state dump: {e}")))
}

pub fn read_state_dump(path: &Path) -> Result<StateDump, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join(format!("catlab-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let rows = vec![vec![1.0, 0.5], vec![2.0, 0.25e-12]];
        write_csv(&path, "deadbeef", &["a", "b"], &rows).unwrap();
        let (header, got) = read_csv(&path).unwrap();
        assert_eq!(header, vec!["a".to_string(), "b".to_string()]);
        assert_eq!(got, rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# config-hash: deadbeef\n"));
        assert!(!text.contains('\r'));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn state_dump_round_trip() {
        let psi = SpinMotionState::new(vec![
            CoherentTerm::new(
                Amplitude::new(0.6, -0.2),
                SpinLabel::Up,
                CoherentLabel::new(Amplitude::new(1.0, 2.0)).unwrap(),
            ),
            CoherentTerm::new(
                Amplitude::new(0.1, 0.7),
                SpinLabel::Down,
                CoherentLabel::new(Amplitude::new(-0.5, 0.0)).unwrap(),
            ),
        ])
        .unwrap();
        let dump = dump_terms(&psi);
        let back = state_from_dump(&dump).unwrap();
        assert_eq!(psi, back);
    }
}
