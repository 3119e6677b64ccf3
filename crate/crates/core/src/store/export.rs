use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{LabelLog, PreferenceLabel, StoreError};
use crate::prompt::PairKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// Header line followed by one JSON label record per line.
    Labels,
    /// Per-pair and per-user summary document.
    Summary,
}

impl FromStr for ExportFormat {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "labels" | "jsonl" => Ok(ExportFormat::Labels),
            "summary" | "json" => Ok(ExportFormat::Summary),
            other => Err(StoreError::UnsupportedFormat(other.to_string())),
        }
    }
}

pub const LABELS_FORMAT: &str = "farpls-labels";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportHeader {
    pub format: String,
    pub version: u32,
    pub records: usize,
    pub unique: usize,
    pub checks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub pair: PairKey,
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSummary {
    pub user: String,
    /// Absent when the user answered no checks.
    pub consistency: Option<f64>,
    pub total_view_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportSummary {
    pub pairs: Vec<PairSummary>,
    pub users: Vec<UserSummary>,
}

impl ExportSummary {
    pub fn from_log(log: &LabelLog) -> Self {
        let pairs = log
            .pair_scores()
            .iter()
            .map(|(pair, scores)| {
                let stats = log.pair_statistics(pair);
                PairSummary {
                    pair: pair.clone(),
                    count: stats.label_count,
                    mean: scores.iter().sum::<f64>() / scores.len().max(1) as f64,
                    variance: stats.score_variance,
                }
            })
            .collect();
        let users = log
            .users()
            .map(|u| UserSummary {
                user: u.to_string(),
                consistency: log.consistency_score(u).ok(),
                total_view_ms: log.total_view_ms(u),
            })
            .collect();
        Self { pairs, users }
    }
}

fn export_order(records: &[PreferenceLabel]) -> Vec<&PreferenceLabel> {
    let mut sorted: Vec<&PreferenceLabel> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.submitted_at, &a.user_id, &a.pair, a.is_check).cmp(&(
            b.submitted_at,
            &b.user_id,
            &b.pair,
            b.is_check,
        ))
    });
    sorted
}

pub fn export_labels(log: &LabelLog, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Labels => {
            let header = ExportHeader {
                format: LABELS_FORMAT.into(),
                version: 1,
                records: log.len(),
                unique: log.unique_count(),
                checks: log.check_count(),
            };
            let mut out = serde_json::to_vec(&header).expect("header serializes");
            out.push(b'\n');
            for r in export_order(log.records()) {
                out.extend(serde_json::to_vec(r).expect("label serializes"));
                out.push(b'\n');
            }
            out
        }
        ExportFormat::Summary => {
            let mut out = serde_json::to_vec_pretty(&ExportSummary::from_log(log))
                .expect("summary serializes");
            out.push(b'\n');
            out
        }
    }
}

/// Reads a labels export back into a log.
pub fn import_labels(bytes: &[u8]) -> Result<LabelLog, StoreError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| StoreError::MalformedExport(e.to_string()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: ExportHeader = serde_json::from_str(
        lines
            .next()
            .ok_or_else(|| StoreError::MalformedExport("missing header".into()))?,
    )
    .map_err(|e| StoreError::MalformedExport(format!("header: {e}")))?;
    if header.format != LABELS_FORMAT {
        return Err(StoreError::UnsupportedFormat(header.format));
    }
    let records = lines
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| StoreError::MalformedExport(format!("record {}: {e}", i + 1)))
        })
        .collect::<Result<Vec<PreferenceLabel>, _>>()?;
    if records.len() != header.records {
        return Err(StoreError::MalformedExport(format!(
            "header announces {} records, found {}",
            header.records,
            records.len()
        )));
    }
    LabelLog::from_records(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::Score;
    use crate::store::log::tests::label;

    fn sample_log() -> LabelLog {
        LabelLog::from_records([
            label("u1", "a", "b", Score::One, false, 0),
            label("u2", "a", "b", Score::Zero, false, 1),
            label("u1", "a", "c", Score::Half, false, 2),
            label("u1", "a", "b", Score::One, true, 3),
        ])
        .unwrap()
    }

    #[test]
    fn empty_log_exports_header_only() {
        let out = export_labels(&LabelLog::new(), ExportFormat::Labels);
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains(LABELS_FORMAT));
        assert_eq!(import_labels(text.as_bytes()).unwrap(), LabelLog::new());
    }

    #[test]
    fn labels_round_trip() {
        let log = sample_log();
        let bytes = export_labels(&log, ExportFormat::Labels);
        let back = import_labels(&bytes).unwrap();
        assert_eq!(back, log);
        assert_eq!(export_labels(&back, ExportFormat::Labels), bytes);
    }

    #[test]
    fn summary_lists_pairs_and_users() {
        let s = ExportSummary::from_log(&sample_log());
        assert_eq!(s.pairs.len(), 2);
        assert_eq!(
            (s.pairs[0].count, s.pairs[0].mean, s.pairs[0].variance),
            (2, 0.5, 0.25)
        );
        assert_eq!(s.users[0].consistency, Some(1.0));
        assert_eq!(s.users[1].consistency, None);
        assert_eq!(s.users[0].total_view_ms, 7500);
    }

    #[test]
    fn unknown_format_is_unsupported() {
        assert!(matches!(
            "xml".parse::<ExportFormat>(),
            Err(StoreError::UnsupportedFormat(_))
        ));
    }
}
