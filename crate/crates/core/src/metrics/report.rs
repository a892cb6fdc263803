//! Evaluation report emitters: canonical JSON plus a CSV whose columns match
//! the result tables (DC / Fair / Faithful at summary and paragraph level,
//! citation accuracy, sentence counts, self-BLEU).

use super::CitationReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub entry_index: usize,
    pub query: String,
    #[serde(flatten)]
    pub report: CitationReport,
}

/// Column means across entries. Optional metrics average over the entries
/// where they are present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeans {
    pub entries: usize,
    pub summary_dc: f64,
    pub summary_fairness: Option<f64>,
    pub summary_faithfulness: Option<f64>,
    pub paragraph_dc: f64,
    pub paragraph_fairness: Option<f64>,
    pub paragraph_faithfulness: Option<f64>,
    pub citation_accuracy: Option<f64>,
    pub total_sentences: f64,
    pub avg_sentences_per_paragraph: f64,
    pub self_bleu: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        None
    } else {
        Some(collected.iter().sum::<f64>() / collected.len() as f64)
    }
}

pub fn mean_report(rows: &[EvalRow]) -> ReportMeans {
    let reports = || rows.iter().map(|r| &r.report);
    ReportMeans {
        entries: rows.len(),
        summary_dc: mean(reports().map(|r| r.summary_dc)).unwrap_or(0.0),
        summary_fairness: mean(reports().filter_map(|r| r.summary_fairness)),
        summary_faithfulness: mean(reports().filter_map(|r| r.summary_faithfulness)),
        paragraph_dc: mean(reports().map(|r| r.paragraph_dc)).unwrap_or(0.0),
        paragraph_fairness: mean(reports().filter_map(|r| r.paragraph_fairness)),
        paragraph_faithfulness: mean(reports().filter_map(|r| r.paragraph_faithfulness)),
        citation_accuracy: mean(reports().filter_map(|r| r.citation_accuracy)),
        total_sentences: mean(reports().map(|r| r.total_sentences as f64)).unwrap_or(0.0),
        avg_sentences_per_paragraph: mean(reports().map(|r| r.avg_sentences_per_paragraph))
            .unwrap_or(0.0),
        self_bleu: mean(reports().filter_map(|r| r.self_bleu)),
    }
}

/// Canonical JSON report: per-entry rows plus the mean block.
pub fn write_report_json(rows: &[EvalRow]) -> String {
    #[derive(Serialize)]
    struct Report<'a> {
        entries: &'a [EvalRow],
        mean: ReportMeans,
    }
    let mut out = serde_json::to_string_pretty(&Report {
        entries: rows,
        mean: mean_report(rows),
    })
    .expect("report serializes");
    out.push('\n');
    out
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV report: one row per entry plus a final mean row.
pub fn write_report_csv(rows: &[EvalRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "entry",
            "query",
            "summary_dc",
            "summary_fair",
            "summary_faithful",
            "paragraph_dc",
            "paragraph_fair",
            "paragraph_faithful",
            "cite_acc",
            "all_sents",
            "avg_sents",
            "self_bleu",
        ])
        .expect("csv header");
    for row in rows {
        let r = &row.report;
        writer
            .write_record([
                row.entry_index.to_string(),
                row.query.clone(),
                r.summary_dc.to_string(),
                fmt_opt(r.summary_fairness),
                fmt_opt(r.summary_faithfulness),
                r.paragraph_dc.to_string(),
                fmt_opt(r.paragraph_fairness),
                fmt_opt(r.paragraph_faithfulness),
                fmt_opt(r.citation_accuracy),
                r.total_sentences.to_string(),
                r.avg_sentences_per_paragraph.to_string(),
                fmt_opt(r.self_bleu),
            ])
            .expect("csv row");
    }
    let m = mean_report(rows);
    writer
        .write_record([
            "mean".to_string(),
            String::new(),
            m.summary_dc.to_string(),
            fmt_opt(m.summary_fairness),
            fmt_opt(m.summary_faithfulness),
            m.paragraph_dc.to_string(),
            fmt_opt(m.paragraph_fairness),
            fmt_opt(m.paragraph_faithfulness),
            fmt_opt(m.citation_accuracy),
            m.total_sentences.to_string(),
            m.avg_sentences_per_paragraph.to_string(),
            fmt_opt(m.self_bleu),
        ])
        .expect("csv mean row");
    String::from_utf8(writer.into_inner().expect("csv buffer")).expect("csv is utf-8")
}
