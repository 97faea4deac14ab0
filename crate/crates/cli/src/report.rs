use serde::Serialize;
use xamr::smatch::ScoreSummary;
use xamr::{Aspect, BreakdownReport, ConsistencyMatrix, MatchResult, Scalar};

/// Percentage with one decimal, as in the report tables.
pub fn pct(x: f64) -> String {
    format!("{:.1}", x * 100.0)
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Left-aligned first column, right-aligned value columns.
pub fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate().take(cols) {
            if i == 0 {
                line.push_str(&format!("{cell:<w$}", w = widths[0]));
            } else {
                line.push_str(&format!("  {cell:>w$}", w = widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let quote = |s: &str| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|c| quote(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
pub struct ScoreReport {
    pub metric: &'static str,
    pub entries: usize,
    #[serde(flatten)]
    pub summary: ScoreSummary,
    pub restarts: usize,
    pub seed: u64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl ScoreReport {
    pub fn new<S: Scalar>(metric: &'static str, entries: usize, r: &MatchResult<S>, tau: Option<f64>) -> Self {
        Self {
            metric,
            entries,
            summary: r.summary(),
            restarts: r.restarts_used,
            seed: r.seed,
            exact: r.exact,
            tau,
        }
    }

    pub fn text(&self) -> String {
        let s = &self.summary;
        format!(
            "Precision: {:.3}\nRecall: {:.3}\nF1: {:.3}\n",
            s.precision, s.recall, s.f1
        )
    }

    pub fn csv(&self) -> String {
        let s = &self.summary;
        csv(
            &["metric", "entries", "precision", "recall", "f1", "matched", "pred_triples", "gold_triples"],
            &[vec![
                self.metric.to_string(),
                self.entries.to_string(),
                s.precision.to_string(),
                s.recall.to_string(),
                s.f1.to_string(),
                s.matched.to_string(),
                s.pred_triples.to_string(),
                s.gold_triples.to_string(),
            ]],
        )
    }
}

/// Rows of (key, label, result) in report order, overall score first.
fn breakdown_rows<S: Scalar>(overall: &'static str, r: &BreakdownReport<S>) -> Vec<(&'static str, &'static str, ScoreSummary)> {
    let mut rows = vec![("smatch", overall, r.smatch.summary())];
    rows.extend(Aspect::ALL.iter().map(|&a| (a.key(), a.label(), r.get(a).summary())));
    rows
}

pub fn breakdown_text<S: Scalar>(overall: &'static str, r: &BreakdownReport<S>) -> String {
    let header: Vec<String> = ["Metric", "P", "R", "F1"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = breakdown_rows(overall, r)
        .into_iter()
        .map(|(_, label, s)| vec![label.to_string(), pct(s.precision), pct(s.recall), pct(s.f1)])
        .collect();
    table(&header, &rows)
}

pub fn breakdown_json<S: Scalar>(r: &BreakdownReport<S>) -> String {
    let mut map = serde_json::Map::new();
    for (key, _, s) in breakdown_rows("", r) {
        map.insert(key.to_string(), serde_json::to_value(s).expect("summary serializes"));
    }
    json(&map)
}

pub fn breakdown_csv<S: Scalar>(r: &BreakdownReport<S>) -> String {
    let rows: Vec<Vec<String>> = breakdown_rows("", r)
        .into_iter()
        .map(|(key, _, s)| {
            vec![
                key.to_string(),
                s.precision.to_string(),
                s.recall.to_string(),
                s.f1.to_string(),
                s.matched.to_string(),
                s.pred_triples.to_string(),
                s.gold_triples.to_string(),
            ]
        })
        .collect();
    csv(
        &["metric", "precision", "recall", "f1", "matched", "pred_triples", "gold_triples"],
        &rows,
    )
}

#[derive(Serialize)]
pub struct PairCell {
    pub x: String,
    pub y: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn pair_cells<S: Scalar>(m: &ConsistencyMatrix<S>) -> Vec<PairCell> {
    m.pairs()
        .map(|(x, y)| {
            let s = m.get(x, y).summary();
            PairCell {
                x: m.languages[x].clone(),
                y: m.languages[y].clone(),
                precision: s.precision,
                recall: s.recall,
                f1: s.f1,
            }
        })
        .collect()
}

pub fn pair_label(x: &str, y: &str) -> String {
    format!("{}-{}", x.to_uppercase(), y.to_uppercase())
}
