//! Human-readable and JSON renderings of statistics and evaluation reports.
//! Percentages are rounded half-up to one decimal here and nowhere else.

use std::fmt::Write as _;

use serde_json::{json, Value};
use uner_core::eval::{EvalReport, TagMetrics};
use uner_core::stats::{Coarse, CorpusStats};

/// Half-up rounding to one decimal. The small bias absorbs binary
/// representation error, so 12.25 rounds to 12.3.
pub fn round1(x: f64) -> f64 {
    ((x * 10.0) + 0.5 + 1e-9).floor() / 10.0
}

pub fn pct(x: f64) -> String {
    format!("{:.1}", round1(x))
}

pub fn stats_text(stats: &CorpusStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "total_tokens\t{}", stats.total_tokens);
    let _ = writeln!(out, "non_entity_tokens\t{}", stats.non_entity_tokens);
    let _ = writeln!(out, "entity_tokens\t{}", stats.entity_tokens);
    let _ = writeln!(out, "entity_count\t{}", stats.entity_count);
    let _ = writeln!(out, "distinct_entity_count\t{}", stats.distinct_entity_count);
    out.push_str("\n# coarse class\tcount\tshare %\n");
    for c in Coarse::ALL {
        let b = stats.coarse_counts.get(c);
        let _ = writeln!(out, "{}\t{}\t{}", c.name(), b.count, pct(100.0 * b.share));
    }
    out.push_str("\n# tag\tcount\n");
    for (tag, n) in stats.per_tag_sorted() {
        let _ = writeln!(out, "{tag}\t{n}");
    }
    out
}

pub fn stats_json(stats: &CorpusStats) -> Value {
    let coarse: serde_json::Map<String, Value> = Coarse::ALL
        .iter()
        .map(|c| {
            let b = stats.coarse_counts.get(*c);
            (c.name().to_owned(), json!({"count": b.count, "share": b.share}))
        })
        .collect();
    let per_tag: Vec<Value> = stats
        .per_tag_sorted()
        .into_iter()
        .map(|(t, n)| json!({"tag": t, "count": n}))
        .collect();
    json!({
        "total_tokens": stats.total_tokens,
        "non_entity_tokens": stats.non_entity_tokens,
        "entity_tokens": stats.entity_tokens,
        "entity_count": stats.entity_count,
        "distinct_entity_count": stats.distinct_entity_count,
        "coarse_counts": coarse,
        "per_tag_counts": per_tag,
    })
}

fn metrics_row(out: &mut String, tag: &str, m: &TagMetrics, note: &str) {
    let _ = writeln!(
        out,
        "{tag}\t{}\t{}\t{}\t{}{note}",
        pct(m.precision),
        pct(m.recall),
        pct(m.f1),
        m.support
    );
}

/// One row per tag, then `O` (when asked for) and the macro line.
pub fn eval_text(report: &EvalReport, include_outside: bool) -> String {
    let mut out = String::new();
    if let Some(d) = report.collapse_depth {
        let _ = writeln!(out, "# labels collapsed to {d} segment(s)");
    }
    out.push_str("tag\tprecision\trecall\tf1\tsupport\n");
    for (tag, m) in &report.per_tag {
        let note = if report.counted_tags.contains(tag) { "" } else { "\t(excluded: all zero)" };
        metrics_row(&mut out, tag, m, note);
    }
    if include_outside {
        metrics_row(&mut out, "O", &report.outside, "\t(not in macro)");
    }
    let m = &report.macro_avg;
    let _ = writeln!(
        out,
        "macro\t{}\t{}\t{}\t{} tags",
        pct(m.precision),
        pct(m.recall),
        pct(m.f1),
        report.counted_tags.len()
    );
    out
}

fn metrics_json(m: &TagMetrics) -> Value {
    json!({
        "precision": round1(m.precision),
        "recall": round1(m.recall),
        "f1": round1(m.f1),
        "support": m.support,
    })
}

pub fn eval_json(report: &EvalReport, include_outside: bool) -> Value {
    let per_tag: serde_json::Map<String, Value> = report
        .per_tag
        .iter()
        .map(|(t, m)| (t.clone(), metrics_json(m)))
        .collect();
    let mut v = json!({
        "collapse_depth": report.collapse_depth,
        "token_count": report.token_count,
        "per_tag": per_tag,
        "macro": {
            "precision": round1(report.macro_avg.precision),
            "recall": round1(report.macro_avg.recall),
            "f1": round1(report.macro_avg.f1),
        },
        "counted_tags": report.counted_tags,
    });
    if include_outside {
        v["outside"] = metrics_json(&report.outside);
    }
    v
}
