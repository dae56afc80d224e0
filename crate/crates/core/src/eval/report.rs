use std::io::{self, Write};

use super::EvalReport;

/// `seat_legroom` → `Seat legroom`.
pub fn pretty_feature(name: &str) -> String {
    let spaced = name.replace('_', " ");
    let mut chars = spaced.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn fmt_auc(a: Option<f64>) -> String {
    a.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"))
}

/// One row per experiment, preceded by `#` comment lines (e.g. parameters).
pub fn write_csv<W: Write>(mut out: W, reports: &[EvalReport], preamble: &[String]) -> io::Result<()> {
    for line in preamble {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "category,experiment,features,f1,auc,train_seconds,n_train,n_test,tree_nodes")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{:.6},{},{:.6},{},{},{}",
            r.spec.category,
            r.spec.display_name(),
            r.spec.features.join(";"),
            r.f1,
            r.auc.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}")),
            r.train_seconds,
            r.n_train,
            r.n_test,
            r.tree_nodes,
        )?;
    }
    Ok(())
}

/// Markdown table grouped by category, with F1 and AUC per experiment.
pub fn write_markdown<W: Write>(mut out: W, reports: &[EvalReport]) -> io::Result<()> {
    let mut current = None;
    for r in reports {
        if current != Some(r.spec.category) {
            if current.is_some() {
                writeln!(out)?;
            }
            current = Some(r.spec.category);
            writeln!(out, "### {}\n", pretty_feature(r.spec.category.as_str()))?;
            writeln!(out, "| Feature | F1 | AUC | Train (s) |")?;
            writeln!(out, "|---|---|---|---|")?;
        }
        writeln!(
            out,
            "| {} | {:.4} | {} | {:.3} |",
            r.spec.display_name(),
            r.f1,
            fmt_auc(r.auc),
            r.train_seconds
        )?;
    }
    Ok(())
}
