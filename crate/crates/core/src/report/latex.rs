//! LaTeX tabular fragments for the global results and the per-feature breakdown.
//!
//! With `percent` set, the weighted errors and the xGEWFI total are shown
//! multiplied by 100; importances and KS errors stay in raw units.

use std::path::Path;

use crate::error::Result;
use crate::metric::{FeatureScore, GlobalScores};

fn display_weighted(v: f64, percent: bool) -> f64 {
    if percent {
        v * 100.0
    } else {
        v
    }
}

pub fn results_table(globals: &GlobalScores, percent: bool) -> String {
    format!(
        concat!(
            "\\begin{{tabular}}{{l|r}}%\n",
            "Metrics&Values\\\\%\n",
            "\\hline%\n",
            "\\textit{{xGEWFI}} mean error&{:.2}\\\\%\n",
            "KS mean error&{:.2}\\\\%\n",
            "\\end{{tabular}}%\n"
        ),
        display_weighted(globals.xgewfi, percent),
        globals.ks_global
    )
}

pub fn explain_table(scores: &[FeatureScore], percent: bool) -> String {
    let mut out = String::from(concat!(
        "\\begin{tabular}{l|r|r|r}%\n",
        "Features&Imp.&KS error&\\textit{xGEWFI} error\\\\%\n",
        "\\hline%\n"
    ));
    for s in scores {
        out.push_str(&format!(
            "Feature {}&{:.2}&{:.2}&{:.2}\\\\%\n",
            s.feature + 1,
            s.importance,
            s.ks_error,
            display_weighted(s.weighted_error, percent)
        ));
    }
    out.push_str("\\end{tabular}%\n");
    out
}

pub fn latex_tables(
    scores: &[FeatureScore],
    globals: &GlobalScores,
    percent: bool,
    results_path: impl AsRef<Path>,
    explain_path: impl AsRef<Path>,
) -> Result<()> {
    std::fs::write(results_path, results_table(globals, percent))?;
    std::fs::write(explain_path, explain_table(scores, percent))?;
    Ok(())
}
