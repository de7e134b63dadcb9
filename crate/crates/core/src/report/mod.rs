//! Explainability artifacts: SVG charts, LaTeX tables and the JSON report.

pub mod json;
pub mod latex;
pub mod svg;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use json::{json_report, Report};
pub use latex::latex_tables;
pub use svg::{boxplot_svg, combined_chart_svg, histogram_svg, HistogramSpec};

/// Every file written for one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub json_path: PathBuf,
    pub latex_results_paths: Vec<PathBuf>,
    pub latex_explain_paths: Vec<PathBuf>,
    pub svg_paths: Vec<PathBuf>,
}

impl ReportBundle {
    pub fn all_paths(&self) -> impl Iterator<Item = &PathBuf> {
        std::iter::once(&self.json_path)
            .chain(&self.latex_results_paths)
            .chain(&self.latex_explain_paths)
            .chain(&self.svg_paths)
    }
}
