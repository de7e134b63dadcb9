//! Hand-written SVG charts: box plots, overlaid histograms and the grouped
//! importance / KS error / weighted error bar chart.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric::FeatureScore;
use crate::outlier::{fences_of_sorted, IqrFences};

const ORIGINAL_COLOR: &str = "#1f77b4";
const GENERATED_COLOR: &str = "#ff7f0e";
const IMPORTANCE_COLOR: &str = "#2ca02c";
const KS_COLOR: &str = "#1f77b4";
const WEIGHTED_COLOR: &str = "#d62728";

/// Regular histogram bins over `[-HIST_RANGE, HIST_RANGE)` standard deviations.
pub const HIST_BINS: usize = 20;
pub const HIST_RANGE: f64 = 4.0;

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Svg {
            body: String::new(),
            width,
            height,
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" {style}/>"#
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#
        );
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle class="outlier" cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" {style}/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-family="sans-serif" font-size="12">{}</text>"#,
            escape(content)
        );
    }

    fn finish(self, title: &str) -> String {
        format!(
            concat!(
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n",
                "<title>{t}</title>\n",
                "<rect x=\"0\" y=\"0\" width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n",
                "{b}</svg>\n"
            ),
            w = self.width,
            h = self.height,
            t = escape(title),
            b = self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Maps `[lo, hi]` onto the pixel interval `[bottom, top]` (y grows downwards).
struct Scale {
    lo: f64,
    hi: f64,
    bottom: f64,
    top: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, bottom: f64, top: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        Scale { lo, hi, bottom, top }
    }

    fn y(&self, v: f64) -> f64 {
        self.bottom - (v - self.lo) / (self.hi - self.lo) * (self.bottom - self.top)
    }
}

fn y_axis(svg: &mut Svg, scale: &Scale, x: f64, ticks: usize) {
    svg.line(x, scale.top, x, scale.bottom, r#"stroke="black""#);
    for i in 0..=ticks {
        let v = scale.lo + (scale.hi - scale.lo) * i as f64 / ticks as f64;
        let y = scale.y(v);
        svg.line(x - 4.0, y, x, y, r#"stroke="black""#);
        svg.text(x - 6.0, y + 4.0, "end", &format!("{v:.2}"));
    }
}

fn write(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)?;
    Ok(())
}

/// Geometry of one box.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSpec {
    pub feature_index: usize,
    pub fences: IqrFences,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Box geometry per feature over observed cells, using the same quantile
/// convention as outlier detection. Whiskers stop at the fences or the data extremes.
pub fn box_specs(ds: &Dataset) -> Result<Vec<BoxSpec>> {
    (0..ds.n_features())
        .map(|f| {
            let mut values = ds.column_view(f)?.present_values;
            if values.is_empty() {
                return Err(Error::EmptyFeature {
                    feature: f,
                    name: ds.feature_names()[f].clone(),
                });
            }
            values.sort_by(f64::total_cmp);
            let fences = fences_of_sorted(&values);
            let whisker_low = values[0].max(fences.lower);
            let whisker_high = values[values.len() - 1].min(fences.upper);
            let outliers = values.iter().copied().filter(|&v| fences.is_outlier(v)).collect();
            Ok(BoxSpec {
                feature_index: f,
                fences,
                whisker_low,
                whisker_high,
                outliers,
            })
        })
        .collect()
}

pub fn render_boxplot(ds: &Dataset) -> Result<String> {
    let specs = box_specs(ds)?;
    let slot = 100.0;
    let (left, top, plot_h) = (70.0, 40.0, 320.0);
    let mut svg = Svg::new(left + slot * specs.len() as f64 + 30.0, top + plot_h + 60.0);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in &specs {
        for v in s.outliers.iter().chain([&s.whisker_low, &s.whisker_high]) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    let scale = Scale::new(lo, hi, top + plot_h, top);
    svg.text(svg.width / 2.0, 20.0, "middle", "Feature distributions");
    y_axis(&mut svg, &scale, left, 5);

    let stroke = r#"stroke="black" stroke-width="1""#;
    for (i, s) in specs.iter().enumerate() {
        let cx = left + slot * (i as f64 + 0.5);
        let half = slot * 0.25;
        let (y1, y3) = (scale.y(s.fences.q1), scale.y(s.fences.q3));
        svg.line(cx, scale.y(s.whisker_low), cx, y1, stroke);
        svg.line(cx, y3, cx, scale.y(s.whisker_high), stroke);
        svg.line(cx - half / 2.0, scale.y(s.whisker_low), cx + half / 2.0, scale.y(s.whisker_low), stroke);
        svg.line(cx - half / 2.0, scale.y(s.whisker_high), cx + half / 2.0, scale.y(s.whisker_high), stroke);
        svg.rect(
            cx - half,
            y3,
            2.0 * half,
            y1 - y3,
            &format!(r#"class="box" fill="{ORIGINAL_COLOR}" fill-opacity="0.4" {stroke}"#),
        );
        let ym = scale.y(s.fences.median);
        svg.line(cx - half, ym, cx + half, ym, r#"class="median" stroke="black" stroke-width="2""#);
        for &v in &s.outliers {
            svg.circle(cx, scale.y(v), 3.0, r#"fill="none" stroke="black""#);
        }
        svg.text(cx, top + plot_h + 20.0, "middle", &ds.feature_names()[s.feature_index]);
    }
    Ok(svg.finish("Box plot of every feature"))
}

pub fn boxplot_svg(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &render_boxplot(ds)?)
}

/// Bin layout: one underflow bin, `HIST_BINS` regular bins, one overflow bin.
/// Edges are in standard deviations of the original sample; the outer edges are infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramSpec {
    pub feature_index: usize,
    pub bin_edges: Vec<f64>,
    pub original_counts: Vec<u64>,
    pub generated_counts: Vec<u64>,
}

fn bin_of(z: f64) -> usize {
    let width = 2.0 * HIST_RANGE / HIST_BINS as f64;
    if z < -HIST_RANGE {
        0
    } else if z >= HIST_RANGE {
        HIST_BINS + 1
    } else {
        1 + (((z + HIST_RANGE) / width).floor() as usize).min(HIST_BINS - 1)
    }
}

/// Standardizes both samples by the original mean and population standard deviation.
pub fn histogram_spec(original: &[f64], generated: &[f64], feature_index: usize) -> Result<HistogramSpec> {
    if original.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = original.len() as f64;
    let mean = original.iter().sum::<f64>() / n;
    let sd = (original.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Err(Error::ZeroVariance {
            feature: feature_index,
        });
    }
    let width = 2.0 * HIST_RANGE / HIST_BINS as f64;
    let mut bin_edges = vec![f64::NEG_INFINITY];
    bin_edges.extend((0..=HIST_BINS).map(|i| -HIST_RANGE + width * i as f64));
    bin_edges.push(f64::INFINITY);
    let count = |values: &[f64]| {
        let mut counts = vec![0u64; HIST_BINS + 2];
        for &v in values {
            counts[bin_of((v - mean) / sd)] += 1;
        }
        counts
    };
    Ok(HistogramSpec {
        feature_index,
        bin_edges,
        original_counts: count(original),
        generated_counts: count(generated),
    })
}

pub fn render_histogram(spec: &HistogramSpec, feature_name: &str) -> String {
    let bins = spec.original_counts.len();
    let (left, top, plot_w, plot_h) = (70.0, 40.0, 600.0, 300.0);
    let mut svg = Svg::new(left + plot_w + 160.0, top + plot_h + 60.0);
    let density = |counts: &[u64]| -> Vec<f64> {
        let total: u64 = counts.iter().sum();
        counts
            .iter()
            .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
            .collect()
    };
    let orig = density(&spec.original_counts);
    let gen = density(&spec.generated_counts);
    let hi = orig.iter().chain(&gen).copied().fold(0.0, f64::max);
    let scale = Scale::new(0.0, if hi > 0.0 { hi } else { 1.0 }, top + plot_h, top);

    svg.text(
        left + plot_w / 2.0,
        20.0,
        "middle",
        &format!("{feature_name}: original vs generated"),
    );
    y_axis(&mut svg, &scale, left, 4);
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, r#"stroke="black""#);
    let bar_w = plot_w / bins as f64;
    for (series, color, class) in [(&orig, ORIGINAL_COLOR, "original"), (&gen, GENERATED_COLOR, "generated")] {
        for (i, &d) in series.iter().enumerate() {
            let y = scale.y(d);
            svg.rect(
                left + bar_w * i as f64,
                y,
                bar_w,
                top + plot_h - y,
                &format!(r#"class="{class}" fill="{color}" fill-opacity="0.5""#),
            );
        }
    }
    for (i, edge) in spec.bin_edges.iter().enumerate().skip(1).take(bins - 1) {
        if (i - 1) % 5 == 0 {
            let x = left + bar_w * i as f64;
            svg.text(x, top + plot_h + 16.0, "middle", &format!("{edge:.1}"));
        }
    }
    svg.text(
        left + plot_w / 2.0,
        top + plot_h + 40.0,
        "middle",
        "Standard deviations of the feature",
    );
    let lx = left + plot_w + 15.0;
    svg.rect(lx, top, 12.0, 12.0, &format!(r#"fill="{ORIGINAL_COLOR}" fill-opacity="0.5""#));
    svg.text(lx + 18.0, top + 10.0, "start", "Original");
    svg.rect(lx, top + 20.0, 12.0, 12.0, &format!(r#"fill="{GENERATED_COLOR}" fill-opacity="0.5""#));
    svg.text(lx + 18.0, top + 30.0, "start", "Generated");
    svg.finish(&format!("Histogram of {feature_name}"))
}

pub fn histogram_svg(
    original: &[f64],
    generated: &[f64],
    feature_index: usize,
    feature_name: &str,
    path: impl AsRef<Path>,
) -> Result<HistogramSpec> {
    let spec = histogram_spec(original, generated, feature_index)?;
    write(path.as_ref(), &render_histogram(&spec, feature_name))?;
    Ok(spec)
}

pub fn render_combined(scores: &[FeatureScore], feature_names: &[String]) -> Result<String> {
    if scores.is_empty() {
        return Err(Error::EmptySample);
    }
    let slot = 120.0;
    let (left, top, plot_h) = (70.0, 40.0, 300.0);
    let plot_w = slot * scores.len() as f64;
    let mut svg = Svg::new(left + plot_w + 170.0, top + plot_h + 60.0);
    let hi = scores
        .iter()
        .flat_map(|s| [s.importance, s.ks_error, s.weighted_error])
        .fold(0.0, f64::max);
    let hi = ((hi * 10.0).ceil() / 10.0).max(0.1);
    let scale = Scale::new(0.0, hi, top + plot_h, top);

    svg.text(left + plot_w / 2.0, 20.0, "middle", "Importance, KS error and weighted error");
    y_axis(&mut svg, &scale, left, 5);
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, r#"stroke="black""#);
    let bar_w = slot / 4.0;
    for (i, s) in scores.iter().enumerate() {
        let x0 = left + slot * i as f64 + bar_w / 2.0;
        for (j, (v, color, class)) in [
            (s.importance, IMPORTANCE_COLOR, "importance"),
            (s.ks_error, KS_COLOR, "ks-error"),
            (s.weighted_error, WEIGHTED_COLOR, "weighted-error"),
        ]
        .into_iter()
        .enumerate()
        {
            let y = scale.y(v);
            svg.rect(
                x0 + bar_w * j as f64,
                y,
                bar_w,
                top + plot_h - y,
                &format!(r#"class="{class}" fill="{color}""#),
            );
        }
        let name = feature_names
            .get(s.feature)
            .cloned()
            .unwrap_or_else(|| format!("feature_{}", s.feature));
        svg.text(left + slot * (i as f64 + 0.5), top + plot_h + 20.0, "middle", &name);
    }
    let lx = left + plot_w + 15.0;
    for (j, (label, color)) in [
        ("Importance", IMPORTANCE_COLOR),
        ("KS error", KS_COLOR),
        ("Weighted error", WEIGHTED_COLOR),
    ]
    .into_iter()
    .enumerate()
    {
        let y = top + 20.0 * j as f64;
        svg.rect(lx, y, 12.0, 12.0, &format!(r#"fill="{color}""#));
        svg.text(lx + 18.0, y + 10.0, "start", label);
    }
    Ok(svg.finish("Feature importance, KS error and weighted error"))
}

pub fn combined_chart_svg(
    scores: &[FeatureScore],
    feature_names: &[String],
    path: impl AsRef<Path>,
) -> Result<()> {
    write(path.as_ref(), &render_combined(scores, feature_names)?)
}
