//! Static SVG maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::embedding::MapPoint;
use crate::error::{Error, Result};
use crate::experiments::{StatisticsRow, STATISTIC_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Palette {
    /// Lightness ramp of one hue, light for the minimum and dark for the maximum.
    Continuous,
    /// One fixed color per distinct value.
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    /// A statistic column, or `culture`.
    pub color_by: String,
    pub palette: Palette,
    pub point_radius: f64,
    pub width: f64,
    pub height: f64,
    pub legend: bool,
    pub title: Option<String>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            color_by: "culture".into(),
            palette: Palette::Categorical,
            point_radius: 4.0,
            width: 800.0,
            height: 600.0,
            legend: true,
            title: None,
        }
    }
}

impl RenderConfig {
    /// Colors by `color_by` with the palette that suits it.
    pub fn colored_by(color_by: &str) -> Self {
        let palette = if color_by == "culture" {
            Palette::Categorical
        } else {
            Palette::Continuous
        };
        RenderConfig {
            color_by: color_by.to_string(),
            palette,
            ..RenderConfig::default()
        }
    }
}

const CATEGORY_COLORS: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];
const MISSING_COLOR: &str = "#d0d0d0";
const HUE: u32 = 215;
const LIGHT: f64 = 88.0;
const DARK: f64 = 22.0;
const LEGEND_WIDTH: f64 = 170.0;
const MARGIN: f64 = 20.0;

fn ramp(t: f64) -> String {
    let lightness = LIGHT + (DARK - LIGHT) * t.clamp(0.0, 1.0);
    format!("hsl({HUE},65%,{lightness:.1}%)")
}

pub fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => {}
            c => out.push(c),
        }
    }
    out
}

/// Copies each row's statistics onto the point with the same label and returns
/// the culture of every label. The two label sets must agree.
pub fn attach_statistics(
    points: &mut [MapPoint],
    rows: &[StatisticsRow],
) -> Result<BTreeMap<String, String>> {
    let by_label: BTreeMap<&str, &StatisticsRow> =
        rows.iter().map(|r| (r.label.as_str(), r)).collect();
    let point_labels: BTreeSet<&str> = points.iter().map(|p| p.label.as_str()).collect();
    if let Some(missing) = point_labels.iter().find(|l| !by_label.contains_key(*l)) {
        return Err(Error::SizeMismatch(format!(
            "no statistics for `{missing}`"
        )));
    }
    if let Some(extra) = by_label.keys().find(|l| !point_labels.contains(*l)) {
        return Err(Error::SizeMismatch(format!(
            "statistics for unknown label `{extra}`"
        )));
    }
    let mut cultures = BTreeMap::new();
    for point in points.iter_mut() {
        let row = by_label[point.label.as_str()];
        for name in STATISTIC_NAMES {
            if let Some(v) = row.value(name) {
                point.stats.insert(name.to_string(), v);
            }
        }
        cultures.insert(point.label.clone(), row.culture.clone());
    }
    Ok(cultures)
}

enum Coloring {
    Ramp { min: f64, max: f64 },
    Categories(Vec<String>),
}

/// Value of the coloring column for `point`, as text for categories.
fn category(
    point: &MapPoint,
    cultures: &BTreeMap<String, String>,
    color_by: &str,
) -> Option<String> {
    if color_by == "culture" {
        cultures.get(&point.label).cloned()
    } else {
        point.stats.get(color_by).map(|v| format!("{v}"))
    }
}

pub fn render_svg(
    points: &[MapPoint],
    cultures: &BTreeMap<String, String>,
    cfg: &RenderConfig,
) -> Result<String> {
    if !(cfg.width > 0.0 && cfg.height > 0.0 && cfg.point_radius > 0.0) {
        return Err(Error::InvalidParameter(
            "canvas size and point radius must be positive".into(),
        ));
    }
    let numeric = cfg.color_by != "culture";
    let known = if numeric {
        points.iter().any(|p| p.stats.contains_key(&cfg.color_by))
    } else {
        points.iter().any(|p| cultures.contains_key(&p.label))
    };
    if !known && !points.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "unknown statistic `{}`",
            cfg.color_by
        )));
    }
    let coloring = match (cfg.palette, numeric) {
        (Palette::Continuous, false) => {
            return Err(Error::InvalidParameter(
                "culture needs the categorical palette".into(),
            ))
        }
        (Palette::Continuous, true) => {
            let values = points
                .iter()
                .filter_map(|p| p.stats.get(&cfg.color_by).copied());
            let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            Coloring::Ramp { min, max }
        }
        (Palette::Categorical, _) => {
            let set: BTreeSet<String> = points
                .iter()
                .filter_map(|p| category(p, cultures, &cfg.color_by))
                .collect();
            Coloring::Categories(set.into_iter().collect())
        }
    };
    let color_of = |p: &MapPoint| -> String {
        match &coloring {
            Coloring::Ramp { min, max } => match p.stats.get(&cfg.color_by) {
                Some(v) if max > min => ramp((v - min) / (max - min)),
                Some(_) => ramp(0.5),
                None => MISSING_COLOR.to_string(),
            },
            Coloring::Categories(names) => category(p, cultures, &cfg.color_by)
                .and_then(|c| names.iter().position(|n| *n == c))
                .map(|i| CATEGORY_COLORS[i % CATEGORY_COLORS.len()].to_string())
                .unwrap_or_else(|| MISSING_COLOR.to_string()),
        }
    };

    let legend_width = if cfg.legend { LEGEND_WIDTH } else { 0.0 };
    let width = cfg.width + legend_width;
    let top = if cfg.title.is_some() {
        MARGIN + 20.0
    } else {
        MARGIN
    };
    let plot_w = (cfg.width - 2.0 * MARGIN).max(1.0);
    let plot_h = (cfg.height - top - MARGIN).max(1.0);

    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0);
    let scale = if span > 0.0 && span.is_finite() {
        (plot_w / (x1 - x0).max(f64::MIN_POSITIVE)).min(plot_h / (y1 - y0).max(f64::MIN_POSITIVE))
    } else {
        0.0
    };
    let cx = MARGIN + plot_w / 2.0;
    let cy = top + plot_h / 2.0;
    let (mx, my) = if points.is_empty() {
        (0.0, 0.0)
    } else {
        ((x0 + x1) / 2.0, (y0 + y1) / 2.0)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{h}" viewBox="0 0 {width} {h}">"#,
        h = cfg.height
    );
    let _ = writeln!(
        svg,
        r##"<rect width="100%" height="100%" fill="#ffffff"/>"##
    );
    if let Some(title) = &cfg.title {
        let _ = writeln!(
            svg,
            r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="16">{}</text>"#,
            MARGIN + 8.0,
            escape_xml(title)
        );
    }
    let _ = writeln!(svg, r#"<g class="points">"#);
    for p in points {
        // map y grows upward, SVG y downward
        let sx = cx + (p.x - mx) * scale;
        let sy = cy - (p.y - my) * scale;
        let _ = writeln!(
            svg,
            r##"<circle class="point" cx="{sx:.2}" cy="{sy:.2}" r="{r}" fill="{fill}" stroke="#333333" stroke-width="0.3"><title>{label}</title></circle>"##,
            r = cfg.point_radius,
            fill = color_of(p),
            label = escape_xml(&p.label),
        );
    }
    let _ = writeln!(svg, "</g>");

    if cfg.legend {
        let lx = cfg.width + 10.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{lx}" y="{}">{}</text>"#,
            top + 4.0,
            escape_xml(&cfg.color_by)
        );
        match &coloring {
            Coloring::Ramp { min, max } => {
                let _ = writeln!(
                    svg,
                    r#"<defs><linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0"><stop offset="0" stop-color="{}"/><stop offset="1" stop-color="{}"/></linearGradient></defs>"#,
                    ramp(0.0),
                    ramp(1.0)
                );
                let bar_top = top + 16.0;
                let bar_h = (plot_h - 20.0).clamp(20.0, 200.0);
                let _ = writeln!(
                    svg,
                    r##"<rect x="{lx}" y="{bar_top}" width="18" height="{bar_h}" fill="url(#ramp)" stroke="#333333" stroke-width="0.5"/>"##
                );
                let (lo, hi) = if min.is_finite() {
                    (*min, *max)
                } else {
                    (f64::NAN, f64::NAN)
                };
                let _ = writeln!(
                    svg,
                    r#"<text class="legend-max" x="{}" y="{}">max {}</text>"#,
                    lx + 24.0,
                    bar_top + 10.0,
                    format_value(hi)
                );
                let _ = writeln!(
                    svg,
                    r#"<text class="legend-min" x="{}" y="{}">min {}</text>"#,
                    lx + 24.0,
                    bar_top + bar_h,
                    format_value(lo)
                );
            }
            Coloring::Categories(names) => {
                for (i, name) in names.iter().enumerate() {
                    let y = top + 22.0 + 18.0 * i as f64;
                    let _ = writeln!(
                        svg,
                        r#"<circle class="legend-swatch" cx="{}" cy="{}" r="5" fill="{}"/><text x="{}" y="{}">{}</text>"#,
                        lx + 6.0,
                        y - 4.0,
                        CATEGORY_COLORS[i % CATEGORY_COLORS.len()],
                        lx + 16.0,
                        y,
                        escape_xml(name)
                    );
                }
            }
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "n/a".into()
    } else if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.3e}")
    } else {
        format!("{:.4}", v)
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}
