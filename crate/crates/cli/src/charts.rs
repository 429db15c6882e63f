//! Static SVG figures from exported metric tables.
//!
//! Rendering is a pure function of the input table (plus the threshold for
//! the sweep marker): no timestamps, no randomness, fixed float formatting.
//! Identical input therefore yields byte-identical SVG, which is what lets
//! the pipeline reproducibility check compare figures directly.

use clap::ValueEnum;

use readmit_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChartKind {
    Roc,
    Prc,
    Calibration,
    Importance,
    Sweep,
    #[value(name = "fairness_bars")]
    FairnessBars,
}

impl ChartKind {
    pub fn name(self) -> &'static str {
        match self {
            ChartKind::Roc => "roc",
            ChartKind::Prc => "prc",
            ChartKind::Calibration => "calibration",
            ChartKind::Importance => "importance",
            ChartKind::Sweep => "sweep",
            ChartKind::FairnessBars => "fairness_bars",
        }
    }

    pub fn expected_columns(self) -> &'static [&'static str] {
        match self {
            ChartKind::Roc => &["threshold", "fpr", "tpr"],
            ChartKind::Prc => &["threshold", "recall", "precision"],
            ChartKind::Calibration => &["lo", "hi", "count", "mean_score", "observed_rate"],
            ChartKind::Importance => &["feature", "mean_abs_phi", "direction"],
            ChartKind::Sweep => {
                &["threshold", "precision", "recall", "f1", "tp", "fp", "tn", "fn"]
            }
            ChartKind::FairnessBars => {
                &["dimension", "group", "n", "positives", "evaluable", "auc", "fnr", "ppv"]
            }
        }
    }
}

struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn parse_table(kind: ChartKind, text: &str) -> Result<Table> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid_input(format!("{} table is empty", kind.name())))?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let expected = kind.expected_columns();
    if columns != expected {
        return Err(Error::invalid_input(format!(
            "{} chart expects columns {}; found {}",
            kind.name(),
            expected.join(","),
            columns.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (number, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        if cells.len() != columns.len() {
            return Err(Error::invalid_input(format!(
                "{} table row {}: expected {} cells, found {}",
                kind.name(),
                number + 2,
                columns.len(),
                cells.len()
            )));
        }
        rows.push(cells);
    }
    if rows.is_empty() {
        return Err(Error::invalid_input(format!("{} table has no data rows", kind.name())));
    }
    Ok(Table { columns, rows })
}

impl Table {
    fn column(&self, name: &str) -> usize {
        self.columns.iter().position(|c| c == name).expect("column checked at parse")
    }

    /// Numeric cell; empty cells are None (undefined metric).
    fn number(&self, row: usize, name: &str) -> Result<Option<f64>> {
        let cell = &self.rows[row][self.column(name)];
        if cell.is_empty() {
            return Ok(None);
        }
        cell.parse().map(Some).map_err(|_| {
            Error::invalid_input(format!("row {}: cannot parse '{name}' value {cell:?}", row + 2))
        })
    }

    fn text(&self, row: usize, name: &str) -> &str {
        &self.rows[row][self.column(name)]
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;

const SERIES_BLUE: &str = "#1f77b4";
const SERIES_GREEN: &str = "#2ca02c";
const SERIES_ORANGE: &str = "#ff7f0e";
const SERIES_RED: &str = "#d62728";
const SERIES_GRAY: &str = "#7f7f7f";

/// Pixel bounds of the plot area inside the canvas.
struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn standard() -> Frame {
        Frame { left: 70.0, right: 690.0, top: 50.0, bottom: 420.0 }
    }

    fn x(&self, v: f64, lo: f64, hi: f64) -> f64 {
        self.left + (v - lo) / (hi - lo) * (self.right - self.left)
    }

    fn y(&self, v: f64, lo: f64, hi: f64) -> f64 {
        self.bottom - (v - lo) / (hi - lo) * (self.bottom - self.top)
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

struct Svg(String);

impl Svg {
    fn new() -> Svg {
        let mut s = String::with_capacity(8192);
        s.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
        ));
        s.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        Svg(s)
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dashed: bool) {
        let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        self.0.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" \
             stroke-width=\"1.5\"{dash}/>\n",
            px(x1),
            px(y1),
            px(x2),
            px(y2)
        ));
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, dashed: bool) {
        if points.is_empty() {
            return;
        }
        let coords: Vec<String> =
            points.iter().map(|(x, y)| format!("{},{}", px(*x), px(*y))).collect();
        let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        self.0.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"2\"{dash} \
             points=\"{}\"/>\n",
            coords.join(" ")
        ));
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        self.0.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{r}\" fill=\"{fill}\"/>\n",
            px(x),
            px(y)
        ));
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        self.0.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"/>\n",
            px(x),
            px(y),
            px(w),
            px(h)
        ));
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: u32, content: &str, extra: &str) {
        self.0.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-size=\"{size}\"{extra}>{}</text>\n",
            px(x),
            px(y),
            escape(content)
        ));
    }

    fn finish(mut self) -> String {
        self.0.push_str("</svg>\n");
        self.0
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Axes, unit ticks at 0.25 steps, axis titles, and chart title.
fn unit_frame(svg: &mut Svg, frame: &Frame, title: &str, x_label: &str, y_label: &str) {
    svg.text(WIDTH / 2.0, 28.0, "middle", 16, title, "");
    svg.line(frame.left, frame.bottom, frame.right, frame.bottom, "#333333", false);
    svg.line(frame.left, frame.top, frame.left, frame.bottom, "#333333", false);
    for i in 0..=4 {
        let v = i as f64 * 0.25;
        let x = frame.x(v, 0.0, 1.0);
        let y = frame.y(v, 0.0, 1.0);
        svg.line(x, frame.bottom, x, frame.bottom + 5.0, "#333333", false);
        svg.text(x, frame.bottom + 20.0, "middle", 11, &format!("{v}"), "");
        svg.line(frame.left - 5.0, y, frame.left, y, "#333333", false);
        svg.text(frame.left - 9.0, y + 4.0, "end", 11, &format!("{v}"), "");
    }
    svg.text((frame.left + frame.right) / 2.0, HEIGHT - 14.0, "middle", 13, x_label, "");
    svg.text(
        18.0,
        (frame.top + frame.bottom) / 2.0,
        "middle",
        13,
        y_label,
        &format!(
            " transform=\"rotate(-90 {} {})\"",
            px(18.0),
            px((frame.top + frame.bottom) / 2.0)
        ),
    );
}

fn legend(svg: &mut Svg, frame: &Frame, entries: &[(&str, &str, bool)]) {
    let x = frame.right - 150.0;
    let mut y = frame.top + 14.0;
    for (label, color, dashed) in entries {
        svg.line(x, y - 4.0, x + 24.0, y - 4.0, color, *dashed);
        svg.text(x + 30.0, y, "start", 12, label, "");
        y += 18.0;
    }
}

pub fn render_chart(kind: ChartKind, data: &str, threshold: f64) -> Result<String> {
    let table = parse_table(kind, data)?;
    match kind {
        ChartKind::Roc => render_roc(&table),
        ChartKind::Prc => render_prc(&table),
        ChartKind::Calibration => render_calibration(&table),
        ChartKind::Importance => render_importance(&table),
        ChartKind::Sweep => render_sweep(&table, threshold),
        ChartKind::FairnessBars => render_fairness_bars(&table),
    }
}

fn render_roc(table: &Table) -> Result<String> {
    let frame = Frame::standard();
    let mut svg = Svg::new();
    unit_frame(&mut svg, &frame, "ROC curve", "false positive rate", "true positive rate");
    svg.line(
        frame.x(0.0, 0.0, 1.0),
        frame.y(0.0, 0.0, 1.0),
        frame.x(1.0, 0.0, 1.0),
        frame.y(1.0, 0.0, 1.0),
        SERIES_GRAY,
        true,
    );
    let mut points = Vec::with_capacity(table.rows.len());
    for row in 0..table.rows.len() {
        let fpr = required(table.number(row, "fpr")?, row, "fpr")?;
        let tpr = required(table.number(row, "tpr")?, row, "tpr")?;
        points.push((frame.x(fpr, 0.0, 1.0), frame.y(tpr, 0.0, 1.0)));
    }
    svg.polyline(&points, SERIES_BLUE, false);
    legend(&mut svg, &frame, &[("model", SERIES_BLUE, false), ("chance", SERIES_GRAY, true)]);
    Ok(svg.finish())
}

fn render_prc(table: &Table) -> Result<String> {
    let frame = Frame::standard();
    let mut svg = Svg::new();
    unit_frame(&mut svg, &frame, "Precision-recall curve", "recall", "precision");
    let mut points = Vec::with_capacity(table.rows.len());
    for row in 0..table.rows.len() {
        let recall = required(table.number(row, "recall")?, row, "recall")?;
        let precision = required(table.number(row, "precision")?, row, "precision")?;
        points.push((frame.x(recall, 0.0, 1.0), frame.y(precision, 0.0, 1.0)));
    }
    svg.polyline(&points, SERIES_RED, false);
    legend(&mut svg, &frame, &[("model", SERIES_RED, false)]);
    Ok(svg.finish())
}

fn render_calibration(table: &Table) -> Result<String> {
    let frame = Frame::standard();
    let mut svg = Svg::new();
    unit_frame(
        &mut svg,
        &frame,
        "Calibration",
        "mean predicted probability",
        "observed readmission rate",
    );
    svg.line(
        frame.x(0.0, 0.0, 1.0),
        frame.y(0.0, 0.0, 1.0),
        frame.x(1.0, 0.0, 1.0),
        frame.y(1.0, 0.0, 1.0),
        SERIES_GRAY,
        true,
    );
    // Empty bins carry no estimate and are skipped, not drawn at zero.
    let mut points = Vec::new();
    for row in 0..table.rows.len() {
        let (Some(mean), Some(observed)) =
            (table.number(row, "mean_score")?, table.number(row, "observed_rate")?)
        else {
            continue;
        };
        points.push((frame.x(mean, 0.0, 1.0), frame.y(observed, 0.0, 1.0)));
    }
    svg.polyline(&points, SERIES_GREEN, false);
    for (x, y) in &points {
        svg.circle(*x, *y, 3.5, SERIES_GREEN);
    }
    legend(&mut svg, &frame, &[("model", SERIES_GREEN, false), ("perfect", SERIES_GRAY, true)]);
    Ok(svg.finish())
}

fn render_importance(table: &Table) -> Result<String> {
    // Wider left margin: feature names are the y axis.
    let frame = Frame { left: 210.0, right: 690.0, top: 50.0, bottom: 430.0 };
    let mut svg = Svg::new();
    svg.text(WIDTH / 2.0, 28.0, "middle", 16, "Global feature importance", "");
    svg.text((frame.left + frame.right) / 2.0, HEIGHT - 14.0, "middle", 13, "mean |phi|", "");

    let mut max_phi = 0.0_f64;
    for row in 0..table.rows.len() {
        max_phi = max_phi.max(required(table.number(row, "mean_abs_phi")?, row, "mean_abs_phi")?);
    }
    if max_phi <= 0.0 {
        max_phi = 1.0;
    }
    let n = table.rows.len() as f64;
    let slot = (frame.bottom - frame.top) / n;
    let bar_h = (slot * 0.7).min(18.0);
    for row in 0..table.rows.len() {
        let phi = required(table.number(row, "mean_abs_phi")?, row, "mean_abs_phi")?;
        let color = match table.text(row, "direction") {
            "increases" => SERIES_RED,
            "decreases" => SERIES_BLUE,
            _ => SERIES_GRAY,
        };
        let y = frame.top + row as f64 * slot + (slot - bar_h) / 2.0;
        let w = phi / max_phi * (frame.right - frame.left);
        svg.rect(frame.left, y, w, bar_h, color);
        svg.text(frame.left - 8.0, y + bar_h - 3.0, "end", 11, table.text(row, "feature"), "");
        svg.text(frame.left + w + 6.0, y + bar_h - 3.0, "start", 10, &format!("{phi:.4}"), "");
    }
    svg.line(frame.left, frame.top, frame.left, frame.bottom, "#333333", false);
    legend(
        &mut svg,
        &frame,
        &[
            ("raises risk", SERIES_RED, false),
            ("lowers risk", SERIES_BLUE, false),
            ("varies", SERIES_GRAY, false),
        ],
    );
    Ok(svg.finish())
}

fn render_sweep(table: &Table, threshold: f64) -> Result<String> {
    let frame = Frame::standard();
    let mut svg = Svg::new();
    unit_frame(&mut svg, &frame, "Threshold sweep", "decision threshold", "metric value");

    let series: [(&str, &str); 3] =
        [("precision", SERIES_BLUE), ("recall", SERIES_GREEN), ("f1", SERIES_ORANGE)];
    for (column, color) in series {
        // Undefined values (empty cells) break the polyline rather than
        // plotting as zero.
        let mut segment: Vec<(f64, f64)> = Vec::new();
        for row in 0..table.rows.len() {
            let t = required(table.number(row, "threshold")?, row, "threshold")?;
            match table.number(row, column)? {
                Some(v) => segment.push((frame.x(t, 0.0, 1.0), frame.y(v, 0.0, 1.0))),
                None => {
                    svg.polyline(&segment, color, false);
                    segment.clear();
                }
            }
        }
        svg.polyline(&segment, color, false);
    }

    let marker_x = frame.x(threshold, 0.0, 1.0);
    svg.line(marker_x, frame.top, marker_x, frame.bottom, "#333333", true);
    svg.text(marker_x + 5.0, frame.top + 14.0, "start", 12, &format!("t = {threshold}"), "");
    legend(
        &mut svg,
        &frame,
        &[
            ("precision", SERIES_BLUE, false),
            ("recall", SERIES_GREEN, false),
            ("f1", SERIES_ORANGE, false),
            ("threshold", "#333333", true),
        ],
    );
    Ok(svg.finish())
}

fn render_fairness_bars(table: &Table) -> Result<String> {
    let frame = Frame { left: 70.0, right: 690.0, top: 50.0, bottom: 360.0 };
    let mut svg = Svg::new();
    svg.text(WIDTH / 2.0, 28.0, "middle", 16, "Subgroup AUC and FNR", "");
    svg.line(frame.left, frame.bottom, frame.right, frame.bottom, "#333333", false);
    svg.line(frame.left, frame.top, frame.left, frame.bottom, "#333333", false);
    for i in 0..=4 {
        let v = i as f64 * 0.25;
        let y = frame.y(v, 0.0, 1.0);
        svg.line(frame.left - 5.0, y, frame.left, y, "#333333", false);
        svg.text(frame.left - 9.0, y + 4.0, "end", 11, &format!("{v}"), "");
    }

    let n = table.rows.len() as f64;
    let slot = (frame.right - frame.left) / n;
    let bar_w = (slot * 0.32).min(16.0);
    for row in 0..table.rows.len() {
        let center = frame.left + (row as f64 + 0.5) * slot;
        // Non-evaluable groups keep their label slot but draw no bars.
        if let Some(auc) = table.number(row, "auc")? {
            let y = frame.y(auc, 0.0, 1.0);
            svg.rect(center - bar_w, y, bar_w, frame.bottom - y, SERIES_BLUE);
        }
        if let Some(fnr) = table.number(row, "fnr")? {
            let y = frame.y(fnr, 0.0, 1.0);
            svg.rect(center, y, bar_w, frame.bottom - y, SERIES_RED);
        }
        let label = format!("{}:{}", table.text(row, "dimension"), table.text(row, "group"));
        svg.text(
            center,
            frame.bottom + 12.0,
            "end",
            10,
            &label,
            &format!(" transform=\"rotate(-40 {} {})\"", px(center), px(frame.bottom + 12.0)),
        );
    }
    legend(&mut svg, &frame, &[("AUC", SERIES_BLUE, false), ("FNR", SERIES_RED, false)]);
    Ok(svg.finish())
}

fn required(value: Option<f64>, row: usize, column: &str) -> Result<f64> {
    value.ok_or_else(|| {
        Error::invalid_input(format!("row {}: column '{column}' must not be empty", row + 2))
    })
}
