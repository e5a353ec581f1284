//! Deterministic SVG figures with a sibling CSV of the plotted data.
//!
//! Output depends only on the inputs: elements are written in data order,
//! numbers use fixed formatting and the palette is constant, so repeated runs
//! produce byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::{contention_balance, Classification, DisaggScope, ZoneColor, ZoneConfig};
use crate::design_space::DesignGrid;
use crate::error::{Error, Result};
use crate::roofline::{ConcurrencyPoint, RooflineCurve};
use crate::topology::{ExpectedTopology, TopologyReport};
use crate::units::{to_gb, to_tb, trim_float};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigureKind {
    Heatmap,
    Roofline,
    Concurrency,
    Zones,
    TopologyTable,
}

impl FigureKind {
    pub fn name(self) -> &'static str {
        match self {
            FigureKind::Heatmap => "heatmap",
            FigureKind::Roofline => "roofline",
            FigureKind::Concurrency => "concurrency",
            FigureKind::Zones => "zones",
            FigureKind::TopologyTable => "topology-table",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub kind: FigureKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// SVG path; the CSV is written next to it with a `.csv` extension.
    pub output: PathBuf,
}

impl FigureSpec {
    pub fn new(kind: FigureKind, title: impl Into<String>, output: impl Into<PathBuf>) -> Self {
        let (x, y) = match kind {
            FigureKind::Heatmap => ("memory nodes (M)", "compute nodes requiring remote memory"),
            FigureKind::Roofline => ("L:R (local bytes per remote byte)", "attainable bandwidth (GB/s)"),
            FigureKind::Concurrency => ("concurrency (outstanding transfers)", "sustained bandwidth (GB/s)"),
            FigureKind::Zones => ("memory footprint (TB)", "L:R (local bytes per remote byte)"),
            FigureKind::TopologyTable => ("", ""),
        };
        Self {
            kind,
            title: title.into(),
            x_label: x.to_string(),
            y_label: y.to_string(),
            output: output.into(),
        }
    }

    pub fn csv_path(&self) -> PathBuf {
        self.output.with_extension("csv")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeatmapQuantity {
    Capacity,
    Bandwidth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcurrencySeries {
    pub label: String,
    pub points: Vec<ConcurrencyPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyRow {
    pub name: String,
    pub report: TopologyReport,
    pub expected: Option<ExpectedTopology>,
}

#[derive(Debug, Clone, Copy)]
pub enum FigureData<'a> {
    Heatmap {
        grid: &'a DesignGrid,
        quantity: HeatmapQuantity,
    },
    Roofline(&'a [RooflineCurve]),
    Concurrency(&'a [ConcurrencySeries]),
    Zones {
        points: &'a [Classification],
        config: &'a ZoneConfig,
    },
    TopologyTable(&'a [TopologyRow]),
}

impl FigureData<'_> {
    pub fn kind(&self) -> FigureKind {
        match self {
            FigureData::Heatmap { .. } => FigureKind::Heatmap,
            FigureData::Roofline(_) => FigureKind::Roofline,
            FigureData::Concurrency(_) => FigureKind::Concurrency,
            FigureData::Zones { .. } => FigureKind::Zones,
            FigureData::TopologyTable(_) => FigureKind::TopologyTable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub svg: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmittedFigure {
    pub svg: PathBuf,
    pub csv: PathBuf,
}

pub fn render(spec: &FigureSpec, data: FigureData<'_>) -> Result<Rendered> {
    if spec.kind != data.kind() {
        return Err(Error::field(
            "figure.kind",
            format!("{} spec given {} data", spec.kind.name(), data.kind().name()),
        ));
    }
    match data {
        FigureData::Heatmap { grid, quantity } => heatmap(spec, grid, quantity),
        FigureData::Roofline(curves) => roofline(spec, curves),
        FigureData::Concurrency(series) => concurrency(spec, series),
        FigureData::Zones { points, config } => zones(spec, points, config),
        FigureData::TopologyTable(rows) => topology_table(spec, rows),
    }
}

pub fn emit_figure(spec: &FigureSpec, data: FigureData<'_>) -> Result<EmittedFigure> {
    let rendered = render(spec, data)?;
    let csv = spec.csv_path();
    write_file(&spec.output, &rendered.svg)?;
    write_file(&csv, &rendered.csv)?;
    Ok(EmittedFigure {
        svg: spec.output.clone(),
        csv,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Three significant digits, trailing zeros removed: 65.536 -> "65.5".
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return trim_float(x, 0);
    }
    let digits = (2 - x.abs().log10().floor() as i32).max(0) as usize;
    trim_float(x, digits)
}

fn num(x: f64) -> String {
    trim_float(x, 6)
}

// ---------------------------------------------------------------------------
// SVG scaffolding

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn zone_fill(z: ZoneColor) -> &'static str {
    match z {
        ZoneColor::Blue => "#4e79a7",
        ZoneColor::Green => "#59a14f",
        ZoneColor::Orange => "#f28e2b",
        ZoneColor::Grey => "#9d9d9d",
        ZoneColor::Red => "#e15759",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Svg {
    out: String,
}

impl Svg {
    fn new(spec: &FigureSpec, width: f64, height: f64) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = num(width),
            h = num(height)
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            num(width / 2.0),
            escape(&spec.title)
        );
        Self { out }
    }

    fn line(&mut self, class: &str, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dash: bool) {
        let _ = writeln!(
            self.out,
            r#"<line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}"{}/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            if dash { r#" stroke-dasharray="4 3""# } else { "" }
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, body: &str) {
        let _ = writeln!(
            self.out,
            r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#,
            num(x),
            num(y),
            escape(body)
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, opacity: f64) {
        let _ = writeln!(
            self.out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" fill-opacity="{}"/>"#,
            num(x),
            num(y),
            num(w),
            num(h),
            num(opacity)
        );
    }

    fn polyline(&mut self, class: &str, pts: &[(f64, f64)], stroke: &str) {
        let mut path = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            if i > 0 {
                path.push(' ');
            }
            let _ = write!(path, "{},{}", num(*x), num(*y));
        }
        let _ = writeln!(
            self.out,
            r#"<polyline class="{class}" points="{path}" fill="none" stroke="{stroke}" stroke-width="2"/>"#
        );
    }

    fn circle(&mut self, class: &str, x: f64, y: f64, fill: &str) {
        let _ = writeln!(
            self.out,
            r#"<circle class="{class}" cx="{}" cy="{}" r="5" fill="{fill}" stroke="black"/>"#,
            num(x),
            num(y)
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Log-log plot area.
struct LogAxes {
    x: (f64, f64),
    y: (f64, f64),
}

impl LogAxes {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            let lo = 10f64.powf(lo.log10().floor());
            let hi = 10f64.powf(hi.log10().ceil());
            (lo, if hi > lo { hi } else { lo * 10.0 })
        };
        Self {
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, x: f64) -> f64 {
        let f = (x.log10() - self.x.0.log10()) / (self.x.1.log10() - self.x.0.log10());
        LEFT + f * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let f = (y.log10() - self.y.0.log10()) / (self.y.1.log10() - self.y.0.log10());
        HEIGHT - BOTTOM - f * (HEIGHT - TOP - BOTTOM)
    }

    fn draw(&self, svg: &mut Svg, spec: &FigureSpec) {
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        svg.line("axis", x0, y0, x1, y0, "black", false);
        svg.line("axis", x0, y0, x0, y1, "black", false);
        let mut d = self.x.0;
        while d <= self.x.1 * 1.0001 {
            let x = self.px(d);
            svg.line("tick", x, y0, x, y0 + 5.0, "black", false);
            svg.text(x, y0 + 18.0, "middle", &sig3(d));
            d *= 10.0;
        }
        let mut d = self.y.0;
        while d <= self.y.1 * 1.0001 {
            let y = self.py(d);
            svg.line("tick", x0 - 5.0, y, x0, y, "black", false);
            svg.text(x0 - 8.0, y + 4.0, "end", &sig3(d));
            d *= 10.0;
        }
        svg.text((x0 + x1) / 2.0, HEIGHT - 18.0, "middle", &spec.x_label);
        let _ = writeln!(
            svg.out,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            num((y0 + y1) / 2.0),
            num((y0 + y1) / 2.0),
            escape(&spec.y_label)
        );
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> Result<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| *v > 0.0 && v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        Ok((lo, hi))
    } else {
        Err(Error::field("figure.data", "no positive values to plot"))
    }
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Model(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Model(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Model(e.to_string()))
}

// ---------------------------------------------------------------------------
// Heat map

fn heat_color(t: f64) -> String {
    // light yellow to dark blue
    let (a, b) = ([255.0, 247.0, 188.0], [8.0, 48.0, 107.0]);
    let c: Vec<u8> = (0..3).map(|i| (a[i] + (b[i] - a[i]) * t).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn heatmap(spec: &FigureSpec, grid: &DesignGrid, quantity: HeatmapQuantity) -> Result<Rendered> {
    let value = |r: usize, c: usize| {
        let p = grid.cell(r, c);
        match quantity {
            HeatmapQuantity::Capacity => to_tb(p.remote_capacity_per_node),
            HeatmapQuantity::Bandwidth => to_gb(p.remote_bandwidth_per_node),
        }
    };
    let rows = grid.demand_fractions.len();
    let cols = grid.memory_nodes.len();
    let (lo, hi) = min_max((0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).map(|(r, c)| value(r, c)))?;
    let span = (hi / lo).ln();

    let mut svg = Svg::new(spec, WIDTH, HEIGHT);
    let cw = (WIDTH - LEFT - RIGHT) / cols as f64;
    let ch = (HEIGHT - TOP - BOTTOM) / rows as f64;
    for r in 0..rows {
        let y = TOP + r as f64 * ch;
        svg.text(LEFT - 8.0, y + ch / 2.0 + 4.0, "end", &format!("{}%", sig3(grid.demand_fractions[r] * 100.0)));
        for c in 0..cols {
            let x = LEFT + c as f64 * cw;
            let v = value(r, c);
            let t = if span > 0.0 { (v / lo).ln() / span } else { 0.5 };
            svg.rect(x, y, cw, ch, &heat_color(t), 1.0);
            let ink = if t > 0.55 { "white" } else { "black" };
            let _ = writeln!(
                svg.out,
                r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{}</text>"#,
                num(x + cw / 2.0),
                num(y + ch / 2.0 + 4.0),
                sig3(v)
            );
        }
    }
    for (c, m) in grid.memory_nodes.iter().enumerate() {
        svg.text(LEFT + (c as f64 + 0.5) * cw, HEIGHT - BOTTOM + 18.0, "middle", &m.to_string());
    }
    svg.text((WIDTH - RIGHT + LEFT) / 2.0, HEIGHT - 18.0, "middle", &spec.x_label);
    let unit = match quantity {
        HeatmapQuantity::Capacity => "TB per node",
        HeatmapQuantity::Bandwidth => "GB/s per node",
    };
    svg.text(WIDTH - RIGHT + 12.0, TOP + 14.0, "start", unit);
    svg.text(
        WIDTH - RIGHT + 12.0,
        TOP + 32.0,
        "start",
        &format!("taper {} ({})", sig3(grid.taper), match grid.taper_mode {
            crate::design_space::TaperMode::Scale => "scale",
            crate::design_space::TaperMode::Cap => "cap",
        }),
    );

    let mut header = vec!["demand_fraction".to_string()];
    header.extend(grid.memory_nodes.iter().map(|m| format!("M={m}")));
    let body = (0..rows)
        .map(|r| {
            let mut row = vec![num(grid.demand_fractions[r])];
            row.extend((0..cols).map(|c| num(value(r, c))));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    Ok(Rendered {
        svg: svg.finish(),
        csv: csv_text(&header, body)?,
    })
}

// ---------------------------------------------------------------------------
// Memory roofline

fn roofline(spec: &FigureSpec, curves: &[RooflineCurve]) -> Result<Rendered> {
    let pts = || curves.iter().flat_map(|c| c.points.iter());
    let axes = LogAxes::new(
        min_max(pts().map(|p| p.lr))?,
        min_max(pts().map(|p| to_gb(p.attainable)))?,
    );
    let mut svg = Svg::new(spec, WIDTH, HEIGHT);
    axes.draw(&mut svg, spec);
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let line: Vec<(f64, f64)> = curve
            .points
            .iter()
            .map(|p| (axes.px(p.lr), axes.py(to_gb(p.attainable))))
            .collect();
        svg.polyline(&format!("roofline {}", curve.scope.name()), &line, color);
        if let Some(top) = curve.points.iter().map(|p| p.attainable).reduce(f64::max) {
            let kx = axes.px(curve.balance);
            let ky = axes.py(to_gb(top));
            if (LEFT..=WIDTH - RIGHT).contains(&kx) {
                svg.line("knee", kx, ky, kx, HEIGHT - BOTTOM, color, true);
                svg.text(kx, ky - 6.0 - 14.0 * i as f64, "middle", &sig3(curve.balance));
            }
        }
        svg.text(
            WIDTH - RIGHT + 12.0,
            TOP + 14.0 + 18.0 * i as f64,
            "start",
            &format!("{} (taper {}, balance {})", curve.scope.name(), sig3(curve.taper), sig3(curve.balance)),
        );
    }
    let rows = curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(move |p| {
                vec![
                    c.scope.name().to_string(),
                    num(c.taper),
                    num(p.lr),
                    num(to_gb(p.attainable)),
                    format!("{:?}", p.limiter).to_lowercase(),
                    num(p.remote_utilization),
                ]
            })
        })
        .collect();
    Ok(Rendered {
        svg: svg.finish(),
        csv: csv_text(&["scope", "taper", "lr", "attainable_gbps", "limiter", "remote_utilization"], rows)?,
    })
}

// ---------------------------------------------------------------------------
// Concurrency roofline

fn concurrency(spec: &FigureSpec, series: &[ConcurrencySeries]) -> Result<Rendered> {
    let pts = || series.iter().flat_map(|s| s.points.iter());
    let axes = LogAxes::new(
        min_max(pts().map(|p| p.concurrency))?,
        min_max(pts().map(|p| to_gb(p.sustained)))?,
    );
    let mut svg = Svg::new(spec, WIDTH, HEIGHT);
    axes.draw(&mut svg, spec);
    let mut caps: Vec<f64> = pts().map(|p| p.link_cap).collect();
    caps.sort_by(f64::total_cmp);
    caps.dedup();
    for cap in caps {
        let y = axes.py(to_gb(cap));
        svg.line("link-cap", LEFT, y, WIDTH - RIGHT, y, "black", true);
        svg.text(WIDTH - RIGHT - 4.0, y - 4.0, "end", &format!("{} GB/s", sig3(to_gb(cap))));
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let line: Vec<(f64, f64)> = s
            .points
            .iter()
            .map(|p| (axes.px(p.concurrency), axes.py(to_gb(p.sustained))))
            .collect();
        svg.polyline("concurrency", &line, color);
        svg.text(WIDTH - RIGHT + 12.0, TOP + 14.0 + 18.0 * i as f64, "start", &s.label);
    }
    let rows = series
        .iter()
        .flat_map(|s| {
            s.points.iter().map(move |p| {
                vec![
                    s.label.clone(),
                    num(p.quanta),
                    num(p.concurrency),
                    num(p.latency * 1e6),
                    num(to_gb(p.sustained)),
                    num(to_gb(p.link_cap)),
                ]
            })
        })
        .collect();
    Ok(Rendered {
        svg: svg.finish(),
        csv: csv_text(
            &["series", "quanta_bytes", "concurrency", "latency_us", "sustained_gbps", "link_cap_gbps"],
            rows,
        )?,
    })
}

// ---------------------------------------------------------------------------
// Zone map

/// Endpoints of the green/orange contention boundary: from the HBM capacity
/// up to one full memory node.
pub fn antidiagonal(cfg: &ZoneConfig) -> Result<[(f64, f64); 2]> {
    let a = cfg.hbm_capacity;
    let b = cfg.memory_node_capacity.max(a);
    Ok([(a, contention_balance(a, cfg)?), (b, contention_balance(b, cfg)?)])
}

fn zones(spec: &FigureSpec, points: &[Classification], cfg: &ZoneConfig) -> Result<Rendered> {
    let roof = cfg.roofline();
    let injection = roof.local_bandwidth / roof.remote_bandwidth;
    let bisection = injection / cfg.taper();
    let diag = antidiagonal(cfg)?;

    let fps = points.iter().map(|c| c.app.footprint).chain([cfg.hbm_capacity, cfg.memory_node_capacity]);
    let (fx0, fx1) = min_max(fps.map(to_tb))?;
    let lrs = points.iter().map(|c| c.app.lr).chain([diag[0].1, bisection, 1.0]);
    let axes = LogAxes::new((fx0, fx1), min_max(lrs)?);

    let mut svg = Svg::new(spec, WIDTH, HEIGHT);
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let hbm_x = axes.px(to_tb(cfg.hbm_capacity));
    svg.rect(x0, y1, hbm_x - x0, y0 - y1, zone_fill(ZoneColor::Blue), 0.25);
    let bis_y = axes.py(bisection).clamp(y1, y0);
    svg.rect(hbm_x, bis_y, x1 - hbm_x, y0 - bis_y, zone_fill(ZoneColor::Grey), 0.25);
    let red_x = if cfg.scope == DisaggScope::Rack {
        let rx = axes.px(to_tb(cfg.rack_capacity())).clamp(x0, x1);
        svg.rect(rx, y1, x1 - rx, y0 - y1, zone_fill(ZoneColor::Red), 0.25);
        rx
    } else {
        x1
    };

    let inj_y = axes.py(injection);
    let (dx0, dy0) = (axes.px(to_tb(diag[0].0)), axes.py(diag[0].1));
    let (dx1, dy1) = (axes.px(to_tb(diag[1].0)), axes.py(diag[1].1));
    let _ = writeln!(
        svg.out,
        r#"<polygon class="zone orange" points="{},{} {},{} {},{} {},{} {},{}" fill="{}" fill-opacity="0.25"/>"#,
        num(dx0),
        num(dy0),
        num(dx1),
        num(dy1),
        num(red_x),
        num(inj_y),
        num(red_x),
        num(y0),
        num(dx0),
        num(y0),
        zone_fill(ZoneColor::Orange)
    );
    svg.line("boundary hbm", hbm_x, y0, hbm_x, y1, "black", true);
    svg.line("boundary bisection", hbm_x, bis_y, red_x, bis_y, "black", true);
    svg.text(x1 - 4.0, bis_y - 4.0, "end", &format!("{} bisection {}", cfg.scope.name(), sig3(bisection)));
    svg.line("boundary injection", dx1, inj_y, red_x, inj_y, "black", true);
    let _ = writeln!(
        svg.out,
        r#"<line class="antidiagonal" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="2" data-from-footprint="{}" data-from-lr="{}" data-to-footprint="{}" data-to-lr="{}"/>"#,
        num(dx0),
        num(dy0),
        num(dx1),
        num(dy1),
        num(diag[0].0),
        num(diag[0].1),
        num(diag[1].0),
        num(diag[1].1)
    );
    svg.text(dx0 + 4.0, dy0 - 4.0, "start", &format!("L:R {}", sig3(diag[0].1)));
    svg.text(dx1 + 4.0, dy1 - 4.0, "start", &format!("L:R {}", sig3(diag[1].1)));
    axes.draw(&mut svg, spec);

    for c in points {
        let (x, y) = (axes.px(to_tb(c.app.footprint)), axes.py(c.app.lr));
        svg.circle(&format!("app {}", c.zone.color.name().to_lowercase()), x, y, zone_fill(c.zone.color));
        svg.text(x + 7.0, y + 4.0, "start", &c.app.name);
    }
    for (i, z) in ZoneColor::ALL.iter().enumerate() {
        let y = TOP + 14.0 + 18.0 * i as f64;
        svg.rect(WIDTH - RIGHT + 12.0, y - 10.0, 12.0, 12.0, zone_fill(*z), 0.8);
        svg.text(WIDTH - RIGHT + 30.0, y, "start", z.name());
    }

    let mut rows: Vec<Vec<String>> = points
        .iter()
        .map(|c| {
            vec![
                "app".to_string(),
                c.app.name.clone(),
                num(c.app.footprint),
                num(c.app.lr),
                c.zone.color.name().to_string(),
            ]
        })
        .collect();
    for (name, (fp, lr)) in [("antidiagonal-start", diag[0]), ("antidiagonal-end", diag[1])] {
        rows.push(vec!["boundary".into(), name.into(), num(fp), num(lr), String::new()]);
    }
    rows.push(vec!["boundary".into(), "injection-balance".into(), String::new(), num(injection), String::new()]);
    rows.push(vec![
        "boundary".into(),
        format!("{}-bisection-balance", cfg.scope.name()),
        String::new(),
        num(bisection),
        String::new(),
    ]);
    Ok(Rendered {
        svg: svg.finish(),
        csv: csv_text(&["series", "name", "footprint_bytes", "lr", "zone"], rows)?,
    })
}

// ---------------------------------------------------------------------------
// Bisection table

fn topology_table(spec: &FigureSpec, rows: &[TopologyRow]) -> Result<Rendered> {
    if rows.is_empty() {
        return Err(Error::field("figure.data", "no rows to tabulate"));
    }
    let header = [
        "name",
        "switches",
        "links",
        "rack_gbps",
        "rack_taper",
        "global_gbps",
        "global_taper",
        "expected_switches",
        "expected_links",
        "expected_rack_taper",
        "expected_global_taper",
    ];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.name.clone(),
                r.report.switch_count.to_string(),
                r.report.total_links.to_string(),
                num(to_gb(r.report.rack_bisection_per_node)),
                num(r.report.rack_taper),
                num(to_gb(r.report.global_bisection_per_node)),
                num(r.report.global_taper),
            ];
            match &r.expected {
                Some(e) => row.extend([
                    e.switch_count.to_string(),
                    e.total_links.to_string(),
                    num(e.rack_taper),
                    num(e.global_taper),
                ]),
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            row
        })
        .collect();

    let widths = [200.0, 70.0, 70.0, 80.0, 80.0, 80.0, 80.0];
    let shown = ["network", "switches", "links", "rack GB/s", "rack taper", "global GB/s", "global taper"];
    let width = 40.0 + widths.iter().sum::<f64>();
    let height = 80.0 + 22.0 * rows.len() as f64;
    let mut svg = Svg::new(spec, width, height);
    let cell = |svg: &mut Svg, row: usize, texts: &[String], bold: bool| {
        let mut x = 20.0;
        let y = 56.0 + 22.0 * row as f64;
        for (t, w) in texts.iter().zip(widths) {
            let weight = if bold { r#" font-weight="bold""# } else { "" };
            let _ = writeln!(svg.out, r#"<text x="{}" y="{}"{weight}>{}</text>"#, num(x), num(y), escape(t));
            x += w;
        }
    };
    cell(&mut svg, 0, &shown.map(String::from), true);
    for (i, r) in rows.iter().enumerate() {
        let texts = [
            r.name.clone(),
            r.report.switch_count.to_string(),
            r.report.total_links.to_string(),
            sig3(to_gb(r.report.rack_bisection_per_node)),
            format!("{}%", sig3(r.report.rack_taper * 100.0)),
            sig3(to_gb(r.report.global_bisection_per_node)),
            format!("{}%", sig3(r.report.global_taper * 100.0)),
        ];
        cell(&mut svg, i + 1, &texts, false);
    }
    Ok(Rendered {
        svg: svg.finish(),
        csv: csv_text(&header, body)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::appmodel::builtin_apps;
    use crate::classify::classify_all;
    use crate::design_space::{build_grid, default_demand_axis, default_memory_axis, TaperMode};
    use crate::roofline::{log_samples, roofline_curve, RooflineConfig, Scope};
    use crate::techdb::SystemConfig;
    use crate::units::GB;

    fn spec(kind: FigureKind) -> FigureSpec {
        FigureSpec::new(kind, "test", "/nonexistent-dir/fig.svg")
    }

    #[test]
    fn significant_digits() {
        assert_eq!(sig3(65.536), "65.5");
        assert_eq!(sig3(131.072), "131");
        assert_eq!(sig3(234.057), "234");
        assert_eq!(sig3(0.125), "0.125");
        assert_eq!(sig3(4000.0), "4000");
    }

    #[test]
    fn heatmap_is_deterministic() {
        let m = SystemConfig::default_machine().machine;
        let g = build_grid(&m, &default_memory_axis(), &default_demand_axis(), 1.0, TaperMode::Scale).unwrap();
        let data = FigureData::Heatmap { grid: &g, quantity: HeatmapQuantity::Capacity };
        let a = render(&spec(FigureKind::Heatmap), data).unwrap();
        let b = render(&spec(FigureKind::Heatmap), data).unwrap();
        assert_eq!(a, b);
        assert!(a.csv.starts_with("demand_fraction,M=100,"));
        assert_eq!(a.csv.lines().count(), 11);
    }

    #[test]
    fn roofline_knee_labels() {
        let cfg = RooflineConfig::new(6553.6 * GB, 100.0 * GB).with_tapers(0.5, 0.28);
        let lr = log_samples(1.0, 1e4, 16).unwrap();
        let curves = roofline_curve(&cfg, &lr, &Scope::ALL).unwrap();
        let r = render(&spec(FigureKind::Roofline), FigureData::Roofline(&curves)).unwrap();
        for label in [">65.5<", ">131<", ">234<"] {
            assert!(r.svg.contains(label), "missing {label}");
        }
    }

    #[test]
    fn zones_include_antidiagonal() {
        let cfg = ZoneConfig::from_system(&SystemConfig::default_machine(), DisaggScope::Global);
        let pts = classify_all(&builtin_apps(), &cfg);
        let r = render(&spec(FigureKind::Zones), FigureData::Zones { points: &pts, config: &cfg }).unwrap();
        assert!(r.svg.contains(r#"class="antidiagonal""#));
        assert!(r.svg.contains("L:R 65.5"));
        assert!(r.csv.contains("antidiagonal-start,512000000000,512,"));
        assert!(r.csv.contains("antidiagonal-end,4000000000000,65.536,"));
        assert_eq!(r.csv.lines().filter(|l| l.starts_with("app,")).count(), 13);
    }

    #[test]
    fn mismatched_kind_rejected() {
        let curves: Vec<RooflineCurve> = Vec::new();
        assert!(render(&spec(FigureKind::Heatmap), FigureData::Roofline(&curves)).is_err());
    }

    #[test]
    fn unwritable_path_is_error() {
        let cfg = RooflineConfig::new(6553.6 * GB, 100.0 * GB);
        let curves = roofline_curve(&cfg, &[1.0, 10.0, 100.0], &[Scope::Injection]).unwrap();
        let err = emit_figure(&spec(FigureKind::Roofline), FigureData::Roofline(&curves)).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn axes_cover_tb_scale() {
        let axes = LogAxes::new((0.15, 8.8), (2.0, 3992.0));
        assert_eq!(axes.x, (0.1, 10.0));
        assert_eq!(axes.y, (1.0, 10_000.0));
        assert!(axes.px(1.0) > LEFT && axes.px(1.0) < WIDTH - RIGHT);
    }
}
