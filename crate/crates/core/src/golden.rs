//! Comparisons of computed values against published reference values.

use serde::Serialize;

use crate::appmodel::lookup_app;
use crate::error::Result;
use crate::roofline::{machine_balance, RooflineConfig, Scope};
use crate::techdb::builtin_catalog;
use crate::topology::reference_machines;

/// Relative window for bisection taper labels.
pub const TAPER_REL_TOL: f64 = 0.03;
/// Absolute window for published L:R ratios.
pub const LR_ABS_TOL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tolerance {
    Exact,
    Absolute { delta: f64 },
    Relative { fraction: f64 },
    Range { lo: f64, hi: f64 },
}

impl Tolerance {
    pub fn accepts(&self, expected: f64, computed: f64) -> bool {
        match *self {
            Tolerance::Exact => computed == expected,
            Tolerance::Absolute { delta } => (computed - expected).abs() <= delta,
            Tolerance::Relative { fraction } => (computed - expected).abs() <= fraction * expected.abs(),
            Tolerance::Range { lo, hi } => computed >= lo && computed <= hi,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Tolerance::Exact => "exact".into(),
            Tolerance::Absolute { delta } => format!("±{delta}"),
            Tolerance::Relative { fraction } => format!("±{}%", fraction * 100.0),
            Tolerance::Range { lo, hi } => format!("in [{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenCheck {
    pub table: &'static str,
    pub name: String,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

fn check(table: &'static str, name: impl Into<String>, expected: f64, computed: f64, tolerance: Tolerance) -> GoldenCheck {
    GoldenCheck {
        table,
        name: name.into(),
        expected,
        computed,
        tolerance,
        pass: tolerance.accepts(expected, computed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenReport {
    pub link_bandwidth: f64,
    pub checks: Vec<GoldenCheck>,
}

impl GoldenReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &GoldenCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Switch and link counts for every row, plus tapers where the endpoint
/// count behind them is known.
pub fn bisection_table(link_bandwidth: f64) -> Result<Vec<GoldenCheck>> {
    let mut out = Vec::new();
    for r in reference_machines() {
        let report = r.spec.clone().with_link_bandwidth(link_bandwidth).report()?;
        let e = &r.expected;
        out.push(check("bisection", format!("{} switches", r.name), e.switch_count as f64, report.switch_count as f64, Tolerance::Exact));
        out.push(check("bisection", format!("{} links", r.name), e.total_links as f64, report.total_links as f64, Tolerance::Exact));
        if e.tapers_reproducible {
            let rel = Tolerance::Relative { fraction: TAPER_REL_TOL };
            out.push(check("bisection", format!("{} rack taper", r.name), e.rack_taper, report.rack_taper, rel));
            out.push(check("bisection", format!("{} global taper", r.name), e.global_taper, report.global_taper, rel));
        }
    }
    Ok(out)
}

/// L:R ratios of the three training workloads.
pub fn training_table() -> Result<Vec<GoldenCheck>> {
    [("ResNet-50", 3993.0), ("DeepCAM", 1927.0), ("CosmoFlow", 399.0)]
        .into_iter()
        .map(|(name, lr)| {
            let app = lookup_app(name)?;
            Ok(check("training", format!("{name} L:R"), lr, app.lr, Tolerance::Absolute { delta: LR_ABS_TOL }))
        })
        .collect()
}

pub fn machine_balances() -> Result<Vec<GoldenCheck>> {
    let cat = builtin_catalog();
    let hbm3 = cat.memory("HBM3")?.bandwidth;
    let pcie6 = cat.link("PCIe6")?.bandwidth;
    let now = RooflineConfig::new(cat.memory("HBM2")?.bandwidth, cat.link("PCIe4")?.bandwidth);
    let future = RooflineConfig::new(hbm3, pcie6).with_tapers(0.5, 0.28);
    Ok(vec![
        check("roofline", "HBM3:PCIe6 balance", 65.5, machine_balance(&future, Scope::Injection), Tolerance::Absolute { delta: 0.1 }),
        check("roofline", "HBM2:PCIe4 balance", 62.2, machine_balance(&now, Scope::Injection), Tolerance::Absolute { delta: 0.1 }),
        check("roofline", "50% taper balance", 131.0, machine_balance(&future, Scope::Rack), Tolerance::Absolute { delta: 0.5 }),
        check("roofline", "28% taper balance", 234.0, machine_balance(&future, Scope::Global), Tolerance::Absolute { delta: 1.0 }),
    ])
}

pub fn application_ratios() -> Result<Vec<GoldenCheck>> {
    let abs = Tolerance::Absolute { delta: LR_ABS_TOL };
    let mut out = vec![
        check("applications", "ADEPT L:R", 477.0, lookup_app("ADEPT")?.lr, abs),
        check("applications", "STREAM L:R", 2.0, lookup_app("STREAM")?.lr, Tolerance::Exact),
        check("applications", "DASSA L:R", 1000.0, lookup_app("DASSA")?.lr, Tolerance::Exact),
    ];
    for (iters, expected) in [(1, 4.0), (50, 101.0), (100, 201.0)] {
        let name = format!("SuperLU iters={iters}");
        out.push(check("applications", format!("{name} L:R"), expected, lookup_app(&name)?.lr, abs));
    }
    out.push(check(
        "applications",
        "GEMM L:R",
        70.0,
        lookup_app("GEMM")?.lr,
        Tolerance::Range { lo: 50.0, hi: 90.0 },
    ));
    Ok(out)
}

pub fn golden_report(link_bandwidth: f64) -> Result<GoldenReport> {
    let mut checks = bisection_table(link_bandwidth)?;
    checks.extend(training_table()?);
    checks.extend(machine_balances()?);
    checks.extend(application_ratios()?);
    Ok(GoldenReport {
        link_bandwidth,
        checks,
    })
}
