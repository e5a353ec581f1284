//! Acceptance criteria, one PASS/FAIL line each. Reference values and
//! tolerances are pinned here; expected values are recomputed from first
//! principles where possible rather than read back from the library.
//!
//! Items listed in `KNOWN_FAILURES` are reported as FAIL but do not fail the
//! run; an unexpected failure, or a known failure that starts passing, does.

use std::process::ExitCode;

use dismem_core::appmodel::{
    builtin_apps, lookup_app, lr_align, lr_gemm, lr_stream, lr_superlu, AlignParams, GemmParams, SuperluParams,
};
use dismem_core::classify::{classify, DisaggScope, ZoneColor, ZoneConfig};
use dismem_core::design_space::{
    build_grid, remote_bandwidth_per_node, remote_capacity_per_node, TaperMode,
};
use dismem_core::figure::{render, FigureData, FigureKind, FigureSpec, HeatmapQuantity};
use dismem_core::roofline::{
    attainable_bandwidth, log_samples, machine_balance, required_concurrency, roofline_curve, sustained_bandwidth,
    RooflineConfig, Scope,
};
use dismem_core::techdb::{builtin_catalog, SystemConfig};
use dismem_core::topology::{dragonfly_links, reference_machine, TopologySpec};
use dismem_core::units::{GB, KIB, TB};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const TAPER_REL_TOL: f64 = 0.03;
const LR_TOL: f64 = 1.0;
const BALANCE_TOL: f64 = 0.1;
const BALANCE_131_TOL: f64 = 0.5;
const BALANCE_234_TOL: f64 = 1.0;
const FIT_LINK_GBPS: f64 = 89.0;
const RANDOM_SAMPLES: u32 = 100;
const SEED: [u8; 32] = *b"dismem-acceptance-fixed-seed-000";

/// (criterion id, item) pairs that cannot be met with the shipped inputs.
const KNOWN_FAILURES: &[(&str, &str)] = &[
    ("2b", "disagg-24x32-9pct global taper"),
    ("5", "ADEPT Green"),
    ("5", "DASSA Green"),
];

struct Outcome {
    id: &'static str,
    title: &'static str,
    failures: Vec<String>,
    checked: usize,
}

impl Outcome {
    fn new(id: &'static str, title: &'static str) -> Self {
        Self { id, title, failures: Vec::new(), checked: 0 }
    }

    fn check(&mut self, item: impl Into<String>, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(format!("{}: {}", item.into(), detail()));
        }
    }

    fn near(&mut self, item: impl Into<String>, got: f64, want: f64, tol: f64) {
        self.check(item, (got - want).abs() <= tol, || format!("got {got}, want {want} ±{tol}"));
    }

    fn exact<T: PartialEq + std::fmt::Debug>(&mut self, item: impl Into<String>, got: T, want: T) {
        let ok = got == want;
        self.check(item, ok, || format!("got {got:?}, want {want:?}"));
    }
}

fn machine(c: u64, m: u64, f: f64) -> dismem_core::techdb::MachineConfig {
    let mut cfg = SystemConfig::default_machine().machine;
    cfg.compute_nodes = c;
    cfg.memory_nodes = m;
    cfg.demand_fraction = f;
    cfg.validate().expect("valid machine")
}

fn design_space() -> Outcome {
    let mut o = Outcome::new("1", "design-space goldens");
    o.exact("C=10K M=10K f=1 capacity", remote_capacity_per_node(&machine(10_000, 10_000, 1.0)).unwrap(), 4.0 * TB);
    o.exact("C=10K M=10K f=0.5 capacity", remote_capacity_per_node(&machine(10_000, 10_000, 0.5)).unwrap(), 8.0 * TB);
    o.exact("C=10K M=1K f=0.1 bandwidth", remote_bandwidth_per_node(&machine(10_000, 1000, 0.1)).unwrap(), 100.0 * GB);
    o
}

fn dragonfly_rows() -> Vec<(&'static str, u64, u64)> {
    vec![
        ("perlmutter", 384, 3312),
        ("disagg-24x32-9pct", 768, 2208),
        ("disagg-24x32-28pct", 768, 6624),
        ("disagg-24x32-50pct", 768, 11592),
        ("disagg-24x32-100pct", 768, 23736),
        ("disagg-48x16-50pct-rack", 768, 6768),
        ("disagg-48x16-56pct", 768, 13536),
        ("disagg-48x16-100pct", 768, 24816),
        ("fat-tree", 1018, 11776),
    ]
}

fn topology_counts() -> Outcome {
    let mut o = Outcome::new("2a", "topology switch and link counts");
    for (name, switches, links) in dragonfly_rows() {
        let r = reference_machine(name).unwrap().spec.report().unwrap();
        o.exact(format!("{name} switches"), r.switch_count, switches);
        o.exact(format!("{name} links"), r.total_links, links);
    }
    o
}

fn topology_tapers() -> Outcome {
    let mut o = Outcome::new("2b", "topology tapers at 89 GB/s links within ±3%");
    // (row, rack label %, global label %)
    let rows = [
        ("disagg-24x32-9pct", 100.0, 9.0),
        ("disagg-24x32-28pct", 100.0, 28.0),
        ("disagg-24x32-50pct", 100.0, 50.0),
        ("disagg-24x32-100pct", 100.0, 100.0),
        ("disagg-48x16-50pct-rack", 50.0, 28.0),
        ("disagg-48x16-56pct", 50.0, 56.0),
        ("disagg-48x16-100pct", 50.0, 100.0),
    ];
    for (name, rack, global) in rows {
        let spec = reference_machine(name).unwrap().spec.with_link_bandwidth(FIT_LINK_GBPS * GB);
        let TopologySpec::Dragonfly(d) = &spec else { unreachable!() };
        let r = spec.report().unwrap();
        // independent oracle: cut links x link bandwidth over half the affected endpoints
        let g = d.groups as f64;
        let s = d.switches_per_group as f64;
        let n = d.endpoints as f64;
        let nic = d.endpoint_nic.bandwidth;
        let global_oracle = ((g / 2.0).powi(2) * d.inter_links_per_pair as f64 * d.link_bandwidth / (n / 2.0) / nic).min(1.0);
        let rack_oracle =
            ((s / 2.0).powi(2) * d.intra_links_per_pair as f64 * d.link_bandwidth / (n / g / 2.0) / nic).min(1.0);
        o.near(format!("{name} global taper oracle"), r.global_taper, global_oracle, 1e-12);
        o.near(format!("{name} rack taper oracle"), r.rack_taper, rack_oracle, 1e-12);
        let within = |got: f64, label: f64| (got - label / 100.0).abs() <= TAPER_REL_TOL * label / 100.0;
        o.check(format!("{name} global taper"), within(r.global_taper, global), || {
            format!("got {:.2}%, label {global}%", r.global_taper * 100.0)
        });
        o.check(format!("{name} rack taper"), within(r.rack_taper, rack), || {
            format!("got {:.2}%, label {rack}%", r.rack_taper * 100.0)
        });
    }
    let ft = reference_machine("fat-tree").unwrap().spec.report().unwrap();
    o.exact("fat-tree tapers", (ft.rack_taper, ft.global_taper), (1.0, 1.0));
    o
}

fn roofline() -> Outcome {
    let mut o = Outcome::new("3", "roofline goldens");
    let cat = builtin_catalog();
    let hbm3 = cat.memory("HBM3").unwrap().bandwidth;
    let pcie6 = cat.link("PCIe6").unwrap().bandwidth;
    let cfg = RooflineConfig::new(hbm3, pcie6).with_tapers(0.5, 0.28);
    let now = RooflineConfig::new(cat.memory("HBM2").unwrap().bandwidth, cat.link("PCIe4").unwrap().bandwidth);
    o.near("HBM3:PCIe6", machine_balance(&cfg, Scope::Injection), 65.5, BALANCE_TOL);
    o.near("HBM2:PCIe4", machine_balance(&now, Scope::Injection), 62.2, BALANCE_TOL);
    o.near("50% taper", machine_balance(&cfg, Scope::Rack), 131.0, BALANCE_131_TOL);
    o.near("28% taper", machine_balance(&cfg, Scope::Global), 234.0, BALANCE_234_TOL);
    let adept = lookup_app("ADEPT").unwrap();
    let util = attainable_bandwidth(adept.lr, &cfg, Scope::Injection).unwrap().remote_utilization;
    o.check("ADEPT utilization <= 14%", util <= 0.14, || format!("got {util}"));
    // oracle: B_l / (lr * B_r)
    o.near("ADEPT utilization oracle", util, 6553.6 / (adept.lr * 100.0), 1e-12);
    o.near("ADEPT utilization ~13.7%", util, 0.137, 0.001);
    o
}

fn app_ratios() -> Outcome {
    let mut o = Outcome::new("4", "application L:R goldens");
    for (name, hbm, sample, published) in [
        ("ResNet-50", 55.35, 221_000.0, 3993.0),
        ("DeepCAM", 55.5, 107_000.0, 1927.0),
        ("CosmoFlow", 38.6, 15_400.0, 399.0),
    ] {
        let lr = lookup_app(name).unwrap().lr;
        o.near(format!("{name} vs FLOP ratio"), lr, sample / hbm, 1e-9);
        o.near(format!("{name} vs table"), lr, published, LR_TOL);
    }
    let p = AlignParams { m: 200, n: 780, traceback_len: 0, pairs: 1.0, char_bytes: 1.0, stream_factor: 2.0 };
    let (adept, _) = lr_align(&p, false).unwrap();
    o.near("ADEPT m=200 n=780 oracle", adept, 3.0 * 200.0 * 780.0 / 980.0, 1e-9);
    o.near("ADEPT m=200 n=780", adept, 477.0, LR_TOL);
    o.near("ADEPT shipped", lookup_app("ADEPT").unwrap().lr, 477.0, LR_TOL);
    o.exact("STREAM", lr_stream(), 2.0);
    o.exact("STREAM shipped", lookup_app("STREAM").unwrap().lr, 2.0);
    for (iters, want) in [(1u32, 4.0), (50, 101.0), (100, 201.0)] {
        let name = format!("SuperLU iters={iters}");
        o.near(name.clone(), lookup_app(&name).unwrap().lr, want, LR_TOL);
        // nnz >> n limit of the solve ratio is 1 + 2 iters; whole app adds the factorization's 1
        let p = SuperluParams { n: 1e3, nnz: 1e12, iters, bytes_per_nonzero: 12.0 };
        o.near(format!("{name} nnz>>n limit"), lr_superlu(&p).unwrap().lr_whole, 2.0 + 2.0 * iters as f64, 1e-6);
    }
    let sweep = log_samples(512.0 * GB * (1.0 + 1e-9), 4.0 * TB, 32).unwrap();
    for fp in sweep {
        let lr = lr_gemm(&GemmParams::for_footprint(fp)).unwrap().lr;
        o.check(format!("GEMM at {:.0} GB", fp / GB), (50.0..=90.0).contains(&lr), || format!("got {lr}"));
    }
    o.exact("DASSA", lookup_app("DASSA").unwrap().lr, 1000.0);
    o
}

fn zones() -> Outcome {
    let mut o = Outcome::new("5", "zone goldens for the thirteen shipped apps");
    let sys = SystemConfig::default_machine();
    let global = ZoneConfig::from_system(&sys, DisaggScope::Global);
    let rack = ZoneConfig::from_system(&sys, DisaggScope::Rack);
    let expect = [
        ("ResNet-50", &global, ZoneColor::Blue),
        ("DeepCAM", &global, ZoneColor::Green),
        ("CosmoFlow", &global, ZoneColor::Green),
        ("ADEPT", &global, ZoneColor::Green),
        ("EXTENSION", &global, ZoneColor::Green),
        ("PASTIS", &global, ZoneColor::Green),
        ("DASSA", &global, ZoneColor::Green),
        ("TOAST", &global, ZoneColor::Green),
        ("STREAM", &global, ZoneColor::Orange),
        ("Eigensolver", &global, ZoneColor::Orange),
        ("SuperLU", &global, ZoneColor::Grey),
        ("SuperLU", &rack, ZoneColor::Green),
        ("GEMM", &rack, ZoneColor::Grey),
    ];
    for (name, cfg, want) in expect {
        let got = classify(&lookup_app(name).unwrap(), cfg).color;
        let item = if cfg.scope == DisaggScope::Rack {
            format!("{name} {want} (rack)")
        } else {
            format!("{name} {want}")
        };
        o.exact(item, got, want);
    }
    let apps = builtin_apps();
    o.exact("shipped app count", apps.len(), 13);
    let fine = apps
        .iter()
        .filter(|a| matches!(classify(a, &global).color, ZoneColor::Blue | ZoneColor::Green))
        .count();
    o.exact("Blue or Green under global scope", fine, 9);
    o
}

fn concurrency() -> Outcome {
    let mut o = Outcome::new("6", "concurrency roofline");
    let page = sustained_bandwidth(4.0 * KIB, 1.0, 2e-6, 25.0 * GB).unwrap().sustained;
    o.near("4 KiB page, c=1, 2 us", page, 4096.0 / 2e-6, 1e-3);
    o.near("4 KiB page = 2.048 GB/s", page / GB, 2.048, 1e-9);
    o.check("4 KiB page below PCIe4", page < 25.0 * GB, || format!("got {page}"));
    let big = sustained_bandwidth(256.0 * KIB, 1.0, 2e-6, 100.0 * GB).unwrap().sustained;
    o.exact("256 KiB caps at link", big, 100.0 * GB);

    let mut runner = TestRunner::new_with_rng(
        Config { cases: RANDOM_SAMPLES, failure_persistence: None, ..Config::default() },
        TestRng::from_seed(RngAlgorithm::ChaCha, &SEED),
    );
    let samples = std::cell::Cell::new(0u32);
    let result = runner.run(&(0.1f64..400.0, 8.0f64..4.0e6, 0.05f64..50.0), |(bw_gb, q, lat_us)| {
        samples.set(samples.get() + 1);
        let (target, lat) = (bw_gb * GB, lat_us * 1e-6);
        let c = required_concurrency(target, q, lat).unwrap();
        let hit = sustained_bandwidth(q, c as f64, lat, f64::MAX).unwrap().sustained;
        prop_assert!(hit >= target, "c={} gives {} < {}", c, hit, target);
        Ok(())
    });
    o.check("round trip over random samples", result.is_ok(), || format!("{result:?}"));
    let ran = samples.get();
    o.check("sample count", ran >= RANDOM_SAMPLES, || format!("ran {ran}"));
    o
}

fn properties() -> Outcome {
    let mut o = Outcome::new("7", "property suites and deterministic emission");
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 256, failure_persistence: None, ..Config::default() },
        TestRng::from_seed(RngAlgorithm::ChaCha, &SEED),
    );

    let grid_monotone = runner.run(&(1_000u64..50_000, 1u64..20_000, 0.05f64..0.9), |(c, m, f)| {
        let cap = |c, m, f| remote_capacity_per_node(&machine(c, m, f)).unwrap();
        prop_assert!(cap(c, m + 1, f) > cap(c, m, f));
        prop_assert!(cap(c, m, f + 0.05) < cap(c, m, f));
        prop_assert!(cap(c + 1, m, f) < cap(c, m, f));
        Ok(())
    });
    o.check("grid monotone in M, f, C", grid_monotone.is_ok(), || format!("{grid_monotone:?}"));

    let roof = runner.run(&(0.01f64..1e5, 0.01f64..1.0), |(lr, t)| {
        let cfg = RooflineConfig::new(6553.6 * GB, 100.0 * GB).with_tapers(t, t);
        let p = attainable_bandwidth(lr, &cfg, Scope::Global).unwrap();
        prop_assert_eq!(p.attainable, cfg.local_bandwidth.min(lr * t * cfg.remote_bandwidth));
        let knee = machine_balance(&cfg, Scope::Global);
        let at = knee * t * cfg.remote_bandwidth;
        prop_assert!((at - cfg.local_bandwidth).abs() <= 1e-9 * cfg.local_bandwidth);
        Ok(())
    });
    o.check("roofline min-form and knee equality", roof.is_ok(), || format!("{roof:?}"));

    let sys = SystemConfig::default_machine();
    let zone = ZoneConfig::from_system(&sys, DisaggScope::Global);
    let rank = |z: ZoneColor| match z {
        ZoneColor::Red => 0,
        ZoneColor::Orange => 1,
        ZoneColor::Grey => 2,
        ZoneColor::Green => 3,
        ZoneColor::Blue => 4,
    };
    let template = lookup_app("GEMM").unwrap();
    let lr_mono = runner.run(&(0.1f64..1e4, 1.0f64..100.0, 0.6f64..100.0), |(lr, k, fp)| {
        let at = |lr| {
            let mut a = template.clone();
            a.lr = lr;
            a.footprint = fp * TB;
            classify(&a, &zone).color
        };
        prop_assert!(rank(at(lr * k)) >= rank(at(lr)));
        Ok(())
    });
    o.check("classify monotone in L:R", lr_mono.is_ok(), || format!("{lr_mono:?}"));

    let scaling = runner.run(&(0.1f64..1e4, 0.01f64..100.0, 0.01f64..100.0), |(lr, fp, k)| {
        let mut a = template.clone();
        a.lr = lr;
        a.footprint = fp * TB;
        let scaled = ZoneConfig { local_bandwidth: zone.local_bandwidth * k, remote_nic: zone.remote_nic * k, ..zone.clone() };
        prop_assert_eq!(classify(&a, &zone), classify(&a, &scaled));
        Ok(())
    });
    o.check("classify invariant under joint bandwidth scaling", scaling.is_ok(), || format!("{scaling:?}"));

    let TopologySpec::Dragonfly(base) = reference_machine("disagg-24x32-28pct").unwrap().spec else { unreachable!() };
    let linear = runner.run(&(1u64..50, 1u64..50), |(a, b)| {
        let links = |k| {
            let mut d = base.clone();
            d.inter_links_per_pair = k;
            dragonfly_links(&d)
        };
        prop_assert_eq!(links(a + b), links(a) + links(b));
        Ok(())
    });
    o.check("dragonfly links linear in a", linear.is_ok(), || format!("{linear:?}"));

    let grid = build_grid(&sys.machine, &[100, 1000, 10_000], &[1.0, 0.5, 0.1], 1.0, TaperMode::Scale).unwrap();
    let spec = FigureSpec::new(FigureKind::Heatmap, "capacity", "heatmap.svg");
    let data = FigureData::Heatmap { grid: &grid, quantity: HeatmapQuantity::Capacity };
    o.check("heatmap byte-identical", render(&spec, data).unwrap() == render(&spec, data).unwrap(), String::new);
    let curves = roofline_curve(&RooflineConfig::from_machine(&sys.machine, 0.5, 0.28), &log_samples(1.0, 1e4, 64).unwrap(), &Scope::ALL).unwrap();
    let spec = FigureSpec::new(FigureKind::Roofline, "roofline", "roofline.svg");
    o.check(
        "roofline byte-identical",
        render(&spec, FigureData::Roofline(&curves)).unwrap() == render(&spec, FigureData::Roofline(&curves)).unwrap(),
        String::new,
    );
    o
}

fn main() -> ExitCode {
    let outcomes = [
        design_space(),
        topology_counts(),
        topology_tapers(),
        roofline(),
        app_ratios(),
        zones(),
        concurrency(),
        properties(),
    ];
    let mut unexpected = 0;
    for o in &outcomes {
        let status = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("{status} [{}] {} ({} checks, {} failed)", o.id, o.title, o.checked, o.failures.len());
        for f in &o.failures {
            let known = KNOWN_FAILURES.iter().any(|(id, item)| *id == o.id && f.starts_with(&format!("{item}:")));
            if !known {
                unexpected += 1;
            }
            println!("       {} {f}", if known { "known:" } else { "NEW:  " });
        }
        for (id, item) in KNOWN_FAILURES.iter().filter(|(id, _)| *id == o.id) {
            if !o.failures.iter().any(|f| f.starts_with(&format!("{item}:"))) {
                unexpected += 1;
                println!("       NEW:   known failure [{id}] {item} now passes");
            }
        }
    }
    let passed = outcomes.iter().filter(|o| o.failures.is_empty()).count();
    println!("acceptance: {passed}/{} criteria pass, {unexpected} unexpected result(s)", outcomes.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
