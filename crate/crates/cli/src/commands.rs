use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use dismem_core::appmodel::{
    builtin_apps, builtin_variants, lookup_app, lr_from_counters, parse_app_specs, AppCharacterization, AppSpec,
    CounterSample,
};
use dismem_core::classify::{classify_all, size_workload, DisaggScope, WorkloadEntry, ZoneConfig};
use dismem_core::design_space::{build_grid, default_demand_axis, default_memory_axis, DesignGrid, TaperMode};
use dismem_core::figure::{sig3, ConcurrencySeries, FigureData, FigureKind, HeatmapQuantity, TopologyRow};
use dismem_core::golden::golden_report;
use dismem_core::roofline::{
    attainable_bandwidth, log_samples, machine_balance, required_concurrency, roofline_curve, sustained_bandwidth,
    RooflineConfig, Scope, POINTS_PER_DECADE,
};
use dismem_core::techdb::SystemConfig;
use dismem_core::topology::{reference_machine, reference_machines, TopologySpec, DEFAULT_LINK_BANDWIDTH};
use dismem_core::units::{fmt_bytes, parse_bandwidth, parse_bytes, parse_seconds, to_gb, trim_float, GB};

use crate::config::{self, overlay};
use crate::output::{csv_rows, digest, table, Format, Sink};
use crate::{
    AppsArgs, ClassifyArgs, Cli, Command, ConcurrencyArgs, DesignSpaceArgs, DisaggArg, MachineOverrides,
    QuantityArg, ReproduceArgs, RooflineArgs, ScopeArg, TaperModeArg, TopologyArgs, WorkloadArgs, EXIT_MISMATCH,
    EXIT_OK,
};

/// What a finished command reports back to `run`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Outcome {
    pub golden_mismatches: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.golden_mismatches > 0 {
            EXIT_MISMATCH
        } else {
            EXIT_OK
        }
    }
}

pub const REPRODUCE_DIR: &str = "reproduce";

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<Outcome> {
    let loaded = config::load(&cli.machine, cli.config_dir.as_deref())?;
    let system = apply_overrides(loaded.system.clone(), &cli.overrides)?;
    let name = cli.command.name();
    let opts = loaded.command_options(name);

    let out_dir = match (&cli.command, &cli.out) {
        (_, Some(dir)) => Some(dir.clone()),
        (Command::Reproduce(_), None) => Some(PathBuf::from(REPRODUCE_DIR)),
        _ => None,
    };
    let mut sink = Sink::new(cli.format, out_dir, stdout)?;

    let mut outcome = Outcome::default();
    let effective = match &cli.command {
        Command::DesignSpace(a) => {
            let a: DesignSpaceArgs = overlay(a, opts, name)?;
            design_space(&system, &a, &mut sink)?;
            serde_json::to_value(a)?
        }
        Command::Topology(a) => {
            let a: TopologyArgs = overlay(a, opts, name)?;
            topology(&system, &a, &mut sink)?;
            serde_json::to_value(a)?
        }
        Command::Roofline(a) => {
            let a: RooflineArgs = overlay(a, opts, name)?;
            roofline(&system, &a, &mut sink)?;
            serde_json::to_value(a)?
        }
        Command::Concurrency(a) => {
            let a: ConcurrencyArgs = overlay(a, opts, name)?;
            concurrency(&system, &a, &mut sink)?;
            serde_json::to_value(a)?
        }
        Command::Apps(a) => {
            let a: AppsArgs = overlay(a, opts, name)?;
            apps(&a, &mut sink)?;
            serde_json::to_value(a)?
        }
        Command::Classify(a) => {
            let a: ClassifyArgs = overlay(a, opts, name)?;
            classify(&system, &a, &mut sink)?;
            serde_json::to_value(a)?
        }
        Command::Workload(a) => {
            let a: WorkloadArgs = overlay(a, opts, name)?;
            workload(&system, &a, &mut sink)?;
            serde_json::to_value(a)?
        }
        Command::Reproduce(a) => {
            let a: ReproduceArgs = overlay(a, opts, name)?;
            outcome.golden_mismatches = reproduce(&system, &a, &mut sink)?;
            serde_json::to_value(a)?
        }
    };

    let config_digest = digest(&json!({
        "command": name,
        "system": system,
        "options": effective,
    }))?;
    sink.finish(name, config_digest)?;
    Ok(outcome)
}

fn apply_overrides(mut sys: SystemConfig, o: &MachineOverrides) -> Result<SystemConfig> {
    if let Some(c) = o.compute_nodes {
        sys.machine.compute_nodes = c;
    }
    if let Some(m) = o.memory_nodes {
        sys.machine.memory_nodes = m;
    }
    if let Some(f) = o.demand_fraction {
        sys.machine.demand_fraction = f;
    }
    if let Some(t) = o.rack_taper {
        sys.network.rack_taper = t;
    }
    if let Some(t) = o.global_taper {
        sys.network.global_taper = t;
    }
    if o.rack_memory_nodes.is_some() {
        sys.network.rack_memory_nodes = o.rack_memory_nodes;
    }
    sys.machine = sys.machine.validate()?;
    sys.network = sys.network.validate()?;
    Ok(sys)
}

/// A bare number is GB/s; otherwise any bandwidth with units.
fn bandwidth_arg(s: &str) -> Result<f64> {
    let v = match s.trim().parse::<f64>() {
        Ok(gb) => gb * GB,
        Err(_) => parse_bandwidth(s)?,
    };
    if !(v > 0.0 && v.is_finite()) {
        bail!("bandwidth `{s}` must be positive");
    }
    Ok(v)
}

fn gb(x: f64) -> String {
    trim_float(to_gb(x), 2)
}

fn pct(x: f64) -> String {
    format!("{}%", trim_float(100.0 * x, 1))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn disagg(scope: Option<DisaggArg>) -> DisaggScope {
    match scope.unwrap_or(DisaggArg::Global) {
        DisaggArg::Rack => DisaggScope::Rack,
        DisaggArg::Global => DisaggScope::Global,
    }
}

fn scope_of(s: ScopeArg) -> Scope {
    match s {
        ScopeArg::Injection => Scope::Injection,
        ScopeArg::Rack => Scope::Rack,
        ScopeArg::Global => Scope::Global,
    }
}

fn network_taper(sys: &SystemConfig, s: ScopeArg) -> f64 {
    match s {
        ScopeArg::Injection => 1.0,
        ScopeArg::Rack => sys.network.rack_taper,
        ScopeArg::Global => sys.network.global_taper,
    }
}

fn roofline_config(sys: &SystemConfig) -> RooflineConfig {
    RooflineConfig::from_machine(&sys.machine, sys.network.rack_taper, sys.network.global_taper)
}

// ---------------------------------------------------------------------------

fn design_space(sys: &SystemConfig, a: &DesignSpaceArgs, sink: &mut Sink) -> Result<()> {
    let taper = match (a.taper, a.taper_scope) {
        (Some(t), _) => t,
        (None, Some(s)) => network_taper(sys, s),
        (None, None) => 1.0,
    };
    let mode = match a.taper_mode.unwrap_or(TaperModeArg::Scale) {
        TaperModeArg::Scale => TaperMode::Scale,
        TaperModeArg::Cap => TaperMode::Cap,
    };
    let grid = build_grid(
        &sys.machine,
        &a.memory_axis.clone().unwrap_or_else(default_memory_axis),
        &a.demand_axis.clone().unwrap_or_else(default_demand_axis),
        taper,
        mode,
    )?;
    let quantity = match a.quantity.unwrap_or(QuantityArg::Capacity) {
        QuantityArg::Capacity => HeatmapQuantity::Capacity,
        QuantityArg::Bandwidth => HeatmapQuantity::Bandwidth,
    };
    let data = FigureData::Heatmap { grid: &grid, quantity };
    match sink.format {
        Format::Text => {
            let mut text = grid_table(&grid, "remote capacity per node (TB)", |p| {
                trim_float(p.remote_capacity_per_node / 1e12, 3)
            });
            text.push('\n');
            let title = format!(
                "remote bandwidth per node (GB/s), taper {} ({})",
                trim_float(taper, 3),
                match mode {
                    TaperMode::Scale => "scale",
                    TaperMode::Cap => "cap",
                }
            );
            text += &grid_table(&grid, &title, |p| gb(p.remote_bandwidth_per_node));
            sink.put("design-space.txt", &text)
        }
        Format::Json => sink.json("design-space", &grid),
        Format::Csv => sink.figure_csv("design-space", FigureKind::Heatmap, data),
        Format::Svg => sink.figure("design-space", FigureKind::Heatmap, "Design space", data),
    }
}

fn grid_table(
    grid: &DesignGrid,
    title: &str,
    cell: impl Fn(&dismem_core::design_space::DesignPoint) -> String,
) -> String {
    let mut header = vec!["f \\ M".to_string()];
    header.extend(grid.memory_nodes.iter().map(u64::to_string));
    let rows: Vec<Vec<String>> = grid
        .cells
        .iter()
        .zip(&grid.demand_fractions)
        .map(|(row, f)| std::iter::once(pct(*f)).chain(row.iter().map(&cell)).collect())
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    format!("{title}\n{}", table(&header, &rows))
}

// ---------------------------------------------------------------------------

fn topology_rows(sys: &SystemConfig, a: &TopologyArgs) -> Result<Vec<TopologyRow>> {
    let link = a.link_bandwidth.as_deref().map(bandwidth_arg).transpose()?;
    let adjust = |spec: TopologySpec| match link {
        Some(bw) => spec.with_link_bandwidth(bw),
        None => spec,
    };
    if let Some(path) = &a.spec {
        let text = read(path)?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let spec: TopologySpec = serde_path_to_error::deserialize(de)
            .map_err(|e| anyhow!("{}: {}: {}", path.display(), e.path(), e.inner()))?;
        let name = path.file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned());
        return Ok(vec![TopologyRow {
            name,
            report: adjust(spec).report()?,
            expected: None,
        }]);
    }
    let configured = |name: &String, spec: &TopologySpec| -> Result<TopologyRow> {
        Ok(TopologyRow {
            name: name.clone(),
            report: adjust(spec.clone()).report()?,
            expected: None,
        })
    };
    if let Some(name) = &a.reference {
        if let Some(spec) = sys.topologies.get(name) {
            return Ok(vec![configured(name, spec)?]);
        }
    }
    let machines = match &a.reference {
        Some(name) => vec![reference_machine(name)?],
        None => reference_machines(),
    };
    let mut rows = machines
        .into_iter()
        .map(|r| {
            Ok(TopologyRow {
                name: r.name.to_string(),
                report: adjust(r.spec).report()?,
                expected: Some(r.expected),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if a.reference.is_none() {
        for (name, spec) in &sys.topologies {
            rows.push(configured(name, spec)?);
        }
    }
    Ok(rows)
}

fn topology(sys: &SystemConfig, a: &TopologyArgs, sink: &mut Sink) -> Result<()> {
    let rows = topology_rows(sys, a)?;
    let data = FigureData::TopologyTable(&rows);
    match sink.format {
        Format::Text => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let t = &r.report;
                    vec![
                        r.name.clone(),
                        t.switch_count.to_string(),
                        t.total_links.to_string(),
                        gb(t.rack_bisection_per_node),
                        pct(t.rack_taper),
                        gb(t.global_bisection_per_node),
                        pct(t.global_taper),
                    ]
                })
                .collect();
            let text = table(
                &["network", "switches", "links", "rack GB/s", "rack taper", "global GB/s", "global taper"],
                &body,
            );
            sink.put("topology.txt", &text)
        }
        Format::Json => sink.json("topology", &rows),
        Format::Csv => sink.figure_csv("topology", FigureKind::TopologyTable, data),
        Format::Svg => sink.figure("topology", FigureKind::TopologyTable, "Bisection bandwidth", data),
    }
}

// ---------------------------------------------------------------------------

fn roofline(sys: &SystemConfig, a: &RooflineArgs, sink: &mut Sink) -> Result<()> {
    let cfg = roofline_config(sys).validate()?;
    let scopes: Vec<Scope> = match &a.scopes {
        Some(s) => s.iter().copied().map(scope_of).collect(),
        None => Scope::ALL.to_vec(),
    };
    if let Some(lrs) = &a.lr {
        let mut points = Vec::new();
        for &lr in lrs {
            for &scope in &scopes {
                points.push((scope, attainable_bandwidth(lr, &cfg, scope)?));
            }
        }
        return match sink.format {
            Format::Text | Format::Csv => {
                let rows: Vec<Vec<String>> = points
                    .iter()
                    .map(|(s, p)| {
                        vec![
                            trim_float(p.lr, 3),
                            s.name().to_string(),
                            gb(p.attainable),
                            format!("{:?}", p.limiter).to_lowercase(),
                            trim_float(p.remote_utilization, 4),
                        ]
                    })
                    .collect();
                let header = ["lr", "scope", "attainable_gbps", "limiter", "remote_utilization"];
                if sink.format == Format::Text {
                    sink.put("roofline.txt", &table(&header, &rows))
                } else {
                    sink.put("roofline.csv", &csv_rows(&header, &rows)?)
                }
            }
            Format::Json => {
                let v: Vec<_> = points.iter().map(|(s, p)| json!({ "scope": s, "point": p })).collect();
                sink.json("roofline", &v)
            }
            Format::Svg => sink.unsupported("roofline --lr"),
        };
    }
    let lrs = log_samples(a.lr_min.unwrap_or(1.0), a.lr_max.unwrap_or(1e4), a.per_decade.unwrap_or(POINTS_PER_DECADE))?;
    let curves = roofline_curve(&cfg, &lrs, &scopes)?;
    let data = FigureData::Roofline(&curves);
    match sink.format {
        Format::Text => {
            let rows: Vec<Vec<String>> = scopes
                .iter()
                .map(|&s| {
                    vec![
                        s.name().to_string(),
                        pct(cfg.taper(s)),
                        gb(cfg.effective_remote(s)),
                        sig3(machine_balance(&cfg, s)),
                    ]
                })
                .collect();
            let text = format!(
                "local bandwidth {} GB/s\n{}",
                gb(cfg.local_bandwidth),
                table(&["scope", "taper", "remote GB/s", "balance (L:R)"], &rows)
            );
            sink.put("roofline.txt", &text)
        }
        Format::Json => sink.json("roofline", &curves),
        Format::Csv => sink.figure_csv("roofline", FigureKind::Roofline, data),
        Format::Svg => sink.figure("roofline", FigureKind::Roofline, "Memory roofline", data),
    }
}

// ---------------------------------------------------------------------------

struct ConcurrencyRun {
    series: Vec<ConcurrencySeries>,
    required: Option<Vec<(String, u64)>>,
    latency: f64,
    link: f64,
}

fn concurrency_run(sys: &SystemConfig, a: &ConcurrencyArgs) -> Result<ConcurrencyRun> {
    let nic = &sys.machine.compute_spec.nic;
    let latency = match &a.latency {
        Some(s) => parse_seconds(s)?,
        None => nic.latency,
    };
    let link = match &a.link {
        Some(s) => bandwidth_arg(s)?,
        None => nic.bandwidth,
    };
    let max = a.max_concurrency.unwrap_or(1024);
    if max == 0 {
        bail!("max-concurrency must be at least 1");
    }
    let labels = a
        .quanta
        .clone()
        .unwrap_or_else(|| ["4KiB", "64KiB", "256KiB"].map(String::from).to_vec());
    let quanta = labels.iter().map(|q| parse_bytes(q)).collect::<dismem_core::Result<Vec<_>>>()?;
    let counts: Vec<u64> = std::iter::successors(Some(1u64), |c| c.checked_mul(2).filter(|&n| n <= max)).collect();
    let series = labels
        .iter()
        .zip(&quanta)
        .map(|(label, &q)| {
            let points = counts
                .iter()
                .map(|&c| sustained_bandwidth(q, c as f64, latency, link))
                .collect::<dismem_core::Result<Vec<_>>>()?;
            Ok(ConcurrencySeries { label: label.clone(), points })
        })
        .collect::<Result<Vec<_>>>()?;
    let required = match &a.target {
        None => None,
        Some(t) => {
            let target = bandwidth_arg(t)?;
            if target > link {
                bail!("target {} GB/s exceeds the link cap of {} GB/s", gb(target), gb(link));
            }
            Some(
                labels
                    .iter()
                    .zip(&quanta)
                    .map(|(l, &q)| Ok((l.clone(), required_concurrency(target, q, latency)?)))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
    };
    Ok(ConcurrencyRun { series, required, latency, link })
}

fn concurrency(sys: &SystemConfig, a: &ConcurrencyArgs, sink: &mut Sink) -> Result<()> {
    let run = concurrency_run(sys, a)?;
    let data = FigureData::Concurrency(&run.series);
    match sink.format {
        Format::Text => {
            let mut text = format!(
                "latency {} us, link cap {} GB/s\n",
                trim_float(run.latency * 1e6, 3),
                gb(run.link)
            );
            let mut header = vec!["quantum".to_string()];
            if let Some(first) = run.series.first() {
                header.extend(first.points.iter().map(|p| format!("c={}", p.concurrency)));
            }
            let rows: Vec<Vec<String>> = run
                .series
                .iter()
                .map(|s| std::iter::once(s.label.clone()).chain(s.points.iter().map(|p| gb(p.sustained))).collect())
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            text += &table(&header, &rows);
            if let Some(req) = &run.required {
                text.push('\n');
                let rows: Vec<Vec<String>> = req.iter().map(|(l, c)| vec![l.clone(), c.to_string()]).collect();
                text += &table(&["quantum", "required concurrency"], &rows);
            }
            sink.put("concurrency.txt", &text)
        }
        Format::Json => sink.json(
            "concurrency",
            &json!({
                "latency": run.latency,
                "link_cap": run.link,
                "series": run.series,
                "required_concurrency": run.required,
            }),
        ),
        Format::Csv => sink.figure_csv("concurrency", FigureKind::Concurrency, data),
        Format::Svg => sink.figure("concurrency", FigureKind::Concurrency, "Little's Law", data),
    }
}

// ---------------------------------------------------------------------------

fn load_apps(path: &Path) -> Result<Vec<AppCharacterization>> {
    let specs = parse_app_specs(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    specs
        .iter()
        .map(|s| s.evaluate().map_err(|e| anyhow!("{}: {e}", path.display())))
        .collect()
}

fn app_rows(apps: &[AppCharacterization]) -> Vec<Vec<String>> {
    apps.iter()
        .map(|a| {
            vec![
                a.name.clone(),
                sig3(a.lr),
                fmt_bytes(a.footprint),
                format!("{:?}", a.lr_source).to_lowercase(),
                format!("{:?}", a.footprint_source).to_lowercase(),
            ]
        })
        .collect()
}

fn apps(a: &AppsArgs, sink: &mut Sink) -> Result<()> {
    if let Some(path) = &a.counters {
        let sample = CounterSample::from_csv(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        let lr = lr_from_counters(&sample)?;
        return match sink.format {
            Format::Text => sink.put(
                "counters.txt",
                &format!(
                    "local bytes {}\nremote bytes {}\nL:R {}\n",
                    fmt_bytes(sample.local_bytes()),
                    fmt_bytes(sample.remote_bytes()),
                    sig3(lr)
                ),
            ),
            Format::Json => sink.json(
                "counters",
                &json!({ "local_bytes": sample.local_bytes(), "remote_bytes": sample.remote_bytes(), "lr": lr }),
            ),
            Format::Csv => sink.put(
                "counters.csv",
                &csv_rows(
                    &["local_bytes", "remote_bytes", "lr"],
                    &[vec![sample.local_bytes().to_string(), sample.remote_bytes().to_string(), lr.to_string()]],
                )?,
            ),
            Format::Svg => sink.unsupported("apps"),
        };
    }
    let mut list = match &a.apps_file {
        Some(p) => load_apps(p)?,
        None => builtin_apps(),
    };
    if a.variants.unwrap_or(false) {
        list.extend(builtin_variants());
    }
    let header = ["app", "lr", "footprint", "lr_source", "footprint_source"];
    match sink.format {
        Format::Text => sink.put("apps.txt", &table(&header, &app_rows(&list))),
        Format::Json => sink.json("apps", &list),
        Format::Csv => {
            let rows: Vec<Vec<String>> = list
                .iter()
                .map(|a| {
                    vec![
                        a.name.clone(),
                        a.lr.to_string(),
                        a.footprint.to_string(),
                        format!("{:?}", a.lr_source).to_lowercase(),
                        format!("{:?}", a.footprint_source).to_lowercase(),
                    ]
                })
                .collect();
            sink.put("apps.csv", &csv_rows(&["app", "lr", "footprint_bytes", "lr_source", "footprint_source"], &rows)?)
        }
        Format::Svg => sink.unsupported("apps"),
    }
}

// ---------------------------------------------------------------------------

fn classify(sys: &SystemConfig, a: &ClassifyArgs, sink: &mut Sink) -> Result<()> {
    let mut list = match &a.apps_file {
        Some(p) => load_apps(p)?,
        None => Vec::new(),
    };
    match &a.app {
        Some(names) => {
            for n in names {
                list.push(lookup_app(n)?);
            }
        }
        None if a.apps_file.is_none() => list = builtin_apps(),
        None => {}
    }
    let cfg = ZoneConfig::from_system(sys, disagg(a.scope)).validate()?;
    let points = classify_all(&list, &cfg);
    let data = FigureData::Zones { points: &points, config: &cfg };
    match sink.format {
        Format::Text => {
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|c| {
                    vec![
                        c.app.name.clone(),
                        sig3(c.app.lr),
                        fmt_bytes(c.app.footprint),
                        c.zone.color.to_string(),
                        serde_json::to_value(c.zone.limiter)
                            .ok()
                            .and_then(|v| v.as_str().map(String::from))
                            .unwrap_or_default(),
                    ]
                })
                .collect();
            let text = format!(
                "scope {}\n{}",
                cfg.scope.name(),
                table(&["app", "lr", "footprint", "zone", "limiter"], &rows)
            );
            sink.put("classify.txt", &text)
        }
        Format::Json => sink.json("classify", &points),
        Format::Csv => sink.figure_csv("classify", FigureKind::Zones, data),
        Format::Svg => sink.figure("classify", FigureKind::Zones, "Performance zones", data),
    }
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum AppRef {
    Name(String),
    Spec(Box<AppSpec>),
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    app: AppRef,
    node_hours: f64,
}

fn load_entries(path: &Path) -> Result<Vec<WorkloadEntry>> {
    let text = read(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let raw: Vec<EntryFile> = serde_path_to_error::deserialize(de)
        .map_err(|e| anyhow!("{}: {}: {}", path.display(), e.path(), e.inner()))?;
    raw.into_iter()
        .map(|e| {
            let app = match e.app {
                AppRef::Name(n) => lookup_app(&n)?,
                AppRef::Spec(s) => s.evaluate()?,
            };
            Ok(WorkloadEntry { app, node_hours: e.node_hours })
        })
        .collect::<Result<Vec<_>>>()
        .with_context(|| path.display().to_string())
}

fn workload(sys: &SystemConfig, a: &WorkloadArgs, sink: &mut Sink) -> Result<()> {
    let path = a
        .entries
        .as_ref()
        .ok_or_else(|| anyhow!("workload needs --entries <file> (or options.workload.entries in the config)"))?;
    let entries = load_entries(path)?;
    let cfg = ZoneConfig::from_system(sys, disagg(a.scope)).validate()?;
    let report = size_workload(&entries, &cfg)?;
    match sink.format {
        Format::Text => {
            let ratio = match report.compute_per_memory_node {
                Some(r) => format!("compute nodes per memory node: {}", sig3(r)),
                None => "compute nodes per memory node: n/a".to_string(),
            };
            let rows: Vec<Vec<String>> = report
                .by_zone
                .iter()
                .map(|z| vec![z.zone.to_string(), sig3(z.node_hours), sig3(z.scaled_node_hours)])
                .collect();
            let mut text = format!(
                "scope {}\n{ratio}\n\n{}",
                cfg.scope.name(),
                table(&["zone", "node hours", "scaled node hours"], &rows)
            );
            for adv in &report.advisories {
                text += &format!("advisory: {adv}\n");
            }
            sink.put("workload.txt", &text)
        }
        Format::Json => sink.json("workload", &report),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .by_zone
                .iter()
                .map(|z| vec![z.zone.to_string(), z.node_hours.to_string(), z.scaled_node_hours.to_string()])
                .collect();
            sink.put("workload.csv", &csv_rows(&["zone", "node_hours", "scaled_node_hours"], &rows)?)
        }
        Format::Svg => {
            let apps: Vec<AppCharacterization> = entries.into_iter().map(|e| e.app).collect();
            let points = classify_all(&apps, &cfg);
            sink.figure("workload", FigureKind::Zones, "Workload zones", FigureData::Zones { points: &points, config: &cfg })
        }
    }
}

// ---------------------------------------------------------------------------

fn reproduce(sys: &SystemConfig, a: &ReproduceArgs, sink: &mut Sink) -> Result<usize> {
    let link = match &a.link_bandwidth {
        Some(s) => bandwidth_arg(s)?,
        None => DEFAULT_LINK_BANDWIDTH,
    };
    let m = &sys.machine;
    let (ma, fa) = (default_memory_axis(), default_demand_axis());

    let capacity = build_grid(m, &ma, &fa, 1.0, TaperMode::Scale)?;
    sink.figure(
        "heatmap-capacity",
        FigureKind::Heatmap,
        "Remote capacity per compute node",
        FigureData::Heatmap { grid: &capacity, quantity: HeatmapQuantity::Capacity },
    )?;
    for (stem, taper) in [
        ("heatmap-bandwidth-injection", 1.0),
        ("heatmap-bandwidth-rack", sys.network.rack_taper),
        ("heatmap-bandwidth-global", sys.network.global_taper),
    ] {
        let grid = build_grid(m, &ma, &fa, taper, TaperMode::Scale)?;
        let title = format!("Remote bandwidth per compute node, taper {}", pct(taper));
        sink.figure(stem, FigureKind::Heatmap, &title, FigureData::Heatmap { grid: &grid, quantity: HeatmapQuantity::Bandwidth })?;
    }

    let cfg = roofline_config(sys).validate()?;
    let curves = roofline_curve(&cfg, &log_samples(1.0, 1e4, POINTS_PER_DECADE)?, &Scope::ALL)?;
    sink.figure("roofline", FigureKind::Roofline, "Memory roofline", FigureData::Roofline(&curves))?;

    let apps = builtin_apps();
    for scope in [DisaggScope::Global, DisaggScope::Rack] {
        let zc = ZoneConfig::from_system(sys, scope).validate()?;
        let points = classify_all(&apps, &zc);
        let title = format!("Performance zones, {} disaggregation", scope.name());
        sink.figure(&format!("zones-{}", scope.name()), FigureKind::Zones, &title, FigureData::Zones { points: &points, config: &zc })?;
    }

    let conc = concurrency_run(sys, &ConcurrencyArgs::default())?;
    sink.figure("concurrency", FigureKind::Concurrency, "Little's Law", FigureData::Concurrency(&conc.series))?;

    let rows = topology_rows(&SystemConfig { topologies: Default::default(), ..sys.clone() }, &TopologyArgs {
        link_bandwidth: Some(format!("{}", link / GB)),
        ..Default::default()
    })?;
    sink.figure("topology", FigureKind::TopologyTable, "Bisection bandwidth", FigureData::TopologyTable(&rows))?;

    let report = golden_report(link)?;
    sink.json("golden", &report)?;
    let body: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.table.to_string(),
                c.name.clone(),
                trim_float(c.expected, 4),
                trim_float(c.computed, 4),
                c.tolerance.describe(),
                if c.pass { "ok" } else { "MISMATCH" }.to_string(),
            ]
        })
        .collect();
    let text = table(&["table", "check", "expected", "computed", "tolerance", "status"], &body);
    sink.put("golden.txt", &text)?;

    let mismatches: Vec<_> = report.mismatches().collect();
    sink.say(&format!(
        "golden: {} checks, {} mismatches (link bandwidth {} GB/s)",
        report.checks.len(),
        mismatches.len(),
        gb(link)
    ))?;
    for c in &mismatches {
        sink.say(&format!(
            "  mismatch: {}: expected {}, computed {} ({})",
            c.name,
            trim_float(c.expected, 4),
            trim_float(c.computed, 4),
            c.tolerance.describe()
        ))?;
    }
    Ok(mismatches.len())
}
