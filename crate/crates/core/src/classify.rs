//! Performance-zone classification and workload-driven node sizing.
//!
//! Capacity decides first: a footprint that fits in HBM is Blue, and under
//! rack disaggregation a footprint larger than the rack's memory nodes is
//! Red. Otherwise three bandwidth bounds compete and the smallest names the
//! zone:
//!
//! | bound                                   | zone   |
//! |-----------------------------------------|--------|
//! | `B_l`                                   | Green  |
//! | `lr * B_r * share` (NIC contention)     | Orange |
//! | `lr * B_r * taper(scope)` (bisection)   | Grey   |
//!
//! `share = min(1, footprint / memory-node capacity)` is the fraction of one
//! memory node's NIC the application gets when memory nodes are packed by
//! capacity. Ties go to the less constrained zone (Green, then Grey, then
//! Orange).

use serde::{Deserialize, Serialize};

use crate::appmodel::AppCharacterization;
use crate::error::{Error, Result};
use crate::roofline::{RooflineConfig, Scope};
use crate::techdb::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum DisaggScope {
    Rack,
    Global,
}

impl DisaggScope {
    pub fn roofline_scope(self) -> Scope {
        match self {
            DisaggScope::Rack => Scope::Rack,
            DisaggScope::Global => Scope::Global,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DisaggScope::Rack => "rack",
            DisaggScope::Global => "global",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneConfig {
    pub hbm_capacity: f64,
    pub memory_node_capacity: f64,
    /// Injection bandwidth of the compute node NIC.
    pub remote_nic: f64,
    pub local_bandwidth: f64,
    pub rack_taper: f64,
    pub global_taper: f64,
    pub rack_memory_nodes: u64,
    pub scope: DisaggScope,
}

impl ZoneConfig {
    pub fn from_system(sys: &SystemConfig, scope: DisaggScope) -> Self {
        let m = &sys.machine;
        Self {
            hbm_capacity: m.compute_spec.local_memory.capacity,
            memory_node_capacity: m.memory_node_capacity,
            remote_nic: m.compute_spec.nic.bandwidth,
            local_bandwidth: m.compute_spec.local_memory.bandwidth,
            rack_taper: sys.network.rack_taper,
            global_taper: sys.network.global_taper,
            rack_memory_nodes: sys.network.rack_memory_nodes(m),
            scope,
        }
    }

    pub fn with_scope(&self, scope: DisaggScope) -> Self {
        Self {
            scope,
            ..self.clone()
        }
    }

    pub fn validate(self) -> Result<Self> {
        for (field, t) in [
            ("zones.rack_taper", self.rack_taper),
            ("zones.global_taper", self.global_taper),
        ] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::field(field, "taper must be in (0,1]"));
            }
        }
        for (field, v) in [
            ("zones.hbm_capacity", self.hbm_capacity),
            ("zones.memory_node_capacity", self.memory_node_capacity),
            ("zones.remote_nic", self.remote_nic),
            ("zones.local_bandwidth", self.local_bandwidth),
        ] {
            if !(v > 0.0) {
                return Err(Error::field(field, "must be positive"));
            }
        }
        Ok(self)
    }

    pub fn taper(&self) -> f64 {
        match self.scope {
            DisaggScope::Rack => self.rack_taper,
            DisaggScope::Global => self.global_taper,
        }
    }

    pub fn roofline(&self) -> RooflineConfig {
        RooflineConfig::new(self.local_bandwidth, self.remote_nic)
            .with_tapers(self.rack_taper, self.global_taper)
    }

    pub fn rack_capacity(&self) -> f64 {
        self.rack_memory_nodes as f64 * self.memory_node_capacity
    }

    /// Fraction of one memory node's NIC available to an application with
    /// this footprint.
    pub fn share(&self, footprint: f64) -> f64 {
        (footprint / self.memory_node_capacity).min(1.0)
    }
}

/// The green/orange boundary: `B_l / (B_r * share)`.
pub fn contention_balance(footprint: f64, cfg: &ZoneConfig) -> Result<f64> {
    if !(footprint > 0.0 && footprint.is_finite()) {
        return Err(Error::field("footprint", "must be positive"));
    }
    Ok(cfg.local_bandwidth / (cfg.remote_nic * cfg.share(footprint)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum ZoneColor {
    Blue,
    Green,
    Orange,
    Grey,
    Red,
}

impl ZoneColor {
    pub const ALL: [ZoneColor; 5] = [
        ZoneColor::Blue,
        ZoneColor::Green,
        ZoneColor::Orange,
        ZoneColor::Grey,
        ZoneColor::Red,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ZoneColor::Blue => "Blue",
            ZoneColor::Green => "Green",
            ZoneColor::Orange => "Orange",
            ZoneColor::Grey => "Grey",
            ZoneColor::Red => "Red",
        }
    }
}

impl std::fmt::Display for ZoneColor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZoneLimiter {
    Hbm,
    Injection,
    RackBisection,
    GlobalBisection,
    Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zone {
    pub color: ZoneColor,
    pub limiter: ZoneLimiter,
}

// Bounds within this relative distance are treated as tied.
const TIE: f64 = 1e-12;

fn at_most(a: f64, b: f64) -> bool {
    a <= b * (1.0 + TIE)
}

pub fn classify(app: &AppCharacterization, cfg: &ZoneConfig) -> Zone {
    if app.footprint <= cfg.hbm_capacity {
        return Zone {
            color: ZoneColor::Blue,
            limiter: ZoneLimiter::Hbm,
        };
    }
    if cfg.scope == DisaggScope::Rack && app.footprint > cfg.rack_capacity() {
        return Zone {
            color: ZoneColor::Red,
            limiter: ZoneLimiter::Capacity,
        };
    }
    let b_local = cfg.local_bandwidth;
    let b_inj = app.lr * cfg.remote_nic * cfg.share(app.footprint);
    let b_bis = app.lr * cfg.remote_nic * cfg.taper();
    if at_most(b_local, b_inj) && at_most(b_local, b_bis) {
        Zone {
            color: ZoneColor::Green,
            limiter: ZoneLimiter::Hbm,
        }
    } else if at_most(b_bis, b_inj) {
        Zone {
            color: ZoneColor::Grey,
            limiter: match cfg.scope {
                DisaggScope::Rack => ZoneLimiter::RackBisection,
                DisaggScope::Global => ZoneLimiter::GlobalBisection,
            },
        }
    } else {
        Zone {
            color: ZoneColor::Orange,
            limiter: ZoneLimiter::Injection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub app: AppCharacterization,
    pub scope: DisaggScope,
    pub zone: Zone,
}

pub fn classify_all(apps: &[AppCharacterization], cfg: &ZoneConfig) -> Vec<Classification> {
    apps.iter()
        .map(|app| Classification {
            app: app.clone(),
            scope: cfg.scope,
            zone: classify(app, cfg),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Workload sizing

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadEntry {
    pub app: AppCharacterization,
    pub node_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneHours {
    pub zone: ZoneColor,
    pub node_hours: f64,
    /// Node hours weighted by footprint / memory-node capacity.
    pub scaled_node_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizingReport {
    /// Compute nodes per memory node; `None` when nothing needs remote memory.
    pub compute_per_memory_node: Option<f64>,
    pub blue_node_hours: f64,
    pub remote_scaled_node_hours: f64,
    pub by_zone: Vec<ZoneHours>,
    pub classifications: Vec<(String, ZoneColor)>,
    pub advisories: Vec<String>,
}

pub const NO_REMOTE_DEMAND: &str = "no remote-memory demand; memory nodes unnecessary";
pub const ORANGE_DOMINATED: &str =
    "orange-zone demand dominates: workload is better served by node-local memory";
pub const MEMORY_HEAVY: &str =
    "remote-memory demand exceeds blue-zone demand: more memory nodes than compute nodes";

/// Compute:memory node ratio = blue node hours over remote-memory node hours
/// scaled by footprint / memory-node capacity.
pub fn size_workload(entries: &[WorkloadEntry], cfg: &ZoneConfig) -> Result<SizingReport> {
    if entries.is_empty() {
        return Err(Error::field("workload", "must contain at least one entry"));
    }
    let mut by_zone: Vec<ZoneHours> = ZoneColor::ALL
        .iter()
        .map(|&zone| ZoneHours {
            zone,
            node_hours: 0.0,
            scaled_node_hours: 0.0,
        })
        .collect();
    let mut classifications = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        if !(e.node_hours >= 0.0 && e.node_hours.is_finite()) {
            return Err(Error::field(
                format!("workload[{i}].node_hours"),
                "must be nonnegative",
            ));
        }
        let zone = classify(&e.app, cfg).color;
        let slot = by_zone.iter_mut().find(|z| z.zone == zone).expect("all zones present");
        slot.node_hours += e.node_hours;
        if zone != ZoneColor::Blue {
            slot.scaled_node_hours += e.node_hours * e.app.footprint / cfg.memory_node_capacity;
        }
        classifications.push((e.app.name.clone(), zone));
    }
    let blue = by_zone[0].node_hours;
    let remote: f64 = by_zone[1..].iter().map(|z| z.scaled_node_hours).sum();
    let orange = by_zone
        .iter()
        .find(|z| z.zone == ZoneColor::Orange)
        .map_or(0.0, |z| z.scaled_node_hours);

    let mut advisories = Vec::new();
    let ratio = if remote > 0.0 {
        Some(blue / remote)
    } else {
        advisories.push(NO_REMOTE_DEMAND.to_string());
        None
    };
    if remote > 0.0 && orange > 0.5 * remote {
        advisories.push(ORANGE_DOMINATED.to_string());
    }
    if remote > blue {
        advisories.push(MEMORY_HEAVY.to_string());
    }
    Ok(SizingReport {
        compute_per_memory_node: ratio,
        blue_node_hours: blue,
        remote_scaled_node_hours: remote,
        by_zone,
        classifications,
        advisories,
    })
}
