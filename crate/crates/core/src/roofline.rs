//! Memory Roofline and Little's-Law concurrency Roofline.
//!
//! The memory Roofline bounds the local-side bandwidth an application can
//! sustain when it moves `lr` local bytes per remote byte:
//! `min(B_l, lr * t * B_r)`, where `t` is the bisection taper of the scope the
//! remote traffic crosses. The knee sits at the machine balance
//! `B_l / (t * B_r)`.
//!
//! The concurrency Roofline bounds remote bandwidth by the number of
//! outstanding transfers: `min(link, c * Q / latency)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::techdb::MachineConfig;

/// Which part of the network remote traffic crosses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    Injection,
    Rack,
    Global,
}

impl Scope {
    pub const ALL: [Scope; 3] = [Scope::Injection, Scope::Rack, Scope::Global];

    pub fn name(self) -> &'static str {
        match self {
            Scope::Injection => "injection",
            Scope::Rack => "rack",
            Scope::Global => "global",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RooflineConfig {
    /// B_l, bytes/s
    pub local_bandwidth: f64,
    /// B_r at injection, bytes/s
    pub remote_bandwidth: f64,
    pub rack_taper: f64,
    pub global_taper: f64,
}

impl RooflineConfig {
    pub fn new(local_bandwidth: f64, remote_bandwidth: f64) -> Self {
        Self {
            local_bandwidth,
            remote_bandwidth,
            rack_taper: 1.0,
            global_taper: 1.0,
        }
    }

    pub fn with_tapers(mut self, rack: f64, global: f64) -> Self {
        self.rack_taper = rack;
        self.global_taper = global;
        self
    }

    pub fn from_machine(machine: &MachineConfig, rack_taper: f64, global_taper: f64) -> Self {
        Self::new(
            machine.compute_spec.local_memory.bandwidth,
            machine.compute_spec.nic.bandwidth,
        )
        .with_tapers(rack_taper, global_taper)
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.remote_bandwidth > 0.0) {
            return Err(Error::field("roofline.remote_bandwidth", "must be positive"));
        }
        if !(self.local_bandwidth >= self.remote_bandwidth) {
            return Err(Error::field(
                "roofline.local_bandwidth",
                "must be at least the remote bandwidth",
            ));
        }
        for (field, t) in [
            ("roofline.rack_taper", self.rack_taper),
            ("roofline.global_taper", self.global_taper),
        ] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::field(field, "taper must be in (0,1]"));
            }
        }
        Ok(self)
    }

    pub fn taper(&self, scope: Scope) -> f64 {
        match scope {
            Scope::Injection => 1.0,
            Scope::Rack => self.rack_taper,
            Scope::Global => self.global_taper,
        }
    }

    /// Remote bandwidth after the scope's taper.
    pub fn effective_remote(&self, scope: Scope) -> f64 {
        self.taper(scope) * self.remote_bandwidth
    }
}

/// `B_l / (t * B_r)`: the L:R at which local and remote transfer times match.
pub fn machine_balance(cfg: &RooflineConfig, scope: Scope) -> f64 {
    cfg.local_bandwidth / cfg.effective_remote(scope)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limiter {
    Local,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RooflinePoint {
    pub lr: f64,
    pub attainable: f64,
    pub limiter: Limiter,
    /// Fraction of the injection NIC consumed.
    pub remote_utilization: f64,
}

pub fn attainable_bandwidth(lr: f64, cfg: &RooflineConfig, scope: Scope) -> Result<RooflinePoint> {
    if !(lr > 0.0) {
        return Err(Error::field("lr", "must be positive"));
    }
    let remote_bound = lr * cfg.effective_remote(scope);
    let attainable = cfg.local_bandwidth.min(remote_bound);
    let limiter = if remote_bound >= cfg.local_bandwidth {
        Limiter::Local
    } else {
        Limiter::Remote
    };
    Ok(RooflinePoint {
        lr,
        attainable,
        limiter,
        remote_utilization: attainable / (lr * cfg.remote_bandwidth),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RooflineCurve {
    pub scope: Scope,
    pub taper: f64,
    pub balance: f64,
    pub points: Vec<RooflinePoint>,
}

/// Default log-log sampling density for exported curves.
pub const POINTS_PER_DECADE: usize = 64;

/// Log-spaced samples from `lo` to `hi` inclusive.
pub fn log_samples(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || per_decade == 0 {
        return Err(Error::field("lr_range", "must be positive and nonempty"));
    }
    let decades = (hi / lo).log10();
    let steps = (decades * per_decade as f64).ceil().max(1.0) as usize;
    Ok((0..=steps)
        .map(|i| {
            if i == steps {
                hi
            } else {
                lo * 10f64.powf(decades * i as f64 / steps as f64)
            }
        })
        .collect())
}

pub fn roofline_curve(cfg: &RooflineConfig, lr_values: &[f64], scopes: &[Scope]) -> Result<Vec<RooflineCurve>> {
    if lr_values.is_empty() {
        return Err(Error::field("lr_range", "must be nonempty"));
    }
    scopes
        .iter()
        .map(|&scope| {
            let points = lr_values
                .iter()
                .map(|&lr| attainable_bandwidth(lr, cfg, scope))
                .collect::<Result<Vec<_>>>()?;
            Ok(RooflineCurve {
                scope,
                taper: cfg.taper(scope),
                balance: machine_balance(cfg, scope),
                points,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcurrencyPoint {
    /// Transfer size, bytes.
    pub quanta: f64,
    pub concurrency: f64,
    /// seconds
    pub latency: f64,
    pub sustained: f64,
    pub link_cap: f64,
}

fn require_positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::field(field, "must be positive"))
    }
}

/// Little's Law: `min(link_cap, c * Q / latency)`.
pub fn sustained_bandwidth(quanta: f64, concurrency: f64, latency: f64, link_cap: f64) -> Result<ConcurrencyPoint> {
    require_positive("quanta", quanta)?;
    require_positive("concurrency", concurrency)?;
    require_positive("latency", latency)?;
    require_positive("link_cap", link_cap)?;
    Ok(ConcurrencyPoint {
        quanta,
        concurrency,
        latency,
        sustained: link_cap.min(concurrency * quanta / latency),
        link_cap,
    })
}

/// Smallest integer concurrency whose Little's-Law bandwidth reaches `target`.
pub fn required_concurrency(target: f64, quanta: f64, latency: f64) -> Result<u64> {
    require_positive("target", target)?;
    require_positive("quanta", quanta)?;
    require_positive("latency", latency)?;
    let mut c = (target * latency / quanta).ceil().max(1.0);
    // Undo a ceil pushed up by rounding in target * latency.
    if c > 1.0 && (c - 1.0) * quanta / latency >= target {
        c -= 1.0;
    }
    while c * quanta / latency < target {
        c += 1.0;
    }
    Ok(c as u64)
}
