//! Remote capacity and bandwidth available to each compute node that needs
//! remote memory, across memory-node counts and demand fractions.
//!
//! With `C` compute nodes of which a fraction `f` need remote memory, and `M`
//! memory nodes, each demanding node gets an `M / (f C)` share of the memory
//! pool. Capacity scales with that share without limit; bandwidth is capped
//! by the compute node's own NIC.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::techdb::MachineConfig;

/// How a bisection taper reduces per-node remote bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TaperMode {
    /// `bandwidth * taper` for every cell.
    #[default]
    Scale,
    /// `min(bandwidth, taper * compute NIC)`: only cells above the bisection
    /// share are reduced.
    Cap,
}

fn demanding_nodes(config: &MachineConfig) -> Result<f64> {
    if config.memory_nodes == 0 {
        return Err(Error::NoRemoteMemory);
    }
    let demand = config.demand_fraction * config.compute_nodes as f64;
    if demand < 1.0 {
        return Err(Error::field(
            "machine.demand_fraction",
            format!("f*C = {demand} is below one demanding node"),
        ));
    }
    Ok(demand)
}

/// `M * cap / (f * C)` bytes.
pub fn remote_capacity_per_node(config: &MachineConfig) -> Result<f64> {
    let demand = demanding_nodes(config)?;
    Ok(config.memory_nodes as f64 * config.memory_node_capacity / demand)
}

/// `min(compute NIC, M * memory NIC / (f * C))` bytes/s.
pub fn remote_bandwidth_per_node(config: &MachineConfig) -> Result<f64> {
    let demand = demanding_nodes(config)?;
    let pool = config.memory_nodes as f64 * config.memory_node_nic.bandwidth / demand;
    Ok(pool.min(config.compute_spec.nic.bandwidth))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignPoint {
    pub memory_nodes: u64,
    pub demand_fraction: f64,
    pub remote_capacity_per_node: f64,
    pub remote_bandwidth_per_node: f64,
}

/// Heat-map grid: rows follow `demand_fractions`, columns `memory_nodes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignGrid {
    pub memory_nodes: Vec<u64>,
    pub demand_fractions: Vec<f64>,
    pub taper: f64,
    pub taper_mode: TaperMode,
    pub cells: Vec<Vec<DesignPoint>>,
}

impl DesignGrid {
    pub fn cell(&self, row: usize, col: usize) -> &DesignPoint {
        &self.cells[row][col]
    }
}

fn strictly_monotone<T: PartialOrd>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1]) || xs.windows(2).all(|w| w[0] > w[1])
}

pub fn build_grid(
    config: &MachineConfig,
    memory_nodes: &[u64],
    demand_fractions: &[f64],
    taper: f64,
    mode: TaperMode,
) -> Result<DesignGrid> {
    if memory_nodes.is_empty() || demand_fractions.is_empty() {
        return Err(Error::field("grid", "axes must be nonempty"));
    }
    if !strictly_monotone(memory_nodes) {
        return Err(Error::field("grid.memory_nodes", "axis must be strictly monotone"));
    }
    if !strictly_monotone(demand_fractions) {
        return Err(Error::field(
            "grid.demand_fractions",
            "axis must be strictly monotone",
        ));
    }
    if !(taper > 0.0 && taper <= 1.0) {
        return Err(Error::field("grid.taper", "taper must be in (0,1]"));
    }
    let nic = config.compute_spec.nic.bandwidth;
    let cells = demand_fractions
        .iter()
        .map(|&f| {
            memory_nodes
                .iter()
                .map(|&m| {
                    let point = config.with_memory_nodes(m).with_demand_fraction(f).validate()?;
                    let bw = remote_bandwidth_per_node(&point)?;
                    let bw = match mode {
                        TaperMode::Scale => bw * taper,
                        TaperMode::Cap => bw.min(taper * nic),
                    };
                    Ok(DesignPoint {
                        memory_nodes: m,
                        demand_fraction: f,
                        remote_capacity_per_node: remote_capacity_per_node(&point)?,
                        remote_bandwidth_per_node: bw,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignGrid {
        memory_nodes: memory_nodes.to_vec(),
        demand_fractions: demand_fractions.to_vec(),
        taper,
        taper_mode: mode,
        cells,
    })
}

/// Memory-node axis of the published heat maps (100 to 20K).
pub fn default_memory_axis() -> Vec<u64> {
    vec![100, 500, 1000, 2000, 5000, 10_000, 20_000]
}

/// Demand-fraction axis, top row = every compute node demanding.
pub fn default_demand_axis() -> Vec<f64> {
    vec![1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1]
}
