//! Memory and interconnect technology catalog, plus the node and machine
//! configurations built from it.
//!
//! The catalog is data: [`builtin_catalog`] parses `data/catalog.json`, and
//! [`Catalog::from_json`] accepts a user file with the same schema.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::TopologySpec;
use crate::units::de;

/// A local or remote memory technology, sized per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryTech {
    pub name: String,
    pub year: u32,
    /// bytes/s per node
    #[serde(deserialize_with = "de::bandwidth")]
    pub bandwidth: f64,
    /// bytes per node
    #[serde(deserialize_with = "de::bytes")]
    pub capacity: f64,
}

/// A NIC / link technology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkTech {
    pub name: String,
    /// Injection bandwidth per endpoint, bytes/s.
    #[serde(deserialize_with = "de::bandwidth")]
    pub bandwidth: f64,
    /// One-way remote access latency, seconds.
    #[serde(deserialize_with = "de::seconds")]
    pub latency: f64,
}

impl MemoryTech {
    fn check(&self, path: &str) -> Result<()> {
        positive(&format!("{path}.bandwidth"), self.bandwidth)?;
        positive(&format!("{path}.capacity"), self.capacity)
    }
}

impl LinkTech {
    fn check(&self, path: &str) -> Result<()> {
        positive(&format!("{path}.bandwidth"), self.bandwidth)?;
        positive(&format!("{path}.latency"), self.latency)
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::field(field, format!("must be positive, got {v}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub memory: Vec<MemoryTech>,
    pub links: Vec<LinkTech>,
}

const BUILTIN_CATALOG: &str = include_str!("../data/catalog.json");

/// The shipped technology catalog.
pub fn builtin_catalog() -> Catalog {
    Catalog::from_json(BUILTIN_CATALOG).expect("shipped catalog is valid")
}

impl Catalog {
    pub fn from_json(text: &str) -> Result<Self> {
        let cat: Catalog = crate::error::from_json(text)?;
        for (i, m) in cat.memory.iter().enumerate() {
            m.check(&format!("memory[{i}]"))?;
        }
        for (i, l) in cat.links.iter().enumerate() {
            l.check(&format!("links[{i}]"))?;
        }
        Ok(cat)
    }

    pub fn memory(&self, name: &str) -> Result<&MemoryTech> {
        self.memory
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownName {
                kind: "memory technology",
                name: name.to_string(),
            })
    }

    pub fn link(&self, name: &str) -> Result<&LinkTech> {
        self.links
            .iter()
            .find(|l| l.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownName {
                kind: "link technology",
                name: name.to_string(),
            })
    }

    /// Adds or replaces entries by name.
    pub fn merge(&mut self, other: Catalog) {
        for m in other.memory {
            match self.memory.iter_mut().find(|e| e.name == m.name) {
                Some(slot) => *slot = m,
                None => self.memory.push(m),
            }
        }
        for l in other.links {
            match self.links.iter_mut().find(|e| e.name == l.name) {
                Some(slot) => *slot = l,
                None => self.links.push(l),
            }
        }
    }
}

/// A compute node: an APU with local HBM and one NIC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub local_memory: MemoryTech,
    pub nic: LinkTech,
}

/// A resolved machine: C compute nodes and M memory nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineConfig {
    pub compute_nodes: u64,
    pub memory_nodes: u64,
    pub compute_spec: NodeSpec,
    /// bytes per memory node
    pub memory_node_capacity: f64,
    pub memory_node_nic: LinkTech,
    /// Fraction of compute nodes needing remote memory at once, in (0, 1].
    pub demand_fraction: f64,
}

impl MachineConfig {
    /// Checks every invariant. Values are already in base units, so a valid
    /// config is returned unchanged.
    pub fn validate(self) -> Result<Self> {
        if self.compute_nodes < 1 {
            return Err(Error::field("machine.compute_nodes", "must be at least 1"));
        }
        let f = self.demand_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::field(
                "machine.demand_fraction",
                "demand_fraction must be in (0,1]",
            ));
        }
        positive("machine.memory_node_capacity", self.memory_node_capacity)?;
        self.compute_spec
            .local_memory
            .check("machine.compute_spec.local_memory")?;
        self.compute_spec.nic.check("machine.compute_spec.nic")?;
        self.memory_node_nic.check("machine.memory_node_nic")?;
        Ok(self)
    }

    pub fn with_memory_nodes(&self, memory_nodes: u64) -> Self {
        Self {
            memory_nodes,
            ..self.clone()
        }
    }

    pub fn with_demand_fraction(&self, demand_fraction: f64) -> Self {
        Self {
            demand_fraction,
            ..self.clone()
        }
    }
}

/// Machine section of a config file, with technologies referenced by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineFile {
    pub compute_nodes: i64,
    pub memory_nodes: i64,
    pub local_memory: String,
    pub compute_nic: String,
    #[serde(deserialize_with = "de::bytes")]
    pub memory_node_capacity: f64,
    pub memory_node_nic: String,
    pub demand_fraction: f64,
}

impl MachineFile {
    pub fn resolve(&self, catalog: &Catalog) -> Result<MachineConfig> {
        let count = |field: &str, v: i64| {
            u64::try_from(v).map_err(|_| Error::field(field, format!("must be nonnegative, got {v}")))
        };
        let tech = |field: &str, r: Result<LinkTech>| {
            r.map_err(|e| Error::field(field, e.to_string()))
        };
        MachineConfig {
            compute_nodes: count("machine.compute_nodes", self.compute_nodes)?,
            memory_nodes: count("machine.memory_nodes", self.memory_nodes)?,
            compute_spec: NodeSpec {
                local_memory: catalog
                    .memory(&self.local_memory)
                    .map_err(|e| Error::field("machine.local_memory", e.to_string()))?
                    .clone(),
                nic: tech("machine.compute_nic", catalog.link(&self.compute_nic).cloned())?,
            },
            memory_node_capacity: self.memory_node_capacity,
            memory_node_nic: tech(
                "machine.memory_node_nic",
                catalog.link(&self.memory_node_nic).cloned(),
            )?,
            demand_fraction: self.demand_fraction,
        }
        .validate()
    }
}

/// How the machine maps onto the network: Dragonfly group count (racks) and
/// the rack / global bisection tapers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkBinding {
    pub dragonfly_groups: u64,
    pub rack_taper: f64,
    pub global_taper: f64,
    /// Memory nodes per rack; defaults to memory_nodes / dragonfly_groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rack_memory_nodes: Option<u64>,
}

impl NetworkBinding {
    pub fn validate(self) -> Result<Self> {
        if self.dragonfly_groups < 1 {
            return Err(Error::field("network.dragonfly_groups", "must be at least 1"));
        }
        for (field, t) in [
            ("network.rack_taper", self.rack_taper),
            ("network.global_taper", self.global_taper),
        ] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::field(field, "taper must be in (0,1]"));
            }
        }
        Ok(self)
    }

    pub fn rack_memory_nodes(&self, machine: &MachineConfig) -> u64 {
        self.rack_memory_nodes
            .unwrap_or(machine.memory_nodes / self.dragonfly_groups)
    }
}

/// A whole configuration file: optional catalog extension, machine, network,
/// and optional named topologies.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub catalog: Option<Catalog>,
    pub machine: MachineFile,
    pub network: NetworkBinding,
    #[serde(default)]
    pub topologies: BTreeMap<String, TopologySpec>,
}

/// A resolved system: machine plus network binding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    pub machine: MachineConfig,
    pub network: NetworkBinding,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub topologies: BTreeMap<String, TopologySpec>,
}

const DEFAULT_MACHINE: &str = include_str!("../data/default-machine.json");

impl SystemConfig {
    /// Parses a config file, resolving technology names against the builtin
    /// catalog extended by the file's own `catalog` section.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile = crate::error::from_json(text)?;
        let mut catalog = builtin_catalog();
        if let Some(extra) = file.catalog {
            for (i, m) in extra.memory.iter().enumerate() {
                m.check(&format!("catalog.memory[{i}]"))?;
            }
            for (i, l) in extra.links.iter().enumerate() {
                l.check(&format!("catalog.links[{i}]"))?;
            }
            catalog.merge(extra);
        }
        for (name, spec) in &file.topologies {
            spec.report()
                .map_err(|e| Error::field(format!("topologies.{name}"), e.to_string()))?;
        }
        Ok(Self {
            machine: file.machine.resolve(&catalog)?,
            network: file.network.validate()?,
            topologies: file.topologies,
        })
    }

    /// 10K compute nodes, 1K memory nodes of 4 TB DDR5, PCIe6 NICs, f = 0.1,
    /// 48 Dragonfly groups with 50% rack and 28% global taper.
    pub fn default_machine() -> Self {
        Self::from_json(DEFAULT_MACHINE).expect("shipped default machine is valid")
    }

    pub fn default_json() -> &'static str {
        DEFAULT_MACHINE
    }
}
