//! Three-hop Dragonfly and three-level fat-tree networks: scale limits,
//! switch and link counts, and the per-node bisection share available for
//! rack (intra-group) and global (inter-group) memory disaggregation.
//!
//! Link convention: a Dragonfly "link" count includes both directions of
//! every group-pair connection, so `g` groups with `a` links per pair give
//! `2 * C(g, 2) * a = g (g - 1) a` links.
//!
//! Per-node bisection bandwidth assumes every endpoint on one side of the cut
//! talks across it: the cut bandwidth is split over `N / 2` endpoints
//! globally, and over `(N / g) / 2` endpoints inside one group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::techdb::LinkTech;
use crate::units::{de, GB};

/// Effective per-link bandwidth for PCIe6-era fabrics, bytes/s.
pub const DEFAULT_LINK_BANDWIDTH: f64 = 89.0 * GB;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    FatTree,
    Dragonfly,
}

/// Endpoints reachable at full bandwidth with radix-`k` switches:
/// `k^3 / 4` for a three-level fat tree, `k^4 / 64` for a Dragonfly.
pub fn max_endpoints(kind: TopologyKind, radix: u64) -> Result<u64> {
    let n = match kind {
        TopologyKind::FatTree => radix.pow(3) / 4,
        TopologyKind::Dragonfly => radix.pow(4) / 64,
    };
    if radix < 2 || n == 0 {
        return Err(Error::RadixTooSmall(radix));
    }
    Ok(n)
}

/// How the per-node bisection share is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "fraction")]
pub enum BisectionShare {
    /// Every endpoint on one side of the cut communicates across it.
    #[default]
    AllEndpoints,
    /// Only a fraction of endpoints (the remote-memory demand) share the cut.
    DemandWeighted(f64),
}

impl BisectionShare {
    fn weight(self) -> f64 {
        match self {
            BisectionShare::AllEndpoints => 1.0,
            BisectionShare::DemandWeighted(f) => f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DragonflySpec {
    pub groups: u64,
    pub switches_per_group: u64,
    /// Links between each pair of switches inside a group.
    pub intra_links_per_pair: u64,
    /// Links between each pair of groups.
    pub inter_links_per_pair: u64,
    #[serde(deserialize_with = "de::bandwidth")]
    pub link_bandwidth: f64,
    pub endpoints: u64,
    pub endpoint_nic: LinkTech,
    #[serde(default)]
    pub share: BisectionShare,
}

impl DragonflySpec {
    pub fn validate(&self) -> Result<()> {
        if self.groups < 2 || !self.groups.is_multiple_of(2) {
            return Err(Error::field("dragonfly.groups", "must be even and at least 2"));
        }
        if self.switches_per_group < 2 || !self.switches_per_group.is_multiple_of(2) {
            return Err(Error::field(
                "dragonfly.switches_per_group",
                "must be even and at least 2",
            ));
        }
        if self.intra_links_per_pair < 1 {
            return Err(Error::field("dragonfly.intra_links_per_pair", "must be at least 1"));
        }
        if self.inter_links_per_pair < 1 {
            return Err(Error::field("dragonfly.inter_links_per_pair", "must be at least 1"));
        }
        if self.endpoints < self.groups {
            return Err(Error::field("dragonfly.endpoints", "need at least one endpoint per group"));
        }
        if !(self.link_bandwidth > 0.0) {
            return Err(Error::field("dragonfly.link_bandwidth", "must be positive"));
        }
        if let BisectionShare::DemandWeighted(f) = self.share {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::field("dragonfly.share", "fraction must be in (0,1]"));
            }
        }
        Ok(())
    }

    pub fn switch_count(&self) -> u64 {
        self.groups * self.switches_per_group
    }

    /// Links crossing the cut that splits the groups in half.
    pub fn global_cut_links(&self) -> u64 {
        let half = self.groups / 2;
        half * half * self.inter_links_per_pair
    }

    /// Links crossing the cut that splits one group's switches in half.
    pub fn rack_cut_links(&self) -> u64 {
        let half = self.switches_per_group / 2;
        half * half * self.intra_links_per_pair
    }
}

/// `2 * C(g, 2) * a`.
pub fn dragonfly_links(spec: &DragonflySpec) -> u64 {
    spec.groups * (spec.groups - 1) * spec.inter_links_per_pair
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyReport {
    pub switch_count: u64,
    pub total_links: u64,
    /// bytes/s per endpoint
    pub rack_bisection_per_node: f64,
    pub global_bisection_per_node: f64,
    pub rack_taper: f64,
    pub global_taper: f64,
}

pub fn dragonfly_bisection(spec: &DragonflySpec) -> Result<TopologyReport> {
    spec.validate()?;
    let n = spec.endpoints as f64;
    let weight = spec.share.weight();
    let global_side = weight * n / 2.0;
    let rack_side = weight * (n / spec.groups as f64) / 2.0;
    let global = spec.global_cut_links() as f64 * spec.link_bandwidth / global_side;
    let rack = spec.rack_cut_links() as f64 * spec.link_bandwidth / rack_side;
    let nic = spec.endpoint_nic.bandwidth;
    Ok(TopologyReport {
        switch_count: spec.switch_count(),
        total_links: dragonfly_links(spec),
        rack_bisection_per_node: rack,
        global_bisection_per_node: global,
        rack_taper: (rack / nic).min(1.0),
        global_taper: (global / nic).min(1.0),
    })
}

/// Three-level fat tree built from leaf switches and core groups of switches
/// that act as one large core switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatTreeSpec {
    pub radix: u64,
    pub leaf_switches: u64,
    /// Ports per leaf used toward the core.
    pub leaf_uplink_ports: u64,
    pub core_groups: u64,
    pub core_group_size: u64,
    /// Ports per core switch used toward the leaves.
    pub core_down_ports_per_switch: u64,
    pub endpoints: u64,
    pub endpoint_nic: LinkTech,
}

impl FatTreeSpec {
    /// Leaf ports: uplinks plus the endpoints it hosts. Core ports: downlinks
    /// plus one port per peer core group.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("fat_tree.radix", self.radix),
            ("fat_tree.leaf_switches", self.leaf_switches),
            ("fat_tree.leaf_uplink_ports", self.leaf_uplink_ports),
            ("fat_tree.core_groups", self.core_groups),
            ("fat_tree.core_group_size", self.core_group_size),
            ("fat_tree.core_down_ports_per_switch", self.core_down_ports_per_switch),
            ("fat_tree.endpoints", self.endpoints),
        ];
        for (field, v) in fields {
            if v < 1 {
                return Err(Error::field(field, "must be at least 1"));
            }
        }
        let leaf_ports = self.leaf_uplink_ports + self.endpoints.div_ceil(self.leaf_switches);
        if leaf_ports > self.radix {
            return Err(Error::PortOvercommit {
                tier: "leaf",
                needed: leaf_ports,
                radix: self.radix,
            });
        }
        let core_peers = if self.core_groups > 1 { self.core_groups } else { 0 };
        let core_ports = self.core_down_ports_per_switch + core_peers;
        if core_ports > self.radix {
            return Err(Error::PortOvercommit {
                tier: "core",
                needed: core_ports,
                radix: self.radix,
            });
        }
        Ok(())
    }
}

/// Switch and inter-level link counts; a fat tree keeps full bisection, so
/// both tapers are 1.
pub fn fat_tree_build(spec: &FatTreeSpec) -> Result<TopologyReport> {
    spec.validate()?;
    let core = spec.core_groups * spec.core_group_size;
    let nic = spec.endpoint_nic.bandwidth;
    Ok(TopologyReport {
        switch_count: spec.leaf_switches + core,
        total_links: core * spec.core_down_ports_per_switch,
        rack_bisection_per_node: nic,
        global_bisection_per_node: nic,
        rack_taper: 1.0,
        global_taper: 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TopologySpec {
    Dragonfly(DragonflySpec),
    FatTree(FatTreeSpec),
}

impl TopologySpec {
    pub fn report(&self) -> Result<TopologyReport> {
        match self {
            TopologySpec::Dragonfly(s) => dragonfly_bisection(s),
            TopologySpec::FatTree(s) => fat_tree_build(s),
        }
    }

    pub fn kind(&self) -> TopologyKind {
        match self {
            TopologySpec::Dragonfly(_) => TopologyKind::Dragonfly,
            TopologySpec::FatTree(_) => TopologyKind::FatTree,
        }
    }

    pub fn with_link_bandwidth(mut self, bw: f64) -> Self {
        if let TopologySpec::Dragonfly(s) = &mut self {
            s.link_bandwidth = bw;
        }
        self
    }
}

/// Published figures for one reference network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedTopology {
    pub switch_count: u64,
    pub total_links: u64,
    /// bytes/s per endpoint, as labelled
    pub rack_bisection_per_node: f64,
    pub global_bisection_per_node: f64,
    pub rack_taper: f64,
    pub global_taper: f64,
    /// Whether the tapers can be recomputed from the topology (false when the
    /// endpoint count behind the published figure is unknown).
    pub tapers_reproducible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceMachine {
    pub name: &'static str,
    pub description: &'static str,
    pub spec: TopologySpec,
    pub expected: ExpectedTopology,
}

fn pcie(name: &str, gbps: f64) -> LinkTech {
    LinkTech {
        name: name.to_string(),
        bandwidth: gbps * GB,
        latency: 2e-6,
    }
}

fn disagg_dragonfly(groups: u64, switches: u64, inter: u64) -> DragonflySpec {
    DragonflySpec {
        groups,
        switches_per_group: switches,
        intra_links_per_pair: 1,
        inter_links_per_pair: inter,
        link_bandwidth: DEFAULT_LINK_BANDWIDTH,
        endpoints: 11_000,
        endpoint_nic: pcie("PCIe6", 100.0),
        share: BisectionShare::AllEndpoints,
    }
}

/// Every row of the bisection table for a 10K compute + 1K memory node
/// system, plus the Perlmutter baseline.
pub fn reference_machines() -> Vec<ReferenceMachine> {
    let expected = |switches, links, rack_gb: f64, global_gb: f64, reproducible| ExpectedTopology {
        switch_count: switches,
        total_links: links,
        rack_bisection_per_node: rack_gb * GB,
        global_bisection_per_node: global_gb * GB,
        rack_taper: 0.0,
        global_taper: 0.0,
        tapers_reproducible: reproducible,
    };
    let with_tapers = |mut e: ExpectedTopology, nic_gb: f64| {
        e.rack_taper = (e.rack_bisection_per_node / (nic_gb * GB)).min(1.0);
        e.global_taper = (e.global_bisection_per_node / (nic_gb * GB)).min(1.0);
        e
    };

    let mut perlmutter = disagg_dragonfly(24, 16, 6);
    perlmutter.endpoint_nic = pcie("PCIe4", 25.0);

    let mut out = vec![ReferenceMachine {
        name: "perlmutter",
        description: "Dragonfly 24 groups x 16 switches, 6 links/pair, PCIe4",
        spec: TopologySpec::Dragonfly(perlmutter),
        expected: with_tapers(expected(384, 3312, 25.0, 7.0, false), 25.0),
    }];

    let rows: [(&'static str, &'static str, u64, u64, u64, u64, f64, f64); 7] = [
        ("disagg-24x32-9pct", "Dragonfly 24x32, 4 links/pair", 24, 32, 4, 2208, 100.0, 9.0),
        ("disagg-24x32-28pct", "Dragonfly 24x32, 12 links/pair", 24, 32, 12, 6624, 100.0, 28.0),
        ("disagg-24x32-50pct", "Dragonfly 24x32, 21 links/pair", 24, 32, 21, 11592, 100.0, 50.0),
        ("disagg-24x32-100pct", "Dragonfly 24x32, 43 links/pair", 24, 32, 43, 23736, 100.0, 100.0),
        ("disagg-48x16-50pct-rack", "Dragonfly 48x16, 3 links/pair", 48, 16, 3, 6768, 50.0, 28.0),
        ("disagg-48x16-56pct", "Dragonfly 48x16, 6 links/pair", 48, 16, 6, 13536, 50.0, 56.0),
        ("disagg-48x16-100pct", "Dragonfly 48x16, 11 links/pair", 48, 16, 11, 24816, 50.0, 100.0),
    ];
    for (name, description, g, s, a, links, rack, global) in rows {
        out.push(ReferenceMachine {
            name,
            description,
            spec: TopologySpec::Dragonfly(disagg_dragonfly(g, s, a)),
            expected: with_tapers(expected(g * s, links, rack, global, true), 100.0),
        });
    }

    out.push(ReferenceMachine {
        name: "fat-tree",
        description: "Three-level fat tree, 762 leaves, 16 x 16 core",
        spec: TopologySpec::FatTree(FatTreeSpec {
            radix: 64,
            leaf_switches: 762,
            leaf_uplink_ports: 46,
            core_groups: 16,
            core_group_size: 16,
            core_down_ports_per_switch: 46,
            endpoints: 11_000,
            endpoint_nic: pcie("PCIe6", 100.0),
        }),
        expected: with_tapers(expected(1018, 11776, 100.0, 100.0, true), 100.0),
    });
    out
}

pub fn reference_machine(name: &str) -> Result<ReferenceMachine> {
    reference_machines()
        .into_iter()
        .find(|r| r.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownName {
            kind: "reference machine",
            name: name.to_string(),
        })
}
