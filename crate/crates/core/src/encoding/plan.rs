use serde::{Deserialize, Serialize};

use crate::instance::{FleetKind, Instance, NodeRef, VehicleRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrzKind {
    Electric,
    Hybrid,
}

impl TrzKind {
    pub fn fleet(self) -> FleetKind {
        match self {
            TrzKind::Electric => FleetKind::Electric,
            TrzKind::Hybrid => FleetKind::Hybrid,
        }
    }
}

/// One private car and the co-workers it picks up on the way to its entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarpoolGroup {
    /// Index into the fuel fleet; always the car owned by the driver.
    pub vehicle: usize,
    /// Employee indices in pickup order, driver first.
    pub occupants: Vec<usize>,
    /// Grey-zone entry where the car parks.
    pub entry: usize,
}

impl CarpoolGroup {
    pub fn driver(&self) -> usize {
        self.occupants[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusRoute {
    pub bus: usize,
    /// Stations in visiting order between the urban depot and the company.
    pub stations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrzRoute {
    pub kind: TrzKind,
    /// Index into the electric or hybrid fleet, according to `kind`.
    pub vehicle: usize,
    /// Entries in visiting order between the grey-zone depot and the company.
    pub entries: Vec<usize>,
}

impl TrzRoute {
    pub fn vehicle_ref(&self) -> VehicleRef {
        VehicleRef::new(self.kind.fleet(), self.vehicle)
    }
}

/// A decoded solution: who carpools, who walks to which bus stop, and every route.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    /// Sorted by vehicle index.
    pub carpool_groups: Vec<CarpoolGroup>,
    /// Station of each bus rider; `None` for carpoolers.
    pub rider_station: Vec<Option<usize>>,
    /// Used buses only, sorted by bus index.
    pub bus_routes: Vec<BusRoute>,
    /// Used grey-zone vehicles in the order they were assigned.
    pub trz_routes: Vec<TrzRoute>,
}

/// Usage indicators derived from a plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub buses: Vec<bool>,
    pub fuel: Vec<bool>,
    pub electric: Vec<bool>,
    pub hybrid: Vec<bool>,
    pub stations_visited: Vec<bool>,
    pub entries_visited: Vec<bool>,
    /// People arriving by carpool at each entry.
    pub entry_headcount: Vec<u32>,
}

impl Plan {
    pub fn riders(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rider_station
            .iter()
            .enumerate()
            .filter_map(|(e, s)| s.map(|s| (e, s)))
    }

    pub fn n_carpoolers(&self) -> usize {
        self.carpool_groups.iter().map(|g| g.occupants.len()).sum()
    }

    pub fn entry_headcounts(&self, n_entries: usize) -> Vec<u32> {
        let mut hc = vec![0u32; n_entries];
        for g in &self.carpool_groups {
            if let Some(slot) = hc.get_mut(g.entry) {
                *slot += g.occupants.len() as u32;
            }
        }
        hc
    }

    pub fn station_loads(&self, n_stations: usize) -> Vec<u32> {
        let mut load = vec![0u32; n_stations];
        for (_, s) in self.riders() {
            if let Some(slot) = load.get_mut(s) {
                *slot += 1;
            }
        }
        load
    }

    pub fn usage(&self, inst: &Instance) -> Usage {
        let mut u = Usage {
            buses: vec![false; inst.fleets.buses.len()],
            fuel: vec![false; inst.fleets.fuel.len()],
            electric: vec![false; inst.fleets.electric.len()],
            hybrid: vec![false; inst.fleets.hybrid.len()],
            stations_visited: vec![false; inst.n_stations()],
            entries_visited: vec![false; inst.n_entries()],
            entry_headcount: self.entry_headcounts(inst.n_entries()),
        };
        let mark = |flags: &mut Vec<bool>, i: usize| {
            if let Some(f) = flags.get_mut(i) {
                *f = true;
            }
        };
        for r in &self.bus_routes {
            mark(&mut u.buses, r.bus);
            for &s in &r.stations {
                mark(&mut u.stations_visited, s);
            }
        }
        for g in &self.carpool_groups {
            mark(&mut u.fuel, g.vehicle);
        }
        for r in &self.trz_routes {
            match r.kind {
                TrzKind::Electric => mark(&mut u.electric, r.vehicle),
                TrzKind::Hybrid => mark(&mut u.hybrid, r.vehicle),
            }
            for &s in &r.entries {
                mark(&mut u.entries_visited, s);
            }
        }
        u
    }

    pub fn bus_nodes(route: &BusRoute) -> Vec<NodeRef> {
        let mut nodes = Vec::with_capacity(route.stations.len() + 2);
        nodes.push(NodeRef::UrbanDepot);
        nodes.extend(route.stations.iter().map(|&s| NodeRef::Station(s)));
        nodes.push(NodeRef::Company);
        nodes
    }

    pub fn carpool_nodes(group: &CarpoolGroup) -> Vec<NodeRef> {
        let mut nodes: Vec<NodeRef> = group.occupants.iter().map(|&e| NodeRef::Employee(e)).collect();
        nodes.push(NodeRef::Entry(group.entry));
        nodes
    }

    pub fn trz_nodes(route: &TrzRoute) -> Vec<NodeRef> {
        let mut nodes = Vec::with_capacity(route.entries.len() + 2);
        nodes.push(NodeRef::TrzDepot);
        nodes.extend(route.entries.iter().map(|&s| NodeRef::Entry(s)));
        nodes.push(NodeRef::Company);
        nodes
    }

    /// Per-route node id lists for external visualisation.
    pub fn export(&self, inst: &Instance) -> crate::Result<PlanExport> {
        let ids = |nodes: Vec<NodeRef>| -> crate::Result<Vec<u32>> {
            nodes.into_iter().map(|n| inst.node_id(n)).collect()
        };
        let mut routes = Vec::new();
        for r in &self.bus_routes {
            routes.push(ExportedRoute { vehicle: VehicleRef::new(FleetKind::Bus, r.bus), nodes: ids(Self::bus_nodes(r))? });
        }
        for g in &self.carpool_groups {
            routes.push(ExportedRoute { vehicle: VehicleRef::new(FleetKind::Fuel, g.vehicle), nodes: ids(Self::carpool_nodes(g))? });
        }
        for r in &self.trz_routes {
            routes.push(ExportedRoute { vehicle: r.vehicle_ref(), nodes: ids(Self::trz_nodes(r))? });
        }
        let mut walks = Vec::new();
        for (e, s) in self.riders() {
            walks.push([inst.node_id(NodeRef::Employee(e))?, inst.node_id(NodeRef::Station(s))?]);
        }
        Ok(PlanExport { plan: self.clone(), routes, walks })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedRoute {
    pub vehicle: VehicleRef,
    pub nodes: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanExport {
    pub plan: Plan,
    pub routes: Vec<ExportedRoute>,
    /// `[home id, station id]` for every bus rider.
    pub walks: Vec<[u32; 2]>,
}
