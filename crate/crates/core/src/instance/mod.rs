//! Problem data: employees, stations, the four fleets and the model parameters.
//!
//! An [`Instance`] is immutable once built. Distances are Euclidean over planar
//! coordinates in kilometres; travel times are derived from them and the speed
//! of the vehicle that drives the arc, so there is one source of truth for both.

mod generate;

pub use generate::{generate_instance, Counts, CoordBox, FleetRanges, InstanceSpec, ParamRanges, Range, BENCHMARK_SHAPES};

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Employee {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    /// Membership in the set of car owners who may drive a carpool.
    pub owns_car: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nodes {
    pub employees: Vec<Employee>,
    pub bus_stations: Vec<Node>,
    pub trz_entries: Vec<Node>,
    pub urban_depot: Node,
    pub trz_depot: Node,
    pub company: Node,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    /// Persons.
    pub capacity: u32,
    /// Money per day the vehicle is used.
    pub fixed_cost: f64,
    /// Driver cost, money per km.
    pub cost_per_km: f64,
    /// g CO2 per km.
    pub emission_per_km: f64,
    pub speed_kmh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fleets {
    pub buses: Vec<Vehicle>,
    /// Private cars; car `g` belongs to the `g`-th car owner in employee order.
    pub fuel: Vec<Vehicle>,
    pub electric: Vec<Vehicle>,
    pub hybrid: Vec<Vehicle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Dissatisfaction per walked km; negative values express satisfaction.
    pub theta: f64,
    /// Work start time, minutes after system time zero.
    pub work_start: f64,
    /// Carpool incentive per fuel vehicle.
    pub carpool_incentive: f64,
    /// Battery consumption, charge units per km.
    pub battery_rate: f64,
    /// Battery capacity, charge units.
    pub battery_capacity: f64,
    /// Walking pace, hours per km.
    pub walk_hours_per_km: f64,
    /// Penalty per minute of early or late arrival at the company.
    pub timing_penalty: f64,
    /// Maximum route distance of an electric vehicle, km.
    pub electric_max_distance: f64,
    /// Require enough charge at the company to drive back to the grey-zone depot.
    #[serde(default)]
    pub return_reserve: bool,
    /// Require at least two occupants in every used carpool vehicle.
    #[serde(default)]
    pub strict_min_occupancy: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub nodes: Nodes,
    pub fleets: Fleets,
    pub params: Params,
    #[serde(default)]
    pub meta: Meta,
}

/// Address of a node inside an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum NodeRef {
    Employee(usize),
    Station(usize),
    Entry(usize),
    UrbanDepot,
    TrzDepot,
    Company,
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Employee(i) => write!(f, "employee {}", i + 1),
            NodeRef::Station(i) => write!(f, "bus station {}", i + 1),
            NodeRef::Entry(i) => write!(f, "entry {}", i + 1),
            NodeRef::UrbanDepot => f.write_str("urban depot"),
            NodeRef::TrzDepot => f.write_str("grey-zone depot"),
            NodeRef::Company => f.write_str("company"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FleetKind {
    Bus,
    Fuel,
    Electric,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VehicleRef {
    pub kind: FleetKind,
    pub index: usize,
}

impl VehicleRef {
    pub fn new(kind: FleetKind, index: usize) -> Self {
        Self { kind, index }
    }
}

impl fmt::Display for VehicleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} vehicle {}", self.kind, self.index + 1)
    }
}

/// One invariant an instance fails, addressed by field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceViolation {
    pub path: String,
    pub message: String,
}

impl Instance {
    pub fn n_employees(&self) -> usize {
        self.nodes.employees.len()
    }

    pub fn n_stations(&self) -> usize {
        self.nodes.bus_stations.len()
    }

    pub fn n_entries(&self) -> usize {
        self.nodes.trz_entries.len()
    }

    pub fn fleet(&self, kind: FleetKind) -> &[Vehicle] {
        match kind {
            FleetKind::Bus => &self.fleets.buses,
            FleetKind::Fuel => &self.fleets.fuel,
            FleetKind::Electric => &self.fleets.electric,
            FleetKind::Hybrid => &self.fleets.hybrid,
        }
    }

    pub fn vehicle(&self, v: VehicleRef) -> Result<&Vehicle> {
        self.fleet(v.kind)
            .get(v.index)
            .ok_or_else(|| Error::UnknownVehicle(v.to_string()))
    }

    /// Employee indices of the car owners, in employee order. Car `g` of the
    /// fuel fleet belongs to `car_owners()[g]`.
    pub fn car_owners(&self) -> Vec<usize> {
        self.nodes
            .employees
            .iter()
            .enumerate()
            .filter(|(_, e)| e.owns_car)
            .map(|(i, _)| i)
            .collect()
    }

    /// Maps each employee to the index of the car they own, if any.
    pub fn car_of_employee(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n_employees()];
        for (g, e) in self.car_owners().into_iter().enumerate() {
            out[e] = Some(g);
        }
        out
    }

    pub fn coords(&self, node: NodeRef) -> Result<(f64, f64)> {
        let n = &self.nodes;
        let found = match node {
            NodeRef::Employee(i) => n.employees.get(i).map(|e| (e.x, e.y)),
            NodeRef::Station(i) => n.bus_stations.get(i).map(|s| (s.x, s.y)),
            NodeRef::Entry(i) => n.trz_entries.get(i).map(|s| (s.x, s.y)),
            NodeRef::UrbanDepot => Some((n.urban_depot.x, n.urban_depot.y)),
            NodeRef::TrzDepot => Some((n.trz_depot.x, n.trz_depot.y)),
            NodeRef::Company => Some((n.company.x, n.company.y)),
        };
        found.ok_or_else(|| Error::UnknownNode(node.to_string()))
    }

    pub fn node_id(&self, node: NodeRef) -> Result<u32> {
        let n = &self.nodes;
        let found = match node {
            NodeRef::Employee(i) => n.employees.get(i).map(|e| e.id),
            NodeRef::Station(i) => n.bus_stations.get(i).map(|s| s.id),
            NodeRef::Entry(i) => n.trz_entries.get(i).map(|s| s.id),
            NodeRef::UrbanDepot => Some(n.urban_depot.id),
            NodeRef::TrzDepot => Some(n.trz_depot.id),
            NodeRef::Company => Some(n.company.id),
        };
        found.ok_or_else(|| Error::UnknownNode(node.to_string()))
    }

    /// Euclidean distance in km.
    pub fn distance(&self, a: NodeRef, b: NodeRef) -> Result<f64> {
        let (ax, ay) = self.coords(a)?;
        let (bx, by) = self.coords(b)?;
        Ok((ax - bx).hypot(ay - by))
    }

    /// Distance along `a -> b` for nodes the caller knows exist.
    pub(crate) fn dist(&self, a: NodeRef, b: NodeRef) -> f64 {
        self.distance(a, b).expect("node reference inside instance")
    }

    /// Total length of the polyline through `nodes`.
    pub(crate) fn path_length(&self, nodes: &[NodeRef]) -> f64 {
        nodes.windows(2).map(|w| self.dist(w[0], w[1])).sum()
    }

    /// Minutes needed by vehicle `k` to drive from `i` to `j`.
    pub fn travel_time(&self, i: NodeRef, j: NodeRef, k: VehicleRef) -> Result<f64> {
        let speed = self.vehicle(k)?.speed_kmh;
        let d = self.distance(i, j)?;
        if d == 0.0 {
            return Ok(0.0);
        }
        Ok(60.0 * d / speed)
    }

    /// Lists every violated invariant; empty when the instance is well formed.
    pub fn validate(&self) -> Vec<InstanceViolation> {
        let mut report = Vec::new();
        let mut push = |path: String, message: String| report.push(InstanceViolation { path, message });
        let n = &self.nodes;
        let f = &self.fleets;
        let p = &self.params;

        let owners = self.car_owners().len();
        if f.fuel.len() != owners {
            push(
                "fleets.fuel".into(),
                format!("{} fuel vehicles but {} car owners; one car per owner required", f.fuel.len(), owners),
            );
        }
        if n.bus_stations.is_empty() {
            push("nodes.bus_stations".into(), "at least one bus station is required".into());
        }
        if f.buses.is_empty() {
            push("fleets.buses".into(), "at least one bus is required".into());
        }
        if !f.fuel.is_empty() && n.trz_entries.is_empty() {
            push("nodes.trz_entries".into(), "carpool vehicles need at least one grey-zone entry".into());
        }

        let mut seen: HashMap<u32, String> = HashMap::new();
        let mut check_id = |id: u32, path: String, push: &mut dyn FnMut(String, String)| {
            if let Some(first) = seen.get(&id) {
                push(path, format!("duplicate node id {id} (already used by {first})"));
            } else {
                seen.insert(id, path);
            }
        };
        let coord_ok = |x: f64, y: f64, path: String, push: &mut dyn FnMut(String, String)| {
            if !x.is_finite() || !y.is_finite() {
                push(path, "coordinates must be finite".into());
            }
        };
        for (i, e) in n.employees.iter().enumerate() {
            check_id(e.id, format!("nodes.employees[{i}]"), &mut push);
            coord_ok(e.x, e.y, format!("nodes.employees[{i}]"), &mut push);
        }
        for (i, s) in n.bus_stations.iter().enumerate() {
            check_id(s.id, format!("nodes.bus_stations[{i}]"), &mut push);
            coord_ok(s.x, s.y, format!("nodes.bus_stations[{i}]"), &mut push);
        }
        for (i, s) in n.trz_entries.iter().enumerate() {
            check_id(s.id, format!("nodes.trz_entries[{i}]"), &mut push);
            coord_ok(s.x, s.y, format!("nodes.trz_entries[{i}]"), &mut push);
        }
        for (name, s) in [("urban_depot", &n.urban_depot), ("trz_depot", &n.trz_depot), ("company", &n.company)] {
            check_id(s.id, format!("nodes.{name}"), &mut push);
            coord_ok(s.x, s.y, format!("nodes.{name}"), &mut push);
        }

        for (fleet, vehicles) in [("buses", &f.buses), ("fuel", &f.fuel), ("electric", &f.electric), ("hybrid", &f.hybrid)] {
            for (i, v) in vehicles.iter().enumerate() {
                let path = format!("fleets.{fleet}[{i}]");
                if v.capacity < 1 {
                    push(format!("{path}.capacity"), "capacity must be at least 1".into());
                }
                if !(v.speed_kmh.is_finite() && v.speed_kmh > 0.0) {
                    push(format!("{path}.speed_kmh"), "speed must be positive and finite".into());
                }
                for (field, value) in [
                    ("fixed_cost", v.fixed_cost),
                    ("cost_per_km", v.cost_per_km),
                    ("emission_per_km", v.emission_per_km),
                ] {
                    if !(value.is_finite() && value >= 0.0) {
                        push(format!("{path}.{field}"), "must be finite and non-negative".into());
                    }
                }
                if fleet == "fuel" && v.fixed_cost != 0.0 {
                    push(format!("{path}.fixed_cost"), "private cars carry no fixed cost".into());
                }
            }
        }

        if !(p.work_start.is_finite() && p.work_start > 0.0) {
            push("params.work_start".into(), "work start must be positive".into());
        }
        if !p.theta.is_finite() {
            push("params.theta".into(), "must be finite".into());
        }
        for (field, value) in [
            ("carpool_incentive", p.carpool_incentive),
            ("battery_rate", p.battery_rate),
            ("battery_capacity", p.battery_capacity),
            ("walk_hours_per_km", p.walk_hours_per_km),
            ("timing_penalty", p.timing_penalty),
            ("electric_max_distance", p.electric_max_distance),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                push(format!("params.{field}"), "must be finite and non-negative".into());
            }
        }
        if !(f.electric.is_empty() && f.hybrid.is_empty()) && !(p.battery_capacity > 0.0) {
            push(
                "params.battery_capacity".into(),
                "battery capacity Qe must be positive when electric or hybrid vehicles exist".into(),
            );
        }
        report
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Copy of this instance whose carpool fleet is truncated to the first
    /// `size` car owners and their cars.
    pub fn with_carpool_fleet(&self, size: usize) -> Result<Instance> {
        let owners = self.car_owners();
        if size > owners.len() {
            return Err(Error::InvalidSpec {
                field: "carpool_fleet_size",
                reason: format!("{size} exceeds the {} car owners of the instance", owners.len()),
            });
        }
        let mut out = self.clone();
        for &e in &owners[size..] {
            out.nodes.employees[e].owns_car = false;
        }
        out.fleets.fuel.truncate(size);
        Ok(out)
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json { path: path.into(), source })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Instance {
        generate_instance(&InstanceSpec::benchmark(1, 7)).unwrap()
    }

    #[test]
    fn travel_time_from_distance_and_speed() {
        let mut inst = tiny();
        inst.nodes.urban_depot.x = 0.0;
        inst.nodes.urban_depot.y = 0.0;
        inst.nodes.bus_stations[0].x = 6.0;
        inst.nodes.bus_stations[0].y = 8.0;
        inst.fleets.buses[0].speed_kmh = 30.0;
        let bus = VehicleRef::new(FleetKind::Bus, 0);
        let t = inst.travel_time(NodeRef::UrbanDepot, NodeRef::Station(0), bus).unwrap();
        assert!((t - 20.0).abs() < 1e-12);
        assert_eq!(inst.travel_time(NodeRef::Station(0), NodeRef::Station(0), bus).unwrap(), 0.0);
    }

    #[test]
    fn travel_time_rejects_unknown_refs() {
        let inst = tiny();
        let bus = VehicleRef::new(FleetKind::Bus, 0);
        assert!(matches!(
            inst.travel_time(NodeRef::Station(99), NodeRef::Company, bus),
            Err(Error::UnknownNode(_))
        ));
        assert!(matches!(
            inst.travel_time(NodeRef::Company, NodeRef::Company, VehicleRef::new(FleetKind::Bus, 5)),
            Err(Error::UnknownVehicle(_))
        ));
    }

    #[test]
    fn travel_time_is_symmetric() {
        let inst = generate_instance(&InstanceSpec::benchmark(5, 3)).unwrap();
        let mut nodes: Vec<NodeRef> = (0..inst.n_employees()).map(NodeRef::Employee).collect();
        nodes.extend((0..inst.n_stations()).map(NodeRef::Station));
        nodes.extend((0..inst.n_entries()).map(NodeRef::Entry));
        nodes.extend([NodeRef::UrbanDepot, NodeRef::TrzDepot, NodeRef::Company]);
        let hybrid = VehicleRef::new(FleetKind::Hybrid, 0);
        let mut count = 0;
        for (a, i) in nodes.iter().enumerate() {
            for j in nodes.iter().skip(a) {
                let ij = inst.travel_time(*i, *j, hybrid).unwrap();
                let ji = inst.travel_time(*j, *i, hybrid).unwrap();
                assert_eq!(ij, ji);
                count += 1;
            }
        }
        assert!(count >= 100);
    }

    #[test]
    fn valid_instance_has_empty_report() {
        assert!(tiny().validate().is_empty());
    }

    #[test]
    fn zero_battery_with_electric_fleet_is_reported() {
        let mut inst = tiny();
        inst.params.battery_capacity = 0.0;
        let report = inst.validate();
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].path, "params.battery_capacity");
    }

    #[test]
    fn duplicate_node_id_is_reported() {
        let mut inst = tiny();
        let dup = inst.nodes.employees[0].id;
        inst.nodes.bus_stations[1].id = dup;
        let report = inst.validate();
        assert_eq!(report.len(), 1);
        assert!(report[0].message.contains(&dup.to_string()), "{:?}", report);
    }

    #[test]
    fn fleet_owner_mismatch_is_reported() {
        let mut inst = tiny();
        inst.fleets.fuel.pop();
        let report = inst.validate();
        assert!(report.iter().any(|v| v.path == "fleets.fuel"));
    }

    #[test]
    fn carpool_truncation_keeps_first_owners() {
        let inst = tiny();
        let owners = inst.car_owners();
        let cut = inst.with_carpool_fleet(1).unwrap();
        assert_eq!(cut.car_owners(), vec![owners[0]]);
        assert_eq!(cut.fleets.fuel.len(), 1);
        assert!(cut.validate().is_empty());
        assert!(inst.with_carpool_fleet(owners.len() + 1).is_err());
    }
}
