use std::fmt;

use serde::{Deserialize, Serialize};

use crate::encoding::{Plan, TrzKind};
use crate::evaluator::{propagate_battery, BatteryTrace, RouteTimes, Schedule};
use crate::instance::{FleetKind, Instance, NodeRef, VehicleRef};

const SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// A used bus leaves the urban depot once and ends at the company.
    BusRouteStructure,
    /// A bus station is on at most one bus route, once.
    StationVisitedOnce,
    /// Every employee either carpools or rides a bus, exactly once.
    EmployeePartition,
    /// Riders board at a station some bus visits.
    RiderStationServed,
    BusCapacity,
    /// A carpool starts at the home of its car's owner.
    CarpoolStart,
    /// A carpool ends at exactly one valid entry.
    CarpoolEntry,
    CarpoolCapacity,
    /// At least two occupants, only when strict occupancy is on.
    CarpoolMinOccupancy,
    /// A used grey-zone vehicle leaves its depot once and ends at the company.
    TrzRouteStructure,
    /// An entry with parked carpools is served by exactly one route; other
    /// entries are not visited.
    EntryVisitedOnce,
    ElectricRange,
    /// Urban-zone arrival times follow travel times.
    UrbanTiming,
    /// A grey-zone vehicle leaves an entry after all its carpools arrive.
    Precedence,
    /// Earliness and lateness match the company arrival.
    ArrivalDeviation,
    TrzCapacity,
    InitialCharge,
    ReturnReserve,
    BatteryLevel,
}

impl Constraint {
    /// Number of the constraint in the mathematical model.
    pub fn number(self) -> u8 {
        match self {
            Constraint::BusRouteStructure => 4,
            Constraint::StationVisitedOnce => 8,
            Constraint::EmployeePartition => 10,
            Constraint::RiderStationServed => 11,
            Constraint::BusCapacity => 15,
            Constraint::CarpoolStart => 16,
            Constraint::CarpoolEntry => 17,
            Constraint::CarpoolCapacity => 20,
            Constraint::CarpoolMinOccupancy => 20,
            Constraint::UrbanTiming => 21,
            Constraint::TrzRouteStructure => 26,
            Constraint::EntryVisitedOnce => 30,
            Constraint::ElectricRange => 31,
            Constraint::Precedence => 34,
            Constraint::ArrivalDeviation => 35,
            Constraint::TrzCapacity => 46,
            Constraint::InitialCharge => 47,
            Constraint::ReturnReserve => 48,
            Constraint::BatteryLevel => 49,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "constraint ({}) {:?}: {}", self.constraint.number(), self.constraint, self.detail)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn add(&mut self, constraint: Constraint, detail: impl Into<String>) {
        self.0.push(Violation { constraint, detail: detail.into() });
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SLACK * (1.0 + a.abs().max(b.abs()))
}

fn check_route_times(
    out: &mut Report,
    inst: &Instance,
    nodes: &[NodeRef],
    vehicle: VehicleRef,
    times: &RouteTimes,
    ready: &[f64],
    label: &str,
) {
    let timing = if vehicle.kind == FleetKind::Bus { Constraint::UrbanTiming } else { Constraint::Precedence };
    if times.arrivals.len() != nodes.len() || times.departures.len() + 1 != nodes.len() {
        out.add(timing, format!("{label}: schedule does not match the route"));
        return;
    }
    if !close(times.arrivals[0], 0.0) {
        out.add(timing, format!("{label}: first departure is not at time zero"));
    }
    for i in 0..nodes.len() - 1 {
        let Ok(leg) = inst.travel_time(nodes[i], nodes[i + 1], vehicle) else {
            out.add(timing, format!("{label}: leg {i} references an unknown node or vehicle"));
            return;
        };
        let depart = times.departures[i];
        if depart + SLACK < times.arrivals[i] {
            out.add(timing, format!("{label}: leaves {} before arriving", nodes[i]));
        }
        if let NodeRef::Entry(s) = nodes[i] {
            if depart + SLACK < ready.get(s).copied().unwrap_or(0.0) {
                out.add(Constraint::Precedence, format!("{label}: leaves {} before its carpools arrive", nodes[i]));
            }
        }
        if !close(times.arrivals[i + 1], depart + leg) {
            out.add(timing, format!("{label}: arrival at {} inconsistent with travel time", nodes[i + 1]));
        }
    }
    let at = times.company_arrival();
    let delta = inst.params.work_start;
    if times.earliness < 0.0
        || times.lateness < 0.0
        || !close(times.earliness, (delta - at).max(0.0))
        || !close(times.lateness, (at - delta).max(0.0))
    {
        out.add(Constraint::ArrivalDeviation, format!("{label}: earliness/lateness do not match arrival {at:.3}"));
    }
}

/// Every constraint the plan, its schedule or its battery traces break.
/// The list is empty exactly when the plan is feasible.
pub fn check_feasibility(plan: &Plan, schedule: &Schedule, traces: &[BatteryTrace], inst: &Instance) -> Vec<Violation> {
    let mut out = Report(Vec::new());
    let n_emp = inst.n_employees();
    let n_st = inst.n_stations();
    let n_en = inst.n_entries();
    let owners = inst.car_owners();

    // Partition of employees.
    let mut seen = vec![0u32; n_emp];
    if plan.rider_station.len() != n_emp {
        out.add(Constraint::EmployeePartition, format!("{} rider entries for {n_emp} employees", plan.rider_station.len()));
    }
    for (e, s) in plan.riders() {
        if e < n_emp {
            seen[e] += 1;
        }
        if s >= n_st {
            out.add(Constraint::RiderStationServed, format!("employee {} assigned to unknown station {}", e + 1, s + 1));
        }
    }
    for g in &plan.carpool_groups {
        for &e in &g.occupants {
            match seen.get_mut(e) {
                Some(c) => *c += 1,
                None => out.add(Constraint::EmployeePartition, format!("unknown employee {}", e + 1)),
            }
        }
    }
    for (e, &c) in seen.iter().enumerate() {
        if c != 1 {
            out.add(Constraint::EmployeePartition, format!("employee {} travels {c} times", e + 1));
        }
    }

    // Carpools.
    let mut car_used = vec![false; inst.fleets.fuel.len()];
    let mut hc = vec![0u32; n_en];
    for g in &plan.carpool_groups {
        let label = format!("car {}", g.vehicle + 1);
        let Some(car) = inst.fleets.fuel.get(g.vehicle) else {
            out.add(Constraint::CarpoolStart, format!("{label} does not exist"));
            continue;
        };
        if std::mem::replace(&mut car_used[g.vehicle], true) {
            out.add(Constraint::CarpoolStart, format!("{label} drives twice"));
        }
        if g.occupants.first() != Some(&owners[g.vehicle]) {
            out.add(Constraint::CarpoolStart, format!("{label} does not start at its owner's home"));
        }
        let mut distinct = g.occupants.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != g.occupants.len() {
            out.add(Constraint::CarpoolStart, format!("{label} picks someone up twice"));
        }
        if g.occupants.len() as u32 > car.capacity {
            out.add(Constraint::CarpoolCapacity, format!("{label} carries {} of {}", g.occupants.len(), car.capacity));
        }
        if inst.params.strict_min_occupancy && g.occupants.len() < 2 {
            out.add(Constraint::CarpoolMinOccupancy, format!("{label} drives alone"));
        }
        match hc.get_mut(g.entry) {
            Some(h) => *h += g.occupants.len() as u32,
            None => out.add(Constraint::CarpoolEntry, format!("{label} parks at unknown entry {}", g.entry + 1)),
        }
    }

    // Buses.
    let mut bus_used = vec![false; inst.fleets.buses.len()];
    let mut station_visits = vec![0u32; n_st];
    let loads = plan.station_loads(n_st);
    for r in &plan.bus_routes {
        let label = format!("bus {}", r.bus + 1);
        let Some(bus) = inst.fleets.buses.get(r.bus) else {
            out.add(Constraint::BusRouteStructure, format!("{label} does not exist"));
            continue;
        };
        if std::mem::replace(&mut bus_used[r.bus], true) {
            out.add(Constraint::BusRouteStructure, format!("{label} leaves the depot twice"));
        }
        if r.stations.is_empty() {
            out.add(Constraint::BusRouteStructure, format!("{label} is used without stations"));
        }
        let mut load = 0;
        for &s in &r.stations {
            match station_visits.get_mut(s) {
                Some(v) => {
                    *v += 1;
                    load += loads[s];
                }
                None => out.add(Constraint::BusRouteStructure, format!("{label} visits unknown station {}", s + 1)),
            }
        }
        if load > bus.capacity {
            out.add(Constraint::BusCapacity, format!("{label} carries {load} of {}", bus.capacity));
        }
    }
    for (s, &v) in station_visits.iter().enumerate() {
        if v > 1 {
            out.add(Constraint::StationVisitedOnce, format!("station {} visited {v} times", s + 1));
        }
        if v == 0 && loads[s] > 0 {
            out.add(Constraint::RiderStationServed, format!("{} riders wait at unserved station {}", loads[s], s + 1));
        }
    }

    // Grey-zone routes.
    let mut electric_used = vec![false; inst.fleets.electric.len()];
    let mut hybrid_used = vec![false; inst.fleets.hybrid.len()];
    let mut entry_visits = vec![0u32; n_en];
    for (i, r) in plan.trz_routes.iter().enumerate() {
        let label = format!("{:?} vehicle {}", r.kind, r.vehicle + 1);
        let (fleet, used) = match r.kind {
            TrzKind::Electric => (&inst.fleets.electric, &mut electric_used),
            TrzKind::Hybrid => (&inst.fleets.hybrid, &mut hybrid_used),
        };
        let Some(vehicle) = fleet.get(r.vehicle) else {
            out.add(Constraint::TrzRouteStructure, format!("{label} does not exist"));
            continue;
        };
        if std::mem::replace(&mut used[r.vehicle], true) {
            out.add(Constraint::TrzRouteStructure, format!("{label} leaves the depot twice"));
        }
        if r.entries.is_empty() {
            out.add(Constraint::TrzRouteStructure, format!("{label} is used without entries"));
        }
        let mut load = 0;
        let mut valid = true;
        for &s in &r.entries {
            match entry_visits.get_mut(s) {
                Some(v) => {
                    *v += 1;
                    load += hc[s];
                }
                None => {
                    valid = false;
                    out.add(Constraint::TrzRouteStructure, format!("{label} visits unknown entry {}", s + 1));
                }
            }
        }
        if load > vehicle.capacity {
            out.add(Constraint::TrzCapacity, format!("{label} carries {load} of {}", vehicle.capacity));
        }
        if !valid {
            continue;
        }
        check_battery(&mut out, inst, r.kind, &r.entries, traces.get(i), &label);
    }
    if traces.len() != plan.trz_routes.len() {
        out.add(Constraint::BatteryLevel, format!("{} battery traces for {} routes", traces.len(), plan.trz_routes.len()));
    }
    for s in 0..n_en {
        let (v, h) = (entry_visits[s], hc[s]);
        if v > 1 {
            out.add(Constraint::EntryVisitedOnce, format!("entry {} visited {v} times", s + 1));
        }
        if h > 0 && v == 0 {
            out.add(Constraint::EntryVisitedOnce, format!("{h} carpoolers stranded at entry {}", s + 1));
        }
        if h == 0 && v > 0 {
            out.add(Constraint::EntryVisitedOnce, format!("entry {} visited with nobody to collect", s + 1));
        }
    }

    // Timing.
    if schedule.buses.len() != plan.bus_routes.len()
        || schedule.carpools.len() != plan.carpool_groups.len()
        || schedule.trz.len() != plan.trz_routes.len()
    {
        out.add(Constraint::UrbanTiming, "schedule does not match the plan's routes");
        return out.0;
    }
    let mut ready = vec![0.0f64; n_en];
    for (g, times) in plan.carpool_groups.iter().zip(&schedule.carpools) {
        if g.vehicle >= inst.fleets.fuel.len() || g.entry >= n_en {
            continue;
        }
        let nodes = Plan::carpool_nodes(g);
        let vehicle = VehicleRef::new(FleetKind::Fuel, g.vehicle);
        if times.len() != nodes.len() || !close(times[0], 0.0) {
            out.add(Constraint::UrbanTiming, format!("car {}: schedule does not match the route", g.vehicle + 1));
            continue;
        }
        for i in 0..nodes.len() - 1 {
            match inst.travel_time(nodes[i], nodes[i + 1], vehicle) {
                Ok(leg) if close(times[i + 1], times[i] + leg) => {}
                _ => out.add(Constraint::UrbanTiming, format!("car {}: arrival at {} inconsistent", g.vehicle + 1, nodes[i + 1])),
            }
        }
        ready[g.entry] = ready[g.entry].max(times[nodes.len() - 1]);
    }
    for (r, times) in plan.bus_routes.iter().zip(&schedule.buses) {
        if r.bus < inst.fleets.buses.len() {
            let label = format!("bus {}", r.bus + 1);
            check_route_times(&mut out, inst, &Plan::bus_nodes(r), VehicleRef::new(FleetKind::Bus, r.bus), times, &[], &label);
        }
    }
    for (r, times) in plan.trz_routes.iter().zip(&schedule.trz) {
        if inst.vehicle(r.vehicle_ref()).is_ok() {
            let label = format!("{:?} vehicle {}", r.kind, r.vehicle + 1);
            check_route_times(&mut out, inst, &Plan::trz_nodes(r), r.vehicle_ref(), times, &ready, &label);
        }
    }
    out.0
}

fn check_battery(out: &mut Report, inst: &Instance, kind: TrzKind, entries: &[usize], trace: Option<&BatteryTrace>, label: &str) {
    let p = &inst.params;
    let mut length = 0.0;
    let mut prev = NodeRef::TrzDepot;
    for &s in entries {
        length += inst.dist(prev, NodeRef::Entry(s));
        prev = NodeRef::Entry(s);
    }
    length += inst.dist(prev, NodeRef::Company);
    if kind == TrzKind::Electric {
        if length > p.electric_max_distance + SLACK {
            out.add(Constraint::ElectricRange, format!("{label} drives {length:.3} km, limit {}", p.electric_max_distance));
        }
        if p.battery_rate * length > p.battery_capacity + SLACK {
            out.add(Constraint::BatteryLevel, format!("{label} needs {:.3} charge, has {}", p.battery_rate * length, p.battery_capacity));
        }
        if p.return_reserve {
            let back = inst.dist(NodeRef::Company, NodeRef::TrzDepot);
            if p.battery_rate * (length + back) > p.battery_capacity + SLACK {
                out.add(Constraint::ReturnReserve, format!("{label} cannot return to its depot"));
            }
        }
    }
    let Some(trace) = trace else { return };
    if trace.kind != kind || trace.levels.len() != entries.len() + 2 || trace.gasoline_km.len() != entries.len() + 1 {
        out.add(Constraint::BatteryLevel, format!("{label}: battery trace does not match the route"));
        return;
    }
    if !close(trace.levels[0], p.battery_capacity) {
        out.add(Constraint::InitialCharge, format!("{label} starts with {} of {}", trace.levels[0], p.battery_capacity));
    }
    if trace.levels.iter().any(|&z| z < -SLACK) {
        out.add(Constraint::BatteryLevel, format!("{label}: negative battery level"));
    }
    if kind == TrzKind::Electric && trace.gasoline_km.iter().any(|&g| g != 0.0) {
        out.add(Constraint::BatteryLevel, format!("{label}: electric vehicle burns gasoline"));
    }
    if let Ok(expected) = propagate_battery(entries, kind, inst) {
        let matches = expected.levels.iter().zip(&trace.levels).all(|(a, b)| close(*a, *b))
            && expected.gasoline_km.iter().zip(&trace.gasoline_km).all(|(a, b)| close(*a, *b));
        if !matches {
            out.add(Constraint::BatteryLevel, format!("{label}: battery trace inconsistent with consumption"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{BusRoute, CarpoolGroup, TrzRoute};
    use crate::evaluator::{battery_traces, propagate_times};
    use crate::testing::line_instance;

    fn check(plan: &Plan, inst: &Instance) -> Vec<Violation> {
        let schedule = propagate_times(plan, inst).unwrap();
        let traces: Vec<BatteryTrace> = plan
            .trz_routes
            .iter()
            .map(|r| {
                propagate_battery(&r.entries, r.kind, inst).unwrap_or_else(|_| BatteryTrace {
                    kind: r.kind,
                    levels: vec![inst.params.battery_capacity; r.entries.len() + 2],
                    gasoline_km: vec![0.0; r.entries.len() + 1],
                    distance: 0.0,
                })
            })
            .collect();
        check_feasibility(plan, &schedule, &traces, inst)
    }

    fn mixed_plan() -> Plan {
        Plan {
            carpool_groups: vec![CarpoolGroup { vehicle: 0, occupants: vec![0], entry: 0 }],
            rider_station: vec![None, Some(0)],
            bus_routes: vec![BusRoute { bus: 0, stations: vec![0] }],
            trz_routes: vec![TrzRoute { kind: TrzKind::Electric, vehicle: 0, entries: vec![0] }],
        }
    }

    #[test]
    fn feasible_plan_has_no_violations() {
        let inst = line_instance(&[2.0], &[5.0], 0.0, 10.0);
        let plan = mixed_plan();
        assert!(battery_traces(&plan, &inst).is_ok());
        assert_eq!(check(&plan, &inst), vec![]);
    }

    #[test]
    fn overfull_bus() {
        let mut inst = line_instance(&[2.0], &[5.0], 0.0, 10.0);
        inst.fleets.buses[0].capacity = 1;
        let plan = Plan {
            carpool_groups: vec![],
            rider_station: vec![Some(0), Some(0)],
            bus_routes: vec![BusRoute { bus: 0, stations: vec![0] }],
            trz_routes: vec![],
        };
        let v = check(&plan, &inst);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].constraint.number(), 15);
    }

    #[test]
    fn electric_route_too_long() {
        let mut inst = line_instance(&[2.0], &[5.0], 0.0, 10.0);
        inst.params.electric_max_distance = 9.0;
        let v = check(&mixed_plan(), &inst);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].constraint.number(), 31);
    }

    #[test]
    fn stranded_carpool_and_double_travel() {
        let inst = line_instance(&[2.0], &[5.0], 0.0, 10.0);
        let mut plan = mixed_plan();
        plan.trz_routes.clear();
        plan.rider_station[0] = Some(0);
        let numbers: Vec<u8> = check(&plan, &inst).iter().map(|v| v.constraint.number()).collect();
        assert!(numbers.contains(&30));
        assert!(numbers.contains(&10));
    }

    #[test]
    fn car_driven_by_non_owner() {
        let inst = line_instance(&[2.0], &[5.0], 0.0, 10.0);
        let mut plan = mixed_plan();
        plan.carpool_groups[0].occupants = vec![1];
        plan.rider_station = vec![Some(0), None];
        let v = check(&plan, &inst);
        assert_eq!(v.iter().map(|v| v.constraint.number()).collect::<Vec<_>>(), vec![16]);
    }

    #[test]
    fn precedence_violation_is_detected() {
        let inst = line_instance(&[2.0], &[5.0], 0.0, 10.0);
        let mut inst_far = inst.clone();
        inst_far.nodes.employees[0].x = -40.0;
        let plan = mixed_plan();
        let mut schedule = propagate_times(&plan, &inst_far).unwrap();
        // Pretend the shuttle left as soon as it arrived.
        let t = &mut schedule.trz[0];
        t.departures[1] = t.arrivals[1];
        let leg = inst_far.travel_time(NodeRef::Entry(0), NodeRef::Company, plan.trz_routes[0].vehicle_ref()).unwrap();
        t.arrivals[2] = t.departures[1] + leg;
        let at = t.arrivals[2];
        t.earliness = (inst_far.params.work_start - at).max(0.0);
        t.lateness = (at - inst_far.params.work_start).max(0.0);
        let traces = battery_traces(&plan, &inst_far).unwrap();
        let v = check_feasibility(&plan, &schedule, &traces, &inst_far);
        assert_eq!(v.iter().map(|v| v.constraint.number()).collect::<Vec<_>>(), vec![34]);
    }

    #[test]
    fn strict_occupancy_flags_solo_driver() {
        let mut inst = line_instance(&[2.0], &[5.0], 0.0, 10.0);
        inst.params.strict_min_occupancy = true;
        let v = check(&mixed_plan(), &inst);
        assert_eq!(v.iter().map(|v| v.constraint).collect::<Vec<_>>(), vec![Constraint::CarpoolMinOccupancy]);
    }
}
