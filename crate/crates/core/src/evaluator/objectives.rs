use crate::encoding::{Plan, TrzKind};
use crate::evaluator::{BatteryTrace, Schedule};
use crate::instance::{Instance, NodeRef};

/// Operating cost: distance and fixed costs of buses and grey-zone vehicles,
/// plus the incentive for every car left at home.
pub fn objective_cost(plan: &Plan, inst: &Instance) -> f64 {
    let mut total = 0.0;
    for r in &plan.bus_routes {
        let v = &inst.fleets.buses[r.bus];
        total += v.cost_per_km * inst.path_length(&Plan::bus_nodes(r)) + v.fixed_cost;
    }
    for r in &plan.trz_routes {
        let v = match r.kind {
            TrzKind::Electric => &inst.fleets.electric[r.vehicle],
            TrzKind::Hybrid => &inst.fleets.hybrid[r.vehicle],
        };
        total += v.cost_per_km * inst.path_length(&Plan::trz_nodes(r)) + v.fixed_cost;
    }
    let unused_cars = inst.fleets.fuel.len() - plan.carpool_groups.len();
    total + inst.params.carpool_incentive * unused_cars as f64
}

/// Walking of bus riders plus the penalty on early and late arrivals.
pub fn objective_satisfaction(plan: &Plan, schedule: &Schedule, inst: &Instance) -> f64 {
    let p = &inst.params;
    let walk: f64 = plan
        .riders()
        .map(|(e, s)| p.theta * p.walk_hours_per_km * inst.dist(NodeRef::Employee(e), NodeRef::Station(s)))
        .sum();
    let deviation: f64 = schedule
        .buses
        .iter()
        .chain(&schedule.trz)
        .map(|t| t.earliness + t.lateness)
        .sum();
    walk + p.timing_penalty * deviation
}

/// Grams of CO2 from buses, carpool cars, and hybrids running on gasoline.
pub fn objective_emissions(plan: &Plan, traces: &[BatteryTrace], inst: &Instance) -> f64 {
    let mut total = 0.0;
    for r in &plan.bus_routes {
        total += inst.fleets.buses[r.bus].emission_per_km * inst.path_length(&Plan::bus_nodes(r));
    }
    for g in &plan.carpool_groups {
        total += inst.fleets.fuel[g.vehicle].emission_per_km * inst.path_length(&Plan::carpool_nodes(g));
    }
    for (r, t) in plan.trz_routes.iter().zip(traces) {
        if r.kind == TrzKind::Hybrid {
            total += inst.fleets.hybrid[r.vehicle].emission_per_km * t.total_gasoline_km();
        }
    }
    total
}
