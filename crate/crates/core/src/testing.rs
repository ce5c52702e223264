//! Small hand-checkable instances for unit tests.

use crate::instance::{Employee, Fleets, Instance, Meta, Node, Nodes, Params, Vehicle};

fn vehicle(capacity: u32, fixed_cost: f64, cost_per_km: f64, emission_per_km: f64, speed_kmh: f64) -> Vehicle {
    Vehicle { capacity, fixed_cost, cost_per_km, emission_per_km, speed_kmh }
}

/// Everything on the x axis: stations and entries at the given positions,
/// both depots at `depot_x`, the company at `company_x`. Two employees at the
/// origin, the first one owning the only car. One bus, one electric and one
/// hybrid vehicle.
pub(crate) fn line_instance(stations: &[f64], entries: &[f64], depot_x: f64, company_x: f64) -> Instance {
    let mut id = 0u32;
    let mut node = |x: f64| {
        id += 1;
        Node { id: id - 1, x, y: 0.0 }
    };
    let urban_depot = node(depot_x);
    let trz_depot = node(depot_x);
    let company = node(company_x);
    let bus_stations = stations.iter().map(|&x| node(x)).collect();
    let trz_entries = entries.iter().map(|&x| node(x)).collect();
    let employees = (0..2)
        .map(|i| {
            let n = node(0.0);
            Employee { id: n.id, x: n.x, y: n.y, owns_car: i == 0 }
        })
        .collect();
    Instance {
        nodes: Nodes { employees, bus_stations, trz_entries, urban_depot, trz_depot, company },
        fleets: Fleets {
            buses: vec![vehicle(30, 100.0, 2.0, 800.0, 30.0)],
            fuel: vec![vehicle(4, 0.0, 1.0, 180.0, 30.0)],
            electric: vec![vehicle(6, 80.0, 1.0, 0.0, 30.0)],
            hybrid: vec![vehicle(8, 60.0, 1.2, 120.0, 30.0)],
        },
        params: Params {
            theta: 1.0,
            work_start: 60.0,
            carpool_incentive: 5.0,
            battery_rate: 0.2,
            battery_capacity: 10.0,
            walk_hours_per_km: 0.2,
            timing_penalty: 1.0,
            electric_max_distance: 100.0,
            return_reserve: false,
            strict_min_occupancy: false,
        },
        meta: Meta::default(),
    }
}
