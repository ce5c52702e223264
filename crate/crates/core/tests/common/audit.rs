//! Straight-line objective evaluation of a plan, written against the raw
//! instance data only: coordinates, fleet attributes and parameters. It shares
//! no helpers with the library's evaluator.

use greyzone::encoding::{Plan, TrzKind};
use greyzone::instance::{Instance, Node};

type Pt = (f64, f64);

fn at(n: &Node) -> Pt {
    (n.x, n.y)
}

fn km(a: Pt, b: Pt) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn length(points: &[Pt]) -> f64 {
    let mut total = 0.0;
    for i in 1..points.len() {
        total += km(points[i - 1], points[i]);
    }
    total
}

fn home(inst: &Instance, e: usize) -> Pt {
    (inst.nodes.employees[e].x, inst.nodes.employees[e].y)
}

/// `[f1, f2, f3]` of `plan`.
pub fn audit(plan: &Plan, inst: &Instance) -> [f64; 3] {
    let p = &inst.params;
    let n = &inst.nodes;
    let depot = at(&n.urban_depot);
    let trz_depot = at(&n.trz_depot);
    let company = at(&n.company);

    let mut f1 = 0.0;
    let mut f2 = 0.0;
    let mut f3 = 0.0;

    // Buses.
    for r in &plan.bus_routes {
        let bus = &inst.fleets.buses[r.bus];
        let mut pts = vec![depot];
        for &s in &r.stations {
            pts.push(at(&n.bus_stations[s]));
        }
        pts.push(company);
        let d = length(&pts);
        f1 += bus.cost_per_km * d + bus.fixed_cost;
        f3 += bus.emission_per_km * d;
        let arrive = 60.0 * d / bus.speed_kmh;
        f2 += p.timing_penalty * ((p.work_start - arrive).max(0.0) + (arrive - p.work_start).max(0.0));
    }

    // Walking riders.
    for (e, s) in plan.rider_station.iter().enumerate() {
        if let Some(s) = s {
            f2 += p.theta * p.walk_hours_per_km * km(home(inst, e), at(&n.bus_stations[*s]));
        }
    }

    // Carpools, and when each entry has all its carpools in.
    let mut ready = vec![0.0f64; n.trz_entries.len()];
    for g in &plan.carpool_groups {
        let car = &inst.fleets.fuel[g.vehicle];
        let mut pts: Vec<Pt> = g.occupants.iter().map(|&e| home(inst, e)).collect();
        pts.push(at(&n.trz_entries[g.entry]));
        let d = length(&pts);
        f3 += car.emission_per_km * d;
        ready[g.entry] = ready[g.entry].max(60.0 * d / car.speed_kmh);
    }
    let unused = inst.fleets.fuel.len() - plan.carpool_groups.len();
    f1 += p.carpool_incentive * unused as f64;

    // Grey-zone vehicles.
    for r in &plan.trz_routes {
        let v = match r.kind {
            TrzKind::Electric => &inst.fleets.electric[r.vehicle],
            TrzKind::Hybrid => &inst.fleets.hybrid[r.vehicle],
        };
        let mut pts = vec![trz_depot];
        for &s in &r.entries {
            pts.push(at(&n.trz_entries[s]));
        }
        pts.push(company);
        let d = length(&pts);
        f1 += v.cost_per_km * d + v.fixed_cost;

        let mut clock = 0.0;
        for (i, &s) in r.entries.iter().enumerate() {
            clock += 60.0 * km(pts[i], pts[i + 1]) / v.speed_kmh;
            clock = clock.max(ready[s]);
        }
        clock += 60.0 * km(pts[pts.len() - 2], company) / v.speed_kmh;
        f2 += p.timing_penalty * ((p.work_start - clock).max(0.0) + (clock - p.work_start).max(0.0));

        if r.kind == TrzKind::Hybrid && !r.entries.is_empty() {
            let mut charge = p.battery_capacity;
            let mut gasoline = 0.0;
            for i in 1..pts.len() {
                let leg = km(pts[i - 1], pts[i]);
                let electric_km = if p.battery_rate > 0.0 { leg.min(charge / p.battery_rate) } else { leg };
                charge -= p.battery_rate * electric_km;
                gasoline += leg - electric_km;
            }
            f3 += v.emission_per_km * gasoline;
        }
    }
    [f1, f2, f3]
}
