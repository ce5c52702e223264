use serde::{Deserialize, Serialize};

use crate::encoding::Plan;
use crate::error::Result;
use crate::instance::{FleetKind, Instance, NodeRef, VehicleRef};

/// Times along one route, in minutes after system time zero.
///
/// `arrivals[i]` and `departures[i]` refer to the i-th node of the route;
/// the two differ only where a grey-zone vehicle waits for carpools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteTimes {
    pub arrivals: Vec<f64>,
    pub departures: Vec<f64>,
    /// Minutes the vehicle reaches the company before work starts.
    pub earliness: f64,
    /// Minutes the vehicle reaches the company after work starts.
    pub lateness: f64,
}

impl RouteTimes {
    pub fn company_arrival(&self) -> f64 {
        *self.arrivals.last().expect("route has a final node")
    }

    pub fn waits(&self) -> impl Iterator<Item = f64> + '_ {
        self.departures.iter().zip(&self.arrivals).map(|(d, a)| d - a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Aligned with `Plan::bus_routes`.
    pub buses: Vec<RouteTimes>,
    /// Arrival at each pickup home and finally at the entry; aligned with
    /// `Plan::carpool_groups`.
    pub carpools: Vec<Vec<f64>>,
    /// Aligned with `Plan::trz_routes`.
    pub trz: Vec<RouteTimes>,
}

fn drive(inst: &Instance, nodes: &[NodeRef], vehicle: VehicleRef, ready: impl Fn(NodeRef) -> f64) -> Result<RouteTimes> {
    let mut arrivals = Vec::with_capacity(nodes.len());
    let mut departures = Vec::with_capacity(nodes.len());
    let mut clock = 0.0;
    for (i, &node) in nodes.iter().enumerate() {
        if i > 0 {
            clock += inst.travel_time(nodes[i - 1], node, vehicle)?;
        } else {
            inst.coords(node)?;
        }
        arrivals.push(clock);
        if i + 1 < nodes.len() {
            clock = clock.max(ready(node));
            departures.push(clock);
        }
    }
    let delta = inst.params.work_start;
    let at_company = *arrivals.last().unwrap_or(&0.0);
    Ok(RouteTimes {
        arrivals,
        departures,
        earliness: (delta - at_company).max(0.0),
        lateness: (at_company - delta).max(0.0),
    })
}

/// Arrival times of every vehicle. All vehicles leave their first node at
/// time zero; a grey-zone vehicle leaves an entry only once every carpool
/// parking there has arrived.
pub fn propagate_times(plan: &Plan, inst: &Instance) -> Result<Schedule> {
    let buses = plan
        .bus_routes
        .iter()
        .map(|r| drive(inst, &Plan::bus_nodes(r), VehicleRef::new(FleetKind::Bus, r.bus), |_| 0.0))
        .collect::<Result<Vec<_>>>()?;

    let carpools = plan
        .carpool_groups
        .iter()
        .map(|g| Ok(drive(inst, &Plan::carpool_nodes(g), VehicleRef::new(FleetKind::Fuel, g.vehicle), |_| 0.0)?.arrivals))
        .collect::<Result<Vec<_>>>()?;

    let mut ready = vec![0.0f64; inst.n_entries()];
    for (g, times) in plan.carpool_groups.iter().zip(&carpools) {
        if let Some(slot) = ready.get_mut(g.entry) {
            *slot = slot.max(*times.last().expect("carpool route ends at its entry"));
        }
    }
    let trz = plan
        .trz_routes
        .iter()
        .map(|r| {
            drive(inst, &Plan::trz_nodes(r), r.vehicle_ref(), |node| match node {
                NodeRef::Entry(s) => ready.get(s).copied().unwrap_or(0.0),
                _ => 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Schedule { buses, carpools, trz })
}
