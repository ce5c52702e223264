use serde::{Deserialize, Serialize};

use crate::encoding::{Plan, TrzKind, TrzRoute};
use crate::error::{Error, Result};
use crate::instance::{Instance, NodeRef};

/// Rounding slack when comparing charge and distances.
const SLACK: f64 = 1e-9;

/// Battery level at every node of a grey-zone route and gasoline km per arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryTrace {
    pub kind: TrzKind,
    /// Charge on arrival at each node, starting full at the depot.
    pub levels: Vec<f64>,
    /// Gasoline-driven km of each arc; all zero for electric vehicles.
    pub gasoline_km: Vec<f64>,
    pub distance: f64,
}

impl BatteryTrace {
    pub fn total_gasoline_km(&self) -> f64 {
        self.gasoline_km.iter().sum()
    }

    pub fn final_level(&self) -> f64 {
        *self.levels.last().expect("trace starts with a full battery")
    }
}

/// Battery levels along the grey-zone route through `entries`.
///
/// Electric vehicles fail with [`Error::RangeViolation`] when the charge would
/// go negative, the route exceeds the electric range, or the return reserve
/// is enabled and cannot be met. Hybrids run on battery first and cover the
/// rest with gasoline. A route without entries is never driven.
pub fn propagate_battery(entries: &[usize], kind: TrzKind, inst: &Instance) -> Result<BatteryTrace> {
    let p = &inst.params;
    let r = p.battery_rate;
    let mut levels = vec![p.battery_capacity];
    let mut gasoline_km = Vec::new();
    if entries.is_empty() {
        return Ok(BatteryTrace { kind, levels, gasoline_km, distance: 0.0 });
    }

    let mut nodes = vec![NodeRef::TrzDepot];
    nodes.extend(entries.iter().map(|&s| NodeRef::Entry(s)));
    nodes.push(NodeRef::Company);
    let mut z = p.battery_capacity;
    let mut distance = 0.0;
    for pair in nodes.windows(2) {
        let d = inst.distance(pair[0], pair[1])?;
        distance += d;
        match kind {
            TrzKind::Electric => {
                z -= r * d;
                if z < -SLACK {
                    return Err(Error::RangeViolation(format!("battery runs out before {}", pair[1])));
                }
                z = z.max(0.0);
                gasoline_km.push(0.0);
            }
            TrzKind::Hybrid => {
                let dg = if r > 0.0 { (d - z / r).max(0.0) } else { 0.0 };
                gasoline_km.push(dg);
                z = (z - r * d).max(0.0);
            }
        }
        levels.push(z);
    }

    if kind == TrzKind::Electric && distance > p.electric_max_distance + SLACK {
        return Err(Error::RangeViolation(format!(
            "route of {distance:.3} km exceeds the electric limit of {} km",
            p.electric_max_distance
        )));
    }
    if p.return_reserve {
        let back = inst.distance(NodeRef::Company, NodeRef::TrzDepot)?;
        let back_gasoline = match kind {
            TrzKind::Electric => 0.0,
            TrzKind::Hybrid if r > 0.0 => (back - z / r).max(0.0),
            TrzKind::Hybrid => 0.0,
        };
        if z + SLACK < r * (back - back_gasoline) {
            return Err(Error::RangeViolation(format!(
                "{z:.3} charge left at the company, {:.3} needed to return",
                r * back
            )));
        }
    }
    Ok(BatteryTrace { kind, levels, gasoline_km, distance })
}

/// Traces of every grey-zone route of `plan`, in route order.
pub fn battery_traces(plan: &Plan, inst: &Instance) -> Result<Vec<BatteryTrace>> {
    plan.trz_routes
        .iter()
        .map(|r: &TrzRoute| propagate_battery(&r.entries, r.kind, inst))
        .collect()
}
