//! Genotype -> plan with deterministic repair, and the inverse encoding.
//!
//! Decoding order: carpool groups, their entries, grey-zone routes (which may
//! send carpools back to the bus when an entry cannot be served), then bus
//! rider stations and bus routes. Every output satisfies the feasibility
//! checker; the repairs are:
//!
//! * carpool segment over capacity: trailing occupants ride the bus;
//! * segment without a car owner: everyone rides the bus;
//! * bus over capacity: trailing stations move to the next bus, leftovers are
//!   packed onto buses with room, and riders that still do not fit walk to the
//!   nearest station served by a bus with a free seat;
//! * grey-zone route over capacity or range: trailing entries move to the next
//!   route; an entry no vehicle can take sends its carpools back to the bus.

use crate::encoding::{
    assign_entries, decode_assignment_array, decode_carpool_array_with, decode_route_array, BusRoute, CarpoolGroup, Genotype,
    GenotypeShape, Plan, TrzKind, TrzRoute,
};
use crate::error::{BindingResource, Error, Result};
use crate::instance::{Instance, NodeRef, Vehicle};

/// Length of the grey-zone route through `entries`, depot to company.
pub(crate) fn route_length(inst: &Instance, entries: &[usize]) -> f64 {
    let mut prev = NodeRef::TrzDepot;
    let mut total = 0.0;
    for &s in entries {
        total += inst.dist(prev, NodeRef::Entry(s));
        prev = NodeRef::Entry(s);
    }
    total + inst.dist(prev, NodeRef::Company)
}

fn headcount(entries: &[usize], hc: &[u32]) -> u32 {
    entries.iter().map(|&s| hc[s]).sum()
}

/// Whether `vehicle`, driven electrically, can serve `entries`: seats, range
/// limit, charge, and the return reserve when it is enabled.
pub(crate) fn electric_ok(inst: &Instance, entries: &[usize], hc: &[u32], vehicle: &Vehicle) -> bool {
    if headcount(entries, hc) > vehicle.capacity {
        return false;
    }
    let p = &inst.params;
    let length = route_length(inst, entries);
    if length > p.electric_max_distance || p.battery_rate * length > p.battery_capacity {
        return false;
    }
    if p.return_reserve {
        let back = inst.dist(NodeRef::Company, NodeRef::TrzDepot);
        if p.battery_rate * (length + back) > p.battery_capacity {
            return false;
        }
    }
    true
}

/// Next unassigned electric and hybrid vehicle.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct TrzCursor {
    pub electric: usize,
    pub hybrid: usize,
}

impl TrzCursor {
    pub fn advance(&mut self, kind: TrzKind) {
        match kind {
            TrzKind::Electric => self.electric += 1,
            TrzKind::Hybrid => self.hybrid += 1,
        }
    }
}

/// Vehicle for a new grey-zone route: the next electric one if it can serve the
/// route, otherwise the next hybrid one if it has the seats.
pub(crate) fn pick_trz_vehicle(inst: &Instance, entries: &[usize], hc: &[u32], cursor: &TrzCursor) -> Option<(TrzKind, usize)> {
    if let Some(v) = inst.fleets.electric.get(cursor.electric) {
        if electric_ok(inst, entries, hc, v) {
            return Some((TrzKind::Electric, cursor.electric));
        }
    }
    let v = inst.fleets.hybrid.get(cursor.hybrid)?;
    (headcount(entries, hc) <= v.capacity).then_some((TrzKind::Hybrid, cursor.hybrid))
}

/// Builds grey-zone routes from the decoded segments. Returns the routes and
/// the entries no vehicle could take.
fn route_trz(inst: &Instance, segments: Vec<Vec<usize>>, hc: &[u32]) -> (Vec<TrzRoute>, Vec<usize>) {
    let mut cursor = TrzCursor::default();
    let mut routes: Vec<TrzRoute> = Vec::new();
    let mut carry: Vec<usize> = Vec::new();
    for segment in segments {
        let mut stops = std::mem::take(&mut carry);
        stops.extend(segment);
        if stops.is_empty() {
            continue;
        }
        let mut keep = stops.len();
        let mut pick = None;
        while keep > 0 {
            pick = pick_trz_vehicle(inst, &stops[..keep], hc, &cursor);
            if pick.is_some() {
                break;
            }
            keep -= 1;
        }
        match pick {
            Some((kind, vehicle)) => {
                cursor.advance(kind);
                carry = stops.split_off(keep);
                routes.push(TrzRoute { kind, vehicle, entries: stops });
            }
            None => carry = stops,
        }
    }

    let mut unplaced = Vec::new();
    for s in carry {
        let fits = |r: &TrzRoute| {
            let mut entries = r.entries.clone();
            entries.push(s);
            match r.kind {
                TrzKind::Electric => electric_ok(inst, &entries, hc, &inst.fleets.electric[r.vehicle]),
                TrzKind::Hybrid => headcount(&entries, hc) <= inst.fleets.hybrid[r.vehicle].capacity,
            }
        };
        if let Some(r) = routes.iter_mut().find(|r| fits(r)) {
            r.entries.push(s);
        } else if let Some((kind, vehicle)) = pick_trz_vehicle(inst, &[s], hc, &cursor) {
            cursor.advance(kind);
            routes.push(TrzRoute { kind, vehicle, entries: vec![s] });
        } else {
            unplaced.push(s);
        }
    }
    (routes, unplaced)
}

fn nearest(inst: &Instance, from: NodeRef, candidates: impl Iterator<Item = usize>) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for s in candidates {
        let d = inst.dist(from, NodeRef::Station(s));
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, s));
        }
    }
    best.map(|(_, s)| s)
}

/// Builds bus routes and finalises rider stations.
fn route_buses(inst: &Instance, array: &[u32], station_of: &mut [Option<usize>]) -> Result<Vec<BusRoute>> {
    let n_st = inst.n_stations();
    let buses = &inst.fleets.buses;
    let mut riders_at: Vec<Vec<usize>> = vec![Vec::new(); n_st];
    for (e, s) in station_of.iter().enumerate() {
        if let Some(s) = s {
            riders_at[*s].push(e);
        }
    }
    let load = |s: usize, riders_at: &Vec<Vec<usize>>| riders_at[s].len() as u32;
    let nonempty: Vec<bool> = riders_at.iter().map(|r| !r.is_empty()).collect();
    let segments = decode_route_array(array, n_st, buses.len(), &nonempty)?;

    let mut routes: Vec<Vec<usize>> = vec![Vec::new(); buses.len()];
    let mut used = vec![0u32; buses.len()];
    let mut carry: Vec<usize> = Vec::new();
    for (b, segment) in segments.into_iter().enumerate() {
        let mut stops = std::mem::take(&mut carry);
        stops.extend(segment);
        let mut keep = 0;
        let mut total = 0;
        for &s in &stops {
            if total + load(s, &riders_at) > buses[b].capacity {
                break;
            }
            total += load(s, &riders_at);
            keep += 1;
        }
        carry = stops.split_off(keep);
        routes[b] = stops;
        used[b] = total;
    }

    let mut displaced: Vec<usize> = Vec::new();
    for s in carry {
        let need = load(s, &riders_at);
        let spare = |b: usize, used: &[u32]| buses[b].capacity - used[b];
        let target = (0..buses.len())
            .find(|&b| !routes[b].is_empty() && spare(b, &used) >= need)
            .or_else(|| (0..buses.len()).find(|&b| routes[b].is_empty() && buses[b].capacity >= need));
        if let Some(b) = target {
            routes[b].push(s);
            used[b] += need;
            continue;
        }
        // No bus takes the whole station: board what fits on the roomiest bus.
        let roomiest = (0..buses.len()).filter(|&b| spare(b, &used) > 0).max_by(|&a, &b| {
            spare(a, &used).cmp(&spare(b, &used)).then(b.cmp(&a))
        });
        match roomiest {
            Some(b) => {
                let room = spare(b, &used) as usize;
                routes[b].push(s);
                used[b] += room as u32;
                displaced.extend(riders_at[s].drain(room..));
            }
            None => displaced.append(&mut riders_at[s]),
        }
    }

    let mut st_load: Vec<u32> = riders_at.iter().map(|r| r.len() as u32).collect();
    for e in displaced {
        let home = NodeRef::Employee(e);
        let mut bus_of = vec![None; n_st];
        for (b, r) in routes.iter().enumerate() {
            for &s in r {
                bus_of[s] = Some(b);
            }
        }
        let open_station = nearest(
            inst,
            home,
            (0..n_st).filter(|&s| bus_of[s].is_some_and(|b| used[b] < buses[b].capacity)),
        );
        if let Some(s) = open_station {
            let b = bus_of[s].expect("station on a route");
            used[b] += 1;
            st_load[s] += 1;
            station_of[e] = Some(s);
            continue;
        }
        let idle_bus = (0..buses.len())
            .filter(|&b| routes[b].is_empty())
            .max_by(|&a, &b| buses[a].capacity.cmp(&buses[b].capacity).then(b.cmp(&a)));
        let Some(idle) = idle_bus else {
            return Err(Error::Infeasible { resource: BindingResource::BusCapacity });
        };
        if let Some(s) = nearest(inst, home, (0..n_st).filter(|&s| bus_of[s].is_none())) {
            routes[idle].push(s);
            used[idle] = 1;
            station_of[e] = Some(s);
            st_load[s] = 1;
            continue;
        }
        // Every station is on a full route: hand one over to the idle bus,
        // which frees its seats on the old one.
        let movable = nearest(inst, home, (0..n_st).filter(|&s| bus_of[s].is_some() && st_load[s] < buses[idle].capacity));
        let Some(s) = movable else {
            return Err(Error::Infeasible { resource: BindingResource::BusCapacity });
        };
        let old = bus_of[s].expect("station on a route");
        routes[old].retain(|&x| x != s);
        used[old] -= st_load[s];
        st_load[s] += 1;
        routes[idle].push(s);
        used[idle] = st_load[s];
        station_of[e] = Some(s);
    }

    Ok(routes
        .into_iter()
        .enumerate()
        .filter(|(_, r)| !r.is_empty())
        .map(|(bus, stations)| BusRoute { bus, stations })
        .collect())
}

/// Decodes `genotype` into a feasible plan for `inst`.
pub fn decode(genotype: &Genotype, inst: &Instance) -> Result<Plan> {
    let shape = GenotypeShape::of(inst);
    genotype.validate(&shape)?;
    let n_emp = inst.n_employees();
    let owners = inst.car_owners();
    let capacities: Vec<u32> = inst.fleets.fuel.iter().map(|v| v.capacity).collect();
    let carpool = decode_carpool_array_with(
        &genotype.carpool_array,
        n_emp,
        &owners,
        &capacities,
        inst.params.strict_min_occupancy,
    )?;
    let used_cars: Vec<usize> = carpool.groups.iter().map(|(g, _)| *g).collect();
    let entry_of = assign_entries(&genotype.entry_array, &used_cars, inst.n_entries())?;
    let mut groups: Vec<CarpoolGroup> = carpool
        .groups
        .into_iter()
        .map(|(vehicle, occupants)| CarpoolGroup { vehicle, occupants, entry: entry_of[&vehicle] })
        .collect();
    let mut riders = carpool.riders;

    let mut hc = vec![0u32; inst.n_entries()];
    for g in &groups {
        hc[g.entry] += g.occupants.len() as u32;
    }
    let active: Vec<bool> = hc.iter().map(|&h| h > 0).collect();
    let segments = decode_route_array(&genotype.trz_route_array, inst.n_entries(), shape.trz_vehicles, &active)?;
    let (trz_routes, unplaced) = route_trz(inst, segments, &hc);
    if !unplaced.is_empty() {
        groups.retain(|g| {
            let drop = unplaced.contains(&g.entry);
            if drop {
                riders.extend(&g.occupants);
            }
            !drop
        });
        riders.sort_unstable();
    }

    let stations = decode_assignment_array(&genotype.assignment_array, n_emp, inst.n_stations())?;
    let mut assigned = vec![0usize; n_emp];
    for (s, members) in stations.iter().enumerate() {
        for &e in members {
            assigned[e] = s;
        }
    }
    let mut rider_station = vec![None; n_emp];
    for &e in &riders {
        rider_station[e] = Some(assigned[e]);
    }
    let bus_routes = route_buses(inst, &genotype.bus_route_array, &mut rider_station)?;

    Ok(Plan { carpool_groups: groups, rider_station, bus_routes, trz_routes })
}

/// Writes a genotype that decodes back to `plan`.
///
/// Exact for plans the decoder can produce (grey-zone vehicles in the order
/// the decoder would assign them); other plans map to their nearest decodable
/// counterpart.
pub fn encode(plan: &Plan, inst: &Instance) -> Genotype {
    let shape = GenotypeShape::of(inst);
    let n_emp = shape.employees;

    let mut assignment = Vec::with_capacity(shape.assignment_len());
    for s in 0..shape.stations.saturating_sub(1) {
        assignment.extend(plan.riders().filter(|&(_, st)| st == s).map(|(e, _)| e as u32 + 1));
        assignment.push((n_emp + s + 1) as u32);
    }
    let last = shape.stations.saturating_sub(1);
    assignment.extend(
        (0..n_emp)
            .filter(|&e| plan.rider_station[e].map_or(true, |s| s == last))
            .map(|e| e as u32 + 1),
    );

    let mut carpool = Vec::with_capacity(shape.carpool_len());
    for g in 0..shape.cars {
        if let Some(group) = plan.carpool_groups.iter().find(|grp| grp.vehicle == g) {
            carpool.extend(group.occupants.iter().map(|&e| e as u32 + 1));
        }
        carpool.push((n_emp + g + 1) as u32);
    }
    carpool.extend(plan.riders().map(|(e, _)| e as u32 + 1));

    let mut bus = Vec::with_capacity(shape.bus_route_len());
    let mut on_route = vec![false; shape.stations];
    for b in 0..shape.buses {
        if let Some(r) = plan.bus_routes.iter().find(|r| r.bus == b) {
            for &s in &r.stations {
                on_route[s] = true;
                bus.push(s as u32 + 1);
            }
        }
        if b + 1 < shape.buses {
            bus.push((shape.stations + b + 1) as u32);
        }
    }
    if shape.buses > 0 {
        bus.extend((0..shape.stations).filter(|&s| !on_route[s]).map(|s| s as u32 + 1));
    }

    let mut trz = Vec::with_capacity(shape.trz_route_len());
    let mut visited = vec![false; shape.entries];
    for v in 0..shape.trz_vehicles {
        if let Some(r) = plan.trz_routes.get(v) {
            for &s in &r.entries {
                visited[s] = true;
                trz.push(s as u32 + 1);
            }
        }
        if v + 1 < shape.trz_vehicles {
            trz.push((shape.entries + v + 1) as u32);
        }
    }
    if shape.trz_vehicles > 0 {
        trz.extend((0..shape.entries).filter(|&s| !visited[s]).map(|s| s as u32 + 1));
    }

    let mut entries = vec![1u32; shape.cars];
    for g in &plan.carpool_groups {
        entries[g.vehicle] = g.entry as u32 + 1;
    }

    Genotype {
        assignment_array: assignment,
        carpool_array: carpool,
        bus_route_array: bus,
        trz_route_array: trz,
        entry_array: entries,
    }
}
