//! Exhaustive baseline for small instances.
//!
//! Plans are enumerated in the canonical form the decoder produces: carpool
//! groups led by their car's owner, every entry choice, ordered grey-zone
//! route lists with vehicles picked greedily (electric when it can serve the
//! route, else hybrid), every station choice for bus riders and every
//! assignment of visited stations to buses. The decoder maps every genotype
//! onto exactly this set, so the front found here is the optimum of the
//! search space NSGA-II explores.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{encode, pick_trz_vehicle, BusRoute, CarpoolGroup, Plan, TrzCursor, TrzRoute};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate_plan, ObjectiveVector};
use crate::instance::{Counts, Instance, InstanceSpec};
use crate::moo::{Archive, FrontEntry, ParetoFront};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumBudget {
    pub max_plans: u64,
    pub time_limit_secs: f64,
    /// Refuse instances with more than 6 employees, 2 stations or 2 entries.
    #[serde(default = "default_true")]
    pub size_guard: bool,
}

impl Default for EnumBudget {
    fn default() -> Self {
        Self { max_plans: 100_000_000, time_limit_secs: 600.0, size_guard: true }
    }
}

impl EnumBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_plans == 0 {
            return Err(Error::InvalidParams { field: "max_plans", reason: "must be positive".into() });
        }
        if !(self.time_limit_secs > 0.0) {
            return Err(Error::InvalidParams { field: "time_limit_secs", reason: "must be positive".into() });
        }
        Ok(())
    }
}

pub const MAX_EMPLOYEES: usize = 6;
pub const MAX_STATIONS: usize = 2;
pub const MAX_ENTRIES: usize = 2;

/// Four employees, two stations, one entry, two car owners, one vehicle of
/// each other kind.
pub fn micro_spec(seed: u64) -> InstanceSpec {
    InstanceSpec::new(
        Counts { stations: 2, entries: 1, employees: 4, car_owners: 2, buses: 1, fuel: 2, electric: 1, hybrid: 1 },
        seed,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOutcome {
    pub front: ParetoFront,
    /// The budget ran out before the enumeration finished.
    pub partial: bool,
    pub plans_evaluated: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonOutcome {
    pub front: ParetoFront,
    pub partial: bool,
    /// Grid cells `[eps_a, eps_b]` with no plan within the bounds.
    pub skipped: Vec<[f64; 2]>,
    pub cells: usize,
}

/// Carpool groups (car, occupants) and the remaining bus riders.
#[derive(Debug, Clone)]
struct CarpoolConfig {
    groups: Vec<(usize, Vec<usize>)>,
    riders: Vec<usize>,
}

fn carpool_configs(inst: &Instance) -> Vec<CarpoolConfig> {
    let n = inst.n_employees();
    let owners = inst.car_owners();
    let strict = inst.params.strict_min_occupancy;
    let mut out = Vec::new();
    for drivers in (0..owners.len()).powerset() {
        let is_driver = |e: usize| drivers.iter().any(|&g| owners[g] == e);
        let others: Vec<usize> = (0..n).filter(|&e| !is_driver(e)).collect();
        // Slot k < drivers.len() joins that driver's car; the last slot rides the bus.
        let slots: Vec<usize> = (0..=drivers.len()).collect();
        for choice in product(&vec![slots; others.len()]) {
            let mut passengers: Vec<Vec<usize>> = vec![Vec::new(); drivers.len()];
            let mut riders = Vec::new();
            for (&e, &slot) in others.iter().zip(&choice) {
                match passengers.get_mut(slot) {
                    Some(p) => p.push(e),
                    None => riders.push(e),
                }
            }
            let fits = drivers.iter().zip(&passengers).all(|(&g, p)| {
                let size = p.len() + 1;
                size <= inst.fleets.fuel[g].capacity as usize && (!strict || size >= 2)
            });
            if !fits {
                continue;
            }
            let orders: Vec<Vec<Vec<usize>>> =
                passengers.iter().map(|p| p.iter().copied().permutations(p.len()).collect()).collect();
            for pick in product(&orders) {
                let groups = drivers
                    .iter()
                    .zip(pick)
                    .map(|(&g, order)| {
                        let mut occ = vec![owners[g]];
                        occ.extend(order);
                        (g, occ)
                    })
                    .collect();
                out.push(CarpoolConfig { groups, riders: riders.clone() });
            }
        }
    }
    out
}

/// Cartesian product of `factors`; a single empty combination when there
/// are no factors.
fn product<T: Clone>(factors: &[Vec<T>]) -> Vec<Vec<T>> {
    if factors.is_empty() {
        return vec![Vec::new()];
    }
    factors.iter().map(|f| f.iter().cloned()).multi_cartesian_product().collect()
}

/// Every way to split `items` into an ordered list of nonempty ordered blocks.
fn ordered_block_lists(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let n = items.len();
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for perm in items.iter().copied().permutations(n) {
        for cuts in 0..1u32 << (n - 1) {
            let mut blocks = vec![vec![perm[0]]];
            for i in 1..n {
                if cuts >> (i - 1) & 1 == 1 {
                    blocks.push(Vec::new());
                }
                blocks.last_mut().expect("nonempty").push(perm[i]);
            }
            out.push(blocks);
        }
    }
    out
}

/// Grey-zone routes for an ordered block list, or `None` if the greedy
/// vehicle choice runs out of vehicles.
fn assign_trz(inst: &Instance, blocks: &[Vec<usize>], hc: &[u32]) -> Option<Vec<TrzRoute>> {
    let mut cursor = TrzCursor::default();
    let mut routes = Vec::with_capacity(blocks.len());
    for b in blocks {
        let (kind, vehicle) = pick_trz_vehicle(inst, b, hc, &cursor)?;
        cursor.advance(kind);
        routes.push(TrzRoute { kind, vehicle, entries: b.clone() });
    }
    Some(routes)
}

/// Every assignment of the visited stations to buses, in every visiting order.
fn bus_route_sets(inst: &Instance, loads: &[u32]) -> Vec<Vec<BusRoute>> {
    let used: Vec<usize> = (0..loads.len()).filter(|&s| loads[s] > 0).collect();
    let n_bus = inst.fleets.buses.len();
    if used.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let buses: Vec<usize> = (0..n_bus).collect();
    for owner in product(&vec![buses; used.len()]) {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_bus];
        for (&s, &b) in used.iter().zip(&owner) {
            members[b].push(s);
        }
        let fits = members
            .iter()
            .enumerate()
            .all(|(b, m)| m.iter().map(|&s| loads[s]).sum::<u32>() <= inst.fleets.buses[b].capacity);
        if !fits {
            continue;
        }
        let active: Vec<usize> = (0..n_bus).filter(|&b| !members[b].is_empty()).collect();
        let orders: Vec<Vec<Vec<usize>>> = active
            .iter()
            .map(|&b| members[b].iter().copied().permutations(members[b].len()).collect())
            .collect();
        for pick in product(&orders) {
            out.push(
                active
                    .iter()
                    .zip(pick)
                    .map(|(&bus, stations)| BusRoute { bus, stations })
                    .collect(),
            );
        }
    }
    out
}

struct Enumerated {
    front: Archive,
    /// First plan seen for each distinct objective vector, when requested.
    all: Vec<FrontEntry>,
    partial: bool,
    plans: u64,
}

fn key(v: &ObjectiveVector) -> [u64; 3] {
    v.as_array().map(f64::to_bits)
}

fn check_size(inst: &Instance, budget: &EnumBudget) -> Result<()> {
    budget.validate()?;
    if budget.size_guard
        && (inst.n_employees() > MAX_EMPLOYEES || inst.n_stations() > MAX_STATIONS || inst.n_entries() > MAX_ENTRIES)
    {
        return Err(Error::TooLarge(format!(
            "{} employees, {} stations, {} entries; the limit is {MAX_EMPLOYEES}, {MAX_STATIONS}, {MAX_ENTRIES}",
            inst.n_employees(),
            inst.n_stations(),
            inst.n_entries()
        )));
    }
    Ok(())
}

fn enumerate(inst: &Instance, budget: &EnumBudget, keep_all: bool) -> Result<Enumerated> {
    check_size(inst, budget)?;
    let start = Instant::now();
    let counter = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let n_st = inst.n_stations();
    let n_en = inst.n_entries();
    let configs = carpool_configs(inst);

    let shards: Vec<Result<Enumerated>> = configs
        .par_iter()
        .map(|cfg| -> Result<Enumerated> {
            let mut local = Enumerated { front: Archive::default(), all: Vec::new(), partial: false, plans: 0 };
            let mut seen: HashSet<[u64; 3]> = HashSet::new();
            let cars = cfg.groups.len();
            let entry_choices = product(&vec![(0..n_en).collect::<Vec<_>>(); cars]);
            let rider_choices = product(&vec![(0..n_st).collect::<Vec<_>>(); cfg.riders.len()]);
            for entries in entry_choices {
                let mut hc = vec![0u32; n_en];
                let groups: Vec<CarpoolGroup> = cfg
                    .groups
                    .iter()
                    .zip(&entries)
                    .map(|((g, occ), &s)| {
                        hc[s] += occ.len() as u32;
                        CarpoolGroup { vehicle: *g, occupants: occ.clone(), entry: s }
                    })
                    .collect();
                let active: Vec<usize> = (0..n_en).filter(|&s| hc[s] > 0).collect();
                for blocks in ordered_block_lists(&active) {
                    let Some(trz_routes) = assign_trz(inst, &blocks, &hc) else { continue };
                    for stations in &rider_choices {
                        let mut rider_station = vec![None; inst.n_employees()];
                        let mut loads = vec![0u32; n_st];
                        for (&e, &s) in cfg.riders.iter().zip(stations) {
                            rider_station[e] = Some(s);
                            loads[s] += 1;
                        }
                        for bus_routes in bus_route_sets(inst, &loads) {
                            if stop.load(Ordering::Relaxed) {
                                local.partial = true;
                                return Ok(local);
                            }
                            let done = counter.fetch_add(1, Ordering::Relaxed) + 1;
                            if done > budget.max_plans
                                || (done % 1024 == 0 && start.elapsed().as_secs_f64() > budget.time_limit_secs)
                            {
                                stop.store(true, Ordering::Relaxed);
                                local.partial = true;
                                return Ok(local);
                            }
                            let plan = Plan {
                                carpool_groups: groups.clone(),
                                rider_station: rider_station.clone(),
                                bus_routes,
                                trz_routes: trz_routes.clone(),
                            };
                            let objectives = evaluate_plan(plan.clone(), inst)?.objectives;
                            local.plans += 1;
                            let fresh = keep_all && seen.insert(key(&objectives));
                            if !fresh && !local.front.accepts(&objectives) {
                                continue;
                            }
                            let entry = FrontEntry { genotype: encode(&plan, inst), objectives };
                            if fresh {
                                local.all.push(entry.clone());
                            }
                            local.front.insert(entry);
                        }
                    }
                }
            }
            Ok(local)
        })
        .collect();

    let mut total = Enumerated { front: Archive::default(), all: Vec::new(), partial: false, plans: 0 };
    let mut seen: HashSet<[u64; 3]> = HashSet::new();
    for shard in shards {
        let shard = shard?;
        total.partial |= shard.partial;
        total.plans += shard.plans;
        for e in shard.front.into_front().entries {
            total.front.insert(e);
        }
        for e in shard.all {
            if seen.insert(key(&e.objectives)) {
                total.all.push(e);
            }
        }
    }
    if total.partial {
        log::warn!("enumeration budget exhausted after {} plans; the front is partial", total.plans);
    }
    Ok(total)
}

/// Non-dominated front of every canonical plan.
pub fn exact_pareto(inst: &Instance, budget: &EnumBudget) -> Result<ExactOutcome> {
    let e = enumerate(inst, budget, false)?;
    let front = e.front.into_front();
    if front.is_empty() {
        return Err(Error::Solver("no feasible plan found".into()));
    }
    Ok(ExactOutcome { front, partial: e.partial, plans_evaluated: e.plans })
}

/// Epsilon-constraint method: minimise objective `primary` (0, 1 or 2) with
/// the other two bounded by each cell of `grids`, then keep the
/// non-dominated optima. Without grids, the distinct values the secondary
/// objectives take on the exact front are used.
pub fn solve_epsilon_constraint(
    inst: &Instance,
    primary: usize,
    grids: Option<[Vec<f64>; 2]>,
    budget: &EnumBudget,
) -> Result<EpsilonOutcome> {
    if primary > 2 {
        return Err(Error::InvalidParams { field: "primary", reason: format!("objective index {primary} is not 0, 1 or 2") });
    }
    let secondary: [usize; 2] = match primary {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    let e = enumerate(inst, budget, true)?;
    let grids = grids.unwrap_or_else(|| {
        secondary.map(|m| {
            let mut vals: Vec<f64> = e.front.objectives().iter().map(|o| o.as_array()[m]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            vals
        })
    });
    let tol = |x: f64| 1e-9 * (1.0 + x.abs());
    let mut optima = Archive::default();
    let mut skipped = Vec::new();
    let mut cells = 0;
    for &ea in &grids[0] {
        for &eb in &grids[1] {
            cells += 1;
            let within = |o: &ObjectiveVector| {
                let a = o.as_array();
                a[secondary[0]] <= ea + tol(ea) && a[secondary[1]] <= eb + tol(eb)
            };
            let best = e
                .all
                .iter()
                .filter(|c| within(&c.objectives))
                .map(|c| c.objectives.as_array()[primary])
                .fold(f64::INFINITY, f64::min);
            if best.is_infinite() {
                skipped.push([ea, eb]);
                continue;
            }
            for c in e.all.iter().filter(|c| within(&c.objectives) && c.objectives.as_array()[primary] == best) {
                optima.insert(c.clone());
            }
        }
    }
    if !skipped.is_empty() {
        log::info!("{} of {cells} epsilon cells have no feasible plan", skipped.len());
    }
    Ok(EpsilonOutcome { front: optima.into_front(), partial: e.partial, skipped, cells })
}
