//! Five-array genotype and its decoding into a [`Plan`].
//!
//! Every array uses 1-based numerals. In the three route-style arrays values
//! above the item count are delimiters: the items preceding delimiter `n + v`
//! belong to vehicle (or station) `v`, and trailing items belong to the last
//! one. The carpool array has a delimiter for every car and its tail holds the
//! bus riders instead.

mod decode;
mod plan;

pub use decode::{decode, encode};
pub use plan::{BusRoute, CarpoolGroup, ExportedRoute, Plan, PlanExport, TrzKind, TrzRoute, Usage};

pub(crate) use decode::{pick_trz_vehicle, TrzCursor};

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Genotype {
    /// Employees to bus stations.
    pub assignment_array: Vec<u32>,
    /// Employees to carpool cars; tail rides the bus.
    pub carpool_array: Vec<u32>,
    /// Stations to buses.
    pub bus_route_array: Vec<u32>,
    /// Entries to grey-zone vehicles.
    pub trz_route_array: Vec<u32>,
    /// Entry station (1-based) of each carpool car.
    pub entry_array: Vec<u32>,
}

/// Array lengths implied by an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenotypeShape {
    pub employees: usize,
    pub stations: usize,
    pub entries: usize,
    pub cars: usize,
    pub buses: usize,
    pub trz_vehicles: usize,
}

pub(crate) fn route_array_len(n_stops: usize, n_vehicles: usize) -> usize {
    if n_vehicles == 0 {
        0
    } else {
        n_stops + n_vehicles - 1
    }
}

impl GenotypeShape {
    pub fn of(inst: &Instance) -> Self {
        Self {
            employees: inst.n_employees(),
            stations: inst.n_stations(),
            entries: inst.n_entries(),
            cars: inst.fleets.fuel.len(),
            buses: inst.fleets.buses.len(),
            trz_vehicles: inst.fleets.electric.len() + inst.fleets.hybrid.len(),
        }
    }

    pub fn assignment_len(&self) -> usize {
        (self.employees + self.stations).saturating_sub(1)
    }

    pub fn carpool_len(&self) -> usize {
        self.employees + self.cars
    }

    pub fn bus_route_len(&self) -> usize {
        route_array_len(self.stations, self.buses)
    }

    pub fn trz_route_len(&self) -> usize {
        route_array_len(self.entries, self.trz_vehicles)
    }
}

/// Checks that `array` holds each of 1..=n exactly once.
pub fn check_permutation(array: &[u32], n: usize, name: &'static str) -> Result<()> {
    let fail = |reason: String| Error::NotAPermutation { array: name, expected_len: n, reason };
    if array.len() != n {
        return Err(fail(format!("length {}", array.len())));
    }
    let mut seen = vec![false; n];
    for &v in array {
        let i = v as usize;
        if i == 0 || i > n {
            return Err(fail(format!("value {v} out of range")));
        }
        if std::mem::replace(&mut seen[i - 1], true) {
            return Err(fail(format!("value {v} repeated")));
        }
    }
    Ok(())
}

impl Genotype {
    /// Structural validity against `shape`: four permutations and in-range entries.
    pub fn validate(&self, shape: &GenotypeShape) -> Result<()> {
        check_permutation(&self.assignment_array, shape.assignment_len(), "assignment_array")?;
        check_permutation(&self.carpool_array, shape.carpool_len(), "carpool_array")?;
        check_permutation(&self.bus_route_array, shape.bus_route_len(), "bus_route_array")?;
        check_permutation(&self.trz_route_array, shape.trz_route_len(), "trz_route_array")?;
        if self.entry_array.len() != shape.cars {
            return Err(Error::ShapeMismatch { what: "entry_array length", expected: shape.cars, actual: self.entry_array.len() });
        }
        for &v in &self.entry_array {
            if v == 0 || v as usize > shape.entries {
                return Err(Error::EntryOutOfRange { index: v, n_entries: shape.entries });
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::instance::read_json(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::instance::write_json(path, self)
    }
}

/// Splits the assignment array into the employee lists of each station.
///
/// Employee numerals are returned 0-based, in array order.
pub fn decode_assignment_array(array: &[u32], n_employees: usize, n_stations: usize) -> Result<Vec<Vec<usize>>> {
    check_permutation(array, (n_employees + n_stations).saturating_sub(1), "assignment_array")?;
    let mut stations = vec![Vec::new(); n_stations];
    let mut pending = Vec::new();
    for &v in array {
        let v = v as usize;
        if v <= n_employees {
            pending.push(v - 1);
        } else {
            stations[v - n_employees - 1] = std::mem::take(&mut pending);
        }
    }
    if let Some(last) = stations.last_mut() {
        *last = pending;
    }
    Ok(stations)
}

/// Carpool groups and bus riders read from the carpool array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarpoolDecoding {
    /// `(car, occupants)` sorted by car, driver first.
    pub groups: Vec<(usize, Vec<usize>)>,
    /// Bus riders, ascending.
    pub riders: Vec<usize>,
}

/// Reads carpool groups from the carpool array.
///
/// The segment before delimiter `n_employees + g` is one group. Its first car
/// owner drives that owner's car; a segment without an owner rides the bus and
/// occupants beyond the car capacity are moved to the bus, trailing ones first.
pub fn decode_carpool_array(array: &[u32], n_employees: usize, car_owners: &[usize], capacities: &[u32]) -> Result<CarpoolDecoding> {
    decode_carpool_array_with(array, n_employees, car_owners, capacities, false)
}

pub(crate) fn decode_carpool_array_with(
    array: &[u32],
    n_employees: usize,
    car_owners: &[usize],
    capacities: &[u32],
    strict_min_occupancy: bool,
) -> Result<CarpoolDecoding> {
    let n_cars = car_owners.len();
    if capacities.len() != n_cars {
        return Err(Error::ShapeMismatch { what: "car capacities", expected: n_cars, actual: capacities.len() });
    }
    check_permutation(array, n_employees + n_cars, "carpool_array")?;
    let mut car_of = vec![None; n_employees];
    for (g, &e) in car_owners.iter().enumerate() {
        car_of[e] = Some(g);
    }

    let mut groups = Vec::new();
    let mut riders = Vec::new();
    let mut segment: Vec<usize> = Vec::new();
    for &v in array {
        let v = v as usize;
        if v <= n_employees {
            segment.push(v - 1);
            continue;
        }
        let members = std::mem::take(&mut segment);
        let Some(pos) = members.iter().position(|&e| car_of[e].is_some()) else {
            riders.extend(members);
            continue;
        };
        let driver = members[pos];
        let car = car_of[driver].expect("driver owns a car");
        let mut occupants = Vec::with_capacity(members.len());
        occupants.push(driver);
        occupants.extend(members.iter().copied().filter(|&e| e != driver));
        let cap = capacities[car] as usize;
        if occupants.len() > cap {
            riders.extend(occupants.drain(cap..));
        }
        if strict_min_occupancy && occupants.len() < 2 {
            riders.extend(occupants);
            continue;
        }
        groups.push((car, occupants));
    }
    riders.extend(segment);
    riders.sort_unstable();
    groups.sort_by_key(|(car, _)| *car);
    Ok(CarpoolDecoding { groups, riders })
}

/// Splits a route array into per-vehicle stop sequences.
///
/// Stops whose `nonempty` flag is false are dropped; a vehicle left with no
/// stops is unused.
pub fn decode_route_array(array: &[u32], n_stops: usize, n_vehicles: usize, nonempty: &[bool]) -> Result<Vec<Vec<usize>>> {
    check_permutation(array, route_array_len(n_stops, n_vehicles), "route array")?;
    if nonempty.len() != n_stops {
        return Err(Error::ShapeMismatch { what: "stop flags", expected: n_stops, actual: nonempty.len() });
    }
    let mut routes = vec![Vec::new(); n_vehicles];
    let mut pending = Vec::new();
    for &v in array {
        let v = v as usize;
        if v <= n_stops {
            if nonempty[v - 1] {
                pending.push(v - 1);
            }
        } else {
            routes[v - n_stops - 1] = std::mem::take(&mut pending);
        }
    }
    if let Some(last) = routes.last_mut() {
        *last = pending;
    }
    Ok(routes)
}

/// Entry (0-based) of each used car, keyed by car index.
pub fn assign_entries(entry_array: &[u32], used_cars: &[usize], n_entries: usize) -> Result<BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for &g in used_cars {
        let &v = entry_array
            .get(g)
            .ok_or(Error::ShapeMismatch { what: "entry_array length", expected: g + 1, actual: entry_array.len() })?;
        if v == 0 || v as usize > n_entries {
            return Err(Error::EntryOutOfRange { index: v, n_entries });
        }
        out.insert(g, v as usize - 1);
    }
    Ok(out)
}

fn shuffled(n: usize, rng: &mut impl Rng) -> Vec<u32> {
    let mut v: Vec<u32> = (1..=n as u32).collect();
    v.shuffle(rng);
    v
}

/// Uniformly random genotype for `inst`, drawn from `rng`.
pub fn random_genotype_from(inst: &Instance, rng: &mut impl Rng) -> Genotype {
    let shape = GenotypeShape::of(inst);
    Genotype {
        assignment_array: shuffled(shape.assignment_len(), rng),
        carpool_array: shuffled(shape.carpool_len(), rng),
        bus_route_array: shuffled(shape.bus_route_len(), rng),
        trz_route_array: shuffled(shape.trz_route_len(), rng),
        entry_array: (0..shape.cars).map(|_| rng.gen_range(1..=shape.entries.max(1) as u32)).collect(),
    }
}

pub fn random_genotype(inst: &Instance, seed: u64) -> Genotype {
    random_genotype_from(inst, &mut ChaCha8Rng::seed_from_u64(seed))
}
