//! Seeded synthetic instances.
//!
//! Coordinates are uniform in two boxes: homes, bus stations and the bus depot
//! in the urban box; entry stations, the grey-zone depot and the company in the
//! grey box. Fleet attributes are drawn once per fleet kind, so vehicles of the
//! same kind are interchangeable.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Employee, Fleets, Instance, Meta, Node, Nodes, Params, Vehicle};
use crate::error::{Error, Result};

/// Instance shapes I1..I13: (V, S, W, C, B, G, E, H).
pub const BENCHMARK_SHAPES: [[usize; 8]; 13] = [
    [2, 1, 10, 3, 1, 3, 1, 2],
    [2, 3, 15, 4, 1, 4, 2, 2],
    [3, 3, 20, 4, 1, 4, 3, 4],
    [3, 4, 25, 6, 2, 6, 3, 4],
    [4, 4, 30, 6, 2, 6, 4, 5],
    [4, 5, 35, 8, 2, 8, 5, 6],
    [5, 5, 40, 8, 3, 8, 6, 7],
    [5, 6, 45, 12, 3, 12, 6, 7],
    [6, 6, 50, 12, 3, 12, 7, 7],
    [6, 6, 55, 12, 4, 12, 8, 8],
    [8, 8, 60, 15, 4, 15, 8, 8],
    [8, 8, 65, 15, 5, 15, 9, 9],
    [8, 8, 70, 15, 5, 15, 9, 9],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub stations: usize,
    pub entries: usize,
    pub employees: usize,
    pub car_owners: usize,
    pub buses: usize,
    pub fuel: usize,
    pub electric: usize,
    pub hybrid: usize,
}

impl Counts {
    pub fn from_row(row: [usize; 8]) -> Self {
        let [stations, entries, employees, car_owners, buses, fuel, electric, hybrid] = row;
        Self { stations, entries, employees, car_owners, buses, fuel, electric, hybrid }
    }

    pub fn as_row(&self) -> [usize; 8] {
        [
            self.stations,
            self.entries,
            self.employees,
            self.car_owners,
            self.buses,
            self.fuel,
            self.electric,
            self.hybrid,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn fixed(v: f64) -> Self {
        Self { min: v, max: v }
    }

    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.gen_range(self.min..=self.max)
        }
    }

    fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min <= self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleetRanges {
    pub capacity_min: u32,
    pub capacity_max: u32,
    pub fixed_cost: Range,
    pub cost_per_km: Range,
    pub emission_per_km: Range,
    pub speed_kmh: Range,
}

impl FleetRanges {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vehicle {
        Vehicle {
            capacity: rng.gen_range(self.capacity_min..=self.capacity_max),
            fixed_cost: self.fixed_cost.sample(rng),
            cost_per_km: self.cost_per_km.sample(rng),
            emission_per_km: self.emission_per_km.sample(rng),
            speed_kmh: self.speed_kmh.sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamRanges {
    pub bus: FleetRanges,
    pub fuel: FleetRanges,
    pub electric: FleetRanges,
    pub hybrid: FleetRanges,
    pub theta: Range,
    pub work_start: Range,
    pub carpool_incentive: Range,
    pub battery_rate: Range,
    pub battery_capacity: Range,
    pub walk_hours_per_km: Range,
    pub timing_penalty: Range,
    pub electric_max_distance: Range,
    pub return_reserve: bool,
    pub strict_min_occupancy: bool,
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self {
            bus: FleetRanges {
                capacity_min: 20,
                capacity_max: 40,
                fixed_cost: Range::new(150.0, 250.0),
                cost_per_km: Range::new(1.5, 2.5),
                emission_per_km: Range::fixed(800.0),
                speed_kmh: Range::fixed(25.0),
            },
            fuel: FleetRanges {
                capacity_min: 4,
                capacity_max: 4,
                fixed_cost: Range::fixed(0.0),
                cost_per_km: Range::new(0.5, 1.0),
                emission_per_km: Range::fixed(180.0),
                speed_kmh: Range::fixed(35.0),
            },
            electric: FleetRanges {
                capacity_min: 6,
                capacity_max: 8,
                fixed_cost: Range::new(60.0, 100.0),
                cost_per_km: Range::new(0.8, 1.2),
                emission_per_km: Range::fixed(0.0),
                speed_kmh: Range::fixed(30.0),
            },
            hybrid: FleetRanges {
                capacity_min: 8,
                capacity_max: 12,
                fixed_cost: Range::new(50.0, 80.0),
                cost_per_km: Range::new(1.0, 1.4),
                emission_per_km: Range::fixed(120.0),
                speed_kmh: Range::fixed(30.0),
            },
            theta: Range::new(0.5, 1.5),
            work_start: Range::new(120.0, 150.0),
            carpool_incentive: Range::new(5.0, 20.0),
            battery_rate: Range::new(0.2, 0.3),
            battery_capacity: Range::new(4.0, 6.0),
            walk_hours_per_km: Range::new(0.2, 0.25),
            timing_penalty: Range::new(1.0, 2.0),
            electric_max_distance: Range::new(15.0, 20.0),
            return_reserve: false,
            strict_min_occupancy: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub counts: Counts,
    #[serde(default = "default_urban_box")]
    pub urban_box: CoordBox,
    #[serde(default = "default_grey_box")]
    pub grey_box: CoordBox,
    #[serde(default)]
    pub ranges: ParamRanges,
    #[serde(default)]
    pub seed: u64,
}

fn default_urban_box() -> CoordBox {
    CoordBox { x_min: 0.0, x_max: 20.0, y_min: 0.0, y_max: 20.0 }
}

fn default_grey_box() -> CoordBox {
    CoordBox { x_min: 40.0, x_max: 50.0, y_min: 5.0, y_max: 15.0 }
}

impl InstanceSpec {
    pub fn new(counts: Counts, seed: u64) -> Self {
        Self {
            counts,
            urban_box: default_urban_box(),
            grey_box: default_grey_box(),
            ranges: ParamRanges::default(),
            seed,
        }
    }

    /// Shape of row `instance` (1-based) of the benchmark table.
    pub fn benchmark(instance: usize, seed: u64) -> Self {
        assert!((1..=BENCHMARK_SHAPES.len()).contains(&instance), "instance must be in 1..=13");
        Self::new(Counts::from_row(BENCHMARK_SHAPES[instance - 1]), seed)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.counts;
        let bad = |field: &'static str, reason: String| Err(Error::InvalidSpec { field, reason });
        if c.car_owners > c.employees {
            return bad("counts.car_owners", format!("{} car owners exceed {} employees", c.car_owners, c.employees));
        }
        if c.fuel != c.car_owners {
            return bad("counts.fuel", format!("{} fuel vehicles but {} car owners", c.fuel, c.car_owners));
        }
        if c.stations == 0 {
            return bad("counts.stations", "at least one bus station is required".into());
        }
        if c.buses == 0 {
            return bad("counts.buses", "at least one bus is required".into());
        }
        if c.fuel > 0 && c.entries == 0 {
            return bad("counts.entries", "carpool vehicles need at least one grey-zone entry".into());
        }
        for (field, b) in [("urban_box", &self.urban_box), ("grey_box", &self.grey_box)] {
            let ok = [b.x_min, b.x_max, b.y_min, b.y_max].iter().all(|v| v.is_finite())
                && b.x_min <= b.x_max
                && b.y_min <= b.y_max;
            if !ok {
                return bad(field, "box bounds must be finite with min <= max".into());
            }
        }
        let r = &self.ranges;
        for (field, f) in [
            ("ranges.bus", &r.bus),
            ("ranges.fuel", &r.fuel),
            ("ranges.electric", &r.electric),
            ("ranges.hybrid", &r.hybrid),
        ] {
            if f.capacity_min < 1 || f.capacity_min > f.capacity_max {
                return bad(field, "capacity range must satisfy 1 <= min <= max".into());
            }
            for range in [f.fixed_cost, f.cost_per_km, f.emission_per_km] {
                if !range.is_valid() || range.min < 0.0 {
                    return bad(field, "cost and emission ranges must be finite, non-negative, min <= max".into());
                }
            }
            if !f.speed_kmh.is_valid() || f.speed_kmh.min <= 0.0 {
                return bad(field, "speed range must be positive with min <= max".into());
            }
        }
        if r.fuel.fixed_cost != Range::fixed(0.0) {
            return bad("ranges.fuel", "private cars carry no fixed cost".into());
        }
        if !r.theta.is_valid() {
            return bad("ranges.theta", "range must be finite with min <= max".into());
        }
        if !r.work_start.is_valid() || r.work_start.min <= 0.0 {
            return bad("ranges.work_start", "work start must be positive".into());
        }
        for (field, range) in [
            ("ranges.carpool_incentive", r.carpool_incentive),
            ("ranges.battery_rate", r.battery_rate),
            ("ranges.battery_capacity", r.battery_capacity),
            ("ranges.walk_hours_per_km", r.walk_hours_per_km),
            ("ranges.timing_penalty", r.timing_penalty),
            ("ranges.electric_max_distance", r.electric_max_distance),
        ] {
            if !range.is_valid() || range.min < 0.0 {
                return bad(field, "range must be finite, non-negative, min <= max".into());
            }
        }
        if c.electric + c.hybrid > 0 && r.battery_capacity.min <= 0.0 {
            return bad("ranges.battery_capacity", "battery capacity must be positive for electric or hybrid fleets".into());
        }
        Ok(())
    }
}

fn point(rng: &mut ChaCha8Rng, b: &CoordBox) -> (f64, f64) {
    let x = Range::new(b.x_min, b.x_max).sample(rng);
    let y = Range::new(b.y_min, b.y_max).sample(rng);
    (x, y)
}

/// Builds a seeded instance with exactly the counts of `spec`.
pub fn generate_instance(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let c = &spec.counts;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut next_id = 0u32;
    let mut node = |rng: &mut ChaCha8Rng, b: &CoordBox| {
        let (x, y) = point(rng, b);
        let n = Node { id: next_id, x, y };
        next_id += 1;
        n
    };

    let urban_depot = node(&mut rng, &spec.urban_box);
    let trz_depot = node(&mut rng, &spec.grey_box);
    let company = node(&mut rng, &spec.grey_box);
    let bus_stations: Vec<Node> = (0..c.stations).map(|_| node(&mut rng, &spec.urban_box)).collect();
    let trz_entries: Vec<Node> = (0..c.entries).map(|_| node(&mut rng, &spec.grey_box)).collect();
    let homes: Vec<Node> = (0..c.employees).map(|_| node(&mut rng, &spec.urban_box)).collect();

    let mut owns = vec![false; c.employees];
    for i in sample(&mut rng, c.employees, c.car_owners).into_iter() {
        owns[i] = true;
    }
    let employees = homes
        .into_iter()
        .zip(owns)
        .map(|(n, owns_car)| Employee { id: n.id, x: n.x, y: n.y, owns_car })
        .collect();

    let r = &spec.ranges;
    let mut fleet = |ranges: &FleetRanges, n: usize| {
        let v = ranges.sample(&mut rng);
        vec![v; n]
    };
    let fleets = Fleets {
        buses: fleet(&r.bus, c.buses),
        fuel: fleet(&r.fuel, c.fuel),
        electric: fleet(&r.electric, c.electric),
        hybrid: fleet(&r.hybrid, c.hybrid),
    };
    let params = Params {
        theta: r.theta.sample(&mut rng),
        work_start: r.work_start.sample(&mut rng),
        carpool_incentive: r.carpool_incentive.sample(&mut rng),
        battery_rate: r.battery_rate.sample(&mut rng),
        battery_capacity: r.battery_capacity.sample(&mut rng),
        walk_hours_per_km: r.walk_hours_per_km.sample(&mut rng),
        timing_penalty: r.timing_penalty.sample(&mut rng),
        electric_max_distance: r.electric_max_distance.sample(&mut rng),
        return_reserve: r.return_reserve,
        strict_min_occupancy: r.strict_min_occupancy,
    };

    Ok(Instance {
        nodes: Nodes { employees, bus_stations, trz_entries, urban_depot, trz_depot, company },
        fleets,
        params,
        meta: Meta { seed: Some(spec.seed), name: None },
    })
}
