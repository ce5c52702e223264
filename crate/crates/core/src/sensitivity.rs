//! Parameter sweeps over the carpool fleet size and the battery rate.
//!
//! NSGA-II sweeps are run as a continuation: the front found for one value
//! seeds the initial population for the next, after translating each plan to
//! the modified instance. Fleet sizes are visited in increasing order, battery
//! rates in decreasing order, so every translated plan stays feasible and no
//! worse on the tracked objective.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::encoding::{decode, encode, Genotype, Plan, TrzKind};
use crate::error::{Error, Result};
use crate::exact::{exact_pareto, EnumBudget};
use crate::instance::{Instance, NodeRef};
use crate::moo::ParetoFront;
use crate::nsga2::{run_nsga2_with, NsgaParams, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    CarpoolFleetSize,
    BatteryRate,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::CarpoolFleetSize => "carpool_fleet_size",
            SweepParam::BatteryRate => "battery_rate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverConfig {
    Nsga2(NsgaParams),
    Exact(EnumBudget),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub value: f64,
    pub min_f1: f64,
    pub min_f2: f64,
    pub min_f3: f64,
    pub nps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub param: SweepParam,
    pub values: Vec<f64>,
    /// One row per value, by increasing value.
    pub rows: Vec<SensitivityRow>,
    /// Emissions if every employee drove alone to the nearest entry.
    pub private_car_f3: f64,
}

impl SensitivityReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},min_f1,min_f2,min_f3,nps,private_car_f3\n", self.param);
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{},{}\n", r.value, r.min_f1, r.min_f2, r.min_f3, r.nps, self.private_car_f3));
        }
        out
    }
}

/// Grams of CO2 if every employee drove their own fuel car straight to the
/// nearest grey-zone entry.
pub fn private_car_baseline(inst: &Instance) -> Result<f64> {
    let car = inst
        .fleets
        .fuel
        .first()
        .ok_or_else(|| Error::InvalidInstance("the baseline needs a fuel car to take emissions from".into()))?;
    if inst.n_entries() == 0 {
        return Err(Error::InvalidInstance("the baseline needs at least one grey-zone entry".into()));
    }
    let mut total = 0.0;
    for e in 0..inst.n_employees() {
        let nearest = (0..inst.n_entries())
            .map(|s| inst.distance(NodeRef::Employee(e), NodeRef::Entry(s)))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        total += car.emission_per_km * nearest;
    }
    Ok(total)
}

fn instance_for(master: &Instance, param: SweepParam, value: f64) -> Result<Instance> {
    match param {
        SweepParam::CarpoolFleetSize => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::InvalidParams { field: "values", reason: format!("fleet size {value} is not a whole number") });
            }
            master.with_carpool_fleet(value as usize)
        }
        SweepParam::BatteryRate => {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParams { field: "values", reason: format!("battery rate {value} is not a finite non-negative number") });
            }
            let mut inst = master.clone();
            inst.params.battery_rate = value;
            Ok(inst)
        }
    }
}

/// Genotype on `next` for a plan found on the previous instance of the sweep.
fn carry_over(plan: &Plan, param: SweepParam, next: &Instance) -> Genotype {
    let mut plan = plan.clone();
    if param == SweepParam::BatteryRate {
        // Routes that already ran on electricity keep their vehicles.
        plan.trz_routes.sort_by_key(|r| r.kind != TrzKind::Electric);
    }
    encode(&plan, next)
}

/// Front entries with the per-objective minimisers first.
fn seeds_from(front: &ParetoFront, limit: usize) -> Vec<usize> {
    let mut order: Vec<usize> = Vec::new();
    for m in 0..3 {
        let best = (0..front.len()).min_by(|&a, &b| {
            front.entries[a].objectives.as_array()[m].total_cmp(&front.entries[b].objectives.as_array()[m])
        });
        if let Some(i) = best {
            if !order.contains(&i) {
                order.push(i);
            }
        }
    }
    let rest: Vec<usize> = (0..front.len()).filter(|i| !order.contains(i)).collect();
    order.extend(rest);
    order.truncate(limit);
    order
}

pub fn run_sensitivity(master: &Instance, param: SweepParam, values: &[f64], solver: &SolverConfig) -> Result<SensitivityReport> {
    if values.is_empty() {
        return Err(Error::InvalidParams { field: "values", reason: "at least one value is required".into() });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParams { field: "values", reason: "values must be distinct".into() });
    }
    let instances = sorted.iter().map(|&v| instance_for(master, param, v)).collect::<Result<Vec<_>>>()?;

    let mut visit: Vec<usize> = (0..sorted.len()).collect();
    if param == SweepParam::BatteryRate {
        visit.reverse();
    }
    let mut rows: Vec<Option<SensitivityRow>> = vec![None; sorted.len()];
    let mut previous: Option<(usize, ParetoFront)> = None;
    for i in visit {
        let inst = &instances[i];
        let value = sorted[i];
        let named = |e: Error| Error::Solver(format!("{param} = {value}: {e}"));
        let front = match solver {
            SolverConfig::Exact(budget) => exact_pareto(inst, budget).map_err(named)?.front,
            SolverConfig::Nsga2(params) => {
                let mut initial = Vec::new();
                if let Some((p, front)) = &previous {
                    for k in seeds_from(front, params.population) {
                        let plan = decode(&front.entries[k].genotype, &instances[*p]).map_err(named)?;
                        initial.push(carry_over(&plan, param, inst));
                    }
                }
                run_nsga2_with(inst, params, RunOptions { initial, observer: None }).map_err(named)?
            }
        };
        let objs = front.objectives();
        let min = |m: usize| objs.iter().map(|o| o.as_array()[m]).fold(f64::INFINITY, f64::min);
        rows[i] = Some(SensitivityRow { value, min_f1: min(0), min_f2: min(1), min_f3: min(2), nps: front.len() });
        log::info!("{param} = {value}: {} Pareto solutions", front.len());
        previous = Some((i, front));
    }
    Ok(SensitivityReport {
        param,
        values: sorted,
        rows: rows.into_iter().map(|r| r.expect("every value solved")).collect(),
        private_car_f3: private_car_baseline(master)?,
    })
}
