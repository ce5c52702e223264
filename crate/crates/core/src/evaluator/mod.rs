//! Schedules, battery traces, the three objectives, and the feasibility check.

mod battery;
mod feasibility;
mod objectives;
mod schedule;

pub use battery::{battery_traces, propagate_battery, BatteryTrace};
pub use feasibility::{check_feasibility, Constraint, Violation};
pub use objectives::{objective_cost, objective_emissions, objective_satisfaction};
pub use schedule::{propagate_times, RouteTimes, Schedule};

use serde::{Deserialize, Serialize};

use crate::encoding::{decode, Genotype, Plan};
use crate::error::Result;
use crate::instance::Instance;

/// Cost, dissatisfaction and emissions; all minimised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl ObjectiveVector {
    pub fn new(f1: f64, f2: f64, f3: f64) -> Self {
        Self { f1, f2, f3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Everything computed while evaluating one plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub plan: Plan,
    pub schedule: Schedule,
    pub traces: Vec<BatteryTrace>,
    pub objectives: ObjectiveVector,
}

pub fn evaluate_plan(plan: Plan, inst: &Instance) -> Result<Evaluation> {
    let schedule = propagate_times(&plan, inst)?;
    let traces = battery_traces(&plan, inst)?;
    let objectives = ObjectiveVector {
        f1: objective_cost(&plan, inst),
        f2: objective_satisfaction(&plan, &schedule, inst),
        f3: objective_emissions(&plan, &traces, inst),
    };
    Ok(Evaluation { plan, schedule, traces, objectives })
}

/// Full evaluation of a genotype, keeping the intermediate results.
pub fn evaluate_detailed(genotype: &Genotype, inst: &Instance) -> Result<Evaluation> {
    evaluate_plan(decode(genotype, inst)?, inst)
}

pub fn evaluate(genotype: &Genotype, inst: &Instance) -> Result<ObjectiveVector> {
    Ok(evaluate_detailed(genotype, inst)?.objectives)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::random_genotype;
    use crate::instance::{generate_instance, InstanceSpec};

    #[test]
    fn evaluation_is_pure() {
        let inst = generate_instance(&InstanceSpec::benchmark(2, 11)).unwrap();
        let g = random_genotype(&inst, 4);
        assert_eq!(evaluate(&g, &inst).unwrap(), evaluate(&g, &inst).unwrap());
    }

    #[test]
    fn emissions_scale_with_emission_factors() {
        let inst = generate_instance(&InstanceSpec::benchmark(3, 5)).unwrap();
        let mut doubled = inst.clone();
        for fleet in [&mut doubled.fleets.buses, &mut doubled.fleets.fuel, &mut doubled.fleets.electric, &mut doubled.fleets.hybrid] {
            for v in fleet.iter_mut() {
                v.emission_per_km *= 2.0;
            }
        }
        for seed in 0..20 {
            let g = random_genotype(&inst, seed);
            let a = evaluate(&g, &inst).unwrap();
            let b = evaluate(&g, &doubled).unwrap();
            assert_eq!(a.f1, b.f1);
            assert_eq!(a.f2, b.f2);
            assert!((b.f3 - 2.0 * a.f3).abs() <= 1e-9 * a.f3.max(1.0));
        }
    }

    #[test]
    fn decoded_plans_are_feasible() {
        for row in 1..=5 {
            let inst = generate_instance(&InstanceSpec::benchmark(row, row as u64)).unwrap();
            for seed in 0..50 {
                let g = random_genotype(&inst, seed);
                let ev = evaluate_detailed(&g, &inst).unwrap();
                let v = check_feasibility(&ev.plan, &ev.schedule, &ev.traces, &inst);
                assert!(v.is_empty(), "I{row} seed {seed}: {v:?}");
                assert!(ev.objectives.f3 >= 0.0);
            }
        }
    }
}
