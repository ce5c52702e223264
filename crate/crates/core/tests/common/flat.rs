//! Brute force over every genotype of an instance, independent of the
//! structured enumerator: each array is walked through all its permutations
//! and every genotype goes through the public decoder and evaluator.

use greyzone::encoding::{Genotype, GenotypeShape};
use greyzone::evaluator::{evaluate, ObjectiveVector};
use greyzone::instance::Instance;
use itertools::Itertools;
use rayon::prelude::*;

fn perms(n: usize) -> Vec<Vec<u32>> {
    (1..=n as u32).permutations(n).collect()
}

fn entry_arrays(cars: usize, entries: usize) -> Vec<Vec<u32>> {
    if cars == 0 {
        return vec![Vec::new()];
    }
    (0..cars).map(|_| 1..=entries as u32).multi_cartesian_product().collect()
}

/// Number of genotypes the oracle visits.
pub fn genotype_count(inst: &Instance) -> usize {
    let s = GenotypeShape::of(inst);
    let fact = |n: usize| (1..=n).product::<usize>();
    fact(s.assignment_len())
        * fact(s.carpool_len())
        * fact(s.bus_route_len())
        * fact(s.trz_route_len())
        * s.entries.pow(s.cars as u32)
}

fn nondominated(points: Vec<ObjectiveVector>) -> Vec<ObjectiveVector> {
    let le = |a: &ObjectiveVector, b: &ObjectiveVector| a.f1 <= b.f1 && a.f2 <= b.f2 && a.f3 <= b.f3;
    let mut keep: Vec<ObjectiveVector> = points
        .iter()
        .filter(|p| !points.iter().any(|q| le(q, p) && q != *p))
        .copied()
        .collect();
    keep.sort_by(|a, b| a.f1.total_cmp(&b.f1).then(a.f2.total_cmp(&b.f2)).then(a.f3.total_cmp(&b.f3)));
    keep.dedup();
    keep
}

/// Pareto front of every decodable genotype, sorted by (f1, f2, f3).
pub fn flat_front(inst: &Instance) -> Vec<ObjectiveVector> {
    let s = GenotypeShape::of(inst);
    let carpool = perms(s.carpool_len());
    let bus = perms(s.bus_route_len());
    let trz = perms(s.trz_route_len());
    let entries = entry_arrays(s.cars, s.entries);
    let vectors: Vec<ObjectiveVector> = perms(s.assignment_len())
        .into_par_iter()
        .flat_map_iter(|assignment| {
            let mut distinct: Vec<ObjectiveVector> = Vec::new();
            for c in &carpool {
                for b in &bus {
                    for t in &trz {
                        for e in &entries {
                            let g = Genotype {
                                assignment_array: assignment.clone(),
                                carpool_array: c.clone(),
                                bus_route_array: b.clone(),
                                trz_route_array: t.clone(),
                                entry_array: e.clone(),
                            };
                            if let Ok(v) = evaluate(&g, inst) {
                                if !distinct.contains(&v) {
                                    distinct.push(v);
                                }
                            }
                        }
                    }
                }
            }
            nondominated(distinct)
        })
        .collect();
    nondominated(vectors)
}
