//! NSGA-II over genotypes: order crossover and swap mutation on the four
//! permutation arrays, uniform crossover and resampling on the entry array.
//!
//! Every random draw comes from a stream keyed by (seed, generation, slot), so
//! a run gives the same front whatever the number of worker threads.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{decode, random_genotype_from, Genotype, GenotypeShape};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate_plan, ObjectiveVector};
use crate::instance::Instance;
use crate::moo::{crowding_distance, nondominated_sort, FrontEntry, ParetoFront};

fn default_retries() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsgaParams {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub seed: u64,
    /// Worker threads for evaluation; `None` uses the global pool.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Attempts to replace an individual that cannot be decoded.
    #[serde(default = "default_retries")]
    pub max_retries: usize,
}

impl Default for NsgaParams {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 200,
            crossover_rate: 0.8,
            mutation_rate: 0.1,
            tournament_size: 2,
            seed: 0,
            workers: None,
            max_retries: default_retries(),
        }
    }
}

impl NsgaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| Err(Error::InvalidParams { field, reason: reason.into() });
        if self.population < 4 || self.population % 2 != 0 {
            return bad("population", "must be even and at least 4");
        }
        if self.generations < 1 {
            return bad("generations", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover_rate", "must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate", "must lie in [0, 1]");
        }
        if self.tournament_size < 1 || self.tournament_size > self.population {
            return bad("tournament_size", "must lie in 1..=population");
        }
        if self.workers == Some(0) {
            return bad("workers", "must be at least 1");
        }
        if self.max_retries < 1 {
            return bad("max_retries", "must be at least 1");
        }
        Ok(())
    }
}

/// Random stream for one slot of one generation.
pub(crate) fn stream(seed: u64, generation: usize, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | slot as u64);
    rng
}

/// Order crossover: the child keeps `a[lo..=hi]` in place and fills the other
/// positions with the remaining values in the order they follow `hi` in `b`.
fn order_crossover(a: &[u32], b: &[u32], lo: usize, hi: usize) -> Vec<u32> {
    let n = a.len();
    let mut taken = vec![false; n + 1];
    let mut child = vec![0u32; n];
    for i in lo..=hi {
        child[i] = a[i];
        taken[a[i] as usize] = true;
    }
    let mut pos = (hi + 1) % n;
    for k in 0..n {
        let v = b[(hi + 1 + k) % n];
        if !taken[v as usize] {
            child[pos] = v;
            pos = (pos + 1) % n;
        }
    }
    child
}

fn ox_pair(a: &[u32], b: &[u32], rng: &mut impl Rng) -> (Vec<u32>, Vec<u32>) {
    let n = a.len();
    if n < 2 {
        return (a.to_vec(), b.to_vec());
    }
    let mut lo = rng.gen_range(0..n);
    let mut hi = rng.gen_range(0..n);
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    (order_crossover(a, b, lo, hi), order_crossover(b, a, lo, hi))
}

fn same_shape(a: &Genotype, b: &Genotype) -> Result<()> {
    let pairs = [
        ("assignment array", a.assignment_array.len(), b.assignment_array.len()),
        ("carpool array", a.carpool_array.len(), b.carpool_array.len()),
        ("bus route array", a.bus_route_array.len(), b.bus_route_array.len()),
        ("grey-zone route array", a.trz_route_array.len(), b.trz_route_array.len()),
        ("entry array", a.entry_array.len(), b.entry_array.len()),
    ];
    for (what, expected, actual) in pairs {
        if expected != actual {
            return Err(Error::ShapeMismatch { what, expected, actual });
        }
    }
    Ok(())
}

/// Two children by order crossover on each permutation array and uniform
/// crossover on the entry array.
pub fn crossover(p1: &Genotype, p2: &Genotype, rng: &mut impl Rng) -> Result<(Genotype, Genotype)> {
    same_shape(p1, p2)?;
    let (a1, a2) = ox_pair(&p1.assignment_array, &p2.assignment_array, rng);
    let (c1, c2) = ox_pair(&p1.carpool_array, &p2.carpool_array, rng);
    let (b1, b2) = ox_pair(&p1.bus_route_array, &p2.bus_route_array, rng);
    let (t1, t2) = ox_pair(&p1.trz_route_array, &p2.trz_route_array, rng);
    let mut e1 = p1.entry_array.clone();
    let mut e2 = p2.entry_array.clone();
    for i in 0..e1.len() {
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut e1[i], &mut e2[i]);
        }
    }
    Ok((
        Genotype { assignment_array: a1, carpool_array: c1, bus_route_array: b1, trz_route_array: t1, entry_array: e1 },
        Genotype { assignment_array: a2, carpool_array: c2, bus_route_array: b2, trz_route_array: t2, entry_array: e2 },
    ))
}

/// With probability `rate`, swaps two positions of each permutation array;
/// resamples each entry position with probability `rate`.
pub fn mutate(g: &Genotype, rate: f64, n_entries: usize, rng: &mut impl Rng) -> Genotype {
    let mut out = g.clone();
    for array in [
        &mut out.assignment_array,
        &mut out.carpool_array,
        &mut out.bus_route_array,
        &mut out.trz_route_array,
    ] {
        if array.len() >= 2 && rng.gen_bool(rate) {
            let pick = sample(rng, array.len(), 2);
            array.swap(pick.index(0), pick.index(1));
        }
    }
    if n_entries > 0 {
        for e in &mut out.entry_array {
            if rng.gen_bool(rate) {
                *e = rng.gen_range(1..=n_entries as u32);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genotype: Genotype,
    pub objectives: ObjectiveVector,
}

fn score(genotype: Genotype, inst: &Instance) -> Result<Individual> {
    let plan = decode(&genotype, inst)?;
    let objectives = evaluate_plan(plan, inst)?.objectives;
    Ok(Individual { genotype, objectives })
}

/// Scores `first`, falling back to fresh draws from `retry` when the
/// genotype cannot be decoded.
fn score_or_regenerate(
    first: Genotype,
    inst: &Instance,
    retries: usize,
    rng: &mut ChaCha8Rng,
    mut retry: impl FnMut(&mut ChaCha8Rng) -> Genotype,
) -> Result<Individual> {
    let mut candidate = first;
    let mut last_err = None;
    for _ in 0..retries {
        match score(candidate, inst) {
            Ok(ind) => return Ok(ind),
            Err(e @ Error::Infeasible { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
        candidate = retry(rng);
    }
    Err(Error::Solver(format!(
        "no decodable individual after {retries} attempts: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// Hooks into a run.
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Genotypes placed first in the initial population.
    pub initial: Vec<Genotype>,
    /// Called with the population after initialisation (generation 0) and
    /// after every environmental selection.
    pub observer: Option<&'a mut dyn FnMut(usize, &[Individual])>,
}

struct Ranked {
    rank: Vec<usize>,
    crowding: Vec<f64>,
}

fn rank_population(pop: &[Individual]) -> (Vec<Vec<usize>>, Ranked) {
    let objs: Vec<ObjectiveVector> = pop.iter().map(|i| i.objectives).collect();
    let fronts = nondominated_sort(&objs);
    let mut rank = vec![0; pop.len()];
    let mut crowding = vec![0.0; pop.len()];
    for (r, front) in fronts.iter().enumerate() {
        let pts: Vec<ObjectiveVector> = front.iter().map(|&i| objs[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&pts)) {
            rank[i] = r;
            crowding[i] = d;
        }
    }
    (fronts, Ranked { rank, crowding })
}

fn better(r: &Ranked, a: usize, b: usize) -> bool {
    r.rank[a] < r.rank[b] || (r.rank[a] == r.rank[b] && r.crowding[a] > r.crowding[b])
}

fn tournament(r: &Ranked, size: usize, rng: &mut impl Rng) -> usize {
    let n = r.rank.len();
    let mut best = rng.gen_range(0..n);
    for _ in 1..size {
        let c = rng.gen_range(0..n);
        if better(r, c, best) {
            best = c;
        }
    }
    best
}

/// Best `n` of `pool` by rank, then by crowding distance within the last front.
fn environmental_selection(pool: Vec<Individual>, n: usize) -> Vec<Individual> {
    let (fronts, ranked) = rank_population(&pool);
    let mut keep: Vec<usize> = Vec::with_capacity(n);
    for front in fronts {
        if keep.len() + front.len() <= n {
            keep.extend(front);
        } else {
            let mut rest = front;
            rest.sort_by(|&a, &b| ranked.crowding[b].total_cmp(&ranked.crowding[a]));
            keep.extend(rest.into_iter().take(n - keep.len()));
        }
        if keep.len() == n {
            break;
        }
    }
    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().expect("selected once")).collect()
}

fn thread_pool(workers: Option<usize>) -> Result<Option<rayon::ThreadPool>> {
    workers
        .map(|w| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Solver(format!("cannot start {w} workers: {e}")))
        })
        .transpose()
}

fn on_pool<T: Send>(pool: &Option<rayon::ThreadPool>, job: impl FnOnce() -> T + Send) -> T {
    match pool {
        Some(p) => p.install(job),
        None => job(),
    }
}

pub fn run_nsga2(inst: &Instance, params: &NsgaParams) -> Result<ParetoFront> {
    run_nsga2_with(inst, params, RunOptions::default())
}

pub fn run_nsga2_with(inst: &Instance, params: &NsgaParams, mut options: RunOptions<'_>) -> Result<ParetoFront> {
    params.validate()?;
    let shape = GenotypeShape::of(inst);
    for g in &options.initial {
        g.validate(&shape)?;
    }
    let n = params.population;
    let initial = std::mem::take(&mut options.initial);
    let pool = thread_pool(params.workers)?;
    let mut population: Vec<Individual> = on_pool(&pool, || {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(params.seed, 0, i);
                let first = initial.get(i).cloned().unwrap_or_else(|| random_genotype_from(inst, &mut rng));
                score_or_regenerate(first, inst, params.max_retries, &mut rng, |r| random_genotype_from(inst, r))
            })
            .collect::<Result<_>>()
    })?;
    if let Some(obs) = options.observer.as_mut() {
        obs(0, &population);
    }

    for generation in 1..=params.generations {
        let (_, ranked) = rank_population(&population);
        let parents = &population;
        let offspring: Vec<Individual> = on_pool(&pool, || {
            (0..n / 2)
                .into_par_iter()
                .map(|k| -> Result<[Individual; 2]> {
                    let mut rng = stream(params.seed, generation, k);
                    let a = &parents[tournament(&ranked, params.tournament_size, &mut rng)].genotype;
                    let b = &parents[tournament(&ranked, params.tournament_size, &mut rng)].genotype;
                    let (c1, c2) = if rng.gen_bool(params.crossover_rate) {
                        crossover(a, b, &mut rng)?
                    } else {
                        (a.clone(), b.clone())
                    };
                    let child = |c: Genotype, parent: &Genotype, rng: &mut ChaCha8Rng| {
                        let first = mutate(&c, params.mutation_rate, shape.entries, rng);
                        score_or_regenerate(first, inst, params.max_retries, rng, |r| mutate(parent, 1.0, shape.entries, r))
                    };
                    Ok([child(c1, a, &mut rng)?, child(c2, b, &mut rng)?])
                })
                .collect::<Result<Vec<_>>>()
        })?
        .into_iter()
        .flatten()
        .collect();
        let mut pool_of_candidates = population;
        pool_of_candidates.extend(offspring);
        population = environmental_selection(pool_of_candidates, n);
        if let Some(obs) = options.observer.as_mut() {
            obs(generation, &population);
        }
    }
    let final_pop = population;

    let (fronts, _) = rank_population(&final_pop);
    Ok(ParetoFront::from_candidates(fronts[0].iter().map(|&i| FrontEntry {
        genotype: final_pop[i].genotype.clone(),
        objectives: final_pop[i].objectives,
    })))
}
