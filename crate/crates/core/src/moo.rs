//! Dominance, non-dominated sorting, crowding distance and front metrics.
//! All objectives are minimised.

use serde::{Deserialize, Serialize};

use crate::encoding::Genotype;
use crate::error::{Error, Result};
use crate::evaluator::ObjectiveVector;

pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    let (a, b) = (a.as_array(), b.as_array());
    a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
}

/// Fronts of indices into `points`, best first.
pub fn nondominated_sort(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i], &points[j]) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each point of a front, aligned with the input.
pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    for m in 0..3 {
        let value = |i: usize| front[i].as_array()[m];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)));
        let (lo, hi) = (value(order[0]), value(order[n - 1]));
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        if hi - lo <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            distance[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / (hi - lo);
        }
    }
    distance
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontMetrics {
    /// Number of Pareto solutions.
    pub nps: usize,
    /// Spacing.
    pub sm: f64,
    /// Diversification.
    pub dm: f64,
    /// Mean ideal distance.
    pub mid: f64,
}

/// Min-max normalised copy of `front`; constant objectives map to 0.
fn normalise(front: &[ObjectiveVector]) -> Vec<[f64; 3]> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in front {
        for (m, v) in p.as_array().into_iter().enumerate() {
            lo[m] = lo[m].min(v);
            hi[m] = hi[m].max(v);
        }
    }
    front
        .iter()
        .map(|p| {
            let a = p.as_array();
            std::array::from_fn(|m| if hi[m] > lo[m] { (a[m] - lo[m]) / (hi[m] - lo[m]) } else { 0.0 })
        })
        .collect()
}

pub fn front_metrics(front: &[ObjectiveVector]) -> Result<FrontMetrics> {
    let n = front.len();
    if n == 0 {
        return Err(Error::EmptyFront);
    }
    if n == 1 {
        return Ok(FrontMetrics { nps: 1, sm: 0.0, dm: 0.0, mid: 0.0 });
    }
    let pts = normalise(front);

    let nearest: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (0..3).map(|m| (pts[i][m] - pts[j][m]).abs()).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = nearest.iter().sum::<f64>() / n as f64;
    let sm = (nearest.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();

    let mut dm2 = 0.0;
    let mut ideal = [0.0; 3];
    for (m, slot) in ideal.iter_mut().enumerate() {
        let lo = pts.iter().map(|p| p[m]).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p[m]).fold(f64::NEG_INFINITY, f64::max);
        dm2 += (hi - lo).powi(2);
        *slot = lo;
    }
    let mid = pts
        .iter()
        .map(|p| (0..3).map(|m| (p[m] - ideal[m]).powi(2)).sum::<f64>().sqrt())
        .sum::<f64>()
        / n as f64;
    Ok(FrontMetrics { nps: n, sm, dm: dm2.sqrt(), mid })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontEntry {
    pub genotype: Genotype,
    pub objectives: ObjectiveVector,
}

/// Mutually non-dominated solutions with distinct objective vectors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub entries: Vec<FrontEntry>,
}

impl ParetoFront {
    /// Non-dominated subset of `candidates`, keeping the first genotype seen
    /// for each objective vector. Entries are sorted by (f1, f2, f3).
    pub fn from_candidates(candidates: impl IntoIterator<Item = FrontEntry>) -> Self {
        let mut archive = Archive::default();
        for c in candidates {
            archive.insert(c);
        }
        archive.into_front()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.objectives).collect()
    }

    pub fn metrics(&self) -> Result<FrontMetrics> {
        front_metrics(&self.objectives())
    }
}

/// Unbounded archive of non-dominated solutions.
#[derive(Debug, Clone, Default)]
pub struct Archive {
    entries: Vec<FrontEntry>,
}

impl Archive {
    /// Adds `entry` unless it is dominated or duplicates a stored vector;
    /// evicts what it dominates. Returns whether it was added.
    pub fn insert(&mut self, entry: FrontEntry) -> bool {
        if !self.accepts(&entry.objectives) {
            return false;
        }
        let new = &entry.objectives;
        self.entries.retain(|e| !dominates(new, &e.objectives));
        self.entries.push(entry);
        true
    }

    /// Whether `v` would be added: no stored vector dominates or equals it.
    pub fn accepts(&self, v: &ObjectiveVector) -> bool {
        !self.entries.iter().any(|e| dominates(&e.objectives, v) || e.objectives == *v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.objectives).collect()
    }

    pub fn into_front(self) -> ParetoFront {
        let mut entries = self.entries;
        entries.sort_by(|a, b| {
            let (a, b) = (a.objectives.as_array(), b.objectives.as_array());
            a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).then(a[2].total_cmp(&b[2]))
        });
        ParetoFront { entries }
    }
}
