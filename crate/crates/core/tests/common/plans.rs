//! Plans built to a recipe rather than drawn uniformly.

use greyzone::encoding::{random_genotype, Genotype};
use greyzone::instance::Instance;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random genotype whose carpool array fills every car: each segment starts
/// with its owner, then random non-owners up to the seat count.
pub fn full_carpools(inst: &Instance, seed: u64) -> Genotype {
    let mut g = random_genotype(inst, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let owners = inst.car_owners();
    let mut others: Vec<usize> = (0..inst.n_employees()).filter(|e| !owners.contains(e)).collect();
    others.shuffle(&mut rng);
    let mut others = others.into_iter();
    let n = inst.n_employees() as u32;
    let mut array = Vec::new();
    for (car, &owner) in owners.iter().enumerate() {
        array.push(owner as u32 + 1);
        let seats = inst.fleets.fuel[car].capacity as usize - 1;
        array.extend(others.by_ref().take(seats).map(|e| e as u32 + 1));
        array.push(n + car as u32 + 1);
    }
    array.extend(others.map(|e| e as u32 + 1));
    g.carpool_array = array;
    g
}
