//! Seeded generators for rational test data.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distribution::RationalDistribution;
use crate::group::FiniteAbelianGroup;
use crate::rational::{self, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `|p| <= max_num` and `1 <= q <= max_den`.
pub fn rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    let p = rng.gen_range(-max_num..=max_num);
    let q = rng.gen_range(1..=max_den);
    rational::ratio(p, q)
}

pub fn rational_vector<R: Rng>(rng: &mut R, len: usize, max_num: i64, max_den: i64) -> Vec<Rational> {
    (0..len).map(|_| rational(rng, max_num, max_den)).collect()
}

/// A distribution whose masses are multiples of `1/q` for a random `q <= max_den`.
pub fn distribution<R: Rng>(
    rng: &mut R,
    group: &FiniteAbelianGroup,
    max_den: i64,
) -> RationalDistribution {
    let q = rng.gen_range(1..=max_den);
    let mut units = vec![0i64; group.order()];
    // concentrate on a few points often, so degenerate and sparse laws show up
    let spread = rng.gen_range(1..=group.order());
    let support: Vec<usize> = (0..spread).map(|_| rng.gen_range(0..group.order())).collect();
    for _ in 0..q {
        units[support[rng.gen_range(0..support.len())]] += 1;
    }
    let masses = units.into_iter().map(|u| rational::ratio(u, q)).collect();
    RationalDistribution::new(group, masses).expect("units sum to the denominator")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_repeat() {
        let g = FiniteAbelianGroup::new(&[3, 3]).unwrap();
        let a: Vec<_> = (0..5).map(|_| 0).scan(rng(7), |r, _| Some(distribution(r, &g, 8))).collect();
        let b: Vec<_> = (0..5).map(|_| 0).scan(rng(7), |r, _| Some(distribution(r, &g, 8))).collect();
        assert_eq!(a, b);
        for d in &a {
            assert!(d.masses().iter().all(|m| *m.denom() <= 8.into()));
        }
    }
}
