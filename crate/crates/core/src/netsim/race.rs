//! Exponential mining clocks and the private-chain race.

use rand::distr::Open01;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::rng;

/// Waiting time until the next block for a miner of relative `power` facing
/// `difficulty` expected seconds of unit-power work: an exponential draw with
/// rate `power / difficulty`. Always strictly positive.
pub fn modeled_block_time(rng: &mut ChaCha8Rng, power: f64, difficulty: f64) -> f64 {
    let u: f64 = rng.sample(Open01);
    -libm::log(u) * difficulty / power
}

/// Outcome of the race from one starting deficit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RaceResult {
    pub deficit: u32,
    pub trials: u64,
    pub successes: u64,
    pub frequency: f64,
}

/// A race is abandoned once the attacker has fallen this many blocks behind
/// its best position; with any honest majority the chance of recovering
/// from there is negligible.
pub const RACE_GIVE_UP: i64 = 60;

/// Catch-up frequencies for every deficit in `deficits` from the same
/// simulated races.
///
/// Each trial runs the two mining clocks against each other for at most
/// `max_blocks` blocks and records how far the attacker ever got ahead of
/// the honest chain relative to where it started. Starting `z` blocks
/// behind, the attacker catches up when that lead reaches `z`. Because all
/// deficits share the same trials, the frequencies are non-increasing in `z`.
pub fn attacker_race_profile(
    honest_power: f64,
    attacker_power: f64,
    deficits: &[u32],
    trials: u64,
    max_blocks: u64,
    seed: u64,
) -> Vec<RaceResult> {
    let mut successes = vec![0_u64; deficits.len()];
    let need = deficits.iter().copied().max().unwrap_or(0) as i64;
    for t in 0..trials {
        let best = if attacker_power <= 0.0 {
            0
        } else {
            race_once(
                &mut rng::seeded(rng::derive_seed(seed, t)),
                honest_power,
                attacker_power,
                need,
                max_blocks,
            )
        };
        for (s, &z) in successes.iter_mut().zip(deficits) {
            if best >= i64::from(z) {
                *s += 1;
            }
        }
    }
    deficits
        .iter()
        .zip(successes)
        .map(|(&deficit, s)| RaceResult {
            deficit,
            trials,
            successes: s,
            frequency: if trials == 0 {
                0.0
            } else {
                s as f64 / trials as f64
            },
        })
        .collect()
}

/// Largest attacker lead reached in one race, capped at `need`.
fn race_once(rng: &mut ChaCha8Rng, honest: f64, attacker: f64, need: i64, max_blocks: u64) -> i64 {
    let mut lead = 0_i64;
    let mut best = 0_i64;
    for _ in 0..max_blocks {
        let a = modeled_block_time(rng, attacker, 1.0);
        let h = if honest > 0.0 {
            modeled_block_time(rng, honest, 1.0)
        } else {
            f64::INFINITY
        };
        lead += if a < h { 1 } else { -1 };
        best = best.max(lead);
        if best >= need || best - lead >= RACE_GIVE_UP {
            break;
        }
    }
    best
}

/// Catch-up frequency from a single deficit.
pub fn attacker_race(
    honest_power: f64,
    attacker_power: f64,
    deficit: u32,
    trials: u64,
    max_blocks: u64,
    seed: u64,
) -> RaceResult {
    attacker_race_profile(
        honest_power,
        attacker_power,
        &[deficit],
        trials,
        max_blocks,
        seed,
    )[0]
}

/// Probability that an attacker with share `q` ever closes a `z`-block gap:
/// `(q/p)^z` when `q < p`, otherwise one.
pub fn gamblers_ruin(honest_power: f64, attacker_power: f64, z: u32) -> f64 {
    let total = honest_power + attacker_power;
    let (p, q) = (honest_power / total, attacker_power / total);
    if q >= p {
        1.0
    } else {
        (q / p).powi(z as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_times_positive_and_scale_with_power() {
        let mut r = rng::seeded(3);
        let n = 10_000;
        let slow: f64 = (0..n)
            .map(|_| modeled_block_time(&mut r, 1.0, 2.0))
            .sum::<f64>()
            / n as f64;
        let fast: f64 = (0..n)
            .map(|_| modeled_block_time(&mut r, 2.0, 2.0))
            .sum::<f64>()
            / n as f64;
        assert!((slow - 2.0).abs() < 0.1, "{slow}");
        assert!(((slow / fast) - 2.0).abs() < 0.1, "{}", slow / fast);
        assert!((0..n).all(|_| modeled_block_time(&mut r, 1.0, 1e-3) > 0.0));
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = rng::seeded(9);
        let mut b = rng::seeded(9);
        for _ in 0..100 {
            assert_eq!(
                modeled_block_time(&mut a, 1.5, 3.0).to_bits(),
                modeled_block_time(&mut b, 1.5, 3.0).to_bits()
            );
        }
    }

    #[test]
    fn powerless_attacker_never_wins() {
        assert_eq!(attacker_race(1.0, 0.0, 1, 1000, 1000, 0).successes, 0);
    }

    #[test]
    fn majority_attacker_almost_always_wins() {
        let r = attacker_race(0.4, 0.6, 5, 2000, 10_000, 1);
        assert!(r.frequency > 0.99, "{r:?}");
    }

    #[test]
    fn profile_is_non_increasing() {
        let rs = attacker_race_profile(0.7, 0.3, &[1, 2, 3, 4], 5000, 10_000, 4);
        assert!(rs.windows(2).all(|w| w[1].successes <= w[0].successes));
        assert!((rs[0].frequency - gamblers_ruin(0.7, 0.3, 1)).abs() < 0.03);
    }

    #[test]
    fn ruin_formula() {
        assert!((gamblers_ruin(0.9, 0.1, 2) - 1.0 / 81.0).abs() < 1e-15);
        assert_eq!(gamblers_ruin(0.4, 0.6, 3), 1.0);
    }
}
