use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AnnotateError, QAExample};

/// Per-hop quotas for a sample of `n`: `n / 3` each, with the remainder
/// going one extra to hop 1, then hop 2.
pub fn stratum_sizes(n: usize) -> [usize; 3] {
    let base = n / 3;
    let rem = n % 3;
    [base + usize::from(rem >= 1), base + usize::from(rem >= 2), base]
}

/// Draws a hop-stratified sample of `n` examples.
///
/// Each hop's quota is drawn uniformly without replacement, then the
/// combined sample is shuffled. The same `(inputs, n, seed)` always yields
/// the same sample.
pub fn sample_training_set(
    by_hop: [&[QAExample]; 3],
    n: usize,
    seed: u64,
) -> Result<Vec<QAExample>, AnnotateError> {
    let quotas = stratum_sizes(n);
    for (i, (pool, &needed)) in by_hop.iter().zip(&quotas).enumerate() {
        if pool.len() < needed {
            return Err(AnnotateError::Capacity {
                hop: i as u8 + 1,
                needed,
                available: pool.len(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(n);
    for (pool, &needed) in by_hop.iter().zip(&quotas) {
        let mut chosen = index::sample(&mut rng, pool.len(), needed).into_vec();
        chosen.sort_unstable();
        picked.extend(chosen.into_iter().map(|i| pool[i].clone()));
    }
    picked.shuffle(&mut rng);
    Ok(picked)
}
