use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::CorpusError;

/// Uniform sample of `n` items without replacement, kept in input order.
pub fn sample_questions<T: Clone>(posts: &[T], n: usize, seed: u64) -> Result<Vec<T>, CorpusError> {
    if n > posts.len() {
        return Err(CorpusError::InsufficientPosts {
            requested: n,
            available: posts.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, posts.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| posts[i].clone()).collect())
}
