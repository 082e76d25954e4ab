//! Seed-parallel execution with results merged in seed order.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// `f` over `seeds` on `workers` threads; the output order follows `seeds`.
pub fn map_seeds<T, F>(seeds: &[u64], workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if workers <= 1 {
        return Ok(seeds.iter().map(|&s| f(s)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| seeds.par_iter().map(|&s| f(s)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let seeds: Vec<u64> = (0..100).collect();
        let one = map_seeds(&seeds, 1, |s| s * s).unwrap();
        let many = map_seeds(&seeds, 4, |s| s * s).unwrap();
        assert_eq!(one, many);
        assert_eq!(many[7], 49);
    }
}
