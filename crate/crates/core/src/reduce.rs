//! Order-fixed reductions.
//!
//! Every sum over samples goes through here so results do not depend on the
//! rayon thread count: the input is cut into fixed-size chunks, chunks are
//! summed left to right (possibly in parallel), and chunk sums are combined
//! pairwise in index order.

use rayon::prelude::*;

const CHUNK: usize = 1024;

/// Sum of `f(x)` over `items` with a reduction tree that depends only on
/// `items.len()`.
pub(crate) fn sum_by<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    let partials: Vec<f64> = items
        .par_chunks(CHUNK)
        .map(|chunk| chunk.iter().map(&f).sum::<f64>())
        .collect();
    pairwise(&partials)
}

pub(crate) fn sum(values: &[f64]) -> f64 {
    sum_by(values, |&v| v)
}

fn pairwise(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise(a) + pairwise(b)
        }
    }
}

/// Mean and standard error (sample standard deviation over `√n`).
pub(crate) fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = sum_by(values, |&v| (v - mean) * (v - mean));
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, sd / (n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_result_across_thread_counts() {
        let values: Vec<f64> = (0..10_007).map(|i| ((i as f64) * 0.37).sin() * 1e3).collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sum(&values));
        let b = four.install(|| sum(&values));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn mean_stderr_small_cases() {
        assert_eq!(mean_stderr(&[]), (0.0, 0.0));
        assert_eq!(mean_stderr(&[3.0]), (3.0, 0.0));
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        // sd = sqrt(5/3), se = sd / 2
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }
}
