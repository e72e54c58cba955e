//! Deterministic parallel helpers shared by the site loops.

use rayon::prelude::*;


/// Pairwise (tree-ordered) summation: deterministic and more accurate than a
/// running sum. The order depends only on the slice length.
pub fn tree_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        let mut s = 0.0;
        for &x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    tree_sum(&v[..mid]) + tree_sum(&v[mid..])
}

/// Parallel site map preserving index order (hence deterministic output).
pub(crate) fn par_site_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_sum_matches_exact_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(tree_sum(&v), 500500.0);
    }

    #[test]
    fn tree_sum_is_deterministic() {
        let v: Vec<f64> = (0..10000).map(|i| ((i * 2654435761_usize) % 997) as f64 * 1e-3).collect();
        assert_eq!(tree_sum(&v).to_bits(), tree_sum(&v).to_bits());
    }
}
