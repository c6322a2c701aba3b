//! Normalised permutation entropy over ordinal patterns.

use crate::error::{Error, Result};

/// Minimum number of embedding windows per possible pattern.
pub const DEFAULT_WINDOWS_PER_PATTERN: usize = 100;

fn factorial(m: usize) -> usize {
    (1..=m).product()
}

/// Lehmer-code index in `0..m!` of the permutation that sorts one window.
///
/// Ties keep their order of occurrence.
#[inline]
fn pattern_index(x: &[f64], start: usize, m: usize, l: usize) -> usize {
    let mut order = [0usize; 7];
    let mut vals = [0f64; 7];
    for j in 0..m {
        vals[j] = x[start + j * l];
        order[j] = j;
    }
    // stable insertion sort of positions by value
    for i in 1..m {
        let key = order[i];
        let mut j = i;
        while j > 0 && vals[order[j - 1]] > vals[key] {
            order[j] = order[j - 1];
            j -= 1;
        }
        order[j] = key;
    }
    let mut code = 0;
    for i in 0..m {
        let smaller = (i + 1..m).filter(|&k| order[k] < order[i]).count();
        code = code * (m - i) + smaller;
    }
    code
}

/// Occurrence counts of each ordinal pattern, indexed by Lehmer code.
pub fn pattern_counts(x: &[f64], m: usize, l: usize) -> Result<Vec<u64>> {
    check_dims(m, l)?;
    let span = (m - 1) * l;
    if x.len() <= span {
        return Err(Error::InsufficientData {
            required: span + 1,
            actual: x.len(),
        });
    }
    let mut counts = vec![0u64; factorial(m)];
    for start in 0..x.len() - span {
        counts[pattern_index(x, start, m, l)] += 1;
    }
    Ok(counts)
}

fn check_dims(m: usize, l: usize) -> Result<()> {
    if !(3..=7).contains(&m) {
        return Err(Error::InvalidInput(format!(
            "embedding dimension {m} must lie in 3..=7"
        )));
    }
    if l == 0 {
        return Err(Error::InvalidInput("embedding delay must be >= 1".into()));
    }
    Ok(())
}

/// Shannon entropy of a count table normalised by `log(m!)`.
pub fn normalized_entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 || counts.len() < 2 {
        return 0.0;
    }
    let total = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    (h / (counts.len() as f64).ln()).clamp(0.0, 1.0)
}

/// Normalised permutation entropy with dimension `m` and embedding delay `l`
/// samples, requiring at least 100 windows per possible pattern.
pub fn permutation_entropy(x: &[f64], m: usize, l: usize) -> Result<f64> {
    permutation_entropy_with_floor(x, m, l, DEFAULT_WINDOWS_PER_PATTERN)
}

pub fn permutation_entropy_with_floor(
    x: &[f64],
    m: usize,
    l: usize,
    windows_per_pattern: usize,
) -> Result<f64> {
    check_dims(m, l)?;
    let span = (m - 1) * l;
    let required = span + windows_per_pattern * factorial(m);
    if x.len() < required {
        return Err(Error::InsufficientData {
            required,
            actual: x.len(),
        });
    }
    Ok(normalized_entropy(&pattern_counts(x, m, l)?))
}

/// Entropy as a function of embedding delay.
pub fn entropy_scan(x: &[f64], m: usize, lags: &[usize]) -> Result<Vec<(usize, f64)>> {
    lags.iter()
        .map(|&l| permutation_entropy(x, m, l).map(|h| (l, h)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::white_gaussian;
    use rand::Rng;
    use std::collections::HashMap;

    /// Count patterns by sorting each window explicitly and keying on the
    /// permutation vector.
    fn brute_force_counts(x: &[f64], m: usize, l: usize) -> HashMap<Vec<usize>, u64> {
        let mut map = HashMap::new();
        for start in 0..x.len() - (m - 1) * l {
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by(|&a, &b| {
                x[start + a * l]
                    .partial_cmp(&x[start + b * l])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            *map.entry(idx).or_insert(0) += 1;
        }
        map
    }

    fn brute_force_entropy(map: &HashMap<Vec<usize>, u64>, m: usize) -> f64 {
        let total: u64 = map.values().sum();
        let h: f64 = map
            .values()
            .map(|&c| {
                let p = c as f64 / total as f64;
                -p * p.ln()
            })
            .sum();
        h / (factorial(m) as f64).ln()
    }

    #[test]
    fn monotone_series_has_zero_entropy() {
        let x: Vec<f64> = (0..6000).map(|i| i as f64 * 0.5).collect();
        for m in 3..=7 {
            assert_eq!(permutation_entropy_with_floor(&x, m, 1, 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn counts_match_brute_force() {
        let x = white_gaussian(1000, 1.0, 17).unwrap();
        for m in [3, 4] {
            for l in [1, 3] {
                let counts = pattern_counts(&x, m, l).unwrap();
                let bf = brute_force_counts(&x, m, l);
                let mut a: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
                let mut b: Vec<u64> = bf.values().copied().collect();
                a.sort_unstable();
                b.sort_unstable();
                assert_eq!(a, b);
                let h = normalized_entropy(&counts);
                assert!((h - brute_force_entropy(&bf, m)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lehmer_codes_are_a_bijection() {
        // every permutation of 0..5 maps to a distinct index
        let m = 5;
        let mut seen = vec![false; factorial(m)];
        let mut perm: Vec<usize> = (0..m).collect();
        fn permute(k: usize, perm: &mut Vec<usize>, seen: &mut Vec<bool>) {
            if k == perm.len() {
                let x: Vec<f64> = perm.iter().map(|&v| v as f64).collect();
                let idx = pattern_index(&x, 0, perm.len(), 1);
                assert!(!seen[idx]);
                seen[idx] = true;
                return;
            }
            for i in k..perm.len() {
                perm.swap(k, i);
                permute(k + 1, perm, seen);
                perm.swap(k, i);
            }
        }
        permute(0, &mut perm, &mut seen);
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn ties_follow_occurrence_order() {
        let x = [1.0, 1.0, 1.0, 1.0, 1.0];
        let counts = pattern_counts(&x, 3, 1).unwrap();
        // identity permutation has code 0
        assert_eq!(counts[0], 3);
    }

    #[test]
    fn iid_uniform_is_near_maximal() {
        let n = 1_000_000;
        let mut rng = crate::seed::rng(123);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let h = permutation_entropy(&x, 4, 1).unwrap();
        let bias = 23.0 / (2.0 * n as f64 * (24f64).ln());
        assert!(h >= 0.999, "{h}");
        assert!(1.0 - h < 10.0 * bias, "{h} bias {bias}");
    }

    #[test]
    fn short_series_reports_required_length() {
        let x = white_gaussian(500, 1.0, 1).unwrap();
        match permutation_entropy(&x, 4, 1) {
            Err(Error::InsufficientData { required, actual }) => {
                assert_eq!(required, 3 + 2400);
                assert_eq!(actual, 500);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_dimensions_rejected() {
        let x = vec![0.0; 100_000];
        assert!(permutation_entropy(&x, 2, 1).is_err());
        assert!(permutation_entropy(&x, 8, 1).is_err());
        assert!(permutation_entropy(&x, 4, 0).is_err());
    }

    #[test]
    fn scan_returns_one_value_per_lag() {
        let x = white_gaussian(20_000, 1.0, 2).unwrap();
        let s = entropy_scan(&x, 3, &[1, 2, 5]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[2].0, 5);
        assert!(s.iter().all(|&(_, h)| (0.99..=1.0).contains(&h)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn invariant_under_monotone_maps(seed in any::<u64>(), m in 3usize..6, l in 1usize..4) {
                let x = white_gaussian(3000, 1.0, seed).unwrap();
                let y: Vec<f64> = x.iter().map(|v| v.exp() * 3.0 + 1.0).collect();
                let z: Vec<f64> = x.iter().map(|v| v * v * v).collect();
                let hx = normalized_entropy(&pattern_counts(&x, m, l).unwrap());
                let hy = normalized_entropy(&pattern_counts(&y, m, l).unwrap());
                let hz = normalized_entropy(&pattern_counts(&z, m, l).unwrap());
                prop_assert_eq!(hx, hy);
                prop_assert_eq!(hx, hz);
            }

            #[test]
            fn entropy_in_unit_interval(vals in proptest::collection::vec(-10i32..10, 50..400), m in 3usize..5) {
                let x: Vec<f64> = vals.iter().map(|&v| v as f64).collect();
                let counts = pattern_counts(&x, m, 1).unwrap();
                let h = normalized_entropy(&counts);
                prop_assert!((0.0..=1.0).contains(&h));
                let distinct = counts.iter().filter(|&&c| c > 0).count();
                prop_assert_eq!(h == 0.0, distinct == 1);
            }
        }
    }
}
