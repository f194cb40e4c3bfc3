use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `k` disjoint folds covering `0..n_rows`, each sorted ascending.
///
/// With labels, rows are shuffled within each class and dealt round-robin
/// with the dealer position carried across classes, so every fold holds
/// each class to within one row of its share.
pub fn kfold_indices(n_rows: usize, k: usize, labels: Option<&[u32]>, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    if k > n_rows {
        return Err(Error::InvalidArgument(format!("k={k} exceeds {n_rows} rows")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    match labels {
        Some(l) => {
            if l.len() != n_rows {
                return Err(Error::InvalidArgument("label count differs from row count".into()));
            }
            for (i, &c) in l.iter().enumerate() {
                groups.entry(c).or_default().push(i);
            }
        }
        None => {
            groups.insert(0, (0..n_rows).collect());
        }
    }
    let mut folds = vec![Vec::new(); k];
    let mut dealer = 0;
    for rows in groups.values_mut() {
        rows.shuffle(&mut rng);
        for &r in rows.iter() {
            folds[dealer % k].push(r);
            dealer += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_rows_five_folds() {
        let folds = kfold_indices(10, 5, None, 3).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(folds, kfold_indices(10, 5, None, 3).unwrap());
        assert_ne!(folds, kfold_indices(10, 5, None, 4).unwrap());
    }

    #[test]
    fn stratified_counts() {
        let labels = [0, 0, 0, 0, 0, 0, 1, 1, 1, 1];
        for seed in 0..10 {
            let folds = kfold_indices(10, 2, Some(&labels), seed).unwrap();
            for f in folds {
                let a = f.iter().filter(|&&r| labels[r] == 0).count();
                assert_eq!((a, f.len() - a), (3, 2));
            }
        }
    }

    #[test]
    fn errors() {
        assert!(kfold_indices(3, 5, None, 0).is_err());
        assert!(kfold_indices(3, 1, None, 0).is_err());
    }
}
