use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Ascending row indices.
    pub train: Vec<usize>,
    /// Ascending row indices.
    pub validation: Vec<usize>,
    pub stratified: bool,
}

/// Holds out `round(fraction × n)` rows. Each class contributes its share
/// rounded by largest remainder (ties to the class seen first in sorted
/// label order); rows within a class are chosen by a seeded shuffle. With a
/// single class the split is a plain shuffle and `stratified` is false.
pub fn validation_split<S: AsRef<str> + Ord>(labels: &[S], fraction: f64, seed: u64) -> Result<Partition> {
    if !(0.0..=0.5).contains(&fraction) {
        return Err(Error::InvalidFraction(fraction));
    }
    let n = labels.len();
    let n_valid = (fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut classes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        classes.entry(l.as_ref()).or_default().push(i);
    }
    let stratified = classes.len() >= 2;
    let groups: Vec<Vec<usize>> = if stratified {
        classes.into_values().collect()
    } else {
        vec![(0..n).collect()]
    };

    let shares: Vec<f64> = groups.iter().map(|g| fraction * g.len() as f64).collect();
    let mut quota: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| {
        (shares[b] - shares[b].floor())
            .total_cmp(&(shares[a] - shares[a].floor()))
            .then(a.cmp(&b))
    });
    let mut short = n_valid.saturating_sub(quota.iter().sum());
    for &g in &order {
        if short == 0 {
            break;
        }
        if quota[g] < groups[g].len() {
            quota[g] += 1;
            short -= 1;
        }
    }

    let mut validation = Vec::with_capacity(n_valid);
    for (mut rows, q) in groups.into_iter().zip(quota) {
        rows.shuffle(&mut rng);
        validation.extend_from_slice(&rows[..q]);
    }
    validation.sort_unstable();
    let mut held = vec![false; n];
    for &r in &validation {
        held[r] = true;
    }
    Ok(Partition {
        train: (0..n).filter(|&r| !held[r]).collect(),
        validation,
        stratified,
    })
}
