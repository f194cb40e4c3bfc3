#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tabmunge::table::{Cell, RawTable};

pub const WORDS: [&str; 8] = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"];

/// Mixed table: numeric `n0..`, categoric `c0..`, label `y`, with a share
/// of missing feature cells.
pub fn random_table(seed: u64, rows: usize, numeric: usize, categoric: usize, missing_rate: f64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<(String, Vec<Cell>)> = Vec::new();
    for j in 0..numeric {
        let scale: f64 = rng.random_range(0.5..20.0);
        let shift: f64 = rng.random_range(-50.0..50.0);
        let col = (0..rows)
            .map(|r| {
                // keep the first row present so the column is always numeric
                if r > 0 && rng.random_bool(missing_rate) {
                    Cell::Missing
                } else {
                    let z: f64 = rng.sample(StandardNormal);
                    Cell::Number(shift + scale * z)
                }
            })
            .collect();
        cols.push((format!("n{j}"), col));
    }
    for j in 0..categoric {
        let k = rng.random_range(2..=WORDS.len());
        let col = (0..rows)
            .map(|_| {
                if rng.random_bool(missing_rate) {
                    Cell::Missing
                } else {
                    Cell::Text(format!("{}{}", WORDS[rng.random_range(0..k)], j))
                }
            })
            .collect();
        cols.push((format!("c{j}"), col));
    }
    let labels = (0..rows)
        .map(|r| {
            Cell::Text(
                if r % 3 == 0 || rng.random_bool(0.3) {
                    "yes"
                } else {
                    "no"
                }
                .to_string(),
            )
        })
        .collect();
    cols.push(("y".to_string(), labels));
    RawTable::from_columns(cols).unwrap()
}

pub fn bundled_path(name: &str) -> String {
    format!("{}/data/{name}.csv", env!("CARGO_MANIFEST_DIR"))
}
