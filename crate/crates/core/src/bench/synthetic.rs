//! Seeded generators for benchmark datasets. Every generator writes its label
//! to a column named [`LABEL`].

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::table::{Cell, RawTable};

pub const LABEL: &str = "class";
pub const HIGH_CARDINALITY_CATEGORIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// One 64-category feature carrying the signal plus two noise numerics.
    HighCardinality,
    /// Lognormal features with a label on the log scale.
    SkewedNumeric,
    /// Two numeric features; classes sit on either side of a 1σ gap.
    Separable,
}

impl SyntheticKind {
    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::HighCardinality => "highcard",
            SyntheticKind::SkewedNumeric => "skewed",
            SyntheticKind::Separable => "separable",
        }
    }

    pub fn default_rows(self) -> usize {
        match self {
            SyntheticKind::HighCardinality => 400,
            SyntheticKind::SkewedNumeric => 400,
            SyntheticKind::Separable => 200,
        }
    }

    pub fn generate(self, rows: usize, seed: u64) -> RawTable {
        match self {
            SyntheticKind::HighCardinality => high_cardinality(rows, seed),
            SyntheticKind::SkewedNumeric => skewed_numeric(rows, seed),
            SyntheticKind::Separable => separable(rows, seed),
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "highcard" => Ok(SyntheticKind::HighCardinality),
            "skewed" => Ok(SyntheticKind::SkewedNumeric),
            "separable" => Ok(SyntheticKind::Separable),
            other => Err(Error::InvalidArgument(format!("unknown synthetic dataset {other:?}"))),
        }
    }
}

fn label_cell(positive: bool) -> Cell {
    Cell::from(if positive { "pos" } else { "neg" })
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Each of the 64 categories is assigned a class; 10% of labels are flipped.
pub fn high_cardinality(rows: usize, seed: u64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assignment: Vec<bool> = (0..HIGH_CARDINALITY_CATEGORIES).map(|i| i % 2 == 0).collect();
    let mut cat = Vec::with_capacity(rows);
    let mut a = Vec::with_capacity(rows);
    let mut b = Vec::with_capacity(rows);
    let mut label = Vec::with_capacity(rows);
    for r in 0..rows {
        // every category appears before any repeats
        let k = if r < HIGH_CARDINALITY_CATEGORIES {
            r
        } else {
            rng.random_range(0..HIGH_CARDINALITY_CATEGORIES)
        };
        cat.push(Cell::Text(format!("k{k:02}")));
        a.push(Cell::Number(normal(&mut rng)));
        b.push(Cell::Number(normal(&mut rng)));
        label.push(label_cell(assignment[k] ^ rng.random_bool(0.1)));
    }
    RawTable::from_columns(vec![("category", cat), ("noise_a", a), ("noise_b", b), (LABEL, label)])
        .expect("generator columns are consistent")
}

pub fn skewed_numeric(rows: usize, seed: u64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<Cell>> = (0..3).map(|_| Vec::with_capacity(rows)).collect();
    let mut label = Vec::with_capacity(rows);
    for _ in 0..rows {
        let z: Vec<f64> = (0..3).map(|_| normal(&mut rng)).collect();
        for (c, zi) in cols.iter_mut().zip(&z) {
            c.push(Cell::Number((1.5 * zi).exp()));
        }
        label.push(label_cell(z[0] + 0.5 * z[1] + 0.5 * normal(&mut rng) > 0.0));
    }
    let mut named: Vec<(String, Vec<Cell>)> = cols
        .into_iter()
        .enumerate()
        .map(|(i, c)| (format!("x{i}"), c))
        .collect();
    named.push((LABEL.to_string(), label));
    RawTable::from_columns(named).expect("generator columns are consistent")
}

/// Balanced classes; `x0` is at least 0.5 from zero, on the class' side, so
/// the two clouds are separated by a gap of one unit of noise scale.
pub fn separable(rows: usize, seed: u64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x0 = Vec::with_capacity(rows);
    let mut x1 = Vec::with_capacity(rows);
    let mut label = Vec::with_capacity(rows);
    for r in 0..rows {
        let positive = r % 2 == 1;
        let offset = 0.5 + normal(&mut rng).abs();
        x0.push(Cell::Number(if positive { offset } else { -offset }));
        x1.push(Cell::Number(normal(&mut rng)));
        label.push(label_cell(positive));
    }
    RawTable::from_columns(vec![("x0", x0), ("x1", x1), (LABEL, label)]).expect("generator columns are consistent")
}
