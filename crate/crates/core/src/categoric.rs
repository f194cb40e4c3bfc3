//! Categoric encoders over a frequency- or alphabet-ordered vocabulary.
//!
//! Slot 0 of every vocabulary is reserved for missing and unseen entries, so
//! a vocabulary with `k` real categories has `n = k + 1` slots. Binarization
//! writes the slot index big-endian over `ceil(log2(n))` columns; one-hot
//! spends one column per real category and leaves the missing row all zeros.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_HASH_CAP: u64 = 64;
pub const DEFAULT_MIN_SUBSTRING_LEN: usize = 5;
pub const DEFAULT_MAX_ACTIVATIONS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VocabOrder {
    Frequency,
    Alphabetic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocab {
    categories: Vec<String>,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    categories: Vec<String>,
}

impl From<VocabRepr> for Vocab {
    fn from(r: VocabRepr) -> Self {
        Vocab::from_ordered(r.categories)
    }
}

impl From<Vocab> for VocabRepr {
    fn from(v: Vocab) -> Self {
        VocabRepr {
            categories: v.categories,
        }
    }
}

impl PartialEq for Vocab {
    fn eq(&self, other: &Self) -> bool {
        self.categories == other.categories
    }
}

impl Vocab {
    /// Categories already in slot order (slot 1 first).
    pub fn from_ordered(categories: Vec<String>) -> Self {
        let index = categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i as u32 + 1))
            .collect();
        Self { categories, index }
    }

    /// Slot count including the reserved slot 0.
    pub fn n(&self) -> usize {
        self.categories.len() + 1
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn slot(&self, value: Option<&str>) -> u32 {
        value.and_then(|v| self.index.get(v).copied()).unwrap_or(0)
    }

    pub fn category(&self, slot: u32) -> Option<&str> {
        if slot == 0 {
            None
        } else {
            self.categories.get(slot as usize - 1).map(String::as_str)
        }
    }

    pub fn contains(&self, value: &str) -> bool {
        self.index.contains_key(value)
    }
}

pub fn fit_vocab<S: AsRef<str>>(train_values: &[Option<S>], order: VocabOrder) -> Vocab {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in train_values.iter().flatten() {
        *counts.entry(v.as_ref()).or_default() += 1;
    }
    let mut entries: Vec<(&str, usize)> = counts.into_iter().collect();
    if order == VocabOrder::Frequency {
        // stable sort over the lexicographic BTreeMap order keeps the tie-break
        entries.sort_by_key(|e| std::cmp::Reverse(e.1));
    }
    Vocab::from_ordered(entries.into_iter().map(|(c, _)| c.to_string()).collect())
}

/// `ceil(log2(n))`, with `n = 1` needing no columns.
pub fn binary_width(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

pub fn encode_hashed(hash_cap: u64, value: Option<&str>) -> u64 {
    match value {
        None => 0,
        Some(v) => fnv1a64(v.as_bytes()) % hash_cap,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CategoricKind {
    #[serde(rename = "onht")]
    Onht,
    #[serde(rename = "1010")]
    B1010,
    #[serde(rename = "ord3")]
    Ord3,
    #[serde(rename = "ordl")]
    Ordl,
    #[serde(rename = "hsh2")]
    Hsh2,
    #[serde(rename = "or19")]
    Or19,
}

impl CategoricKind {
    pub fn code(self) -> &'static str {
        match self {
            CategoricKind::Onht => "onht",
            CategoricKind::B1010 => "1010",
            CategoricKind::Ord3 => "ord3",
            CategoricKind::Ordl => "ordl",
            CategoricKind::Hsh2 => "hsh2",
            CategoricKind::Or19 => "or19",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoricParams {
    pub hash_cap: u64,
    pub min_substring_len: usize,
    pub max_activations: usize,
}

impl Default for CategoricParams {
    fn default() -> Self {
        Self {
            hash_cap: DEFAULT_HASH_CAP,
            min_substring_len: DEFAULT_MIN_SUBSTRING_LEN,
            max_activations: DEFAULT_MAX_ACTIVATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedActivation {
    pub substring: String,
    /// Substring length in characters.
    pub tier: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedModel {
    pub activations: Vec<ParsedActivation>,
    /// Whether any training entry carried a digit run.
    pub numeric_present: bool,
    pub numeric_mean: f64,
    pub numeric_std: f64,
    pub vocab: Vocab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CategoricBasis {
    #[serde(rename = "onht")]
    Onht { vocab: Vocab },
    #[serde(rename = "1010")]
    B1010 { vocab: Vocab },
    #[serde(rename = "ord3")]
    Ord3 { vocab: Vocab },
    #[serde(rename = "ordl")]
    Ordl { vocab: Vocab },
    #[serde(rename = "hsh2")]
    Hsh2 { hash_cap: u64 },
    #[serde(rename = "or19")]
    Or19(ParsedModel),
}

pub fn fit_categoric<S: AsRef<str>>(
    kind: CategoricKind,
    train_values: &[Option<S>],
    params: &CategoricParams,
) -> Result<CategoricBasis> {
    Ok(match kind {
        CategoricKind::Onht => CategoricBasis::Onht {
            vocab: fit_vocab(train_values, VocabOrder::Frequency),
        },
        CategoricKind::B1010 => CategoricBasis::B1010 {
            vocab: fit_vocab(train_values, VocabOrder::Frequency),
        },
        CategoricKind::Ord3 => CategoricBasis::Ord3 {
            vocab: fit_vocab(train_values, VocabOrder::Frequency),
        },
        CategoricKind::Ordl => CategoricBasis::Ordl {
            vocab: fit_vocab(train_values, VocabOrder::Alphabetic),
        },
        CategoricKind::Hsh2 => {
            if params.hash_cap < 2 {
                return Err(Error::InvalidArgument("hash_cap must be at least 2".into()));
            }
            CategoricBasis::Hsh2 {
                hash_cap: params.hash_cap,
            }
        }
        CategoricKind::Or19 => fit_parsed(train_values, params.min_substring_len, params.max_activations)?,
    })
}

static DIGIT_RUN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[0-9]+(?:\.[0-9]+)?").unwrap());

/// First maximal digit run, with at most one decimal point.
pub fn extract_number(value: &str) -> Option<f64> {
    DIGIT_RUN.find(value).and_then(|m| m.as_str().parse().ok())
}

pub fn fit_parsed<S: AsRef<str>>(
    train_values: &[Option<S>],
    min_substring_len: usize,
    max_activations: usize,
) -> Result<CategoricBasis> {
    let uniques: BTreeSet<&str> = train_values.iter().flatten().map(AsRef::as_ref).collect();
    if uniques.len() < 2 {
        return Err(Error::TooFewCategories(uniques.len()));
    }
    let min_len = min_substring_len.max(1);
    let chars: Vec<Vec<char>> = uniques.iter().map(|u| u.chars().collect()).collect();
    let longest = chars.iter().map(Vec::len).max().unwrap_or(0);

    let mut candidates: Vec<(usize, usize, String)> = Vec::new();
    for len in (min_len..=longest).rev() {
        let mut coverage: HashMap<String, usize> = HashMap::new();
        for c in &chars {
            if c.len() < len {
                continue;
            }
            let distinct: BTreeSet<String> = c.windows(len).map(|w| w.iter().collect()).collect();
            for s in distinct {
                *coverage.entry(s).or_default() += 1;
            }
        }
        candidates.extend(
            coverage
                .into_iter()
                .filter(|&(_, count)| count >= 2)
                .map(|(s, count)| (count, len, s)),
        );
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then_with(|| a.2.cmp(&b.2)));
    let activations = candidates
        .into_iter()
        .take(max_activations)
        .map(|(_, tier, substring)| ParsedActivation { substring, tier })
        .collect();

    let extracted: Vec<f64> = train_values
        .iter()
        .flatten()
        .filter_map(|v| extract_number(v.as_ref()))
        .collect();
    let (numeric_mean, numeric_std) = if extracted.is_empty() {
        (0.0, 0.0)
    } else {
        let n = extracted.len() as f64;
        let mean = extracted.iter().sum::<f64>() / n;
        let var = extracted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    };
    Ok(CategoricBasis::Or19(ParsedModel {
        activations,
        numeric_present: !extracted.is_empty(),
        numeric_mean,
        numeric_std,
        vocab: fit_vocab(train_values, VocabOrder::Frequency),
    }))
}

impl ParsedModel {
    /// Z-scored digit extraction; entries without digits land on the train mean (0).
    pub fn numeric_feature(&self, value: Option<&str>) -> f64 {
        match value.and_then(extract_number) {
            Some(x) if self.numeric_std > 0.0 => (x - self.numeric_mean) / self.numeric_std,
            _ => 0.0,
        }
    }
}

fn write_bits(slot: u32, width: usize, out: &mut Vec<f64>) {
    for bit in (0..width).rev() {
        out.push(((slot >> bit) & 1) as f64);
    }
}

fn read_bits(code: &[f64]) -> Result<u32> {
    code.iter().try_fold(0u32, |acc, &b| {
        if b == 0.0 || b == 1.0 {
            Ok((acc << 1) | b as u32)
        } else {
            Err(Error::MalformedCode(format!("non-binary activation {b}")))
        }
    })
}

pub fn encode_onehot(vocab: &Vocab, value: Option<&str>) -> Vec<f64> {
    let mut out = vec![0.0; vocab.n() - 1];
    let slot = vocab.slot(value);
    if slot > 0 {
        out[slot as usize - 1] = 1.0;
    }
    out
}

pub fn encode_binary(vocab: &Vocab, value: Option<&str>) -> Vec<f64> {
    let mut out = Vec::new();
    write_bits(vocab.slot(value), binary_width(vocab.n()), &mut out);
    out
}

pub fn encode_ordinal(vocab: &Vocab, value: Option<&str>) -> u32 {
    vocab.slot(value)
}

impl CategoricBasis {
    pub fn kind(&self) -> CategoricKind {
        match self {
            CategoricBasis::Onht { .. } => CategoricKind::Onht,
            CategoricBasis::B1010 { .. } => CategoricKind::B1010,
            CategoricBasis::Ord3 { .. } => CategoricKind::Ord3,
            CategoricBasis::Ordl { .. } => CategoricKind::Ordl,
            CategoricBasis::Hsh2 { .. } => CategoricKind::Hsh2,
            CategoricBasis::Or19(_) => CategoricKind::Or19,
        }
    }

    pub fn vocab(&self) -> Option<&Vocab> {
        match self {
            CategoricBasis::Onht { vocab }
            | CategoricBasis::B1010 { vocab }
            | CategoricBasis::Ord3 { vocab }
            | CategoricBasis::Ordl { vocab } => Some(vocab),
            CategoricBasis::Or19(m) => Some(&m.vocab),
            CategoricBasis::Hsh2 { .. } => None,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            CategoricBasis::Onht { vocab } => vocab.n() - 1,
            CategoricBasis::B1010 { vocab } => binary_width(vocab.n()),
            CategoricBasis::Ord3 { .. } | CategoricBasis::Ordl { .. } | CategoricBasis::Hsh2 { .. } => 1,
            CategoricBasis::Or19(m) => m.activations.len() + 1 + binary_width(m.vocab.n()),
        }
    }

    pub fn is_invertible(&self) -> bool {
        !matches!(self, CategoricBasis::Hsh2 { .. })
    }

    pub fn column_suffixes(&self) -> Vec<String> {
        let code = self.kind().code();
        match self {
            CategoricBasis::Ord3 { .. } | CategoricBasis::Ordl { .. } | CategoricBasis::Hsh2 { .. } => {
                vec![code.to_string()]
            }
            CategoricBasis::Onht { .. } | CategoricBasis::B1010 { .. } => {
                (0..self.width()).map(|i| format!("{code}_{i}")).collect()
            }
            CategoricBasis::Or19(m) => {
                let mut names: Vec<String> = (0..m.activations.len()).map(|i| format!("{code}_act{i}")).collect();
                names.push(format!("{code}_num"));
                names.extend((0..binary_width(m.vocab.n())).map(|i| format!("{code}_bin{i}")));
                names
            }
        }
    }

    pub fn encode_into(&self, value: Option<&str>, out: &mut Vec<f64>) {
        match self {
            CategoricBasis::Onht { vocab } => out.extend(encode_onehot(vocab, value)),
            CategoricBasis::B1010 { vocab } => write_bits(vocab.slot(value), binary_width(vocab.n()), out),
            CategoricBasis::Ord3 { vocab } | CategoricBasis::Ordl { vocab } => {
                out.push(encode_ordinal(vocab, value) as f64)
            }
            CategoricBasis::Hsh2 { hash_cap } => out.push(encode_hashed(*hash_cap, value) as f64),
            CategoricBasis::Or19(m) => {
                for a in &m.activations {
                    let hit = value.is_some_and(|v| v.contains(a.substring.as_str()));
                    out.push(if hit { 1.0 } else { 0.0 });
                }
                out.push(m.numeric_feature(value));
                write_bits(m.vocab.slot(value), binary_width(m.vocab.n()), out);
            }
        }
    }

    pub fn encode(&self, value: Option<&str>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width());
        self.encode_into(value, &mut out);
        out
    }

    /// Decodes this basis' columns back to the category; `None` is missing.
    pub fn invert(&self, encoded: &[f64]) -> Result<Option<String>> {
        if encoded.len() != self.width() {
            return Err(Error::MalformedCode(format!(
                "expected {} columns, got {}",
                self.width(),
                encoded.len()
            )));
        }
        let (vocab, slot) = match self {
            CategoricBasis::Hsh2 { .. } => return Err(Error::NotInvertible("hsh2")),
            CategoricBasis::Onht { vocab } => {
                let mut slot = 0;
                for (i, &b) in encoded.iter().enumerate() {
                    if b == 1.0 {
                        if slot != 0 {
                            return Err(Error::MalformedCode("more than one one-hot activation".into()));
                        }
                        slot = i as u32 + 1;
                    } else if b != 0.0 {
                        return Err(Error::MalformedCode(format!("non-binary activation {b}")));
                    }
                }
                (vocab, slot)
            }
            CategoricBasis::B1010 { vocab } => (vocab, read_bits(encoded)?),
            CategoricBasis::Ord3 { vocab } | CategoricBasis::Ordl { vocab } => {
                let v = encoded[0];
                if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    return Err(Error::MalformedCode(format!("ordinal code {v}")));
                }
                (vocab, v as u32)
            }
            CategoricBasis::Or19(m) => {
                let offset = m.activations.len() + 1;
                (&m.vocab, read_bits(&encoded[offset..])?)
            }
        };
        if slot as usize >= vocab.n() {
            return Err(Error::MalformedCode(format!(
                "slot {slot} outside vocabulary of {}",
                vocab.n()
            )));
        }
        Ok(vocab.category(slot).map(str::to_string))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vals(items: &[(&str, usize)]) -> Vec<Option<String>> {
        items
            .iter()
            .flat_map(|(s, k)| std::iter::repeat_n(Some(s.to_string()), *k))
            .collect()
    }

    fn rgb() -> Vec<Option<String>> {
        vals(&[("red", 5), ("blue", 5), ("green", 1)])
    }

    #[test]
    fn vocab_orders() {
        let v = fit_vocab(&rgb(), VocabOrder::Frequency);
        assert_eq!(v.categories(), ["blue", "red", "green"]);
        assert_eq!(v.slot(None), 0);
        let a = fit_vocab(&vals(&[("red", 1), ("blue", 1), ("green", 1)]), VocabOrder::Alphabetic);
        assert_eq!(a.categories(), ["blue", "green", "red"]);
        let single = fit_vocab(&vals(&[("a", 3)]), VocabOrder::Frequency);
        assert_eq!(single.n(), 2);
    }

    #[test]
    fn onehot_examples() {
        let v = Vocab::from_ordered(vec!["a".into(), "b".into(), "c".into()]);
        assert_eq!(encode_onehot(&v, Some("b")), [0.0, 1.0, 0.0]);
        assert_eq!(encode_onehot(&v, None), [0.0; 3]);
        assert_eq!(encode_onehot(&v, Some("d")), [0.0; 3]);
        let basis = CategoricBasis::Onht { vocab: v };
        assert_eq!(basis.invert(&[0.0, 0.0, 0.0]).unwrap(), None);
        assert!(matches!(basis.invert(&[1.0, 1.0, 0.0]), Err(Error::MalformedCode(_))));
    }

    #[test]
    fn binary_examples() {
        let v = Vocab::from_ordered(vec!["a".into(), "b".into(), "c".into()]);
        assert_eq!(encode_binary(&v, None), [0.0, 0.0]);
        assert_eq!(encode_binary(&v, Some("a")), [0.0, 1.0]);
        assert_eq!(encode_binary(&v, Some("b")), [1.0, 0.0]);
        assert_eq!(encode_binary(&v, Some("c")), [1.0, 1.0]);
        let basis = CategoricBasis::B1010 { vocab: v };
        assert_eq!(basis.invert(&[1.0, 1.0]).unwrap().as_deref(), Some("c"));
        assert_eq!(binary_width(2), 1);
        assert_eq!(binary_width(6), 3);
    }

    #[test]
    fn binary_rejects_out_of_vocab_code() {
        let basis = CategoricBasis::B1010 {
            vocab: Vocab::from_ordered(vec!["a".into(), "b".into()]),
        };
        assert!(matches!(basis.invert(&[1.0, 1.0]), Err(Error::MalformedCode(_))));
    }

    #[test]
    fn ordinal_examples() {
        let p = CategoricParams::default();
        let ord3 = fit_categoric(CategoricKind::Ord3, &rgb(), &p).unwrap();
        let ordl = fit_categoric(CategoricKind::Ordl, &rgb(), &p).unwrap();
        assert_eq!(ord3.encode(Some("green")), [3.0]);
        assert_eq!(ordl.encode(Some("green")), [2.0]);
        assert_eq!(ord3.encode(Some("violet")), [0.0]);
    }

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn hashing_examples() {
        // bytewise loop written out separately from the fold above
        let mut h: u64 = 14695981039346656037;
        for b in "cat".bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(1099511628211);
        }
        assert_eq!(encode_hashed(64, Some("cat")), h % 64);
        assert_eq!(encode_hashed(64, None), 0);
        let codes: BTreeSet<u64> = ["x", "y", "z"].iter().map(|s| encode_hashed(2, Some(s))).collect();
        assert!(codes.len() < 3);
        let b = CategoricBasis::Hsh2 { hash_cap: 64 };
        assert!(matches!(b.invert(&[3.0]), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn parsed_example() {
        let train: Vec<Option<String>> = ["machine_A1", "machine_B2", "pump_C3"]
            .iter()
            .map(|s| Some(s.to_string()))
            .collect();
        let CategoricBasis::Or19(m) = fit_parsed(&train, 5, 16).unwrap() else {
            unreachable!()
        };
        assert_eq!(m.activations[0].substring, "machine_");
        assert!(m.activations.iter().all(|a| a.tier >= 5));
        let basis = CategoricBasis::Or19(m.clone());
        let z = m.numeric_feature(Some("machine_A1"));
        assert!((z - (-1.224745)).abs() < 1e-6);
        assert!((m.numeric_std - 0.816497).abs() < 1e-6);
        assert_eq!(basis.width(), m.activations.len() + 1 + 2);
        let enc = basis.encode(Some("pump_C3"));
        assert_eq!(enc[0], 0.0);
        assert_eq!(basis.invert(&enc).unwrap().as_deref(), Some("pump_C3"));
    }

    #[test]
    fn parsed_without_shared_structure() {
        let train: Vec<Option<String>> = ["alpha", "bravo", "x9"].iter().map(|s| Some(s.to_string())).collect();
        let CategoricBasis::Or19(m) = fit_parsed(&train, 5, 16).unwrap() else {
            unreachable!()
        };
        assert!(m.activations.is_empty());
        assert!(m.numeric_present);
        assert!(matches!(
            fit_parsed(&vals(&[("only", 4)]), 5, 16),
            Err(Error::TooFewCategories(1))
        ));
    }

    #[test]
    fn digit_extraction() {
        assert_eq!(extract_number("ab12.5cd7"), Some(12.5));
        assert_eq!(extract_number("v1.2.3"), Some(1.2));
        assert_eq!(extract_number("none"), None);
    }

    #[test]
    fn width_law_exhaustive() {
        for n in 2..=1025usize {
            let expected = (n as f64).log2().ceil() as usize;
            assert_eq!(binary_width(n), expected, "n={n}");
            let vocab = Vocab::from_ordered((1..n).map(|i| format!("c{i}")).collect());
            assert_eq!(CategoricBasis::B1010 { vocab: vocab.clone() }.width(), expected);
            assert_eq!(CategoricBasis::Onht { vocab }.width(), n - 1);
        }
    }

    #[test]
    fn serde_round_trip_rebuilds_index() {
        let b = fit_categoric(CategoricKind::B1010, &rgb(), &CategoricParams::default()).unwrap();
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.contains("\"kind\":\"1010\""));
        let back: CategoricBasis = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.encode(Some("red")), b.encode(Some("red")));
    }

    proptest! {
        #[test]
        fn injective_and_closed(
            cats in prop::collection::btree_set("[a-e]{1,4}", 1..20),
            unseen in "[f-z]{1,5}",
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let cats: Vec<String> = cats.into_iter().collect();
            let mut train: Vec<Option<String>> = cats.iter().enumerate()
                .flat_map(|(i, c)| std::iter::repeat_n(Some(c.clone()), 1 + i % 3)).collect();
            let p = CategoricParams::default();
            for kind in [CategoricKind::Onht, CategoricKind::B1010, CategoricKind::Ord3, CategoricKind::Ordl] {
                let basis = fit_categoric(kind, &train, &p).unwrap();
                let mut seen = BTreeSet::new();
                for c in &cats {
                    let code = basis.encode(Some(c));
                    let key = format!("{:?}", code);
                    prop_assert!(seen.insert(key));
                    let back = basis.invert(&code).unwrap();
                    prop_assert_eq!(back.as_deref(), Some(c.as_str()));
                }
                let u = basis.encode(Some(&unseen));
                prop_assert_eq!(basis.invert(&u).unwrap(), None);
            }
            let before = fit_vocab(&train, VocabOrder::Frequency);
            train.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let after = fit_vocab(&train, VocabOrder::Frequency);
            prop_assert_eq!(&before, &after);
            // slot index nonincreasing in frequency
            let freq = |c: &str| train.iter().flatten().filter(|t| t.as_str() == c).count();
            for w in after.categories().windows(2) {
                prop_assert!(freq(&w[0]) >= freq(&w[1]));
            }
        }

        #[test]
        fn parsed_width_bound(cats in prop::collection::btree_set("[a-c]{3,9}[0-9]{0,2}", 2..30)) {
            let train: Vec<Option<String>> = cats.iter().map(|c| Some(c.clone())).collect();
            let basis = fit_parsed(&train, 3, 8).unwrap();
            let n = basis.vocab().unwrap().n();
            prop_assert!(basis.width() <= 8 + 1 + binary_width(n));
            for c in &cats {
                prop_assert_eq!(basis.encode(Some(c)).len(), basis.width());
            }
        }
    }
}
