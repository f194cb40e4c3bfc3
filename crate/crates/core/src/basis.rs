//! Column-level wrapper over the numeric and categoric encoder families.

use serde::{Deserialize, Serialize};

use crate::categoric::CategoricBasis;
use crate::error::{Error, Result};
use crate::numeric::NumericBasis;

/// A feature column after infill: numbers are finite; a categoric `None` is
/// the reserved missing token.
#[derive(Debug, Clone, PartialEq)]
pub enum FilledColumn {
    Numeric(Vec<f64>),
    Categoric(Vec<Option<String>>),
}

impl FilledColumn {
    pub fn len(&self) -> usize {
        match self {
            FilledColumn::Numeric(v) => v.len(),
            FilledColumn::Categoric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A recovered pre-encoding value.
#[derive(Debug, Clone, PartialEq)]
pub enum Recovered {
    Number { value: f64, lossy: bool },
    Category(Option<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EncodingBasis {
    Numeric(NumericBasis),
    Categoric(CategoricBasis),
}

impl EncodingBasis {
    pub fn code(&self) -> &'static str {
        match self {
            EncodingBasis::Numeric(b) => b.kind().code(),
            EncodingBasis::Categoric(b) => b.kind().code(),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            EncodingBasis::Numeric(b) => b.width(),
            EncodingBasis::Categoric(b) => b.width(),
        }
    }

    pub fn is_invertible(&self) -> bool {
        match self {
            EncodingBasis::Numeric(b) => !b.is_degenerate(),
            EncodingBasis::Categoric(b) => b.is_invertible(),
        }
    }

    pub fn column_suffixes(&self) -> Vec<String> {
        match self {
            EncodingBasis::Numeric(b) if b.width() == 1 => vec![b.kind().code().to_string()],
            EncodingBasis::Numeric(b) => (0..b.width()).map(|i| format!("{}_{i}", b.kind().code())).collect(),
            EncodingBasis::Categoric(b) => b.column_suffixes(),
        }
    }

    /// Encodes a whole column into `width()` output columns.
    pub fn encode_column(&self, column: &FilledColumn) -> Result<Vec<Vec<f64>>> {
        let mut out = vec![Vec::with_capacity(column.len()); self.width()];
        let mut buf = Vec::with_capacity(self.width());
        let mut push = |buf: &mut Vec<f64>| {
            for (dst, v) in out.iter_mut().zip(buf.drain(..)) {
                dst.push(v);
            }
        };
        match (self, column) {
            (EncodingBasis::Numeric(b), FilledColumn::Numeric(values)) => {
                for &x in values {
                    b.encode_into(x, &mut buf);
                    push(&mut buf);
                }
            }
            (EncodingBasis::Categoric(b), FilledColumn::Categoric(values)) => {
                for v in values {
                    b.encode_into(v.as_deref(), &mut buf);
                    push(&mut buf);
                }
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "encoder family does not match column type".into(),
                ))
            }
        }
        Ok(out)
    }

    pub fn invert(&self, encoded: &[f64]) -> Result<Recovered> {
        Ok(match self {
            EncodingBasis::Numeric(b) => {
                let inv = b.invert(encoded)?;
                Recovered::Number {
                    value: inv.value,
                    lossy: inv.lossy,
                }
            }
            EncodingBasis::Categoric(b) => Recovered::Category(b.invert(encoded)?),
        })
    }
}
