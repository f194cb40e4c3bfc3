//! Encoding scenarios and the per-feature plan trees they produce.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::categoric::CategoricKind;
use crate::error::{Error, Result};
use crate::numeric::{select_powertransform, NumericKind, PowerChoice};
use crate::schema::{FeatureSchema, Role};

pub const MAX_PLAN_DEPTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericScenario {
    Default,
    Qttf,
    Powertransform,
    Mnmx,
    Mnm3,
    Binstransform,
    Mean,
    Mxab,
    Bxcx,
    Mad3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoricScenario {
    Default,
    Onht,
    Ord3,
    Ordl,
    Hsh2,
    Or19,
}

impl NumericScenario {
    /// The benchmark's numeric sweep.
    pub const SWEEP: [NumericScenario; 6] = [
        NumericScenario::Default,
        NumericScenario::Qttf,
        NumericScenario::Powertransform,
        NumericScenario::Mnmx,
        NumericScenario::Mnm3,
        NumericScenario::Binstransform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NumericScenario::Default => "default",
            NumericScenario::Qttf => "qttf",
            NumericScenario::Powertransform => "powertransform",
            NumericScenario::Mnmx => "mnmx",
            NumericScenario::Mnm3 => "mnm3",
            NumericScenario::Binstransform => "binstransform",
            NumericScenario::Mean => "mean",
            NumericScenario::Mxab => "mxab",
            NumericScenario::Bxcx => "bxcx",
            NumericScenario::Mad3 => "mad3",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "default" | "nmbr" => NumericScenario::Default,
            "qttf" => NumericScenario::Qttf,
            "powertransform" => NumericScenario::Powertransform,
            "mnmx" => NumericScenario::Mnmx,
            "mnm3" => NumericScenario::Mnm3,
            "binstransform" => NumericScenario::Binstransform,
            "mean" => NumericScenario::Mean,
            "mxab" => NumericScenario::Mxab,
            "bxcx" => NumericScenario::Bxcx,
            "mad3" => NumericScenario::Mad3,
            _ => return None,
        })
    }
}

impl CategoricScenario {
    /// The benchmark's categoric sweep.
    pub const SWEEP: [CategoricScenario; 6] = [
        CategoricScenario::Default,
        CategoricScenario::Onht,
        CategoricScenario::Ord3,
        CategoricScenario::Ordl,
        CategoricScenario::Hsh2,
        CategoricScenario::Or19,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CategoricScenario::Default => "default",
            CategoricScenario::Onht => "onht",
            CategoricScenario::Ord3 => "ord3",
            CategoricScenario::Ordl => "ordl",
            CategoricScenario::Hsh2 => "hsh2",
            CategoricScenario::Or19 => "or19",
        }
    }

    pub fn kind(self) -> CategoricKind {
        match self {
            CategoricScenario::Default => CategoricKind::B1010,
            CategoricScenario::Onht => CategoricKind::Onht,
            CategoricScenario::Ord3 => CategoricKind::Ord3,
            CategoricScenario::Ordl => CategoricKind::Ordl,
            CategoricScenario::Hsh2 => CategoricKind::Hsh2,
            CategoricScenario::Or19 => CategoricKind::Or19,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "default" | "1010" => CategoricScenario::Default,
            "onht" => CategoricScenario::Onht,
            "ord3" => CategoricScenario::Ord3,
            "ordl" => CategoricScenario::Ordl,
            "hsh2" => CategoricScenario::Hsh2,
            "or19" => CategoricScenario::Or19,
            _ => return None,
        })
    }
}

/// A numeric leg and a categoric leg. Written as a single name when one side
/// is default (`qttf`, `onht`, `default`) and as `numeric+categoric` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub numeric: NumericScenario,
    pub categoric: CategoricScenario,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            numeric: NumericScenario::Default,
            categoric: CategoricScenario::Default,
        }
    }
}

impl Scenario {
    pub fn numeric(numeric: NumericScenario) -> Self {
        Self {
            numeric,
            ..Self::default()
        }
    }

    pub fn categoric(categoric: CategoricScenario) -> Self {
        Self {
            categoric,
            ..Self::default()
        }
    }

    pub fn name(&self) -> String {
        match (self.numeric, self.categoric) {
            (NumericScenario::Default, c) => c.name().to_string(),
            (n, CategoricScenario::Default) => n.name().to_string(),
            (n, c) => format!("{}+{}", n.name(), c.name()),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownScenario(s.to_string());
        let s = s.trim();
        if let Some((n, c)) = s.split_once('+') {
            return Ok(Scenario {
                numeric: NumericScenario::parse(n).ok_or_else(unknown)?,
                categoric: CategoricScenario::parse(c).ok_or_else(unknown)?,
            });
        }
        if let Some(n) = NumericScenario::parse(s) {
            return Ok(Scenario::numeric(n));
        }
        CategoricScenario::parse(s).map(Scenario::categoric).ok_or_else(unknown)
    }
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EncoderKind {
    Numeric(NumericKind),
    Categoric(CategoricKind),
}

impl EncoderKind {
    pub fn code(self) -> &'static str {
        match self {
            EncoderKind::Numeric(k) => k.code(),
            EncoderKind::Categoric(k) => k.code(),
        }
    }
}

/// Children encode the same pre-encoding values as their parent; a node's
/// columns appear in the output only when `keep_output` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformPlanNode {
    pub kind: EncoderKind,
    pub keep_output: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TransformPlanNode>,
}

impl TransformPlanNode {
    pub fn leaf(kind: EncoderKind) -> Self {
        Self {
            kind,
            keep_output: true,
            children: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(TransformPlanNode::depth).max().unwrap_or(0)
    }

    /// Nodes in pre-order.
    pub fn nodes(&self) -> Vec<&TransformPlanNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.nodes());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth() > MAX_PLAN_DEPTH {
            return Err(Error::InvalidArgument(format!(
                "plan depth {} exceeds {MAX_PLAN_DEPTH}",
                self.depth()
            )));
        }
        if !self.nodes().iter().any(|n| n.keep_output) {
            return Err(Error::InvalidArgument("plan keeps no output".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePlan {
    pub feature: String,
    pub role: Role,
    pub root: TransformPlanNode,
    /// Evidence behind a powertransform pick.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_choice: Option<PowerChoice>,
}

pub fn plan_feature(feature: &FeatureSchema, scenario: Scenario) -> FeaturePlan {
    let mut power_choice = None;
    let root = match feature.role {
        Role::Label => TransformPlanNode::leaf(EncoderKind::Categoric(CategoricKind::Ord3)),
        Role::HighCardinality => TransformPlanNode::leaf(EncoderKind::Categoric(CategoricKind::Hsh2)),
        Role::Categoric => TransformPlanNode::leaf(EncoderKind::Categoric(scenario.categoric.kind())),
        Role::Numeric => {
            let single = |k| TransformPlanNode::leaf(EncoderKind::Numeric(k));
            match scenario.numeric {
                NumericScenario::Default => single(NumericKind::Nmbr),
                NumericScenario::Qttf => single(NumericKind::Qttf),
                NumericScenario::Mnmx => single(NumericKind::Mnmx),
                NumericScenario::Mnm3 => single(NumericKind::Mnm3),
                NumericScenario::Mean => single(NumericKind::Mean),
                NumericScenario::Mxab => single(NumericKind::Mxab),
                NumericScenario::Bxcx => single(NumericKind::Bxcx),
                NumericScenario::Mad3 => single(NumericKind::Mad3),
                NumericScenario::Powertransform => {
                    let stats = feature.numeric_stats().expect("numeric role carries numeric stats");
                    let choice = select_powertransform(stats);
                    power_choice = Some(choice);
                    single(choice.numeric_kind())
                }
                NumericScenario::Binstransform => TransformPlanNode {
                    kind: EncoderKind::Numeric(NumericKind::Nmbr),
                    keep_output: true,
                    children: vec![single(NumericKind::Bins)],
                },
            }
        }
    };
    FeaturePlan {
        feature: feature.name.clone(),
        role: feature.role,
        root,
        power_choice,
    }
}

/// One plan per schema entry, label included.
pub fn build_plan(schema: &[FeatureSchema], scenario: Scenario) -> Vec<FeaturePlan> {
    schema.iter().map(|f| plan_feature(f, scenario)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::infer_schema;
    use crate::table::{Cell, RawTable};

    #[test]
    fn names_round_trip() {
        for n in NumericScenario::SWEEP {
            for c in CategoricScenario::SWEEP {
                let s = Scenario {
                    numeric: n,
                    categoric: c,
                };
                assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            }
        }
        assert_eq!(
            "onht".parse::<Scenario>().unwrap(),
            Scenario::categoric(CategoricScenario::Onht)
        );
        assert_eq!("qttf+or19".parse::<Scenario>().unwrap().name(), "qttf+or19");
        assert!(matches!("zzz".parse::<Scenario>(), Err(Error::UnknownScenario(_))));
        assert!("qttf+zzz".parse::<Scenario>().is_err());
    }

    #[test]
    fn plan_examples() {
        let t = RawTable::from_columns(vec![
            ("x", vec![Cell::from(1.0), 2.0.into(), 3.0.into()]),
            ("c", vec!["a".into(), "b".into(), "a".into()]),
            ("y", vec!["p".into(), "q".into(), "p".into()]),
        ])
        .unwrap();
        let schema = infer_schema(&t, Some("y"), 255).unwrap();
        let plans = build_plan(&schema, Scenario::default());
        assert_eq!(
            plans[0].root,
            TransformPlanNode::leaf(EncoderKind::Numeric(NumericKind::Nmbr))
        );
        assert_eq!(
            plans[1].root,
            TransformPlanNode::leaf(EncoderKind::Categoric(CategoricKind::B1010))
        );
        assert_eq!(
            plans[2].root,
            TransformPlanNode::leaf(EncoderKind::Categoric(CategoricKind::Ord3))
        );

        let onht = build_plan(&schema, "onht".parse().unwrap());
        assert_eq!(onht[1].root.kind, EncoderKind::Categoric(CategoricKind::Onht));
        assert_eq!(onht[0].root.kind, EncoderKind::Numeric(NumericKind::Nmbr));

        let bins = build_plan(&schema, "binstransform".parse().unwrap());
        let nodes = bins[0].root.nodes();
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[0].kind, EncoderKind::Numeric(NumericKind::Nmbr));
        assert_eq!(nodes[1].kind, EncoderKind::Numeric(NumericKind::Bins));
        assert!(nodes.iter().all(|n| n.keep_output));
        for p in bins {
            p.root.validate().unwrap();
        }
    }
}
