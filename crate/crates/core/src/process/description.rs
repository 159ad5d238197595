//! JSON model descriptions.
//!
//! ```json
//! {
//!   "law": {"alphabet": [-1, 1], "probabilities": [0.5, 0.5], "kind": "iid", "centered": true},
//!   "window": [-6, 6],
//!   "functionals": [{"i": 0, "coeffs": {"0": 1.0, "-1": 0.5}}],
//!   "seed": 42
//! }
//! ```
//!
//! `coeffs` maps an offset (relative to `i`) to a coefficient, so the entry
//! above is `X_i = ξ_i + 0.5 ξ_{i-1}`. Entries must have consecutive `i`;
//! they repeat periodically over all indices. Unknown fields are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    CoordinateLaw, ExactProcessModel, Functional, FunctionalPattern, LawKind, SamplerModel,
};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescription {
    pub law: LawDescription,
    pub window: [i64; 2],
    pub functionals: Vec<FunctionalDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKindName {
    #[default]
    Iid,
    Markov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawDescription {
    pub alphabet: Vec<f64>,
    pub probabilities: Vec<f64>,
    #[serde(default)]
    pub kind: LawKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub centered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalDescription {
    pub i: i64,
    pub coeffs: BTreeMap<String, f64>,
}

impl LawDescription {
    pub fn to_law(&self) -> Result<CoordinateLaw> {
        let kind = match (self.kind, &self.transition) {
            (LawKindName::Iid, None) => LawKind::Iid,
            (LawKindName::Iid, Some(_)) => {
                return Err(invalid(
                    "law description",
                    "iid law with a transition matrix",
                ))
            }
            (LawKindName::Markov, Some(t)) => LawKind::Markov {
                transition: t.clone(),
            },
            (LawKindName::Markov, None) => {
                return Err(invalid("law description", "markov law without transition"))
            }
        };
        CoordinateLaw::new(
            self.alphabet.clone(),
            self.probabilities.clone(),
            kind,
            self.centered,
        )
    }
}

impl FunctionalDescription {
    pub fn to_functional(&self) -> Result<Functional> {
        let terms = self
            .coeffs
            .iter()
            .map(|(k, &c)| {
                k.trim()
                    .parse::<i64>()
                    .map(|o| (o, c))
                    .map_err(|_| invalid("functional description", format!("bad offset {k:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Functional::linear(terms)
    }
}

impl ModelDescription {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn law(&self) -> Result<CoordinateLaw> {
        self.law.to_law()
    }

    pub fn pattern(&self) -> Result<FunctionalPattern> {
        let mut entries: Vec<&FunctionalDescription> = self.functionals.iter().collect();
        entries.sort_by_key(|f| f.i);
        let anchor = entries
            .first()
            .ok_or_else(|| invalid("model description", "no functionals"))?
            .i;
        for (p, e) in entries.iter().enumerate() {
            if e.i != anchor + p as i64 {
                return Err(invalid(
                    "model description",
                    "functional indices must be consecutive",
                ));
            }
        }
        FunctionalPattern::new(
            anchor,
            entries
                .iter()
                .map(|e| e.to_functional())
                .collect::<Result<_>>()?,
        )
    }

    pub fn exact_model(&self) -> Result<ExactProcessModel> {
        let [lo, hi] = self.window;
        Ok(ExactProcessModel::new(
            (lo, hi),
            self.law()?,
            self.pattern()?,
        ))
    }

    pub fn sampler(&self) -> Result<SamplerModel> {
        let seed = self
            .seed
            .ok_or_else(|| invalid("model description", "seed is required for sampling"))?;
        Ok(SamplerModel::new(self.law()?, self.pattern()?, seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MA1: &str = r#"{
        "law": {"alphabet": [-1, 1], "probabilities": [0.5, 0.5], "kind": "iid", "centered": true},
        "window": [-3, 3],
        "functionals": [{"i": 0, "coeffs": {"0": 1.0, "-1": 0.5}}],
        "seed": 9
    }"#;

    #[test]
    fn parses_and_builds() {
        let d = ModelDescription::from_json(MA1).unwrap();
        let p = d.exact_model().unwrap().build().unwrap();
        assert_eq!(p.support(), Some((-2, 3)));
        assert_eq!(d.sampler().unwrap().seed, 9);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = MA1.replace("\"seed\": 9", "\"seed\": 9, \"extra\": 1");
        assert!(ModelDescription::from_json(&bad).is_err());
        let bad_law = MA1.replace("\"centered\": true", "\"centred\": true");
        assert!(ModelDescription::from_json(&bad_law).is_err());
    }

    #[test]
    fn periodic_functionals() {
        let text = r#"{
            "law": {"alphabet": [-1, 1], "probabilities": [0.5, 0.5]},
            "window": [-2, 2],
            "functionals": [
                {"i": 1, "coeffs": {"0": 1, "-1": 0.6}},
                {"i": 0, "coeffs": {"0": 1, "-1": 0.5}}
            ]
        }"#;
        let d = ModelDescription::from_json(text).unwrap();
        let pat = d.pattern().unwrap();
        assert_eq!(pat.period(), 2);
        assert!(d.sampler().is_err());
        let gap = text.replace("\"i\": 1", "\"i\": 2");
        assert!(ModelDescription::from_json(&gap)
            .unwrap()
            .pattern()
            .is_err());
    }

    #[test]
    fn markov_needs_transition() {
        let text = MA1.replace("\"kind\": \"iid\"", "\"kind\": \"markov\"");
        let d = ModelDescription::from_json(&text).unwrap();
        assert!(d.law().is_err());
    }
}
