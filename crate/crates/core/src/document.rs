//! The toolkit file format: UTF-8 JSON `{kind, version, payload}`.
//!
//! Floats are written as shortest round-trip decimals, so save → load is
//! bit-exact. Payloads are validated on load.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chaos::{ChaosElement, RankOneKernel, Role};
use crate::error::{Error, Result};
use crate::hilbert_scale::WeightSequence;
use crate::moments::MomentSequence;
use crate::reconstruct::DiscreteMeasure;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Weights,
    Chaos,
    Moments,
    Measure,
    Report,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Weights => "weights",
            Kind::Chaos => "chaos",
            Kind::Moments => "moments",
            Kind::Measure => "measure",
            Kind::Report => "report",
        };
        f.write_str(s)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    kind: String,
    version: u32,
    payload: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChaosPayload {
    role: Role,
    dimension: usize,
    #[serde(default)]
    truncated: bool,
    terms: Vec<RankOneKernel>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurePayload {
    points: Vec<(f64, f64)>,
    total_mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Weights(WeightSequence),
    Chaos(ChaosElement),
    Moments(MomentSequence),
    Measure(DiscreteMeasure),
    Report(Value),
}

fn payload_error(kind: Kind, e: impl fmt::Display) -> Error {
    Error::Document(format!("invalid {kind} payload: {e}"))
}

impl Document {
    pub fn kind(&self) -> Kind {
        match self {
            Document::Weights(_) => Kind::Weights,
            Document::Chaos(_) => Kind::Chaos,
            Document::Moments(_) => Kind::Moments,
            Document::Measure(_) => Kind::Measure,
            Document::Report(_) => Kind::Report,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        let kind: Kind = serde_json::from_value(Value::String(env.kind.clone()))
            .map_err(|_| Error::Document(format!("unknown kind `{}`", env.kind)))?;
        if env.version != FORMAT_VERSION {
            return Err(Error::Document(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                env.version
            )));
        }
        let payload = env.payload;
        Ok(match kind {
            Kind::Weights => Document::Weights(
                serde_json::from_value(payload).map_err(|e| payload_error(kind, e))?,
            ),
            Kind::Chaos => {
                let p: ChaosPayload =
                    serde_json::from_value(payload).map_err(|e| payload_error(kind, e))?;
                if p.dimension == 0 {
                    return Err(payload_error(kind, "dimension must be at least 1"));
                }
                for (i, t) in p.terms.iter().enumerate() {
                    if t.direction.dim() != p.dimension {
                        return Err(payload_error(
                            kind,
                            format!(
                                "terms[{i}].direction has {} entries, dimension is {}",
                                t.direction.dim(),
                                p.dimension
                            ),
                        ));
                    }
                }
                let phi = ChaosElement::from_terms(p.dimension, p.role, p.terms)
                    .map_err(|e| payload_error(kind, e))?
                    .with_truncated(p.truncated);
                Document::Chaos(phi)
            }
            Kind::Moments => {
                let ms: MomentSequence =
                    serde_json::from_value(payload).map_err(|e| payload_error(kind, e))?;
                ms.validate().map_err(|e| payload_error(kind, e))?;
                Document::Moments(ms)
            }
            Kind::Measure => {
                let p: MeasurePayload =
                    serde_json::from_value(payload).map_err(|e| payload_error(kind, e))?;
                let (nodes, weights) = p.points.into_iter().unzip();
                let dm =
                    DiscreteMeasure::new(nodes, weights).map_err(|e| payload_error(kind, e))?;
                if (dm.total_mass() - p.total_mass).abs() > 1e-12 * dm.total_mass() {
                    return Err(payload_error(
                        kind,
                        format!(
                            "total_mass {} differs from the weight sum {}",
                            p.total_mass,
                            dm.total_mass()
                        ),
                    ));
                }
                Document::Measure(dm)
            }
            Kind::Report => Document::Report(payload),
        })
    }

    fn payload(&self) -> Result<Value> {
        Ok(match self {
            Document::Weights(w) => serde_json::to_value(w)?,
            Document::Chaos(phi) => serde_json::to_value(ChaosPayload {
                role: phi.role(),
                dimension: phi.dim(),
                truncated: phi.is_truncated(),
                terms: phi.terms().cloned().collect(),
            })?,
            Document::Moments(ms) => serde_json::to_value(ms)?,
            Document::Measure(dm) => serde_json::to_value(MeasurePayload {
                points: dm.points().collect(),
                total_mass: dm.total_mass(),
            })?,
            Document::Report(v) => v.clone(),
        })
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let env = Envelope {
            kind: self.kind().to_string(),
            version: FORMAT_VERSION,
            payload: self.payload()?,
        };
        let mut s = serde_json::to_string_pretty(&env)?;
        s.push('\n');
        Ok(s)
    }

    pub fn report<T: Serialize>(value: &T) -> Result<Self> {
        Ok(Document::Report(serde_json::to_value(value)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Document(msg) => Error::Document(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    fn mismatch(&self, expected: Kind) -> Error {
        Error::Document(format!(
            "expected a {expected} document, found {}",
            self.kind()
        ))
    }

    pub fn into_chaos(self) -> Result<ChaosElement> {
        match self {
            Document::Chaos(phi) => Ok(phi),
            other => Err(other.mismatch(Kind::Chaos)),
        }
    }

    pub fn into_moments(self) -> Result<MomentSequence> {
        match self {
            Document::Moments(ms) => Ok(ms),
            other => Err(other.mismatch(Kind::Moments)),
        }
    }

    pub fn into_weights(self) -> Result<WeightSequence> {
        match self {
            Document::Weights(w) => Ok(w),
            other => Err(other.mismatch(Kind::Weights)),
        }
    }

    pub fn into_measure(self) -> Result<DiscreteMeasure> {
        match self {
            Document::Measure(dm) => Ok(dm),
            other => Err(other.mismatch(Kind::Measure)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert_scale::Coords;

    fn round_trip(doc: &Document) {
        let text = doc.to_json().unwrap();
        let back = Document::from_json(&text).unwrap();
        assert_eq!(&back, doc);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn round_trips_are_exact() {
        let y = Coords::new(vec![0.1, 1.0 / 3.0, -2e-17]);
        round_trip(&Document::Chaos(
            ChaosElement::wick_exponential(&y, 16, Role::Distribution).unwrap(),
        ));
        round_trip(&Document::Weights(
            WeightSequence::new(vec![1.0, std::f64::consts::PI]).unwrap(),
        ));
        let ms = MomentSequence::from_values(vec![1.0, 0.1, 1.0 / 7.0]).unwrap();
        round_trip(&Document::Moments(
            ms.with_absolute(vec![1.0, 0.5, 1.0 / 7.0]).unwrap(),
        ));
        round_trip(&Document::Measure(
            DiscreteMeasure::new(vec![-0.3, 0.7], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap(),
        ));
        round_trip(&Document::Report(serde_json::json!({"a": 1.5})));
    }

    #[test]
    fn rejects_bad_documents() {
        let bad = [
            r#"{"kind":"tensor","version":1,"payload":{}}"#,
            r#"{"kind":"weights","version":2,"payload":[1.0]}"#,
            r#"{"kind":"weights","version":1,"payload":[0.5]}"#,
            r#"{"kind":"chaos","version":1,"payload":{"role":"test","dimension":2,"terms":[{"degree":1,"coef":1.0,"direction":[1.0]}]}}"#,
            r#"{"kind":"chaos","version":1,"payload":{"role":"test","dimension":1,"terms":[{"degree":1,"coef":1.0,"direction":[0.0]}]}}"#,
            r#"{"kind":"measure","version":1,"payload":{"points":[[0.0,0.5],[1.0,0.5]],"total_mass":2.0}}"#,
            r#"{"kind":"moments","version":1,"payload":{"values":[1.0],"direction":[1.0],"xi_norm_p":1.0,"p":0.0}}"#,
        ];
        for text in bad {
            assert!(
                matches!(Document::from_json(text), Err(Error::Document(_))),
                "{text}"
            );
        }
        match Document::from_json("{\n  \"kind\": \"chaos\",\n  \"version\": 1,\n  oops\n}") {
            Err(Error::Document(msg)) => assert!(msg.contains("line 4"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
