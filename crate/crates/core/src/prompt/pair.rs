use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PromptError;

/// Unordered trajectory pair in canonical order `id_a < id_b`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPair")]
pub struct PairKey {
    id_a: String,
    id_b: String,
}

#[derive(Deserialize)]
struct RawPair {
    id_a: String,
    id_b: String,
}

impl TryFrom<RawPair> for PairKey {
    type Error = PromptError;

    fn try_from(raw: RawPair) -> Result<Self, Self::Error> {
        if raw.id_a >= raw.id_b {
            return Err(PromptError::InvalidPair(format!(
                "`{}` must sort before `{}`",
                raw.id_a, raw.id_b
            )));
        }
        Ok(Self {
            id_a: raw.id_a,
            id_b: raw.id_b,
        })
    }
}

impl PairKey {
    /// Orders the two ids canonically; fails if they are equal.
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Result<Self, PromptError> {
        let (a, b) = (a.into(), b.into());
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Self { id_a: a, id_b: b }),
            std::cmp::Ordering::Greater => Ok(Self { id_a: b, id_b: a }),
            std::cmp::Ordering::Equal => Err(PromptError::InvalidPair(format!(
                "`{a}` paired with itself"
            ))),
        }
    }

    pub fn id_a(&self) -> &str {
        &self.id_a
    }

    pub fn id_b(&self) -> &str {
        &self.id_b
    }

    pub fn contains(&self, id: &str) -> bool {
        self.id_a == id || self.id_b == id
    }

    /// Left and right trajectory ids as shown to the labeler.
    pub fn sides(&self, swapped: bool) -> (&str, &str) {
        if swapped {
            (&self.id_b, &self.id_a)
        } else {
            (&self.id_a, &self.id_b)
        }
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.id_a, self.id_b)
    }
}

/// Preference score in {0, 0.5, 1}. Relative to a [`PairKey`], 1 means
/// `id_a` is preferred and 0 means `id_b` is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Score {
    Zero,
    Half,
    One,
}

impl Score {
    pub fn from_value(v: f64) -> Option<Self> {
        if v == 0.0 {
            Some(Score::Zero)
        } else if v == 0.5 {
            Some(Score::Half)
        } else if v == 1.0 {
            Some(Score::One)
        } else {
            None
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Score::Zero => 0.0,
            Score::Half => 0.5,
            Score::One => 1.0,
        }
    }

    /// The same preference seen from the other side.
    pub fn flipped(self) -> Self {
        match self {
            Score::Zero => Score::One,
            Score::Half => Score::Half,
            Score::One => Score::Zero,
        }
    }

    /// Converts a score given on the presented sides into canonical orientation.
    pub fn unswap(self, swapped: bool) -> Self {
        if swapped {
            self.flipped()
        } else {
            self
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Score::from_value(v)
            .ok_or_else(|| serde::de::Error::custom(format!("score must be 0, 0.5 or 1, got {v}")))
    }
}
