use std::fmt;

use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Largest supported vector-space dimension (blade bitmasks are `u16`).
pub const MAX_DIMENSION: usize = 16;

/// Metric signature of a Clifford algebra with a diagonal metric.
///
/// Basis vector `i` (0-based) squares to `+1` for `i < positive`, to `-1` for
/// the next `negative` vectors and to `0` for the remaining `zero` vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    positive: u8,
    negative: u8,
    zero: u8,
}

impl Signature {
    pub fn new(positive: usize, negative: usize, zero: usize) -> Result<Self, AlgebraError> {
        let dim = positive + negative + zero;
        if dim > MAX_DIMENSION {
            return Err(AlgebraError::DimensionTooLarge(dim));
        }
        Ok(Self {
            positive: positive as u8,
            negative: negative as u8,
            zero: zero as u8,
        })
    }

    /// Conformal model of 3D Euclidean space, Cl(4,1). `e4` squares to `+1`
    /// and `e5` to `-1`.
    pub const fn cga3d() -> Self {
        Self {
            positive: 4,
            negative: 1,
            zero: 0,
        }
    }

    /// Euclidean 3D space, Cl(3,0).
    pub const fn euclid3d() -> Self {
        Self {
            positive: 3,
            negative: 0,
            zero: 0,
        }
    }

    /// Looks a signature up by label: `cga3d`, `euclid3d` or `cl(p,q[,r])`.
    pub fn from_name(name: &str) -> Result<Self, AlgebraError> {
        let trimmed = name.trim().to_ascii_lowercase();
        match trimmed.as_str() {
            "cga3d" | "cga" | "cl(4,1)" | "cl(4,1,0)" => Ok(Self::cga3d()),
            "euclid3d" | "cl(3,0)" | "cl(3,0,0)" => Ok(Self::euclid3d()),
            other => {
                let inner = other
                    .strip_prefix("cl(")
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| AlgebraError::UnknownSignature(name.to_string()))?;
                let counts: Result<Vec<usize>, _> = inner
                    .split(',')
                    .map(|p| p.trim().parse::<usize>())
                    .collect();
                match counts.as_deref() {
                    Ok([p, q]) => Self::new(*p, *q, 0),
                    Ok([p, q, r]) => Self::new(*p, *q, *r),
                    _ => Err(AlgebraError::UnknownSignature(name.to_string())),
                }
            }
        }
    }

    pub fn name(&self) -> String {
        if *self == Self::cga3d() {
            "cga3d".to_string()
        } else if *self == Self::euclid3d() {
            "euclid3d".to_string()
        } else if self.zero == 0 {
            format!("cl({},{})", self.positive, self.negative)
        } else {
            format!("cl({},{},{})", self.positive, self.negative, self.zero)
        }
    }

    pub fn positive_count(&self) -> usize {
        self.positive as usize
    }

    pub fn negative_count(&self) -> usize {
        self.negative as usize
    }

    pub fn zero_count(&self) -> usize {
        self.zero as usize
    }

    pub fn dimension(&self) -> usize {
        (self.positive + self.negative + self.zero) as usize
    }

    /// Number of basis blades, `2^dimension`.
    pub fn blade_count(&self) -> usize {
        1usize << self.dimension()
    }

    /// Square of the 0-based basis vector `index`.
    pub fn square(&self, index: usize) -> i8 {
        if index < self.positive as usize {
            1
        } else if index < (self.positive + self.negative) as usize {
            -1
        } else {
            0
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.zero > 0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Signature {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        Signature::from_name(&name).map_err(serde::de::Error::custom)
    }
}
