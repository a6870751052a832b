use std::fmt;

use serde::{Deserialize, Serialize};

use super::Signature;

/// A basis blade, stored as a bitmask: bit `i` set means `e(i+1)` is a factor.
///
/// Blades order by bitmask, which is the coefficient order used for every
/// serialized multivector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Blade(pub u16);

impl Blade {
    pub const SCALAR: Blade = Blade(0);

    /// The blade of the 1-based basis vector `e{index}`.
    pub fn basis(index: usize) -> Blade {
        assert!(
            (1..=16).contains(&index),
            "basis index out of range: {index}"
        );
        Blade(1 << (index - 1))
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    /// The blade containing every basis vector of `sig`.
    pub fn pseudoscalar(sig: Signature) -> Blade {
        Blade(((1u32 << sig.dimension()) - 1) as u16)
    }

    pub fn is_valid_for(self, sig: Signature) -> bool {
        (self.0 as u32) < (1u32 << sig.dimension())
    }

    /// 1-based indices of the basis vectors in canonical order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..16)
            .filter(move |i| self.0 & (1 << i) != 0)
            .map(|i| i + 1)
    }

    /// Sign (`-1`, `0`, `+1`) of the product `self * other` of basis blades.
    pub fn product(self, other: Blade, sig: Signature) -> (i8, Blade) {
        basis_product(self, other, sig)
    }
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("1");
        }
        let indices: Vec<usize> = self.indices().collect();
        f.write_str("e")?;
        if indices.iter().all(|&i| i < 10) {
            for i in indices {
                write!(f, "{i}")?;
            }
        } else {
            let parts: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
            f.write_str(&parts.join("_"))?;
        }
        Ok(())
    }
}

/// Parity of the swaps needed to bring the concatenation `a b` into
/// canonical (ascending) order.
fn reorder_sign(a: u16, b: u16) -> i8 {
    let mut a = a >> 1;
    let mut swaps = 0u32;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Geometric product of two basis blades under a diagonal metric.
///
/// Returns the sign and the resulting blade. The sign is `0` exactly when a
/// basis vector with square zero is contracted.
pub fn basis_product(a: Blade, b: Blade, sig: Signature) -> (i8, Blade) {
    let mut sign = reorder_sign(a.0, b.0);
    let common = a.0 & b.0;
    if common != 0 {
        for i in 0..sig.dimension() {
            if common & (1 << i) != 0 {
                sign *= sig.square(i);
                if sign == 0 {
                    break;
                }
            }
        }
    }
    (sign, Blade(a.0 ^ b.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_and_single_swap() {
        let e3 = Signature::euclid3d();
        assert_eq!(
            basis_product(Blade::basis(1), Blade::basis(1), e3),
            (1, Blade::SCALAR)
        );
        assert_eq!(
            basis_product(Blade::basis(2), Blade::basis(1), e3),
            (-1, Blade(0b11))
        );
        assert_eq!(
            basis_product(Blade::basis(1), Blade::basis(2), e3),
            (1, Blade(0b11))
        );
    }

    #[test]
    fn negative_and_degenerate_squares() {
        let cga = Signature::cga3d();
        assert_eq!(
            basis_product(Blade::basis(5), Blade::basis(5), cga),
            (-1, Blade::SCALAR)
        );
        let pga = Signature::new(3, 0, 1).unwrap();
        assert_eq!(basis_product(Blade::basis(4), Blade::basis(4), pga).0, 0);
    }

    #[test]
    fn bivector_squares_to_minus_one() {
        let e3 = Signature::euclid3d();
        let e12 = Blade(0b11);
        assert_eq!(basis_product(e12, e12, e3), (-1, Blade::SCALAR));
    }

    #[test]
    fn display_names() {
        assert_eq!(Blade(0).to_string(), "1");
        assert_eq!(Blade(0b101).to_string(), "e13");
        assert_eq!(Blade::basis(5).to_string(), "e5");
        assert_eq!(Blade::pseudoscalar(Signature::cga3d()), Blade(31));
    }
}
