use crate::builders::BinnedMeasure;
use crate::error::{Error, Result};

/// Two uniform Cantor measures side by side, each carrying half the mass.
///
/// On `[0, 1/2)` every cylinder keeps its first and last quarter (ratio 1/4,
/// dimension 1/2); on `[1/2, 1)` it keeps its first and last sixteenth
/// (ratio 1/16, dimension 1/4). Cylinders of both halves sit exactly on the
/// dyadic grid at scales `1 mod 4`, so bins are computed there and summed
/// back to scale `depth`.
pub fn cantor_pair(depth: u32) -> Result<BinnedMeasure> {
    if !(8..=20).contains(&depth) {
        return Err(Error::Scale(format!("Cantor pair depth must be in 8..=20, got {depth}")));
    }
    let fine = depth + (4 - (depth + 3) % 4) % 4;
    debug_assert_eq!(fine % 4, 1);
    let mut mass = vec![0.0; 1usize << fine];
    let mut fill = |half: usize, digits: u32| {
        let generations = (fine - 1) / digits;
        let weight = 0.5 * (-(generations as f64)).exp2();
        let ones = (1usize << digits) - 1;
        for word in 0..1usize << generations {
            let mut k = half;
            for g in (0..generations).rev() {
                k = (k << digits) | if (word >> g) & 1 == 1 { ones } else { 0 };
            }
            mass[k] = weight;
        }
    };
    fill(0, 2);
    fill(1, 4);
    let m = BinnedMeasure::new(mass)?;
    BinnedMeasure::new(m.masses_at(depth)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicCube;

    #[test]
    fn halves_carry_half_the_mass() {
        for depth in [8, 9, 10, 11, 12] {
            let m = cantor_pair(depth).unwrap();
            assert!((m.mass_of(DyadicCube { j: 1, k: 0 }).unwrap() - 0.5).abs() < 1e-15);
            assert!((m.total_mass() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn support_counts() {
        let m = cantor_pair(13).unwrap();
        let left = m.masses()[..1 << 12].iter().filter(|v| **v > 0.0).count();
        let right = m.masses()[1 << 12..].iter().filter(|v| **v > 0.0).count();
        assert_eq!(left, 64);
        assert_eq!(right, 8);
        assert!(cantor_pair(7).is_err());
    }
}
