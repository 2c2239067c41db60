//! Rotation group acting on spin-½ and spin-1 systems through closed-form
//! axis-angle representations.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::ContextMap;
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64};

const AXIS_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Half,
    One,
}

impl Spin {
    /// `2s + 1`
    pub fn dim(self) -> usize {
        match self {
            Spin::Half => 2,
            Spin::One => 3,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Half => "1/2",
            Spin::One => "1",
        })
    }
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1/2" | "0.5" | "half" => Ok(Spin::Half),
            "1" | "1.0" | "one" => Ok(Spin::One),
            other => Err(Error::UnsupportedSpin(other.to_string())),
        }
    }
}

/// A rotation, or a sequence of rotations listed in the order they are applied.
#[derive(Debug, Clone, PartialEq)]
pub enum Motion {
    Rotation { axis: [f64; 3], angle: f64 },
    Composed(Vec<Motion>),
}

impl Motion {
    fn inverse(&self) -> Motion {
        match self {
            Motion::Rotation { axis, angle } => Motion::Rotation {
                axis: *axis,
                angle: -angle,
            },
            Motion::Composed(steps) => Motion::Composed(steps.iter().rev().map(Motion::inverse).collect()),
        }
    }

    fn into_steps(self) -> Vec<Motion> {
        match self {
            Motion::Composed(steps) => steps,
            single => vec![single],
        }
    }
}

/// Element of the rotation group together with the spin it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    spin: Spin,
    motion: Motion,
}

impl GroupElement {
    /// Rotation by `angle` radians about `axis`, which is normalized here.
    pub fn rotation(spin: Spin, axis: [f64; 3], angle: f64) -> Result<Self> {
        let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 || !angle.is_finite() {
            return Err(Error::InvalidArgument(
                "rotation needs a finite nonzero axis and finite angle",
            ));
        }
        let axis = axis.map(|a| a / norm);
        debug_assert!((axis.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < AXIS_NORM_TOL);
        Ok(Self {
            spin,
            motion: Motion::Rotation { axis, angle },
        })
    }

    pub fn identity(spin: Spin) -> Self {
        Self {
            spin,
            motion: Motion::Composed(Vec::new()),
        }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn motion(&self) -> &Motion {
        &self.motion
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &GroupElement) -> Result<Self> {
        if self.spin != next.spin {
            return Err(Error::InvalidArgument(
                "cannot compose rotations of different spins",
            ));
        }
        let mut steps = self.motion.clone().into_steps();
        steps.extend(next.motion.clone().into_steps());
        Ok(Self {
            spin: self.spin,
            motion: Motion::Composed(steps),
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            spin: self.spin,
            motion: self.motion.inverse(),
        }
    }
}

/// Representation matrix of `g` on the `2s+1` dimensional space, as a context map
/// from the standard (`J_z`) basis.
pub fn spin_rotation(g: &GroupElement) -> ContextMap {
    ContextMap::from_parts(
        representation(g.spin, &g.motion),
        String::from("standard"),
        String::from("rotated"),
    )
}

fn representation(spin: Spin, motion: &Motion) -> ComplexMatrix {
    match motion {
        Motion::Rotation { axis, angle } => match spin {
            Spin::Half => half_rotation(axis, *angle),
            Spin::One => one_rotation(axis, *angle),
        },
        Motion::Composed(steps) => steps.iter().fold(ComplexMatrix::identity(spin.dim()), |acc, m| {
            &representation(spin, m) * &acc
        }),
    }
}

/// `cos(θ/2)·I − i·sin(θ/2)·(n·σ)`
fn half_rotation(n: &[f64; 3], angle: f64) -> ComplexMatrix {
    let (s, c) = (angle / 2.0).sin_cos();
    let [x, y, z] = *n;
    // n·σ = [[z, x − iy], [x + iy, −z]]
    let minus_i_s = C64::new(0.0, -s);
    ComplexMatrix::new(
        2,
        2,
        vec![
            C64::new(c, 0.0) + minus_i_s * z,
            minus_i_s * C64::new(x, -y),
            minus_i_s * C64::new(x, y),
            C64::new(c, 0.0) - minus_i_s * z,
        ],
    )
    .expect("2x2")
}

/// `I − i·sinθ·K + (cosθ − 1)·K²` with `K = n·J`, valid because `K³ = K` for spin 1.
fn one_rotation(n: &[f64; 3], angle: f64) -> ComplexMatrix {
    let r = core::f64::consts::FRAC_1_SQRT_2;
    let [x, y, z] = *n;
    // basis ordered m = +1, 0, −1
    let off_upper = C64::new(x, -y) * r;
    let off_lower = C64::new(x, y) * r;
    let zero = C64::new(0.0, 0.0);
    let k = ComplexMatrix::new(
        3,
        3,
        vec![
            C64::new(z, 0.0),
            off_upper,
            zero,
            off_lower,
            zero,
            off_upper,
            zero,
            off_lower,
            C64::new(-z, 0.0),
        ],
    )
    .expect("3x3");
    let k2 = &k * &k;
    let (s, c) = angle.sin_cos();
    &(&ComplexMatrix::identity(3) - &k.scale(C64::new(0.0, s))) + &k2.scale(C64::new(c - 1.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csm::{born_matrix, standard_context, transform_context, Context};
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    const Y: [f64; 3] = [0.0, 1.0, 0.0];

    fn rot(spin: Spin, axis: [f64; 3], angle: f64) -> GroupElement {
        GroupElement::rotation(spin, axis, angle).unwrap()
    }

    fn action_distance(a: &ComplexMatrix, b: &ComplexMatrix, probes: &Context) -> f64 {
        probes
            .projectors()
            .iter()
            .map(|p| (&a.conjugate(p.matrix()) - &b.conjugate(p.matrix())).frobenius_norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn parse_spin() {
        assert_eq!("1/2".parse::<Spin>().unwrap(), Spin::Half);
        assert_eq!("1".parse::<Spin>().unwrap(), Spin::One);
        assert_eq!("3/2".parse::<Spin>(), Err(Error::UnsupportedSpin("3/2".into())));
        assert_eq!(Spin::Half.to_string(), "1/2");
    }

    #[test]
    fn zero_angle_is_identity() {
        for spin in [Spin::Half, Spin::One] {
            let m = spin_rotation(&rot(spin, [1.0, 2.0, 3.0], 0.0));
            assert!((m.unitary() - &ComplexMatrix::identity(spin.dim())).frobenius_norm() < 1e-15);
        }
    }

    #[test]
    fn representations_are_unitary() {
        for spin in [Spin::Half, Spin::One] {
            let m = spin_rotation(&rot(spin, [0.3, -0.4, 0.8], 1.234));
            assert!(m.unitary().unitarity_deviation() < 1e-14);
        }
    }

    #[test]
    fn malus_law_for_spin_half() {
        let z = standard_context(2).unwrap();
        for theta in [0.3, FRAC_PI_3, FRAC_PI_2, 2.5] {
            let m = spin_rotation(&rot(Spin::Half, Y, theta));
            let b = born_matrix(&z, &transform_context(&z, &m).unwrap()).unwrap();
            let (c2, s2) = ((theta / 2.0).cos().powi(2), (theta / 2.0).sin().powi(2));
            assert!((b.get(0, 0) - c2).abs() < 1e-15);
            assert!((b.get(0, 1) - s2).abs() < 1e-15);
            assert!((b.get(1, 0) - s2).abs() < 1e-15);
        }
    }

    #[test]
    fn spin_one_half_turn_about_x_flips_z() {
        let m = spin_rotation(&rot(Spin::One, [1.0, 0.0, 0.0], PI));
        let z = standard_context(3).unwrap();
        let b = born_matrix(&z, &transform_context(&z, &m).unwrap()).unwrap();
        assert!((b.get(0, 2) - 1.0).abs() < 1e-15);
        assert!((b.get(1, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_axis_composition() {
        for spin in [Spin::Half, Spin::One] {
            let probes = standard_context(spin.dim()).unwrap();
            let a = rot(spin, Y, 0.7);
            let b = rot(spin, Y, -1.9);
            let composed = spin_rotation(&a.then(&b).unwrap());
            let summed = spin_rotation(&rot(spin, Y, 0.7 - 1.9));
            assert!(action_distance(composed.unitary(), summed.unitary(), &probes) < 1e-14);
        }
    }

    #[test]
    fn inverse_undoes() {
        let g = rot(Spin::One, [1.0, 1.0, 0.0], 0.4)
            .then(&rot(Spin::One, [0.0, 0.0, 1.0], 2.0))
            .unwrap();
        let round = spin_rotation(&g.then(&g.inverse()).unwrap());
        assert!((round.unitary() - &ComplexMatrix::identity(3)).frobenius_norm() < 1e-14);
        assert!(g.then(&GroupElement::identity(Spin::Half)).is_err());
        assert!(GroupElement::rotation(Spin::Half, [0.0; 3], 1.0).is_err());
    }
}
