use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, C64};
use super::qr::qr;

/// Handle on a reproducible random sequence: ChaCha8 keyed by `seed`, with the
/// 64-bit ChaCha stream selected by `stream_id`.
///
/// The same `(seed, stream_id)` always yields the same draws. Parallel callers
/// must use distinct stream ids, typically through [`RngStream::substream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child stream for the `index`-th independent task spawned from this one.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x9E37_79B9_7F4A_7C15))),
            stream_id: index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Complex Gaussian with `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of the
/// triangular diagonal moved into `Q`.
pub fn haar_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    assert!(n >= 1, "haar_unitary needs n >= 1");
    let z = ginibre(n, rng);
    let (mut q, r) = qr(&z).expect("square input");
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(n: usize, rng: &RngStream) -> ComplexMatrix {
    haar_unitary_with(n, &mut rng.generator())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_same_draws() {
        let a = RngStream::new(42, 3);
        let x: u64 = a.generator().random();
        let y: u64 = a.generator().random();
        assert_eq!(x, y);
        let z: u64 = RngStream::new(42, 4).generator().random();
        assert_ne!(x, z);
    }

    #[test]
    fn substreams_differ() {
        let base = RngStream::new(7, 0);
        let a: u64 = base.substream(0).generator().random();
        let b: u64 = base.substream(1).generator().random();
        let c: u64 = RngStream::new(7, 1).substream(0).generator().random();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn haar_scalar_has_unit_modulus() {
        let u = haar_unitary(1, &RngStream::new(5, 0));
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_four_is_unitary() {
        let u = haar_unitary(4, &RngStream::new(2024, 0));
        assert!(u.unitarity_deviation() < 1e-12);
    }
}
