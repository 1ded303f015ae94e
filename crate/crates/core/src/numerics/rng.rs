//! Seeded random streams.
//!
//! The generator is xoshiro256** with its 256-bit state filled by four
//! consecutive outputs of splitmix64 started at the seed. Everything here is
//! integer arithmetic on `u64` with wrapping semantics, so any language can
//! reproduce the streams bit for bit:
//!
//! * `next_f64` = `(next_u64 >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `below(n)` = high 64 bits of the 128-bit product `next_u64 * n`.
//! * `normal()` = Box-Muller cosine branch on `u1 = 1 - next_f64()`,
//!   `u2 = next_f64()`; two draws per call, nothing cached.
//! * `shuffle` = Fisher-Yates from the last index down, `j = below(i + 1)`.
//! * `derive_substream(id)` seeds a fresh generator with
//!   `mix64(seed ^ mix64(id + 0x9E3779B97F4A7C15))`, where `mix64` is the
//!   splitmix64 output finalizer. It depends only on `(seed, id)`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    mix64(*state)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeededRng {
    seed: u64,
    state: [u64; 4],
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let state = [
            splitmix_next(&mut sm),
            splitmix_next(&mut sm),
            splitmix_next(&mut sm),
            splitmix_next(&mut sm),
        ];
        SeededRng { seed, state }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream keyed by `(seed, stream_id)`; ignores how much of
    /// `self` has been consumed.
    pub fn derive_substream(&self, stream_id: u64) -> SeededRng {
        SeededRng::new(mix64(self.seed ^ mix64(stream_id.wrapping_add(GOLDEN))))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Integer in `[0, n)`; `n` must be positive.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// A random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn xoshiro_reference_vector() {
        // First output of xoshiro256** with state {1, 2, 3, 4}.
        let mut r = SeededRng {
            seed: 0,
            state: [1, 2, 3, 4],
        };
        assert_eq!(r.next_u64(), 11520);
        assert_eq!(r.next_u64(), 0);
        assert_eq!(r.next_u64(), 1509978240);
    }

    #[test]
    fn splitmix_reference_vector() {
        // splitmix64 seeded with 0 starts 0xE220A8397B1DCDAF.
        let mut s = 0u64;
        assert_eq!(splitmix_next(&mut s), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn substreams_differ_and_ignore_consumption() {
        let root = SeededRng::new(7);
        let mut consumed = root.clone();
        for _ in 0..17 {
            consumed.next_u64();
        }
        let mut s0 = root.derive_substream(0);
        let mut s1 = root.derive_substream(1);
        let mut s0_again = consumed.derive_substream(0);
        let a: Vec<u64> = (0..1000).map(|_| s0.next_u64()).collect();
        let b: Vec<u64> = (0..1000).map(|_| s1.next_u64()).collect();
        let c: Vec<u64> = (0..1000).map(|_| s0_again.next_u64()).collect();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn uniform_range_and_below() {
        let mut r = SeededRng::new(3);
        for _ in 0..10_000 {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
            assert!(r.below(7) < 7);
        }
    }

    #[test]
    fn normal_moments() {
        let mut r = SeededRng::new(11);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| r.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut r = SeededRng::new(5);
        let mut p = r.permutation(50);
        p.sort_unstable();
        assert_eq!(p, (0..50).collect::<Vec<_>>());
    }
}
