//! Counter-based SplitMix64.
//!
//! Output `i` of a stream with key `k` is `mix64(k + (i + 1) * GAMMA)`, the
//! SplitMix64 finalizer applied to the Weyl sequence. Any element of any
//! stream can be computed directly, so event streams can be replayed or
//! sliced without generating their prefix. Streams are derived from a seed
//! by mixing the seed with a fixed per-purpose constant.
//!
//! Not cryptographically secure.

/// Identifier written into event-log headers.
pub const ALGORITHM: &str = "splitmix64-ctr-v1";

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Substream tags.
pub const STREAM_POSITION: u64 = 0x706f_7369_7469_6f6e; // "position"
pub const STREAM_THINNING: u64 = 0x7468_696e_6e69_6e67; // "thinning"
pub const STREAM_REPLICA: u64 = 0x7265_706c_6963_6173; // "replicas"

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One keyed stream of 64-bit outputs addressed by counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    /// Substream `tag` of `seed`.
    pub fn derive(seed: u64, tag: u64) -> Self {
        Self {
            key: mix64(seed ^ mix64(tag)),
        }
    }

    #[inline]
    pub fn u64_at(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GAMMA)))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform_at(&self, counter: u64) -> f64 {
        (self.u64_at(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Seed of replica `index` under `base_seed`.
pub fn replica_seed(base_seed: u64, index: u64) -> u64 {
    CounterRng::derive(base_seed, STREAM_REPLICA).u64_at(index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // Sequential SplitMix64 seeded with 0 starts 0xe220a8397b1dcdaf,
        // 0x6e789e6aa1b965f4, 0x06c45d188009454f.
        let r = CounterRng { key: 0 };
        assert_eq!(r.u64_at(0), 0xe220a8397b1dcdaf);
        assert_eq!(r.u64_at(1), 0x6e789e6aa1b965f4);
        assert_eq!(r.u64_at(2), 0x06c45d188009454f);
    }

    #[test]
    fn streams_differ() {
        let a = CounterRng::derive(7, STREAM_POSITION);
        let b = CounterRng::derive(7, STREAM_THINNING);
        let c = CounterRng::derive(8, STREAM_POSITION);
        assert_ne!(a.u64_at(0), b.u64_at(0));
        assert_ne!(a.u64_at(0), c.u64_at(0));
        assert_ne!(replica_seed(1, 0), replica_seed(1, 1));
    }

    #[test]
    fn uniform_range_and_mean() {
        let r = CounterRng::derive(42, STREAM_POSITION);
        let n = 200_000;
        let mut sum = 0.0;
        for i in 0..n {
            let u = r.uniform_at(i);
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        // sd of the mean is 1/sqrt(12 n) ≈ 6.5e-4
        assert!((mean - 0.5).abs() < 4e-3);
    }
}
