use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every simulated path in the project.
pub type PathRng = ChaCha8Rng;

/// Reproducible randomness for one simulated path.
///
/// `value` keys a ChaCha8 stream cipher (expanded with `seed_from_u64`) and
/// `stream` selects its 64-bit stream id, so `(value, stream)` fully
/// determines the sequence of draws and disjoint stream ids give
/// non-overlapping sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub value: u64,
    pub stream: u64,
}

impl Seed {
    pub const fn new(value: u64, stream: u64) -> Self {
        Seed { value, stream }
    }

    pub fn rng(&self) -> PathRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.value);
        rng.set_stream(self.stream);
        rng
    }

    /// Same seed value, another path index.
    pub fn with_stream(&self, stream: u64) -> Seed {
        Seed { value: self.value, stream }
    }

    /// Independent seed for a second driver simulated on the same path.
    pub fn derive(&self, label: u64) -> Seed {
        Seed {
            value: splitmix64(self.value ^ splitmix64(label.wrapping_add(0x9E37_79B9_7F4A_7C15))),
            stream: self.stream,
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
