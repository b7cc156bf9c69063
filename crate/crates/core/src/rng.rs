//! Seed expansion. One 64-bit seed fans out into independent ChaCha streams,
//! keyed by purpose and an index (chain number, replication number, ...), so
//! results never depend on scheduling order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Generation = 1,
    AssignmentFit = 2,
    OutcomeFit = 3,
    Replication = 4,
    Imputation = 5,
    Split = 6,
    Oracle = 7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    seed: u64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for `purpose`; `index` distinguishes chains, replications, etc.
    pub fn rng(&self, purpose: Purpose, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((purpose as u64) << 48) ^ index);
        rng
    }

    /// A derived family of streams, e.g. one per check in a run.
    pub fn child(&self, label: u64) -> SeedStreams {
        SeedStreams {
            seed: splitmix64(self.seed ^ splitmix64(label.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
