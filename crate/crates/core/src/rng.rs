//! Counter-mode random streams.
//!
//! Every random object is drawn from its own ChaCha stream whose id is a hash of
//! a domain tag and the object's coordinates, so values never depend on the
//! order in which objects are generated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Channel = 1,
    DirectResample = 2,
    Precoder = 3,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_id(domain: Domain, coords: &[u64]) -> u64 {
    coords.iter().fold(splitmix(domain as u64), |acc, &c| {
        splitmix(acc ^ splitmix(c))
    })
}

pub fn stream(seed: u64, domain: Domain, coords: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(domain, coords));
    rng
}
