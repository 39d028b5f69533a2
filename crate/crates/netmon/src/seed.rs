//! Seed derivation for reproducible, order-independent replications.
//!
//! Every replication owns a generator seeded from (master seed, cell key,
//! replication index), so runs are bit-reproducible regardless of thread
//! count or of how the replication range is partitioned.

/// SplitMix64 finalizer.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derive a stream seed from a master seed and a textual key
/// (FNV-1a over the key, then mixed with the master).
pub fn derive(master: u64, key: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in key.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    mix(master ^ mix(h))
}

/// Seed for one replication within a cell stream.
pub fn replication_seed(cell_seed: u64, index: u64) -> u64 {
    mix(cell_seed ^ mix(index.wrapping_add(1)))
}
