use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every simulation routine.
pub type SimRng = ChaCha8Rng;

/// Independent stream for replication `index` under `master_seed`.
///
/// ChaCha is counter based, so stream `i` is the same sequence no matter
/// which worker draws it or in which order replications run.
pub fn stream(master_seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
