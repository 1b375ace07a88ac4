//! Partitions, pattern distributions and entropies.

mod dist;
mod exact;
mod independence;
mod partition;
mod profile;
mod sample;

pub use dist::{entropy_bits, product, DistDoc, DistMode, Estimator, Pattern, PatternDist, Window};
pub use exact::{join_dist_bruteforce, join_dist_exact};
pub use partition::Partition;
pub use sample::{join_dist_sample, SampleConfig, SAMPLE_BATCH};
pub use independence::{independence_check, IndependenceReport, IndependenceViolation};
pub use profile::{
    cond_entropy, cond_from_joint, entropy_profile, entropy_within_log_support, join_dist, name_count,
    perturbation_check, profile_from_dist, CondEntropy, EntropyPoint, EntropyProfile, Mode, NameCount,
    PerturbationCheck,
};
