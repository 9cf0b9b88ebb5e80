//! Fixtures shared by the criterion benches.

use splinedict::signalio;
use splinedict::{adapt_partition, CurvatureVariant, Partition, SampledSignal};

/// Chirp with 2049 samples and its level-9 adapted partition.
pub fn chirp_fixture() -> (SampledSignal, Partition) {
    let sig = signalio::chirp(2049).expect("chirp");
    let partition = adapt_partition(&sig, 9, CurvatureVariant::StandardPlus).expect("partition");
    (sig, partition)
}
