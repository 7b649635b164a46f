#![allow(dead_code)]

use fjlab::fj::StubbornnessProfile;
use fjlab::graph::{
    sample_graph, sbm_probability_matrix, CommunityPartition, RealizedGraph, SbmSpec,
};
use fjlab::{convergence_condition, ConvergenceVerdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A realized graph that satisfies the strict convergence condition,
/// together with its profile.
pub struct Instance {
    pub spec: SbmSpec<f64>,
    pub graph: RealizedGraph,
    pub profile: StubbornnessProfile<f64>,
}

impl Instance {
    pub fn partition(&self) -> &CommunityPartition {
        self.profile.partition()
    }
}

/// Random SBM configurations, resampled until the drawn graph passes the
/// strict condition. Fully determined by `seed`.
pub struct InstanceGen {
    rng: ChaCha8Rng,
    pub n_range: (usize, usize),
    pub theta_range: (f64, f64),
    pub all_stubborn_share: f64,
}

impl InstanceGen {
    pub fn new(seed: u64, n_range: (usize, usize)) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            n_range,
            theta_range: (0.05, 0.95),
            all_stubborn_share: 0.1,
        }
    }

    pub fn next_instance(&mut self) -> Instance {
        loop {
            let n = self.rng.gen_range(self.n_range.0..=self.n_range.1);
            let r_s = if self.rng.gen::<f64>() < self.all_stubborn_share {
                1.0
            } else {
                self.rng.gen_range(0.1..0.9)
            };
            let spec = SbmSpec::new(
                n,
                r_s,
                self.rng.gen_range(0.15..0.9),
                self.rng.gen_range(0.15..0.9),
                self.rng.gen_range(0.15..0.9),
            )
            .unwrap();
            let theta = self.rng.gen_range(self.theta_range.0..self.theta_range.1);
            let (psi, part) = sbm_probability_matrix(&spec);
            let graph = sample_graph(&psi, self.rng.gen());
            if convergence_condition(&graph, &part) == ConvergenceVerdict::StrictPass {
                let profile = StubbornnessProfile::new(part, theta).unwrap();
                return Instance {
                    spec,
                    graph,
                    profile,
                };
            }
        }
    }
}
