//! Shared fixtures for the benchmarks.

use moyal_core::star::{GridFunction, NamedFunction};

/// Three Gaussians on the default grid (θ = 1, extent 12).
pub fn gaussians(resolution: usize) -> [GridFunction; 3] {
    [([0.5, 0.0], 1.0), ([0.0, -0.7], 1.3), ([-0.4, 0.3], 0.8)].map(|(center, variance)| {
        NamedFunction::Gauss { center, variance }.sample(12.0, resolution, 1.0).expect("valid grid")
    })
}
