//! Shared fixtures for the benchmarks.

use freqbias_core::{simulate_ba, AreaDroop, DisturbanceSpec, LoadModel, SyntheticDataset};

/// One simulated day under a random-walk load with AGC on.
pub fn synthetic_day(minutes: usize) -> SyntheticDataset {
    let area = AreaDroop::from_bias(4090.0, 0.98).expect("valid area");
    let spec = DisturbanceSpec {
        seed: 11,
        load_model: LoadModel::RandomWalk { step_mw: 50.0 },
        ..DisturbanceSpec::default()
    };
    simulate_ba(&area, &spec, minutes, true).expect("simulation")
}
