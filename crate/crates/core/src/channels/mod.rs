//! Classical–quantum channels, multiway channels and their capacity bounds.

mod broadcast;
mod cq;
mod ensemble;
mod multiway;

pub use broadcast::{
    broadcast_code_error, broadcast_region_point, BroadcastCode, BroadcastError, BroadcastPoint,
};
pub use cq::{
    build_channel_state, build_three_stage, build_three_stage_decomposed, check_holevo_bound, example_channel,
    example_counterexample_table, example_measurement, measurement_kernel, mutual_information_pw, ChannelState, CqChannel, ExampleRow, ExampleTable,
    Processing, PureDecomposition,
};
pub use ensemble::CqEnsemble;
pub use multiway::{
    code_error_probabilities, conditional_mi_constraint, converse_check, outer_bound_region, Constraint,
    ConverseEntry, ConverseReport, InputDistribution, MultiwayChannel, MultiwayCode, RateRegion, RateRegionSample,
    RegionConfig, SamplerMode, SupportEstimate, MAX_ALPHABET, MAX_OUTPUT_DIM, MAX_SENDERS, MAX_TENSOR_DIM,
};

use crate::algebra::{AlgebraElement, BlockAlgebra};
use crate::linalg::c;
use crate::state::DensityState;
use crate::{tol, Error, Result};

/// Tolerance on the total mass of an input distribution.
const DISTRIBUTION_TOL: f64 = 1e-9;

pub(crate) fn check_distribution(p: &[f64], n: usize, what: &str) -> Result<()> {
    if p.len() != n {
        return Err(Error::InvalidDistribution(format!("{what}: {} entries for {n} outcomes", p.len())));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < -DISTRIBUTION_TOL) {
        return Err(Error::InvalidDistribution(format!("{what}: entry {x}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::InvalidDistribution(format!("{what}: sums to {s}")));
    }
    Ok(())
}

/// `Σ_k w_k ρ_k` as a state.
pub(crate) fn mix<'a>(
    algebra: &BlockAlgebra,
    terms: impl IntoIterator<Item = (f64, &'a AlgebraElement)>,
) -> Result<DensityState> {
    let mut acc = algebra.zero();
    let mut total = 0.0;
    for (w, el) in terms {
        if w > 0.0 {
            acc.add_scaled_assign(el, c(w, 0.0));
            total += w;
        }
    }
    if total <= tol::TRACE {
        return Err(Error::InvalidDistribution("mixture has no weight".into()));
    }
    DensityState::new(acc.scale(c(1.0 / total, 0.0)))
}

/// Nonempty subsets of `0..s` as sorted index lists, ordered by bitmask.
pub(crate) fn nonempty_subsets(s: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << s)).map(|mask| (0..s).filter(|i| mask & (1 << i) != 0).collect()).collect()
}

pub(crate) fn complement(set: &[usize], s: usize) -> Vec<usize> {
    (0..s).filter(|i| !set.contains(i)).collect()
}
