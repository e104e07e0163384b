//! Discrete-time coupled growth model of firm assets and debt.
//!
//! Assets grow by preferential attachment (a new unit joins firm j with
//! probability proportional to A_j, or founds a new firm). Debt grows by one
//! unit per step, assigned the same way, so large firms accumulate debt in
//! proportion to their size. Firms whose debt-to-asset ratio R = D/A is high
//! face a bankruptcy hazard q * R^hazard_exponent; bankruptcy resets debt to
//! m * A and the firm keeps operating. Mergers optionally remove one firm per
//! event, folding it into a larger one.
//!
//! Runs are deterministic in (config, seed): the generator is counter-based
//! and the draw order inside a step is fixed (see [`EconomyState::step`]).

mod config;
mod economy;
mod weight_tree;

pub use config::{HazardMode, SimConfig};
pub use economy::{
    BankruptcyEvent, EconomyState, EntryCounter, FirmState, MergerEvent, SeriesField,
};
pub use weight_tree::WeightTree;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("nothing to extract: {0}")]
    EmptySelection(String),
    #[error("corrupt state: {0}")]
    CorruptState(String),
}

/// Initializes an economy and advances it `config.steps` times.
pub fn run(config: &SimConfig) -> Result<EconomyState, SimError> {
    let mut state = EconomyState::init(config.clone())?;
    state.run_steps(config.steps);
    Ok(state)
}
