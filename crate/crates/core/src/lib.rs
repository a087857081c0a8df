//! Constant-product AMM model with trading fees.
//!
//! The crate models a system of wallets and two-token pools whose swap
//! rate is `phi * reserve_out / (reserve_in + phi * amount_in)` for a
//! trading fee `phi` in `(0, 1]`. On top of the state model it provides
//! exchange rates against an external price oracle, trader wealth and
//! per-swap gain, closed-form equilibrium and gain-maximizing swap
//! amounts, derivative-free solvers to check those closed forms
//! independently, and a conformance harness against Uniswap v2's integer
//! swap arithmetic.

pub mod arbitrage;
pub mod error;
pub mod json;
pub mod numeric;
pub mod rates;
pub mod state;
pub mod swap;
pub mod uniswap;

pub use error::AmmError;
pub use state::{
    canonical_pair, Fee, MintedTokenId, Pool, PoolView, PriceOracle, SwapTx, SystemState, TokenId,
    Wallet,
};
