//! The fee-adjusted constant-product swap rate and swap execution.
//!
//! For a swap of `x` input tokens against oriented reserves `(r0, r1)`
//! with trading fee `phi`, the rate is
//!
//! ```text
//! rate(x, r0, r1) = phi * r1 / (r0 + phi * x)
//! ```
//!
//! and the output is `y = x * rate`. Only `phi * x` takes part in the
//! rebalancing, so for `phi < 1` the product of the reserves strictly
//! grows on every swap; at `phi = 1` it is preserved.

use crate::error::AmmError;
use crate::state::{canonical_pair, Fee, SwapTx, SystemState};

fn check_reserves(reserve_in: f64, reserve_out: f64) -> Result<(), AmmError> {
    if !reserve_in.is_finite() || reserve_in <= 0.0 {
        return Err(AmmError::Domain(format!(
            "input reserve must be strictly positive, got {reserve_in}"
        )));
    }
    if !reserve_out.is_finite() || reserve_out <= 0.0 {
        return Err(AmmError::Domain(format!(
            "output reserve must be strictly positive, got {reserve_out}"
        )));
    }
    Ok(())
}

/// Output tokens per input token for a swap of `amount_in`.
///
/// `amount_in` may be zero: the rate then equals the internal exchange
/// rate `phi * reserve_out / reserve_in`.
pub fn swap_rate(
    fee: Fee,
    amount_in: f64,
    reserve_in: f64,
    reserve_out: f64,
) -> Result<f64, AmmError> {
    check_reserves(reserve_in, reserve_out)?;
    if !amount_in.is_finite() || amount_in < 0.0 {
        return Err(AmmError::Domain(format!(
            "swap amount must be non-negative, got {amount_in}"
        )));
    }
    let phi = fee.value();
    Ok(phi * reserve_out / (reserve_in + phi * amount_in))
}

/// Output amount for a swap of `amount_in`: `amount_in * swap_rate(..)`.
pub fn swap_output(
    fee: Fee,
    amount_in: f64,
    reserve_in: f64,
    reserve_out: f64,
) -> Result<f64, AmmError> {
    Ok(amount_in * swap_rate(fee, amount_in, reserve_in, reserve_out)?)
}

/// A priced swap: the applied rate and the resulting output amount,
/// which is always strictly below the output reserve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapQuote {
    pub rate: f64,
    pub amount_out: f64,
}

/// Prices a swap of a strictly positive amount.
pub fn quote(
    fee: Fee,
    amount_in: f64,
    reserve_in: f64,
    reserve_out: f64,
) -> Result<SwapQuote, AmmError> {
    if !amount_in.is_finite() || amount_in <= 0.0 {
        return Err(AmmError::NonPositiveAmount);
    }
    let rate = swap_rate(fee, amount_in, reserve_in, reserve_out)?;
    let amount_out = amount_in * rate;
    // Output-boundedness holds mathematically; reject the inputs so
    // extreme that double rounding would let the output reach the
    // reserve.
    if amount_out >= reserve_out {
        return Err(AmmError::Domain(format!(
            "swap of {amount_in} would drain the output reserve {reserve_out} at this precision"
        )));
    }
    Ok(SwapQuote { rate, amount_out })
}

/// Executes a swap, returning the successor state.
///
/// The sender pays `amount_in` of the input token and receives the quoted
/// output; the pool's oriented reserves become
/// `(reserve_in + amount_in, reserve_out - amount_out)`. All other
/// balances are untouched.
pub fn execute_swap(state: &SystemState, tx: &SwapTx) -> Result<SystemState, AmmError> {
    if !tx.amount_in().is_finite() || tx.amount_in() <= 0.0 {
        return Err(AmmError::NonPositiveAmount);
    }
    let view = state.lookup_pool(tx.token_in(), tx.token_out()).ok_or_else(|| {
        AmmError::NoPool(tx.token_in().to_string(), tx.token_out().to_string())
    })?;
    let held = state.balance_of(tx.sender(), tx.token_in());
    if held < tx.amount_in() {
        return Err(AmmError::InsufficientBalance {
            account: tx.sender().to_string(),
            token: tx.token_in().to_string(),
            held,
            needed: tx.amount_in(),
        });
    }
    let quote = quote(view.fee, tx.amount_in(), view.reserve_in, view.reserve_out)?;

    let pair = canonical_pair(tx.token_in(), tx.token_out())?;
    let new_in = view.reserve_in + tx.amount_in();
    let new_out = view.reserve_out - quote.amount_out;
    let (reserve0, reserve1) = if tx.token_in() == pair.first() {
        (new_in, new_out)
    } else {
        (new_out, new_in)
    };

    let mut next = state.clone();
    next.debit(tx.sender(), tx.token_in(), tx.amount_in());
    next.credit(tx.sender(), tx.token_out(), quote.amount_out);
    next.set_pool_reserves(&pair, reserve0, reserve1);
    debug_assert!(reserve0 > 0.0 && reserve1 > 0.0);
    Ok(next)
}

/// Amount of the input token recovered by swapping `x`, then immediately
/// swapping the whole output back on the updated reserves.
///
/// Equals `x` when `phi = 1`; strictly less otherwise.
pub fn round_trip_output(fee: Fee, x: f64, r0: f64, r1: f64) -> Result<f64, AmmError> {
    let y = swap_output(fee, x, r0, r1)?;
    swap_output(fee, y, r1 - y, r0 + x)
}

/// The factor relating one swap of `x + y` to the sequential swaps of `x`
/// then `y` on reserves `(r0, r1)`:
///
/// ```text
/// rate(x + y, r0, r1) = (alpha * x + beta * y) / (x + y) * Z
/// ```
///
/// where `alpha` is the rate of the first swap and `beta` the rate of the
/// second on the updated reserves. `Z = 1` when `phi = 1` and `Z > 1`
/// otherwise: the single large swap beats the split.
pub fn additivity_factor(fee: Fee, x: f64, y: f64, r0: f64, r1: f64) -> Result<f64, AmmError> {
    check_reserves(r0, r1)?;
    if !x.is_finite() || x <= 0.0 || !y.is_finite() || y <= 0.0 {
        return Err(AmmError::Domain(format!(
            "split amounts must be strictly positive, got x={x}, y={y}"
        )));
    }
    let phi = fee.value();
    let a = phi * r1 * x;
    let b = phi * r1 * r0 * y;
    let with_fee = r0 + phi * x + phi * y;
    let mixed = r0 + x + phi * y;
    let numerator = (a * with_fee + b) * mixed;
    let denominator = with_fee * (a * mixed + b);
    Ok(numerator / denominator)
}
