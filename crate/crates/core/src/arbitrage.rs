//! Closed-form arbitrage analysis.
//!
//! For a pool with oriented reserves `(r0, r1)`, fee `phi`, and oracle
//! prices `(p0, p1)` for the input and output token, two closed forms are
//! provided: the swap amount that aligns the pool's internal rate with
//! the external rate, and the swap amount that maximizes the sender's
//! gain. With a fee the two differ: the maximizer always lies in the
//! interval `(x_equil, x_equil / phi]`, and a non-positive value of
//! either means no profitable swap exists in that direction.

use serde::Serialize;

use crate::error::AmmError;
use crate::rates::{external_rate, internal_rate, minted_price};
use crate::state::{canonical_pair, Fee, PriceOracle, SystemState, TokenId};
use crate::swap::swap_output;

fn check_inputs(p0: f64, p1: f64, r0: f64, r1: f64) -> Result<(), AmmError> {
    for (what, v) in [
        ("input token price", p0),
        ("output token price", p1),
        ("input reserve", r0),
        ("output reserve", r1),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(AmmError::Domain(format!(
                "{what} must be strictly positive, got {v}"
            )));
        }
    }
    Ok(())
}

/// Swap amount after which the pool's internal rate equals the external
/// rate `p0 / p1`:
///
/// ```text
/// x0 = (-sqrt(p0) * r0 * (1 + phi)
///        + sqrt(r0) * sqrt(p0 * r0 * (phi - 1)^2 + 4 * p1 * r1 * phi^2))
///      / (2 * sqrt(p0) * phi)
/// ```
///
/// A result `<= 0` means no equilibrium-reaching swap exists in this
/// direction (the pool does not overprice the output token).
pub fn equilibrium_value(
    fee: Fee,
    price_in: f64,
    price_out: f64,
    reserve_in: f64,
    reserve_out: f64,
) -> Result<f64, AmmError> {
    check_inputs(price_in, price_out, reserve_in, reserve_out)?;
    let phi = fee.value();
    let sqrt_p0 = price_in.sqrt();
    let discriminant =
        price_in * reserve_in * (phi - 1.0) * (phi - 1.0) + 4.0 * price_out * reserve_out * phi * phi;
    let numerator = -sqrt_p0 * reserve_in * (1.0 + phi) + reserve_in.sqrt() * discriminant.sqrt();
    Ok(numerator / (2.0 * sqrt_p0 * phi))
}

/// Swap amount that maximizes the sender's gain in this direction:
///
/// ```text
/// x_max = (sqrt(p1 * phi * r0 * r1 / p0) - r0) / phi
/// ```
///
/// A result `<= 0` means no profitable swap exists in this direction.
/// For `phi < 1` a positive `x_max` always lies in
/// `(x_equil, x_equil / phi]`; for `phi = 1` it coincides with
/// `x_equil`.
pub fn optimal_swap_value(
    fee: Fee,
    price_in: f64,
    price_out: f64,
    reserve_in: f64,
    reserve_out: f64,
) -> Result<f64, AmmError> {
    check_inputs(price_in, price_out, reserve_in, reserve_out)?;
    let phi = fee.value();
    Ok(((price_out * phi * reserve_in * reserve_out / price_in).sqrt() - reserve_in) / phi)
}

/// Whether the pool's internal rate for `token_in -> token_out` matches
/// the external rate within `tol * external`.
pub fn is_equilibrium(
    state: &SystemState,
    oracle: &PriceOracle,
    token_in: &TokenId,
    token_out: &TokenId,
    tol: f64,
) -> Result<bool, AmmError> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(AmmError::Domain(format!(
            "tolerance must be non-negative, got {tol}"
        )));
    }
    let view = state
        .lookup_pool(token_in, token_out)
        .ok_or_else(|| AmmError::NoPool(token_in.to_string(), token_out.to_string()))?;
    let internal = internal_rate(view.fee, view.reserve_in, view.reserve_out)?.value();
    let external = external_rate(oracle, token_in, token_out)?.value();
    Ok((internal - external).abs() <= tol * external)
}

/// The arbitrage answer for one pool: the profitable direction (if any),
/// the equilibrium and gain-maximizing swap amounts, the gain at the
/// maximizer, and whether the sender can afford it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArbitrageSolution {
    pub direction: (TokenId, TokenId),
    pub x_equil: Option<f64>,
    pub x_max: Option<f64>,
    #[serde(rename = "gain")]
    pub gain_at_x_max: f64,
    pub enabled: bool,
}

/// Sender's wealth change for a hypothetical swap of `amount_in`,
/// ignoring whether the sender can afford it. Matches
/// [`crate::rates::gain`] whenever the swap is enabled.
fn unconstrained_gain(
    state: &SystemState,
    oracle: &PriceOracle,
    sender: &str,
    token_in: &TokenId,
    token_out: &TokenId,
    amount_in: f64,
) -> Result<f64, AmmError> {
    let pair = canonical_pair(token_in, token_out)?;
    let pool = state
        .pool(&pair)
        .ok_or_else(|| AmmError::NoPool(token_in.to_string(), token_out.to_string()))?;
    let (reserve_in, reserve_out) = pool
        .oriented(token_in, token_out)
        .expect("pool matches the pair");
    let out = swap_output(pool.fee(), amount_in, reserve_in, reserve_out)?;
    let p_in = oracle.price_or_err(token_in)?;
    let p_out = oracle.price_or_err(token_out)?;
    let mut gain = -amount_in * p_in + out * p_out;

    let shares = state.minted_balance_of(sender, &pair);
    if shares > 0.0 {
        let mut moved = pool.clone();
        let (new0, new1) = if token_in == pair.first() {
            (reserve_in + amount_in, reserve_out - out)
        } else {
            (reserve_out - out, reserve_in + amount_in)
        };
        moved.set_reserves(new0, new1);
        gain += shares * (minted_price(&moved, oracle)? - minted_price(pool, oracle)?);
    }
    Ok(gain)
}

/// Solves the arbitrage problem for the pool handling `{a, b}`.
///
/// Both orientations are evaluated; at most one can admit a profitable
/// swap. The sender's balance never gates the mathematics — it only sets
/// the `enabled` flag.
pub fn solve_arbitrage(
    state: &SystemState,
    oracle: &PriceOracle,
    a: &TokenId,
    b: &TokenId,
    sender: &str,
) -> Result<ArbitrageSolution, AmmError> {
    let pair = canonical_pair(a, b)?;
    let pool = state
        .pool(&pair)
        .ok_or_else(|| AmmError::NoPool(a.to_string(), b.to_string()))?;

    let mut profitable = Vec::new();
    for (token_in, token_out) in [
        (pair.first().clone(), pair.second().clone()),
        (pair.second().clone(), pair.first().clone()),
    ] {
        let (reserve_in, reserve_out) = pool
            .oriented(&token_in, &token_out)
            .expect("pool matches the pair");
        let p_in = oracle.price_or_err(&token_in)?;
        let p_out = oracle.price_or_err(&token_out)?;
        let x_equil = equilibrium_value(pool.fee(), p_in, p_out, reserve_in, reserve_out)?;
        let x_max = optimal_swap_value(pool.fee(), p_in, p_out, reserve_in, reserve_out)?;
        if x_max > 0.0 {
            profitable.push((token_in, token_out, x_equil, x_max));
        }
    }
    assert!(
        profitable.len() <= 1,
        "a pool cannot be mispriced in both directions"
    );

    match profitable.pop() {
        Some((token_in, token_out, x_equil, x_max)) => {
            let gain_at_x_max =
                unconstrained_gain(state, oracle, sender, &token_in, &token_out, x_max)?;
            let enabled = state.balance_of(sender, &token_in) >= x_max;
            Ok(ArbitrageSolution {
                direction: (token_in, token_out),
                x_equil: (x_equil > 0.0).then_some(x_equil),
                x_max: Some(x_max),
                gain_at_x_max,
                enabled,
            })
        }
        None => Ok(ArbitrageSolution {
            direction: (pair.first().clone(), pair.second().clone()),
            x_equil: None,
            x_max: None,
            gain_at_x_max: 0.0,
            enabled: false,
        }),
    }
}
