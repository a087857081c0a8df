//! Exchange rates, wealth, and swap gain.
//!
//! The external rate of a token pair is the ratio of the oracle prices;
//! the internal rate is the zero-input limit of the swap rate,
//! `phi * reserve_out / reserve_in`. A trader's wealth is the oracle
//! value of their wallet, and the gain of a swap is the wealth change it
//! causes.

use crate::error::AmmError;
use crate::state::{Fee, Pool, PriceOracle, SwapTx, SystemState, TokenId};
use crate::swap::execute_swap;

/// A strictly positive exchange rate (units of output token per unit of
/// input token).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExchangeRate(f64);

impl ExchangeRate {
    fn new(value: f64) -> Result<Self, AmmError> {
        if !value.is_finite() || value <= 0.0 {
            return Err(AmmError::Domain(format!(
                "exchange rate must be strictly positive, got {value}"
            )));
        }
        Ok(ExchangeRate(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Oracle price ratio `price(token_in) / price(token_out)`.
pub fn external_rate(
    oracle: &PriceOracle,
    token_in: &TokenId,
    token_out: &TokenId,
) -> Result<ExchangeRate, AmmError> {
    let p_in = oracle.price_or_err(token_in)?;
    let p_out = oracle.price_or_err(token_out)?;
    ExchangeRate::new(p_in / p_out)
}

/// Zero-input limit of the swap rate: `phi * reserve_out / reserve_in`.
pub fn internal_rate(fee: Fee, reserve_in: f64, reserve_out: f64) -> Result<ExchangeRate, AmmError> {
    if !reserve_in.is_finite() || reserve_in <= 0.0 || !reserve_out.is_finite() || reserve_out <= 0.0
    {
        return Err(AmmError::Domain(format!(
            "reserves must be strictly positive, got ({reserve_in}, {reserve_out})"
        )));
    }
    ExchangeRate::new(fee.value() * reserve_out / reserve_in)
}

/// Internal rate of the pool handling `{token_in, token_out}` in the
/// given direction.
pub fn pool_internal_rate(
    state: &SystemState,
    token_in: &TokenId,
    token_out: &TokenId,
) -> Result<ExchangeRate, AmmError> {
    let view = state
        .lookup_pool(token_in, token_out)
        .ok_or_else(|| AmmError::NoPool(token_in.to_string(), token_out.to_string()))?;
    internal_rate(view.fee, view.reserve_in, view.reserve_out)
}

/// Redemption value of one pool share: the oracle value of the reserves
/// divided by the share supply.
pub fn minted_price(pool: &Pool, oracle: &PriceOracle) -> Result<f64, AmmError> {
    let p0 = oracle.price_or_err(pool.token0())?;
    let p1 = oracle.price_or_err(pool.token1())?;
    Ok((pool.reserve0() * p0 + pool.reserve1() * p1) / pool.minted_supply())
}

/// Oracle value of an account's wallet: atomic balances at oracle prices
/// plus pool shares at their redemption value. Zero balances do not
/// require a price.
pub fn wealth(state: &SystemState, oracle: &PriceOracle, account: &str) -> Result<f64, AmmError> {
    let Some(wallet) = state.wallet(account) else {
        return Ok(0.0);
    };
    let mut total = 0.0;
    for (token, amount) in wallet.balances() {
        if amount > 0.0 {
            total += amount * oracle.price_or_err(token)?;
        }
    }
    for (pair, amount) in wallet.minted_balances() {
        if amount > 0.0 {
            let pool = state
                .pool(pair)
                .ok_or_else(|| AmmError::NoPool(pair.first().to_string(), pair.second().to_string()))?;
            total += amount * minted_price(pool, oracle)?;
        }
    }
    Ok(total)
}

/// Wealth change of the sender caused by executing `tx`.
pub fn gain(state: &SystemState, oracle: &PriceOracle, tx: &SwapTx) -> Result<f64, AmmError> {
    let after = execute_swap(state, tx)?;
    Ok(wealth(&after, oracle, tx.sender())? - wealth(state, oracle, tx.sender())?)
}

/// Gain shortfall of splitting one swap of `x0 + x1` into sequential
/// swaps of `x0` then `x1`:
///
/// ```text
/// gain(state, swap(x0 + x1))
///   - gain(state, swap(x0)) - gain(state', swap(x1))
/// ```
///
/// where `state'` is the state after the `x0` swap. Strictly positive
/// when `phi < 1`, zero when `phi = 1`.
pub fn epsilon_fee(
    state: &SystemState,
    oracle: &PriceOracle,
    sender: &str,
    token_in: &TokenId,
    token_out: &TokenId,
    x0: f64,
    x1: f64,
) -> Result<f64, AmmError> {
    let first = SwapTx::new(sender, x0, token_in.clone(), token_out.clone())?;
    let second = SwapTx::new(sender, x1, token_in.clone(), token_out.clone())?;
    let combined = SwapTx::new(sender, x0 + x1, token_in.clone(), token_out.clone())?;

    let gain_combined = gain(state, oracle, &combined)?;
    let gain_first = gain(state, oracle, &first)?;
    let mid = execute_swap(state, &first)?;
    let gain_second = gain(&mid, oracle, &second)?;
    Ok(gain_combined - gain_first - gain_second)
}

/// Uniformly sampled `(x, gain)` pairs for swaps of `x` in
/// `[x_min, x_max]`. The gain at `x = 0` is zero by definition.
#[allow(clippy::too_many_arguments)]
pub fn gain_curve(
    state: &SystemState,
    oracle: &PriceOracle,
    sender: &str,
    token_in: &TokenId,
    token_out: &TokenId,
    x_min: f64,
    x_max: f64,
    steps: usize,
) -> Result<Vec<(f64, f64)>, AmmError> {
    if !x_min.is_finite() || !x_max.is_finite() || x_min < 0.0 {
        return Err(AmmError::InvalidRange(format!(
            "bounds must be finite with x_min >= 0, got [{x_min}, {x_max}]"
        )));
    }
    if x_min >= x_max {
        return Err(AmmError::InvalidRange(format!(
            "x_min must be strictly below x_max, got [{x_min}, {x_max}]"
        )));
    }
    if steps < 2 {
        return Err(AmmError::InvalidRange(format!(
            "need at least 2 samples, got {steps}"
        )));
    }
    let width = x_max - x_min;
    let mut points = Vec::with_capacity(steps);
    for i in 0..steps {
        let x = x_min + width * i as f64 / (steps - 1) as f64;
        let g = if x == 0.0 {
            0.0
        } else {
            let tx = SwapTx::new(sender, x, token_in.clone(), token_out.clone())?;
            gain(state, oracle, &tx)?
        };
        points.push((x, g));
    }
    Ok(points)
}

/// Renders curve points as CSV with an `x,gain` header, one row per
/// sample, at full double precision.
pub fn gain_curve_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("x,gain\n");
    for (x, g) in points {
        out.push_str(&format!("{x},{g}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{Pool, Wallet};

    fn tok(s: &str) -> TokenId {
        TokenId::new(s).unwrap()
    }

    fn fee(phi: f64) -> Fee {
        Fee::new(phi).unwrap()
    }

    fn example_oracle() -> PriceOracle {
        let mut oracle = PriceOracle::new();
        oracle.set_price(tok("T0"), 4.0).unwrap();
        oracle.set_price(tok("T1"), 5.0).unwrap();
        oracle
    }

    fn state_with(r0: f64, r1: f64, phi: f64, balance0: f64, balance1: f64) -> SystemState {
        let mut state = SystemState::new();
        state
            .add_pool(Pool::new(tok("T0"), r0, tok("T1"), r1, fee(phi), 100.0).unwrap())
            .unwrap();
        let mut wallet = Wallet::new();
        wallet.set_balance(tok("T0"), balance0).unwrap();
        wallet.set_balance(tok("T1"), balance1).unwrap();
        state.upsert_wallet("A", wallet);
        state
    }

    #[test]
    fn external_rate_is_price_ratio() {
        let oracle = example_oracle();
        let rate = external_rate(&oracle, &tok("T0"), &tok("T1")).unwrap();
        assert_eq!(rate.value(), 0.8);

        let mut equal = PriceOracle::new();
        equal.set_price(tok("A"), 3.0).unwrap();
        equal.set_price(tok("B"), 3.0).unwrap();
        assert_eq!(external_rate(&equal, &tok("A"), &tok("B")).unwrap().value(), 1.0);

        let forward = external_rate(&oracle, &tok("T0"), &tok("T1")).unwrap().value();
        let backward = external_rate(&oracle, &tok("T1"), &tok("T0")).unwrap().value();
        assert!((forward * backward - 1.0).abs() < 1e-15);
    }

    #[test]
    fn external_rate_requires_prices() {
        let oracle = example_oracle();
        assert_eq!(
            external_rate(&oracle, &tok("T0"), &tok("T9")),
            Err(AmmError::MissingPrice("T9".into()))
        );
    }

    #[test]
    fn internal_rate_closed_form() {
        assert_eq!(internal_rate(fee(0.997), 40.0, 60.0).unwrap().value(), 1.4955);
        assert_eq!(internal_rate(fee(1.0), 7.0, 7.0).unwrap().value(), 1.0);
        let rate = internal_rate(fee(0.997), 50.0, 48.03).unwrap().value();
        assert!((rate - 0.958).abs() < 0.001, "rate = {rate}");
    }

    #[test]
    fn minted_price_is_redemption_value() {
        let oracle = example_oracle();
        let pool = Pool::new(tok("T0"), 40.0, tok("T1"), 60.0, fee(0.997), 100.0).unwrap();
        assert_eq!(minted_price(&pool, &oracle).unwrap(), 4.6);

        let double_supply = Pool::new(tok("T0"), 40.0, tok("T1"), 60.0, fee(0.997), 200.0).unwrap();
        assert_eq!(minted_price(&double_supply, &oracle).unwrap(), 2.3);

        let empty = PriceOracle::new();
        assert!(matches!(
            minted_price(&pool, &empty),
            Err(AmmError::MissingPrice(_))
        ));
    }

    #[test]
    fn wealth_weights_balances_by_prices() {
        let oracle = example_oracle();
        let state = state_with(40.0, 60.0, 0.997, 30.0, 20.0);
        assert_eq!(wealth(&state, &oracle, "A").unwrap(), 220.0);
        assert_eq!(wealth(&state, &oracle, "nobody").unwrap(), 0.0);
    }

    #[test]
    fn wealth_includes_pool_shares() {
        let oracle = example_oracle();
        let mut state = state_with(40.0, 60.0, 0.997, 0.0, 0.0);
        let pair = crate::state::canonical_pair(&tok("T0"), &tok("T1")).unwrap();
        let mut wallet = Wallet::new();
        wallet.set_minted_balance(pair, 10.0).unwrap();
        state.upsert_wallet("B", wallet);
        // 10 shares at redemption value 4.6 each.
        assert_eq!(wealth(&state, &oracle, "B").unwrap(), 46.0);
    }

    #[test]
    fn gain_reproduces_worked_example() {
        let oracle = example_oracle();
        let state = state_with(40.0, 60.0, 0.997, 30.0, 20.0);
        let tx = SwapTx::new("A", 10.0, tok("T0"), tok("T1")).unwrap();
        let g = gain(&state, &oracle, &tx).unwrap();
        assert!((g - 19.85).abs() < 0.01, "gain = {g}");
    }

    #[test]
    fn epsilon_fee_vanishes_without_fee() {
        let oracle = example_oracle();
        let state = state_with(400.0, 600.0, 1.0, 300.0, 200.0);
        let eps = epsilon_fee(&state, &oracle, "A", &tok("T0"), &tok("T1"), 40.0, 60.0).unwrap();
        assert!(eps.abs() <= 1e-9, "eps = {eps}");
    }

    #[test]
    fn epsilon_fee_positive_with_fee() {
        let oracle = example_oracle();
        let state = state_with(400.0, 600.0, 0.997, 300.0, 200.0);
        let eps = epsilon_fee(&state, &oracle, "A", &tok("T0"), &tok("T1"), 40.0, 60.0).unwrap();
        // The worked split loses about 0.016 output tokens, worth ~0.08.
        assert!((eps - 0.0784).abs() < 0.001, "eps = {eps}");

        let small = state_with(10.0, 30.0, 0.9, 30.0, 20.0);
        let eps = epsilon_fee(&small, &oracle, "A", &tok("T0"), &tok("T1"), 1.0, 1.0).unwrap();
        assert!(eps > 0.0, "eps = {eps}");
    }

    #[test]
    fn gain_curve_samples_uniformly() {
        let oracle = example_oracle();
        let state = state_with(10.0, 30.0, 0.9, 30.0, 20.0);
        let points =
            gain_curve(&state, &oracle, "A", &tok("T0"), &tok("T1"), 0.0, 30.0, 31).unwrap();
        assert_eq!(points.len(), 31);
        assert_eq!(points[0], (0.0, 0.0));
        assert_eq!(points[30].0, 30.0);
        // Concave with an interior maximum: some interior point beats both ends.
        let best = points
            .iter()
            .map(|&(_, g)| g)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(best > points[0].1 && best > points[30].1);
    }

    #[test]
    fn gain_curve_rejects_degenerate_ranges() {
        let oracle = example_oracle();
        let state = state_with(10.0, 30.0, 0.9, 30.0, 20.0);
        let two = gain_curve(&state, &oracle, "A", &tok("T0"), &tok("T1"), 1.0, 2.0, 2).unwrap();
        assert_eq!(two.len(), 2);
        assert!(matches!(
            gain_curve(&state, &oracle, "A", &tok("T0"), &tok("T1"), 5.0, 5.0, 10),
            Err(AmmError::InvalidRange(_))
        ));
        assert!(matches!(
            gain_curve(&state, &oracle, "A", &tok("T0"), &tok("T1"), 0.0, 1.0, 1),
            Err(AmmError::InvalidRange(_))
        ));
    }

    #[test]
    fn gain_curve_csv_has_header_and_rows() {
        let csv = gain_curve_csv(&[(0.0, 0.0), (1.5, 2.25)]);
        assert_eq!(csv, "x,gain\n0,0\n1.5,2.25\n");
    }
}
