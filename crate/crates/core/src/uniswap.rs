//! Uniswap v2 core integer arithmetic: `getAmountOut` with the 997/1000
//! fee, the adjusted-balance K check, and a differential comparison
//! against the real-valued swap model.
//!
//! Amounts are 256-bit unsigned integers with checked arithmetic;
//! overflow is an error, mirroring on-chain revert semantics.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::Fee;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniswapError {
    /// `getAmountOut` requires a non-zero input amount.
    #[error("INSUFFICIENT_INPUT_AMOUNT")]
    InsufficientInputAmount,

    /// `getAmountOut` requires both reserves to be non-zero.
    #[error("INSUFFICIENT_LIQUIDITY")]
    InsufficientLiquidity,

    /// A checked operation exceeded the 256-bit range.
    #[error("arithmetic overflow beyond 256 bits")]
    Overflow,

    /// An adjusted balance would go negative.
    #[error("arithmetic underflow")]
    Underflow,

    /// Inputs outside what the integer path models.
    #[error("domain error: {0}")]
    Domain(String),
}

fn limit() -> &'static BigUint {
    static LIMIT: OnceLock<BigUint> = OnceLock::new();
    LIMIT.get_or_init(|| BigUint::one() << 256u32)
}

/// Unsigned integer amount with 256-bit range semantics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UintAmount(BigUint);

impl UintAmount {
    pub fn zero() -> Self {
        UintAmount(BigUint::zero())
    }

    pub fn from_u128(value: u128) -> Self {
        UintAmount(BigUint::from(value))
    }

    /// Parses a decimal string, rejecting values at or above `2^256`.
    pub fn from_dec_str(s: &str) -> Result<Self, UniswapError> {
        let value = BigUint::parse_bytes(s.as_bytes(), 10)
            .ok_or_else(|| UniswapError::Domain(format!("not a decimal integer: {s:?}")))?;
        if &value >= limit() {
            return Err(UniswapError::Overflow);
        }
        Ok(UintAmount(value))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, UniswapError> {
        let sum = &self.0 + &other.0;
        if &sum >= limit() {
            return Err(UniswapError::Overflow);
        }
        Ok(UintAmount(sum))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, UniswapError> {
        if other.0 > self.0 {
            return Err(UniswapError::Underflow);
        }
        Ok(UintAmount(&self.0 - &other.0))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, UniswapError> {
        let product = &self.0 * &other.0;
        if &product >= limit() {
            return Err(UniswapError::Overflow);
        }
        Ok(UintAmount(product))
    }

    /// Floor division; division by zero is a domain error.
    pub fn div_floor(&self, other: &Self) -> Result<Self, UniswapError> {
        if other.is_zero() {
            return Err(UniswapError::Domain("division by zero".into()));
        }
        Ok(UintAmount(&self.0 / &other.0))
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }
}

impl fmt::Display for UintAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for UintAmount {
    type Err = UniswapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UintAmount::from_dec_str(s)
    }
}

impl Serialize for UintAmount {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for UintAmount {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(n) => Ok(UintAmount::from_u128(n as u128)),
            Raw::Text(s) => UintAmount::from_dec_str(&s).map_err(serde::de::Error::custom),
        }
    }
}

const FEE_NUMERATOR: u32 = 997;
const FEE_DENOMINATOR: u32 = 1000;

fn uint(v: u32) -> UintAmount {
    UintAmount(BigUint::from(v))
}

/// Output amount of a swap under the hard-coded 997/1000 fee:
///
/// ```text
/// floor(amount_in * 997 * reserve_out / (reserve_in * 1000 + amount_in * 997))
/// ```
///
/// computed with exact checked integer arithmetic, step for step as in
/// the on-chain library function.
pub fn get_amount_out(
    amount_in: &UintAmount,
    reserve_in: &UintAmount,
    reserve_out: &UintAmount,
) -> Result<UintAmount, UniswapError> {
    if amount_in.is_zero() {
        return Err(UniswapError::InsufficientInputAmount);
    }
    if reserve_in.is_zero() || reserve_out.is_zero() {
        return Err(UniswapError::InsufficientLiquidity);
    }
    let amount_in_with_fee = amount_in.checked_mul(&uint(FEE_NUMERATOR))?;
    let numerator = amount_in_with_fee.checked_mul(reserve_out)?;
    let denominator = reserve_in
        .checked_mul(&uint(FEE_DENOMINATOR))?
        .checked_add(&amount_in_with_fee)?;
    numerator.div_floor(&denominator)
}

/// The adjusted-balance invariant enforced by the `swap` primitive:
///
/// ```text
/// (balance0 * 1000 - amount0_in * 3) * (balance1 * 1000 - amount1_in * 3)
///     >= reserve0 * reserve1 * 1000^2
/// ```
///
/// Errors with [`UniswapError::Underflow`] if an adjusted balance would
/// go negative.
pub fn k_invariant_check(
    balance0: &UintAmount,
    balance1: &UintAmount,
    amount0_in: &UintAmount,
    amount1_in: &UintAmount,
    reserve0: &UintAmount,
    reserve1: &UintAmount,
) -> Result<bool, UniswapError> {
    let adjusted0 = balance0
        .checked_mul(&uint(FEE_DENOMINATOR))?
        .checked_sub(&amount0_in.checked_mul(&uint(3))?)?;
    let adjusted1 = balance1
        .checked_mul(&uint(FEE_DENOMINATOR))?
        .checked_sub(&amount1_in.checked_mul(&uint(3))?)?;
    let lhs = adjusted0.checked_mul(&adjusted1)?;
    let rhs = reserve0
        .checked_mul(reserve1)?
        .checked_mul(&uint(FEE_DENOMINATOR))?
        .checked_mul(&uint(FEE_DENOMINATOR))?;
    Ok(lhs >= rhs)
}

/// One differential test case against the real-valued model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapCase {
    pub amount_in: UintAmount,
    pub reserve_in: UintAmount,
    pub reserve_out: UintAmount,
}

/// Result of running one [`SwapCase`] through both the integer path and
/// the real-valued model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformanceRecord {
    pub inputs: SwapCase,
    pub integer_out: UintAmount,
    pub real_out_floor: UintAmount,
    pub divergence: i64,
}

/// Floor of the real-valued swap output `x * phi * r1 / (r0 + phi * x)`
/// at `phi = 997/1000`, evaluated exactly over the rationals. A double
/// cannot resolve unit differences at 256-bit magnitudes, so the real
/// model is evaluated without rounding.
fn real_out_floor(
    amount_in: &UintAmount,
    reserve_in: &UintAmount,
    reserve_out: &UintAmount,
) -> Result<UintAmount, UniswapError> {
    if amount_in.is_zero() {
        return Err(UniswapError::InsufficientInputAmount);
    }
    if reserve_in.is_zero() || reserve_out.is_zero() {
        return Err(UniswapError::InsufficientLiquidity);
    }
    // x * (997/1000) * r1 / (r0 + (997/1000) * x), cleared of denominators.
    let numerator = amount_in.as_biguint() * BigUint::from(FEE_NUMERATOR) * reserve_out.as_biguint();
    let denominator = reserve_in.as_biguint() * BigUint::from(FEE_DENOMINATOR)
        + amount_in.as_biguint() * BigUint::from(FEE_NUMERATOR);
    Ok(UintAmount(numerator / denominator))
}

const DIFFERENTIAL_INPUT_BITS: u64 = 96;

fn check_differential_domain(case: &SwapCase) -> Result<(), UniswapError> {
    for (name, value) in [
        ("amount_in", &case.amount_in),
        ("reserve_in", &case.reserve_in),
        ("reserve_out", &case.reserve_out),
    ] {
        if value.bits() > DIFFERENTIAL_INPUT_BITS {
            return Err(UniswapError::Domain(format!(
                "{name} must be below 2^{DIFFERENTIAL_INPUT_BITS} for differential comparison"
            )));
        }
    }
    Ok(())
}

/// Difference `get_amount_out(..) - floor(real-valued output)` for inputs
/// below `2^96`. `fee` must be the 997/1000 fee hard-coded in the integer
/// path; any other value is out of domain.
pub fn differential_compare(
    amount_in: &UintAmount,
    reserve_in: &UintAmount,
    reserve_out: &UintAmount,
    fee: Fee,
) -> Result<i64, UniswapError> {
    if fee.value() != FEE_NUMERATOR as f64 / FEE_DENOMINATOR as f64 {
        return Err(UniswapError::Domain(format!(
            "the integer path hard-codes fee {FEE_NUMERATOR}/{FEE_DENOMINATOR}, got {}",
            fee.value()
        )));
    }
    Ok(run_case(&SwapCase {
        amount_in: amount_in.clone(),
        reserve_in: reserve_in.clone(),
        reserve_out: reserve_out.clone(),
    })?
    .divergence)
}

/// Runs one case through both paths.
pub fn run_case(case: &SwapCase) -> Result<ConformanceRecord, UniswapError> {
    check_differential_domain(case)?;
    let integer_out = get_amount_out(&case.amount_in, &case.reserve_in, &case.reserve_out)?;
    let real_floor = real_out_floor(&case.amount_in, &case.reserve_in, &case.reserve_out)?;
    let divergence = (BigInt::from(integer_out.0.clone()) - BigInt::from(real_floor.0.clone()))
        .to_i64()
        .ok_or(UniswapError::Overflow)?;
    Ok(ConformanceRecord {
        inputs: case.clone(),
        integer_out,
        real_out_floor: real_floor,
        divergence,
    })
}

/// Post-state K check for a swap produced by [`get_amount_out`]: the new
/// balances are `reserve_in + amount_in` and `reserve_out - amount_out`,
/// with the whole input counted as `amount0_in`.
pub fn post_swap_k_holds(case: &SwapCase, amount_out: &UintAmount) -> Result<bool, UniswapError> {
    let balance0 = case.reserve_in.checked_add(&case.amount_in)?;
    let balance1 = case.reserve_out.checked_sub(amount_out)?;
    k_invariant_check(
        &balance0,
        &balance1,
        &case.amount_in,
        &UintAmount::zero(),
        &case.reserve_in,
        &case.reserve_out,
    )
}

/// Deterministic random cases spanning magnitudes from token dust up to
/// wei-scale reserves, all below the `2^96` differential bound.
pub fn random_cases(seed: u64, count: usize) -> Vec<SwapCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(count);
    while cases.len() < count {
        let reserve_in_bits = rng.gen_range(4..=90u32);
        let reserve_out_bits = rng.gen_range(4..=90u32);
        let amount_bits = rng.gen_range(1..=90u32);
        let reserve_in = rng.gen_range(1..(1u128 << reserve_in_bits));
        let reserve_out = rng.gen_range(1..(1u128 << reserve_out_bits));
        let amount_in = rng.gen_range(1..(1u128 << amount_bits));
        cases.push(SwapCase {
            amount_in: UintAmount::from_u128(amount_in),
            reserve_in: UintAmount::from_u128(reserve_in),
            reserve_out: UintAmount::from_u128(reserve_out),
        });
    }
    cases
}
