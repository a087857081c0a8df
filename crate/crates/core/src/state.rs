//! The system state: wallets, pools, and the external price oracle.
//!
//! States are immutable once built; swap execution produces a new state
//! instead of mutating in place, so values can be shared freely across
//! threads.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::AmmError;

/// Identifier of an atomic token type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String")]
pub struct TokenId(String);

impl TokenId {
    pub fn new(symbol: impl Into<String>) -> Result<Self, AmmError> {
        let symbol = symbol.into();
        if symbol.is_empty() {
            return Err(AmmError::InvalidToken(
                "token symbol must be non-empty".into(),
            ));
        }
        Ok(TokenId(symbol))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TokenId {
    type Error = AmmError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        TokenId::new(value)
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Identifier of the pool-share token for an unordered pair of distinct
/// atomic tokens. Construction canonicalizes the order, so `(a, b)` and
/// `(b, a)` produce the same value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MintedTokenId {
    first: TokenId,
    second: TokenId,
}

impl MintedTokenId {
    /// Builds the canonical pair identifier; the two tokens are ordered
    /// lexicographically by symbol.
    pub fn new(a: TokenId, b: TokenId) -> Result<Self, AmmError> {
        if a == b {
            return Err(AmmError::InvalidPair);
        }
        let (first, second) = if a.as_str() <= b.as_str() { (a, b) } else { (b, a) };
        Ok(MintedTokenId { first, second })
    }

    pub fn first(&self) -> &TokenId {
        &self.first
    }

    pub fn second(&self) -> &TokenId {
        &self.second
    }

    pub fn contains(&self, token: &TokenId) -> bool {
        &self.first == token || &self.second == token
    }

    /// Stable string form used as a JSON map key: `"<first>/<second>"`.
    pub fn key(&self) -> String {
        format!("{}/{}", self.first, self.second)
    }

    /// Parses the `"<a>/<b>"` key form produced by [`MintedTokenId::key`].
    pub fn parse_key(key: &str) -> Result<Self, AmmError> {
        let mut parts = key.splitn(2, '/');
        let a = parts.next().unwrap_or("");
        let b = parts.next().ok_or_else(|| {
            AmmError::InvalidToken(format!("minted token key {key:?} must be \"A/B\""))
        })?;
        MintedTokenId::new(TokenId::new(a)?, TokenId::new(b)?)
    }
}

impl fmt::Display for MintedTokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.first, self.second)
    }
}

/// Canonical pool-share identifier for two distinct tokens; symmetric in
/// its arguments.
pub fn canonical_pair(a: &TokenId, b: &TokenId) -> Result<MintedTokenId, AmmError> {
    MintedTokenId::new(a.clone(), b.clone())
}

/// Trading fee parameter in `(0, 1]`. The share of the input that takes
/// part in rebalancing is `phi`; `phi = 1` means no fee.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64")]
pub struct Fee(f64);

impl Fee {
    pub fn new(phi: f64) -> Result<Self, AmmError> {
        if !phi.is_finite() || phi <= 0.0 || phi > 1.0 {
            return Err(AmmError::Domain(format!(
                "fee must satisfy 0 < fee <= 1, got {phi}"
            )));
        }
        Ok(Fee(phi))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_fee_less(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for Fee {
    type Error = AmmError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Fee::new(value)
    }
}

fn check_positive(what: &str, value: f64) -> Result<f64, AmmError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(AmmError::Domain(format!(
            "{what} must be a strictly positive finite number, got {value}"
        )));
    }
    Ok(value)
}

fn check_non_negative(what: &str, value: f64) -> Result<f64, AmmError> {
    if !value.is_finite() || value < 0.0 {
        return Err(AmmError::Domain(format!(
            "{what} must be a non-negative finite number, got {value}"
        )));
    }
    Ok(value)
}

/// One constant-product pair: two strictly positive reserves, the trading
/// fee, and the outstanding supply of the pool-share token.
#[derive(Debug, Clone, PartialEq)]
pub struct Pool {
    token0: TokenId,
    token1: TokenId,
    reserve0: f64,
    reserve1: f64,
    fee: Fee,
    minted_supply: f64,
}

impl Pool {
    /// Builds a pool; tokens are stored in canonical (lexicographic) order
    /// with their reserves swapped accordingly.
    pub fn new(
        token0: TokenId,
        reserve0: f64,
        token1: TokenId,
        reserve1: f64,
        fee: Fee,
        minted_supply: f64,
    ) -> Result<Self, AmmError> {
        if token0 == token1 {
            return Err(AmmError::InvalidPair);
        }
        let reserve0 = check_positive("pool reserve", reserve0)?;
        let reserve1 = check_positive("pool reserve", reserve1)?;
        let minted_supply = check_positive("minted supply", minted_supply)?;
        let ((token0, reserve0), (token1, reserve1)) = if token0.as_str() <= token1.as_str() {
            ((token0, reserve0), (token1, reserve1))
        } else {
            ((token1, reserve1), (token0, reserve0))
        };
        Ok(Pool {
            token0,
            token1,
            reserve0,
            reserve1,
            fee,
            minted_supply,
        })
    }

    pub fn pair(&self) -> MintedTokenId {
        MintedTokenId {
            first: self.token0.clone(),
            second: self.token1.clone(),
        }
    }

    pub fn token0(&self) -> &TokenId {
        &self.token0
    }

    pub fn token1(&self) -> &TokenId {
        &self.token1
    }

    pub fn reserve0(&self) -> f64 {
        self.reserve0
    }

    pub fn reserve1(&self) -> f64 {
        self.reserve1
    }

    pub fn fee(&self) -> Fee {
        self.fee
    }

    pub fn minted_supply(&self) -> f64 {
        self.minted_supply
    }

    pub fn reserve_of(&self, token: &TokenId) -> Option<f64> {
        if token == &self.token0 {
            Some(self.reserve0)
        } else if token == &self.token1 {
            Some(self.reserve1)
        } else {
            None
        }
    }

    /// Reserves oriented for a swap `token_in -> token_out`, or `None` if
    /// either token is not part of the pair.
    pub fn oriented(&self, token_in: &TokenId, token_out: &TokenId) -> Option<(f64, f64)> {
        if token_in == &self.token0 && token_out == &self.token1 {
            Some((self.reserve0, self.reserve1))
        } else if token_in == &self.token1 && token_out == &self.token0 {
            Some((self.reserve1, self.reserve0))
        } else {
            None
        }
    }

    pub(crate) fn set_reserves(&mut self, reserve0: f64, reserve1: f64) {
        debug_assert!(reserve0 > 0.0 && reserve1 > 0.0);
        self.reserve0 = reserve0;
        self.reserve1 = reserve1;
    }
}

/// A pool as seen from one swap direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolView {
    pub reserve_in: f64,
    pub reserve_out: f64,
    pub fee: Fee,
}

/// Token balances of one account. Missing entries read as zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Wallet {
    balances: BTreeMap<TokenId, f64>,
    minted_balances: BTreeMap<MintedTokenId, f64>,
}

impl Wallet {
    pub fn new() -> Self {
        Wallet::default()
    }

    pub fn balance(&self, token: &TokenId) -> f64 {
        self.balances.get(token).copied().unwrap_or(0.0)
    }

    pub fn minted_balance(&self, pair: &MintedTokenId) -> f64 {
        self.minted_balances.get(pair).copied().unwrap_or(0.0)
    }

    pub fn set_balance(&mut self, token: TokenId, amount: f64) -> Result<(), AmmError> {
        let amount = check_non_negative("wallet balance", amount)?;
        self.balances.insert(token, amount);
        Ok(())
    }

    pub fn set_minted_balance(&mut self, pair: MintedTokenId, amount: f64) -> Result<(), AmmError> {
        let amount = check_non_negative("minted balance", amount)?;
        self.minted_balances.insert(pair, amount);
        Ok(())
    }

    pub fn balances(&self) -> impl Iterator<Item = (&TokenId, f64)> {
        self.balances.iter().map(|(t, v)| (t, *v))
    }

    pub fn minted_balances(&self) -> impl Iterator<Item = (&MintedTokenId, f64)> {
        self.minted_balances.iter().map(|(p, v)| (p, *v))
    }
}

/// External price oracle: strictly positive value per unit of each token.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriceOracle {
    prices: BTreeMap<TokenId, f64>,
}

impl PriceOracle {
    pub fn new() -> Self {
        PriceOracle::default()
    }

    pub fn set_price(&mut self, token: TokenId, price: f64) -> Result<(), AmmError> {
        let price = check_positive("oracle price", price)?;
        self.prices.insert(token, price);
        Ok(())
    }

    pub fn price(&self, token: &TokenId) -> Option<f64> {
        self.prices.get(token).copied()
    }

    /// Price lookup that reports the missing token on failure.
    pub fn price_or_err(&self, token: &TokenId) -> Result<f64, AmmError> {
        self.price(token)
            .ok_or_else(|| AmmError::MissingPrice(token.to_string()))
    }

    pub fn prices(&self) -> impl Iterator<Item = (&TokenId, f64)> {
        self.prices.iter().map(|(t, v)| (t, *v))
    }
}

/// A swap request: `sender` pays `amount_in` of `token_in` and receives
/// the corresponding output of `token_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SwapTxDoc")]
pub struct SwapTx {
    sender: String,
    amount_in: f64,
    token_in: TokenId,
    token_out: TokenId,
}

#[derive(Deserialize)]
struct SwapTxDoc {
    sender: String,
    amount_in: f64,
    token_in: String,
    token_out: String,
}

impl TryFrom<SwapTxDoc> for SwapTx {
    type Error = AmmError;

    fn try_from(doc: SwapTxDoc) -> Result<Self, Self::Error> {
        SwapTx::new(
            doc.sender,
            doc.amount_in,
            TokenId::new(doc.token_in)?,
            TokenId::new(doc.token_out)?,
        )
    }
}

impl SwapTx {
    pub fn new(
        sender: impl Into<String>,
        amount_in: f64,
        token_in: TokenId,
        token_out: TokenId,
    ) -> Result<Self, AmmError> {
        if token_in == token_out {
            return Err(AmmError::InvalidPair);
        }
        if !amount_in.is_finite() || amount_in <= 0.0 {
            return Err(AmmError::NonPositiveAmount);
        }
        Ok(SwapTx {
            sender: sender.into(),
            amount_in,
            token_in,
            token_out,
        })
    }

    pub fn sender(&self) -> &str {
        &self.sender
    }

    pub fn amount_in(&self) -> f64 {
        self.amount_in
    }

    pub fn token_in(&self) -> &TokenId {
        &self.token_in
    }

    pub fn token_out(&self) -> &TokenId {
        &self.token_out
    }
}

/// Wallets plus at most one pool per unordered token pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemState {
    wallets: BTreeMap<String, Wallet>,
    pools: BTreeMap<MintedTokenId, Pool>,
}

impl SystemState {
    pub fn new() -> Self {
        SystemState::default()
    }

    /// Adds a pool; at most one pool may exist per unordered pair.
    pub fn add_pool(&mut self, pool: Pool) -> Result<(), AmmError> {
        let pair = pool.pair();
        if self.pools.contains_key(&pair) {
            return Err(AmmError::Domain(format!(
                "a pool for pair {pair} already exists"
            )));
        }
        self.pools.insert(pair, pool);
        Ok(())
    }

    pub fn upsert_wallet(&mut self, owner: impl Into<String>, wallet: Wallet) {
        self.wallets.insert(owner.into(), wallet);
    }

    pub fn wallet(&self, account: &str) -> Option<&Wallet> {
        self.wallets.get(account)
    }

    pub fn wallets(&self) -> impl Iterator<Item = (&String, &Wallet)> {
        self.wallets.iter()
    }

    pub fn pool(&self, pair: &MintedTokenId) -> Option<&Pool> {
        self.pools.get(pair)
    }

    pub fn pool_for(&self, a: &TokenId, b: &TokenId) -> Option<&Pool> {
        let pair = MintedTokenId::new(a.clone(), b.clone()).ok()?;
        self.pools.get(&pair)
    }

    pub fn pools(&self) -> impl Iterator<Item = &Pool> {
        self.pools.values()
    }

    /// The pool for `{token_in, token_out}` oriented for that swap
    /// direction, or `None` if no such pool exists.
    pub fn lookup_pool(&self, token_in: &TokenId, token_out: &TokenId) -> Option<PoolView> {
        let pool = self.pool_for(token_in, token_out)?;
        let (reserve_in, reserve_out) = pool.oriented(token_in, token_out)?;
        Some(PoolView {
            reserve_in,
            reserve_out,
            fee: pool.fee(),
        })
    }

    /// Stored balance, or zero for unknown accounts and unheld tokens.
    pub fn balance_of(&self, account: &str, token: &TokenId) -> f64 {
        self.wallets
            .get(account)
            .map(|w| w.balance(token))
            .unwrap_or(0.0)
    }

    pub fn minted_balance_of(&self, account: &str, pair: &MintedTokenId) -> f64 {
        self.wallets
            .get(account)
            .map(|w| w.minted_balance(pair))
            .unwrap_or(0.0)
    }

    /// Total amount of `token` in the system: wallet balances plus pool
    /// reserves. Conserved by swap transitions.
    pub fn total_atomic_supply(&self, token: &TokenId) -> f64 {
        let in_wallets: f64 = self.wallets.values().map(|w| w.balance(token)).sum();
        let in_pools: f64 = self
            .pools
            .values()
            .filter_map(|p| p.reserve_of(token))
            .sum();
        in_wallets + in_pools
    }

    /// Checks the cross-cutting invariants: for every pool, the minted
    /// balances held in wallets must not exceed the pool's supply, and no
    /// wallet may hold shares of a pair without a pool.
    pub fn validate(&self) -> Result<(), AmmError> {
        let mut held: BTreeMap<&MintedTokenId, f64> = BTreeMap::new();
        for (owner, wallet) in &self.wallets {
            for (pair, amount) in wallet.minted_balances() {
                if amount > 0.0 && !self.pools.contains_key(pair) {
                    return Err(AmmError::validation(
                        format!("wallets[{owner}].minted_balances[{}]", pair.key()),
                        "no pool exists for this pair",
                    ));
                }
                *held.entry(pair).or_insert(0.0) += amount;
            }
        }
        for (pair, total) in held {
            if let Some(pool) = self.pools.get(pair) {
                if total > pool.minted_supply() {
                    return Err(AmmError::validation(
                        format!("pools[{}].minted_supply", pair.key()),
                        format!(
                            "wallets hold {total} shares, more than the supply {}",
                            pool.minted_supply()
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn credit(&mut self, account: &str, token: &TokenId, amount: f64) {
        let wallet = self.wallets.entry(account.to_string()).or_default();
        let next = wallet.balance(token) + amount;
        wallet.balances.insert(token.clone(), next);
    }

    pub(crate) fn debit(&mut self, account: &str, token: &TokenId, amount: f64) {
        let wallet = self.wallets.entry(account.to_string()).or_default();
        let next = wallet.balance(token) - amount;
        debug_assert!(next >= 0.0, "debit below zero");
        wallet.balances.insert(token.clone(), next);
    }

    pub(crate) fn set_pool_reserves(&mut self, pair: &MintedTokenId, reserve0: f64, reserve1: f64) {
        if let Some(pool) = self.pools.get_mut(pair) {
            pool.set_reserves(reserve0, reserve1);
        }
    }
}
