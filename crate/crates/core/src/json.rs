//! JSON documents for states, oracles, and swap traces.
//!
//! Loaders validate every type invariant and point at the offending field
//! on failure, e.g. `pools[0].fee: fee must satisfy 0 < fee <= 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::AmmError;
use crate::state::{
    Fee, MintedTokenId, Pool, PriceOracle, SwapTx, SystemState, TokenId, Wallet,
};

#[derive(Deserialize)]
struct StateDoc {
    #[serde(default)]
    pools: Vec<PoolDoc>,
    #[serde(default)]
    wallets: Vec<WalletDoc>,
}

#[derive(Deserialize)]
struct PoolDoc {
    token0: String,
    token1: String,
    r0: f64,
    r1: f64,
    fee: f64,
    minted_supply: f64,
}

#[derive(Deserialize)]
struct WalletDoc {
    owner: String,
    #[serde(default)]
    balances: BTreeMap<String, f64>,
    #[serde(default)]
    minted_balances: BTreeMap<String, f64>,
}

fn at<T>(path: String, result: Result<T, AmmError>) -> Result<T, AmmError> {
    result.map_err(|e| AmmError::Validation {
        path,
        message: e.to_string(),
    })
}

/// Parses and validates a state document:
/// `{"pools":[{"token0":..,"token1":..,"r0":..,"r1":..,"fee":..,"minted_supply":..}],
///   "wallets":[{"owner":..,"balances":{..},"minted_balances":{..}}]}`
pub fn state_from_json(text: &str) -> Result<SystemState, AmmError> {
    let doc: StateDoc =
        serde_json::from_str(text).map_err(|e| AmmError::Parse(e.to_string()))?;
    let mut state = SystemState::new();
    for (i, p) in doc.pools.into_iter().enumerate() {
        let path = format!("pools[{i}]");
        let token0 = at(format!("{path}.token0"), TokenId::new(p.token0))?;
        let token1 = at(format!("{path}.token1"), TokenId::new(p.token1))?;
        let fee = at(format!("{path}.fee"), Fee::new(p.fee))?;
        let pool = at(
            path.clone(),
            Pool::new(token0, p.r0, token1, p.r1, fee, p.minted_supply),
        )?;
        at(path, state.add_pool(pool))?;
    }
    for (i, w) in doc.wallets.into_iter().enumerate() {
        let path = format!("wallets[{i}]");
        if w.owner.is_empty() {
            return Err(AmmError::validation(
                format!("{path}.owner"),
                "owner must be non-empty",
            ));
        }
        if state.wallet(&w.owner).is_some() {
            return Err(AmmError::validation(
                format!("{path}.owner"),
                format!("duplicate wallet for account {:?}", w.owner),
            ));
        }
        let mut wallet = Wallet::new();
        for (symbol, amount) in w.balances {
            let field = format!("{path}.balances[{symbol:?}]");
            let token = at(field.clone(), TokenId::new(symbol))?;
            at(field, wallet.set_balance(token, amount))?;
        }
        for (key, amount) in w.minted_balances {
            let field = format!("{path}.minted_balances[{key:?}]");
            let pair = at(field.clone(), MintedTokenId::parse_key(&key))?;
            at(field, wallet.set_minted_balance(pair, amount))?;
        }
        state.upsert_wallet(w.owner, wallet);
    }
    state.validate()?;
    Ok(state)
}

#[derive(Deserialize)]
struct OracleDoc {
    prices: BTreeMap<String, f64>,
}

/// Parses and validates an oracle document: `{"prices":{"T0":4.0,...}}`.
pub fn oracle_from_json(text: &str) -> Result<PriceOracle, AmmError> {
    let doc: OracleDoc =
        serde_json::from_str(text).map_err(|e| AmmError::Parse(e.to_string()))?;
    let mut oracle = PriceOracle::new();
    for (symbol, price) in doc.prices {
        let field = format!("prices[{symbol:?}]");
        let token = at(field.clone(), TokenId::new(symbol))?;
        at(field, oracle.set_price(token, price))?;
    }
    Ok(oracle)
}

/// Parses a trace document: an ordered JSON array of swap records,
/// `[{"sender":"A","amount_in":10.0,"token_in":"T0","token_out":"T1"}]`.
pub fn trace_from_json(text: &str) -> Result<Vec<SwapTx>, AmmError> {
    let raw: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| AmmError::Parse(e.to_string()))?;
    raw.into_iter()
        .enumerate()
        .map(|(i, value)| {
            serde_json::from_value::<SwapTx>(value).map_err(|e| AmmError::Validation {
                path: format!("trace[{i}]"),
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct PoolOut<'a> {
    token0: &'a str,
    token1: &'a str,
    r0: f64,
    r1: f64,
    fee: f64,
    minted_supply: f64,
}

#[derive(Serialize)]
struct WalletOut<'a> {
    owner: &'a str,
    balances: BTreeMap<&'a str, f64>,
    minted_balances: BTreeMap<String, f64>,
}

/// Serializes a state back to the document schema accepted by
/// [`state_from_json`]. Map iteration is ordered, so output is
/// deterministic.
pub fn state_to_json(state: &SystemState) -> serde_json::Value {
    let pools: Vec<PoolOut> = state
        .pools()
        .map(|p| PoolOut {
            token0: p.token0().as_str(),
            token1: p.token1().as_str(),
            r0: p.reserve0(),
            r1: p.reserve1(),
            fee: p.fee().value(),
            minted_supply: p.minted_supply(),
        })
        .collect();
    let wallets: Vec<WalletOut> = state
        .wallets()
        .map(|(owner, w)| WalletOut {
            owner,
            balances: w.balances().map(|(t, v)| (t.as_str(), v)).collect(),
            minted_balances: w.minted_balances().map(|(p, v)| (p.key(), v)).collect(),
        })
        .collect();
    serde_json::json!({ "pools": pools, "wallets": wallets })
}
