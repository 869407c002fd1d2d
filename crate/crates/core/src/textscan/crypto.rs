//! Syntactic matching and checksum validation of cryptocurrency addresses
//! for seven coins.
//!
//! Base58check coins (BTC, LTC, DOGE, DASH, NEO) use a 4-byte double-SHA256
//! checksum over a 21-byte versioned payload; Ripple uses its own base58
//! alphabet with the same checksum construction; ETH addresses are 40 hex
//! digits with the Keccak-based capitalization checksum for mixed-case
//! spellings. Bech32 (bc1/ltc1) matching sits behind a flag, default off.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sha3::Keccak256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Coin {
    Btc,
    Eth,
    Ltc,
    Dash,
    Xrp,
    Doge,
    Neo,
}

impl Coin {
    pub const ALL: [Coin; 7] =
        [Coin::Btc, Coin::Eth, Coin::Ltc, Coin::Dash, Coin::Xrp, Coin::Doge, Coin::Neo];

    pub fn as_str(self) -> &'static str {
        match self {
            Coin::Btc => "BTC",
            Coin::Eth => "ETH",
            Coin::Ltc => "LTC",
            Coin::Dash => "DASH",
            Coin::Xrp => "XRP",
            Coin::Doge => "DOGE",
            Coin::Neo => "NEO",
        }
    }

    /// Base58check version bytes for this coin (empty for non-base58check
    /// coins). 0x05 appears for both BTC and LTC; attribution follows the
    /// `ALL` order.
    pub fn version_bytes(self) -> &'static [u8] {
        match self {
            Coin::Btc => &[0x00, 0x05],
            Coin::Ltc => &[0x30, 0x32, 0x05],
            Coin::Doge => &[0x1e, 0x16],
            Coin::Dash => &[0x4c, 0x10],
            Coin::Neo => &[0x17],
            Coin::Eth | Coin::Xrp => &[],
        }
    }
}

impl fmt::Display for Coin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Coin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BTC" => Ok(Coin::Btc),
            "ETH" => Ok(Coin::Eth),
            "LTC" => Ok(Coin::Ltc),
            "DASH" => Ok(Coin::Dash),
            "XRP" => Ok(Coin::Xrp),
            "DOGE" => Ok(Coin::Doge),
            "NEO" => Ok(Coin::Neo),
            other => Err(format!("unknown coin `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CryptoConfig {
    /// Also match bech32 segwit addresses (bc1/ltc1). Off by default.
    pub enable_bech32: bool,
}

pub const BITCOIN_ALPHABET: &[u8; 58] =
    b"123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
pub const RIPPLE_ALPHABET: &[u8; 58] =
    b"rpshnaf39wBUDNEGHJKLM4PQRST7VWXYZ2bcdeCg65jkm8oFqi1tuvAxyz";

fn alphabet_index(alphabet: &[u8; 58]) -> [i8; 128] {
    let mut table = [-1i8; 128];
    for (i, b) in alphabet.iter().enumerate() {
        table[*b as usize] = i as i8;
    }
    table
}

/// Byte-wise base58 decode (big-endian accumulator, leading zero digits map
/// to leading zero bytes).
pub fn base58_decode(s: &str, alphabet: &[u8; 58]) -> Option<Vec<u8>> {
    if s.is_empty() {
        return None;
    }
    let table = alphabet_index(alphabet);
    let mut bytes: Vec<u8> = Vec::with_capacity(25);
    for ch in s.bytes() {
        if ch >= 128 {
            return None;
        }
        let digit = table[ch as usize];
        if digit < 0 {
            return None;
        }
        let mut carry = digit as u32;
        for b in bytes.iter_mut().rev() {
            let val = (*b as u32) * 58 + carry;
            *b = (val & 0xff) as u8;
            carry = val >> 8;
        }
        while carry > 0 {
            bytes.insert(0, (carry & 0xff) as u8);
            carry >>= 8;
        }
    }
    let zeros = s.bytes().take_while(|b| *b == alphabet[0]).count();
    let mut out = vec![0u8; zeros];
    out.extend(bytes);
    Some(out)
}

fn sha256d(data: &[u8]) -> [u8; 32] {
    let first = Sha256::digest(data);
    let second = Sha256::digest(first);
    second.into()
}

/// Verify the trailing 4-byte double-SHA256 checksum of a decoded payload.
pub fn base58check_verify(payload: &[u8]) -> bool {
    if payload.len() < 5 {
        return false;
    }
    let (body, checksum) = payload.split_at(payload.len() - 4);
    sha256d(body)[..4] == *checksum
}

/// Classify a candidate that decodes under the bitcoin alphabet. Returns the
/// coin (by version byte, first match in `Coin::ALL` order) and checksum
/// validity.
fn classify_base58(s: &str) -> Option<(Coin, bool)> {
    let payload = base58_decode(s, BITCOIN_ALPHABET)?;
    if payload.len() != 25 {
        return None;
    }
    let version = payload[0];
    let coin = Coin::ALL.iter().copied().find(|c| c.version_bytes().contains(&version))?;
    Some((coin, base58check_verify(&payload)))
}

fn classify_ripple(s: &str) -> Option<(Coin, bool)> {
    if !s.starts_with('r') {
        return None;
    }
    let payload = base58_decode(s, RIPPLE_ALPHABET)?;
    if payload.len() != 25 || payload[0] != 0x00 {
        return None;
    }
    Some((Coin::Xrp, base58check_verify(&payload)))
}

/// EIP-55: all-lowercase and all-uppercase hex are accepted; mixed case must
/// match the Keccak-256 capitalization of the lowercase address.
pub fn eth_checksum_valid(hex40: &str) -> bool {
    debug_assert_eq!(hex40.len(), 40);
    let has_lower = hex40.bytes().any(|b| b.is_ascii_lowercase());
    let has_upper = hex40.bytes().any(|b| b.is_ascii_uppercase());
    if !has_lower || !has_upper {
        return true;
    }
    let lower = hex40.to_ascii_lowercase();
    let hash: [u8; 32] = Keccak256::digest(lower.as_bytes()).into();
    for (i, ch) in hex40.bytes().enumerate() {
        if !ch.is_ascii_alphabetic() {
            continue;
        }
        let nibble = if i % 2 == 0 { hash[i / 2] >> 4 } else { hash[i / 2] & 0x0f };
        let want_upper = nibble >= 8;
        if want_upper != ch.is_ascii_uppercase() {
            return false;
        }
    }
    true
}

fn classify_eth(s: &str) -> Option<(Coin, bool)> {
    let hex = s.strip_prefix("0x")?;
    if hex.len() != 40 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    Some((Coin::Eth, eth_checksum_valid(hex)))
}

const BECH32_CHARSET: &[u8; 32] = b"qpzry9x8gf2tvdw0s3jn54khce6mua7l";
const BECH32_GEN: [u32; 5] = [0x3b6a57b2, 0x26508e6d, 0x1ea119fa, 0x3d4233dd, 0x2a1462b3];

fn bech32_polymod(values: &[u8]) -> u32 {
    let mut chk = 1u32;
    for v in values {
        let b = chk >> 25;
        chk = ((chk & 0x01ff_ffff) << 5) ^ (*v as u32);
        for (i, g) in BECH32_GEN.iter().enumerate() {
            if (b >> i) & 1 == 1 {
                chk ^= g;
            }
        }
    }
    chk
}

fn bech32_hrp_expand(hrp: &str) -> Vec<u8> {
    let mut out: Vec<u8> = hrp.bytes().map(|b| b >> 5).collect();
    out.push(0);
    out.extend(hrp.bytes().map(|b| b & 31));
    out
}

/// Verify a segwit address for the given human-readable part. Checks the
/// bech32 checksum plus the witness-program shape (v0 programs must be 20 or
/// 32 bytes).
pub fn bech32_verify(address: &str, expected_hrp: &str) -> bool {
    let has_lower = address.bytes().any(|b| b.is_ascii_lowercase());
    let has_upper = address.bytes().any(|b| b.is_ascii_uppercase());
    if has_lower && has_upper {
        return false;
    }
    let address = address.to_ascii_lowercase();
    let Some(sep) = address.rfind('1') else { return false };
    let (hrp, data_part) = (&address[..sep], &address[sep + 1..]);
    if hrp != expected_hrp || data_part.len() < 7 {
        return false;
    }
    let mut data = Vec::with_capacity(data_part.len());
    for ch in data_part.bytes() {
        let Some(pos) = BECH32_CHARSET.iter().position(|c| *c == ch) else { return false };
        data.push(pos as u8);
    }
    let mut values = bech32_hrp_expand(hrp);
    values.extend(&data);
    if bech32_polymod(&values) != 1 {
        return false;
    }
    let witness_version = data[0];
    if witness_version > 16 {
        return false;
    }
    // 5-bit groups to bytes, padding bits must be zero
    let payload = &data[1..data.len() - 6];
    let mut bits = 0u32;
    let mut acc = 0u32;
    let mut program_len = 0usize;
    for v in payload {
        acc = (acc << 5) | *v as u32;
        bits += 5;
        if bits >= 8 {
            bits -= 8;
            program_len += 1;
        }
    }
    if bits >= 5 || (acc & ((1 << bits) - 1)) != 0 {
        return false;
    }
    if !(2..=40).contains(&program_len) {
        return false;
    }
    if witness_version == 0 && program_len != 20 && program_len != 32 {
        return false;
    }
    true
}

/// Classify one maximal alphanumeric run. Returns the matched coin and
/// checksum validity, or `None` when no coin's syntactic pattern matches.
pub fn classify_candidate(run: &str, config: &CryptoConfig) -> Option<(Coin, bool)> {
    if run.len() == 42 && run.starts_with("0x") {
        return classify_eth(run);
    }
    if config.enable_bech32 {
        let lower = run.to_ascii_lowercase();
        if lower.starts_with("bc1") && run.len() >= 14 {
            return Some((Coin::Btc, bech32_verify(run, "bc")));
        }
        if lower.starts_with("ltc1") && run.len() >= 14 {
            return Some((Coin::Ltc, bech32_verify(run, "ltc")));
        }
    }
    if (25..=35).contains(&run.len()) {
        if let Some(found) = classify_base58(run) {
            return Some(found);
        }
        if let Some(found) = classify_ripple(run) {
            return Some(found);
        }
    }
    None
}
