// SPDX-License-Identifier: Apache-2.0

//! Deterministic token encryption.
//!
//! Tokens must map to identical ciphertexts under the same key so that an
//! encrypted query can be matched against the encrypted index by equality.
//! [`KeyedCipher`] realizes this with HMAC-SHA256 (a keyed pseudorandom
//! function with a fixed 32-byte tag). [`IdentityCodec`] leaves the token
//! bytes readable and is used for evaluation runs that need plaintext words.

use std::fmt;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use hmac::{Hmac, KeyInit, Mac};
use sha2::Sha256;

use crate::error::{Error, Result};

pub const KEY_LEN: usize = 32;

/// 256-bit key material. Deliberately neither `Serialize` nor `Display`.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey([u8; KEY_LEN]);

impl SecretKey {
    pub fn from_bytes(bytes: [u8; KEY_LEN]) -> Self {
        SecretKey(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; KEY_LEN] = bytes
            .try_into()
            .map_err(|_| Error::Key(format!("expected {KEY_LEN} bytes, found {}", bytes.len())))?;
        Ok(SecretKey(arr))
    }

    /// Parses key file contents: either exactly 32 raw bytes or 64 hex
    /// characters (surrounding whitespace allowed).
    pub fn parse(contents: &[u8]) -> Result<Self> {
        if contents.len() == KEY_LEN {
            return Self::from_slice(contents);
        }
        let text = std::str::from_utf8(contents)
            .map_err(|_| Error::Key("key file is neither 32 raw bytes nor hex".into()))?
            .trim();
        if text.len() != 2 * KEY_LEN {
            return Err(Error::Key(format!(
                "expected {} hex characters, found {}",
                2 * KEY_LEN,
                text.len()
            )));
        }
        let bytes = hex::decode(text).map_err(|e| Error::Key(e.to_string()))?;
        Self::from_slice(&bytes)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read(path)?)
    }

    fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(<redacted>)")
    }
}

/// Encrypted token. Ordering is lexicographic on the raw bytes, which is the
/// tie-break order used throughout the pipeline.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CipherToken(Vec<u8>);

impl CipherToken {
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        CipherToken(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_base64(&self) -> String {
        STANDARD.encode(&self.0)
    }

    pub fn from_base64(s: &str) -> Result<Self> {
        STANDARD
            .decode(s)
            .map(CipherToken)
            .map_err(|e| Error::InvalidInput(format!("bad base64 token {s:?}: {e}")))
    }

    /// Token bytes as a word, when they are valid UTF-8 (identity mode).
    pub fn as_plaintext(&self) -> Option<&str> {
        std::str::from_utf8(&self.0).ok()
    }
}

impl fmt::Display for CipherToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_base64())
    }
}

impl fmt::Debug for CipherToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CipherToken({})", self.to_base64())
    }
}

/// Lowercases, trims and strips leading/trailing punctuation.
pub fn normalize_word(word: &str) -> String {
    word.trim()
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

pub trait TokenCipher: Send + Sync {
    /// Encrypts an already-extracted word. Equal inputs give equal outputs.
    fn encrypt_token(&self, plaintext: &str) -> Result<CipherToken>;

    /// Splits on whitespace, normalizes and encrypts each term, preserving
    /// first-occurrence order and dropping duplicates.
    fn encrypt_query(&self, query: &str) -> Vec<CipherToken> {
        let mut out: Vec<CipherToken> = Vec::new();
        for term in query.split_whitespace() {
            let Ok(token) = self.encrypt_token(term) else {
                continue;
            };
            if !out.contains(&token) {
                out.push(token);
            }
        }
        out
    }
}

fn normalized_nonempty(plaintext: &str) -> Result<String> {
    let word = normalize_word(plaintext);
    if word.is_empty() {
        return Err(Error::InvalidInput("empty plaintext token".into()));
    }
    Ok(word)
}

#[derive(Clone, Debug)]
pub struct KeyedCipher {
    key: SecretKey,
}

impl KeyedCipher {
    pub fn new(key: SecretKey) -> Self {
        KeyedCipher { key }
    }
}

impl TokenCipher for KeyedCipher {
    fn encrypt_token(&self, plaintext: &str) -> Result<CipherToken> {
        let word = normalized_nonempty(plaintext)?;
        let mut mac = <Hmac<Sha256> as KeyInit>::new_from_slice(self.key.as_bytes())
            .expect("HMAC accepts keys of any length");
        mac.update(word.as_bytes());
        Ok(CipherToken(mac.finalize().into_bytes().to_vec()))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityCodec;

impl IdentityCodec {
    pub fn decode(token: &CipherToken) -> Option<&str> {
        token.as_plaintext()
    }
}

impl TokenCipher for IdentityCodec {
    fn encrypt_token(&self, plaintext: &str) -> Result<CipherToken> {
        Ok(CipherToken(normalized_nonempty(plaintext)?.into_bytes()))
    }
}

/// Runtime choice between the keyed cipher and the identity codec.
#[derive(Clone, Debug)]
pub enum Codec {
    Keyed(KeyedCipher),
    Identity,
}

impl Codec {
    pub fn keyed(key: SecretKey) -> Self {
        Codec::Keyed(KeyedCipher::new(key))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Codec::Keyed(_) => "keyed",
            Codec::Identity => "identity",
        }
    }
}

impl TokenCipher for Codec {
    fn encrypt_token(&self, plaintext: &str) -> Result<CipherToken> {
        match self {
            Codec::Keyed(c) => c.encrypt_token(plaintext),
            Codec::Identity => IdentityCodec.encrypt_token(plaintext),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn key(b: u8) -> SecretKey {
        SecretKey::from_bytes([b; KEY_LEN])
    }

    fn random_word(rng: &mut ChaCha8Rng) -> String {
        let len = rng.random_range(3..12);
        (0..len)
            .map(|_| rng.random_range(b'a'..=b'z') as char)
            .collect()
    }

    #[test]
    fn deterministic_and_keyed() {
        let k1 = KeyedCipher::new(key(1));
        let k2 = KeyedCipher::new(key(2));
        assert_eq!(
            k1.encrypt_token("net").unwrap(),
            k1.encrypt_token("net").unwrap()
        );
        assert_ne!(
            k1.encrypt_token("net").unwrap(),
            k2.encrypt_token("net").unwrap()
        );
    }

    #[test]
    fn fixed_width_output() {
        let c = KeyedCipher::new(key(7));
        let short = c.encrypt_token("a").unwrap();
        let long = c.encrypt_token(&"x".repeat(500)).unwrap();
        assert_eq!(short.as_bytes().len(), 32);
        assert_eq!(long.as_bytes().len(), 32);
    }

    #[test]
    fn empty_plaintext_rejected() {
        let c = KeyedCipher::new(key(7));
        assert!(matches!(c.encrypt_token("  "), Err(Error::InvalidInput(_))));
        assert!(IdentityCodec.encrypt_token("").is_err());
    }

    #[test]
    fn identity_token_decodes_to_word() {
        let t = IdentityCodec.encrypt_token("net").unwrap();
        assert_eq!(STANDARD.decode(t.to_base64()).unwrap(), b"net");
        assert_eq!(IdentityCodec::decode(&t), Some("net"));
    }

    #[test]
    fn query_encryption() {
        let c = KeyedCipher::new(key(3));
        let q = c.encrypt_query("Net Traffic");
        assert_eq!(
            q,
            vec![
                c.encrypt_token("net").unwrap(),
                c.encrypt_token("traffic").unwrap()
            ]
        );
        assert_eq!(c.encrypt_query("net net").len(), 1);
        assert!(c.encrypt_query("").is_empty());
        assert!(c.encrypt_query("  ,, ").is_empty());
    }

    #[test]
    fn key_file_formats() {
        let raw = [9u8; KEY_LEN];
        assert_eq!(SecretKey::parse(&raw).unwrap(), SecretKey::from_bytes(raw));
        let hexed = format!("{}\n", hex::encode(raw));
        assert_eq!(
            SecretKey::parse(hexed.as_bytes()).unwrap(),
            SecretKey::from_bytes(raw)
        );
        assert!(SecretKey::parse(b"abcd").is_err());
        assert!(SecretKey::parse(&[0u8; 31]).is_err());
        assert_eq!(format!("{:?}", key(1)), "SecretKey(<redacted>)");
    }

    #[test]
    fn identity_round_trip_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let w = random_word(&mut rng);
            let t = IdentityCodec.encrypt_token(&w).unwrap();
            assert_eq!(IdentityCodec::decode(&t), Some(w.as_str()));
        }
    }

    #[test]
    fn reencryption_is_byte_identical() {
        let c = KeyedCipher::new(key(5));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let w = random_word(&mut rng);
            assert_eq!(c.encrypt_token(&w).unwrap(), c.encrypt_token(&w).unwrap());
        }
    }

    #[test]
    fn no_collisions_among_distinct_words() {
        let c = KeyedCipher::new(key(6));
        let words: HashSet<String> = (0..100_000).map(|i| format!("w{i}")).collect();
        let tokens: HashSet<CipherToken> =
            words.iter().map(|w| c.encrypt_token(w).unwrap()).collect();
        assert_eq!(tokens.len(), words.len());
    }
}
