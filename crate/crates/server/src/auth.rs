use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::{Algorithm, Argon2, Params, Version};
use cbt_core::content::UserId;
use cbt_core::store::Role;
use chrono::{DateTime, Utc};
use parking_lot::RwLock;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Argon2id cost parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PasswordParams {
    pub memory_kib: u32,
    pub iterations: u32,
    pub parallelism: u32,
}

impl Default for PasswordParams {
    fn default() -> PasswordParams {
        PasswordParams {
            memory_kib: Params::DEFAULT_M_COST,
            iterations: Params::DEFAULT_T_COST,
            parallelism: Params::DEFAULT_P_COST,
        }
    }
}

impl PasswordParams {
    /// Cheapest settings argon2 accepts; for tests only.
    pub const INSECURE_FAST: PasswordParams = PasswordParams {
        memory_kib: 8,
        iterations: 1,
        parallelism: 1,
    };

    fn argon2(&self) -> Result<Argon2<'static>, argon2::Error> {
        let params = Params::new(self.memory_kib, self.iterations, self.parallelism, None)?;
        Ok(Argon2::new(Algorithm::Argon2id, Version::V0x13, params))
    }
}

pub struct Passwords {
    params: PasswordParams,
    argon2: Argon2<'static>,
    dummy: OnceLock<String>,
}

impl Passwords {
    pub fn new(params: PasswordParams) -> Result<Passwords, argon2::Error> {
        Ok(Passwords {
            argon2: params.argon2()?,
            params,
            dummy: OnceLock::new(),
        })
    }

    pub fn params(&self) -> PasswordParams {
        self.params
    }

    /// PHC string with a fresh random salt.
    pub fn hash(&self, password: &str) -> String {
        let salt_bytes: [u8; 16] = rand::rng().random();
        let salt = SaltString::encode_b64(&salt_bytes).expect("16 bytes is a valid salt");
        self.argon2
            .hash_password(password.as_bytes(), &salt)
            .expect("validated parameters")
            .to_string()
    }

    /// Verifies against the parameters recorded in `phc`, so changing the
    /// configured cost does not lock out existing users.
    pub fn verify(&self, password: &str, phc: &str) -> bool {
        PasswordHash::new(phc).is_ok_and(|hash| {
            Argon2::default()
                .verify_password(password.as_bytes(), &hash)
                .is_ok()
        })
    }

    /// Spends the same effort as a real check, for unknown usernames.
    pub fn burn(&self, password: &str) {
        let dummy = self.dummy.get_or_init(|| self.hash("not a real password"));
        let _ = self.verify(password, dummy);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    pub user_id: UserId,
    pub username: String,
    pub role: Role,
    pub expires_at: DateTime<Utc>,
}

/// Live sessions, held in memory only: a restart logs everyone out.
#[derive(Default)]
pub struct Sessions(RwLock<HashMap<String, Session>>);

impl Sessions {
    pub fn issue(
        &self,
        user_id: UserId,
        username: String,
        role: Role,
        expires_at: DateTime<Utc>,
        now: DateTime<Utc>,
    ) -> Session {
        let session = Session {
            token: new_token(),
            user_id,
            username,
            role,
            expires_at,
        };
        let mut map = self.0.write();
        map.retain(|_, s| s.expires_at > now);
        map.insert(session.token.clone(), session.clone());
        session
    }

    pub fn lookup(&self, token: &str, now: DateTime<Utc>) -> Option<Session> {
        let session = self.0.read().get(token).cloned()?;
        if session.expires_at > now {
            Some(session)
        } else {
            self.0.write().remove(token);
            None
        }
    }

    /// Pushes the expiry of `token` out to at least `until`.
    pub fn extend(&self, token: &str, until: DateTime<Utc>) {
        if let Some(s) = self.0.write().get_mut(token) {
            s.expires_at = s.expires_at.max(until);
        }
    }

    pub fn revoke(&self, token: &str) {
        self.0.write().remove(token);
    }
}

/// 256 random bits from the thread-local CSPRNG, hex-encoded.
fn new_token() -> String {
    let bytes: [u8; 32] = rand::rng().random();
    let mut out = String::with_capacity(64);
    for b in bytes {
        write!(out, "{b:02x}").expect("writing to a String");
    }
    out
}
