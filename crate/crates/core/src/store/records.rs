use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::content::{Attempt, AttemptId, Exam, ExamId, UserId};
use crate::hash::SourceHash;
use crate::markup::RenderedFragment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Manager,
    Student,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: UserId,
    pub username: String,
    /// PHC-format salted hash; never the password itself.
    pub password_hash: String,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub source_hash: SourceHash,
    pub renderer_version: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub source_hash: SourceHash,
    pub renderer_version: u32,
    pub fragment: RenderedFragment,
}

impl CacheEntry {
    pub fn new(fragment: RenderedFragment) -> CacheEntry {
        CacheEntry {
            source_hash: fragment.source_hash,
            renderer_version: fragment.renderer_version,
            fragment,
        }
    }

    pub fn key(&self) -> CacheKey {
        CacheKey {
            source_hash: self.source_hash,
            renderer_version: self.renderer_version,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collection {
    Users,
    Exams,
    Attempts,
    Cache,
}

/// One write in the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "collection", content = "record", rename_all = "snake_case")]
pub enum Record {
    Users(User),
    Exams(Exam),
    Attempts(Attempt),
    Cache(CacheEntry),
}

/// In-memory image of every collection.
#[doc(hidden)]
#[derive(Debug, Clone, Default)]
pub struct Tables {
    pub(crate) users: BTreeMap<UserId, User>,
    pub(crate) exams: BTreeMap<ExamId, Exam>,
    pub(crate) attempts: BTreeMap<AttemptId, Attempt>,
    pub(crate) cache: BTreeMap<CacheKey, CacheEntry>,
}

impl Tables {
    pub(crate) fn apply(&mut self, record: Record) {
        match record {
            Record::Users(r) => Self::insert(self, r),
            Record::Exams(r) => Self::insert(self, r),
            Record::Attempts(r) => Self::insert(self, r),
            Record::Cache(r) => Self::insert(self, r),
        }
    }

    fn insert<E: Entity>(&mut self, record: E) {
        E::table_mut(self).insert(record.key(), record);
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.users.is_empty()
            && self.exams.is_empty()
            && self.attempts.is_empty()
            && self.cache.is_empty()
    }

    pub(crate) fn records(&self) -> impl Iterator<Item = Record> + '_ {
        let users = self.users.values().cloned().map(Record::Users);
        let exams = self.exams.values().cloned().map(Record::Exams);
        let attempts = self.attempts.values().cloned().map(Record::Attempts);
        let cache = self.cache.values().cloned().map(Record::Cache);
        users.chain(exams).chain(attempts).chain(cache)
    }
}

/// A record type with its own collection and primary key.
pub trait Entity: Clone + Serialize + DeserializeOwned + Send + 'static {
    type Key: Ord + Clone + std::fmt::Debug;
    const COLLECTION: Collection;

    fn key(&self) -> Self::Key;
    fn into_record(self) -> Record;
    #[doc(hidden)]
    fn table(tables: &Tables) -> &BTreeMap<Self::Key, Self>;
    #[doc(hidden)]
    fn table_mut(tables: &mut Tables) -> &mut BTreeMap<Self::Key, Self>;
}

macro_rules! entity {
    ($ty:ty, $key:ty, $variant:ident, $field:ident, |$r:ident| $key_expr:expr) => {
        impl Entity for $ty {
            type Key = $key;
            const COLLECTION: Collection = Collection::$variant;

            fn key(&self) -> $key {
                let $r = self;
                $key_expr
            }

            fn into_record(self) -> Record {
                Record::$variant(self)
            }

            fn table(tables: &Tables) -> &BTreeMap<$key, Self> {
                &tables.$field
            }

            fn table_mut(tables: &mut Tables) -> &mut BTreeMap<$key, Self> {
                &mut tables.$field
            }
        }
    };
}

entity!(User, UserId, Users, users, |r| r.id.clone());
entity!(Exam, ExamId, Exams, exams, |r| r.id.clone());
entity!(Attempt, AttemptId, Attempts, attempts, |r| r.id.clone());
entity!(CacheEntry, CacheKey, Cache, cache, |r| r.key());
