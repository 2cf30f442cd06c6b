//! Embedded transactional store.
//!
//! All state lives in memory and every committed transaction is appended to
//! a JSON-lines log in the data directory before it becomes visible:
//!
//! ```text
//! {"format":"cbt-store","version":1}
//! [{"collection":"users","record":{...}}, ...]
//! [{"collection":"exams","record":{...}}]
//! ```
//!
//! Each line after the header is one transaction. A torn final line (crash
//! mid-append) is discarded on open; damage anywhere else is reported. The
//! log is compacted into a single batch every time the store is opened.
//!
//! Transactions are serialized by one lock, so a transaction always observes
//! every transaction committed before it and never has to be retried.

mod records;

pub use records::{CacheEntry, CacheKey, Collection, Entity, Record, Role, Tables, User};

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::hash::SourceHash;

pub const LOG_FILE: &str = "store.log";
pub const LOCK_FILE: &str = "LOCK";
pub const FORMAT_NAME: &str = "cbt-store";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("storage I/O failure: {0}")]
    Io(#[from] io::Error),
    #[error("{path} is not a {FORMAT_NAME} v{FORMAT_VERSION} log (header: {found})")]
    FormatMismatch { path: PathBuf, found: String },
    #[error("{path}:{line}: corrupt log entry: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("data directory {0} is in use by another process")]
    Locked(PathBuf),
    #[error("username `{0}` is already taken")]
    DuplicateUsername(String),
    #[error("cannot encode record: {0}")]
    Encode(#[from] serde_json::Error),
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct Header {
    format: String,
    version: u32,
}

impl Header {
    fn current() -> Header {
        Header {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
        }
    }
}

pub struct Store {
    inner: Mutex<Inner>,
    dir: Option<PathBuf>,
}

struct Inner {
    tables: Tables,
    log: Option<Log>,
}

struct Log {
    file: File,
    len: u64,
    // Held for the lifetime of the store; the OS drops the lock on exit.
    _lock: File,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("dir", &self.dir)
            .finish_non_exhaustive()
    }
}

impl Store {
    /// A store with no backing files, for tests and previews.
    pub fn in_memory() -> Store {
        Store {
            inner: Mutex::new(Inner {
                tables: Tables::default(),
                log: None,
            }),
            dir: None,
        }
    }

    /// Opens (creating if needed) the store in `dir`, replays and compacts
    /// its log, and takes an exclusive lock on the directory.
    pub fn open(dir: impl AsRef<Path>) -> Result<Store, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(dir.join(LOCK_FILE))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(StoreError::Locked(dir)),
            Err(fs::TryLockError::Error(e)) => return Err(e.into()),
        }

        let path = dir.join(LOG_FILE);
        let tables = match File::open(&path) {
            Ok(mut file) => {
                let mut text = Vec::new();
                file.read_to_end(&mut text)?;
                replay(&path, &text)?
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => Tables::default(),
            Err(e) => return Err(e.into()),
        };
        let len = compact(&dir, &tables)?;
        let file = OpenOptions::new().append(true).open(&path)?;
        Ok(Store {
            inner: Mutex::new(Inner {
                tables,
                log: Some(Log {
                    file,
                    len,
                    _lock: lock,
                }),
            }),
            dir: Some(dir),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Runs `body` against a private view of the store and commits its puts
    /// atomically if it returns `Ok`. Nothing is written if it returns `Err`
    /// or panics.
    ///
    /// The store is locked for the duration of `body`; calling back into the
    /// same store from inside it deadlocks.
    pub fn transact<T, E>(&self, body: impl FnOnce(&mut Txn<'_>) -> Result<T, E>) -> Result<T, E>
    where
        E: From<StoreError>,
    {
        let mut inner = self.inner.lock();
        let Inner { tables, log } = &mut *inner;
        let mut txn = Txn {
            base: tables,
            staged: Tables::default(),
            writes: Vec::new(),
        };
        let value = body(&mut txn)?;
        let writes = txn.writes;
        if writes.is_empty() {
            return Ok(value);
        }
        if let Some(log) = log {
            log.append(&writes)?;
        }
        for record in writes {
            tables.apply(record);
        }
        Ok(value)
    }

    pub fn get<E: Entity>(&self, key: &E::Key) -> Option<E> {
        E::table(&self.inner.lock().tables).get(key).cloned()
    }

    pub fn put<E: Entity>(&self, record: E) -> Result<(), StoreError> {
        self.transact(|txn| txn.put(record))
    }

    /// Every record of type `E` accepted by `filter`, ordered by key.
    pub fn list<E: Entity>(&self, filter: impl Fn(&E) -> bool) -> Vec<E> {
        E::table(&self.inner.lock().tables)
            .values()
            .filter(|r| filter(r))
            .cloned()
            .collect()
    }

    pub fn user_by_name(&self, username: &str) -> Option<User> {
        self.inner
            .lock()
            .tables
            .users
            .values()
            .find(|u| u.username == username)
            .cloned()
    }

    pub fn cached_fragment(
        &self,
        source_hash: SourceHash,
        renderer_version: u32,
    ) -> Option<CacheEntry> {
        self.get::<CacheEntry>(&CacheKey {
            source_hash,
            renderer_version,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.inner.lock().tables.is_empty()
    }
}

impl Log {
    fn append(&mut self, writes: &[Record]) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(writes)?;
        line.push(b'\n');
        let result = self
            .file
            .write_all(&line)
            .and_then(|()| self.file.sync_data());
        match result {
            Ok(()) => {
                self.len += line.len() as u64;
                Ok(())
            }
            Err(e) => {
                // Best effort: drop the partial batch so the next append does
                // not land after garbage. Replay discards a torn tail anyway.
                let _ = self.file.set_len(self.len);
                Err(e.into())
            }
        }
    }
}

fn replay(path: &Path, text: &[u8]) -> Result<Tables, StoreError> {
    let mut tables = Tables::default();
    if text.is_empty() {
        return Ok(tables);
    }
    let mut lines = text.split_inclusive(|b| *b == b'\n').enumerate().peekable();
    let (_, header) = lines.next().expect("non-empty");
    match serde_json::from_slice::<Header>(header) {
        Ok(h) if h == Header::current() => {}
        _ => {
            return Err(StoreError::FormatMismatch {
                path: path.to_path_buf(),
                found: String::from_utf8_lossy(header.trim_ascii())
                    .chars()
                    .take(80)
                    .collect(),
            })
        }
    }
    while let Some((index, line)) = lines.next() {
        let is_last = lines.peek().is_none();
        let complete = line.ends_with(b"\n");
        match serde_json::from_slice::<Vec<Record>>(line) {
            Ok(batch) if complete => batch.into_iter().for_each(|r| tables.apply(r)),
            _ if is_last => break,
            Ok(_) => unreachable!("only the last line can lack a newline"),
            Err(e) => {
                return Err(StoreError::Corrupt {
                    path: path.to_path_buf(),
                    line: index + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(tables)
}

/// Rewrites the log as header plus one batch and returns its length.
fn compact(dir: &Path, tables: &Tables) -> Result<u64, StoreError> {
    let mut out = serde_json::to_vec(&Header::current())?;
    out.push(b'\n');
    if !tables.is_empty() {
        let records: Vec<Record> = tables.records().collect();
        serde_json::to_writer(&mut out, &records)?;
        out.push(b'\n');
    }
    let tmp = dir.join(format!("{LOG_FILE}.tmp"));
    let mut file = File::create(&tmp)?;
    file.write_all(&out)?;
    file.sync_all()?;
    drop(file);
    fs::rename(&tmp, dir.join(LOG_FILE))?;
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
    Ok(out.len() as u64)
}

/// A transaction in progress: reads see committed data plus this
/// transaction's own puts.
pub struct Txn<'a> {
    base: &'a Tables,
    staged: Tables,
    writes: Vec<Record>,
}

impl Txn<'_> {
    pub fn get<E: Entity>(&self, key: &E::Key) -> Option<E> {
        E::table(&self.staged)
            .get(key)
            .or_else(|| E::table(self.base).get(key))
            .cloned()
    }

    /// Stages `record`, replacing any record with the same key.
    pub fn put<E: Entity>(&mut self, record: E) -> Result<(), StoreError> {
        let record = record.into_record();
        if let Record::Users(user) = &record {
            let taken = self
                .list::<User>(|u| u.username == user.username && u.id != user.id)
                .into_iter()
                .next();
            if taken.is_some() {
                return Err(StoreError::DuplicateUsername(user.username.clone()));
            }
        }
        self.staged.apply(record.clone());
        self.writes.push(record);
        Ok(())
    }

    pub fn list<E: Entity>(&self, filter: impl Fn(&E) -> bool) -> Vec<E> {
        let staged = E::table(&self.staged);
        let base = E::table(self.base);
        let mut merged: Vec<&E> = Vec::with_capacity(base.len() + staged.len());
        let mut s = staged.iter().peekable();
        for (key, value) in base {
            while let Some((_, sv)) = s.next_if(|(sk, _)| *sk < key) {
                merged.push(sv);
            }
            match s.next_if(|(sk, _)| *sk == key) {
                Some((_, sv)) => merged.push(sv),
                None => merged.push(value),
            }
        }
        merged.extend(s.map(|(_, v)| v));
        merged.into_iter().filter(|r| filter(r)).cloned().collect()
    }

    pub fn user_by_name(&self, username: &str) -> Option<User> {
        self.list::<User>(|u| u.username == username)
            .into_iter()
            .next()
    }
}
