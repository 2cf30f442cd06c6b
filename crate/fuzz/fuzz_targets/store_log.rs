#![no_main]

use cbt_core::store::{Store, User, LOG_FILE};
use libfuzzer_sys::fuzz_target;

// Replaying an arbitrary log either fails cleanly or yields a store that
// reopens to the same state after compaction.
fuzz_target!(|data: &[u8]| {
    let dir = tempfile::tempdir().expect("tempdir");
    std::fs::write(dir.path().join(LOG_FILE), data).expect("write log");
    let Ok(store) = Store::open(dir.path()) else {
        return;
    };
    let users = store.list::<User>(|_| true);
    let empty = store.is_empty();
    drop(store);
    let reopened = Store::open(dir.path()).expect("compacted log reopens");
    assert_eq!(reopened.list::<User>(|_| true), users);
    assert_eq!(reopened.is_empty(), empty);
});
