use std::fs::{self, File, OpenOptions};
use std::path::Path;

use fs2::FileExt;

use crate::{Error, Result};

const LOCK_FILE: &str = ".lock";

/// Exclusive advisory lock on an output directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    file: File,
}

impl DirLock {
    /// Creates `dir` if needed and locks it; fails at once if another process
    /// holds the lock.
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        file.try_lock_exclusive().map_err(|_| {
            Error::Config(format!("{} is in use by another process", dir.display()))
        })?;
        Ok(Self { file })
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = FileExt::unlock(&self.file);
    }
}
