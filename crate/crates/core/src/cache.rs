//! Append-only JSONL store of Jacobi sums.
//!
//! One object per line, coefficients on the power basis as exact decimal
//! strings:
//!
//! ```text
//! {"l":3,"p":7,"f":1,"k1":1,"k2":1,"c":["1","3"]}
//! ```
//!
//! A later line for the same key overrides an earlier one. Lines that fail
//! to parse are skipped with a warning and the affected primes recomputed.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycInt;
use crate::error::Result;
use crate::jacobi::{JacobiPrime, JacobiRecord};

#[derive(Debug, Serialize, Deserialize)]
struct CacheLine {
    l: u32,
    p: u64,
    f: u32,
    k1: u32,
    k2: u32,
    c: Vec<String>,
}

type Key = (u32, u64, u32, u32, u32);

#[derive(Debug, Default)]
pub struct JacobiCache {
    path: Option<PathBuf>,
    entries: HashMap<Key, CycInt>,
    writer: Option<BufWriter<File>>,
    skipped: usize,
}

impl JacobiCache {
    /// A cache that never touches disk.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path` (if it exists) and appends new records to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut cache = JacobiCache::in_memory();
        cache.path = Some(path.clone());
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (lineno, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match parse_line(&line) {
                    Some((key, value)) => {
                        cache.entries.insert(key, value);
                    }
                    None => {
                        log::warn!("{}:{}: skipping corrupt cache line", path.display(), lineno + 1);
                        cache.skipped += 1;
                    }
                }
            }
        }
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Corrupt lines ignored while loading.
    pub fn skipped_lines(&self) -> usize {
        self.skipped
    }

    pub fn get(&self, ell: u32, p: u64, f: u32, k1: u32, k2: u32) -> Option<&CycInt> {
        self.entries.get(&(ell, p, f, k1, k2))
    }

    pub fn put(&mut self, record: &JacobiRecord) -> Result<()> {
        let key = (record.ell, record.p, record.f, record.k1, record.k2);
        if self.entries.get(&key) == Some(&record.value) {
            return Ok(());
        }
        if let Some(path) = &self.path {
            if self.writer.is_none() {
                let file = OpenOptions::new().create(true).append(true).open(path)?;
                self.writer = Some(BufWriter::new(file));
            }
            let line = CacheLine {
                l: record.ell,
                p: record.p,
                f: record.f,
                k1: record.k1,
                k2: record.k2,
                c: record.value.to_decimal_strings(),
            };
            let w = self.writer.as_mut().expect("writer opened above");
            serde_json::to_writer(&mut *w, &line)?;
            w.write_all(b"\n")?;
        }
        self.entries.insert(key, record.value.clone());
        Ok(())
    }

    /// The orbit representatives at `p`, if all are cached.
    pub fn get_prime(&self, ell: u32, p: u64, f: u32) -> Option<JacobiPrime> {
        let reps = (1..ell - 1)
            .map(|k| self.get(ell, p, f, k, 1).cloned())
            .collect::<Option<Vec<_>>>()?;
        JacobiPrime::from_reps(ell, p, reps).ok().filter(|d| d.f == f)
    }

    pub fn put_prime(&mut self, data: &JacobiPrime) -> Result<()> {
        for record in data.records() {
            self.put(&record)?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        if let Some(w) = self.writer.as_mut() {
            w.flush()?;
        }
        Ok(())
    }
}

impl Drop for JacobiCache {
    fn drop(&mut self) {
        if let Err(e) = self.flush() {
            log::warn!("failed to flush Jacobi cache: {e}");
        }
    }
}

fn parse_line(line: &str) -> Option<(Key, CycInt)> {
    let parsed: CacheLine = serde_json::from_str(line).ok()?;
    if parsed.l < 3 {
        return None;
    }
    let value = CycInt::from_decimal_strings(parsed.l, &parsed.c).ok()?;
    Some(((parsed.l, parsed.p, parsed.f, parsed.k1, parsed.k2), value))
}
