//! Content-addressed store of product tables keyed by `(q, c, ħ, N)`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use qgeom::hyperboloid::ProductTable;
use qgeom::{Field, Scalar};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "QGEOM_CACHE_DIR";
const QUARANTINE: &str = "quarantine";

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CacheError + '_ {
    move |source| CacheError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableKey {
    pub q: String,
    pub c: String,
    pub hbar: String,
    pub degree: usize,
}

impl TableKey {
    pub fn new(q: &str, c: &BigRational, hbar: &BigRational, degree: usize) -> Self {
        TableKey {
            q: q.to_string(),
            c: c.to_string(),
            hbar: hbar.to_string(),
            degree,
        }
    }

    pub fn hash(&self) -> String {
        let s = format!("q={};c={};hbar={};N={}", self.q, self.c, self.hbar, self.degree);
        hex::encode(Sha256::digest(s.as_bytes()))
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: TableKey,
    digest: String,
    table: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryInfo {
    pub file: String,
    pub key: Option<TableKey>,
    pub bytes: u64,
    pub status: EntryStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Ok,
    Unchecked,
    Quarantined,
}

/// `--cache-dir`, else `$QGEOM_CACHE_DIR`, else the user cache directory.
pub fn resolve_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(p);
    }
    if let Some(p) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(p).join("qgeom");
    }
    if let Some(p) = std::env::var_os("HOME") {
        return PathBuf::from(p).join(".cache").join("qgeom");
    }
    PathBuf::from(".qgeom-cache")
}

/// Writes via a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CacheError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err(&dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CacheError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn open(dir: PathBuf) -> Result<Self, CacheError> {
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(TableCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, key: &TableKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.hash()))
    }

    /// A valid cached table, or `None`. Entries that fail validation are
    /// quarantined.
    pub fn load<F: Field>(&self, key: &TableKey) -> Result<Option<ProductTable<F>>, CacheError> {
        let path = self.path_of(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io_err(&path)(e)),
        };
        match decode::<F>(&text) {
            Some((k, table)) if &k == key => Ok(Some(table)),
            _ => {
                self.quarantine(&path)?;
                Ok(None)
            }
        }
    }

    pub fn store<F: Field>(&self, key: &TableKey, table: &ProductTable<F>) -> Result<(), CacheError> {
        let entry = Entry {
            key: key.clone(),
            digest: table.digest(),
            table: table.to_json(),
        };
        let bytes = serde_json::to_vec(&entry).expect("cache entry serializes");
        write_atomic(&self.path_of(key), &bytes)
    }

    fn entries(&self) -> Result<Vec<PathBuf>, CacheError> {
        let mut out = Vec::new();
        for e in fs::read_dir(&self.dir).map_err(io_err(&self.dir))? {
            let p = e.map_err(io_err(&self.dir))?.path();
            if p.is_file() && p.extension().is_some_and(|x| x == "json") {
                out.push(p);
            }
        }
        out.sort();
        Ok(out)
    }

    fn info(&self, path: &Path, status: EntryStatus, key: Option<TableKey>) -> Result<EntryInfo, CacheError> {
        let bytes = fs::metadata(path).map_err(io_err(path))?.len();
        Ok(EntryInfo {
            file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            key,
            bytes,
            status,
        })
    }

    /// Keys as recorded in the entries, without validation.
    pub fn list(&self) -> Result<Vec<EntryInfo>, CacheError> {
        self.entries()?
            .iter()
            .map(|p| {
                let key = fs::read_to_string(p)
                    .ok()
                    .and_then(|t| serde_json::from_str::<Entry>(&t).ok())
                    .map(|e| e.key);
                self.info(p, EntryStatus::Unchecked, key)
            })
            .collect()
    }

    /// Number of entries removed. Quarantined files are kept.
    pub fn clear(&self) -> Result<usize, CacheError> {
        let entries = self.entries()?;
        for p in &entries {
            fs::remove_file(p).map_err(io_err(p))?;
        }
        Ok(entries.len())
    }

    /// Fully validates every entry; corrupted ones move to `quarantine/`.
    pub fn inspect(&self) -> Result<Vec<EntryInfo>, CacheError> {
        let mut out = Vec::new();
        for p in self.entries()? {
            let text = fs::read_to_string(&p).map_err(io_err(&p))?;
            let key = validate(&text, &p);
            match key {
                Some(k) => out.push(self.info(&p, EntryStatus::Ok, Some(k))?),
                None => {
                    let info = self.info(&p, EntryStatus::Quarantined, None)?;
                    self.quarantine(&p)?;
                    out.push(info);
                }
            }
        }
        Ok(out)
    }

    fn quarantine(&self, path: &Path) -> Result<(), CacheError> {
        let qdir = self.dir.join(QUARANTINE);
        fs::create_dir_all(&qdir).map_err(io_err(&qdir))?;
        let dest = qdir.join(path.file_name().unwrap_or_default());
        fs::rename(path, &dest).map_err(io_err(path))
    }
}

fn decode<F: Field>(text: &str) -> Option<(TableKey, ProductTable<F>)> {
    let entry: Entry = serde_json::from_str(text).ok()?;
    let table = ProductTable::<F>::from_json(&entry.table)?;
    let p = &table.params;
    let consistent = p.c.to_string() == entry.key.c
        && p.hbar.to_string() == entry.key.hbar
        && p.degree == entry.key.degree
        && table.digest() == entry.digest;
    consistent.then_some((entry.key, table))
}

fn validate(text: &str, path: &Path) -> Option<TableKey> {
    let key = serde_json::from_str::<Entry>(text).ok()?.key;
    let key = if key.q == "symbolic" {
        decode::<Scalar>(text)?.0
    } else {
        decode::<BigRational>(text)?.0
    };
    let stem = path.file_stem()?.to_string_lossy();
    (stem == key.hash()).then_some(key)
}
