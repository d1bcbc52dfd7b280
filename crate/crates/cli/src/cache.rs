//! Content-addressed on-disk cache of solver results.
//!
//! An entry is `MAGIC | sha256(payload) | payload`, stored under the hex
//! digest of its key and published by atomic rename, so concurrent readers
//! see either nothing or a complete entry. Entries whose checksum fails are
//! treated as misses (and removed) with a warning.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use backscatter::born::SampleCache;
use backscatter::Result;
use num_complex::Complex64;
use sha2::{Digest, Sha256};

const MAGIC: &[u8; 8] = b"BSCACHE1";

/// What a computation depended on.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheKey {
    pub kind: &'static str,
    pub potential_hash: String,
    pub k: f64,
    pub theta: f64,
    pub n: usize,
    pub half_width: f64,
    pub tol: f64,
}

impl CacheKey {
    pub fn digest(&self) -> String {
        let text = format!(
            "{}|{}|{:016x}|{:016x}|{}|{:016x}|{:016x}",
            self.kind,
            self.potential_hash,
            self.k.to_bits(),
            self.theta.to_bits(),
            self.n,
            self.half_width.to_bits(),
            self.tol.to_bits()
        );
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug)]
pub struct Cache {
    root: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

impl Cache {
    pub fn open(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Cache { root: root.to_path_buf(), hits: AtomicUsize::new(0), misses: AtomicUsize::new(0) })
    }

    fn path(&self, digest: &str) -> PathBuf {
        self.root.join(&digest[..2]).join(digest)
    }

    pub fn get(&self, key: &CacheKey) -> Option<Vec<u8>> {
        let path = self.path(&key.digest());
        let out = match fs::read(&path) {
            Ok(bytes) => match decode(&bytes) {
                Some(payload) => Some(payload.to_vec()),
                None => {
                    log::warn!("corrupted cache entry {}; recomputing", path.display());
                    let _ = fs::remove_file(&path);
                    None
                }
            },
            Err(_) => None,
        };
        let counter = if out.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        out
    }

    pub fn put(&self, key: &CacheKey, payload: &[u8]) -> Result<()> {
        let path = self.path(&key.digest());
        let dir = path.parent().expect("entry has a parent");
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(MAGIC)?;
        f.write_all(&Sha256::digest(payload))?;
        f.write_all(payload)?;
        f.sync_all()?;
        drop(f);
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    fn entries(&self) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        if !self.root.exists() {
            return Ok(out);
        }
        for shard in fs::read_dir(&self.root)? {
            let shard = shard?.path();
            if shard.is_dir() {
                for e in fs::read_dir(&shard)? {
                    let p = e?.path();
                    if p.file_name().and_then(|n| n.to_str()).is_some_and(|n| !n.starts_with(".tmp-")) {
                        out.push(p);
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// (entry count, total bytes).
    pub fn stats(&self) -> Result<(usize, u64)> {
        let entries = self.entries()?;
        let bytes = entries.iter().map(|p| fs::metadata(p).map(|m| m.len()).unwrap_or(0)).sum();
        Ok((entries.len(), bytes))
    }

    /// Remove entries whose checksum fails; returns (checked, removed).
    pub fn verify(&self) -> Result<(usize, usize)> {
        let entries = self.entries()?;
        let mut removed = 0;
        for p in &entries {
            if decode(&fs::read(p)?).is_none() {
                fs::remove_file(p)?;
                removed += 1;
            }
        }
        Ok((entries.len(), removed))
    }

    pub fn clear(&self) -> Result<usize> {
        let entries = self.entries()?;
        for p in &entries {
            fs::remove_file(p)?;
        }
        Ok(entries.len())
    }
}

fn decode(bytes: &[u8]) -> Option<&[u8]> {
    if bytes.len() < 40 || &bytes[..8] != MAGIC {
        return None;
    }
    let payload = &bytes[40..];
    (Sha256::digest(payload).as_slice() == &bytes[8..40]).then_some(payload)
}

/// Backscattering amplitudes of one solver configuration.
pub struct AmplitudeCache<'a> {
    pub cache: &'a Cache,
    pub potential_hash: String,
    pub n: usize,
    pub half_width: f64,
    pub tol: f64,
}

impl AmplitudeCache<'_> {
    fn key(&self, k: f64, angle: f64) -> CacheKey {
        CacheKey {
            kind: "backscatter",
            potential_hash: self.potential_hash.clone(),
            k,
            theta: angle,
            n: self.n,
            half_width: self.half_width,
            tol: self.tol,
        }
    }
}

impl SampleCache for AmplitudeCache<'_> {
    fn get(&self, k: f64, angle: f64) -> Option<(Complex64, f64)> {
        let b = self.cache.get(&self.key(k, angle))?;
        if b.len() != 24 {
            log::warn!("malformed amplitude entry at k = {k}; recomputing");
            return None;
        }
        let f = |i: usize| f64::from_le_bytes(b[8 * i..8 * i + 8].try_into().expect("8 bytes"));
        Some((Complex64::new(f(0), f(1)), f(2)))
    }

    fn put(&self, k: f64, angle: f64, amplitude: Complex64, residual: f64) {
        let mut b = Vec::with_capacity(24);
        for v in [amplitude.re, amplitude.im, residual] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        if let Err(e) = self.cache.put(&self.key(k, angle), &b) {
            log::warn!("cache write failed: {e}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(tol: f64) -> CacheKey {
        CacheKey { kind: "field", potential_hash: "abc".into(), k: 4.0, theta: 0.25, n: 64, half_width: 4.0, tol }
    }

    #[test]
    fn miss_put_get_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path()).unwrap();
        assert!(c.get(&key(1e-10)).is_none());
        let payload: Vec<u8> = (0..=255).collect();
        c.put(&key(1e-10), &payload).unwrap();
        assert_eq!(c.get(&key(1e-10)).unwrap(), payload);
        assert!(c.get(&key(1e-11)).is_none(), "changed tol must miss");
        assert_eq!((c.hits(), c.misses()), (1, 2));
        assert_eq!(c.stats().unwrap().0, 1);
    }

    #[test]
    fn corrupted_entries_are_misses() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path()).unwrap();
        c.put(&key(1e-10), b"payload").unwrap();
        let p = c.path(&key(1e-10).digest());
        let mut bytes = fs::read(&p).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        fs::write(&p, &bytes).unwrap();
        assert!(c.get(&key(1e-10)).is_none());
        assert!(!p.exists());
        c.put(&key(1e-10), b"payload").unwrap();
        fs::write(c.path(&key(1e-10).digest()), b"short").unwrap();
        assert_eq!(c.verify().unwrap(), (1, 1));
    }

    #[test]
    fn concurrent_readers_never_see_torn_entries() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path()).unwrap();
        let payload = vec![7u8; 1 << 20];
        std::thread::scope(|s| {
            s.spawn(|| {
                for _ in 0..5 {
                    c.put(&key(1e-10), &payload).unwrap();
                }
            });
            for _ in 0..3 {
                s.spawn(|| {
                    for _ in 0..200 {
                        if let Some(b) = c.get(&key(1e-10)) {
                            assert_eq!(b.len(), payload.len());
                        }
                    }
                });
            }
        });
        // readers never triggered a corruption removal
        assert_eq!(c.get(&key(1e-10)).unwrap(), payload);
    }

    #[test]
    fn amplitude_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path()).unwrap();
        let a = AmplitudeCache { cache: &c, potential_hash: "h".into(), n: 64, half_width: 4.0, tol: 1e-10 };
        assert!(a.get(2.0, 0.5).is_none());
        let v = Complex64::new(0.1 + 1e-17, -3.3);
        a.put(2.0, 0.5, v, 1e-12);
        assert_eq!(a.get(2.0, 0.5), Some((v, 1e-12)));
    }
}
