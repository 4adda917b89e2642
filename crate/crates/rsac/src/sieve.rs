//! Prime tables: a bit-packed sieve of Eratosthenes with cumulative counts.
//!
//! [`PrimeTables`] answers `pi(y)` and `pi(y; d, a)` queries for any `y` up
//! to the sieve limit. The bitmap costs one bit per integer; on top of it,
//! every block of [`BLOCK_INTS`] integers stores a base count per registered
//! residue class, so a query is one table lookup plus a popcount scan of at
//! most one block. Tables are immutable after construction and safe to share
//! across threads.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Integers per counting block (build-time constant).
pub const BLOCK_INTS: u64 = 2048;
const BLOCK_WORDS: usize = (BLOCK_INTS / 64) as usize;

/// Default segment length for the sieving pass, in integers.
pub const DEFAULT_SEGMENT: u64 = 1 << 20;

/// Default memory budget for a table build (2 GiB).
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Magic bytes of the binary cache format.
pub const CACHE_MAGIC: &[u8; 4] = b"RSAC";
/// Version of the binary cache format.
pub const CACHE_VERSION: u32 = 1;

/// Immutable prime tables up to a fixed limit.
///
/// Holds the ordered primes, cumulative prime counts, and cumulative counts
/// per residue class for every modulus registered at build time.
#[derive(Debug, Clone)]
pub struct PrimeTables {
    limit: u64,
    /// Bit `i` of `words[i / 64]` is set iff `i` is prime.
    words: Vec<u64>,
    /// `block_pi[b]` = number of primes below `b * BLOCK_INTS`.
    block_pi: Vec<u64>,
    primes: Vec<u64>,
    /// Per modulus `d`: base counts laid out `[block * d + class]`.
    classes: BTreeMap<u64, Vec<u64>>,
}

/// Configurable builder for [`PrimeTables`].
#[derive(Debug, Clone)]
pub struct TablesBuilder {
    limit: u64,
    moduli: Vec<u64>,
    segment: u64,
    memory_budget: u64,
    threads: usize,
}

/// Build tables with default segment size and memory budget.
pub fn build_tables(limit: u64, moduli: &[u64]) -> Result<PrimeTables> {
    TablesBuilder::new(limit).moduli(moduli).build()
}

impl TablesBuilder {
    pub fn new(limit: u64) -> Self {
        TablesBuilder {
            limit,
            moduli: Vec::new(),
            segment: DEFAULT_SEGMENT,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    /// Register moduli for per-class counting. Duplicates and `d = 1` are
    /// dropped (`d = 1` is always available).
    pub fn moduli(mut self, moduli: &[u64]) -> Self {
        for &d in moduli {
            if d > 1 && !self.moduli.contains(&d) {
                self.moduli.push(d);
            }
        }
        self.moduli.sort_unstable();
        self
    }

    /// Segment length in integers for the sieving pass.
    pub fn segment(mut self, segment: u64) -> Self {
        self.segment = segment.max(BLOCK_INTS);
        self
    }

    /// Abort the build with a capacity error if the estimated allocation
    /// exceeds `bytes`.
    pub fn memory_budget(mut self, bytes: u64) -> Self {
        self.memory_budget = bytes;
        self
    }

    /// Worker threads for the sieving pass.
    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn build(self) -> Result<PrimeTables> {
        if self.limit < 1 {
            return Err(Error::InvalidParam("sieve limit must be >= 1".into()));
        }
        if self.moduli.contains(&0) {
            return Err(Error::InvalidParam("modulus must be >= 1".into()));
        }
        self.check_budget()?;

        let limit = self.limit;
        let nwords = (limit / 64 + 1) as usize;
        let mut words = vec![u64::MAX; nwords];
        // 0 and 1 are not prime; bits above the limit must stay clear.
        words[0] &= !0b11;
        let tail = limit % 64;
        if tail < 63 {
            words[nwords - 1] &= (1u64 << (tail + 1)) - 1;
        }

        let base = base_primes(isqrt(limit));
        sieve_bitmap(&mut words, limit, &base, self.segment, self.threads);
        Ok(scan_bitmap(limit, words, &self.moduli))
    }

    fn check_budget(&self) -> Result<()> {
        let limit = self.limit;
        let bitmap = limit / 8 + 8;
        // pi(x) < 1.26 x / ln x for x >= 17
        let nprimes = if limit < 17 {
            8
        } else {
            (1.26 * limit as f64 / (limit as f64).ln()) as u64 + 1
        };
        let nblocks = limit / BLOCK_INTS + 2;
        let class_slots: u64 = self.moduli.iter().sum::<u64>() + 1;
        let estimate = bitmap + nprimes * 8 + nblocks * 8 * class_slots;
        if estimate > self.memory_budget {
            return Err(Error::Capacity(format!(
                "building tables to limit {limit} needs ~{estimate} bytes, \
                 budget is {} bytes",
                self.memory_budget
            )));
        }
        Ok(())
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r.checked_mul(r).is_none_or(|s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// Simple sieve for the base primes up to `bound`.
fn base_primes(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut is_prime = vec![true; n + 1];
    is_prime[0] = false;
    if n >= 1 {
        is_prime[1] = false;
    }
    let mut p = 2;
    while p * p <= n {
        if is_prime[p] {
            let mut m = p * p;
            while m <= n {
                is_prime[m] = false;
                m += p;
            }
        }
        p += 1;
    }
    (2..=n).filter(|&i| is_prime[i]).map(|i| i as u64).collect()
}

/// Clear composite bits segment by segment. Segments are word-aligned and
/// disjoint, so workers can own them without synchronisation.
fn sieve_bitmap(words: &mut [u64], limit: u64, base: &[u64], segment: u64, threads: usize) {
    let seg_words = segment.div_ceil(64) as usize;
    let nchunks = words.len().div_ceil(seg_words);
    let workers = threads.min(nchunks).max(1);

    if workers == 1 {
        for (i, chunk) in words.chunks_mut(seg_words).enumerate() {
            let lo = (i * seg_words) as u64 * 64;
            let hi = (lo + chunk.len() as u64 * 64 - 1).min(limit);
            sieve_segment(chunk, lo, hi, base);
        }
        return;
    }

    let cells: Vec<std::sync::Mutex<Option<&mut [u64]>>> = words
        .chunks_mut(seg_words)
        .map(|c| std::sync::Mutex::new(Some(c)))
        .collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= nchunks {
                    break;
                }
                let chunk = cells[i].lock().unwrap().take().unwrap();
                let lo = (i * seg_words) as u64 * 64;
                let hi = (lo + chunk.len() as u64 * 64 - 1).min(limit);
                sieve_segment(chunk, lo, hi, base);
            });
        }
    });
}

fn sieve_segment(chunk: &mut [u64], lo: u64, hi: u64, base: &[u64]) {
    for &p in base {
        if p * p > hi {
            break;
        }
        let mut m = p * p;
        if m < lo {
            m = lo + (p - lo % p) % p;
        }
        while m <= hi {
            chunk[((m - lo) / 64) as usize] &= !(1u64 << (m % 64));
            m += p;
        }
    }
}

/// One pass over the finished bitmap: collect primes, block prime counts,
/// and per-class block counts for each registered modulus.
fn scan_bitmap(limit: u64, words: Vec<u64>, moduli: &[u64]) -> PrimeTables {
    let nblocks = (limit / BLOCK_INTS) as usize + 1;
    let mut primes = Vec::new();
    let mut block_pi = Vec::with_capacity(nblocks + 1);
    let mut classes: BTreeMap<u64, Vec<u64>> = moduli
        .iter()
        .map(|&d| (d, Vec::with_capacity((nblocks + 1) * d as usize)))
        .collect();
    let mut running: BTreeMap<u64, Vec<u64>> = moduli
        .iter()
        .map(|&d| (d, vec![0u64; d as usize]))
        .collect();

    for b in 0..=nblocks {
        block_pi.push(primes.len() as u64);
        for (d, counts) in &mut classes {
            counts.extend_from_slice(&running[d]);
        }
        if b == nblocks {
            break;
        }
        let wlo = b * BLOCK_WORDS;
        let whi = (wlo + BLOCK_WORDS).min(words.len());
        for (wi, &word) in words.iter().enumerate().take(whi).skip(wlo) {
            let mut w = word;
            while w != 0 {
                let p = wi as u64 * 64 + w.trailing_zeros() as u64;
                primes.push(p);
                for (&d, acc) in &mut running {
                    acc[(p % d) as usize] += 1;
                }
                w &= w - 1;
            }
        }
    }

    PrimeTables {
        limit,
        words,
        block_pi,
        primes,
        classes,
    }
}

impl PrimeTables {
    /// The sieve bound; queries accept `0 <= y <= limit`.
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// All primes `<= limit` in ascending order.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Moduli registered at build time (`d = 1` is implicit).
    pub fn moduli(&self) -> Vec<u64> {
        self.classes.keys().copied().collect()
    }

    /// Whether `n` is prime, for `n <= limit`.
    pub fn is_prime(&self, n: u64) -> Result<bool> {
        if n > self.limit {
            return Err(Error::OutOfRange {
                value: n,
                limit: self.limit,
            });
        }
        Ok(self.words[(n / 64) as usize] >> (n % 64) & 1 == 1)
    }

    /// `pi(y)`: the number of primes `<= y`.
    pub fn prime_count(&self, y: u64) -> Result<u64> {
        if y > self.limit {
            return Err(Error::OutOfRange {
                value: y,
                limit: self.limit,
            });
        }
        let b = (y / BLOCK_INTS) as usize;
        let mut count = self.block_pi[b];
        let wlo = b * BLOCK_WORDS;
        let wy = (y / 64) as usize;
        for wi in wlo..wy {
            count += self.words[wi].count_ones() as u64;
        }
        let keep = y % 64;
        let mask = if keep == 63 {
            u64::MAX
        } else {
            (1u64 << (keep + 1)) - 1
        };
        count += (self.words[wy] & mask).count_ones() as u64;
        Ok(count)
    }

    /// `pi(y; d, a)`: the number of primes `p <= y` with `p = a (mod d)`.
    ///
    /// `d` must have been registered at build time (`d = 1` always is, and
    /// counts all primes). Non-primitive classes are allowed and return the
    /// finitely many primes dividing `gcd(a, d)`-related classes.
    pub fn prime_count_ap(&self, y: u64, d: u64, a: u64) -> Result<u64> {
        if d == 0 {
            return Err(Error::InvalidParam("modulus must be >= 1".into()));
        }
        if a >= d {
            return Err(Error::InvalidParam(format!("class {a} not in 0..{d}")));
        }
        if d == 1 {
            return self.prime_count(y);
        }
        let counts = self.classes.get(&d).ok_or(Error::UnregisteredModulus(d))?;
        if y > self.limit {
            return Err(Error::OutOfRange {
                value: y,
                limit: self.limit,
            });
        }
        let b = (y / BLOCK_INTS) as usize;
        let mut count = counts[b * d as usize + a as usize];
        let wlo = b * BLOCK_WORDS;
        let wy = (y / 64) as usize;
        for wi in wlo..=wy {
            let mut w = self.words[wi];
            if wi == wy {
                let keep = y % 64;
                if keep < 63 {
                    w &= (1u64 << (keep + 1)) - 1;
                }
            }
            while w != 0 {
                let p = wi as u64 * 64 + w.trailing_zeros() as u64;
                if p % d == a {
                    count += 1;
                }
                w &= w - 1;
            }
        }
        Ok(count)
    }

    /// Write the tables to a binary cache file.
    ///
    /// Layout: magic `RSAC`, version, limit, moduli list, block size, then
    /// the prime bitmap and all cumulative count arrays as little-endian
    /// 64-bit words, closed by an FNV-1a checksum of everything before it.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut f = HashWriter::new(std::io::BufWriter::new(std::fs::File::create(path)?));
        f.write_all(CACHE_MAGIC)?;
        f.write_all(&CACHE_VERSION.to_le_bytes())?;
        f.write_all(&self.limit.to_le_bytes())?;
        f.write_all(&(self.classes.len() as u32).to_le_bytes())?;
        for &d in self.classes.keys() {
            f.write_all(&d.to_le_bytes())?;
        }
        f.write_all(&BLOCK_INTS.to_le_bytes())?;
        f.write_all(&(self.words.len() as u64).to_le_bytes())?;
        for &w in &self.words {
            f.write_all(&w.to_le_bytes())?;
        }
        f.write_all(&(self.block_pi.len() as u64).to_le_bytes())?;
        for &c in &self.block_pi {
            f.write_all(&c.to_le_bytes())?;
        }
        for counts in self.classes.values() {
            for &c in counts {
                f.write_all(&c.to_le_bytes())?;
            }
        }
        let digest = f.digest();
        f.write_all(&digest.to_le_bytes())?;
        Ok(())
    }

    /// Load tables from a cache file written by [`PrimeTables::save_cache`].
    ///
    /// The checksum is verified, then the partition property (class counts
    /// summing to `pi`) is re-checked on a sample grid before the tables
    /// are handed out.
    pub fn load_cache(path: &Path) -> Result<PrimeTables> {
        let bytes = std::fs::read(path)?;
        if bytes.len() < 8 {
            return Err(Error::Cache("file too short".into()));
        }
        let (payload, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().expect("8-byte tail"));
        if fnv1a(payload) != stored {
            return Err(Error::Cache("checksum mismatch".into()));
        }
        let mut f = std::io::Cursor::new(payload);
        let mut magic = [0u8; 4];
        f.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        if read_u32(&mut f)? != CACHE_VERSION {
            return Err(Error::Cache("unsupported version".into()));
        }
        let limit = read_u64(&mut f)?;
        let nmod = read_u32(&mut f)? as usize;
        let mut moduli = Vec::with_capacity(nmod);
        for _ in 0..nmod {
            moduli.push(read_u64(&mut f)?);
        }
        if read_u64(&mut f)? != BLOCK_INTS {
            return Err(Error::Cache("block size mismatch".into()));
        }
        let nwords = read_u64(&mut f)? as usize;
        if nwords != (limit / 64 + 1) as usize {
            return Err(Error::Cache("bitmap length inconsistent with limit".into()));
        }
        let mut words = vec![0u64; nwords];
        for w in &mut words {
            *w = read_u64(&mut f)?;
        }
        let npi = read_u64(&mut f)? as usize;
        let nblocks = (limit / BLOCK_INTS) as usize + 1;
        if npi != nblocks + 1 {
            return Err(Error::Cache("count array length inconsistent".into()));
        }
        let mut block_pi = vec![0u64; npi];
        for c in &mut block_pi {
            *c = read_u64(&mut f)?;
        }
        let mut classes = BTreeMap::new();
        for &d in &moduli {
            let len = (nblocks + 1) * d as usize;
            let mut counts = vec![0u64; len];
            for c in &mut counts {
                *c = read_u64(&mut f)?;
            }
            classes.insert(d, counts);
        }

        // Rebuild the prime list from the bitmap.
        let mut primes = Vec::new();
        for (wi, &w) in words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                primes.push(wi as u64 * 64 + w.trailing_zeros() as u64);
                w &= w - 1;
            }
        }

        let tables = PrimeTables {
            limit,
            words,
            block_pi,
            primes,
            classes,
        };
        tables.validate_partition()?;
        Ok(tables)
    }

    /// Check that per-class counts partition `pi` on a sample grid.
    fn validate_partition(&self) -> Result<()> {
        if self.prime_count(self.limit)? != self.primes.len() as u64 {
            return Err(Error::Cache("pi(limit) disagrees with prime list".into()));
        }
        let samples = [
            0,
            self.limit,
            self.limit / 2,
            self.limit / 3,
            self.limit / 7,
        ];
        for &d in self.classes.keys() {
            for &y in &samples {
                let mut total = 0u64;
                for a in 0..d {
                    total += self.prime_count_ap(y, d, a)?;
                }
                if total != self.prime_count(y)? {
                    return Err(Error::Cache(format!(
                        "class counts for modulus {d} do not partition pi({y})"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Writer adapter that tracks an FNV-1a digest of everything written.
struct HashWriter<W: Write> {
    inner: W,
    state: u64,
}

impl<W: Write> HashWriter<W> {
    fn new(inner: W) -> Self {
        HashWriter {
            inner,
            state: 0xcbf2_9ce4_8422_2325,
        }
    }

    fn digest(&self) -> u64 {
        self.state
    }
}

impl<W: Write> Write for HashWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        for &b in &buf[..n] {
            self.state ^= b as u64;
            self.state = self.state.wrapping_mul(0x0000_0100_0000_01b3);
        }
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}
