//! Particle snapshot codecs.
//!
//! ASCII: a header line `# chad-snapshot v1 t=<seconds> n=<count>` followed by
//! rows `id,x,y,z,vx,vy,vz,rho`, floats with 17 significant digits.
//!
//! Binary, little-endian, no padding: magic `CHADPRT1`, u32 version (1),
//! f64 time in seconds, u64 count, then per particle u64 id and seven f64
//! (x, y, z, vx, vy, vz, rho).

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

pub const BINARY_MAGIC: &[u8; 8] = b"CHADPRT1";
pub const BINARY_VERSION: u32 = 1;
pub const ASCII_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 8;
const RECORD_LEN: usize = 8 + 7 * 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub id: u64,
    /// m.
    pub position: [f64; 3],
    /// m/s.
    pub velocity: [f64; 3],
    /// kg/m³. Stored, not used by the kinetics.
    pub density: f64,
}

impl Particle {
    fn floats(&self) -> [f64; 7] {
        let [x, y, z] = self.position;
        let [vx, vy, vz] = self.velocity;
        [x, y, z, vx, vy, vz, self.density]
    }

    fn from_floats(id: u64, f: [f64; 7]) -> Self {
        Self {
            id,
            position: [f[0], f[1], f[2]],
            velocity: [f[3], f[4], f[5]],
            density: f[6],
        }
    }
}

/// Ids unique, at least one particle, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSnapshot {
    /// s.
    pub time: f64,
    pub particles: Vec<Particle>,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("snapshot contains no particles")]
    Empty,
    #[error("duplicate particle id {id}{}", line_suffix(*.line))]
    DuplicateId { id: u64, line: Option<usize> },
    #[error("non-finite {field} for particle {id}{}", line_suffix(*.line))]
    NonFinite {
        id: u64,
        field: &'static str,
        line: Option<usize>,
    },
    #[error("not a binary snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("{0} unexpected bytes after the last record")]
    TrailingData(u64),
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

const FIELD_NAMES: [&str; 7] = ["x", "y", "z", "vx", "vy", "vz", "rho"];

impl ParticleSnapshot {
    pub fn new(time: f64, particles: Vec<Particle>) -> Result<Self, SnapshotError> {
        let s = Self { time, particles };
        s.validate(None)?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// `lines[k]` is the source line of particle `k`, when known.
    fn validate(&self, lines: Option<&[usize]>) -> Result<(), SnapshotError> {
        if self.particles.is_empty() {
            return Err(SnapshotError::Empty);
        }
        if !self.time.is_finite() {
            return Err(SnapshotError::Parse {
                line: 1,
                msg: format!("non-finite time {}", self.time),
            });
        }
        for (k, p) in self.particles.iter().enumerate() {
            if let Some(i) = p.floats().iter().position(|v| !v.is_finite()) {
                return Err(SnapshotError::NonFinite {
                    id: p.id,
                    field: FIELD_NAMES[i],
                    line: lines.map(|l| l[k]),
                });
            }
        }
        if has_duplicate_ids(&self.particles) {
            // report the first row whose id was already seen
            let mut seen = HashSet::with_capacity(self.particles.len());
            for (k, p) in self.particles.iter().enumerate() {
                if !seen.insert(p.id) {
                    return Err(SnapshotError::DuplicateId {
                        id: p.id,
                        line: lines.map(|l| l[k]),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Dense ids (max below 8 n) use a bitmap; sparse ids fall back to
/// sort-and-scan. Both are much cheaper than hashing a million ids.
fn has_duplicate_ids(particles: &[Particle]) -> bool {
    let max = particles.iter().map(|p| p.id).max().unwrap_or(0);
    if max < 8 * particles.len() as u64 {
        let mut bits = vec![0u64; max as usize / 64 + 1];
        for p in particles {
            let (word, bit) = ((p.id / 64) as usize, 1u64 << (p.id % 64));
            if bits[word] & bit != 0 {
                return true;
            }
            bits[word] |= bit;
        }
        false
    } else {
        let mut ids: Vec<u64> = particles.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        ids.windows(2).any(|w| w[0] == w[1])
    }
}

fn parse_header(line: &str) -> Result<(f64, usize), SnapshotError> {
    let bad = |msg: String| SnapshotError::Parse { line: 1, msg };
    let rest = line
        .strip_prefix("# chad-snapshot ")
        .ok_or_else(|| bad("missing `# chad-snapshot` header".into()))?;
    let mut version = None;
    let mut time = None;
    let mut count = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix('v') {
            version = v.parse::<u32>().ok();
        } else if let Some(v) = tok.strip_prefix("t=") {
            time = Some(v.parse::<f64>().map_err(|e| bad(format!("time: {e}")))?);
        } else if let Some(v) = tok.strip_prefix("n=") {
            count = Some(v.parse::<usize>().map_err(|e| bad(format!("count: {e}")))?);
        }
    }
    match version {
        Some(ASCII_VERSION) => {}
        Some(found) => {
            return Err(SnapshotError::Version {
                found,
                expected: ASCII_VERSION,
            })
        }
        None => return Err(bad("missing version".into())),
    }
    Ok((
        time.ok_or_else(|| bad("missing t=".into()))?,
        count.ok_or_else(|| bad("missing n=".into()))?,
    ))
}

fn parse_row(line: &str, lineno: usize) -> Result<Particle, SnapshotError> {
    let bad = |msg: String| SnapshotError::Parse { line: lineno, msg };
    let mut it = line.split(',');
    let id_tok = it.next().unwrap_or("").trim();
    let id = id_tok
        .parse::<u64>()
        .map_err(|e| bad(format!("id `{id_tok}`: {e}")))?;
    let mut f = [0.0; 7];
    for (k, slot) in f.iter_mut().enumerate() {
        let tok = it
            .next()
            .ok_or_else(|| bad(format!("expected 8 columns, found {}", k + 1)))?
            .trim();
        *slot = tok
            .parse::<f64>()
            .map_err(|e| bad(format!("{} `{tok}`: {e}", FIELD_NAMES[k])))?;
    }
    if it.next().is_some() {
        return Err(bad("more than 8 columns".into()));
    }
    Ok(Particle::from_floats(id, f))
}

pub fn read_snapshot_ascii<R: BufRead>(mut r: R) -> Result<ParticleSnapshot, SnapshotError> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let (time, count) = parse_header(line.trim_end())?;
    let mut particles = Vec::with_capacity(count.min(1 << 24));
    let mut lines = Vec::with_capacity(count.min(1 << 24));
    let mut lineno = 1;
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            break;
        }
        lineno += 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        particles.push(parse_row(t, lineno)?);
        lines.push(lineno);
    }
    if particles.len() != count && !particles.is_empty() {
        return Err(SnapshotError::Parse {
            line: 1,
            msg: format!("header announces {count} particles, found {}", particles.len()),
        });
    }
    let snap = ParticleSnapshot { time, particles };
    snap.validate(Some(&lines))?;
    Ok(snap)
}

pub fn load_snapshot_ascii(path: &Path) -> Result<ParticleSnapshot, SnapshotError> {
    read_snapshot_ascii(BufReader::with_capacity(1 << 20, File::open(path)?))
}

pub fn write_snapshot_ascii<W: Write>(snap: &ParticleSnapshot, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "# chad-snapshot v{ASCII_VERSION} t={:.16e} n={}",
        snap.time,
        snap.particles.len()
    )?;
    let mut row = String::with_capacity(256);
    for p in &snap.particles {
        row.clear();
        let _ = write!(row, "{}", p.id);
        for v in p.floats() {
            let _ = write!(row, ",{v:.16e}");
        }
        row.push('\n');
        w.write_all(row.as_bytes())?;
    }
    w.flush()
}

pub fn save_snapshot_ascii(snap: &ParticleSnapshot, path: &Path) -> std::io::Result<()> {
    write_snapshot_ascii(snap, BufWriter::with_capacity(1 << 20, File::create(path)?))
}

pub fn encode_binary(snap: &ParticleSnapshot) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + RECORD_LEN * snap.particles.len());
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    buf.extend_from_slice(&snap.time.to_le_bytes());
    buf.extend_from_slice(&(snap.particles.len() as u64).to_le_bytes());
    for p in &snap.particles {
        buf.extend_from_slice(&p.id.to_le_bytes());
        for v in p.floats() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

/// Checks magic and version of a header prefix `b` (possibly short) and
/// returns `(time, n)`.
fn decode_header(b: &[u8]) -> Result<(f64, u64), SnapshotError> {
    if b.len() < 8 || &b[..8] != BINARY_MAGIC {
        return Err(if b.len() < 8 && BINARY_MAGIC.starts_with(b) {
            SnapshotError::Truncated {
                expected: HEADER_LEN as u64,
                found: b.len() as u64,
            }
        } else {
            SnapshotError::BadMagic
        });
    }
    if b.len() < HEADER_LEN {
        return Err(SnapshotError::Truncated {
            expected: HEADER_LEN as u64,
            found: b.len() as u64,
        });
    }
    let version = u32::from_le_bytes(b[8..12].try_into().expect("4 bytes"));
    if version != BINARY_VERSION {
        return Err(SnapshotError::Version {
            found: version,
            expected: BINARY_VERSION,
        });
    }
    Ok((f64_at(b, 12), u64_at(b, 20)))
}

fn decode_records(b: &[u8], out: &mut Vec<Particle>) {
    out.extend(b.chunks_exact(RECORD_LEN).map(|r| {
        let mut f = [0.0; 7];
        for (k, v) in f.iter_mut().enumerate() {
            *v = f64_at(r, 8 + 8 * k);
        }
        Particle::from_floats(u64_at(r, 0), f)
    }));
}

fn expected_len(n: u64) -> u128 {
    n as u128 * RECORD_LEN as u128 + HEADER_LEN as u128
}

/// Decode a whole binary snapshot; nothing is returned on any error.
pub fn decode_binary(b: &[u8]) -> Result<ParticleSnapshot, SnapshotError> {
    let (time, n) = decode_header(b)?;
    let expected = expected_len(n);
    if (b.len() as u128) < expected {
        return Err(SnapshotError::Truncated {
            expected: expected.min(u64::MAX as u128) as u64,
            found: b.len() as u64,
        });
    }
    if (b.len() as u128) > expected {
        return Err(SnapshotError::TrailingData((b.len() as u128 - expected) as u64));
    }
    let mut particles = Vec::with_capacity(n as usize);
    decode_records(&b[HEADER_LEN..], &mut particles);
    let snap = ParticleSnapshot { time, particles };
    snap.validate(None)?;
    Ok(snap)
}

/// Fill `buf` as far as the reader allows; returns the byte count.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Streams records through a fixed buffer so only the particle array is
/// allocated; same checks and errors as [`decode_binary`].
pub fn read_snapshot_binary<R: Read>(mut r: R) -> Result<ParticleSnapshot, SnapshotError> {
    const BATCH: usize = 4096;
    let mut header = [0u8; HEADER_LEN];
    let got = read_full(&mut r, &mut header)?;
    let (time, n) = decode_header(&header[..got])?;
    let expected = expected_len(n);
    // cap the reservation so a corrupt count cannot exhaust memory up front
    let mut particles = Vec::with_capacity((n as usize).min(1 << 24));
    let mut buf = vec![0u8; BATCH * RECORD_LEN];
    let mut remaining = n;
    while remaining > 0 {
        let want = (remaining.min(BATCH as u64) as usize) * RECORD_LEN;
        let got = read_full(&mut r, &mut buf[..want])?;
        if got < want {
            let found = HEADER_LEN as u64 + (n - remaining) * RECORD_LEN as u64 + got as u64;
            return Err(SnapshotError::Truncated {
                expected: expected.min(u64::MAX as u128) as u64,
                found,
            });
        }
        decode_records(&buf[..want], &mut particles);
        remaining -= (want / RECORD_LEN) as u64;
    }
    let mut trailing = 0u64;
    loop {
        let k = read_full(&mut r, &mut buf)?;
        trailing += k as u64;
        if k < buf.len() {
            break;
        }
    }
    if trailing > 0 {
        return Err(SnapshotError::TrailingData(trailing));
    }
    let snap = ParticleSnapshot { time, particles };
    snap.validate(None)?;
    Ok(snap)
}

pub fn load_snapshot_binary(path: &Path) -> Result<ParticleSnapshot, SnapshotError> {
    read_snapshot_binary(File::open(path)?)
}

pub fn write_snapshot_binary<W: Write>(snap: &ParticleSnapshot, mut w: W) -> std::io::Result<()> {
    w.write_all(&encode_binary(snap))?;
    w.flush()
}

pub fn save_snapshot_binary(snap: &ParticleSnapshot, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, encode_binary(snap))
}

/// Snapshot file encodings, chosen by extension: `.bin` is binary, anything
/// else ASCII.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    Ascii,
    Binary,
}

impl SnapshotFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => SnapshotFormat::Binary,
            _ => SnapshotFormat::Ascii,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            SnapshotFormat::Ascii => "csv",
            SnapshotFormat::Binary => "bin",
        }
    }
}

pub fn load_snapshot(path: &Path) -> Result<ParticleSnapshot, SnapshotError> {
    match SnapshotFormat::from_path(path) {
        SnapshotFormat::Ascii => load_snapshot_ascii(path),
        SnapshotFormat::Binary => load_snapshot_binary(path),
    }
}

pub fn save_snapshot(snap: &ParticleSnapshot, path: &Path) -> std::io::Result<()> {
    match SnapshotFormat::from_path(path) {
        SnapshotFormat::Ascii => save_snapshot_ascii(snap, path),
        SnapshotFormat::Binary => save_snapshot_binary(snap, path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GOLDEN: &str = "# chad-snapshot v1 t=5.0000000000000000e-1 n=3
7,1.0000000000000000e-2,0,0,0.5,-0.25,0,998.2
3,-1e-300,2.5e300,1.7976931348623157e308,0,0,1e-5,1000
11,0.1,0.2,0.3,4.9406564584124654e-324,0,0,1001.5
";

    #[test]
    fn golden_file_parses_exactly() {
        let s = read_snapshot_ascii(GOLDEN.as_bytes()).unwrap();
        assert_eq!(s.time, 0.5);
        assert_eq!(s.particles.iter().map(|p| p.id).collect::<Vec<_>>(), vec![7, 3, 11]);
        assert_eq!(s.particles[0].position, [0.01, 0.0, 0.0]);
        assert_eq!(s.particles[0].velocity, [0.5, -0.25, 0.0]);
        assert_eq!(s.particles[1].position[2], f64::MAX);
        assert_eq!(s.particles[2].velocity[0], 5e-324);
        assert_eq!(s.particles[2].density, 1001.5);
    }

    #[test]
    fn ascii_binary_ascii_is_exact() {
        let s = read_snapshot_ascii(GOLDEN.as_bytes()).unwrap();
        let b = decode_binary(&encode_binary(&s)).unwrap();
        assert_eq!(b, s);
        let mut out = Vec::new();
        write_snapshot_ascii(&b, &mut out).unwrap();
        assert_eq!(read_snapshot_ascii(out.as_slice()).unwrap(), s);
    }

    #[test]
    fn empty_data_section_is_an_error() {
        let r = read_snapshot_ascii("# chad-snapshot v1 t=0 n=0\n".as_bytes());
        assert!(matches!(r, Err(SnapshotError::Empty)));
    }

    #[test]
    fn malformed_row_names_its_line() {
        let text = "# chad-snapshot v1 t=0 n=2\n1,0,0,0,0,0,0,1\n2,0,zero,0,0,0,0,1\n";
        match read_snapshot_ascii(text.as_bytes()) {
            Err(SnapshotError::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains('y'), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_and_non_finite_are_rejected() {
        let dup = "# chad-snapshot v1 t=0 n=2\n1,0,0,0,0,0,0,1\n1,0,0,0,0,0,0,1\n";
        assert!(matches!(
            read_snapshot_ascii(dup.as_bytes()),
            Err(SnapshotError::DuplicateId { id: 1, line: Some(3) })
        ));
        let nan = "# chad-snapshot v1 t=0 n=1\n1,0,0,NaN,0,0,0,1\n";
        assert!(matches!(
            read_snapshot_ascii(nan.as_bytes()),
            Err(SnapshotError::NonFinite { field: "z", .. })
        ));
    }

    #[test]
    fn count_mismatch_is_an_error() {
        let text = "# chad-snapshot v1 t=0 n=3\n1,0,0,0,0,0,0,1\n";
        assert!(matches!(
            read_snapshot_ascii(text.as_bytes()),
            Err(SnapshotError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn binary_header_errors() {
        let s = read_snapshot_ascii(GOLDEN.as_bytes()).unwrap();
        let good = encode_binary(&s);
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_binary(&bad), Err(SnapshotError::BadMagic)));
        let mut v2 = good.clone();
        v2[8] = 2;
        assert!(matches!(
            decode_binary(&v2),
            Err(SnapshotError::Version { found: 2, .. })
        ));
        for cut in [3, 20, good.len() - 1] {
            assert!(matches!(
                decode_binary(&good[..cut]),
                Err(SnapshotError::Truncated { .. })
            ));
        }
        let mut long = good.clone();
        long.push(0);
        assert!(matches!(decode_binary(&long), Err(SnapshotError::TrailingData(1))));
    }

    fn any_finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            Just(f64::MAX),
            Just(f64::MIN_POSITIVE),
            Just(5e-324),
            Just(-0.0),
        ]
    }

    proptest! {
        #[test]
        fn codecs_round_trip_bit_exactly(
            time in any_finite(),
            rows in prop::collection::vec((any::<u64>(), prop::array::uniform7(any_finite())), 1..40)
        ) {
            let mut seen = HashSet::new();
            let particles: Vec<Particle> = rows
                .into_iter()
                .filter(|(id, _)| seen.insert(*id))
                .map(|(id, f)| Particle::from_floats(id, f))
                .collect();
            let s = ParticleSnapshot::new(time, particles).unwrap();
            let bits = |s: &ParticleSnapshot| -> Vec<u64> {
                s.particles.iter().flat_map(|p| p.floats().map(f64::to_bits)).collect()
            };
            let b = decode_binary(&encode_binary(&s)).unwrap();
            prop_assert_eq!(bits(&b), bits(&s));
            let mut out = Vec::new();
            write_snapshot_ascii(&s, &mut out).unwrap();
            let a = read_snapshot_ascii(out.as_slice()).unwrap();
            prop_assert_eq!(bits(&a), bits(&s));
            prop_assert_eq!(a.time.to_bits(), s.time.to_bits());
        }
    }
}
