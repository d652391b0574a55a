//! Binary velocity snapshots.
//!
//! Layout (all little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "NSE3SNAP"
//! 8       4     u32 version (= 1)
//! 12      4     u32 N
//! 16      8     f64 L
//! 24      8     f64 nu
//! 32      8     f64 t
//! 40      8     u64 seed
//! 48      -     payload: 3 * N^3 f64 physical samples,
//!               component-major, x-fastest within each component
//! ```
//!
//! Physical (not spectral) storage for portability; the spectral
//! representation is recomputed on load.  Round trips are bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::SnapshotError;
use crate::field::VectorField;
use crate::grid::TorusGrid;

pub const MAGIC: &[u8; 8] = b"NSE3SNAP";
pub const VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub n: u32,
    pub l: f64,
    pub nu: f64,
    pub t: f64,
    pub seed: u64,
}

/// Expected file size for a given resolution.
pub fn file_size(n: usize) -> usize {
    HEADER_BYTES + 3 * n * n * n * 8
}

pub fn write_snapshot(
    path: &Path,
    header: &SnapshotHeader,
    u: &VectorField,
) -> Result<(), SnapshotError> {
    if header.n as usize != u.grid().n() {
        return Err(SnapshotError::InvalidHeader(format!(
            "declared N = {} but field has N = {}",
            header.n,
            u.grid().n()
        )));
    }
    let phys = u.physical();
    for comp in phys {
        if comp.iter().any(|v| !v.is_finite()) {
            return Err(SnapshotError::NonFinitePayload);
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&header.n.to_le_bytes())?;
    w.write_all(&header.l.to_le_bytes())?;
    w.write_all(&header.nu.to_le_bytes())?;
    w.write_all(&header.t.to_le_bytes())?;
    w.write_all(&header.seed.to_le_bytes())?;
    for comp in phys {
        for v in comp {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, VectorField), SnapshotError> {
    let mut rd = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    read_exact_or_truncated(&mut rd, &mut magic, 8, 0)?;
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = read_u32(&mut rd)?;
    if version != VERSION {
        return Err(SnapshotError::UnsupportedVersion(version));
    }
    let n = read_u32(&mut rd)?;
    let l = read_f64(&mut rd)?;
    let nu = read_f64(&mut rd)?;
    let t = read_f64(&mut rd)?;
    let seed = read_u64(&mut rd)?;
    let header = SnapshotHeader { n, l, nu, t, seed };

    let grid = TorusGrid::new(n as usize, l)
        .map_err(|e| SnapshotError::InvalidHeader(e.to_string()))?;
    let len = grid.physical_len();
    let expected = 3 * len * 8;
    let mut payload = vec![0u8; expected];
    read_exact_or_truncated(&mut rd, &mut payload, expected, HEADER_BYTES)?;

    let mut comps: [Vec<f64>; 3] = [
        Vec::with_capacity(len),
        Vec::with_capacity(len),
        Vec::with_capacity(len),
    ];
    for (ci, comp) in comps.iter_mut().enumerate() {
        for i in 0..len {
            let off = (ci * len + i) * 8;
            let bits: [u8; 8] = payload[off..off + 8].try_into().unwrap();
            comp.push(f64::from_le_bytes(bits));
        }
    }
    let field = VectorField::from_physical(grid, comps)
        .map_err(|_| SnapshotError::NonFinitePayload)?;
    Ok((header, field))
}

fn read_exact_or_truncated(
    rd: &mut impl Read,
    buf: &mut [u8],
    expected: usize,
    base: usize,
) -> Result<(), SnapshotError> {
    let mut filled = 0;
    while filled < buf.len() {
        let got = rd.read(&mut buf[filled..])?;
        if got == 0 {
            return Err(SnapshotError::Truncated {
                expected: base + expected,
                found: base + filled,
            });
        }
        filled += got;
    }
    Ok(())
}

fn read_u32(rd: &mut impl Read) -> Result<u32, SnapshotError> {
    let mut b = [0u8; 4];
    read_exact_or_truncated(rd, &mut b, 4, 8)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(rd: &mut impl Read) -> Result<u64, SnapshotError> {
    let mut b = [0u8; 8];
    read_exact_or_truncated(rd, &mut b, 8, 8)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(rd: &mut impl Read) -> Result<f64, SnapshotError> {
    let mut b = [0u8; 8];
    read_exact_or_truncated(rd, &mut b, 8, 8)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::random_divergence_free;

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("nse3d-snap-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let grid = TorusGrid::new(8, 2.0).unwrap();
        let u = random_divergence_free(&grid, 3, 0.5, 2.0);
        let header = SnapshotHeader {
            n: 8,
            l: 2.0,
            nu: 0.05,
            t: 1.25,
            seed: 3,
        };
        let path = tmpdir().join("rt.bin");
        write_snapshot(&path, &header, &u).unwrap();

        assert_eq!(
            std::fs::metadata(&path).unwrap().len() as usize,
            file_size(8)
        );

        let (h2, v) = read_snapshot(&path).unwrap();
        assert_eq!(header, h2);
        let a = u.physical();
        let b = v.physical();
        for comp in 0..3 {
            for (x, y) in a[comp].iter().zip(&b[comp]) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn file_size_formula() {
        // header 48 bytes + 3 * 8^3 doubles
        assert_eq!(file_size(8), 48 + 12288);
    }

    #[test]
    fn error_paths_are_distinct() {
        let dir = tmpdir();
        let grid = TorusGrid::new(8, 1.0).unwrap();
        let u = VectorField::zeros(grid);
        let header = SnapshotHeader {
            n: 8,
            l: 1.0,
            nu: 0.1,
            t: 0.0,
            seed: 0,
        };
        let good = dir.join("good.bin");
        write_snapshot(&good, &header, &u).unwrap();

        // truncated payload
        let bytes = std::fs::read(&good).unwrap();
        let cut = dir.join("cut.bin");
        std::fs::write(&cut, &bytes[..bytes.len() - 17]).unwrap();
        assert!(matches!(
            read_snapshot(&cut),
            Err(SnapshotError::Truncated { .. })
        ));

        // bad magic
        let mut evil = bytes.clone();
        evil[0] = b'X';
        let bad = dir.join("bad.bin");
        std::fs::write(&bad, &evil).unwrap();
        assert!(matches!(read_snapshot(&bad), Err(SnapshotError::BadMagic)));

        // unsupported version
        let mut v9 = bytes.clone();
        v9[8] = 9;
        let verf = dir.join("ver.bin");
        std::fs::write(&verf, &v9).unwrap();
        assert!(matches!(
            read_snapshot(&verf),
            Err(SnapshotError::UnsupportedVersion(9))
        ));

        // non-finite payload
        let mut nanbytes = bytes;
        let nan = f64::NAN.to_le_bytes();
        nanbytes[HEADER_BYTES..HEADER_BYTES + 8].copy_from_slice(&nan);
        let nanf = dir.join("nan.bin");
        std::fs::write(&nanf, &nanbytes).unwrap();
        assert!(matches!(
            read_snapshot(&nanf),
            Err(SnapshotError::NonFinitePayload)
        ));

        // mismatched declared N
        let bad_header = SnapshotHeader {
            n: 16,
            ..header
        };
        assert!(matches!(
            write_snapshot(&dir.join("x.bin"), &bad_header, &u),
            Err(SnapshotError::InvalidHeader(_))
        ));
    }
}
