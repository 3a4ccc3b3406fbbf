//! Binary soup snapshots.
//!
//! Layout, all integers little-endian:
//!
//! | field      | size                                   |
//! |------------|----------------------------------------|
//! | magic      | 6 bytes, `RSOUP1`                      |
//! | lang_len   | u8                                     |
//! | language   | `lang_len` ASCII bytes, e.g. `bff`      |
//! | topology   | u8: 0 well-mixed, 1 grid2d, 2 longtape |
//! | width      | u32 (program count when well-mixed)    |
//! | height     | u32                                    |
//! | tape_len   | u32 bytes per tape                     |
//! | epoch      | u64                                    |
//! | seed       | u64                                    |
//! | flags      | u8: bit 0 tokens present, bit 1 torus  |
//! | bytes      | width * height * tape_len              |
//! | tokens     | same count of u64, if flagged          |

use std::io::{self, Read, Write};

use crate::longtape::{LongTapeConfig, LongTapeError, LongTapeWorld};
use crate::soup::{Soup, SoupError, Topology};
use crate::substrate::LanguageId;

pub const MAGIC: &[u8; 6] = b"RSOUP1";

const FLAG_TOKENS: u8 = 1;
const FLAG_WRAP: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a soup snapshot")]
    BadMagic,
    #[error("unknown language `{0}`")]
    Language(String),
    #[error("unknown topology code {0}")]
    Topology(u8),
    #[error("snapshot holds a {found} world, expected {expected}")]
    Mismatch { expected: &'static str, found: &'static str },
    #[error(transparent)]
    Soup(#[from] SoupError),
    #[error(transparent)]
    LongTape(#[from] LongTapeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotTopology {
    WellMixed,
    Grid2d { wrap: bool },
    LongTape,
}

impl SnapshotTopology {
    fn code(self) -> u8 {
        match self {
            SnapshotTopology::WellMixed => 0,
            SnapshotTopology::Grid2d { .. } => 1,
            SnapshotTopology::LongTape => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SnapshotTopology::WellMixed => "well-mixed",
            SnapshotTopology::Grid2d { .. } => "grid2d",
            SnapshotTopology::LongTape => "longtape",
        }
    }
}

/// Decoded snapshot contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub language: LanguageId,
    pub topology: SnapshotTopology,
    pub width: u32,
    pub height: u32,
    pub tape_len: u32,
    pub epoch: u64,
    pub seed: u64,
    pub bytes: Vec<u8>,
    pub tokens: Option<Vec<u64>>,
}

impl Snapshot {
    pub fn of_soup(soup: &Soup, language: LanguageId, seed: u64) -> Self {
        let (topology, width, height) = match soup.topology() {
            Topology::WellMixed => (SnapshotTopology::WellMixed, soup.len() as u32, 1),
            Topology::Grid2d { width, height, wrap } => {
                (SnapshotTopology::Grid2d { wrap }, width as u32, height as u32)
            }
        };
        Snapshot {
            language,
            topology,
            width,
            height,
            tape_len: soup.program_len() as u32,
            epoch: soup.epoch(),
            seed,
            bytes: soup.bytes().to_vec(),
            tokens: soup.tokens().map(<[u64]>::to_vec),
        }
    }

    pub fn of_long_tape(world: &LongTapeWorld) -> Self {
        Snapshot {
            language: world.config().language,
            topology: SnapshotTopology::LongTape,
            width: 1,
            height: 1,
            tape_len: world.tape().len() as u32,
            epoch: world.generation(),
            seed: world.seed(),
            bytes: world.tape().to_vec(),
            tokens: None,
        }
    }

    pub fn into_soup(self) -> Result<Soup, SnapshotError> {
        let topology = match self.topology {
            SnapshotTopology::WellMixed => Topology::WellMixed,
            SnapshotTopology::Grid2d { wrap } => Topology::Grid2d {
                width: self.width as usize,
                height: self.height as usize,
                wrap,
            },
            SnapshotTopology::LongTape => {
                return Err(SnapshotError::Mismatch { expected: "soup", found: "longtape" })
            }
        };
        Ok(Soup::from_parts(self.bytes, self.tokens, self.tape_len as usize, topology, self.epoch)?)
    }

    /// Restores a long tape. Accumulator state below one mutation interval
    /// is not stored and restarts at zero.
    pub fn into_long_tape(self, config: LongTapeConfig) -> Result<LongTapeWorld, SnapshotError> {
        if self.topology != SnapshotTopology::LongTape {
            return Err(SnapshotError::Mismatch { expected: "longtape", found: self.topology.name() });
        }
        let config = LongTapeConfig { language: self.language, ..config };
        let mut world = LongTapeWorld::from_tape(config, self.bytes, self.seed)?;
        world.set_generation(self.epoch);
        Ok(world)
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        let name = self.language.name().as_bytes();
        w.write_all(MAGIC)?;
        w.write_all(&[name.len() as u8])?;
        w.write_all(name)?;
        w.write_all(&[self.topology.code()])?;
        w.write_all(&self.width.to_le_bytes())?;
        w.write_all(&self.height.to_le_bytes())?;
        w.write_all(&self.tape_len.to_le_bytes())?;
        w.write_all(&self.epoch.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        let mut flags = 0;
        if self.tokens.is_some() {
            flags |= FLAG_TOKENS;
        }
        if self.topology == (SnapshotTopology::Grid2d { wrap: true }) {
            flags |= FLAG_WRAP;
        }
        w.write_all(&[flags])?;
        w.write_all(&self.bytes)?;
        if let Some(tokens) = &self.tokens {
            let mut buf = Vec::with_capacity(tokens.len() * 8);
            for t in tokens {
                buf.extend_from_slice(&t.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self, SnapshotError> {
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let mut name = vec![0u8; read_u8(&mut r)? as usize];
        r.read_exact(&mut name)?;
        let name = String::from_utf8_lossy(&name).into_owned();
        let language = name.parse().map_err(|_| SnapshotError::Language(name))?;
        let topology_code = read_u8(&mut r)?;
        let width = u32::from_le_bytes(read_array(&mut r)?);
        let height = u32::from_le_bytes(read_array(&mut r)?);
        let tape_len = u32::from_le_bytes(read_array(&mut r)?);
        let epoch = u64::from_le_bytes(read_array(&mut r)?);
        let seed = u64::from_le_bytes(read_array(&mut r)?);
        let flags = read_u8(&mut r)?;
        let topology = match topology_code {
            0 => SnapshotTopology::WellMixed,
            1 => SnapshotTopology::Grid2d { wrap: flags & FLAG_WRAP != 0 },
            2 => SnapshotTopology::LongTape,
            other => return Err(SnapshotError::Topology(other)),
        };
        let count = width as usize * height as usize * tape_len as usize;
        let mut bytes = vec![0u8; count];
        r.read_exact(&mut bytes)?;
        let tokens = if flags & FLAG_TOKENS != 0 {
            let mut raw = vec![0u8; count * 8];
            r.read_exact(&mut raw)?;
            Some(raw.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
        } else {
            None
        };
        Ok(Snapshot { language, topology, width, height, tape_len, epoch, seed, bytes, tokens })
    }

    pub fn save(&self, path: &std::path::Path) -> io::Result<()> {
        self.write(io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SnapshotError> {
        Self::read(io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn read_u8<R: Read>(r: &mut R) -> io::Result<u8> {
    Ok(read_array::<R, 1>(r)?[0])
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> io::Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let soup = Soup::zeros(Topology::Grid2d { width: 3, height: 2, wrap: true }, 6, 64, false).unwrap();
        let mut buf = Vec::new();
        Snapshot::of_soup(&soup, LanguageId::Bff, 0x0102).write(&mut buf).unwrap();
        assert_eq!(&buf[..6], b"RSOUP1");
        assert_eq!(buf[6], 3);
        assert_eq!(&buf[7..10], b"bff");
        assert_eq!(buf[10], 1);
        assert_eq!(&buf[11..15], &3u32.to_le_bytes());
        assert_eq!(&buf[15..19], &2u32.to_le_bytes());
        assert_eq!(&buf[19..23], &64u32.to_le_bytes());
        assert_eq!(&buf[31..39], &0x0102u64.to_le_bytes());
        assert_eq!(buf[39], FLAG_WRAP);
        assert_eq!(buf.len(), 40 + 6 * 64);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(Snapshot::read(&b"RSOUP2......"[..]), Err(SnapshotError::BadMagic)));
        assert!(matches!(Snapshot::read(&b"RSOUP1"[..]), Err(SnapshotError::Io(_))));
    }

    #[test]
    fn long_tape_cannot_become_soup() {
        let w = LongTapeWorld::zeros(LongTapeConfig { tape_len: 128, ..Default::default() }, 1).unwrap();
        let s = Snapshot::of_long_tape(&w);
        assert!(matches!(s.clone().into_soup(), Err(SnapshotError::Mismatch { .. })));
        let back = s.into_long_tape(LongTapeConfig::default()).unwrap();
        assert_eq!(back.tape(), w.tape());
    }
}
