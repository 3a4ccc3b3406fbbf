//! Binary PPM (P6) images of grid soups, one 8x8 block per tape.
//!
//! Byte `b` maps to RGB with a 3-3-2 split: red from bits 7..5, green from
//! bits 4..2, blue from bits 1..0, each scaled to 0..=255. Zero is black.

use std::io::{self, Write};

use crate::snapshot::{Snapshot, SnapshotTopology};

pub const BLOCK: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("snapshot topology is {0}, expected grid2d")]
    Topology(&'static str),
    #[error("tapes must hold {} bytes to fill an 8x8 block, got {0}", BLOCK * BLOCK)]
    TapeLength(u32),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn palette(b: u8) -> [u8; 3] {
    let r = (b >> 5) as u32 * 255 / 7;
    let g = ((b >> 2) & 7) as u32 * 255 / 7;
    let bl = (b & 3) as u32 * 255 / 3;
    [r as u8, g as u8, bl as u8]
}

/// Raw RGB pixels of a `width x height` grid of 64-byte tapes, row-major.
pub fn grid_pixels(bytes: &[u8], width: usize, height: usize) -> Vec<u8> {
    let (pw, ph) = (width * BLOCK, height * BLOCK);
    let mut px = vec![0u8; pw * ph * 3];
    for ty in 0..height {
        for tx in 0..width {
            let tape = &bytes[(ty * width + tx) * BLOCK * BLOCK..][..BLOCK * BLOCK];
            for (i, &b) in tape.iter().enumerate() {
                let (x, y) = (tx * BLOCK + i % BLOCK, ty * BLOCK + i / BLOCK);
                px[(y * pw + x) * 3..][..3].copy_from_slice(&palette(b));
            }
        }
    }
    px
}

pub fn write_ppm<W: Write>(mut w: W, width_px: usize, height_px: usize, rgb: &[u8]) -> io::Result<()> {
    write!(w, "P6\n{width_px} {height_px}\n255\n")?;
    w.write_all(rgb)?;
    w.flush()
}

/// Renders a grid snapshot. Returns the image size in pixels.
pub fn render_snapshot<W: Write>(snap: &Snapshot, w: W) -> Result<(usize, usize), RenderError> {
    if !matches!(snap.topology, SnapshotTopology::Grid2d { .. }) {
        return Err(RenderError::Topology(snap.topology.name()));
    }
    if snap.tape_len as usize != BLOCK * BLOCK {
        return Err(RenderError::TapeLength(snap.tape_len));
    }
    let (width, height) = (snap.width as usize, snap.height as usize);
    let rgb = grid_pixels(&snap.bytes, width, height);
    write_ppm(w, width * BLOCK, height * BLOCK, &rgb)?;
    Ok((width * BLOCK, height * BLOCK))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soup::{Soup, Topology};
    use crate::substrate::LanguageId;

    fn grid(w: usize, h: usize) -> Snapshot {
        let soup = Soup::zeros(Topology::Grid2d { width: w, height: h, wrap: false }, w * h, 64, false).unwrap();
        Snapshot::of_soup(&soup, LanguageId::Bff, 0)
    }

    #[test]
    fn palette_corners() {
        assert_eq!(palette(0), [0, 0, 0]);
        assert_eq!(palette(0xFF), [255, 255, 255]);
        assert_eq!(palette(0b1110_0000), [255, 0, 0]);
    }

    #[test]
    fn zero_soup_is_uniform_black() {
        let mut out = Vec::new();
        assert_eq!(render_snapshot(&grid(3, 2), &mut out).unwrap(), (24, 16));
        let header = b"P6\n24 16\n255\n";
        assert_eq!(&out[..header.len()], header);
        assert_eq!(out.len(), header.len() + 24 * 16 * 3);
        assert!(out[header.len()..].iter().all(|&b| b == 0));
    }

    #[test]
    fn single_tape_block_layout() {
        let mut snap = grid(1, 1);
        snap.bytes[9] = 0xFF;
        let px = grid_pixels(&snap.bytes, 1, 1);
        assert_eq!(&px[(8 + 1) * 3..][..3], &[255, 255, 255]);
        let mut out = Vec::new();
        assert_eq!(render_snapshot(&snap, &mut out).unwrap(), (8, 8));
    }

    #[test]
    fn well_mixed_is_rejected() {
        let soup = Soup::zeros(Topology::WellMixed, 2, 64, false).unwrap();
        let snap = Snapshot::of_soup(&soup, LanguageId::Bff, 0);
        assert!(matches!(render_snapshot(&snap, Vec::new()), Err(RenderError::Topology("well-mixed"))));
    }
}
