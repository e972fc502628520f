//! Gray image buffer and the codecs that move it on and off disk.
//!
//! Binary PGM (`P5`, maxval 255) is the reference interchange format and is
//! encoded byte-exactly. PNG goes through the `image` crate; colour PNGs are
//! reduced to gray with BT.601 luma.

use std::fs;
use std::path::Path;

use crate::error::{Error, HeaderField, PgmError, Result};

/// Row-major 8-bit gray tones.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl GrayImage {
    pub fn from_raw(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("zero dimension {width}x{height}")));
        }
        let expected = width.checked_mul(height).ok_or_else(|| {
            Error::InvalidImage(format!("dimensions {width}x{height} overflow"))
        })?;
        if pixels.len() != expected {
            return Err(Error::InvalidImage(format!(
                "{} pixels for {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    /// An image filled with a single tone.
    pub fn filled(width: usize, height: usize, tone: u8) -> Result<Self> {
        Self::from_raw(width, height, vec![tone; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::from_raw(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn in_bounds(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height
    }

    /// Tone at `(x, y)`. Panics when out of bounds.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        assert!(self.in_bounds(x, y), "({x}, {y}) outside {}x{}", self.width, self.height);
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, tone: u8) {
        assert!(self.in_bounds(x, y), "({x}, {y}) outside {}x{}", self.width, self.height);
        self.pixels[y * self.width + x] = tone;
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.pixels
    }
}

const PGM_MAGIC: &[u8; 2] = b"P5";

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: HeaderField) -> std::result::Result<(u32, usize), PgmError> {
        self.skip_separators();
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u32::from(b - b'0')))
                .ok_or(PgmError::MalformedHeader { field, offset: start })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(PgmError::MalformedHeader { field, offset: start });
        }
        Ok((value, start))
    }
}

/// Decodes a binary PGM. Bytes after the declared payload are ignored.
pub fn read_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, PgmError> {
    if bytes.len() < 2 || &bytes[..2] != PGM_MAGIC {
        return Err(PgmError::BadMagic { offset: 0 });
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    // The magic must be followed by a separator before the width.
    match bytes.get(2) {
        Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
        _ => return Err(PgmError::MalformedHeader { field: HeaderField::Width, offset: 2 }),
    }
    let (width, w_at) = cur.number(HeaderField::Width)?;
    let (height, h_at) = cur.number(HeaderField::Height)?;
    let (maxval, m_at) = cur.number(HeaderField::Maxval)?;
    if width == 0 {
        return Err(PgmError::ZeroDimension { field: HeaderField::Width, offset: w_at });
    }
    if height == 0 {
        return Err(PgmError::ZeroDimension { field: HeaderField::Height, offset: h_at });
    }
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval { maxval, offset: m_at });
    }
    // Exactly one whitespace byte separates maxval from the raster.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(PgmError::MalformedHeader { field: HeaderField::Separator, offset: cur.pos })
        }
    }
    let expected = (width as usize) * (height as usize);
    let payload = &bytes[cur.pos..];
    if payload.len() < expected {
        return Err(PgmError::Truncated { offset: bytes.len(), expected, found: payload.len() });
    }
    let pixels = payload[..expected].to_vec();
    Ok(GrayImage { width: width as usize, height: height as usize, pixels })
}

/// Canonical P5: `"P5\n<w> <h>\n255\n"` then the raw rows.
pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width, image.height);
    let mut out = Vec::with_capacity(header.len() + image.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&image.pixels);
    out
}

/// BT.601 luma of one RGB triple, rounded to the nearest tone.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

/// Converts packed 8-bit RGB triples into a gray image.
pub fn to_grayscale(width: usize, height: usize, rgb: &[u8]) -> Result<GrayImage> {
    if rgb.len() != width * height * 3 {
        return Err(Error::InvalidImage(format!(
            "{} RGB bytes for {width}x{height}",
            rgb.len()
        )));
    }
    let pixels = rgb.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect();
    GrayImage::from_raw(width, height, pixels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codec {
    Pgm,
    Png,
}

impl Codec {
    /// Picks the codec from the file extension (case-insensitive).
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("pgm") => Ok(Codec::Pgm),
            Some("png") => Ok(Codec::Png),
            _ => Err(Error::Usage(format!(
                "{}: unknown image extension (expected .pgm or .png)",
                path.display()
            ))),
        }
    }
}

pub fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Png(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        image::DynamicImage::ImageLuma8(buf) => GrayImage::from_raw(w, h, buf.into_raw()),
        other => to_grayscale(w, h, other.into_rgb8().as_raw()),
    }
}

pub fn encode_png(image: &GrayImage) -> Result<Vec<u8>> {
    let buf = image::GrayImage::from_raw(
        image.width as u32,
        image.height as u32,
        image.pixels.clone(),
    )
    .ok_or_else(|| Error::Png("buffer size mismatch".into()))?;
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::Png(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn load(path: &Path) -> Result<GrayImage> {
    let codec = Codec::from_path(path)?;
    let bytes = fs::read(path)?;
    match codec {
        Codec::Pgm => Ok(read_pgm(&bytes)?),
        Codec::Png => decode_png(&bytes),
    }
}

pub fn save(path: &Path, image: &GrayImage) -> Result<()> {
    let bytes = match Codec::from_path(path)? {
        Codec::Pgm => write_pgm(image),
        Codec::Png => encode_png(image)?,
    };
    fs::write(path, bytes)?;
    Ok(())
}
