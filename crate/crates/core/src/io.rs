//! Lossless file I/O: 8-bit PNG and binary PNM (P5/P6, maxval 255).
//!
//! Loading sniffs the format from magic bytes; saving picks the codec from
//! the path extension. The PNM byte layouts are normative:
//! `P6\n<w> <h>\n255\n` followed by `w*h*3` bytes row-major, and `P5`
//! analogously with one byte per pixel. Binary masks are serialized as
//! 0/255 grayscale.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage, RasterImage};

const PNG_MAGIC: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

/// Load an RGB raster from a PNG or binary PNM file.
///
/// Grayscale sources are replicated across channels; an alpha channel is
/// dropped. Only 8-bit data is accepted.
pub fn load_image(path: &Path) -> Result<RasterImage> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(&PNG_MAGIC) {
        decode_png(&bytes, path)
    } else if bytes.starts_with(b"P6") || bytes.starts_with(b"P5") {
        decode_pnm(&bytes, path)
    } else {
        Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "unrecognized magic bytes (expected PNG, P5 or P6)".into(),
        })
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::FileMissing {
                path: path.to_path_buf(),
            }
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<RasterImage> {
    let corrupt = |detail: String| Error::CorruptHeader {
        path: path.to_path_buf(),
        detail,
    };
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    // Expand palette and sub-byte grayscale to plain 8-bit samples.
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| corrupt(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| corrupt("output size overflow".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| corrupt(e.to_string()))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("{:?} bit depth, only 8-bit is supported", info.bit_depth),
        });
    }
    let data = &buf[..info.buffer_size()];
    let n = info.width as usize * info.height as usize;
    let mut pixels = Vec::with_capacity(n * 3);
    match info.color_type {
        png::ColorType::Rgb => pixels.extend_from_slice(data),
        png::ColorType::Rgba => {
            for px in data.chunks_exact(4) {
                pixels.extend_from_slice(&px[..3]);
            }
        }
        png::ColorType::Grayscale => {
            for &v in data {
                pixels.extend_from_slice(&[v, v, v]);
            }
        }
        png::ColorType::GrayscaleAlpha => {
            for px in data.chunks_exact(2) {
                pixels.extend_from_slice(&[px[0], px[0], px[0]]);
            }
        }
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("{other:?} color type"),
            });
        }
    }
    RasterImage::new(info.width, info.height, pixels).map_err(|e| corrupt(e.to_string()))
}

/// Cursor over a PNM header: skips whitespace and `#` comments.
struct PnmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self) -> Option<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }
}

fn decode_pnm(bytes: &[u8], path: &Path) -> Result<RasterImage> {
    let corrupt = |detail: &str| Error::CorruptHeader {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };
    let channels: usize = if bytes.starts_with(b"P6") { 3 } else { 1 };
    let mut cur = PnmCursor { bytes, pos: 2 };
    let width = cur.next_number().ok_or_else(|| corrupt("missing width"))?;
    let height = cur.next_number().ok_or_else(|| corrupt("missing height"))?;
    let maxval = cur.next_number().ok_or_else(|| corrupt("missing maxval"))?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("maxval {maxval}, only 255 is supported"),
        });
    }
    if width == 0 || height == 0 {
        return Err(corrupt("zero dimension"));
    }
    // Exactly one whitespace byte separates the header from the raster data.
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(corrupt("missing separator after maxval"));
    }
    cur.pos += 1;
    let n = width as usize * height as usize;
    let data = &bytes[cur.pos..];
    if data.len() < n * channels {
        return Err(corrupt("truncated pixel data"));
    }
    let mut pixels = Vec::with_capacity(n * 3);
    if channels == 3 {
        pixels.extend_from_slice(&data[..n * 3]);
    } else {
        for &v in &data[..n] {
            pixels.extend_from_slice(&[v, v, v]);
        }
    }
    RasterImage::new(width, height, pixels).map_err(|e| corrupt(&e.to_string()))
}

/// Image types that can be written losslessly to disk.
pub trait Encodable: private::Sealed {
    fn save(&self, path: &Path) -> Result<()>;
}

mod private {
    pub trait Sealed {}
    impl Sealed for super::RasterImage {}
    impl Sealed for super::GrayImage {}
    impl Sealed for super::BinaryMask {}
}

/// Save an image losslessly; the codec is chosen by extension.
///
/// RGB rasters accept `.png` and `.ppm`; grayscale images and masks accept
/// `.png` and `.pgm`. Masks are written as 0/255 grayscale.
pub fn save_image<T: Encodable>(image: &T, path: &Path) -> Result<()> {
    image.save(path)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ext {
    Png,
    Ppm,
    Pgm,
}

fn extension_of(path: &Path) -> Result<Ext> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("png") => Ok(Ext::Png),
        Some("ppm") => Ok(Ext::Ppm),
        Some("pgm") => Ok(Ext::Pgm),
        other => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("extension {other:?}, expected png, ppm or pgm"),
        }),
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write_png(
    path: &Path,
    width: u32,
    height: u32,
    color: png::ColorType,
    data: &[u8],
) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width, height);
    encoder.set_color(color);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })?;
    writer.write_image_data(data).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })?;
    Ok(())
}

fn write_pnm(path: &Path, magic: &str, width: u32, height: u32, data: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(data.len() + 32);
    out.extend_from_slice(format!("{magic}\n{width} {height}\n255\n").as_bytes());
    out.extend_from_slice(data);
    fs::write(path, out).map_err(io_err(path))
}

impl Encodable for RasterImage {
    fn save(&self, path: &Path) -> Result<()> {
        match extension_of(path)? {
            Ext::Png => write_png(
                path,
                self.width(),
                self.height(),
                png::ColorType::Rgb,
                self.pixels(),
            ),
            Ext::Ppm => write_pnm(path, "P6", self.width(), self.height(), self.pixels()),
            Ext::Pgm => Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: "RGB raster cannot be written as PGM".into(),
            }),
        }
    }
}

impl Encodable for GrayImage {
    fn save(&self, path: &Path) -> Result<()> {
        match extension_of(path)? {
            Ext::Png => write_png(
                path,
                self.width(),
                self.height(),
                png::ColorType::Grayscale,
                self.pixels(),
            ),
            Ext::Pgm => write_pnm(path, "P5", self.width(), self.height(), self.pixels()),
            Ext::Ppm => Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: "grayscale image cannot be written as PPM".into(),
            }),
        }
    }
}

impl Encodable for BinaryMask {
    fn save(&self, path: &Path) -> Result<()> {
        self.to_gray().save(path)
    }
}
