//! Grayscale image files: binary/ASCII PGM (P5/P2) and 8-bit grayscale PNG.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use coror_core::image::MIN_EXTRACT_SIZE;
use coror_core::{ForegroundMask, GrayImage};

use crate::error::{Error, Result};

/// Reads an image and enforces the minimum extraction size.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let img = read_image(path)?;
    img.ensure_min_size(MIN_EXTRACT_SIZE)?;
    Ok(img)
}

/// Reads an image of any size.
pub fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub fn decode(bytes: &[u8]) -> Result<GrayImage> {
    match bytes {
        [b'P', b'2' | b'5', ..] => decode_pgm(bytes),
        [0x89, b'P', b'N', b'G', ..] => decode_png(bytes),
        [b'P', b'3' | b'6', ..] => Err(Error::UnsupportedFormat("color PPM".into())),
        _ => Err(Error::UnsupportedFormat("not a PGM or PNG file".into())),
    }
}

struct Tokens<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.buf.len() {
            match self.buf[self.pos] {
                b'#' => {
                    while self.pos < self.buf.len() && self.buf[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next_uint(&mut self) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.buf.len() && self.buf[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::UnsupportedFormat("malformed PGM header".into()))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let binary = bytes[1] == b'5';
    let mut t = Tokens { buf: bytes, pos: 2 };
    let width = t.next_uint()?;
    let height = t.next_uint()?;
    let maxval = t.next_uint()?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat(format!("PGM maxval {maxval} (8-bit only)")));
    }
    let n = width * height;
    let scale = 255.0 / maxval as f64;
    let pixels: Vec<f64> = if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = t.pos + 1;
        let raster = bytes
            .get(start..start + n)
            .ok_or_else(|| Error::UnsupportedFormat("truncated PGM raster".into()))?;
        raster.iter().map(|&v| f64::from(v) * scale).collect()
    } else {
        (0..n)
            .map(|_| t.next_uint().map(|v| v as f64 * scale))
            .collect::<Result<_>>()?
    };
    if pixels.iter().any(|&v| v > 255.0) {
        return Err(Error::UnsupportedFormat("PGM sample exceeds maxval".into()));
    }
    Ok(GrayImage::new(width, height, pixels)?)
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::UnsupportedFormat(format!("PNG: {e}")))?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    let (color, depth) = (info.color_type, info.bit_depth);
    if color != png::ColorType::Grayscale || depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!(
            "PNG must be 8-bit grayscale, found {color:?} {depth:?}"
        )));
    }
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(width * height)];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::UnsupportedFormat(format!("PNG: {e}")))?;
    buf.truncate(frame.buffer_size());
    Ok(GrayImage::from_u8(width, height, &buf)?)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Writes a binary (P5) PGM with 8-bit samples.
pub fn save_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let run = |w: &mut BufWriter<fs::File>| -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", img.width(), img.height())?;
        w.write_all(&img.to_u8())?;
        w.flush()
    };
    run(&mut w).map_err(|e| Error::io(path, e))
}

pub fn save_png(img: &GrayImage, path: &Path) -> Result<()> {
    let w = create(path)?;
    let mut enc = png::Encoder::new(w, img.width() as u32, img.height() as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let to_io = |e: png::EncodingError| Error::io(path, std::io::Error::other(e));
    let mut writer = enc.write_header().map_err(to_io)?;
    writer.write_image_data(&img.to_u8()).map_err(to_io)?;
    writer.finish().map_err(to_io)
}

/// Debug export of a foreground mask as a 0/255 PGM.
pub fn save_mask_pgm(mask: &ForegroundMask, path: &Path) -> Result<()> {
    let px = mask.flags().iter().map(|&f| if f { 255.0 } else { 0.0 }).collect();
    save_pgm(&GrayImage::new(mask.width(), mask.height(), px)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_binary_pgm() {
        let bytes = b"P5\n2 2\n255\n\x00\x55\xaa\xff";
        let img = decode(bytes).unwrap();
        assert_eq!(img.pixels(), &[0.0, 85.0, 170.0, 255.0]);
    }

    #[test]
    fn ascii_pgm_with_comment() {
        let img = decode(b"P2\n# hello\n2 2\n255\n0 85\n170 255\n").unwrap();
        assert_eq!(img.pixels(), &[0.0, 85.0, 170.0, 255.0]);
    }

    #[test]
    fn truncated_pgm() {
        assert!(matches!(
            decode(b"P5\n4 4\n255\n\x00\x01"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn rejects_other_formats() {
        assert!(matches!(decode(b"P6\n1 1\n255\nabc"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(decode(b"GIF89a"), Err(Error::UnsupportedFormat(_))));
    }
}
