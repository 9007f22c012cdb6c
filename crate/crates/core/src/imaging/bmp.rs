//! 24-bit uncompressed BMP reader/writer.
//!
//! Only the plain BI_RGB 24bpp variant is supported; that is the format the
//! scene generator emits and the recognizer ingests. The writer is canonical
//! (bottom-up rows, 54-byte header), so write -> read -> write is byte-exact.

use std::fs;
use std::io;
use std::path::Path;

use super::RasterImage;

#[derive(Debug, thiserror::Error)]
pub enum BmpError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed bmp at byte {offset}: {message}")]
    Format { offset: usize, message: String },
}

fn format_err<T>(offset: usize, message: impl Into<String>) -> Result<T, BmpError> {
    Err(BmpError::Format {
        offset,
        message: message.into(),
    })
}

fn read_u16(data: &[u8], offset: usize) -> Result<u16, BmpError> {
    data.get(offset..offset + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or(BmpError::Format {
            offset,
            message: "header truncated".into(),
        })
}

fn read_u32(data: &[u8], offset: usize) -> Result<u32, BmpError> {
    data.get(offset..offset + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(BmpError::Format {
            offset,
            message: "header truncated".into(),
        })
}

pub fn decode(data: &[u8]) -> Result<RasterImage, BmpError> {
    if data.len() < 54 || &data[..2] != b"BM" {
        return format_err(0, "not a BMP file");
    }
    let pixel_offset = read_u32(data, 10)? as usize;
    let header_size = read_u32(data, 14)?;
    if header_size < 40 {
        return format_err(14, format!("unsupported DIB header size {header_size}"));
    }
    let width = read_u32(data, 18)? as i32;
    let height_raw = read_u32(data, 22)? as i32;
    let planes = read_u16(data, 26)?;
    let bpp = read_u16(data, 28)?;
    let compression = read_u32(data, 30)?;
    if planes != 1 {
        return format_err(26, format!("unsupported plane count {planes}"));
    }
    if bpp != 24 {
        return format_err(28, format!("unsupported bit depth {bpp}, expected 24"));
    }
    if compression != 0 {
        return format_err(30, format!("unsupported compression {compression}"));
    }
    if width <= 0 || height_raw == 0 {
        return format_err(18, "invalid dimensions");
    }
    let top_down = height_raw < 0;
    let width = width as usize;
    let height = height_raw.unsigned_abs() as usize;
    let row_size = (width * 3 + 3) & !3;
    if data.len() < pixel_offset + row_size * height {
        return format_err(data.len(), "pixel data truncated");
    }

    let mut img = RasterImage::new(width, height);
    for row in 0..height {
        let y = if top_down { row } else { height - 1 - row };
        let base = pixel_offset + row * row_size;
        for x in 0..width {
            let i = base + x * 3;
            // stored as BGR
            img.set(x, y, (data[i + 2], data[i + 1], data[i]));
        }
    }
    Ok(img)
}

pub fn encode(img: &RasterImage) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let row_size = (w * 3 + 3) & !3;
    let image_size = row_size * h;
    let file_size = 54 + image_size;

    let mut out = Vec::with_capacity(file_size);
    out.extend_from_slice(b"BM");
    out.extend_from_slice(&(file_size as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&54u32.to_le_bytes());
    // BITMAPINFOHEADER
    out.extend_from_slice(&40u32.to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&24u16.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(image_size as u32).to_le_bytes());
    out.extend_from_slice(&2835u32.to_le_bytes());
    out.extend_from_slice(&2835u32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());

    let pad = [0u8; 3];
    for row in 0..h {
        let y = h - 1 - row;
        for x in 0..w {
            let (r, g, b) = img.get(x, y);
            out.extend_from_slice(&[b, g, r]);
        }
        out.extend_from_slice(&pad[..row_size - w * 3]);
    }
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<RasterImage, BmpError> {
    decode(&fs::read(path)?)
}

pub fn write(path: impl AsRef<Path>, img: &RasterImage) -> Result<(), BmpError> {
    Ok(fs::write(path, encode(img))?)
}
