//! RGB8 raster plus PPM (P6) and PNG codecs.

use std::io::{Cursor, Write};
use std::path::Path;

use super::IngestError;

/// Row-major, interleaved RGB8 raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, IngestError> {
        if width == 0 || height == 0 {
            return Err(IngestError::InvalidImage(format!("dimensions must be positive, got {width}x{height}")));
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(IngestError::InvalidImage(format!(
                "buffer holds {} bytes, {width}x{height} RGB needs {expected}",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let pixels = color.iter().copied().cycle().take(width as usize * height as usize * 3).collect();
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.offset(x, y);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, color: [u8; 3]) {
        let i = self.offset(x, y);
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    /// Fills `[x0, x1) x [y0, y1)`, clipped to the image.
    pub fn fill_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, color: [u8; 3]) {
        let x0 = x0.clamp(0, self.width as i64) as u32;
        let x1 = x1.clamp(0, self.width as i64) as u32;
        let y0 = y0.clamp(0, self.height as i64) as u32;
        let y1 = y1.clamp(0, self.height as i64) as u32;
        for y in y0..y1 {
            for x in x0..x1 {
                self.put(x, y, color);
            }
        }
    }

    /// Copies the `[x0, x0 + w) x [y0, y0 + h)` region. The region must lie inside the image.
    pub fn sub_image(&self, x0: u32, y0: u32, w: u32, h: u32) -> Result<Self, IngestError> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(IngestError::InvalidImage(format!(
                "region {w}x{h} at ({x0}, {y0}) outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut pixels = Vec::with_capacity(w as usize * h as usize * 3);
        for y in y0..y0 + h {
            let start = self.offset(x0, y);
            pixels.extend_from_slice(&self.pixels[start..start + w as usize * 3]);
        }
        Ok(Self { width: w, height: h, pixels })
    }

    pub fn encode_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.pixels.len());
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn decode_ppm(bytes: &[u8]) -> Result<Self, String> {
        let mut cursor = 0usize;
        let mut token = || -> Result<String, String> {
            // whitespace and comments between header fields
            loop {
                match bytes.get(cursor) {
                    Some(b) if b.is_ascii_whitespace() => cursor += 1,
                    Some(b'#') => {
                        while bytes.get(cursor).is_some_and(|&b| b != b'\n') {
                            cursor += 1;
                        }
                    }
                    Some(_) => break,
                    None => return Err("truncated header".into()),
                }
            }
            let start = cursor;
            while bytes.get(cursor).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
                cursor += 1;
            }
            Ok(String::from_utf8_lossy(&bytes[start..cursor]).into_owned())
        };
        let magic = token()?;
        if magic != "P6" {
            return Err(format!("expected P6 magic, found {magic:?}"));
        }
        let mut number = |name: &str| -> Result<u32, String> {
            let t = token()?;
            t.parse::<u32>().map_err(|_| format!("bad {name} field {t:?}"))
        };
        let width = number("width")?;
        let height = number("height")?;
        let maxval = number("maxval")?;
        if maxval != 255 {
            return Err(format!("only 8-bit PPM (maxval 255) is supported, found {maxval}"));
        }
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cursor) {
            Some(b) if b.is_ascii_whitespace() => cursor += 1,
            _ => return Err("truncated header".into()),
        }
        let needed = width as usize * height as usize * 3;
        let data = &bytes[cursor..];
        if data.len() < needed {
            return Err(format!("truncated raster: {} of {needed} bytes", data.len()));
        }
        Self::new(width, height, data[..needed].to_vec()).map_err(|e| e.to_string())
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, String> {
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, self.width, self.height);
            encoder.set_color(png::ColorType::Rgb);
            encoder.set_depth(png::BitDepth::Eight);
            let mut writer = encoder.write_header().map_err(|e| e.to_string())?;
            writer.write_image_data(&self.pixels).map_err(|e| e.to_string())?;
        }
        Ok(out)
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, String> {
        let mut decoder = png::Decoder::new(Cursor::new(bytes));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
        let size = reader.output_buffer_size().ok_or("PNG too large")?;
        let mut buf = vec![0u8; size];
        let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
        buf.truncate(info.buffer_size());
        let pixels: Vec<u8> = match info.color_type {
            png::ColorType::Rgb => buf,
            png::ColorType::Rgba => buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
            png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g]).collect(),
            png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0]]).collect(),
            png::ColorType::Indexed => return Err("indexed PNG was not expanded".into()),
        };
        Self::new(info.width, info.height, pixels).map_err(|e| e.to_string())
    }

    /// Decodes by file extension (`.ppm` or `.png`, case-insensitive).
    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let format = ImageFormat::from_path(path).ok_or_else(|| IngestError::UnsupportedFormat(path.to_path_buf()))?;
        let bytes = std::fs::read(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
        let decoded = match format {
            ImageFormat::Ppm => Self::decode_ppm(&bytes),
            ImageFormat::Png => Self::decode_png(&bytes),
        };
        decoded.map_err(|reason| IngestError::Decode { path: path.to_path_buf(), reason })
    }

    pub fn write(&self, path: &Path) -> Result<(), IngestError> {
        let format = ImageFormat::from_path(path).ok_or_else(|| IngestError::UnsupportedFormat(path.to_path_buf()))?;
        let bytes = match format {
            ImageFormat::Ppm => self.encode_ppm(),
            ImageFormat::Png => {
                self.encode_png().map_err(|reason| IngestError::Decode { path: path.to_path_buf(), reason })?
            }
        };
        let io_err = |source| IngestError::Io { path: path.to_path_buf(), source };
        let mut file = std::fs::File::create(path).map_err(io_err)?;
        file.write_all(&bytes).map_err(io_err)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    Png,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "ppm" => Some(Self::Ppm),
            "png" => Some(Self::Png),
            _ => None,
        }
    }
}
