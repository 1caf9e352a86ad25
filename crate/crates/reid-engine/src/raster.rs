//! Small 8-bit raster types with lossless PPM/PGM containers.
//!
//! Images are RGB (`RgbRaster`, stored as binary P6) and part masks are
//! grayscale (`GrayRaster`, stored as binary P5, nonzero = membership).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbRaster {
    width: usize,
    height: usize,
    data: Vec<u8>, // 3 bytes per pixel, row-major
}

impl RgbRaster {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height * 3],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn flip_horizontal(&self) -> RgbRaster {
        let mut out = RgbRaster::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(self.width - 1 - x, y, self.get(x, y));
            }
        }
        out
    }

    /// Per-channel block-mean pooling over a `grid x grid` layout, scaled to
    /// [0, 1]. Gives a fixed `3 * grid * grid`-dimensional descriptor.
    pub fn block_mean_features(&self, grid: usize) -> Vec<f64> {
        let mut out = vec![0.0; 3 * grid * grid];
        let mut counts = vec![0usize; grid * grid];
        for y in 0..self.height {
            let by = (y * grid / self.height).min(grid - 1);
            for x in 0..self.width {
                let bx = (x * grid / self.width).min(grid - 1);
                let b = by * grid + bx;
                let px = self.get(x, y);
                for c in 0..3 {
                    out[b * 3 + c] += px[c] as f64;
                }
                counts[b] += 1;
            }
        }
        for b in 0..grid * grid {
            if counts[b] > 0 {
                for c in 0..3 {
                    out[b * 3 + c] /= 255.0 * counts[b] as f64;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayRaster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayRaster {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn nonzero_pixels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) != 0 {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

fn write_pnm(path: &Path, magic: &str, w: usize, h: usize, data: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(format!("{}\n{} {}\n255\n", magic, w, h).as_bytes())
        .map_err(|e| Error::io(path, e))?;
    out.write_all(data).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

fn read_pnm(path: &Path, expect_magic: &str, channels: usize) -> Result<(usize, usize, Vec<u8>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;

    // Header: magic, width, height, maxval as whitespace-separated tokens.
    let mut pos = 0usize;
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(path, "truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if tokens[0] != expect_magic {
        return Err(Error::format(
            path,
            format!("expected {} file, found {}", expect_magic, tokens[0]),
        ));
    }
    let w: usize = tokens[1]
        .parse()
        .map_err(|_| Error::format(path, "bad width"))?;
    let h: usize = tokens[2]
        .parse()
        .map_err(|_| Error::format(path, "bad height"))?;
    if tokens[3] != "255" {
        return Err(Error::format(path, "only maxval 255 supported"));
    }
    pos += 1; // single whitespace after maxval
    let need = w * h * channels;
    if bytes.len() < pos + need {
        return Err(Error::format(path, "truncated pixel data"));
    }
    Ok((w, h, bytes[pos..pos + need].to_vec()))
}

pub fn write_ppm(path: &Path, raster: &RgbRaster) -> Result<()> {
    write_pnm(path, "P6", raster.width, raster.height, &raster.data)
}

pub fn read_ppm(path: &Path) -> Result<RgbRaster> {
    let (width, height, data) = read_pnm(path, "P6", 3)?;
    Ok(RgbRaster {
        width,
        height,
        data,
    })
}

pub fn write_pgm(path: &Path, raster: &GrayRaster) -> Result<()> {
    write_pnm(path, "P5", raster.width, raster.height, &raster.data)
}

pub fn read_pgm(path: &Path) -> Result<GrayRaster> {
    let (width, height, data) = read_pnm(path, "P5", 1)?;
    Ok(GrayRaster {
        width,
        height,
        data,
    })
}
