//! On-disk formats: T3B tensors, 8-bit PGM/PPM images and the key=value
//! metadata sidecar.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};
use tgkt_core::{Matrix, Tensor3};

const MAGIC: &[u8; 4] = b"T3B1";

/// Header `T3B1`, then `ℓ, m, n` as little-endian `u32`, then the entries
/// as little-endian `f64` in storage order (face by face, column-major).
pub fn encode_t3b(t: &Tensor3) -> Result<Vec<u8>> {
    let (l, m, n) = t.dims();
    let mut out = Vec::with_capacity(16 + 8 * t.len());
    out.extend_from_slice(MAGIC);
    for d in [l, m, n] {
        let d = u32::try_from(d).context("tensor dimension exceeds u32")?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in t.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_t3b(bytes: &[u8]) -> Result<Tensor3> {
    ensure!(bytes.len() >= 16 && &bytes[..4] == MAGIC, "not a T3B1 file");
    let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (l, m, n) = (dim(0), dim(1), dim(2));
    let count = l
        .checked_mul(m)
        .and_then(|x| x.checked_mul(n))
        .context("T3B dimensions overflow")?;
    let body = &bytes[16..];
    ensure!(
        body.len() == 8 * count,
        "T3B body holds {} bytes, expected {} for {l}x{m}x{n}",
        body.len(),
        8 * count
    );
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Tensor3::from_vec(l, m, n, data)?)
}

pub fn write_t3b(path: &Path, t: &Tensor3) -> Result<()> {
    std::fs::write(path, encode_t3b(t)?).with_context(|| format!("writing {}", path.display()))
}

pub fn read_t3b(path: &Path) -> Result<Tensor3> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .with_context(|| format!("reading {}", path.display()))?;
    decode_t3b(&bytes).with_context(|| format!("decoding {}", path.display()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageKind {
    Gray,
    Rgb,
}

impl ImageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ImageKind::Gray => "gray",
            ImageKind::Rgb => "rgb",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gray" => Ok(ImageKind::Gray),
            "rgb" => Ok(ImageKind::Rgb),
            _ => bail!("unknown image kind {s:?}"),
        }
    }
}

/// Reads a binary PGM (one frame) or PPM (three frames, R G B) with values
/// scaled to `[0, 1]`.
pub fn read_image(path: &Path) -> Result<(ImageKind, Vec<Matrix>)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let img = image::load(BufReader::new(file), ImageFormat::Pnm)
        .with_context(|| format!("decoding {}", path.display()))?;
    let to_matrix = |w: u32, h: u32, get: &dyn Fn(u32, u32) -> u8| {
        Matrix::from_fn(h as usize, w as usize, |r, c| {
            get(c as u32, r as u32) as f64 / 255.0
        })
    };
    match img {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            Ok((ImageKind::Gray, vec![to_matrix(w, h, &|x, y| buf.get_pixel(x, y)[0])]))
        }
        DynamicImage::ImageRgb8(buf) => {
            let (w, h) = buf.dimensions();
            let frames = (0..3)
                .map(|ch| to_matrix(w, h, &|x, y| buf.get_pixel(x, y)[ch]))
                .collect();
            Ok((ImageKind::Rgb, frames))
        }
        other => bail!(
            "{}: only 8-bit gray or RGB images are supported, got {:?}",
            path.display(),
            other.color()
        ),
    }
}

/// `[0, 1]` to 8 bits, clamping and rounding half to even.
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v.clamp(0.0, 1.0) * 255.0).round_ties_even() as u8
}

fn write_pnm(path: &Path, w: usize, h: usize, data: &[u8], rgb: bool) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    let (subtype, color) = if rgb {
        (PnmSubtype::Pixmap(SampleEncoding::Binary), ExtendedColorType::Rgb8)
    } else {
        (PnmSubtype::Graymap(SampleEncoding::Binary), ExtendedColorType::L8)
    };
    PnmEncoder::new(&mut out)
        .with_subtype(subtype)
        .write_image(data, w as u32, h as u32, color)
        .with_context(|| format!("encoding {}", path.display()))?;
    out.flush()?;
    Ok(())
}

pub fn write_pgm(path: &Path, img: &Matrix) -> Result<()> {
    let (h, w) = (img.rows(), img.cols());
    let data: Vec<u8> = (0..h)
        .flat_map(|r| (0..w).map(move |c| (r, c)))
        .map(|(r, c)| quantize(img[(r, c)]))
        .collect();
    write_pnm(path, w, h, &data, false)
}

pub fn write_ppm(path: &Path, channels: &[Matrix]) -> Result<()> {
    ensure!(channels.len() == 3, "a PPM needs three channels, got {}", channels.len());
    let (h, w) = (channels[0].rows(), channels[0].cols());
    ensure!(
        channels.iter().all(|c| c.rows() == h && c.cols() == w),
        "channel sizes differ"
    );
    let mut data = Vec::with_capacity(3 * w * h);
    for r in 0..h {
        for c in 0..w {
            data.extend(channels.iter().map(|ch| quantize(ch[(r, c)])));
        }
    }
    write_pnm(path, w, h, &data, true)
}

/// Plain `key=value` lines; `#` starts a comment line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Meta {
    entries: Vec<(String, String)>,
}

impl Meta {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .with_context(|| format!("metadata is missing {key:?}"))
    }

    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|e| anyhow::anyhow!("metadata {key}={raw}: {e}"))
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn from_text(text: &str) -> Result<Meta> {
        let mut meta = Meta::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("metadata line {}: expected key=value", no + 1))?;
            meta.set(k.trim(), v.trim());
        }
        Ok(meta)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Meta> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Meta::from_text(&text)
    }
}
