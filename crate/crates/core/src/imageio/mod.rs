//! Grayscale frame loading: PNM decoding, bilinear resampling to n×n,
//! flattening to column vectors and labeled dataset directories.

mod dataset;
mod pnm;

use std::path::PathBuf;

use thiserror::Error;

use crate::linalg::Vector;

pub use dataset::{
    load_image_vector, scan_dataset, scan_dataset_with, DatasetManifest, LabeledSample, IMAGE_EXTENSIONS,
};
pub use pnm::{read_pnm, write_pnm, PnmEncoding};

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("malformed PNM: {0}")]
    Format(String),
    #[error("unsupported maxval {0} (must be 1..=65535)")]
    UnsupportedMaxval(u64),
    #[error("image is {width}x{height}, expected a square image")]
    NotSquare { width: usize, height: usize },
    #[error("invalid image: {0}")]
    Invalid(String),
    #[error("no images found under {}", .0.display())]
    EmptyDataset(PathBuf),
    #[error("invalid dataset: {0}")]
    InvalidManifest(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<ImageError>,
    },
}

pub type Result<T, E = ImageError> = std::result::Result<T, E>;

/// Grayscale raster with intensities normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    maxval: u16,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, maxval: u16, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(ImageError::Invalid("zero-sized image".into()));
        }
        if maxval == 0 {
            return Err(ImageError::UnsupportedMaxval(0));
        }
        if width * height != pixels.len() {
            return Err(ImageError::Invalid(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(ImageError::Invalid(format!("intensity {p} outside [0, 1]")));
        }
        Ok(GrayImage { width, height, maxval, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn maxval(&self) -> u16 {
        self.maxval
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }
}

/// Resamples to `n`×`n`; see [`resize`].
pub fn resize_bilinear(img: &GrayImage, n: usize) -> GrayImage {
    resize(img, n, n)
}

// Source coordinate for output index `i` under corner alignment.
fn source_coord(i: usize, len_in: usize, len_out: usize) -> (usize, usize, f64) {
    if len_out == 1 || len_in == 1 {
        return (0, 0, 0.0);
    }
    let s = (i * (len_in - 1)) as f64 / (len_out - 1) as f64;
    let lo = (s.floor() as usize).min(len_in - 1);
    let hi = (lo + 1).min(len_in - 1);
    (lo, hi, s - lo as f64)
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    // clamp keeps the result inside [min(a,b), max(a,b)] despite rounding
    (a + (b - a) * t).clamp(a.min(b), a.max(b))
}

/// Corner-aligned bilinear resampling.
///
/// Output column `x` samples input column `x·(w_in−1)/(w_out−1)` (0 when the
/// output is one pixel wide), and likewise for rows. Intensities are not
/// re-quantized. Same-size input is returned unchanged.
pub fn resize(img: &GrayImage, width: usize, height: usize) -> GrayImage {
    assert!(width >= 1 && height >= 1, "target size must be positive");
    if width == img.width && height == img.height {
        return img.clone();
    }
    let cols: Vec<_> = (0..width).map(|x| source_coord(x, img.width, width)).collect();
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let (y0, y1, fy) = source_coord(y, img.height, height);
        for &(x0, x1, fx) in &cols {
            let top = lerp(img.pixel(x0, y0), img.pixel(x1, y0), fx);
            let bottom = lerp(img.pixel(x0, y1), img.pixel(x1, y1), fx);
            pixels.push(lerp(top, bottom, fy));
        }
    }
    GrayImage { width, height, maxval: img.maxval, pixels }
}

/// Row-major scan of a square image into a length-n² vector.
pub fn flatten(img: &GrayImage) -> Result<Vector> {
    if img.width != img.height {
        return Err(ImageError::NotSquare { width: img.width, height: img.height });
    }
    Ok(Vector::new(img.pixels.clone()).expect("pixels are finite and non-empty"))
}

/// Inverse of [`flatten`].
pub fn unflatten(v: &Vector, side: usize, maxval: u16) -> Result<GrayImage> {
    if side * side != v.len() {
        return Err(ImageError::Invalid(format!(
            "vector of length {} is not a {side}x{side} image",
            v.len()
        )));
    }
    GrayImage::new(side, side, maxval, v.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, px: &[f64]) -> GrayImage {
        GrayImage::new(w, h, 255, px.to_vec()).unwrap()
    }

    #[test]
    fn resize_same_size_is_identity() {
        let a = img(3, 3, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        let b = resize_bilinear(&a, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn resize_constant_field() {
        let a = img(5, 3, &[0.4; 15]);
        for n in [1, 2, 7, 16] {
            assert!(resize_bilinear(&a, n).pixels().iter().all(|&p| p == 0.4));
        }
    }

    #[test]
    fn resize_row_upsample() {
        // x = 0,1,2 map to 0, 0.5, 1 with scale (2-1)/(3-1)
        let a = img(2, 1, &[0.0, 1.0]);
        let b = resize(&a, 3, 1);
        assert_eq!(b.pixels(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn resize_to_single_pixel_takes_corner() {
        let a = img(2, 2, &[0.25, 1.0, 1.0, 1.0]);
        assert_eq!(resize_bilinear(&a, 1).pixels(), &[0.25]);
    }

    #[test]
    fn resize_downsample_corners_preserved() {
        let px: Vec<f64> = (0..16).map(|i| i as f64 / 15.0).collect();
        let a = img(4, 4, &px);
        let b = resize_bilinear(&a, 2);
        assert_eq!(b.pixels(), &[px[0], px[3], px[12], px[15]]);
    }

    #[test]
    fn flatten_examples() {
        let a = img(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(flatten(&a).unwrap().as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(flatten(&img(3, 3, &[0.0; 9])).unwrap(), Vector::zeros(9));
        let one = img(1, 1, &[128.0 / 255.0]);
        assert!((flatten(&one).unwrap()[0] - 128.0 / 255.0).abs() < 1e-15);
        assert!(matches!(flatten(&img(2, 1, &[0.0, 0.0])), Err(ImageError::NotSquare { .. })));
    }

    #[test]
    fn unflatten_inverts_flatten() {
        let a = img(2, 2, &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(unflatten(&flatten(&a).unwrap(), 2, 255).unwrap(), a);
        assert!(unflatten(&Vector::zeros(3), 2, 255).is_err());
    }

    #[test]
    fn new_validates() {
        assert!(GrayImage::new(1, 1, 255, vec![1.5]).is_err());
        assert!(GrayImage::new(0, 1, 255, vec![]).is_err());
        assert!(GrayImage::new(2, 1, 255, vec![0.0]).is_err());
    }
}
