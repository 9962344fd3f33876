use std::io::Cursor;

use image::{GrayImage, ImageFormat, Rgb, RgbImage};

use super::{ActivationMap, BLUE_TO_RED};
use crate::error::{Error, Result};

pub const DEFAULT_OPACITY: f64 = 0.5;

fn colour(v: f64) -> [u8; 3] {
    let idx = (v.clamp(0.0, 1.0) * 255.0).round() as usize;
    BLUE_TO_RED[idx]
}

/// Colour-maps the normalised map and alpha-blends it over `base`. The map
/// must already have the base image's dimensions.
pub fn render_overlay(map: &ActivationMap, base: &GrayImage, opacity: f64) -> Result<RgbImage> {
    let (h, w) = map.normalized.dim();
    if (base.width() as usize, base.height() as usize) != (w, h) {
        return Err(Error::DimensionMismatch(format!(
            "map is {h}x{w} but base image is {}x{}",
            base.height(),
            base.width()
        )));
    }
    if !(0.0..=1.0).contains(&opacity) {
        return Err(Error::InvalidValue(format!("opacity {opacity} outside [0, 1]")));
    }
    Ok(RgbImage::from_fn(base.width(), base.height(), |x, y| {
        let gray = base.get_pixel(x, y)[0] as f64;
        let c = colour(map.normalized[[y as usize, x as usize]]);
        Rgb(c.map(|ch| ((1.0 - opacity) * gray + opacity * ch as f64).round() as u8))
    }))
}

pub fn encode_png(image: &RgbImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    image.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colour(1.0), [255, 0, 0]);
        assert_eq!(colour(0.0), [0, 0, 255]);
    }

    #[test]
    fn full_opacity_shows_colormap() {
        let map = ActivationMap::from_raw(array![[0.0, 1.0]], 0);
        let base = GrayImage::from_pixel(2, 1, image::Luma([90]));
        let out = render_overlay(&map, &base, 1.0).unwrap();
        assert_eq!(out.get_pixel(0, 0).0, [0, 0, 255]);
        assert_eq!(out.get_pixel(1, 0).0, [255, 0, 0]);
    }

    #[test]
    fn zero_opacity_is_the_base_image() {
        let map = ActivationMap::from_raw(Array2::from_shape_fn((3, 4), |(y, x)| (x * y) as f64), 0);
        let base = GrayImage::from_fn(4, 3, |x, y| image::Luma([(x * 40 + y * 7) as u8]));
        let out = render_overlay(&map, &base, 0.0).unwrap();
        for (x, y, p) in out.enumerate_pixels() {
            let g = base.get_pixel(x, y)[0];
            assert_eq!(p.0, [g, g, g]);
        }
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let map = ActivationMap::from_raw(Array2::zeros((2, 2)), 0);
        let base = GrayImage::new(3, 2);
        assert!(render_overlay(&map, &base, 0.5).is_err());
    }

    #[test]
    fn png_encoding_is_deterministic() {
        let img = RgbImage::from_fn(5, 5, |x, y| Rgb([x as u8 * 50, y as u8 * 50, 7]));
        assert_eq!(encode_png(&img).unwrap(), encode_png(&img).unwrap());
    }
}
