//! Binary PGM (P5) emission for rendering forward-distribution means.

use crate::error::{DicaError, Result};
use std::path::Path;

/// Render a `[0,1]` vector as P5 bytes, maxval 255, one byte per pixel,
/// `round(255·value)` with half rounding up. Values are clamped to `[0,1]`
/// so rounding slack upstream cannot wrap a byte.
pub fn pgm_bytes(values: &[f64], width: usize, height: usize) -> Result<Vec<u8>> {
    if values.len() != width * height {
        return Err(DicaError::Dimension(format!(
            "{} values for a {width}x{height} image",
            values.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(values.iter().map(|&v| (255.0 * v.clamp(0.0, 1.0)).round() as u8));
    Ok(out)
}

pub fn write_pgm(
    values: &[f64],
    width: usize,
    height: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    std::fs::write(path, pgm_bytes(values, width, height)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_bytes() {
        let bytes = pgm_bytes(&[0.0, 0.25, 0.5, 1.0], 2, 2).unwrap();
        assert_eq!(&bytes[..12], b"P5\n2 2\n255\n\x00");
        assert_eq!(&bytes[11..], &[0, 64, 128, 255]);
    }

    #[test]
    fn half_rounds_up() {
        let bytes = pgm_bytes(&[0.5; 4], 2, 2).unwrap();
        assert!(bytes[11..].iter().all(|&b| b == 128));
    }

    #[test]
    fn full_white() {
        let bytes = pgm_bytes(&[1.0; 6], 3, 2).unwrap();
        assert!(bytes[11..].iter().all(|&b| b == 255));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(matches!(
            pgm_bytes(&[0.0; 3], 2, 2),
            Err(DicaError::Dimension(_))
        ));
    }
}
