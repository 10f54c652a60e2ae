use super::GrayImage;
use crate::error::{Error, Result};

pub const SSIM_WINDOW: usize = 8;

const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Mean structural similarity over all 8x8 windows (stride 1), on a 0..100
/// scale.
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    let rows = ssim_rows(a, b)?;
    Ok(rows.iter().sum::<f64>() / rows.len() as f64)
}

/// Mean similarity of the windows starting on each row, 0..100 scale.
pub fn ssim_rows(a: &GrayImage, b: &GrayImage) -> Result<Vec<f64>> {
    a.check_same_size(b)?;
    let w = SSIM_WINDOW;
    if a.width() < w || a.height() < w {
        return Err(Error::Image(format!(
            "image smaller than the {w}x{w} window"
        )));
    }
    let n = (w * w) as f64;
    let mut rows = Vec::with_capacity(a.height() - w + 1);
    for y0 in 0..=a.height() - w {
        let mut acc = 0.0;
        for x0 in 0..=a.width() - w {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for y in y0..y0 + w {
                for x in x0..x0 + w {
                    let (p, q) = (a.get(x, y) as f64, b.get(x, y) as f64);
                    sa += p;
                    sb += q;
                    saa += p * p;
                    sbb += q * q;
                    sab += p * q;
                }
            }
            let (ma, mb) = (sa / n, sb / n);
            let va = (saa - n * ma * ma) / (n - 1.0);
            let vb = (sbb - n * mb * mb) / (n - 1.0);
            let cov = (sab - n * ma * mb) / (n - 1.0);
            acc += ((2.0 * ma * mb + C1) * (2.0 * cov + C2))
                / ((ma * ma + mb * mb + C1) * (va + vb + C2));
        }
        rows.push(100.0 * acc / (a.width() - w + 1) as f64);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::fixture_image;

    #[test]
    fn identity_and_symmetry() {
        let a = fixture_image(32);
        assert!((ssim(&a, &a).unwrap() - 100.0).abs() < 1e-9);
        let b = GrayImage::from_fn(32, 32, |x, y| {
            a.get(x, y).saturating_add(((x * y) % 7) as u8)
        })
        .unwrap();
        assert_eq!(ssim(&a, &b).unwrap(), ssim(&b, &a).unwrap());
        assert!(ssim(&a, &b).unwrap() < 100.0);
    }

    #[test]
    fn inverted_scores_low() {
        let a = fixture_image(64);
        assert!(ssim(&a, &a.inverted()).unwrap() < 50.0);
    }

    #[test]
    fn size_checks() {
        let a = fixture_image(16);
        assert!(ssim(&a, &fixture_image(17)).is_err());
        let tiny = GrayImage::new(4, 4, vec![0; 16]).unwrap();
        assert!(ssim(&tiny, &tiny).is_err());
    }
}
