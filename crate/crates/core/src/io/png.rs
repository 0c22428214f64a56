//! Diagnostic heatmaps with a fixed perceptual colormap and axis ticks.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};

/// Viridis control points.
const VIRIDIS: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

pub fn colormap(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (VIRIDIS.len() - 1) as f64;
    let i = (x.floor() as usize).min(VIRIDIS.len() - 2);
    let f = x - i as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = (VIRIDIS[i][c] as f64 * (1.0 - f) + VIRIDIS[i + 1][c] as f64 * f).round() as u8;
    }
    out
}

/// 3×5 glyphs for digits, '.', '-', 'e' and 'k'.
fn glyph(ch: char) -> Option<[u8; 5]> {
    Some(match ch {
        '0' => [0b111, 0b101, 0b101, 0b101, 0b111],
        '1' => [0b010, 0b110, 0b010, 0b010, 0b111],
        '2' => [0b111, 0b001, 0b111, 0b100, 0b111],
        '3' => [0b111, 0b001, 0b111, 0b001, 0b111],
        '4' => [0b101, 0b101, 0b111, 0b001, 0b001],
        '5' => [0b111, 0b100, 0b111, 0b001, 0b111],
        '6' => [0b111, 0b100, 0b111, 0b101, 0b111],
        '7' => [0b111, 0b001, 0b010, 0b010, 0b010],
        '8' => [0b111, 0b101, 0b111, 0b101, 0b111],
        '9' => [0b111, 0b101, 0b111, 0b001, 0b111],
        '.' => [0b000, 0b000, 0b000, 0b000, 0b010],
        '-' => [0b000, 0b000, 0b111, 0b000, 0b000],
        'e' => [0b000, 0b111, 0b111, 0b100, 0b111],
        'k' => [0b100, 0b101, 0b110, 0b101, 0b101],
        _ => return None,
    })
}

const SCALE: u32 = 2;

fn text_width(s: &str) -> u32 {
    s.chars().count() as u32 * 4 * SCALE
}

fn draw_text(img: &mut RgbImage, x: i64, y: i64, s: &str, color: Rgb<u8>) {
    for (n, ch) in s.chars().enumerate() {
        let Some(rows) = glyph(ch) else { continue };
        for (r, bits) in rows.iter().enumerate() {
            for c in 0..3 {
                if bits & (0b100 >> c) == 0 {
                    continue;
                }
                for dy in 0..SCALE as i64 {
                    for dx in 0..SCALE as i64 {
                        let px = x + (n as i64 * 4 + c) * SCALE as i64 + dx;
                        let py = y + r as i64 * SCALE as i64 + dy;
                        if px >= 0 && py >= 0 && (px as u32) < img.width() && (py as u32) < img.height() {
                            img.put_pixel(px as u32, py as u32, color);
                        }
                    }
                }
            }
        }
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if a >= 1e5 || a < 1e-2 {
        let s = format!("{v:.1e}");
        s.replace("e0", "e").replace("e-0", "e-")
    } else if a >= 1e3 {
        format!("{:.1}k", v / 1e3)
    } else if a >= 10.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

#[derive(Debug, Clone, Default)]
pub struct Heatmap<'a> {
    /// `values[x * y_axis.len() + y]`; x runs left to right, y bottom to top.
    pub values: &'a [f64],
    pub x_axis: &'a [f64],
    pub y_axis: &'a [f64],
    /// Cell to mark with a crosshair.
    pub marker: Option<(usize, usize)>,
    /// Map through ln(1 + v/scale) before colouring.
    pub log_scale: bool,
}

/// Renders the map, one block of pixels per value, with tick labels
/// at the ends and middle of each axis.
pub fn write_heatmap(path: &Path, map: &Heatmap) -> Result<()> {
    let (nx, ny) = (map.x_axis.len(), map.y_axis.len());
    if nx == 0 || ny == 0 || map.values.len() != nx * ny {
        return Err(Error::Shape(format!(
            "heatmap of {} values for {nx}×{ny} axes",
            map.values.len()
        )));
    }
    let cw = (480 / nx).clamp(1, 24) as u32;
    let ch = (480 / ny).clamp(1, 24) as u32;
    let (pw, ph) = (nx as u32 * cw, ny as u32 * ch);
    let (left, bottom, pad) = (60u32, 24u32, 8u32);
    let mut img = RgbImage::from_pixel(pw + left + pad, ph + bottom + pad, Rgb([255, 255, 255]));
    let finite: Vec<f64> = map.values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tf = |v: f64| {
        if !v.is_finite() {
            return if v > 0.0 { 1.0 } else { 0.0 };
        }
        if hi <= lo {
            return 0.5;
        }
        let t = (v - lo) / (hi - lo);
        if map.log_scale {
            (1.0 + 99.0 * t).ln() / 100f64.ln()
        } else {
            t
        }
    };
    for x in 0..nx {
        for y in 0..ny {
            let c = colormap(tf(map.values[x * ny + y]));
            let y0 = pad + (ny - 1 - y) as u32 * ch;
            for dy in 0..ch {
                for dx in 0..cw {
                    img.put_pixel(left + x as u32 * cw + dx, y0 + dy, Rgb(c));
                }
            }
        }
    }
    if let Some((mx, my)) = map.marker {
        let red = Rgb([230, 30, 30]);
        let cx = left + mx as u32 * cw + cw / 2;
        let cy = pad + (ny - 1 - my) as u32 * ch + ch / 2;
        for x in left..left + pw {
            img.put_pixel(x, cy, red);
        }
        for y in pad..pad + ph {
            img.put_pixel(cx, y, red);
        }
    }
    let black = Rgb([0, 0, 0]);
    for i in [0, nx / 2, nx - 1] {
        let label = tick_label(map.x_axis[i]);
        let cx = (left + i as u32 * cw + cw / 2) as i64;
        img.put_pixel(cx as u32, pad + ph, black);
        draw_text(
            &mut img,
            cx - text_width(&label) as i64 / 2,
            (pad + ph + 6) as i64,
            &label,
            black,
        );
    }
    for j in [0, ny / 2, ny - 1] {
        let label = tick_label(map.y_axis[j]);
        let cy = (pad + (ny - 1 - j) as u32 * ch + ch / 2) as i64;
        img.put_pixel(left - 1, cy as u32, black);
        draw_text(
            &mut img,
            left as i64 - 4 - text_width(&label) as i64,
            cy - 5,
            &label,
            black,
        );
    }
    let mut bytes = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut bytes), image::ImageFormat::Png)
        .map_err(|e| Error::Image(e.to_string()))?;
    super::write_atomic(path, &bytes)
}
