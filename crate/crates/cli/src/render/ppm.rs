use super::colormap::{diverging, Rgb};

pub const BACKGROUND: Rgb = [64, 64, 64];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridLayout {
    pub columns: usize,
    /// Pixels per weight.
    pub cell: usize,
    /// Background pixels around and between tiles.
    pub gap: usize,
}

/// Binary PPM (P6) of filters tiled row-major in the given order, each as a
/// 3x3 block colored on `[-max_abs, max_abs]`. `comments` go into the
/// header, one `#` line each.
pub fn filter_grid(filters: &[[f32; 9]], max_abs: f64, layout: GridLayout, comments: &[String]) -> Vec<u8> {
    let cols = layout.columns.max(1).min(filters.len().max(1));
    let rows = filters.len().div_ceil(cols).max(1);
    let tile = 3 * layout.cell;
    let width = cols * tile + (cols + 1) * layout.gap;
    let height = rows * tile + (rows + 1) * layout.gap;

    let mut pixels = vec![BACKGROUND; width * height];
    for (k, f) in filters.iter().enumerate() {
        let x0 = layout.gap + (k % cols) * (tile + layout.gap);
        let y0 = layout.gap + (k / cols) * (tile + layout.gap);
        for (j, &w) in f.iter().enumerate() {
            let c = diverging(w as f64, max_abs);
            let (cx, cy) = (x0 + (j % 3) * layout.cell, y0 + (j / 3) * layout.cell);
            for y in cy..cy + layout.cell {
                pixels[y * width + cx..y * width + cx + layout.cell].fill(c);
            }
        }
    }

    let mut out = b"P6\n".to_vec();
    for c in comments {
        for line in c.lines() {
            out.extend_from_slice(format!("# {line}\n").as_bytes());
        }
    }
    out.extend_from_slice(format!("{width} {height}\n255\n").as_bytes());
    out.extend(pixels.iter().flatten());
    out
}
