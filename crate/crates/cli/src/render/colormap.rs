pub type Rgb = [u8; 3];

pub const BLUE: Rgb = [59, 76, 192];
pub const WHITE: Rgb = [255, 255, 255];
pub const RED: Rgb = [180, 4, 38];

fn lerp(a: Rgb, b: Rgb, t: f64) -> Rgb {
    std::array::from_fn(|i| (a[i] as f64 + (b[i] as f64 - a[i] as f64) * t).round() as u8)
}

/// Blue-white-red map of `v` on the symmetric range `[-max_abs, max_abs]`.
/// A zero range maps everything to white.
pub fn diverging(v: f64, max_abs: f64) -> Rgb {
    if !(max_abs > 0.0) || !v.is_finite() {
        return WHITE;
    }
    let t = (v / max_abs).clamp(-1.0, 1.0);
    if t < 0.0 {
        lerp(WHITE, BLUE, -t)
    } else {
        lerp(WHITE, RED, t)
    }
}

/// White-to-red map of `v` on `[0, max]`.
pub fn sequential(v: f64, max: f64) -> Rgb {
    if !(max > 0.0) || !v.is_finite() {
        return WHITE;
    }
    lerp(WHITE, RED, (v / max).clamp(0.0, 1.0))
}

pub fn hex(c: Rgb) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}
