//! Hilbert-curve ordering for insertion locality.

use crate::geometry::Point;

const ORDER: u32 = 16;

/// Sorts vertex slots along a Hilbert curve over their bounding box.
pub(super) fn sort_slots(slots: &mut [u32], point: impl Fn(u32) -> Point) {
    if slots.len() < 3 {
        return;
    }
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &s in slots.iter() {
        let p = point(s);
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let side = (max_x - min_x).max(max_y - min_y);
    let cells = ((1u32 << ORDER) - 1) as f64;
    let scale = if side > 0.0 { cells / side } else { 0.0 };
    let mut keyed: Vec<(u64, u32)> = slots
        .iter()
        .map(|&s| {
            let p = point(s);
            let gx = ((p.x - min_x) * scale).clamp(0.0, cells) as u32;
            let gy = ((p.y - min_y) * scale).clamp(0.0, cells) as u32;
            (hilbert_index(gx, gy), s)
        })
        .collect();
    keyed.sort_unstable();
    for (dst, (_, s)) in slots.iter_mut().zip(keyed) {
        *dst = s;
    }
}

/// Position of grid cell `(x, y)` along the Hilbert curve of order `ORDER`.
fn hilbert_index(mut x: u32, mut y: u32) -> u64 {
    let n = 1u32 << ORDER;
    let mut d = 0u64;
    let mut s = n / 2;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}
