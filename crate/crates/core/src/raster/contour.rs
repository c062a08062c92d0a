//! Outer-boundary tracing of 8-connected foreground components.

use super::{BinaryMask, Dims, PixelCoord};

/// Ordered boundary pixels. Closed contours have positive signed area in
/// image coordinates (`x` right, `y` down), which is clockwise on screen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<PixelCoord>,
    pub closed: bool,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Twice the shoelace area.
    pub fn signed_area2(&self) -> i64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let a = self.points[i];
                let b = self.points[(i + 1) % n];
                a.x as i64 * b.y as i64 - b.x as i64 * a.y as i64
            })
            .sum()
    }
}

// Clockwise on screen, starting west.
const OFFSETS: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

fn offset_index(dx: i64, dy: i64) -> usize {
    OFFSETS
        .iter()
        .position(|&o| o == (dx, dy))
        .expect("offset between adjacent pixels")
}

/// Moore-neighbour tracing. `start` must be the first foreground pixel of
/// its component in raster order. Tracing stops when the walk is back at
/// `start` and about to step to the second pixel again.
fn trace_from(mask: &BinaryMask, start: PixelCoord) -> Vec<PixelCoord> {
    let fg = |x: i64, y: i64| mask.get_signed(x, y);
    let s = (start.x as i64, start.y as i64);
    let (mut cx, mut cy) = s;
    // backtrack direction: the west neighbour of the start is background
    let mut dir = 0usize;
    let mut points = vec![start];
    let limit = 8 * mask.dims().len() + 8;
    for _ in 0..limit {
        let mut next = None;
        for k in 1..=8 {
            let idx = (dir + k) % 8;
            let (nx, ny) = (cx + OFFSETS[idx].0, cy + OFFSETS[idx].1);
            if fg(nx, ny) {
                let prev = OFFSETS[(dir + k - 1) % 8];
                next = Some((nx, ny, offset_index(cx + prev.0 - nx, cy + prev.1 - ny)));
                break;
            }
        }
        let Some((nx, ny, ndir)) = next else {
            return points;
        };
        if (cx, cy) == s && points.len() > 1 {
            let second = points[1];
            if (nx, ny) == (second.x as i64, second.y as i64) {
                points.pop();
                return points;
            }
        }
        cx = nx;
        cy = ny;
        dir = ndir;
        points.push(PixelCoord::new(cx as usize, cy as usize));
    }
    unreachable!("contour tracing did not terminate");
}

/// Removes cyclic out-and-back spurs (`p[i] == p[i + 2]`).
fn prune_spurs(points: Vec<PixelCoord>) -> Vec<PixelCoord> {
    let mut stack: Vec<PixelCoord> = Vec::with_capacity(points.len());
    for p in points {
        if stack.last() == Some(&p) {
            continue;
        }
        if stack.len() >= 2 && stack[stack.len() - 2] == p {
            stack.pop();
            continue;
        }
        stack.push(p);
    }
    loop {
        let n = stack.len();
        if n < 3 {
            return stack;
        }
        if stack[n - 1] == stack[0] {
            stack.pop();
        } else if stack[n - 2] == stack[0] {
            stack.pop();
        } else if stack[n - 1] == stack[1] {
            stack.remove(0);
        } else {
            return stack;
        }
    }
}

/// One closed contour per 8-connected foreground component, tracing its
/// outer boundary. Components whose boundary collapses to fewer than three
/// pixels after spur removal (isolated pixels, one-pixel-thick strokes)
/// are skipped.
pub fn trace_contours(mask: &BinaryMask) -> Vec<Contour> {
    let dims = mask.dims();
    let mut labeled = vec![false; dims.len()];
    let mut contours = Vec::new();
    let mut stack = Vec::new();
    for y in 0..dims.height {
        for x in 0..dims.width {
            let i = dims.index(x, y);
            if !mask.bits()[i] || labeled[i] {
                continue;
            }
            let points = prune_spurs(trace_from(mask, PixelCoord::new(x, y)));
            if points.len() >= 3 {
                let mut c = Contour { points, closed: true };
                if c.signed_area2() < 0 {
                    c.points.reverse();
                }
                contours.push(c);
            }
            // flood the component so it is traced once
            labeled[i] = true;
            stack.push((x as i64, y as i64));
            while let Some((px, py)) = stack.pop() {
                for (dx, dy) in OFFSETS {
                    let (nx, ny) = (px + dx, py + dy);
                    if dims.contains(nx, ny) {
                        let j = dims.index(nx as usize, ny as usize);
                        if mask.bits()[j] && !labeled[j] {
                            labeled[j] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
        }
    }
    contours
}

pub fn rasterize_contours(contours: &[Contour], dims: Dims) -> BinaryMask {
    let mut mask = BinaryMask::new(dims);
    for c in contours {
        for p in &c.points {
            mask.set(p.x, p.y, true);
        }
    }
    mask
}
