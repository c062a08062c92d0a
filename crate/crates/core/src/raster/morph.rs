//! Square-window grey morphology and Chebyshev mask dilation.
//!
//! Windows are clipped at the raster border and nodata cells are ignored.
//! Both operations are separable, and each 1-D pass uses a monotone deque
//! so the cost per pixel does not depend on the window size.

use std::collections::VecDeque;

use super::{BinaryMask, Heightfield};

/// Sliding extremum over `[i - half, i + half]` clipped to the slice.
/// `better(a, b)` is true when `a` should replace `b` as the extremum.
fn sliding_extremum(src: &[f64], half: usize, out: &mut [f64], better: impl Fn(f64, f64) -> bool) {
    let n = src.len();
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(2 * half + 2);
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            let v = src[next];
            while deque.back().is_some_and(|&j| !better(src[j], v)) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while deque.front().is_some_and(|&j| j < lo) {
            deque.pop_front();
        }
        out[i] = src[*deque.front().expect("window is never empty")];
    }
}

fn separable(field: &Heightfield, half: usize, fill: f64, better: impl Fn(f64, f64) -> bool + Copy) -> Heightfield {
    if half == 0 {
        return field.clone();
    }
    let dims = field.dims();
    let (w, h) = (dims.width, dims.height);
    let nodata = field.nodata;
    let mut work: Vec<f64> = field
        .cells()
        .iter()
        .map(|&v| if v == nodata { fill } else { v })
        .collect();

    let mut line = vec![0.0; w.max(h)];
    for row in work.chunks_exact_mut(w) {
        line[..w].copy_from_slice(row);
        sliding_extremum(&line[..w], half, row, better);
    }
    let mut col = vec![0.0; h];
    let mut out = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = work[y * w + x];
        }
        sliding_extremum(&col, half, &mut out, better);
        for y in 0..h {
            work[y * w + x] = out[y];
        }
    }
    for v in &mut work {
        if *v == fill {
            *v = nodata;
        }
    }
    field.with_cells(work).expect("same dimensions")
}

/// Minimum filter over a `(2·se_half+1)²` square.
pub fn erode(field: &Heightfield, se_half: usize) -> Heightfield {
    separable(field, se_half, f64::INFINITY, |a, b| a < b)
}

/// Maximum filter over a `(2·se_half+1)²` square.
pub fn dilate(field: &Heightfield, se_half: usize) -> Heightfield {
    separable(field, se_half, f64::NEG_INFINITY, |a, b| a > b)
}

fn dilate_line(src: &[bool], radius: usize, out: &mut [bool]) {
    let n = src.len();
    // prefix counts give O(1) window queries
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0usize);
    for &b in src {
        prefix.push(prefix.last().unwrap() + b as usize);
    }
    for (i, o) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius + 1).min(n);
        *o = prefix[hi] > prefix[lo];
    }
}

/// Sets every pixel within Chebyshev distance `radius` of a set pixel.
pub fn dilate_mask(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let dims = mask.dims();
    let (w, h) = (dims.width, dims.height);
    let mut work = mask.bits().to_vec();
    let mut line = vec![false; w.max(h)];
    for row in work.chunks_exact_mut(w) {
        line[..w].copy_from_slice(row);
        dilate_line(&line[..w], radius, row);
    }
    let mut col = vec![false; h];
    let mut out = vec![false; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = work[y * w + x];
        }
        dilate_line(&col, radius, &mut out);
        for y in 0..h {
            work[y * w + x] = out[y];
        }
    }
    BinaryMask::from_bits(dims, work).expect("same dimensions")
}
