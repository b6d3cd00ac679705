//! Lattice enumeration on the probability simplex.
//!
//! A grid of resolution `k` over `dim` coordinates consists of all points
//! `(c_0/k, ..., c_{dim-1}/k)` with nonnegative integer counts summing to
//! `k`, enumerated in ascending lexicographic order of the count tuple.
//! That order is part of the contract: ties in grid searches break to the
//! lowest enumeration index.

use crate::error::{Error, Result};

/// Number of lattice points: C(resolution + dim - 1, dim - 1).
pub fn simplex_grid_size(dim: usize, resolution: usize) -> Option<u128> {
    let mut n: u128 = 1;
    for i in 0..dim - 1 {
        n = n.checked_mul((resolution + i + 1) as u128)?;
        n /= (i + 1) as u128;
    }
    Some(n)
}

const MAX_GRID_POINTS: u128 = 2_000_000;

/// Enumerates the full lattice. Errors when the point count would exceed
/// the in-memory cap rather than degrading silently.
pub fn simplex_grid(dim: usize, resolution: usize) -> Result<Vec<Vec<f64>>> {
    if dim == 0 {
        return Err(Error::invalid("simplex grid needs at least one coordinate"));
    }
    if resolution == 0 {
        return Err(Error::invalid("simplex grid resolution must be at least 1"));
    }
    let size = simplex_grid_size(dim, resolution)
        .filter(|&s| s <= MAX_GRID_POINTS)
        .ok_or_else(|| {
            Error::limit(format!(
                "simplex grid with dim {dim} and resolution {resolution} exceeds \
                 {MAX_GRID_POINTS} points"
            ))
        })?;

    let mut out = Vec::with_capacity(size as usize);
    let mut counts = vec![0usize; dim];
    counts[dim - 1] = resolution;
    loop {
        out.push(counts.iter().map(|&c| c as f64 / resolution as f64).collect());
        // Next composition in lexicographic order of the count tuple.
        let Some(pos) = (0..dim - 1).rev().find(|&i| counts[i + 1..].iter().sum::<usize>() > 0)
        else {
            break;
        };
        let tail: usize = counts[pos + 1..].iter().sum();
        counts[pos] += 1;
        for c in counts[pos + 1..].iter_mut() {
            *c = 0;
        }
        counts[dim - 1] = tail - 1;
    }
    debug_assert_eq!(out.len() as u128, size);
    Ok(out)
}
