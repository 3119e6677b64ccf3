//! Univariate density estimates on a fixed grid.

use std::f64::consts::PI;

pub const GRID_POINTS: usize = 100;
pub const MIN_BANDWIDTH: f64 = 1e-9;

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Silverman's rule of thumb. A zero interquartile range falls back to σ alone.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sigma = population_std(values);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 {
        sigma.min(iqr / 1.34)
    } else {
        sigma
    };
    (0.9 * spread * (values.len() as f64).powf(-0.2)).max(MIN_BANDWIDTH)
}

pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect()
}

pub fn gaussian_kde(values: &[f64], bandwidth: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    grid.iter()
        .map(|&x| {
            values
                .iter()
                .map(|&v| (-0.5 * ((x - v) / bandwidth).powi(2)).exp())
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Piecewise-constant histogram with `bins` equal bins over the grid span, sampled at the grid.
pub fn histogram_density(values: &[f64], grid: &[f64], bins: usize) -> Vec<f64> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let width = (hi - lo) / bins as f64;
    let bin_of = |x: f64| (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1);
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[bin_of(v)] += 1;
    }
    let n = values.len() as f64;
    grid.iter()
        .map(|&x| counts[bin_of(x)] as f64 / (n * width))
        .collect()
}

pub fn trapezoid(grid: &[f64], ys: &[f64]) -> f64 {
    grid.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0)
        .sum()
}
