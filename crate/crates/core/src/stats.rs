//! Small statistical kernels: quantiles, normal tail probabilities and the
//! two-sample Kolmogorov–Smirnov distance.

use statrs::function::erf::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Sample quantile of sorted data by linear interpolation between order
/// statistics (the "type 7" rule): `h = (n - 1) p`.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let p = prob.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sort_floats(v: &mut [f64]) {
    v.sort_by(|a, b| a.total_cmp(b));
}

pub fn normal_cdf(z: f64) -> f64 {
    if z == f64::INFINITY {
        1.0
    } else if z == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-z * FRAC_1_SQRT_2)
    }
}

/// Upper tail `1 - Φ(z)`.
pub fn normal_sf(z: f64) -> f64 {
    normal_cdf(-z)
}

/// `ln(1 - Φ(z))`, finite far into the upper tail.
pub fn ln_normal_sf(z: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    if z == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if z < 30.0 {
        return normal_sf(z).ln();
    }
    // asymptotic Mills-ratio expansion
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    -0.5 * z2 - (z * (2.0 * PI).sqrt()).ln() + series.ln()
}

pub fn ln_normal_cdf(z: f64) -> f64 {
    ln_normal_sf(-z)
}

/// Sup-distance between the empirical CDFs of two sorted samples.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
