//! Float helpers that work without `std`.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn powi(x: f64, k: i32) -> f64 {
    libm::pow(x, k as f64)
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Mean and 95% normal-approximation half-width of `xs`.
pub fn mean_half_width(xs: impl IntoIterator<Item = f64>) -> (f64, f64, usize) {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for x in xs {
        n += 1;
        sum += x;
        sum_sq += x * x;
    }
    if n == 0 {
        return (0.0, 0.0, 0);
    }
    let mean = sum / n as f64;
    if n == 1 {
        return (mean, 0.0, 1);
    }
    let var = ((sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0)).max(0.0);
    (mean, Z95 * sqrt(var / n as f64), n)
}

/// Standard error of a Bernoulli frequency `freq` estimated from `n` draws.
pub fn bernoulli_se(freq: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    sqrt((freq * (1.0 - freq)).max(0.0) / n as f64)
}
