//! Small numerical building blocks: fixed-step Runge–Kutta, Gauss–Legendre
//! nodes, and a windowed spectral peak finder.

use alloc::vec::Vec;

use crate::math::{cos, sqrt, PI, TAU};

/// One classical 4th-order Runge–Kutta step of `y' = f(t, y)`.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| -> [f64; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Goertzel power of the (already windowed) series at an arbitrary frequency.
fn power_at(series: &[f64], dt: f64, freq: f64) -> f64 {
    let w = TAU * freq * dt;
    let c = 2.0 * cos(w);
    let (mut s1, mut s2) = (0.0, 0.0);
    for &x in series {
        let s = x + c * s1 - s2;
        s2 = s1;
        s1 = s;
    }
    s1 * s1 + s2 * s2 - c * s1 * s2
}

/// Frequency (Hz) of the strongest spectral component in `(f_lo, f_hi)`.
///
/// The series is mean-subtracted and Hann-windowed, scanned on the natural
/// DFT bins, and the winning bin refined by golden-section search on the
/// continuous transform. Returns `None` when the strongest bin sits on the
/// edge of the band or the series is too short.
pub fn dominant_frequency(samples: &[f64], dt: f64, f_lo: f64, f_hi: f64) -> Option<f64> {
    let n = samples.len();
    if n < 16 || !(dt > 0.0) || !(f_hi > f_lo) {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let series: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = 0.5 - 0.5 * cos(TAU * i as f64 / (n - 1) as f64);
            (x - mean) * w
        })
        .collect();
    let span = n as f64 * dt;
    let df = 1.0 / span;
    let k_lo = libm::ceil(f_lo * span).max(1.0) as usize;
    let k_hi = libm::floor(f_hi * span) as usize;
    if k_hi < k_lo + 2 {
        return None;
    }
    let powers: Vec<f64> = (k_lo..=k_hi)
        .map(|k| power_at(&series, dt, k as f64 * df))
        .collect();
    let (imax, &pmax) = powers
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    if imax == 0 || imax == powers.len() - 1 || !(pmax > 0.0) {
        return None;
    }
    let centre = (k_lo + imax) as f64 * df;
    let (mut a, mut b) = (centre - df, centre + df);
    let g = (sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut pc, mut pd) = (power_at(&series, dt, c), power_at(&series, dt, d));
    for _ in 0..60 {
        if pc > pd {
            b = d;
            d = c;
            pd = pc;
            c = b - g * (b - a);
            pc = power_at(&series, dt, c);
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + g * (b - a);
            pd = power_at(&series, dt, d);
        }
        if (b - a) < 1e-9 * centre {
            break;
        }
    }
    Some(0.5 * (a + b))
}

/// Strongest component (Hz) below `f_hi` of a series stored on a uniform time
/// grid. A trailing sample off the grid is ignored, and the series is
/// decimated to roughly eight samples per period of `f_hi`.
pub fn series_peak(times: &[f64], values: &[f64], f_hi: f64) -> Option<f64> {
    if times.len() < 16 || times.len() != values.len() {
        return None;
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return None;
    }
    let mut n = times.len();
    while n > 2 && ((times[n - 1] - times[0]) / dt - (n - 1) as f64).abs() > 1e-6 {
        n -= 1;
    }
    let stride = libm::floor(1.0 / (8.0 * f_hi * dt)).max(1.0) as usize;
    let decimated: Vec<f64> = values[..n].iter().step_by(stride).copied().collect();
    dominant_frequency(&decimated, dt * stride as f64, 0.0, f_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sin;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n={n}");
            // Exact up to degree 2n-1.
            for deg in 0..(2 * n) {
                let num: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| wi * libm::pow(xi, deg as f64))
                    .sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-12, "n={n} deg={deg} {num} vs {exact}");
            }
        }
    }

    #[test]
    fn rk4_harmonic_oscillator() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut y = [1.0, 0.0];
        let h = 1e-3;
        let steps = (TAU / h) as usize;
        for i in 0..steps {
            y = rk4_step(&f, i as f64 * h, &y, h);
        }
        let t = steps as f64 * h;
        assert!((y[0] - cos(t)).abs() < 1e-10);
        assert!((y[1] + sin(t)).abs() < 1e-10);
    }

    #[test]
    fn dominant_frequency_finds_off_bin_tone() {
        let dt = 1e-4;
        let f0 = 123.37;
        let s: Vec<f64> = (0..20_000)
            .map(|i| sin(TAU * f0 * i as f64 * dt) + 0.3 * sin(TAU * 900.0 * i as f64 * dt))
            .collect();
        let f = dominant_frequency(&s, dt, 10.0, 500.0).unwrap();
        assert!((f - f0).abs() < 0.01, "{f}");
    }

    #[test]
    fn dominant_frequency_rejects_band_edge_or_flat() {
        let dt = 1e-4;
        let s: Vec<f64> = (0..5000).map(|i| sin(TAU * 2000.0 * i as f64 * dt)).collect();
        assert!(dominant_frequency(&s, dt, 10.0, 500.0).is_none());
        assert!(dominant_frequency(&[0.0; 1000], dt, 10.0, 500.0).is_none());
    }
}
