//! Small numeric helpers: compensated summation, quadrature, least squares.

/// Neumaier-compensated accumulator. Used wherever millions of near-cancelling
/// terms are summed (log-affinity products, long quadratures).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Cumulative trapezoid rule on a (possibly non-uniform) grid.
/// Returns a vector of the same length; entry `k` approximates the integral
/// from `ts[0]` to `ts[k]`.
pub fn cumulative_trapezoid(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    assert_eq!(ts.len(), ys.len());
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = CompensatedSum::new();
    out.push(0.0);
    for k in 1..ts.len() {
        acc.add(0.5 * (ys[k] + ys[k - 1]) * (ts[k] - ts[k - 1]));
        out.push(acc.value());
    }
    out
}

/// Weighted linear least squares of `y` against `x`.
/// Returns `(intercept, slope, r_squared)` where `r_squared` is computed with
/// the same weights.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64) {
    assert!(x.len() == y.len() && y.len() == w.len());
    let sw: f64 = w.iter().sum();
    let mx: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my: f64 = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (intercept, slope, r2)
}

/// Unweighted convenience wrapper.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let w = vec![1.0; x.len()];
    weighted_linear_fit(x, y, &w)
}

/// Least-squares fit of `y = c0 + c1 x + c2 x^2` via normal equations.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> [f64; 3] {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    let (mut t0, mut t1, mut t2) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let x2 = xi * xi;
        s1 += xi;
        s2 += x2;
        s3 += x2 * xi;
        s4 += x2 * x2;
        t0 += yi;
        t1 += xi * yi;
        t2 += x2 * yi;
    }
    // Solve the 3x3 system [n s1 s2; s1 s2 s3; s2 s3 s4] c = [t0 t1 t2].
    let m = [[n, s1, s2], [s1, s2, s3], [s2, s3, s4]];
    let b = [t0, t1, t2];
    solve3(m, b)
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    let mut out = [0.0; 3];
    for k in 0..3 {
        let mut mk = m;
        for row in 0..3 {
            mk[row][k] = b[row];
        }
        out[k] = det(mk) / d;
    }
    out
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + a.abs() + b.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Quantile of a sorted slice by linear interpolation.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// Format a double with 17 significant digits, enough to round-trip exactly.
pub fn fmt_g17(x: f64) -> String {
    // canonicalise -0.0 so equal values always hash identically
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::new();
        let n = 1_000_000;
        for _ in 0..n {
            acc.add(0.1);
        }
        let exact = 0.1 * n as f64;
        assert!((acc.value() - exact).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let ts: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.0 * t).collect();
        let cum = cumulative_trapezoid(&ts, &ys);
        assert!((cum[10] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadratic_fit_recovers_planted() {
        let x: Vec<f64> = (0..20).map(|k| k as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.5 - 0.7 * t + 0.25 * t * t).collect();
        let c = quadratic_fit(&x, &y);
        assert!((c[0] - 1.5).abs() < 1e-10);
        assert!((c[1] + 0.7).abs() < 1e-10);
        assert!((c[2] - 0.25).abs() < 1e-10);
    }

    #[test]
    fn golden_section_finds_parabola_min() {
        let x = golden_section_min(|x| (x - 1.3) * (x - 1.3), -10.0, 10.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-8);
    }
}
