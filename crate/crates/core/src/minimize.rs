//! Bounded one-dimensional minimization: a uniform scan to locate the basin,
//! then golden-section refinement inside the neighbouring scan cells.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGolden {
    pub scan_points: usize,
    pub width: f64,
    pub max_iter: usize,
}

impl Default for ScanGolden {
    fn default() -> Self {
        Self {
            scan_points: 256,
            width: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub arg: f64,
    pub value: f64,
}

impl ScanGolden {
    /// Minimize `f` over `[lo, hi]`. The returned value is never worse than the
    /// best scanned point.
    pub fn minimize<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Minimum {
        debug_assert!(lo <= hi);
        if hi - lo <= self.width {
            let mid = 0.5 * (lo + hi);
            return best_of(&f, &[lo, mid, hi]);
        }
        let n = self.scan_points.max(3);
        let step = (hi - lo) / (n - 1) as f64;
        let mut best_i = 0;
        let mut best_v = f64::INFINITY;
        for i in 0..n {
            let t = if i == n - 1 { hi } else { lo + step * i as f64 };
            let v = f(t);
            if v < best_v {
                best_v = v;
                best_i = i;
            }
        }
        let a = if best_i == 0 { lo } else { lo + step * (best_i - 1) as f64 };
        let b = if best_i + 1 >= n { hi } else { lo + step * (best_i + 1) as f64 };
        let refined = golden(&f, a, b, self.width, self.max_iter);
        let scanned = Minimum {
            arg: if best_i == n - 1 { hi } else { lo + step * best_i as f64 },
            value: best_v,
        };
        if refined.value <= scanned.value {
            refined
        } else {
            scanned
        }
    }
}

fn best_of<F: Fn(f64) -> f64>(f: &F, ts: &[f64]) -> Minimum {
    ts.iter()
        .map(|&t| Minimum { arg: t, value: f(t) })
        .fold(
            Minimum {
                arg: f64::NAN,
                value: f64::INFINITY,
            },
            |acc, m| if m.value < acc.value { m } else { acc },
        )
}

/// Golden-section search on `[a, b]` until the bracket is narrower than `width`.
pub fn golden<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, width: f64, max_iter: usize) -> Minimum {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > width && iter < max_iter {
        if fc <= fd {
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
        iter += 1;
    }
    best_of(f, &[a, c, d, b])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let m = ScanGolden::default().minimize(|t| (t - 0.3).powi(2), -2.0, 2.0);
        assert!((m.arg - 0.3).abs() < 1e-9);
        // with an offset the argmin is only resolved to about sqrt(eps)
        let m = ScanGolden::default().minimize(|t| (t - 0.3).powi(2) + 1.0, -2.0, 2.0);
        assert!((m.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kinked_objective() {
        let m = ScanGolden::default().minimize(|t: f64| (t - 1.25).abs(), -10.0, 10.0);
        assert!(m.value < 1e-9);
    }

    #[test]
    fn picks_global_basin_of_double_well() {
        let f = |t: f64| (t * t - 1.0).powi(2) + 0.1 * t;
        let m = ScanGolden::default().minimize(f, -3.0, 3.0);
        assert!(m.arg < 0.0);
    }

    #[test]
    fn degenerate_interval() {
        let m = ScanGolden::default().minimize(|t| t * t, 2.0, 2.0);
        assert_eq!(m.arg, 2.0);
        assert_eq!(m.value, 4.0);
    }

    #[test]
    fn minimum_at_endpoint() {
        let m = ScanGolden::default().minimize(|t| t, 0.0, 1.0);
        assert_eq!(m.value, 0.0);
    }
}
