//! Shape-preserving cubic Hermite interpolation on a uniform grid.

/// Cubic Hermite interpolant through `(x_i, y_i)` with given node slopes,
/// limited per interval (Fritsch–Carlson) so that monotone data stay
/// monotone between nodes.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    /// Per interval: limited slopes at the left and right node.
    slopes: Vec<(f64, f64)>,
}

impl MonotoneCubic {
    /// `x` must be uniformly spaced and strictly increasing.
    pub fn new(x: &[f64], y: &[f64], dy: &[f64]) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len() && y.len() == dy.len());
        let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        let slopes = (0..x.len() - 1)
            .map(|i| {
                let delta = (y[i + 1] - y[i]) / h;
                let (mut m0, mut m1) = (dy[i], dy[i + 1]);
                if delta == 0.0 {
                    return (0.0, 0.0);
                }
                let (mut al, mut be) = (m0 / delta, m1 / delta);
                if al < 0.0 {
                    m0 = 0.0;
                    al = 0.0;
                }
                if be < 0.0 {
                    m1 = 0.0;
                    be = 0.0;
                }
                let r2 = al * al + be * be;
                if r2 > 9.0 {
                    let tau = 3.0 / r2.sqrt();
                    m0 = tau * al * delta;
                    m1 = tau * be * delta;
                }
                (m0, m1)
            })
            .collect();
        MonotoneCubic {
            x0: x[0],
            h,
            y: y.to_vec(),
            slopes,
        }
    }

    /// Value and derivative at `x`; clamps to the end intervals outside the grid.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.slopes.len();
        let s = (x - self.x0) / self.h;
        let i = (s.floor().max(0.0) as usize).min(n - 1);
        let t = s - i as f64;
        let (m0, m1) = self.slopes[i];
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * y0 + h10 * self.h * m0 + h01 * y1 + h11 * self.h * m1;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        let d = (d00 * y0 + d01 * y1) / self.h + d10 * m0 + d11 * m1;
        (v, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_cubics_with_exact_slopes() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let f = |t: f64| 1.0 + t + 0.5 * t * t + 0.2 * t * t * t;
        let df = |t: f64| 1.0 + t + 0.6 * t * t;
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let dy: Vec<f64> = x.iter().map(|&t| df(t)).collect();
        let ip = MonotoneCubic::new(&x, &y, &dy);
        for t in [0.03, 0.37, 0.5, 0.99] {
            let (v, d) = ip.eval(t);
            assert!((v - f(t)).abs() < 1e-13);
            assert!((d - df(t)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn monotone_data_stay_monotone(steps in proptest::collection::vec(0.0f64..1.0, 4..30),
                                       slopes in proptest::collection::vec(0.0f64..50.0, 31)) {
            let n = steps.len() + 1;
            let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let mut y = vec![0.0];
            for s in &steps { y.push(y.last().unwrap() + s); }
            let dy = &slopes[..n];
            let ip = MonotoneCubic::new(&x, &y, dy);
            let mut prev = f64::NEG_INFINITY;
            for j in 0..(10 * (n - 1)) {
                let (v, _) = ip.eval(j as f64 / 10.0);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
