//! Natural cubic spline on a strictly increasing abscissa.

#[derive(Clone, Debug)]
pub(crate) struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    /// Caller guarantees `x.len() == y.len() >= 2` and `x` strictly increasing.
    pub(crate) fn natural(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior equations.
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag[i] = 2.0 * (h0 + h1);
                rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for i in 2..n - 1 {
                let h0 = x[i] - x[i - 1];
                let m = h0 / diag[i - 1];
                diag[i] -= m * h0;
                rhs[i] -= m * rhs[i - 1];
            }
            for i in (1..n - 1).rev() {
                let h1 = x[i + 1] - x[i];
                second[i] = (rhs[i] - h1 * second[i + 1]) / diag[i];
            }
        }
        Self { x, y, second }
    }

    /// Clamps to the end values outside the domain.
    pub(crate) fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&xi| xi <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_nodes_and_is_linear_exact() {
        let x: Vec<f64> = (0..8).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|x| 3.0 - 2.0 * x).collect();
        let s = CubicSpline::natural(x.clone(), y.clone());
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-14);
        }
        assert!((s.eval(1.3) - (3.0 - 2.6)).abs() < 1e-13);
    }

    #[test]
    fn smooth_function_converges() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 * 0.02).collect();
        let y: Vec<f64> = x.iter().map(|x: &f64| x.sin()).collect();
        let s = CubicSpline::natural(x, y);
        for t in [0.5, 1.234, 2.9, 3.7] {
            assert!((s.eval(t) - f64::sin(t)).abs() < 1e-6);
        }
    }
}
