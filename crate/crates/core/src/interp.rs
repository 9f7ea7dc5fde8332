//! Uniform tensor grids in one or two dimensions.

/// Uniform tensor grid with piecewise-cubic interpolation.
#[derive(Clone, Debug)]
pub(crate) struct Grid {
    pub lo: Vec<f64>,
    pub step: Vec<f64>,
    pub n: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: &[f64], n: usize) -> Self {
        let step = lo.iter().zip(hi).map(|(a, b)| (b - a) / (n - 1) as f64).collect();
        let total = n.pow(lo.len() as u32);
        Grid {
            lo,
            step,
            n,
            values: vec![0.0; total],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn axis(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|k| self.lo[i] + k as f64 * self.step[i]).collect()
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut rest = flat;
        (0..self.lo.len())
            .map(|i| {
                let k = rest % self.n;
                rest /= self.n;
                self.lo[i] + k as f64 * self.step[i]
            })
            .collect()
    }

    /// Four-point Lagrange stencil on axis `i`, clamped to the grid; outside
    /// the grid the end segment is extended linearly.
    pub fn stencil(&self, i: usize, x: f64) -> ([usize; 4], [f64; 4]) {
        let u = (x - self.lo[i]) / self.step[i];
        let last = (self.n - 1) as f64;
        if u <= 0.0 || u >= last {
            let (a, b) = if u <= 0.0 { (0, 1) } else { (self.n - 2, self.n - 1) };
            let r = u - a as f64;
            return ([a, b, b, b], [1.0 - r, r, 0.0, 0.0]);
        }
        let base = (u.floor() as usize).clamp(1, self.n - 3);
        let idx = [base - 1, base, base + 1, base + 2];
        let mut w = [1.0; 4];
        for (a, wa) in w.iter_mut().enumerate() {
            for b in 0..4 {
                if a != b {
                    *wa *= (u - idx[b] as f64) / (idx[a] as f64 - idx[b] as f64);
                }
            }
        }
        (idx, w)
    }

    pub fn interpolate(&self, x: &[f64]) -> f64 {
        match x.len() {
            1 => {
                let (i, w) = self.stencil(0, x[0]);
                (0..4).map(|a| w[a] * self.values[i[a]]).sum()
            }
            2 => {
                let (i0, w0) = self.stencil(0, x[0]);
                let (i1, w1) = self.stencil(1, x[1]);
                let mut acc = 0.0;
                for b in 0..4 {
                    if w1[b] == 0.0 {
                        continue;
                    }
                    for a in 0..4 {
                        acc += w0[a] * w1[b] * self.values[i0[a] + self.n * i1[b]];
                    }
                }
                acc
            }
            _ => unreachable!("grid dimension checked"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let mut grid = Grid::new(vec![-1.0], &[1.0], 21);
        for k in 0..grid.values.len() {
            let x = grid.node(k)[0];
            grid.values[k] = x * x * x - 2.0 * x + 0.5;
        }
        for &x in &[-0.93, -0.1, 0.37, 0.99] {
            assert_abs_diff_eq!(grid.interpolate(&[x]), x * x * x - 2.0 * x + 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn bilinear_outside_and_tensor_inside() {
        let mut grid = Grid::new(vec![0.0, 0.0], &[1.0, 2.0], 11);
        for k in 0..grid.values.len() {
            let p = grid.node(k);
            grid.values[k] = p[0] * p[1] + p[1] * p[1];
        }
        assert_abs_diff_eq!(grid.interpolate(&[0.33, 1.41]), 0.33 * 1.41 + 1.41 * 1.41, epsilon = 1e-12);
        // linear continuation in x beyond the right edge
        assert_abs_diff_eq!(grid.interpolate(&[1.2, 1.0]), 1.2 + 1.0, epsilon = 1e-12);
    }
}
