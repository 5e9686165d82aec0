//! Dormand-Prince 5(4) pair with PI step control, landing exactly on output nodes.

use num_complex::Complex64 as C64;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Dopri {
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

#[derive(Debug)]
pub struct Underflow {
    pub x: f64,
}

impl Dopri {
    /// Integrates `y' = f(x, y)` through `nodes` (increasing), calling `observe` at each node.
    /// `err_norm(y, y_new, err)` returns the scaled error; a step is accepted when it is <= 1.
    pub fn integrate<F, N, O>(
        &self,
        f: F,
        nodes: &[f64],
        mut y: Vec<C64>,
        err_norm: N,
        mut observe: O,
    ) -> Result<Vec<C64>, Underflow>
    where
        F: Fn(f64, &[C64], &mut [C64]),
        N: Fn(&[C64], &[C64], &[C64]) -> f64,
        O: FnMut(usize, f64, &[C64]),
    {
        let dim = y.len();
        let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); dim]; 7];
        let mut tmp = vec![C64::new(0.0, 0.0); dim];
        let mut err = vec![C64::new(0.0, 0.0); dim];
        let mut x = nodes[0];
        observe(0, x, &y);
        f(x, &y, &mut k[0]);
        let mut h = self.max_step;
        let mut err_prev: f64 = 1e-4;
        let mut steps = 0usize;
        for (idx, &target) in nodes.iter().enumerate().skip(1) {
            while x < target {
                steps += 1;
                if steps > self.max_steps {
                    return Err(Underflow { x });
                }
                let remaining = target - x;
                let landing = h >= remaining * (1.0 - 1e-12);
                let hs = if landing { remaining } else { h };
                for s in 1..7 {
                    for i in 0..dim {
                        let mut acc = C64::new(0.0, 0.0);
                        for j in 0..s {
                            let a = A[s][j];
                            if a != 0.0 {
                                acc += k[j][i] * a;
                            }
                        }
                        tmp[i] = y[i] + acc * hs;
                    }
                    f(x + C[s] * hs, &tmp, &mut k[s]);
                }
                // tmp now holds the fifth-order solution (stage 7 argument)
                for i in 0..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for s in 0..7 {
                        if E[s] != 0.0 {
                            acc += k[s][i] * E[s];
                        }
                    }
                    err[i] = acc * hs;
                }
                let e = err_norm(&y, &tmp, &err);
                if e <= 1.0 {
                    x = if landing { target } else { x + hs };
                    y.copy_from_slice(&tmp);
                    k.swap(0, 6);
                    let e = e.max(1e-10);
                    let fac = (0.9 * e.powf(-0.17) * err_prev.powf(0.04)).clamp(0.2, 5.0);
                    err_prev = e;
                    let proposal = (hs * fac).min(self.max_step);
                    h = if landing { proposal.max(h) } else { proposal };
                    h = h.min(self.max_step);
                } else {
                    let fac = if e.is_finite() { (0.9 * e.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                    h = hs * fac;
                    if h < self.min_step {
                        return Err(Underflow { x });
                    }
                }
            }
            observe(idx, x, &y);
        }
        Ok(y)
    }
}
