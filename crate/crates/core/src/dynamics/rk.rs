//! Dormand–Prince 8(5,3) with PI step-size control.
//!
//! The error estimate combines the embedded fifth- and third-order
//! solutions as in Hairer's DOP853.

use crate::error::{Error, Result};

const STAGES: usize = 12;
const C: [f64; STAGES] = [0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0];
/// Lower-triangular stage matrix, row `s` uses `A[s][..s]`.
const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];
const B: [f64; STAGES] = [0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259];
const E3: [f64; STAGES] = [-0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, -0.4226823213237919, -0.1521609496625161, 0.20136540080403034, 0.02265179219836082];
const E5: [f64; STAGES] = [0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 1.0 / 8.0 - BETA * 0.2;

/// Adaptive integrator state. The right-hand side may fail (e.g. leaving
/// the chart); the error is passed through unchanged.
pub struct DormandPrince<F> {
    rhs: F,
    rel_tol: f64,
    abs_tol: f64,
    h: f64,
    err_old: f64,
    k: [Vec<f64>; STAGES],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    f_new: Vec<f64>,
    fsal_valid: bool,
    pub accepted: usize,
    pub rejected: usize,
}

impl<F> DormandPrince<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(rhs: F, dim: usize, rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rhs,
            rel_tol,
            abs_tol,
            h: 0.0,
            err_old: 1e-4,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            y_stage: vec![0.0; dim],
            y_new: vec![0.0; dim],
            f_new: vec![0.0; dim],
            fsal_valid: false,
            accepted: 0,
            rejected: 0,
        }
    }

    fn initial_step(&mut self, t: f64, y: &[f64], span: f64) -> Result<f64> {
        (self.rhs)(t, y, &mut self.k[0])?;
        self.fsal_valid = true;
        let sc = |yi: f64| self.abs_tol + self.rel_tol * yi.abs();
        let n = y.len() as f64;
        let d0 = (y.iter().map(|&yi| (yi / sc(yi)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (y
            .iter()
            .zip(&self.k[0])
            .map(|(&yi, &fi)| (fi / sc(yi)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        Ok(h0.min(span.abs()))
    }

    /// Scaled error norm of a trial step of size `h`.
    fn error_norm(&self, y: &[f64], h: f64) -> f64 {
        let (mut e5, mut e3) = (0.0, 0.0);
        for i in 0..y.len() {
            let sc = self.abs_tol + self.rel_tol * y[i].abs().max(self.y_new[i].abs());
            let (mut a, mut b) = (0.0, 0.0);
            for j in 0..STAGES {
                a += E5[j] * self.k[j][i];
                b += E3[j] * self.k[j][i];
            }
            e5 += (a / sc).powi(2);
            e3 += (b / sc).powi(2);
        }
        if e5 == 0.0 && e3 == 0.0 {
            return 0.0;
        }
        h.abs() * e5 / ((e5 + 0.01 * e3) * y.len() as f64).sqrt()
    }

    /// Advance `y` from `t` to exactly `t_target`.
    pub fn advance(&mut self, t: &mut f64, y: &mut [f64], t_target: f64) -> Result<()> {
        if self.h == 0.0 {
            self.h = self.initial_step(*t, y, t_target - *t)?;
        }
        while *t < t_target {
            let remaining = t_target - *t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if h < 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { t: *t, h });
            }
            if !self.fsal_valid {
                (self.rhs)(*t, y, &mut self.k[0])?;
                self.fsal_valid = true;
            }
            for s in 1..STAGES {
                for i in 0..y.len() {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * self.k[j][i];
                    }
                    self.y_stage[i] = y[i] + h * acc;
                }
                (self.rhs)(*t + C[s] * h, &self.y_stage, &mut self.k[s])?;
            }
            for i in 0..y.len() {
                let acc: f64 = (0..STAGES).map(|j| B[j] * self.k[j][i]).sum();
                self.y_new[i] = y[i] + h * acc;
            }
            let err = self.error_norm(y, h);
            let fac11 = err.powf(EXPO);
            if err <= 1.0 {
                let t_new = if last { t_target } else { *t + h };
                (self.rhs)(t_new, &self.y_new, &mut self.f_new)?;
                let fac = (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.err_old = err.max(1e-4);
                *t = t_new;
                y.copy_from_slice(&self.y_new);
                std::mem::swap(&mut self.k[0], &mut self.f_new);
                self.accepted += 1;
                let h_new = h / fac;
                if !last || h_new < self.h {
                    self.h = h_new;
                }
            } else {
                self.rejected += 1;
                self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
                if self.h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t: *t, h: self.h });
                }
            }
        }
        Ok(())
    }
}
