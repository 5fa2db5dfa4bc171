//! Fixed-step explicit integrators for small state vectors.

use nalgebra::SVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

impl Integrator {
    /// Advances `x` from `t` to `t + dt` under `ẋ = f(t, x)`.
    pub fn step<const N: usize, F>(self, t: f64, x: &SVector<f64, N>, dt: f64, f: F) -> SVector<f64, N>
    where
        F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    {
        match self {
            Integrator::Rk4 => rk4(t, x, dt, f),
            Integrator::Euler => euler(t, x, dt, f),
        }
    }
}

pub fn rk4<const N: usize, F>(t: f64, x: &SVector<f64, N>, dt: f64, mut f: F) -> SVector<f64, N>
where
    F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
{
    let h = 0.5 * dt;
    let k1 = f(t, x);
    let k2 = f(t + h, &(x + k1 * h));
    let k3 = f(t + h, &(x + k2 * h));
    let k4 = f(t + dt, &(x + k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

pub fn euler<const N: usize, F>(t: f64, x: &SVector<f64, N>, dt: f64, mut f: F) -> SVector<f64, N>
where
    F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
{
    x + f(t, x) * dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    #[test]
    fn rk4_is_fourth_order_on_oscillator() {
        let f = |_t: f64, x: &Vector2<f64>| Vector2::new(x[1], -x[0]);
        let run = |dt: f64| {
            let mut x = Vector2::new(1.0, 0.0);
            let n = (1.0 / dt).round() as usize;
            for k in 0..n {
                x = rk4(k as f64 * dt, &x, dt, f);
            }
            (x[0] - 1f64.cos()).abs()
        };
        let ratio = run(0.02) / run(0.01);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn euler_step_is_linear() {
        let x = Vector2::new(1.0, 2.0);
        let y = Integrator::Euler.step(0.0, &x, 0.5, |_, _| Vector2::new(2.0, -4.0));
        assert_eq!(y, Vector2::new(2.0, 0.0));
    }
}
