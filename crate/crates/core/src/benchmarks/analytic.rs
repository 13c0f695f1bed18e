//! Analytic stand-ins with the airfoil (5 → 75) and photonic-surface
//! (3 → 822) dimensions. The formulas are frozen; changing them would make
//! stored experiment results incomparable.

use crate::Real;

pub const AID_OUTPUTS: usize = 75;
pub const PSID_OUTPUTS: usize = 822;

/// Camber, camber position, thickness, Reynolds number, angle of attack.
pub const AID_LOWER: [f64; 5] = [0.02, 0.2, 0.06, 4e6, 0.0];
pub const AID_UPPER: [f64; 5] = [0.09, 0.7, 0.15, 6e6, 7.0];
pub const AID_NAMES: [&str; 5] = ["m", "p", "t", "Re", "alpha"];

/// Laser power (W), scanning speed (mm/s), texture spacing (µm).
pub const PSID_LOWER: [f64; 3] = [0.2, 10.0, 0.02];
pub const PSID_UPPER: [f64; 3] = [1.3, 700.0, 28.0];
pub const PSID_NAMES: [&str; 3] = ["Lp", "Ss", "Sp"];

fn normalize<T: Real>(x: &[T], lower: &[f64], upper: &[f64]) -> Vec<T> {
    x.iter()
        .zip(lower.iter().zip(upper))
        .map(|(&v, (&l, &u))| (v - T::lit(l)) / T::lit(u - l))
        .collect()
}

/// `y_j = u1·sin(2π u2 s_j)·exp(−3 u3 s_j) + 0.5·u4·(1 − s_j)² + u5·s_j`
/// at `s_j = j / 74`, with `u` the inputs normalized to `[0, 1]`.
pub fn aidlike_response<T: Real>(x: &[T]) -> Vec<T> {
    let u = normalize(x, &AID_LOWER, &AID_UPPER);
    let two_pi = T::lit(2.0 * std::f64::consts::PI);
    let (half, three) = (T::lit(0.5), T::lit(3.0));
    (0..AID_OUTPUTS)
        .map(|j| {
            let s = T::from_usize_lossy(j) / T::from_usize_lossy(AID_OUTPUTS - 1);
            let one_minus = T::one() - s;
            u[0] * (two_pi * u[1] * s).sin() * (-three * u[2] * s).exp()
                + half * u[3] * one_minus * one_minus
                + u[4] * s
        })
        .collect()
}

/// `y_j = σ(4(u1 − w_j)) · (0.3 + 0.6·u2·exp(−(w_j − u3)² / 0.05))`
/// at `w_j = j / 821`, with `σ` the logistic function.
pub fn psidlike_response<T: Real>(x: &[T]) -> Vec<T> {
    let u = normalize(x, &PSID_LOWER, &PSID_UPPER);
    let (four, base, amp, width) = (T::lit(4.0), T::lit(0.3), T::lit(0.6), T::lit(0.05));
    (0..PSID_OUTPUTS)
        .map(|j| {
            let w = T::from_usize_lossy(j) / T::from_usize_lossy(PSID_OUTPUTS - 1);
            let sigmoid = T::one() / (T::one() + (-four * (u[0] - w)).exp());
            let d = w - u[2];
            sigmoid * (base + amp * u[1] * (-(d * d) / width).exp())
        })
        .collect()
}
