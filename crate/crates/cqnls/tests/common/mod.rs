//! Shared test oracles, independent of the collocation solver.

/// Radial shooting solver for the cubic ground state of
/// `-1/2 (Q'' + (d-1)/r Q') + omega Q - Q^3 = 0` with `Q'(0) = 0` and
/// `Q(r) -> 0`: RK4 integration outward from a series start, bisecting on
/// the center value between overshoot (Q crosses zero) and undershoot
/// (Q turns back upward before decaying).
pub fn shoot_cubic_center_value(d: u32, omega: f64) -> f64 {
    let classify = |q0: f64| -> i32 {
        let dr = 1e-3;
        let rhs = |r: f64, q: f64, p: f64| -> (f64, f64) {
            let denom = if r > 1e-12 { r } else { 1e-12 };
            (
                p,
                2.0 * omega * q - 2.0 * q * q * q - (d - 1) as f64 * p / denom,
            )
        };
        // Series start: Q = q0 + a r^2 with 2 a d = 2 omega q0 - 2 q0^3.
        let a = (2.0 * omega * q0 - 2.0 * q0.powi(3)) / (2.0 * d as f64);
        let mut r = 1e-4;
        let mut q = q0 + a * r * r;
        let mut p = 2.0 * a * r;
        let r_max = 30.0 / (2.0 * omega).sqrt().min(2.0);
        while r < r_max {
            let (k1q, k1p) = rhs(r, q, p);
            let (k2q, k2p) = rhs(r + dr / 2.0, q + dr / 2.0 * k1q, p + dr / 2.0 * k1p);
            let (k3q, k3p) = rhs(r + dr / 2.0, q + dr / 2.0 * k2q, p + dr / 2.0 * k2p);
            let (k4q, k4p) = rhs(r + dr, q + dr * k3q, p + dr * k3p);
            q += dr / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            p += dr / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            r += dr;
            if q < 0.0 {
                return -1; // overshoot
            }
            if p > 0.0 && q < q0 * 0.7 {
                return 1; // undershoot: turned back up
            }
        }
        0
    };

    // The ground state scales out of omega = 1; bracket around the scaled
    // peak of the omega = 1 problem.
    let scale = omega.sqrt();
    let (mut lo, mut hi) = (1.0 * scale, 6.0 * scale);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match classify(mid) {
            -1 => hi = mid,
            _ => lo = mid,
        }
    }
    0.5 * (lo + hi)
}

/// Shooting profile `Q(r)` of the cubic ground state, sampled every `dr`
/// on `[0, r_max]`, for profile-level comparisons.
pub fn shoot_cubic_profile(d: u32, omega: f64, r_max: f64, dr: f64) -> Vec<(f64, f64)> {
    let q0 = shoot_cubic_center_value(d, omega);
    let rhs = |r: f64, q: f64, p: f64| -> (f64, f64) {
        let denom = if r > 1e-12 { r } else { 1e-12 };
        (
            p,
            2.0 * omega * q - 2.0 * q * q * q - (d - 1) as f64 * p / denom,
        )
    };
    let a = (2.0 * omega * q0 - 2.0 * q0.powi(3)) / (2.0 * d as f64);
    let h = dr / 100.0;
    let mut r = 1e-4;
    let mut q = q0 + a * r * r;
    let mut p = 2.0 * a * r;
    let mut out = vec![(0.0, q0)];
    let mut next_sample = dr;
    while r < r_max && q.abs() < 10.0 * q0 {
        let (k1q, k1p) = rhs(r, q, p);
        let (k2q, k2p) = rhs(r + h / 2.0, q + h / 2.0 * k1q, p + h / 2.0 * k1p);
        let (k3q, k3p) = rhs(r + h / 2.0, q + h / 2.0 * k2q, p + h / 2.0 * k2p);
        let (k4q, k4p) = rhs(r + h, q + h * k3q, p + h * k3p);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r += h;
        if r >= next_sample - 1e-12 {
            out.push((r, q));
            next_sample += dr;
        }
    }
    out
}
