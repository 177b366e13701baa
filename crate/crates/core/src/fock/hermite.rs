use num_complex::Complex64;

/// Physicists' Hermite polynomial `H_n(z)` for complex argument, by the
/// three-term recurrence `H_{n+1} = 2z H_n − 2n H_{n−1}`.
pub fn hermite_complex(n: usize, z: Complex64) -> Complex64 {
    let mut h_prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return h_prev;
    }
    let mut h = 2.0 * z;
    for k in 1..n {
        let next = 2.0 * z * h - 2.0 * k as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// `c^n H_n(x / c)` for every `n ≤ n_max`, given only `c²`.
///
/// The product is a polynomial in `x` and `c²`, so no square root (and no
/// branch choice) is needed, and it stays finite as `c → 0` where it tends to
/// `(2x)^n`. Recurrence: `h_{n+1} = 2x h_n − 2n c² h_{n−1}`.
pub fn scaled_hermite_table(n_max: usize, x: Complex64, c2: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(Complex64::new(1.0, 0.0));
    if n_max == 0 {
        return out;
    }
    out.push(2.0 * x);
    for k in 1..n_max {
        let next = 2.0 * x * out[k] - 2.0 * k as f64 * c2 * out[k - 1];
        out.push(next);
    }
    out
}
