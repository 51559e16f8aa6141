//! Fully normalized associated Legendre functions by stable three-term
//! recurrence.
//!
//! `theta_norm(j, m, x)` is the polar factor of the spherical harmonic with
//! the azimuth integrated out: int_{-1}^{1} theta_norm(j,m,x)^2 dx = 1, no
//! Condon-Shortley phase. Matrix elements of cos(theta) between these
//! functions are positive.

/// Normalized Theta_J^|M|(x) for x = cos(theta), all J >= |M|.
pub fn theta_norm(j: u32, m: i32, x: f64) -> f64 {
    let mm = m.unsigned_abs();
    assert!(j >= mm, "need J >= |M|");
    let s2 = (1.0 - x * x).max(0.0);

    // Seed: Theta_m^m = sqrt((2m+1)/2 * (2m-1)!!/(2m)!!) * sin^m(theta),
    // built multiplicatively to avoid factorial overflow.
    let mut p_mm = std::f64::consts::FRAC_1_SQRT_2; // sqrt(1/2)
    for k in 1..=mm {
        let kf = k as f64;
        p_mm *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s2.sqrt();
    }
    if j == mm {
        return p_mm;
    }

    // Theta_{m+1}^m = sqrt(2m+3) x Theta_m^m.
    let mut prev = p_mm;
    let mut curr = (2.0 * mm as f64 + 3.0).sqrt() * x * p_mm;
    if j == mm + 1 {
        return curr;
    }

    let mf = mm as f64;
    for jj in (mm + 2)..=j {
        let jf = jj as f64;
        let a = ((4.0 * jf * jf - 1.0) / (jf * jf - mf * mf)).sqrt();
        let b = (((2.0 * jf + 1.0) * ((jf - 1.0) * (jf - 1.0) - mf * mf))
            / ((2.0 * jf - 3.0) * (jf * jf - mf * mf)))
            .sqrt();
        let next = a * x * curr - b * prev;
        prev = curr;
        curr = next;
    }
    curr
}
