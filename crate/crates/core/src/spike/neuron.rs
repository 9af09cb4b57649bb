use rand::Rng;

/// `σ(u) = 1 / (1 + e^{−u})`, never exactly zero.
pub fn spike_probability(u: f64) -> f64 {
    let p = if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    };
    p.max(f64::MIN_POSITIVE)
}

/// `log σ(u)` without forming σ(u): `−softplus(−u)`.
pub fn log_sigmoid(u: f64) -> f64 {
    let x = -u;
    -(x.max(0.0) + (-x.abs()).exp().ln_1p())
}

/// `log p(o | u)` for a Bernoulli spike with probability `σ(u)`.
pub fn log_spike_probability(o: u8, u: f64) -> f64 {
    if o != 0 {
        log_sigmoid(u)
    } else {
        // log(1 − σ(u)) = log σ(−u)
        log_sigmoid(-u)
    }
}

/// Draws a spike with probability `σ(u)`, consuming exactly one uniform draw.
pub fn sample_spike<R: Rng + ?Sized>(u: f64, rng: &mut R) -> u8 {
    let draw: f64 = rng.gen();
    (draw < spike_probability(u)) as u8
}
