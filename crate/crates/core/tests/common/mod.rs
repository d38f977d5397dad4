#![allow(dead_code)]

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sflab::dirac::DiracFamily;
use sflab::param::Reparam;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Write one line to the real stdout, bypassing libtest capture.
pub fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

pub fn verdict(criterion: usize, ok: bool, detail: &str) {
    report(&format!("{} criterion {criterion}: {detail}", if ok { "PASS" } else { "FAIL" }));
}

/// Random diagonal affine family `lambda_k(s) = k + slope s + offset_k` on a
/// random interval. About half of the families have exact zeros at one or
/// both endpoints.
pub fn random_affine_family(rng: &mut ChaCha8Rng) -> DiracFamily {
    let half_width = 24i64;
    let snap = rng.gen_bool(0.5);
    let (a, b) = if snap {
        (0.0, rng.gen_range(1..=2) as f64)
    } else {
        let a = rng.gen_range(-1.0..0.5);
        (a, a + rng.gen_range(0.3..2.0))
    };
    let slope = if snap {
        rng.gen_range(-5..=5) as f64
    } else {
        rng.gen_range(-5.0..5.0)
    };
    let uniform = rng.gen_bool(0.5);
    let common = if snap {
        [0.0, 0.5, 0.25, -0.5][rng.gen_range(0..4)]
    } else {
        rng.gen_range(-0.5..0.5)
    };
    let offsets = (0..2 * half_width + 1)
        .map(|_| if uniform { common } else { common + rng.gen_range(-0.3..0.3) })
        .collect();
    DiracFamily::affine_diagonal((a, b), slope, -half_width, offsets).unwrap()
}

/// `t -> phi(t)` with `phi' = 1 + 0.6 cos` shape, mapping `[a, b]` onto
/// itself with nowhere vanishing derivative.
pub fn wobbly(a: f64, b: f64) -> Reparam {
    let len = b - a;
    let eps = 0.6 / (2.0 * std::f64::consts::PI);
    Reparam::custom(
        (a, b),
        (a, b),
        move |t| {
            let u = (t - a) / len;
            a + len * (u + eps * (2.0 * std::f64::consts::PI * u).sin())
        },
        move |t| {
            let u = (t - a) / len;
            1.0 + 0.6 * (2.0 * std::f64::consts::PI * u).cos()
        },
    )
    .unwrap()
}

const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta `sum_{n >= 0} (n + a)^(-z)`, analytically continued by
/// Euler-Maclaurin with `n_direct` explicit terms. Valid for real `z != 1`,
/// `a > 0`.
pub fn hurwitz_zeta(z: f64, a: f64, n_direct: usize) -> f64 {
    let n = n_direct as f64;
    let mut sum: f64 = (0..n_direct).map(|k| (k as f64 + a).powf(-z)).sum();
    let x = n + a;
    sum += x.powf(1.0 - z) / (z - 1.0) + 0.5 * x.powf(-z);
    let mut rising = z;
    let mut fact = 2.0;
    for (j, b2j) in BERNOULLI.iter().enumerate() {
        let k = 2 * j + 2;
        sum += b2j / fact * rising * x.powf(-z - k as f64 + 1.0);
        rising *= (z + k as f64 - 1.0) * (z + k as f64);
        fact *= ((k + 1) * (k + 2)) as f64;
    }
    sum
}

/// Independent `(eta(0), h)` of the spectrum `{k + c : k in Z}` with
/// multiplicity one, from the Hurwitz continuation.
pub fn eta_affine_oracle(c: f64) -> (f64, usize) {
    let t = c - c.floor();
    if t.abs() < 1e-14 {
        // Nonzero eigenvalues are +-1, +-2, ...: symmetric.
        return (hurwitz_zeta(0.0, 1.0, 12) - hurwitz_zeta(0.0, 1.0, 12), 1);
    }
    (hurwitz_zeta(0.0, t, 12) - hurwitz_zeta(0.0, 1.0 - t, 12), 0)
}
