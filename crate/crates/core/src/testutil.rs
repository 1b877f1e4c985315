//! Independent numerical oracles for unit tests. Nothing here calls into the
//! exponential-integral code paths under test.

pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `E1(x)` via `t = e^s`: `E1(x) = e^{-x} ∫_{ln x}^{ln(x+80)} e^{-(e^s - x)} ds`.
pub fn e1_quadrature(x: f64) -> f64 {
    let g = |s: f64| (-(s.exp() - x)).exp();
    let lo = x.ln();
    let hi = (x + 80.0).ln();
    // Split into pieces so the relative tolerance is meaningful everywhere.
    let n = 64;
    let mut sum = 0.0;
    for i in 0..n {
        let a = lo + (hi - lo) * i as f64 / n as f64;
        let b = lo + (hi - lo) * (i + 1) as f64 / n as f64;
        sum += adaptive_simpson(g, a, b, 1e-16);
    }
    (-x).exp() * sum
}

/// Nodes and weights of n-point Gauss–Laguerre quadrature (weight e^{-x}),
/// by Newton iteration on the three-term recurrence.
pub fn gauss_laguerre(n: usize) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(n);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - out[i - 2].0)
            }
        };
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..200 {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            pp = (nf * p1 - nf * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        out.push((z, -1.0 / (pp * nf * p2)));
    }
    out
}

#[test]
fn gauss_laguerre_integrates_polynomials() {
    let rule = gauss_laguerre(64);
    let weights: f64 = rule.iter().map(|&(_, w)| w).sum();
    assert!((weights - 1.0).abs() < 1e-12);
    let third: f64 = rule.iter().map(|&(x, w)| w * x * x * x).sum();
    assert!((third - 6.0).abs() < 1e-9);
}
