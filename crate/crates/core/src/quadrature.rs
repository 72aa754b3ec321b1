//! Exact element averages of `g(v(x))` for a piecewise-linear `v`.
//!
//! Over a segment the average is the first divided difference of an
//! antiderivative `G1`; over a triangle it is twice the second divided
//! difference of a second antiderivative `G2`. When the nodal values are close
//! on the scale where `g` varies, Gauss rules on the linear interpolant take
//! over to avoid cancellation.

/// Integrand with its first and second antiderivatives.
pub trait Integrand {
    fn g(&self, x: f64) -> f64;
    fn g1(&self, x: f64) -> f64;
    fn g2(&self, x: f64) -> f64;
    /// Length scale on which `g` varies near `x`.
    fn scale(&self, x: f64) -> f64;
}

// 5-point Gauss–Legendre on [0, 1]
const GL_NODES: [f64; 5] = [
    0.046_910_077_030_668_0,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_6,
    0.953_089_922_969_332,
];
const GL_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_54,
    0.239_314_335_249_683_2,
    0.284_444_444_444_444_4,
    0.239_314_335_249_683_2,
    0.118_463_442_528_094_54,
];

// 6-point, degree-4 rule on the reference triangle (barycentric, weights sum to 1)
const TRI_A: f64 = 0.445_948_490_915_965;
const TRI_B: f64 = 0.091_576_213_509_771;
const TRI_WA: f64 = 0.223_381_589_678_011;
const TRI_WB: f64 = 0.109_951_743_655_322;

const CLOSE: f64 = 1e-3;

fn segment_mean_of<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(t, w)| w * f(a + t * (b - a)))
        .sum()
}

/// Average of `g(v)` over a segment with endpoint values `a`, `b`.
pub fn segment_mean<I: Integrand>(f: &I, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    if (b - a).abs() <= CLOSE * f.scale(mid) {
        segment_mean_of(|x| f.g(x), a, b)
    } else {
        (f.g1(b) - f.g1(a)) / (b - a)
    }
}

/// First divided difference of `G2`, i.e. the average of `G1` over `[a, b]`.
fn g2_divided<I: Integrand>(f: &I, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    if (b - a).abs() <= CLOSE * f.scale(mid) {
        segment_mean_of(|x| f.g1(x), a, b)
    } else {
        (f.g2(b) - f.g2(a)) / (b - a)
    }
}

/// Average of `g(v)` over a triangle with vertex values `vals`.
pub fn triangle_mean<I: Integrand>(f: &I, vals: [f64; 3]) -> f64 {
    let mut v = vals;
    v.sort_by(f64::total_cmp);
    let [a, b, c] = v;
    let centre = (a + b + c) / 3.0;
    if c - a <= CLOSE * f.scale(centre) {
        let at = |l0: f64, l1: f64, l2: f64| f.g(l0 * vals[0] + l1 * vals[1] + l2 * vals[2]);
        let (p, q) = (1.0 - 2.0 * TRI_A, 1.0 - 2.0 * TRI_B);
        return TRI_WA * (at(TRI_A, TRI_A, p) + at(TRI_A, p, TRI_A) + at(p, TRI_A, TRI_A))
            + TRI_WB * (at(TRI_B, TRI_B, q) + at(TRI_B, q, TRI_B) + at(q, TRI_B, TRI_B));
    }
    2.0 * (g2_divided(f, b, c) - g2_divided(f, a, b)) / (c - a)
}

/// Average of `g(v)` over a simplex (segment or triangle) with nodal values `vals`.
pub fn simplex_mean<I: Integrand>(f: &I, vals: &[f64]) -> f64 {
    match vals {
        [a, b] => segment_mean(f, *a, *b),
        [a, b, c] => triangle_mean(f, [*a, *b, *c]),
        _ => panic!("simplex_mean expects 2 or 3 nodal values"),
    }
}

/// `g(x) = exp(rate * x)`.
pub struct Exponential {
    pub rate: f64,
}

impl Integrand for Exponential {
    fn g(&self, x: f64) -> f64 {
        (self.rate * x).exp()
    }
    fn g1(&self, x: f64) -> f64 {
        (self.rate * x).exp() / self.rate
    }
    fn g2(&self, x: f64) -> f64 {
        (self.rate * x).exp() / (self.rate * self.rate)
    }
    fn scale(&self, _x: f64) -> f64 {
        1.0 / self.rate.abs()
    }
}

/// `g(x) = 1 / (μ + x)` for `x ≥ 0`.
pub struct Reciprocal {
    pub mu: f64,
}

impl Integrand for Reciprocal {
    fn g(&self, x: f64) -> f64 {
        1.0 / (self.mu + x)
    }
    fn g1(&self, x: f64) -> f64 {
        (self.mu + x).ln()
    }
    fn g2(&self, x: f64) -> f64 {
        let y = self.mu + x;
        y * y.ln() - y
    }
    fn scale(&self, x: f64) -> f64 {
        self.mu + x
    }
}
