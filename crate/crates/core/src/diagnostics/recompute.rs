//! Ledger quantities recomputed along routes that share no code with the
//! solver's accumulators: element loops where the solver uses assembled
//! matrices, nodal quadrature where it uses spectral sums, and vice versa.

use crate::problem::Discretization;
use crate::quadrature::{triangle_mean, Reciprocal};
use crate::solver::eta;
use crate::spectral::NodalField;

fn local<'a>(u: &NodalField, el: &[usize], buf: &'a mut [f64; 3]) -> &'a [f64] {
    for (slot, &i) in buf.iter_mut().zip(el) {
        *slot = u[i];
    }
    &buf[..el.len()]
}

/// `∫ u` as `Σ_e |e| ū_e`.
pub fn mass(disc: &Discretization, u: &NodalField) -> f64 {
    disc.domain
        .elements()
        .enumerate()
        .map(|(e, el)| disc.domain.geometry(e).volume * el.iter().map(|&i| u[i]).sum::<f64>() / el.len() as f64)
        .sum()
}

/// `∫ η(u)` by vertex quadrature, element by element.
pub fn entropy(disc: &Discretization, u: &NodalField, mu: f64) -> f64 {
    disc.domain
        .elements()
        .enumerate()
        .map(|(e, el)| {
            let w = disc.domain.geometry(e).volume / el.len() as f64;
            el.iter().map(|&i| w * eta(u[i], mu)).sum::<f64>()
        })
        .sum()
}

/// `½ (H_s u)ᵀ M (H_s u)`.
pub fn hs_energy(disc: &Discretization, s: f64, u: &NodalField) -> f64 {
    let h = disc.dec.apply_power(-0.5 * s, u);
    0.5 * h.dot(&disc.ops.mass.mul_vec(&h))
}

/// `∫ |∇v|²` element by element.
pub fn grad_sq(disc: &Discretization, v: &NodalField) -> f64 {
    let mut buf = [0.0; 3];
    disc.domain
        .elements()
        .enumerate()
        .map(|(e, el)| {
            let geo = disc.domain.geometry(e);
            let g = geo.gradient(local(v, el, &mut buf));
            geo.volume * (g[0] * g[0] + g[1] * g[1])
        })
        .sum()
}

/// `∫ |∇u|² / (μ + u⁺)`; closed-form log mean on segments.
pub fn viscous_integrand(disc: &Discretization, u: &NodalField, mu: f64) -> f64 {
    let mut buf = [0.0; 3];
    let r = Reciprocal { mu };
    let mut total = 0.0;
    for (e, el) in disc.domain.elements().enumerate() {
        let geo = disc.domain.geometry(e);
        let vals = local(u, el, &mut buf);
        let g = geo.gradient(vals);
        let g2 = g[0] * g[0] + g[1] * g[1];
        if g2 == 0.0 {
            continue;
        }
        let mean = match *vals {
            [a, b] => {
                let (a, b) = (mu + a.max(0.0), mu + b.max(0.0));
                let d = b - a;
                if d.abs() <= 1e-3 * a.min(b) {
                    // series of ln(b/a)/(b−a) about the midpoint
                    let m = 0.5 * (a + b);
                    let x = d / (2.0 * m);
                    (1.0 + x * x / 3.0 + x.powi(4) / 5.0) / m
                } else {
                    (b / a).ln() / d
                }
            }
            [a, b, c] => triangle_mean(&r, [a.max(0.0), b.max(0.0), c.max(0.0)]),
            _ => unreachable!(),
        };
        total += geo.volume * g2 * mean;
    }
    total
}

/// `Σ_e |e| (μ + ū_e)⁺ |∇K_s u|²` with `K_s u` synthesized from scaled coefficients.
pub fn pressure_dissipation(disc: &Discretization, s: f64, mu: f64, u: &NodalField) -> f64 {
    let mut c = disc.dec.coefficients(u);
    for (ck, l) in c.iter_mut().zip(disc.dec.eigenvalues().iter()) {
        *ck /= l.powf(s);
    }
    let k = disc.dec.synthesize(&c);
    let mut buf = [0.0; 3];
    disc.domain
        .elements()
        .enumerate()
        .map(|(e, el)| {
            let geo = disc.domain.geometry(e);
            let w = (mu + el.iter().map(|&i| u[i]).sum::<f64>() / el.len() as f64).max(0.0);
            let g = geo.gradient(local(&k, el, &mut buf));
            geo.volume * w * (g[0] * g[0] + g[1] * g[1])
        })
        .sum()
}

/// Element-wise `∫ P1(u)²`, exact for the piecewise-linear interpolant.
pub fn element_square_integral(disc: &Discretization, u: &NodalField, e: usize) -> f64 {
    let el = disc.domain.element(e);
    let vol = disc.domain.geometry(e).volume;
    let sum: f64 = el.iter().map(|&i| u[i]).sum();
    let sq: f64 = el.iter().map(|&i| u[i] * u[i]).sum();
    // ∫ (Σ u_a λ_a)² = vol · (Σ u_a² + (Σ u_a)²) / ((d+1)(d+2))
    let d = el.len() - 1;
    vol * (sq + sum * sum) / ((d + 1) * (d + 2)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::MassMode;
    use crate::coefficients::CoefficientSpec;
    use crate::mesh::Side;

    #[test]
    fn square_integral_of_linear_field() {
        let d = Discretization::build(1, 4, &[Side::Left], &CoefficientSpec::Identity, MassMode::Lumped).unwrap();
        let u = NodalField::from_fn(5, |i, _| i as f64 / 4.0);
        let total: f64 = (0..4).map(|e| element_square_integral(&d, &u, e)).sum();
        assert!((total - 1.0 / 3.0).abs() < 1e-15);
        let d2 = Discretization::build(2, 4, &[Side::Left], &CoefficientSpec::Identity, MassMode::Lumped).unwrap();
        let u2 = NodalField::from_fn(25, |i, _| d2.domain.node_coords()[i][1]);
        let total2: f64 = (0..d2.domain.n_elements()).map(|e| element_square_integral(&d2, &u2, e)).sum();
        assert!((total2 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn viscous_log_mean_branches_agree() {
        let d = Discretization::build(1, 4, &[Side::Left], &CoefficientSpec::Identity, MassMode::Lumped).unwrap();
        let mu = 0.5;
        // only the first element has a gradient: |e| (b/|e|)² = 4b²
        let f = |b: f64| viscous_integrand(&d, &NodalField::from_vec(vec![0.0, b, b, b, b]), mu) / (4.0 * b * b);
        // exact mean of 1/(μ+x) on [0, b] is ln(1 + b/μ)/b
        for b in [1e-6, 1e-4, 0.3] {
            let want = (b / mu).ln_1p() / b;
            assert!((f(b) - want).abs() < 1e-12 * want, "{b}");
        }
    }
}
