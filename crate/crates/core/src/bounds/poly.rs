//! Polynomials restricted to products of round spheres, with exact integrals
//! and exact differential operators.
//!
//! A factor S^p(r) occupies p+1 ambient variables. For f defined on R^{p+1}
//! and homogeneous of degree d in those variables,
//! Δ_S f = Δ_{R^{p+1}} f − d(d+p−1)/r² · f on the sphere, and the tangential
//! gradient pairing is ∇f·∇h − (x·∇f)(x·∇h)/r².

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::space::FunctionSpace;
use crate::catalog::{
    drift_constants, gamma_half, model_constants, paneitz_spectrum, sphere_harmonic_multiplicity,
    sphere_laplace_eigenvalue, ModelManifold, SphereFactor,
};
use crate::coefficients::CoefficientValues;
use crate::discrete::SpectrumResult;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Vec<u8>, f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(vars: usize, c: f64) -> Self {
        let mut p = Poly::zero();
        p.add_term(vec![0; vars], c);
        p
    }

    pub fn monomial(exps: Vec<u8>, c: f64) -> Self {
        let mut p = Poly::zero();
        p.add_term(exps, c);
        p
    }

    pub fn var(vars: usize, i: usize) -> Self {
        let mut e = vec![0; vars];
        e[i] = 1;
        Poly::monomial(e, 1.0)
    }

    fn add_term(&mut self, exps: Vec<u8>, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == 0.0 {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, f64)> {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_scaled(&mut self, c: f64, other: &Poly) {
        for (e, v) in &other.terms {
            self.add_term(e.clone(), c * v);
        }
    }

    pub fn scaled(&self, c: f64) -> Poly {
        let mut out = Poly::zero();
        out.add_scaled(c, self);
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut d = e.clone();
                d[i] -= 1;
                out.add_term(d, c * e[i] as f64);
            }
        }
        out
    }

    /// Multiplies each term by `weight(exponents)`.
    fn map_terms(&self, weight: impl Fn(&[u8]) -> f64) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * weight(e));
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&k, xi)| xi.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

/// ∫_{S^p(r)} Π x_j^{a_j} = 2 Π Γ((a_j+1)/2) / Γ((|a|+p+1)/2) · r^{p+|a|}.
pub fn sphere_monomial_integral(exps: &[u8], radius: f64) -> f64 {
    if exps.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let p = exps.len() - 1;
    let total: usize = exps.iter().map(|&a| a as usize).sum();
    let num: f64 = exps.iter().map(|&a| gamma_half(a as usize + 1)).product();
    2.0 * num / gamma_half(total + p + 1) * radius.powi((p + total) as i32)
}

/// Exact function space of polynomials on a product of spheres.
#[derive(Debug, Clone)]
pub struct PolySpace {
    model: ModelManifold,
    factors: Vec<SphereFactor>,
    offsets: Vec<usize>,
    vars: usize,
    coeffs: CoefficientValues,
    kappa: Vec<f64>,
    zero_order: f64,
    h2: f64,
    r: f64,
    q: f64,
    points: Vec<Vec<f64>>,
}

/// Eigenvalues with eigenfunctions and residuals ‖Pu − λu‖.
#[derive(Debug, Clone)]
pub struct EigenBasis<F> {
    pub values: Vec<f64>,
    pub functions: Vec<F>,
    pub residuals: Vec<f64>,
}

impl From<&SpectrumResult> for EigenBasis<Vec<f64>> {
    fn from(s: &SpectrumResult) -> Self {
        EigenBasis {
            values: s.eigenvalues.clone(),
            functions: s.eigenfunctions.clone(),
            residuals: s.residuals.clone(),
        }
    }
}

pub const SAMPLE_POINTS: usize = 64;
const SAMPLE_SEED: u64 = 0x5EED;

impl PolySpace {
    pub fn new(model: &ModelManifold) -> Result<Self> {
        let factors = model.factors();
        let mut offsets = Vec::with_capacity(factors.len());
        let mut vars = 0;
        for f in &factors {
            offsets.push(vars);
            vars += f.dim + 1;
        }
        if vars > u8::MAX as usize {
            return Err(LabError::Unsupported(format!("{vars} ambient variables")));
        }
        let c = model_constants(model)?;
        let (kappa, zero_order) = drift_constants(model)?;
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        let points = (0..SAMPLE_POINTS)
            .map(|_| {
                let mut x = Vec::with_capacity(vars);
                for f in &factors {
                    let g: Vec<f64> = (0..=f.dim)
                        .map(|_| StandardNormal.sample(&mut rng))
                        .collect();
                    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                    x.extend(g.iter().map(|v| v * f.radius / norm));
                }
                x
            })
            .collect();
        Ok(PolySpace {
            model: model.clone(),
            offsets,
            vars,
            coeffs: model.coefficients()?,
            kappa,
            zero_order,
            h2: c.h2_euclidean,
            r: c.r,
            q: c.q,
            points,
            factors,
        })
    }

    pub fn model(&self) -> &ModelManifold {
        &self.model
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    fn block(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i] + self.factors[i].dim + 1
    }

    fn block_degree(&self, i: usize, e: &[u8]) -> f64 {
        e[self.block(i)].iter().map(|&k| k as f64).sum()
    }

    /// Laplacian of the i-th factor.
    pub fn factor_laplacian(&self, f: &Poly, i: usize) -> Poly {
        let (p, r2) = (self.factors[i].dim as f64, self.factors[i].radius.powi(2));
        let mut out = f.map_terms(|e| {
            let d = self.block_degree(i, e);
            -d * (d + p - 1.0) / r2
        });
        for j in self.block(i) {
            out.add_scaled(1.0, &f.derivative(j).derivative(j));
        }
        out
    }

    /// Tangential pairing on the i-th factor.
    fn factor_grad_dot(&self, f: &Poly, h: &Poly, i: usize) -> Poly {
        let r2 = self.factors[i].radius.powi(2);
        let mut out = Poly::zero();
        for j in self.block(i) {
            out.add_scaled(1.0, &f.derivative(j).mul(&h.derivative(j)));
        }
        let ef = f.map_terms(|e| self.block_degree(i, e));
        let eh = h.map_terms(|e| self.block_degree(i, e));
        out.add_scaled(-1.0 / r2, &ef.mul(&eh));
        out
    }

    /// Integral over one factor of a polynomial in that factor's variables
    /// only; other exponents must vanish.
    fn factor_integral(&self, f: &Poly, i: usize) -> f64 {
        f.terms()
            .map(|(e, c)| c * sphere_monomial_integral(&e[self.block(i)], self.factors[i].radius))
            .sum()
    }

    /// Orthonormal degree-k spherical harmonics on factor i, as polynomials
    /// in that block.
    fn factor_harmonics(&self, i: usize, k: usize) -> Result<Vec<Poly>> {
        let f = self.factors[i];
        let block = self.block(i);
        let mut basis = Vec::new();
        let mut exps = vec![0u8; f.dim + 1];
        homogeneous(&mut exps, 0, k, &mut |e| {
            let mut full = vec![0u8; self.vars];
            full[block.clone()].copy_from_slice(e);
            basis.push(Poly::monomial(full, 1.0));
        });
        let m = basis.len();
        let gram = DMatrix::from_fn(m, m, |a, b| {
            self.factor_integral(&basis[a].mul(&basis[b]), i)
        });
        let lap: Vec<Poly> = basis.iter().map(|b| self.factor_laplacian(b, i)).collect();
        let stiff = DMatrix::from_fn(m, m, |a, b| self.factor_integral(&basis[a].mul(&lap[b]), i));
        // restrictions of monomials are dependent on the sphere; keep the range of the Gram matrix
        let g = SymmetricEigen::new(gram);
        let top = g.eigenvalues.amax();
        let keep: Vec<usize> = (0..m).filter(|&j| g.eigenvalues[j] > 1e-12 * top).collect();
        let c = DMatrix::from_fn(m, keep.len(), |a, j| {
            g.eigenvectors[(a, keep[j])] / g.eigenvalues[keep[j]].sqrt()
        });
        let projected = c.transpose() * &stiff * &c;
        let projected = (&projected + projected.transpose()) * 0.5;
        let e = SymmetricEigen::new(projected);
        let mu = sphere_laplace_eigenvalue(f.dim, k, f.radius);
        let mut out = Vec::new();
        for j in 0..e.eigenvalues.len() {
            if (e.eigenvalues[j] + mu).abs() <= 1e-8 * mu.max(1.0) {
                let coef = &c * e.eigenvectors.column(j);
                let mut poly = Poly::zero();
                for (a, b) in basis.iter().enumerate() {
                    poly.add_scaled(coef[a], b);
                }
                out.push(poly);
            }
        }
        let want = sphere_harmonic_multiplicity(f.dim, k) as usize;
        if out.len() != want {
            return Err(LabError::Unsupported(format!(
                "found {} degree-{k} harmonics on S^{}, expected {want}",
                out.len(),
                f.dim
            )));
        }
        Ok(out)
    }

    /// The `count` lowest eigenpairs, built from products of factor
    /// harmonics; eigenvalues are recomputed as exact Rayleigh quotients.
    pub fn eigenpairs(&self, count: usize) -> Result<EigenBasis<Poly>> {
        let mut lines = count.max(1);
        let spec = loop {
            let spec = paneitz_spectrum(&self.model, lines)?;
            if spec.total_multiplicity() >= count as u64 {
                break spec;
            }
            lines *= 2;
        };
        let mut cache: BTreeMap<(usize, usize), Vec<Poly>> = BTreeMap::new();
        let mut pairs: Vec<(f64, Poly, f64)> = Vec::new();
        'lines: for line in &spec.lines {
            for label in &line.labels {
                let mut products = vec![Poly::constant(self.vars, 1.0)];
                for (i, &k) in label.iter().enumerate() {
                    if let Entry::Vacant(e) = cache.entry((i, k)) {
                        e.insert(self.factor_harmonics(i, k)?);
                    }
                    let h = &cache[&(i, k)];
                    products = products
                        .iter()
                        .flat_map(|p| h.iter().map(move |q| p.mul(q)))
                        .collect();
                }
                for u in products {
                    let pu = self.paneitz(&u)?;
                    let lambda = self.inner(&u, &pu);
                    let mut res = pu.clone();
                    res.add_scaled(-lambda, &u);
                    let residual = self.inner(&res, &res).max(0.0).sqrt();
                    pairs.push((lambda, u, residual));
                }
            }
            if pairs.len() >= count {
                break 'lines;
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.truncate(count);
        Ok(EigenBasis {
            values: pairs.iter().map(|p| p.0).collect(),
            residuals: pairs.iter().map(|p| p.2).collect(),
            functions: pairs.into_iter().map(|p| p.1).collect(),
        })
    }
}

/// Calls `emit` with every exponent vector of total degree `left` in the
/// slots from `at` on.
fn homogeneous(exps: &mut [u8], at: usize, left: usize, emit: &mut impl FnMut(&[u8])) {
    if at + 1 == exps.len() {
        exps[at] = left as u8;
        emit(exps);
        return;
    }
    for k in (0..=left).rev() {
        exps[at] = k as u8;
        homogeneous(exps, at + 1, left - k, emit);
    }
    exps[at] = 0;
}

impl FunctionSpace for PolySpace {
    type Function = Poly;

    fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).sum()
    }

    fn coefficients(&self) -> &CoefficientValues {
        &self.coeffs
    }

    fn coordinates(&self) -> Vec<Poly> {
        (0..self.vars).map(|i| Poly::var(self.vars, i)).collect()
    }

    fn constant(&self, value: f64) -> Poly {
        Poly::constant(self.vars, value)
    }

    fn combine(&self, terms: &[(f64, &Poly)]) -> Poly {
        let mut out = Poly::zero();
        for (c, f) in terms {
            out.add_scaled(*c, f);
        }
        out
    }

    fn product(&self, f: &Poly, h: &Poly) -> Poly {
        f.mul(h)
    }

    fn integrate(&self, f: &Poly) -> f64 {
        f.terms()
            .map(|(e, c)| {
                c * (0..self.factors.len())
                    .map(|i| sphere_monomial_integral(&e[self.block(i)], self.factors[i].radius))
                    .product::<f64>()
            })
            .sum()
    }

    fn laplacian(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero();
        for i in 0..self.factors.len() {
            out.add_scaled(1.0, &self.factor_laplacian(f, i));
        }
        out
    }

    fn grad_dot(&self, f: &Poly, h: &Poly) -> Poly {
        let mut out = Poly::zero();
        for i in 0..self.factors.len() {
            out.add_scaled(1.0, &self.factor_grad_dot(f, h, i));
        }
        out
    }

    /// The tensor is κ_i times the metric on factor i.
    fn drift_form(&self, f: &Poly, h: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (i, k) in self.kappa.iter().enumerate() {
            out.add_scaled(*k, &self.factor_grad_dot(f, h, i));
        }
        out
    }

    /// Δ²f − Σ κ_i Δ_i f + (n−4)/2·Q f; the drift tensor is parallel, so its
    /// divergence term splits over the factors.
    fn paneitz(&self, f: &Poly) -> Result<Poly> {
        let lap = self.laplacian(f);
        let mut out = self.laplacian(&lap);
        for (i, k) in self.kappa.iter().enumerate() {
            out.add_scaled(-k, &self.factor_laplacian(f, i));
        }
        out.add_scaled(self.zero_order, f);
        Ok(out)
    }

    fn mean_curvature2(&self) -> Poly {
        self.constant(self.h2)
    }

    fn scalar_curvature(&self) -> Poly {
        self.constant(self.r)
    }

    fn q_curvature(&self) -> Poly {
        self.constant(self.q)
    }

    fn samples(&self, f: &Poly) -> Vec<f64> {
        self.points.iter().map(|x| f.eval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{paneitz_eigenvalues, sphere_volume, Ambient};
    use approx::assert_relative_eq;

    #[test]
    fn monomial_integrals() {
        // ∫_{S²(1)} x² = 4π/3, ∫ x²y² = 4π/15
        assert_relative_eq!(
            sphere_monomial_integral(&[2, 0, 0], 1.0),
            4.0 * std::f64::consts::PI / 3.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            sphere_monomial_integral(&[2, 2, 0], 1.0),
            4.0 * std::f64::consts::PI / 15.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            sphere_monomial_integral(&[0, 0, 0, 0, 0], 2.0),
            sphere_volume(4, 2.0),
            max_relative = 1e-14
        );
        assert_eq!(sphere_monomial_integral(&[1, 2], 1.0), 0.0);
    }

    #[test]
    fn sphere_relation_holds_under_integration() {
        let m = ModelManifold::round_sphere(3, 1.5, Ambient::Euclidean).unwrap();
        let s = PolySpace::new(&m).unwrap();
        let ys = s.coordinates();
        let mut r2 = Poly::zero();
        for y in &ys {
            r2.add_scaled(1.0, &y.mul(y));
        }
        let f = ys[0].mul(&ys[1]).mul(&ys[1]);
        // ∫ |x|² f = r² ∫ f for any f
        assert_relative_eq!(
            s.integrate(&r2.mul(&f.mul(&f))),
            2.25 * s.integrate(&f.mul(&f)),
            max_relative = 1e-13
        );
    }

    #[test]
    fn coordinate_functions_are_first_harmonics() {
        let m = ModelManifold::round_sphere(4, 2.0, Ambient::Euclidean).unwrap();
        let s = PolySpace::new(&m).unwrap();
        for y in s.coordinates() {
            let lap = s.laplacian(&y);
            assert_eq!(lap, y.scaled(-4.0 / 4.0));
        }
    }

    #[test]
    fn eigenpairs_match_catalog() {
        let models = [
            ModelManifold::round_sphere(4, 1.0, Ambient::Euclidean).unwrap(),
            ModelManifold::round_sphere(5, 1.0, Ambient::Euclidean).unwrap(),
            ModelManifold::sphere_product(&[(2, 0.6), (2, 0.8)], Ambient::UnitSphere).unwrap(),
            ModelManifold::flat_torus(&[1.0, 0.5, 0.7], Ambient::Euclidean).unwrap(),
        ];
        for m in &models {
            let s = PolySpace::new(m).unwrap();
            let e = s.eigenpairs(20).unwrap();
            let oracle = paneitz_eigenvalues(m, 20).unwrap();
            for (a, b) in e.values.iter().zip(&oracle) {
                assert!(
                    (a - b).abs() <= 1e-10 * b.abs().max(1.0),
                    "{}: {a} vs {b}",
                    m.id()
                );
            }
            assert!(
                e.residuals.iter().all(|r| *r < 1e-9),
                "{}: {:?}",
                m.id(),
                e.residuals
            );
            for (i, u) in e.functions.iter().enumerate() {
                for (j, v) in e.functions.iter().enumerate().skip(i) {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((s.inner(u, v) - target).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn paneitz_is_symmetric() {
        let m = ModelManifold::sphere_product(&[(2, 0.6), (3, 0.8)], Ambient::UnitSphere).unwrap();
        let s = PolySpace::new(&m).unwrap();
        let y = s.coordinates();
        let f = s.combine(&[
            (1.0, &y[0].mul(&y[3])),
            (0.5, &y[1]),
            (2.0, &s.constant(1.0)),
        ]);
        let h = s.combine(&[(1.0, &y[2].mul(&y[2]).mul(&y[4])), (-1.0, &y[5])]);
        let a = s.inner(&f, &s.paneitz(&h).unwrap());
        let b = s.inner(&h, &s.paneitz(&f).unwrap());
        assert!((a - b).abs() < 1e-11 * a.abs().max(1.0), "{a} vs {b}");
        // Green: ∫ f Δh = −∫ g(∇f, ∇h)
        let lhs = s.inner(&f, &s.laplacian(&h));
        let rhs = -s.integrate(&s.grad_dot(&f, &h));
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }
}
