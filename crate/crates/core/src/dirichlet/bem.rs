//! Nyström discretization of the interior Dirichlet problem with a
//! double-layer potential on uniformly spaced arc-length nodes.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::{BoundaryPoint, Domain};
use crate::error::{Error, Result};

/// Nodes per shortest wavelength below which a solve is flagged unresolved.
pub const NODES_PER_WAVELENGTH: f64 = 10.0;
/// Largest tolerated midpoint interpolation defect relative to the data size.
const INTERPOLATION_DEFECT: f64 = 1e-2;

#[derive(Debug)]
struct Nodes {
    points: Vec<BoundaryPoint>,
    weight: f64,
}

impl Nodes {
    /// `(1/2π) ν(y)·(x − y)/|x − y|²`
    fn kernel(&self, x: &Vector2<f64>, j: usize) -> f64 {
        let y = &self.points[j];
        let d = x - y.point;
        y.normal.dot(&d) / (2.0 * PI * d.norm_squared())
    }

    fn nearest(&self, x: &Vector2<f64>) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (j, p) in self.points.iter().enumerate() {
            let d = (x - p.point).norm_squared();
            if d < best.0 {
                best = (d, j);
            }
        }
        best.1
    }

    fn check_interior(&self, x: &Vector2<f64>) -> Result<()> {
        if self.points.iter().all(|p| (x - p.point).dot(&p.normal) < 0.0) {
            Ok(())
        } else {
            Err(Error::Argument(format!("point ({}, {}) is not inside the domain", x.x, x.y)))
        }
    }

    /// Row `a` with `u(x) = a·μ`, using `∫k(x,·) = −1` to subtract the density
    /// at the nearest node.
    fn evaluation_row(&self, x: &Vector2<f64>) -> Result<DVector<f64>> {
        self.check_interior(x)?;
        let near = self.nearest(x);
        let mut a = DVector::from_iterator(self.points.len(), (0..self.points.len()).map(|j| self.weight * self.kernel(x, j)));
        let total: f64 = a.iter().sum();
        a[near] -= total + 1.0;
        Ok(a)
    }
}

/// Factored Nyström system for one placed domain.
#[derive(Clone, Debug)]
pub struct BemSolver {
    domain: Domain,
    nodes: Arc<Nodes>,
    perm: Vec<usize>,
    lower: Arc<DMatrix<f64>>,
    upper: Arc<DMatrix<f64>>,
}

/// Interior solution represented by its double-layer density.
#[derive(Clone, Debug)]
pub struct BvpSolution {
    nodes: Arc<Nodes>,
    density: Vec<Complex64>,
    data: Vec<Complex64>,
    pub resolution: Resolution,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub nodes: usize,
    pub spacing: f64,
    /// Highest declared data frequency along the boundary, in cycles per unit length.
    pub max_frequency: f64,
    pub nodes_per_wavelength: f64,
    /// `max |g(mid) − cubic interpolant| / max |g|` over node midpoints.
    pub interpolation_defect: f64,
    pub resolved: bool,
}

impl BemSolver {
    pub fn new(domain: &Domain, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::Argument(format!("need at least 16 nodes, got {n}")));
        }
        let weight = domain.length() / n as f64;
        let nodes = Nodes { points: domain.samples(n), weight };
        let columns: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let k = if i == j {
                            -nodes.points[j].curvature / (4.0 * PI)
                        } else {
                            nodes.kernel(&nodes.points[i].point, j)
                        };
                        weight * k - if i == j { 0.5 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let a = DMatrix::from_iterator(n, n, columns.into_iter().flatten());
        let (p, l, u) = a.lu().unpack();
        if u.diagonal().iter().any(|d| d.abs() < 1e-14) {
            return Err(Error::Geometry("Nyström matrix is singular".into()));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut idx = DVector::from_iterator(n, (0..n).map(|i| i as f64));
        p.permute_rows(&mut idx);
        for (i, v) in idx.iter().enumerate() {
            perm[i] = *v as usize;
        }
        Ok(BemSolver { domain: domain.clone(), nodes: Arc::new(nodes), perm, lower: Arc::new(l), upper: Arc::new(u) })
    }

    /// Node count giving [`NODES_PER_WAVELENGTH`] nodes per period of data with
    /// the given highest frequency, rounded up to an even number.
    pub fn nodes_for(domain: &Domain, max_frequency: f64, minimum: usize) -> usize {
        let n = (domain.length() * max_frequency * NODES_PER_WAVELENGTH * 1.05).ceil().min(1e15) as usize;
        let n = n.max(minimum);
        n + n % 2
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn nodes(&self) -> &[BoundaryPoint] {
        &self.nodes.points
    }

    pub fn len(&self) -> usize {
        self.nodes.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.nodes.weight
    }

    fn solve_real(&self, b: &DVector<f64>) -> DVector<f64> {
        let pb = DVector::from_iterator(b.len(), self.perm.iter().map(|&i| b[i]));
        let y = self.lower.solve_lower_triangular(&pb).expect("unit lower factor");
        self.upper.solve_upper_triangular(&y).expect("checked pivots")
    }

    fn solve_transposed(&self, b: &DVector<f64>) -> DVector<f64> {
        let z = self.upper.tr_solve_upper_triangular(b).expect("checked pivots");
        let w = self.lower.tr_solve_lower_triangular(&z).expect("unit lower factor");
        let mut out = DVector::zeros(b.len());
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = w[i];
        }
        out
    }

    fn resolution<G: Fn(&Vector2<f64>) -> Complex64 + Sync>(&self, g: &G, values: &[Complex64], max_frequency: f64) -> Resolution {
        let n = self.len();
        let h = self.spacing();
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let defect = (0..n)
            .into_par_iter()
            .map(|i| {
                let at = |k: isize| values[(i as isize + k).rem_euclid(n as isize) as usize];
                let cubic = (at(0) + at(1)) * (9.0 / 16.0) - (at(-1) + at(2)) * (1.0 / 16.0);
                let mid = self.domain.at((i as f64 + 0.5) * h).point;
                (g(&mid) - cubic).norm()
            })
            .reduce(|| 0.0, f64::max);
        let defect = if scale > 0.0 { defect / scale } else { 0.0 };
        let per_wavelength = if max_frequency > 0.0 { 1.0 / (h * max_frequency) } else { f64::INFINITY };
        Resolution {
            nodes: n,
            spacing: h,
            max_frequency,
            nodes_per_wavelength: per_wavelength,
            interpolation_defect: defect,
            resolved: per_wavelength >= NODES_PER_WAVELENGTH && defect <= INTERPOLATION_DEFECT,
        }
    }

    /// Solves `Δu = 0` with `u = g` on the boundary. `max_frequency` declares
    /// the highest oscillation frequency of `g` along the boundary; the
    /// solution is flagged unresolved when the nodes cannot carry it.
    pub fn solve<G: Fn(&Vector2<f64>) -> Complex64 + Sync>(&self, g: G, max_frequency: f64) -> BvpSolution {
        let data: Vec<Complex64> = self.nodes.points.par_iter().map(|p| g(&p.point)).collect();
        let re = self.solve_real(&DVector::from_iterator(data.len(), data.iter().map(|v| v.re)));
        let im = if data.iter().any(|v| v.im != 0.0) {
            self.solve_real(&DVector::from_iterator(data.len(), data.iter().map(|v| v.im)))
        } else {
            DVector::zeros(data.len())
        };
        let density = re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let resolution = self.resolution(&g, &data, max_frequency);
        BvpSolution { nodes: self.nodes.clone(), density, data, resolution }
    }

    pub fn solve_real_data<G: Fn(&Vector2<f64>) -> f64 + Sync>(&self, g: G, max_frequency: f64) -> BvpSolution {
        self.solve(|x| Complex64::new(g(x), 0.0), max_frequency)
    }

    /// Discrete harmonic measure of `x`: `u(x) = Σ ρ_j g(y_j)` for any data
    /// `g`, so `ρ_j / h` samples the Poisson kernel `P(x, y_j)`.
    pub fn harmonic_weights(&self, x: &Vector2<f64>) -> Result<Vec<f64>> {
        let a = self.nodes.evaluation_row(x)?;
        Ok(self.solve_transposed(&a).iter().copied().collect())
    }
}

impl BvpSolution {
    pub fn eval(&self, x: &Vector2<f64>) -> Result<Complex64> {
        let a = self.nodes.evaluation_row(x)?;
        Ok(a.iter().zip(&self.density).map(|(w, m)| m * *w).sum())
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn density(&self) -> &[Complex64] {
        &self.density
    }

    pub fn resolved(&self) -> bool {
        self.resolution.resolved
    }

    /// Componentwise extremes of the nodal data, used for maximum-principle checks.
    pub fn data_range(&self) -> (f64, f64, f64, f64) {
        let mut r = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for v in &self.data {
            r = (r.0.min(v.re), r.1.max(v.re), r.2.min(v.im), r.3.max(v.im));
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::domain::PrototypeParams;
    use nalgebra::Matrix2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn proto() -> Domain {
        Domain::prototype(PrototypeParams { flat_len: 0.5, ..Default::default() }).unwrap()
    }

    fn interior_points(d: &Domain, count: usize, seed: u64) -> Vec<Vector2<f64>> {
        let (_, c) = d.area_centroid();
        let r = d.distance_to_boundary(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let t = rng.random::<f64>() * 2.0 * PI;
                let rad = 0.8 * r * rng.random::<f64>().sqrt();
                c + Vector2::new(t.cos(), t.sin()) * rad
            })
            .collect()
    }

    #[test]
    fn constants_are_reproduced() {
        let d = proto();
        let s = BemSolver::new(&d, 400).unwrap();
        let u = s.solve_real_data(|_| 1.0, 0.0);
        assert!(u.resolved());
        for x in interior_points(&d, 20, 1) {
            assert!((u.eval(&x).unwrap().re - 1.0).abs() <= 1e-8);
        }
        assert!(u.eval(&Vector2::new(0.0, -0.1)).is_err());
    }

    #[test]
    fn disk_reproduces_linear_data() {
        let d = Domain::circle(1.0).unwrap();
        let s = BemSolver::new(&d, 256).unwrap();
        let u = s.solve_real_data(|y| y.x, 1.0);
        for x in interior_points(&d, 20, 2) {
            assert!((u.eval(&x).unwrap().re - x.x).abs() <= 1e-8, "{x:?}");
        }
    }

    #[test]
    fn maximum_principle_and_weights() {
        let d = proto();
        let s = BemSolver::new(&d, 600).unwrap();
        let g = |y: &Vector2<f64>| Complex64::new((7.0 * y.x).sin() + y.y, (5.0 * y.y).cos() * y.x);
        let u = s.solve(g, 2.0);
        let (lo_r, hi_r, lo_i, hi_i) = u.data_range();
        for x in interior_points(&d, 30, 3) {
            let v = u.eval(&x).unwrap();
            assert!(v.re >= lo_r - 1e-8 && v.re <= hi_r + 1e-8);
            assert!(v.im >= lo_i - 1e-8 && v.im <= hi_i + 1e-8);
            let w = s.harmonic_weights(&x).unwrap();
            let via_weights: Complex64 = w.iter().zip(u.data()).map(|(a, b)| b * *a).sum();
            assert!((via_weights - v).norm() < 1e-11);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_covariance() {
        let d = proto();
        let t = 1.1f64;
        let m = Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
        let shift = Vector2::new(0.3, -0.2);
        let dm = d.transformed(&m, &shift).unwrap();
        let g = |y: &Vector2<f64>| (3.0 * y.x).cos() * (2.0 * y.y).exp();
        let u = BemSolver::new(&d, 500).unwrap().solve_real_data(g, 1.0);
        let um = BemSolver::new(&dm, 500).unwrap().solve_real_data(|y| g(&dm.unplace(y)), 1.0);
        for x in interior_points(&d, 10, 4) {
            let a = u.eval(&x).unwrap().re;
            let b = um.eval(&dm.place(&x)).unwrap().re;
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn under_resolved_data_is_flagged() {
        let d = proto();
        let s = BemSolver::new(&d, 200).unwrap();
        let fast = s.solve_real_data(|y| (2.0 * PI * 60.0 * y.x).cos(), 60.0);
        assert!(!fast.resolved());
        // an understated frequency is still caught by the interpolation check
        let hidden = s.solve_real_data(|y| (2.0 * PI * 60.0 * y.x).cos(), 1.0);
        assert!(!hidden.resolved());
        assert!(s.solve_real_data(|y| (2.0 * PI * 3.0 * y.x).cos(), 3.0).resolved());
        assert_eq!(BemSolver::nodes_for(&d, 3.0, 0) % 2, 0);
    }
}
