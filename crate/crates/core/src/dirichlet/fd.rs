//! Finite-difference oracle: Shortley–Weller five-point scheme on a uniform
//! grid cut by the boundary, solved by successive over-relaxation.

use nalgebra::Vector2;

use super::domain::Domain;
use crate::error::{Error, Result};

/// Crossing of a grid line with the boundary: coordinate along the line and the data value there.
#[derive(Clone, Copy, Debug)]
struct Crossing {
    at: f64,
    value: f64,
}

/// Intersections of the line `{coord[axis] = c}` with a convex closed curve.
fn line_crossings<G: Fn(&Vector2<f64>) -> f64>(domain: &Domain, samples: &[(f64, Vector2<f64>)], axis: usize, c: f64, g: &G) -> Option<(Crossing, Crossing)> {
    let other = 1 - axis;
    let n = samples.len();
    let len = domain.length();
    let mut found = Vec::with_capacity(2);
    for i in 0..n {
        let (s0, p0) = samples[i];
        let (s1, p1) = if i + 1 < n { samples[i + 1] } else { (len, samples[0].1) };
        let (f0, f1) = (p0[axis] - c, p1[axis] - c);
        if f0 == 0.0 || f0.signum() != f1.signum() && f1 != 0.0 {
            let (mut lo, mut hi, mut flo) = (s0, s1, f0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = domain.at(mid).point[axis] - c;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let p = domain.at(0.5 * (lo + hi)).point;
            found.push(Crossing { at: p[other], value: g(&p) });
        }
    }
    if found.len() < 2 {
        return None;
    }
    found.sort_by(|a, b| a.at.total_cmp(&b.at));
    Some((found[0], found[found.len() - 1]))
}

/// Grid solution of `Δu = 0`, `u = g` on the boundary.
#[derive(Clone, Debug)]
pub struct FdSolution {
    origin: Vector2<f64>,
    h: f64,
    n: usize,
    values: Vec<f64>,
    inside: Vec<bool>,
    pub sweeps: usize,
    pub final_update: f64,
}

impl FdSolution {
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Bilinear interpolation; all four surrounding nodes must be interior.
    pub fn eval(&self, x: &Vector2<f64>) -> Result<f64> {
        let fx = (x.x - self.origin.x) / self.h;
        let fy = (x.y - self.origin.y) / self.h;
        if fx < 0.0 || fy < 0.0 {
            return Err(Error::Argument("point outside the grid".into()));
        }
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        if i + 1 >= self.n || j + 1 >= self.n {
            return Err(Error::Argument("point outside the grid".into()));
        }
        let corners = [self.idx(i, j), self.idx(i + 1, j), self.idx(i, j + 1), self.idx(i + 1, j + 1)];
        if corners.iter().any(|&c| !self.inside[c]) {
            return Err(Error::Argument("point too close to the boundary for the grid".into()));
        }
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v = |c: usize| self.values[corners[c]];
        Ok((1.0 - ty) * ((1.0 - tx) * v(0) + tx * v(1)) + ty * ((1.0 - tx) * v(2) + tx * v(3)))
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }
}

/// Solves on an `n × n` grid covering the domain's bounding box. The grid is
/// offset by a fraction of a cell so that no node falls on the flat side.
pub fn solve_fd<G: Fn(&Vector2<f64>) -> f64>(domain: &Domain, g: G, n: usize, tol: f64) -> Result<FdSolution> {
    if n < 8 {
        return Err(Error::Argument("grid too small".into()));
    }
    let samples: Vec<(f64, Vector2<f64>)> = domain.samples(4 * n).into_iter().map(|b| (b.s, b.point)).collect();
    let (mut lo, mut hi) = (Vector2::repeat(f64::INFINITY), Vector2::repeat(f64::NEG_INFINITY));
    for (_, p) in &samples {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let extent = (hi - lo).max();
    let h = extent * 1.02 / (n - 1) as f64;
    let origin = lo - Vector2::repeat(0.01 * extent + 0.2917 * h);

    let rows: Vec<Option<(Crossing, Crossing)>> = (0..n).map(|j| line_crossings(domain, &samples, 1, origin.y + j as f64 * h, &g)).collect();
    let cols: Vec<Option<(Crossing, Crossing)>> = (0..n).map(|i| line_crossings(domain, &samples, 0, origin.x + i as f64 * h, &g)).collect();

    let idx = |i: usize, j: usize| j * n + i;
    let mut inside = vec![false; n * n];
    for j in 0..n {
        if let Some((a, b)) = rows[j] {
            for i in 0..n {
                let x = origin.x + i as f64 * h;
                inside[idx(i, j)] = x > a.at && x < b.at;
            }
        }
    }
    // stencil per interior node: four (coefficient, neighbour or boundary value) arms
    #[derive(Clone, Copy)]
    enum Arm {
        Node(usize),
        Value(f64),
    }
    struct Stencil {
        node: usize,
        arms: [(f64, Arm); 4],
        diag: f64,
    }
    let tiny = 1e-9 * h;
    let mut stencils = Vec::new();
    let mut values = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            if !inside[idx(i, j)] {
                continue;
            }
            let x = origin.x + i as f64 * h;
            let y = origin.y + j as f64 * h;
            let (row, col) = match (rows[j], cols[i]) {
                (Some(r), Some(c)) => (r, c),
                _ => return Err(Error::Geometry("grid line crossing not found".into())),
            };
            let arm = |neighbour: Option<usize>, boundary: Crossing, dist: f64| -> (f64, Arm) {
                match neighbour {
                    Some(k) if inside[k] => (h, Arm::Node(k)),
                    _ => (dist.max(tiny), Arm::Value(boundary.value)),
                }
            };
            let e = arm((i + 1 < n).then(|| idx(i + 1, j)), row.1, row.1.at - x);
            let w = arm(i.checked_sub(1).map(|k| idx(k, j)), row.0, x - row.0.at);
            let nn = arm((j + 1 < n).then(|| idx(i, j + 1)), col.1, col.1.at - y);
            let s = arm(j.checked_sub(1).map(|k| idx(i, k)), col.0, y - col.0.at);
            let ce = 2.0 / (e.0 * (e.0 + w.0));
            let cw = 2.0 / (w.0 * (e.0 + w.0));
            let cn = 2.0 / (nn.0 * (nn.0 + s.0));
            let cs = 2.0 / (s.0 * (nn.0 + s.0));
            let init = [e.1, w.1, nn.1, s.1]
                .iter()
                .filter_map(|a| if let Arm::Value(v) = a { Some(*v) } else { None })
                .next()
                .unwrap_or(0.0);
            values[idx(i, j)] = init;
            stencils.push(Stencil { node: idx(i, j), arms: [(ce, e.1), (cw, w.1), (cn, nn.1), (cs, s.1)], diag: ce + cw + cn + cs });
        }
    }
    if stencils.is_empty() {
        return Err(Error::Geometry("no interior grid nodes".into()));
    }
    let relax = 2.0 / (1.0 + (std::f64::consts::PI / n as f64).sin());
    let (mut sweeps, mut last) = (0, f64::INFINITY);
    while sweeps < 200 * n {
        sweeps += 1;
        let mut biggest: f64 = 0.0;
        for st in &stencils {
            let mut acc = 0.0;
            for &(c, a) in &st.arms {
                acc += c * match a {
                    Arm::Node(k) => values[k],
                    Arm::Value(v) => v,
                };
            }
            let old = values[st.node];
            let new = old + relax * (acc / st.diag - old);
            biggest = biggest.max((new - old).abs());
            values[st.node] = new;
        }
        last = biggest;
        if biggest < tol {
            break;
        }
    }
    if last >= tol {
        return Err(Error::Argument(format!("relaxation stalled at update {last:e}")));
    }
    Ok(FdSolution { origin, h, n, values, inside, sweeps, final_update: last })
}
