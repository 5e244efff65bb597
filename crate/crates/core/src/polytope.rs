//! Convex polytopes given by integer halfspaces and exact lattice point
//! enumeration.
//!
//! A halfspace row `[a_1, .., a_d, b]` stands for `a . x + b >= 0`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Refuse enumeration above this many candidate points.
pub const MAX_CANDIDATES: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<i64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    halfspaces: Vec<Halfspace>,
    // row scaled to integers: (q a, p) with offset = p / q
    exact: Vec<(Vec<i128>, i128)>,
    dim: usize,
}

/// Integer points split by membership.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LatticePoints {
    pub interior: Vec<Vec<i64>>,
    pub boundary: Vec<Vec<i64>>,
}

impl Polytope {
    pub fn new(halfspaces: Vec<Halfspace>) -> Result<Self> {
        let dim = halfspaces
            .first()
            .map(|h| h.normal.len())
            .ok_or_else(|| Error::InvalidPolytope("no halfspaces".into()))?;
        if dim == 0 {
            return Err(Error::InvalidPolytope("dimension 0".into()));
        }
        let mut exact = Vec::with_capacity(halfspaces.len());
        for (i, h) in halfspaces.iter().enumerate() {
            if h.normal.len() != dim {
                return Err(Error::InvalidPolytope(format!(
                    "halfspace {i} has {} normal entries, expected {dim}",
                    h.normal.len()
                )));
            }
            if h.normal.iter().all(|&a| a == 0) {
                return Err(Error::InvalidPolytope(format!("halfspace {i} has zero normal")));
            }
            let r = Ratio::<i64>::approximate_float(h.offset).ok_or_else(|| {
                Error::InvalidPolytope(format!("halfspace {i} offset {} not representable", h.offset))
            })?;
            let (p, q) = (*r.numer() as i128, *r.denom() as i128);
            exact.push((h.normal.iter().map(|&a| a as i128 * q).collect(), p));
        }
        let poly = Polytope {
            halfspaces,
            exact,
            dim,
        };
        if poly.recession_direction().is_some() {
            return Err(Error::UnboundedPolytope);
        }
        if poly.vertices().is_empty() {
            return Err(Error::InvalidPolytope("empty polytope".into()));
        }
        Ok(poly)
    }

    /// Rows `[a_1, .., a_d, b]` with integer offsets.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let hs = rows
            .iter()
            .map(|r| {
                let r = r.as_ref();
                if r.len() < 2 {
                    return Err(Error::InvalidPolytope("row shorter than 2".into()));
                }
                Ok(Halfspace {
                    normal: r[..r.len() - 1].to_vec(),
                    offset: r[r.len() - 1] as f64,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(hs)
    }

    /// Axis box `prod [lo_j, hi_j]`.
    pub fn axis_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let d = lo.len();
        let mut hs = Vec::with_capacity(2 * d);
        for j in 0..d {
            let mut e = vec![0; d];
            e[j] = 1;
            hs.push(Halfspace {
                normal: e.clone(),
                offset: -lo[j],
            });
            e[j] = -1;
            hs.push(Halfspace {
                normal: e,
                offset: hi[j],
            });
        }
        Self::new(hs)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// A nonzero `r` with `A r >= 0`, if the polytope is unbounded.
    fn recession_direction(&self) -> Option<Vec<i128>> {
        let d = self.dim;
        let a: Vec<Vec<i128>> = self.exact.iter().map(|(n, _)| n.clone()).collect();
        let feasible = |r: &[i128]| {
            a.iter()
                .all(|row| row.iter().zip(r).map(|(x, y)| x * y).sum::<i128>() >= 0)
        };
        if rank(&a) < d {
            // A has a kernel: every kernel vector is a recession direction
            return Some(kernel_vector(&a, d));
        }
        // extreme rays of a pointed cone lie on d - 1 independent facets
        for subset in combinations(a.len(), d - 1) {
            let rows: Vec<Vec<i128>> = subset.iter().map(|&i| a[i].clone()).collect();
            let r = cofactor_normal(&rows, d);
            if r.iter().all(|&v| v == 0) {
                continue;
            }
            let neg: Vec<i128> = r.iter().map(|v| -v).collect();
            if feasible(&r) {
                return Some(r);
            }
            if feasible(&neg) {
                return Some(neg);
            }
        }
        None
    }

    /// Vertices in floating point, one per nondegenerate d-subset of facets.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dim;
        let mut out: Vec<Vec<f64>> = Vec::new();
        for subset in combinations(self.halfspaces.len(), d) {
            let m: Vec<Vec<f64>> = subset
                .iter()
                .map(|&i| self.halfspaces[i].normal.iter().map(|&v| v as f64).collect())
                .collect();
            let rhs: Vec<f64> = subset.iter().map(|&i| -self.halfspaces[i].offset).collect();
            if let Some(x) = solve(m, rhs) {
                if self.contains_real(&x, 1e-9) && !out.iter().any(|v| dist(v, &x) < 1e-9) {
                    out.push(x);
                }
            }
        }
        out
    }

    pub fn contains_real(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| slack(h, x) >= -tol)
    }

    /// Strict interior membership for a real point.
    pub fn interior_contains_real(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| slack(h, x) > tol)
    }

    /// Integer bounding box `[floor(min), ceil(max)]` per coordinate.
    pub fn bounding_box(&self) -> Result<Vec<(i64, i64)>> {
        let verts = self.vertices();
        if verts.is_empty() {
            return Err(Error::InvalidPolytope("empty polytope".into()));
        }
        Ok((0..self.dim)
            .map(|j| {
                let lo = verts.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min);
                let hi = verts.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max);
                ((lo - 1e-9).floor() as i64, (hi + 1e-9).ceil() as i64)
            })
            .collect())
    }

    /// Exact classification of an integer point: `None` outside, otherwise
    /// `Some(true)` for the interior.
    pub fn classify(&self, x: &[i64]) -> Option<bool> {
        let mut interior = true;
        for (n, p) in &self.exact {
            let s: i128 = n.iter().zip(x).map(|(a, &v)| a * v as i128).sum::<i128>() + p;
            if s < 0 {
                return None;
            }
            if s == 0 {
                interior = false;
            }
        }
        Some(interior)
    }

    /// Integer points, lexicographically ordered.
    pub fn lattice_points(&self) -> Result<LatticePoints> {
        let bbox = self.bounding_box()?;
        let count: u64 = bbox
            .iter()
            .map(|(lo, hi)| (hi - lo + 1).max(0) as u64)
            .try_fold(1u64, |acc, n| acc.checked_mul(n))
            .unwrap_or(u64::MAX);
        if count > MAX_CANDIDATES {
            return Err(Error::InvalidPolytope(format!(
                "bounding box holds {count} candidates, limit {MAX_CANDIDATES}"
            )));
        }
        let mut out = LatticePoints::default();
        let mut x: Vec<i64> = bbox.iter().map(|b| b.0).collect();
        loop {
            match self.classify(&x) {
                Some(true) => out.interior.push(x.clone()),
                Some(false) => out.boundary.push(x.clone()),
                None => {}
            }
            // odometer, last coordinate fastest
            let mut j = self.dim;
            loop {
                if j == 0 {
                    return Ok(out);
                }
                j -= 1;
                if x[j] < bbox[j].1 {
                    x[j] += 1;
                    break;
                }
                x[j] = bbox[j].0;
            }
        }
    }
}

/// Lattice points of a polytope (free-function form).
pub fn lattice_points(poly: &Polytope) -> Result<LatticePoints> {
    poly.lattice_points()
}

fn slack(h: &Halfspace, x: &[f64]) -> f64 {
    h.normal.iter().zip(x).map(|(&a, v)| a as f64 * v).sum::<f64>() + h.offset
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Fraction-free determinant (Bareiss).
fn det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Generalised cross product of d - 1 rows in dimension d.
fn cofactor_normal(rows: &[Vec<i128>], d: usize) -> Vec<i128> {
    (0..d)
        .map(|j| {
            let minor: Vec<Vec<i128>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * det(minor)
        })
        .collect()
}

fn rank(a: &[Vec<i128>]) -> usize {
    let mut m: Vec<Vec<Ratio<i128>>> = a
        .iter()
        .map(|r| r.iter().map(|&v| Ratio::from_integer(v)).collect())
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != Ratio::from_integer(0)) else {
            continue;
        };
        m.swap(r, piv);
        for i in 0..m.len() {
            if i != r && m[i][c] != Ratio::from_integer(0) {
                let f = m[i][c] / m[r][c];
                for j in c..cols {
                    let sub = f * m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Some nonzero kernel vector of a rank-deficient matrix.
fn kernel_vector(a: &[Vec<i128>], d: usize) -> Vec<i128> {
    // a kernel vector is orthogonal to every row; pick d - 1 rows spanning
    // the row space (padded with unit vectors) and take their cofactor normal
    for extra in combinations(d, d.saturating_sub(1)) {
        let mut rows: Vec<Vec<i128>> = a.to_vec();
        for &e in &extra {
            let mut u = vec![0; d];
            u[e] = 1;
            rows.push(u);
        }
        for subset in combinations(rows.len(), d - 1) {
            let pick: Vec<Vec<i128>> = subset.iter().map(|&i| rows[i].clone()).collect();
            let r = cofactor_normal(&pick, d);
            if r.iter().any(|&v| v != 0)
                && a.iter().all(|row| row.iter().zip(&r).map(|(x, y)| x * y).sum::<i128>() == 0)
            {
                return r;
            }
        }
    }
    vec![0; d]
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[piv][k].abs() < 1e-12 {
            return None;
        }
        m.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / m[k][k];
    }
    Some(x)
}
