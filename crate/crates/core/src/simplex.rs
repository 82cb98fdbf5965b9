//! r-simplices in the outcome space: the initial cover, longest-edge
//! bisection, and volume via the Cayley-Menger determinant.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Longest edges within this relative margin count as tied.
const EDGE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<DVector<f64>>,
    generation: u32,
}

impl Simplex {
    /// `vertices` must hold `r + 1` points of dimension `r`.
    pub fn new(vertices: Vec<DVector<f64>>) -> Result<Self> {
        Self::with_generation(vertices, 0)
    }

    pub fn with_generation(vertices: Vec<DVector<f64>>, generation: u32) -> Result<Self> {
        let count = vertices.len();
        if count < 2 {
            return Err(Error::Dimension {
                expected: 2,
                actual: count,
            });
        }
        for v in &vertices {
            check_dim(count - 1, v.len())?;
        }
        Ok(Self {
            vertices,
            generation,
        })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| DVector::from_column_slice(r)).collect())
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn vertex(&self, j: usize) -> &DVector<f64> {
        &self.vertices[j]
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    /// Diameter: the longest edge length.
    pub fn diameter(&self) -> f64 {
        longest_edge(self).2
    }

    /// Largest vertex norm.
    pub fn max_vertex_norm(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Corner cover of the box `[lo, hi]`: `v1 = lo`, `v_{i+1} = lo + r (hi_i - lo_i) e_i`.
pub fn initial_simplex(lo: &DVector<f64>, hi: &DVector<f64>) -> Result<Simplex> {
    let r = lo.len();
    check_dim(r, hi.len())?;
    if r == 0 {
        return Err(Error::Dimension {
            expected: 1,
            actual: 0,
        });
    }
    if lo.iter().zip(hi.iter()).any(|(l, h)| h < l) {
        return Err(Error::Numeric("outcome bounds are inverted".into()));
    }
    if lo == hi {
        return Err(Error::DegenerateCover);
    }
    let mut vertices = Vec::with_capacity(r + 1);
    vertices.push(lo.clone());
    for i in 0..r {
        let mut v = lo.clone();
        v[i] += r as f64 * (hi[i] - lo[i]);
        vertices.push(v);
    }
    Simplex::new(vertices)
}

/// Longest edge `(i, j, length)` with `i < j` (0-based); ties go to the
/// lexicographically smallest pair.
pub fn longest_edge(s: &Simplex) -> (usize, usize, f64) {
    let k = s.vertices.len();
    let mut best = (0, 1, -1.0);
    for i in 0..k {
        for j in (i + 1)..k {
            let len = (&s.vertices[i] - &s.vertices[j]).norm();
            if len > best.2 * (1.0 + EDGE_TIE_TOL) || best.2 < 0.0 {
                best = (i, j, len);
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bisection {
    pub first: Simplex,
    pub second: Simplex,
    pub midpoint: DVector<f64>,
    /// `(i, j)`: `first` replaces vertex `j` by the midpoint, `second` replaces `i`.
    pub edge: (usize, usize),
}

/// Splits `s` at the midpoint of its longest edge.
pub fn bisect(s: &Simplex) -> Bisection {
    let (i, j, _) = longest_edge(s);
    let eta = (&s.vertices[i] + &s.vertices[j]) * 0.5;
    let mut first = s.vertices.clone();
    first[j] = eta.clone();
    let mut second = s.vertices.clone();
    second[i] = eta.clone();
    Bisection {
        first: Simplex {
            vertices: first,
            generation: s.generation + 1,
        },
        second: Simplex {
            vertices: second,
            generation: s.generation + 1,
        },
        midpoint: eta,
        edge: (i, j),
    }
}

/// r-volume from the Cayley-Menger determinant of squared edge lengths.
pub fn cm_volume(s: &Simplex) -> f64 {
    let k = s.vertices.len();
    let r = k - 1;
    let mut cm = DMatrix::<f64>::zeros(k + 1, k + 1);
    for i in 1..=k {
        cm[(0, i)] = 1.0;
        cm[(i, 0)] = 1.0;
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let d2 = (&s.vertices[i] - &s.vertices[j]).norm_squared();
            cm[(i + 1, j + 1)] = d2;
            cm[(j + 1, i + 1)] = d2;
        }
    }
    let det = cm.determinant();
    let mut factorial = 1.0;
    for f in 2..=r {
        factorial *= f as f64;
    }
    let sign = if (r + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let vol2 = sign * det / (2f64.powi(r as i32) * factorial * factorial);
    vol2.max(0.0).sqrt()
}

/// Scale-relative degeneracy test: `volume <= 1e-12 * diameter^r`.
pub fn is_degenerate(s: &Simplex) -> bool {
    let d = s.diameter();
    if d == 0.0 {
        return true;
    }
    cm_volume(s) <= 1e-12 * d.powi(s.dim() as i32)
}

/// `sum_j w_j v_j` for weights in the standard simplex.
pub fn barycentric_to_point(s: &Simplex, w: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(s.vertices.len(), w.len())?;
    if w.iter().any(|&x| x < -1e-12) || (w.sum() - 1.0).abs() > 1e-9 {
        return Err(Error::WeightsInvalid);
    }
    let mut p = DVector::zeros(s.dim());
    for (wj, v) in w.iter().zip(&s.vertices) {
        p.axpy(*wj, v, 1.0);
    }
    Ok(p)
}

/// Barycentric coordinates of `p`; `None` if `s` is degenerate.
pub fn barycentric_coords(s: &Simplex, p: &DVector<f64>) -> Option<DVector<f64>> {
    let r = s.dim();
    if p.len() != r {
        return None;
    }
    let v0 = &s.vertices[0];
    let mut t = DMatrix::<f64>::zeros(r, r);
    for j in 0..r {
        t.set_column(j, &(&s.vertices[j + 1] - v0));
    }
    let rest = t.lu().solve(&(p - v0))?;
    let mut w = DVector::zeros(r + 1);
    w[0] = 1.0 - rest.sum();
    w.rows_mut(1, r).copy_from(&rest);
    Some(w)
}
