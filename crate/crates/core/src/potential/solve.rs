//! Linear algebra backing the harmonic oracles: a dense LU path for small
//! systems and Jacobi-preconditioned conjugate gradients above that, both
//! held to a 1e-10 relative residual.

use crate::network::{Network, VertexId};

use super::PotentialError;

const DENSE_LIMIT: usize = 600;
const CG_TOLERANCE: f64 = 1e-13;
const RESIDUAL_REQUIREMENT: f64 = 1e-10;
const CG_MAX_ITERATIONS: usize = 200_000;

/// Grounded Laplacian rows for the free vertices of a Dirichlet problem.
struct System {
    /// Unknown index per vertex, or usize::MAX for boundary vertices.
    unknown_of: Vec<usize>,
    vertices: Vec<VertexId>,
    diagonal: Vec<f64>,
    /// Off-diagonal entries per row: (unknown column, total conductance).
    coupling: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
}

fn build_system(network: &Network, value: &[f64], fixed: &[bool]) -> System {
    let n = network.vertex_count();
    let mut unknown_of = vec![usize::MAX; n];
    let mut vertices = Vec::new();
    for v in 0..n {
        if !fixed[v] {
            unknown_of[v] = vertices.len();
            vertices.push(v);
        }
    }
    let m = vertices.len();
    let mut diagonal = vec![0.0; m];
    let mut coupling: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut rhs = vec![0.0; m];
    for (row, &v) in vertices.iter().enumerate() {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(network.incident(v).len());
        for h in network.incident(v) {
            if h.to == v {
                continue; // self-loops drop out of harmonicity
            }
            let c = network.conductance(h.edge);
            diagonal[row] += c;
            if fixed[h.to] {
                rhs[row] += c * value[h.to];
            } else {
                merged.push((unknown_of[h.to], c));
            }
        }
        merged.sort_unstable_by_key(|&(col, _)| col);
        merged.dedup_by(|next, acc| {
            if next.0 == acc.0 {
                acc.1 += next.1;
                true
            } else {
                false
            }
        });
        coupling[row] = merged;
    }
    System {
        unknown_of,
        vertices,
        diagonal,
        coupling,
        rhs,
    }
}

impl System {
    fn len(&self) -> usize {
        self.vertices.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for row in 0..self.len() {
            let mut acc = self.diagonal[row] * x[row];
            for &(col, c) in &self.coupling[row] {
                acc -= c * x[col];
            }
            out[row] = acc;
        }
    }

    fn relative_residual(&self, x: &[f64]) -> f64 {
        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        let mut row_value = vec![0.0; self.len()];
        self.apply(x, &mut row_value);
        for row in 0..self.len() {
            residual += (row_value[row] - self.rhs[row]).powi(2);
            scale += self.rhs[row].powi(2);
        }
        if scale == 0.0 {
            return residual.sqrt();
        }
        (residual / scale).sqrt()
    }
}

/// Voltages with `sources` held at 1, `sinks` at 0 and all other vertices
/// harmonic. Inputs are assumed validated (disjoint, in range).
pub(super) fn solve_dirichlet(
    network: &Network,
    sources: &[VertexId],
    sinks: &[VertexId],
) -> Result<Vec<f64>, PotentialError> {
    let n = network.vertex_count();
    let mut value = vec![0.0; n];
    let mut fixed = vec![false; n];
    for &v in sources {
        fixed[v] = true;
        value[v] = 1.0;
    }
    for &v in sinks {
        fixed[v] = true;
    }
    let system = build_system(network, &value, &fixed);
    if system.len() == 0 {
        return Ok(value);
    }
    let solution = if system.len() <= DENSE_LIMIT {
        solve_dense(&system)?
    } else {
        solve_cg(&system)?
    };
    let residual = system.relative_residual(&solution);
    if !residual.is_finite() || residual > RESIDUAL_REQUIREMENT {
        return Err(PotentialError::SolverFailed(format!(
            "relative residual {residual:.3e} exceeds {RESIDUAL_REQUIREMENT:.0e}"
        )));
    }
    for (row, &v) in system.vertices.iter().enumerate() {
        value[v] = solution[row];
    }
    let _ = &system.unknown_of;
    Ok(value)
}

fn solve_dense(system: &System) -> Result<Vec<f64>, PotentialError> {
    let m = system.len();
    let mut a = vec![0.0f64; m * m];
    for row in 0..m {
        a[row * m + row] = system.diagonal[row];
        for &(col, c) in &system.coupling[row] {
            a[row * m + col] -= c;
        }
    }
    let mut b = system.rhs.clone();
    // Gaussian elimination with partial pivoting.
    let mut perm: Vec<usize> = (0..m).collect();
    for k in 0..m {
        let (pivot_row, pivot) = (k..m)
            .map(|r| (r, a[perm[r] * m + k].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot == 0.0 {
            return Err(PotentialError::SolverFailed("singular system".into()));
        }
        perm.swap(k, pivot_row);
        let pk = perm[k];
        for r in k + 1..m {
            let pr = perm[r];
            let factor = a[pr * m + k] / a[pk * m + k];
            if factor == 0.0 {
                continue;
            }
            for c in k..m {
                a[pr * m + c] -= factor * a[pk * m + c];
            }
            b[pr] -= factor * b[pk];
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let pk = perm[k];
        let mut acc = b[pk];
        for c in k + 1..m {
            acc -= a[pk * m + c] * x[c];
        }
        x[k] = acc / a[pk * m + k];
    }
    Ok(x)
}

fn solve_cg(system: &System) -> Result<Vec<f64>, PotentialError> {
    let m = system.len();
    let b = &system.rhs;
    let b_norm: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0f64; m];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.clone();
    let mut z: Vec<f64> = r
        .iter()
        .zip(&system.diagonal)
        .map(|(ri, di)| ri / di)
        .collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0f64; m];
    for _ in 0..CG_MAX_ITERATIONS {
        system.apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(PotentialError::SolverFailed(
                "matrix is not positive definite".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= CG_TOLERANCE * b_norm {
            return Ok(x);
        }
        for i in 0..m {
            z[i] = r[i] / system.diagonal[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(PotentialError::SolverFailed(format!(
        "conjugate gradients did not converge in {CG_MAX_ITERATIONS} iterations"
    )))
}

/// Determinant of a dense row-major matrix, destroying the input.
pub(super) fn determinant(matrix: &mut [f64], dim: usize) -> f64 {
    if dim == 0 {
        return 1.0;
    }
    let mut det = 1.0f64;
    for k in 0..dim {
        let (pivot_row, pivot) = (k..dim)
            .map(|r| (r, matrix[r * dim + k].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot == 0.0 {
            return 0.0;
        }
        if pivot_row != k {
            for c in 0..dim {
                matrix.swap(k * dim + c, pivot_row * dim + c);
            }
            det = -det;
        }
        det *= matrix[k * dim + k];
        for r in k + 1..dim {
            let factor = matrix[r * dim + k] / matrix[k * dim + k];
            if factor == 0.0 {
                continue;
            }
            for c in k..dim {
                matrix[r * dim + c] -= factor * matrix[k * dim + c];
            }
        }
    }
    det
}
