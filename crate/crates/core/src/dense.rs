//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! implicit-shift QL. This is the verification path used to cross-check the
//! Sturm/bisection route and the production path for lattice boxes and
//! Birman-Schwinger kernels.

use crate::error::{Error, Result};

/// Row-major square matrix holding symmetric content.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both (i, j) and (j, i).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn add_assign_scaled(&mut self, other: &SymMatrix, s: f64) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn shift_diagonal(&mut self, s: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += s;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Largest row sum of absolute values; cheap norm bound.
    pub fn norm_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut work = self.clone();
        let (mut d, mut e) = householder(&mut work, false);
        ql_implicit(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Full decomposition; eigenvalues ascending with matching columns.
    pub fn eigen_pairs(&self) -> Result<EigenPairs> {
        let mut z = self.clone();
        let (mut d, mut e) = householder(&mut z, true);
        ql_implicit(&mut d, &mut e, Some(&mut z))?;
        // sort ascending, permuting columns with values
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
        let mut vectors = vec![0.0; self.n * self.n];
        for (new, &old) in order.iter().enumerate() {
            for row in 0..self.n {
                vectors[row * self.n + new] = z.get(row, old);
            }
        }
        Ok(EigenPairs {
            n: self.n,
            values,
            vectors,
        })
    }

    /// Spectral positive part: sum of max(lambda, 0) over eigenprojections.
    pub fn positive_part(&self) -> Result<SymMatrix> {
        let pairs = self.eigen_pairs()?;
        let n = self.n;
        let mut out = SymMatrix::zeros(n);
        for (k, &lam) in pairs.values.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            let v = pairs.vector(k);
            for i in 0..n {
                if v[i] == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    let add = lam * v[i] * v[j];
                    let cur = out.get(i, j);
                    out.set(i, j, cur + add);
                }
            }
        }
        Ok(out)
    }

    pub fn smallest_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }
}

pub struct EigenPairs {
    n: usize,
    pub values: Vec<f64>,
    vectors: Vec<f64>, // row-major; column k is eigenvector k
}

impl EigenPairs {
    /// Eigenvector for `values[k]` as a strided view materialized to a Vec.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + k]).collect()
    }
}

/// Householder reduction of the symmetric matrix in `a` to tridiagonal form
/// (d = diagonal, e = subdiagonal with e[0] unused). With `vectors`, `a` is
/// overwritten by the accumulated orthogonal transform.
fn householder(a: &mut SymMatrix, vectors: bool) -> (Vec<f64>, Vec<f64>) {
    let n = a.n;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 1 {
        d[0] = a.get(0, 0);
        return (d, e);
    }

    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a.get(i, k).abs()).sum();
            if scale == 0.0 {
                e[i] = a.get(i, l);
            } else {
                for k in 0..=l {
                    let v = a.get(i, k) / scale;
                    a.data[i * n + k] = v;
                    h += v * v;
                }
                let f = a.get(i, l);
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a.data[i * n + l] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    if vectors {
                        a.data[j * n + i] = a.get(i, j) / h;
                    }
                    let mut g2 = 0.0;
                    for k in 0..=j {
                        g2 += a.get(j, k) * a.get(i, k);
                    }
                    for k in (j + 1)..=l {
                        g2 += a.get(k, j) * a.get(i, k);
                    }
                    e[j] = g2 / h;
                    f_acc += e[j] * a.get(i, j);
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a.get(i, j);
                    let g2 = e[j] - hh * f;
                    e[j] = g2;
                    for k in 0..=j {
                        a.data[j * n + k] -= f * e[k] + g2 * a.get(i, k);
                    }
                }
            }
        } else {
            e[i] = a.get(i, l);
        }
        d[i] = h;
    }
    e[0] = 0.0;

    if vectors {
        d[0] = 0.0;
        for i in 0..n {
            if d[i] != 0.0 {
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..i {
                        g += a.get(i, k) * a.get(k, j);
                    }
                    for k in 0..i {
                        a.data[k * n + j] -= g * a.get(k, i);
                    }
                }
            }
            d[i] = a.get(i, i);
            a.data[i * n + i] = 1.0;
            for j in 0..i {
                a.data[j * n + i] = 0.0;
                a.data[i * n + j] = 0.0;
            }
        }
    } else {
        for i in 0..n {
            d[i] = a.get(i, i);
        }
    }
    (d, e)
}

/// Implicit-shift QL on a tridiagonal (d, e). On entry e[0] is unused; the
/// routine renumbers so that e[i] couples d[i] and d[i+1]. With `z`, the
/// rotations accumulate into its columns.
///
/// Also the entry point for tridiagonal matrices that never saw Householder.
pub(crate) fn ql_implicit(
    d: &mut [f64],
    e: &mut [f64],
    mut z: Option<&mut SymMatrix>,
) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    // absolute deflation floor: rank-deficient input leaves stretches where
    // both neighboring d's are ~0 and a purely relative test never fires
    let anorm = (0..n)
        .map(|i| d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 })
        .fold(0.0f64, f64::max);
    let floor = eps * anorm;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd + floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::IterationFailure);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m as isize - 1;
            while i >= l as isize {
                let iu = i as usize;
                let mut f = s * e[iu];
                let b = c * e[iu];
                r = f.hypot(g);
                e[iu + 1] = r;
                if r == 0.0 {
                    d[iu + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[iu + 1] - p;
                r = (d[iu] - g) * s + 2.0 * c * b;
                p = s * r;
                d[iu + 1] = g + p;
                g = c * r - b;
                if let Some(zm) = z.as_deref_mut() {
                    let nn = zm.n;
                    for k in 0..nn {
                        f = zm.data[k * nn + iu + 1];
                        zm.data[k * nn + iu + 1] = s * zm.data[k * nn + iu] + c * f;
                        zm.data[k * nn + iu] = c * zm.data[k * nn + iu] - s * f;
                    }
                }
                i -= 1;
            }
            if r == 0.0 && i >= l as isize {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Default cap for the dense verification path.
pub const DENSE_DIM_CAP: usize = 4000;

/// Full spectrum of a symmetric matrix, ascending. Independent of the
/// Sturm/bisection route and used to cross-check it.
pub fn dense_eigs_oracle(m: &SymMatrix) -> Result<Vec<f64>> {
    dense_eigs_oracle_with_cap(m, DENSE_DIM_CAP)
}

pub fn dense_eigs_oracle_with_cap(m: &SymMatrix, cap: usize) -> Result<Vec<f64>> {
    if m.dim() > cap {
        return Err(Error::DimensionCap { dim: m.dim(), cap });
    }
    m.eigenvalues()
}
