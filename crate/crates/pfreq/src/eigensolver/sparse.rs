//! Minimal CSR matrix and Jacobi-preconditioned conjugate gradients for the
//! SPD stiffness solves inside the descent preconditioner.

pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Build from unsorted COO triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &mut Vec<(usize, usize, f64)>) -> Csr {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = (usize::MAX, usize::MAX);
        for &(r, c, v) in triplets.iter() {
            if (r, c) == last {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = (r, c);
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Csr { n, indptr, indices, data }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            y[i] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.indptr[i]..self.indptr[i + 1] {
                if self.indices[k] == i {
                    d[i] += self.data[k];
                }
            }
        }
        d
    }
}

/// Jacobi-preconditioned CG; returns the iterate when the residual norm
/// drops below tol * |b| or the budget runs out. The incoming x is used
/// as the starting point, which lets callers warm-start from the last
/// solve of a slowly drifting system.
pub fn cg_jacobi(a: &Csr, b: &[f64], tol: f64, max_iters: usize, x: &mut [f64]) -> usize {
    let n = a.n;
    let mut diag = a.diagonal();
    for d in diag.iter_mut() {
        if d.abs() < 1e-300 {
            *d = 1.0;
        }
    }
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return 0;
    }
    let rnorm0 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rnorm0 <= tol * bnorm {
        return 0;
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(v, d)| v / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 0..max_iters {
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return it;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= tol * bnorm {
            return it + 1;
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    max_iters
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> Csr {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        Csr::from_triplets(n, &mut t)
    }

    #[test]
    fn builds_csr_and_sums_duplicates() {
        let mut t = vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 4.0), (0, 1, -1.0)];
        let a = Csr::from_triplets(2, &mut t);
        let mut y = vec![0.0; 2];
        a.matvec(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![2.0, 4.0]);
        assert_eq!(a.diagonal(), vec![3.0, 4.0]);
    }

    #[test]
    fn cg_solves_laplacian() {
        let n = 50;
        let a = laplacian_1d(n);
        let xtrue: Vec<f64> = (0..n).map(|i| ((i * 7) % 13) as f64 / 13.0).collect();
        let mut b = vec![0.0; n];
        a.matvec(&xtrue, &mut b);
        let mut x = vec![0.0; n];
        let iters = cg_jacobi(&a, &b, 1e-12, 1000, &mut x);
        assert!(iters < 1000);
        for i in 0..n {
            assert!((x[i] - xtrue[i]).abs() < 1e-8);
        }
    }
}
