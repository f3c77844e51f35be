//! Symmetric eigenvalue kernels: a dense LAPACK path and a Lanczos iteration
//! with full reorthogonalization.

use std::os::raw::{c_char, c_int};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SpectralError;

/// Largest `k` eigenvalues of a dense symmetric `n × n` matrix (row-major,
/// only the upper triangle is read), in descending order. The input is
/// overwritten.
pub fn dense_top_eigenvalues(a: &mut [f64], n: usize, k: usize) -> Result<Vec<f64>, SpectralError> {
    assert_eq!(a.len(), n * n);
    let k = k.min(n);
    if k == 0 {
        return Ok(Vec::new());
    }
    let jobz = b'N' as c_char;
    let range = b'I' as c_char;
    // row-major upper equals column-major lower
    let uplo = b'L' as c_char;
    let nn = n as c_int;
    let il = nn - k as c_int + 1;
    let iu = nn;
    let (vl, vu, abstol) = (0.0, 0.0, 0.0);
    let ldz: c_int = 1;
    let mut found: c_int = 0;
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; 1];
    let mut isuppz = vec![0 as c_int; 2 * n.max(1)];
    let mut info: c_int = 0;
    let mut work_q = [0.0f64];
    let mut iwork_q = [0 as c_int];
    let query: c_int = -1;
    // SAFETY: all buffers are sized per the LAPACK contract; workspace query first.
    unsafe {
        lapack_sys::dsyevr_(
            &jobz, &range, &uplo, &nn, a.as_mut_ptr(), &nn, &vl, &vu, &il, &iu, &abstol,
            &mut found, w.as_mut_ptr(), z.as_mut_ptr(), &ldz, isuppz.as_mut_ptr(),
            work_q.as_mut_ptr(), &query, iwork_q.as_mut_ptr(), &query, &mut info,
        );
    }
    if info != 0 {
        return Err(SpectralError::Lapack(info));
    }
    let lwork = work_q[0] as c_int;
    let liwork = iwork_q[0];
    let mut work = vec![0.0; lwork.max(1) as usize];
    let mut iwork = vec![0 as c_int; liwork.max(1) as usize];
    unsafe {
        lapack_sys::dsyevr_(
            &jobz, &range, &uplo, &nn, a.as_mut_ptr(), &nn, &vl, &vu, &il, &iu, &abstol,
            &mut found, w.as_mut_ptr(), z.as_mut_ptr(), &ldz, isuppz.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(SpectralError::Lapack(info));
    }
    let mut top: Vec<f64> = w[..found as usize].to_vec();
    top.reverse();
    Ok(top)
}

/// Eigenvalues (ascending) and eigenvectors (column-major `m × m`) of the
/// symmetric tridiagonal matrix with diagonal `alpha` and off-diagonal `beta`.
pub fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    let m = alpha.len();
    assert_eq!(beta.len() + 1, m.max(1));
    let mut d = alpha.to_vec();
    let mut e = beta.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; m * m];
    let mut work = vec![0.0; (2 * m).saturating_sub(2).max(1)];
    let jobz = b'V' as c_char;
    let mm = m as c_int;
    let mut info: c_int = 0;
    // SAFETY: d has m entries, e at least m−1, z is m×m, work 2m−2.
    unsafe {
        lapack_sys::dstev_(&jobz, &mm, d.as_mut_ptr(), e.as_mut_ptr(), z.as_mut_ptr(), &mm, work.as_mut_ptr(), &mut info);
    }
    if info != 0 {
        return Err(SpectralError::Lapack(info));
    }
    Ok((d, z))
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosParams {
    pub tol: f64,
    pub max_matvecs: usize,
    pub krylov_dim: usize,
    pub seed: u64,
}

impl Default for LanczosParams {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_matvecs: 10_000,
            krylov_dim: 120,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub value: f64,
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes keep the basis orthogonal to working precision
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Largest eigenvalue of the symmetric operator `apply` on the orthogonal
/// complement of the unit vectors in `deflate`. Explicitly restarted
/// Lanczos with full reorthogonalization.
pub fn lanczos_largest<F>(
    n: usize,
    apply: F,
    deflate: &[Vec<f64>],
    params: LanczosParams,
) -> Result<LanczosResult, SpectralError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let free_dim = n.saturating_sub(deflate.len());
    if free_dim == 0 {
        return Err(SpectralError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut matvecs = 0;
    let mut best = f64::NEG_INFINITY;
    let mut tmp = vec![0.0; n];
    loop {
        orthogonalize(&mut start, deflate);
        let norm = dot(&start, &start).sqrt();
        if norm == 0.0 {
            return Err(SpectralError::Empty);
        }
        start.iter_mut().for_each(|x| *x /= norm);
        let m_max = params.krylov_dim.min(free_dim);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut invariant = false;
        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut tmp);
            matvecs += 1;
            let mut w = tmp.clone();
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            orthogonalize(&mut w, deflate);
            orthogonalize(&mut w, &basis);
            let b = dot(&w, &w).sqrt();
            if basis.len() == m_max || matvecs >= params.max_matvecs {
                beta.push(b);
                break;
            }
            if b < 1e-12 {
                beta.push(0.0);
                invariant = true;
                break;
            }
            w.iter_mut().for_each(|x| *x /= b);
            beta.push(b);
            basis.push(w);
        }
        let m = alpha.len();
        let last_beta = beta[m - 1];
        let (vals, vecs) = tridiagonal_eigen(&alpha, &beta[..m - 1])?;
        let top = vals[m - 1];
        let s_last = vecs[(m - 1) * m + (m - 1)];
        let residual = (last_beta * s_last).abs();
        best = best.max(top);
        if residual <= params.tol || invariant || m == free_dim {
            return Ok(LanczosResult { value: top, residual, matvecs });
        }
        if matvecs >= params.max_matvecs {
            return Err(SpectralError::NoConvergence { budget: params.max_matvecs, estimate: best, residual });
        }
        // restart from the top Ritz vector
        let mut ritz = vec![0.0; n];
        for (k, b) in basis.iter().enumerate() {
            axpy(vecs[(m - 1) * m + k], b, &mut ritz);
        }
        start = ritz;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_path_on_a_cycle() {
        let n = 8;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + (i + 1) % n] = 0.5;
            a[((i + 1) % n) * n + i] = 0.5;
        }
        let top = dense_top_eigenvalues(&mut a, n, 2).unwrap();
        assert!((top[0] - 1.0).abs() < 1e-12);
        assert!((top[1] - (std::f64::consts::PI / 4.0).cos()).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_matches_closed_form() {
        // path graph P_m: eigenvalues 2cos(πk/(m+1))
        let m = 7;
        let (vals, _) = tridiagonal_eigen(&vec![0.0; m], &vec![1.0; m - 1]).unwrap();
        for (k, v) in vals.iter().rev().enumerate() {
            let want = 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (m + 1) as f64).cos();
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn lanczos_on_a_long_cycle() {
        let n = 500;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = 0.5 * (x[(i + 1) % n] + x[(i + n - 1) % n]);
            }
        };
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        let r = lanczos_largest(n, apply, &[ones], LanczosParams { max_matvecs: 20_000, ..Default::default() }).unwrap();
        let want = (2.0 * std::f64::consts::PI / n as f64).cos();
        assert!((r.value - want).abs() < 1e-7, "{} vs {want}", r.value);
    }
}
