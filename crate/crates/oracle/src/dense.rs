//! Dense linear algebra for small reference solves.

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// A is row-major, consumed. Panics on singular input (oracle use only).
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
            .unwrap();
        assert!(a[piv][k].abs() > 1e-300, "singular matrix in oracle solve");
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            if l == 0.0 {
                continue;
            }
            for j in k..n {
                let akj = a[k][j];
                a[i][j] -= l * akj;
            }
            b[i] -= l * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    x
}
