//! Sample covariance, 3×3 covariance matrices and their principal axis.

use crate::imu::Vec3;

use super::AlignmentError;

/// Sample covariance with the `n − 1` denominator.
///
/// Two-pass: means first, then the co-moment. A second-order correction
/// `Σdx·Σdy / n` removes the rounding left in the means.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Result<f64, AlignmentError> {
    if xs.len() != ys.len() {
        return Err(AlignmentError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(AlignmentError::InsufficientSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxy, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sx += dx;
        sy += dy;
    }
    let cov = (sxy - sx * sy / nf) / (nf - 1.0);
    // a variance cannot go negative, whatever the rounding
    Ok(if std::ptr::eq(xs, ys) { cov.max(0.0) } else { cov })
}

/// Symmetric positive semi-definite 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    c: [[f64; 3]; 3],
}

impl CovarianceMatrix {
    pub fn new(c: [[f64; 3]; 3]) -> Result<Self, AlignmentError> {
        if c.iter().flatten().any(|v| !v.is_finite()) {
            return Err(AlignmentError::InvalidMatrix("non-finite entry".into()));
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                if (c[i][j] - c[j][i]).abs() > 1e-12 {
                    return Err(AlignmentError::InvalidMatrix(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        let (values, _) = symmetric_eigen(c);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(AlignmentError::InvalidMatrix(format!("negative eigenvalue {min}")));
        }
        Ok(Self { c })
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.c
    }

    pub fn trace(&self) -> f64 {
        self.c[0][0] + self.c[1][1] + self.c[2][2]
    }

    /// Copy with the z row and column zeroed: the covariance of the
    /// horizontal (x, y) components only.
    pub fn horizontal_block(&self) -> CovarianceMatrix {
        let c = &self.c;
        CovarianceMatrix { c: [[c[0][0], c[0][1], 0.0], [c[1][0], c[1][1], 0.0], [0.0, 0.0, 0.0]] }
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let c = &self.c;
        Vec3::new(
            c[0][0] * v.x + c[0][1] * v.y + c[0][2] * v.z,
            c[1][0] * v.x + c[1][1] * v.y + c[1][2] * v.z,
            c[2][0] * v.x + c[2][1] * v.y + c[2][2] * v.z,
        )
    }
}

/// Pairwise covariances of three equally long series.
pub fn covariance_matrix(xs: &[f64], ys: &[f64], zs: &[f64]) -> Result<CovarianceMatrix, AlignmentError> {
    let series = [xs, ys, zs];
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = covariance(series[i], series[j])?;
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    // rounding can leave a zero-variance axis very slightly negative-definite;
    // the constructor tolerates that down to −1e-9
    CovarianceMatrix::new(c)
}

/// Eigen-decomposition of a symmetric 3×3 matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues and the matching eigenvectors as columns, unsorted.
pub(crate) fn symmetric_eigen(m: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = m;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let s = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum();

    for _sweep in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off == 0.0 || off <= scale * 1e-34 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = if theta.abs() > 1e150 {
                0.5 / theta
            } else {
                theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
            };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for row in a.iter_mut() {
                let (akp, akq) = (row[p], row[q]);
                row[p] = c * akp - s * akq;
                row[q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            for row in v.iter_mut() {
                let (vkp, vkq) = (row[p], row[q]);
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Unit eigenvector of the largest eigenvalue, and that eigenvalue.
///
/// The sign is canonical: the first component with magnitude above 1e-12
/// is positive.
pub fn principal_eigenvector(c: &CovarianceMatrix) -> Result<(Vec3, f64), AlignmentError> {
    let (values, vectors) = symmetric_eigen(c.matrix());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let (top, second) = (values[order[0]], values[order[1]]);
    let trace = c.trace();
    let gap = top - second;
    if gap <= 1e-9 * trace.abs() {
        return Err(AlignmentError::DegenerateSpectrum { gap, trace });
    }
    let k = order[0];
    let m = Vec3::new(vectors[0][k], vectors[1][k], vectors[2][k]);
    let m = m.normalized().expect("Jacobi columns are orthonormal");
    let lead = m.to_array().into_iter().find(|v| v.abs() > 1e-12).unwrap_or(1.0);
    let m = if lead < 0.0 { -m } else { m };
    Ok((m, top))
}

/// `atan2(m_y, m_x)` of the horizontal projection, in (−π, π].
pub fn heading_angle(m: Vec3) -> Result<f64, AlignmentError> {
    if m.x.hypot(m.y) <= 1e-6 || !m.is_finite() {
        return Err(AlignmentError::DegenerateHorizontal);
    }
    let phi = m.y.atan2(m.x);
    Ok(if phi <= -std::f64::consts::PI { std::f64::consts::PI } else { phi + 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn covariance_examples() {
        assert_eq!(covariance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(covariance(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_eq!(covariance(&[0.3, -7.0, 2.5, 11.0], &[4.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn covariance_errors() {
        assert_eq!(covariance(&[1.0, 2.0], &[1.0]), Err(AlignmentError::LengthMismatch(2, 1)));
        assert_eq!(covariance(&[1.0], &[1.0]), Err(AlignmentError::InsufficientSamples { needed: 2, got: 1 }));
    }

    #[test]
    fn population_identity_differs_by_bessel_factor() {
        // E[xy] − E[x]E[y] is the n-denominator form; scaling by n/(n−1)
        // recovers the sample covariance
        let xs = [0.5, 1.5, -2.0, 4.0, 3.25];
        let ys = [1.0, -1.0, 0.0, 2.0, 5.0];
        let n = xs.len() as f64;
        let exy = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / n;
        let ex = xs.iter().sum::<f64>() / n;
        let ey = ys.iter().sum::<f64>() / n;
        let population = exy - ex * ey;
        let sample = covariance(&xs, &ys).unwrap();
        assert!((population * n / (n - 1.0) - sample).abs() < 1e-12);
        assert!((population - sample).abs() > 0.1);
    }

    #[test]
    fn covariance_matrix_examples() {
        let s = [-1.0, 0.0, 1.0];
        let c = covariance_matrix(&s, &s, &s).unwrap().matrix();
        assert!(c.iter().flatten().all(|&v| v == 1.0));

        // orthogonal ±1 Walsh sequences: zero cross-covariance
        let x = [1.0, -1.0, 1.0, -1.0];
        let y = [1.0, 1.0, -1.0, -1.0];
        let z = [1.0, -1.0, -1.0, 1.0];
        let c = covariance_matrix(&x, &y, &z).unwrap().matrix();
        for (i, row) in c.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let want = if i == j { 4.0 / 3.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn covariance_matrix_validation() {
        assert!(CovarianceMatrix::new([[1.0, 0.5, 0.0], [0.4, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
        assert!(CovarianceMatrix::new([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
        assert!(CovarianceMatrix::new([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn principal_of_diagonal() {
        let c = CovarianceMatrix::new([[4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.25]]).unwrap();
        let (m, l) = principal_eigenvector(&c).unwrap();
        assert_eq!(m, Vec3::X);
        assert_eq!(l, 4.0);

        let c = CovarianceMatrix::new([[0.25, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 9.0]]).unwrap();
        assert_eq!(principal_eigenvector(&c).unwrap(), (Vec3::Z, 9.0));
    }

    #[test]
    fn isotropic_is_degenerate() {
        let c = CovarianceMatrix::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(principal_eigenvector(&c), Err(AlignmentError::DegenerateSpectrum { .. })));
        let z = CovarianceMatrix::new([[0.0; 3]; 3]).unwrap();
        assert!(principal_eigenvector(&z).is_err());
    }

    #[test]
    fn canonical_sign() {
        let c = CovarianceMatrix::new([[1.0, -0.9, 0.0], [-0.9, 1.0, 0.0], [0.0, 0.0, 0.1]]).unwrap();
        let (m, l) = principal_eigenvector(&c).unwrap();
        assert!(m.x > 0.0 && m.y < 0.0);
        assert!((l - 1.9).abs() < 1e-12);
    }

    #[test]
    fn heading_examples() {
        assert_eq!(heading_angle(Vec3::new(1.0, 0.0, 0.3)).unwrap(), 0.0);
        assert!((heading_angle(Vec3::new(0.0, 1.0, -2.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((heading_angle(Vec3::new(-1.0, -1.0, 0.0)).unwrap() + 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(heading_angle(Vec3::new(-1.0, -0.0, 0.0)).unwrap(), PI);
        assert_eq!(heading_angle(Vec3::new(0.0, 1e-7, 1.0)), Err(AlignmentError::DegenerateHorizontal));
    }

    proptest! {
        #[test]
        fn covariance_symmetry_and_shift(pairs in prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 2..300),
                                         kx in -1e3..1e3f64, ky in -1e3..1e3f64) {
            let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let c = covariance(&xs, &ys).unwrap();
            prop_assert_eq!(c, covariance(&ys, &xs).unwrap());
            prop_assert!(covariance(&xs, &xs).unwrap() >= 0.0);
            let xs2: Vec<f64> = xs.iter().map(|x| x + kx).collect();
            let ys2: Vec<f64> = ys.iter().map(|y| y + ky).collect();
            let shifted = covariance(&xs2, &ys2).unwrap();
            let scale = (covariance(&xs, &xs).unwrap() * covariance(&ys, &ys).unwrap()).sqrt().max(c.abs());
            prop_assert!((shifted - c).abs() <= 1e-9 * scale.max(1e-300));
        }

        #[test]
        fn heading_is_scale_invariant(x in -10.0..10.0f64, y in -10.0..10.0f64, k in 1e-3..1e3f64) {
            prop_assume!(x.hypot(y) > 1e-3);
            let a = heading_angle(Vec3::new(x, y, 0.0)).unwrap();
            let b = heading_angle(Vec3::new(k * x, k * y, 5.0)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
