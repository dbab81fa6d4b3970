//! Dense complex Gaussian elimination for the small nodal systems.

use crate::scalar::{Cx, Scalar};

/// Solves `a x = b` in place with partial pivoting. `None` if singular.
pub(crate) fn solve<T: Scalar, const N: usize>(
    mut a: [[Cx<T>; N]; N],
    mut b: [Cx<T>; N],
) -> Option<[Cx<T>; N]> {
    // rows carry mixed units (admittances next to chain-matrix entries)
    for (row, rhs) in a.iter_mut().zip(b.iter_mut()) {
        let m = row.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        if !(m > T::zero()) || !m.is_finite() {
            return None;
        }
        for z in row.iter_mut() {
            *z = *z / m;
        }
        *rhs = *rhs / m;
    }
    let mut col_scale = [T::zero(); N];
    for (c, s) in col_scale.iter_mut().enumerate() {
        *s = (0..N).map(|r| a[r][c].norm()).fold(T::zero(), T::max);
    }
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap())
            .unwrap();
        if !(a[piv][col].norm() > col_scale[col] * T::epsilon() * T::lit(N as f64)) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col];
        for row in col + 1..N {
            let m = a[row][col] / p;
            if m.norm() == T::zero() {
                continue;
            }
            let pivot_row = a[col];
            for (dst, &src) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst = *dst - m * src;
            }
            let t = b[col];
            b[row] = b[row] - m * t;
        }
    }
    let mut x = b;
    for row in (0..N).rev() {
        let mut acc = x[row];
        for k in row + 1..N {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
