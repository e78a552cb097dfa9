//! Matrix exponential via scaling-and-squaring with Pade(13) approximation
//! (Higham 2005).

use super::{c, C64, Operator};
use ndarray::Array2;

const PADE_COEFFS: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &Operator) -> f64 {
    let mut best = 0.0;
    for j in 0..a.ncols() {
        let mut s = 0.0;
        for i in 0..a.nrows() {
            s += a[[i, j]].norm();
        }
        if s > best {
            best = s;
        }
    }
    best
}

fn solve(a: &Operator, b: &Operator) -> Operator {
    // Gaussian elimination with partial pivoting for A X = B.
    let n = a.nrows();
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[[k, k]].norm();
        for i in (k + 1)..n {
            let v = lu[[i, k]].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if piv != k {
            for j in 0..n {
                lu.swap([k, j], [piv, j]);
                x.swap([k, j], [piv, j]);
            }
        }
        let d = lu[[k, k]];
        for i in (k + 1)..n {
            let f = lu[[i, k]] / d;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let v = lu[[k, j]];
                lu[[i, j]] -= f * v;
            }
            for j in 0..n {
                let v = x[[k, j]];
                x[[i, j]] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        let d = lu[[k, k]];
        for j in 0..n {
            let mut s = x[[k, j]];
            for i in (k + 1)..n {
                s -= lu[[k, i]] * x[[i, j]];
            }
            x[[k, j]] = s / d;
        }
    }
    x
}

/// exp(A) for a square complex matrix.
pub fn expm(a: &Operator) -> Operator {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return Array2::zeros((0, 0));
    }
    if n == 1 {
        let mut out = Array2::zeros((1, 1));
        out[[0, 0]] = a[[0, 0]].exp();
        return out;
    }

    let theta13 = 5.371920351148152;
    let norm = one_norm(a);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as u32
    } else {
        0
    };
    let a1 = a * c(1.0 / (1u64 << s) as f64);

    let eye: Operator = Array2::from_diag_elem(n, C64::new(1.0, 0.0));
    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let b = &PADE_COEFFS;
    let w1 = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
    let w2 = a6.dot(&w1) + &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &eye * c(b[1]);
    let u = a1.dot(&w2);
    let z1 = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
    let v = a6.dot(&z1) + &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &eye * c(b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = solve(&q, &p);
    for _ in 0..s {
        r = r.dot(&r);
    }
    r
}
