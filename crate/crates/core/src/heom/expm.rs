//! Dense complex matrix exponential by scaling and squaring with a
//! diagonal Padé approximant (Higham 2005, degrees 3/5/7/9/13).

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
];
const THETA_13: f64 = 5.371_920_351_148_152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17_297_280.0, 8_648_640.0, 1_995_840.0, 277_200.0, 25_200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(a: &Array2<Complex64>) -> f64 {
    a.columns().into_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// acc += c · m
fn axpy(acc: &mut Array2<Complex64>, c: f64, m: &Array2<Complex64>) {
    Zip::from(acc).and(m).for_each(|a, &x| *a += x * c);
}

fn identity_scaled(n: usize, c: f64) -> Array2<Complex64> {
    Array2::from_diag_elem(n, Complex64::new(c, 0.0))
}

/// exp(a) for a square complex matrix.
pub fn expm(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    if !a.is_square() {
        return Err(Error::invalid(format!("expm needs a square matrix, got {:?}", a.shape())));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("expm input contains non-finite entries"));
    }
    let n = a.nrows();
    let norm = one_norm(a);

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = low_order_uv(a, coeffs);
            return pade_solve(u, v);
        }
    }

    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = a.mapv(|z| z / 2f64.powi(s));
    let (u, v) = order13_uv(&scaled, n);
    let mut x = pade_solve(u, v)?;
    for _ in 0..s {
        x = x.dot(&x);
    }
    Ok(x)
}

fn low_order_uv(a: &Array2<Complex64>, b: &[f64]) -> (Array2<Complex64>, Array2<Complex64>) {
    let n = a.nrows();
    let a2 = a.dot(a);
    let mut u_inner = identity_scaled(n, b[1]);
    let mut v = identity_scaled(n, b[0]);
    let mut power = a2.clone();
    let mut k = 2;
    while k < b.len() {
        axpy(&mut v, b[k], &power);
        axpy(&mut u_inner, b[k + 1], &power);
        k += 2;
        if k < b.len() {
            power = power.dot(&a2);
        }
    }
    (a.dot(&u_inner), v)
}

fn order13_uv(a: &Array2<Complex64>, n: usize) -> (Array2<Complex64>, Array2<Complex64>) {
    let b = &B13;
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let mut inner_u = a6.mapv(|z| z * b[13]);
    axpy(&mut inner_u, b[11], &a4);
    axpy(&mut inner_u, b[9], &a2);
    let mut u = a6.dot(&inner_u);
    axpy(&mut u, b[7], &a6);
    axpy(&mut u, b[5], &a4);
    axpy(&mut u, b[3], &a2);
    u += &identity_scaled(n, b[1]);
    let u = a.dot(&u);

    let mut inner_v = a6.mapv(|z| z * b[12]);
    axpy(&mut inner_v, b[10], &a4);
    axpy(&mut inner_v, b[8], &a2);
    let mut v = a6.dot(&inner_v);
    axpy(&mut v, b[6], &a6);
    axpy(&mut v, b[4], &a4);
    axpy(&mut v, b[2], &a2);
    v += &identity_scaled(n, b[0]);
    (u, v)
}

/// Solves (V − U) X = (V + U).
fn pade_solve(u: Array2<Complex64>, v: Array2<Complex64>) -> Result<Array2<Complex64>> {
    let p = &v + &u;
    let q = v - u;
    lu_solve(q, p)
}

/// Solves A X = B by LU factorization with partial pivoting; consumes both.
pub(crate) fn lu_solve(mut a: Array2<Complex64>, mut b: Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    let m = b.ncols();
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|r| (r, a[[r, k]].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 || !pmax.is_finite() {
            return Err(Error::Internal(format!("singular Padé denominator at column {k}")));
        }
        if piv != k {
            for c in 0..n {
                a.swap([k, c], [piv, c]);
            }
            for c in 0..m {
                b.swap([k, c], [piv, c]);
            }
        }
        let pivot = a[[k, k]];
        for r in k + 1..n {
            let f = a[[r, k]] / pivot;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            a[[r, k]] = f;
            for c in k + 1..n {
                let t = a[[k, c]];
                a[[r, c]] -= f * t;
            }
            for c in 0..m {
                let t = b[[k, c]];
                b[[r, c]] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        let pivot = a[[k, k]];
        for c in 0..m {
            let mut acc = b[[k, c]];
            for j in k + 1..n {
                acc -= a[[k, j]] * b[[j, c]];
            }
            b[[k, c]] = acc / pivot;
        }
    }
    Ok(b)
}
