//! Dense matrix exponential by scaling and squaring with diagonal Padé
//! approximants (Higham 2005 degree selection).

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Scale};

use crate::C64;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
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

/// Maximum absolute column sum.
pub fn norm_one(a: MatRef<'_, C64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn real_scale(x: f64) -> Scale<C64> {
    Scale(C64::new(x, 0.0))
}

fn add_diag(m: &mut Mat<C64>, x: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += C64::new(x, 0.0);
    }
}

/// exp(A) for a square complex matrix.
pub fn expm(a: MatRef<'_, C64>) -> Mat<C64> {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let norm = norm_one(a);
    if norm == 0.0 {
        return Mat::identity(n, n);
    }
    for &(m, theta) in THETA.iter() {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE_3,
                5 => &PADE_5,
                7 => &PADE_7,
                _ => &PADE_9,
            };
            return pade_low(a, coeffs);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = real_scale(0.5f64.powi(s)) * a;
    let mut x = pade_13(scaled.as_ref());
    for _ in 0..s {
        x = &x * &x;
    }
    x
}

fn pade_low(a: MatRef<'_, C64>, b: &[f64]) -> Mat<C64> {
    let n = a.nrows();
    let a2 = a * a;
    let mut even_sum = Mat::<C64>::zeros(n, n);
    let mut odd_sum = Mat::<C64>::zeros(n, n);
    add_diag(&mut even_sum, b[0]);
    add_diag(&mut odd_sum, b[1]);
    let mut power = Mat::<C64>::identity(n, n);
    let mut k = 2;
    while k < b.len() {
        power = &power * &a2;
        even_sum += real_scale(b[k]) * &power;
        if k + 1 < b.len() {
            odd_sum += real_scale(b[k + 1]) * &power;
        }
        k += 2;
    }
    let u = a * &odd_sum;
    solve_pade(&u, &even_sum)
}

fn pade_13(a: MatRef<'_, C64>) -> Mat<C64> {
    let b = &PADE_13;
    let n = a.nrows();
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = real_scale(b[13]) * &a6 + real_scale(b[11]) * &a4 + real_scale(b[9]) * &a2;
    let mut outer_u =
        &a6 * &inner_u + real_scale(b[7]) * &a6 + real_scale(b[5]) * &a4 + real_scale(b[3]) * &a2;
    add_diag(&mut outer_u, b[1]);
    let u = a * &outer_u;

    let inner_v = real_scale(b[12]) * &a6 + real_scale(b[10]) * &a4 + real_scale(b[8]) * &a2;
    let mut v =
        &a6 * &inner_v + real_scale(b[6]) * &a6 + real_scale(b[4]) * &a4 + real_scale(b[2]) * &a2;
    add_diag(&mut v, b[0]);
    debug_assert_eq!(v.nrows(), n);
    solve_pade(&u, &v)
}

/// Solves (V - U) X = (V + U).
fn solve_pade(u: &Mat<C64>, v: &Mat<C64>) -> Mat<C64> {
    let p = v + u;
    let q = v - u;
    q.partial_piv_lu().solve(&p)
}
