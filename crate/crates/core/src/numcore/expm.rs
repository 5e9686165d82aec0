use num_complex::Complex64 as C64;

use super::{linalg::Lu, CMatrix};

// Pade(13) coefficients and the theta_13 bound of Higham's scaling-and-squaring method.
const B13: [f64; 14] = [
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
const THETA13: f64 = 5.371920351148152;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
pub fn mat_exp(m: &CMatrix) -> CMatrix {
    assert!(m.is_square(), "mat_exp needs a square matrix");
    let n = m.rows();
    let norm = m.norm_1();
    if norm == 0.0 {
        return CMatrix::identity(n);
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = m.scale(re(0.5f64.powi(s)));
    let id = CMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let mut u_in = a6.scale(re(B13[13]));
    u_in.axpy(re(B13[11]), &a4);
    u_in.axpy(re(B13[9]), &a2);
    let mut u = &a6 * &u_in;
    u.axpy(re(B13[7]), &a6);
    u.axpy(re(B13[5]), &a4);
    u.axpy(re(B13[3]), &a2);
    u.axpy(re(B13[1]), &id);
    let u = &a * &u;

    let mut v_in = a6.scale(re(B13[12]));
    v_in.axpy(re(B13[10]), &a4);
    v_in.axpy(re(B13[8]), &a2);
    let mut v = &a6 * &v_in;
    v.axpy(re(B13[6]), &a6);
    v.axpy(re(B13[4]), &a4);
    v.axpy(re(B13[2]), &a2);
    v.axpy(re(B13[0]), &id);

    let p = &v + &u;
    let q = &v - &u;
    // q is well conditioned for ||a|| <= theta_13
    let mut r = Lu::new(&q).expect("square").solve_unchecked(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}
