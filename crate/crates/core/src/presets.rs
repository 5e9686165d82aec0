//! Built-in example problems.

use std::f64::consts::PI;

use crate::model::{BlockStructure, BoundaryPair, PotentialSpec, SystemProblem};
use crate::numcore::{CMatrix, C64};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub problem: SystemProblem,
    /// A search window `[re_min, re_max, im_min, im_max]` suited to the problem.
    pub window: Option<[f64; 4]>,
}

fn cube_root_weights() -> BlockStructure {
    BlockStructure::scalar(&(1..=3).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / 3.0)).collect::<Vec<_>>())
}

fn dirac() -> BlockStructure {
    BlockStructure::real(&[-1.0, 1.0])
}

pub fn ex_n3_diagonal() -> SystemProblem {
    let c = CMatrix::identity(3);
    let d = CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(-2.0, 0.0), C64::new(0.5, 0.5)]);
    SystemProblem::new(cube_root_weights(), PotentialSpec::Zero, BoundaryPair { c, d })
}

/// One condition at 0, two at 1.
pub fn ex_n3_split() -> SystemProblem {
    let (c11, c12, c13) = (1.0, 0.5, 2.0);
    let (d21, d23, d32, d33) = (1.5, -1.0, 2.0, 0.7);
    let bc = BoundaryPair::from_real(
        &[&[c11, c12, c13], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]],
        &[&[0.0, 0.0, 0.0], &[d21, 0.0, d23], &[0.0, d32, d33]],
    );
    SystemProblem::new(cube_root_weights(), PotentialSpec::Zero, bc)
}

/// `n = 2k + 1 = 5`; Vandermonde rows in `c_j` at 0 and in `d_j` at 1.
pub fn ex_vandermonde_n5() -> SystemProblem {
    let n = 5;
    let k = 2;
    let cs: [f64; 5] = [1.0, 2.0, -1.0, 0.5, 3.0];
    let ds: [f64; 5] = [-2.0, 1.5, 0.25, 2.5, -0.75];
    let weights: Vec<C64> = (1..=n).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).collect();
    let c = CMatrix::from_fn(n, n, |i, j| if i < k { C64::new(cs[j].powi(i as i32), 0.0) } else { C64::new(0.0, 0.0) });
    let d = CMatrix::from_fn(n, n, |i, j| if i >= k { C64::new(ds[j].powi((i - k) as i32), 0.0) } else { C64::new(0.0, 0.0) });
    SystemProblem::new(BlockStructure::scalar(&weights), PotentialSpec::Zero, BoundaryPair { c, d })
}

pub const CYCLIC_D: [[f64; 3]; 3] = [[0.0, 2.0, -1.0], [-3.0, 0.0, 0.5], [1.5, -2.0, 0.0]];

/// `y_j(0) = Σ_{k≠j} d_jk y_k(1)`.
pub fn ex_n3_cyclic() -> SystemProblem {
    let c = CMatrix::identity(3);
    let d = CMatrix::from_fn(3, 3, |i, j| C64::new(-CYCLIC_D[i][j], 0.0));
    SystemProblem::new(cube_root_weights(), PotentialSpec::Zero, BoundaryPair { c, d })
}

pub const SHARED_C: [f64; 3] = [1.0, -2.0, 0.5];
pub const SHARED_D: [f64; 3] = [0.75, 1.25, -1.5];

/// `c_1 y_1(0) = c_2 y_2(0) = c_3 y_3(0) = -(d_1 y_1(1) + d_2 y_2(1) + d_3 y_3(1))`.
pub fn ex_n3_shared() -> SystemProblem {
    let c = CMatrix::diag(&SHARED_C.map(|x| C64::new(x, 0.0)));
    let d = CMatrix::from_fn(3, 3, |_, j| C64::new(SHARED_D[j], 0.0));
    SystemProblem::new(cube_root_weights(), PotentialSpec::Zero, BoundaryPair { c, d })
}

pub fn dirac_periodic() -> SystemProblem {
    let bc = BoundaryPair::from_real(&[&[1.0, 0.0], &[0.0, 1.0]], &[&[-1.0, 0.0], &[0.0, -1.0]]);
    SystemProblem::new(dirac(), PotentialSpec::Zero, bc)
}

fn dirichlet_bc() -> BoundaryPair {
    BoundaryPair::from_real(&[&[1.0, 0.0], &[0.0, 0.0]], &[&[0.0, 0.0], &[1.0, 0.0]])
}

/// `y_1(0) = y_1(1) = 0` with `Q = 0`.
pub fn dirac_dirichlet_q0() -> SystemProblem {
    SystemProblem::new(dirac(), PotentialSpec::Zero, dirichlet_bc())
}

/// `y_1(0) = y_1(1) = 0` with `Q_12 = Q_21 = q`.
pub fn dirac_dirichlet(q: f64) -> SystemProblem {
    let m = CMatrix::from_real_rows(&[&[0.0, q], &[q, 0.0]]);
    SystemProblem::new(dirac(), PotentialSpec::Constant(m), dirichlet_bc())
}

/// `y_1(1) + y_2(0) = 0`, `y_2(0) + y_2(1) = 0`, `Q = 0`: `det T_- = 0`, spectrum `π(2k+1)`.
pub fn dirac_tminus() -> SystemProblem {
    let bc = BoundaryPair::from_real(&[&[0.0, 1.0], &[0.0, 1.0]], &[&[1.0, 0.0], &[0.0, 1.0]]);
    SystemProblem::new(dirac(), PotentialSpec::Zero, bc)
}

fn mirror_bc(a1: f64, a2: f64) -> BoundaryPair {
    // y_1(0) = -a1 y_2(1), y_2(0) = -a2 y_1(1)
    BoundaryPair::from_real(&[&[1.0, 0.0], &[0.0, 1.0]], &[&[0.0, a1], &[a2, 0.0]])
}

pub fn dirac_mirror() -> SystemProblem {
    SystemProblem::new(dirac(), PotentialSpec::Zero, mirror_bc(1.0, 1.0))
}

/// Bump supported in `[0.25, 0.75]`.
pub fn mirror_bump(x: f64) -> f64 {
    if (0.25..=0.75).contains(&x) {
        (1.0 + x) * (2.0 * PI * (x - 0.25)).sin().powi(2)
    } else {
        0.0
    }
}

/// Mirror conditions with `Q_12(x) = q(x)`, `Q_21(x) = q(1 - x)`, `q` supported in `[0.25, 0.75]`.
pub fn dirac_mirror_bump(points: usize) -> SystemProblem {
    let abscissae: Vec<f64> = (0..points).map(|k| k as f64 / (points - 1) as f64).collect();
    let values = abscissae
        .iter()
        .map(|&x| CMatrix::from_real_rows(&[&[0.0, mirror_bump(x)], &[mirror_bump(1.0 - x), 0.0]]))
        .collect();
    SystemProblem::new(dirac(), PotentialSpec::Grid { abscissae, values }, mirror_bc(1.0, 1.0))
}

/// `b = (i, 1)`, `y_1(0) - h_0 y_2(0) = 0`, `y_1(1) - h_1 y_2(0) = 0`, `Q = 0`.
pub fn nonreal_weights(h0: f64, h1: f64) -> SystemProblem {
    let blocks = BlockStructure::scalar(&[C64::i(), C64::new(1.0, 0.0)]);
    let bc = BoundaryPair::from_real(&[&[1.0, -h0], &[0.0, -h1]], &[&[0.0, 0.0], &[1.0, 0.0]]);
    SystemProblem::new(blocks, PotentialSpec::Zero, bc)
}

pub fn catalog() -> Vec<Preset> {
    vec![
        Preset {
            name: "ex-n3-diagonal",
            description: "C = I, D = diag(d_j), cube-root weights: regular for any weights",
            problem: ex_n3_diagonal(),
            window: None,
        },
        Preset {
            name: "ex-n3-split",
            description: "separated conditions (1 at 0, 2 at 1), cube-root weights: irregular, weakly regular",
            problem: ex_n3_split(),
            window: None,
        },
        Preset {
            name: "ex-vandermonde-n5",
            description: "separated Vandermonde conditions, n = 5, fifth-root weights: irregular, weakly regular",
            problem: ex_vandermonde_n5(),
            window: None,
        },
        Preset {
            name: "ex-n3-cyclic",
            description: "y_j(0) = sum d_jk y_k(1), zero diagonal, cube-root weights: irregular, weakly regular",
            problem: ex_n3_cyclic(),
            window: None,
        },
        Preset {
            name: "ex-n3-shared",
            description: "c_j y_j(0) all equal to a combination of y(1), cube-root weights: irregular, weakly regular",
            problem: ex_n3_shared(),
            window: None,
        },
        Preset {
            name: "dirac-periodic",
            description: "Dirac system b = (-1, 1), periodic, Q = 0: double eigenvalues 2 pi k",
            problem: dirac_periodic(),
            window: Some([-20.0, 20.0, -2.0, 2.0]),
        },
        Preset {
            name: "dirac-dirichlet-q0",
            description: "Dirac system, y1(0) = y1(1) = 0, Q = 0: degenerate determinant",
            problem: dirac_dirichlet_q0(),
            window: None,
        },
        Preset {
            name: "dirac-dirichlet-q1",
            description: "Dirac system, y1(0) = y1(1) = 0, Q12 = Q21 = 1: eigenvalues +-sqrt(1 + pi^2 k^2)",
            problem: dirac_dirichlet(1.0),
            window: Some([-17.0, 17.0, -1.0, 1.0]),
        },
        Preset {
            name: "dirac-tminus",
            description: "Dirac system, y1(1) + y2(0) = 0, y2(0) + y2(1) = 0, Q = 0: det T- = 0, incomplete",
            problem: dirac_tminus(),
            window: Some([-40.0, 40.0, -1.0, 1.0]),
        },
        Preset {
            name: "dirac-mirror",
            description: "Dirac system, y1(0) = -y2(1), y2(0) = -y1(1), Q = 0: mirrored-bump witness",
            problem: dirac_mirror(),
            window: None,
        },
        Preset {
            name: "dirac-mirror-bump",
            description: "mirror conditions with Q12(x) = Q21(1-x) supported in [0.25, 0.75]",
            problem: dirac_mirror_bump(1025),
            window: Some([-30.0, 30.0, -3.0, 3.0]),
        },
        Preset {
            name: "nonreal-weights",
            description: "b = (i, 1), y1(0) = y2(0), y1(1) = y2(0), Q = 0: complete, adjoint incomplete",
            problem: nonreal_weights(1.0, 1.0),
            window: Some([-1.0, 1.0, -20.0, 20.0]),
        },
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    catalog().into_iter().find(|p| p.name == name)
}
