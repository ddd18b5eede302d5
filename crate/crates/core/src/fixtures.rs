//! Built-in named systems.
//!
//! | name | system |
//! |------|--------|
//! | `fig1` | 3x3 nilpotent Jordan block, `B = [0; 0; 1]` |
//! | `fig2:<eps>` | Jordan blocks `(3,1) (2,1) (eps,3) (-1,1)`, six states, two inputs |
//! | `scalar:<a>` | `x' = a x + u` |
//! | `doubleint` | double integrator |
//! | `buffer3` | `diag(1, 0, -1)`, `B = ones(3, 1)` |
//! | `schur2` | `diag(0, -1)`, `B = ones(2, 1)` |
//! | `jordan<d>` | nilpotent block of size `d` (1..=4), `B = e_d` |
//! | `imag-pair` | blocks `(0,1)`, `(i,2)` sharing a single input |
//! | `imag-repeated` | blocks `(0,2)`, `(0,1)` with two inputs |
//! | `imag-triple` | blocks `(0,2)`, `(0,1)`, `(2i,3)` with two inputs |

use crate::error::{Error, Result};
use crate::linalg::{c, real_matrix, real_vector, CMat, CVec};
use crate::model::{JordanBlock, LtiSystem};

fn block(re: f64, im: f64, size: usize) -> JordanBlock {
    JordanBlock::new(c(re, im), size)
}

/// Nilpotent 3x3 Jordan block driven through its last state.
pub fn fig1() -> LtiSystem {
    LtiSystem::jordan(
        vec![block(0.0, 0.0, 3)],
        real_matrix(3, 1, &[0.0, 0.0, 1.0]),
    )
    .unwrap()
}

/// Initial state used with [`fig1`].
pub fn fig1_x0() -> CVec {
    real_vector(&[1.0, 1.0, 1.0])
}

/// The six-state family `A_eps`.
pub fn fig2(eps: f64) -> LtiSystem {
    let blocks = vec![
        block(3.0, 0.0, 1),
        block(2.0, 0.0, 1),
        block(eps, 0.0, 3),
        block(-1.0, 0.0, 1),
    ];
    #[rustfmt::skip]
    let b = real_matrix(6, 2, &[
        0.0, 1.0,
        1.0, 0.0,
        0.0, 0.0,
        1.0, 0.0,
        0.0, 1.0,
        0.0, 1.0,
    ]);
    LtiSystem::jordan(blocks, b).unwrap()
}

pub fn scalar(a: f64) -> LtiSystem {
    LtiSystem::jordan(vec![block(a, 0.0, 1)], real_matrix(1, 1, &[1.0])).unwrap()
}

pub fn double_integrator() -> LtiSystem {
    jordan_nilpotent(2)
}

/// Nilpotent Jordan block of size `d` with `B = e_d`.
pub fn jordan_nilpotent(d: usize) -> LtiSystem {
    let mut b = CMat::zeros(d, 1);
    b[(d - 1, 0)] = c(1.0, 0.0);
    LtiSystem::jordan(vec![block(0.0, 0.0, d)], b).unwrap()
}

/// `diag(1, 0, -1)` with a single all-ones input.
pub fn buffer3() -> LtiSystem {
    LtiSystem::jordan(
        vec![block(1.0, 0.0, 1), block(0.0, 0.0, 1), block(-1.0, 0.0, 1)],
        real_matrix(3, 1, &[1.0, 1.0, 1.0]),
    )
    .unwrap()
}

/// `diag(0, -1)` with a single all-ones input.
pub fn schur2() -> LtiSystem {
    LtiSystem::jordan(
        vec![block(0.0, 0.0, 1), block(-1.0, 0.0, 1)],
        real_matrix(2, 1, &[1.0, 1.0]),
    )
    .unwrap()
}

pub fn imag_pair() -> LtiSystem {
    LtiSystem::jordan(
        vec![block(0.0, 0.0, 1), block(0.0, 1.0, 2)],
        real_matrix(3, 1, &[1.0, 1.0, 1.0]),
    )
    .unwrap()
}

pub fn imag_repeated() -> LtiSystem {
    #[rustfmt::skip]
    let b = real_matrix(3, 2, &[
        0.5, 0.0,
        1.0, 2.0,
        1.0, -1.0,
    ]);
    LtiSystem::jordan(vec![block(0.0, 0.0, 2), block(0.0, 0.0, 1)], b).unwrap()
}

pub fn imag_triple() -> LtiSystem {
    #[rustfmt::skip]
    let b = real_matrix(6, 2, &[
        1.0, 0.0,
        1.0, 1.0,
        2.0, 1.0,
        0.0, 3.0,
        0.25, 0.0,
        -1.0, 2.0,
    ]);
    LtiSystem::jordan(
        vec![block(0.0, 0.0, 2), block(0.0, 0.0, 1), block(0.0, 2.0, 3)],
        b,
    )
    .unwrap()
}

/// Names of the purely imaginary Jordan fixtures.
pub const IMAGINARY_FIXTURES: &[&str] = &[
    "jordan1",
    "jordan2",
    "jordan3",
    "jordan4",
    "imag-pair",
    "imag-repeated",
    "imag-triple",
];

/// Every fixture name without a parameter.
pub const PLAIN_FIXTURES: &[&str] = &[
    "fig1",
    "doubleint",
    "buffer3",
    "schur2",
    "jordan1",
    "jordan2",
    "jordan3",
    "jordan4",
    "imag-pair",
    "imag-repeated",
    "imag-triple",
];

/// Looks up a fixture by name, including parameterized `fig2:<eps>` and
/// `scalar:<a>`.
pub fn fixture(name: &str) -> Result<LtiSystem> {
    let param = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Input(format!("bad fixture parameter '{s}' in '{name}'")))
    };
    if let Some(eps) = name.strip_prefix("fig2:") {
        return Ok(fig2(param(eps)?));
    }
    if let Some(a) = name.strip_prefix("scalar:") {
        return Ok(scalar(param(a)?));
    }
    if let Some(d) = name.strip_prefix("jordan") {
        if let Ok(d) = d.parse::<usize>() {
            if (1..=4).contains(&d) {
                return Ok(jordan_nilpotent(d));
            }
        }
    }
    match name {
        "fig1" => Ok(fig1()),
        "doubleint" => Ok(double_integrator()),
        "buffer3" => Ok(buffer3()),
        "schur2" => Ok(schur2()),
        "imag-pair" => Ok(imag_pair()),
        "imag-repeated" => Ok(imag_repeated()),
        "imag-triple" => Ok(imag_triple()),
        _ => Err(Error::Input(format!("unknown fixture '{name}'"))),
    }
}
