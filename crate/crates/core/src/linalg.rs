//! Dense complex linear algebra on top of `faer`: Kronecker products,
//! commutators, the matrix exponential and a compressed-row operator for
//! the hot matrix-vector products of the trajectory engine.

use faer::linalg::solvers::Solve;
use faer::{Mat, Scale};
use num_complex::Complex64 as C64;

/// Dense complex matrix. Storage order is an implementation detail of `faer`.
pub type ComplexMatrix = Mat<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn identity(n: usize) -> ComplexMatrix {
    Mat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    Mat::zeros(rows, cols)
}

pub fn diagonal(entries: &[C64]) -> ComplexMatrix {
    Mat::from_fn(entries.len(), entries.len(), |i, j| if i == j { entries[i] } else { ZERO })
}

pub fn from_rows(rows: &[&[C64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint().to_owned()
}

pub fn conjugate(a: &ComplexMatrix) -> ComplexMatrix {
    a.conjugate().to_owned()
}

pub fn transpose(a: &ComplexMatrix) -> ComplexMatrix {
    a.transpose().to_owned()
}

pub fn scale(c: C64, a: &ComplexMatrix) -> ComplexMatrix {
    Scale(c) * a
}

pub fn scale_real(c: f64, a: &ComplexMatrix) -> ComplexMatrix {
    Scale(C64::new(c, 0.0)) * a
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Largest entry modulus.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// Induced 1-norm (maximum absolute column sum).
pub fn one_norm(a: &ComplexMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.norm_l2()
}

/// Max-modulus deviation from Hermiticity.
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    if a.nrows() != a.ncols() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in i..n {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn matvec(a: &ComplexMatrix, x: &[C64]) -> Vec<C64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![ZERO; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        let col = a.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += col[i] * xj;
        }
    }
    y
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = a
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("Hermitian eigensolver converges");
    ev.sort_by(f64::total_cmp);
    ev
}

// Padé coefficient tables and switching thresholds for scaling and squaring.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
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
const PADE13: [f64; 14] = [
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
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn add_scaled_into(acc: &mut ComplexMatrix, c: f64, a: &ComplexMatrix) {
    let c = C64::new(c, 0.0);
    for j in 0..acc.ncols() {
        for i in 0..acc.nrows() {
            acc[(i, j)] += c * a[(i, j)];
        }
    }
}

fn add_identity(acc: &mut ComplexMatrix, c: f64) {
    for i in 0..acc.nrows() {
        acc[(i, i)] += C64::new(c, 0.0);
    }
}

/// Matrix exponential by scaling and squaring with diagonal Padé
/// approximants (degrees 3 through 13).
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    let norm = one_norm(a);
    if norm == 0.0 {
        return identity(n);
    }
    let a2 = a * a;
    for &(m, theta) in &THETA {
        if norm <= theta {
            let (u, v) = pade_low(a, &a2, m);
            return solve_pade(&u, &v);
        }
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let (scaled, a2) = if s > 0 {
        let f = 0.5f64.powi(s);
        let sa = scale_real(f, a);
        let sa2 = scale_real(f * f, &a2);
        (sa, sa2)
    } else {
        (a.clone(), a2)
    };
    let (u, v) = pade13(&scaled, &a2);
    let mut r = solve_pade(&u, &v);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low(a: &ComplexMatrix, a2: &ComplexMatrix, m: usize) -> (ComplexMatrix, ComplexMatrix) {
    let b: &[f64] = match m {
        3 => &PADE3,
        5 => &PADE5,
        7 => &PADE7,
        _ => &PADE9,
    };
    let n = a.nrows();
    let mut powers = vec![a2.clone()];
    while powers.len() < m / 2 {
        let next = powers.last().unwrap() * a2;
        powers.push(next);
    }
    let mut u_inner = zeros(n, n);
    let mut v = zeros(n, n);
    add_identity(&mut u_inner, b[1]);
    add_identity(&mut v, b[0]);
    for (k, p) in powers.iter().enumerate() {
        add_scaled_into(&mut u_inner, b[2 * k + 3], p);
        add_scaled_into(&mut v, b[2 * k + 2], p);
    }
    (a * &u_inner, v)
}

fn pade13(a: &ComplexMatrix, a2: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let b = &PADE13;
    let n = a.nrows();
    let a4 = a2 * a2;
    let a6 = &a4 * a2;

    let mut w1 = scale_real(b[13], &a6);
    add_scaled_into(&mut w1, b[11], &a4);
    add_scaled_into(&mut w1, b[9], a2);
    let mut w2 = scale_real(b[7], &a6);
    add_scaled_into(&mut w2, b[5], &a4);
    add_scaled_into(&mut w2, b[3], a2);
    add_identity(&mut w2, b[1]);
    let u = a * (&a6 * &w1 + w2);

    let mut z1 = scale_real(b[12], &a6);
    add_scaled_into(&mut z1, b[10], &a4);
    add_scaled_into(&mut z1, b[8], a2);
    let mut z2 = scale_real(b[6], &a6);
    add_scaled_into(&mut z2, b[4], &a4);
    add_scaled_into(&mut z2, b[2], a2);
    add_identity(&mut z2, b[0]);
    let v = &a6 * &z1 + z2;
    debug_assert_eq!(v.nrows(), n);
    (u, v)
}

fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    let p = v + u;
    let q = v - u;
    q.partial_piv_lu().solve(&p)
}

/// Compressed-row form of a matrix, with exact zeros dropped.
#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    pub fn from_dense(a: &ComplexMatrix) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        let n = a.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let v = a[(i, j)];
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim: n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// `‖A x‖²`.
    pub fn image_norm_sqr(&self, x: &[C64]) -> f64 {
        (0..self.dim)
            .map(|i| {
                let mut row = ZERO;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    row += self.vals[k] * x[self.cols[k]];
                }
                row.norm_sqr()
            })
            .sum()
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let mut acc = ZERO;
        for (i, xi) in x.iter().enumerate() {
            let mut row = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.vals[k] * x[self.cols[k]];
            }
            acc += xi.conj() * row;
        }
        acc
    }
}
