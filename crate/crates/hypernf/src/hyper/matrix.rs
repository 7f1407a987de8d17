//! The graded homological matrices and exact linear algebra on them.
//!
//! At grade `n >= 2` the removable directions are governed by a
//! `4(n+1) x 4n` block bi-diagonal matrix built from the grade-1 coefficients
//! of the system.  Rows are the grade-`n` target slots in canonical order
//! (`P1, P2, R1, R2` within each index group `j = 0..=n`, group `j` holding
//! the `(j, n-j)` slots); columns are the grade-`(n-1)` generator slots in
//! the same layout (group `j` holding the `(j, n-1-j)` slots).  Column group
//! `j` feeds row groups `j` (diagonal block) and `j+1` (sub-diagonal block);
//! the bracket sign conventions are absorbed into the block entries, so
//! applying a generator `x` changes the grade-`n` part by `-A x`.

use num::bigint::BigInt;
use num::traits::{One, Zero};

use crate::error::{Error, Result};
use crate::liealg::{Family, PRTerm, SystemPR};
use crate::scalars::Rational;

/// The four grade-1 coefficient pairs that drive every block:
/// amplitude pairs `a01`, `a10` and rotation pairs `b01`, `b10`
/// (coefficients of `P*[0,1]`, `P*[1,0]`, `R*[0,1]`, `R*[1,0]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grade1Coeffs {
    pub a01: [Rational; 2],
    pub a10: [Rational; 2],
    pub b01: [Rational; 2],
    pub b10: [Rational; 2],
}

impl Grade1Coeffs {
    /// Reads the eight grade-1 coefficients out of a system.
    pub fn from_system(s: &SystemPR) -> Self {
        let pick = |family: Family, k: u8, m: u32, n: u32| {
            s.body().coeff(&PRTerm::new(family, k, m, n))
        };
        Grade1Coeffs {
            a01: [pick(Family::P, 1, 0, 1), pick(Family::P, 2, 0, 1)],
            a10: [pick(Family::P, 1, 1, 0), pick(Family::P, 2, 1, 0)],
            b01: [pick(Family::R, 1, 0, 1), pick(Family::R, 2, 0, 1)],
            b10: [pick(Family::R, 1, 1, 0), pick(Family::R, 2, 1, 0)],
        }
    }

    /// Builds coefficients from the four amplitude values with zero rotation
    /// couplings (sufficient for rank exploration).
    pub fn from_amplitudes(a01_1: Rational, a01_2: Rational, a10_1: Rational, a10_2: Rational) -> Self {
        Grade1Coeffs {
            a01: [a01_1, a01_2],
            a10: [a10_1, a10_2],
            b01: [Rational::zero(), Rational::zero()],
            b10: [Rational::zero(), Rational::zero()],
        }
    }

    /// The grade-1 body element these coefficients describe.
    pub fn to_body(&self) -> crate::liealg::GElement {
        let mut g = crate::liealg::GElement::zero();
        for (k, c) in self.a01.iter().enumerate() {
            g.add_term(PRTerm::p(k as u8 + 1, 0, 1), c.clone());
        }
        for (k, c) in self.a10.iter().enumerate() {
            g.add_term(PRTerm::p(k as u8 + 1, 1, 0), c.clone());
        }
        for (k, c) in self.b01.iter().enumerate() {
            g.add_term(PRTerm::r(k as u8 + 1, 0, 1), c.clone());
        }
        for (k, c) in self.b10.iter().enumerate() {
            g.add_term(PRTerm::r(k as u8 + 1, 1, 0), c.clone());
        }
        g
    }
}

/// Which of the two block species to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Couples column group `j` to row group `j`.
    Diagonal,
    /// Couples column group `j` to row group `j + 1`.
    Sub,
}

/// A dense 4x4 rational block.
pub type Block = [[Rational; 4]; 4];

fn zero_block() -> Block {
    std::array::from_fn(|_| std::array::from_fn(|_| Rational::zero()))
}

/// Scales a rational by a (possibly negative) integer factor.
fn times(c: &Rational, f: i64) -> Rational {
    c * &Rational::from_int(f)
}

/// Builds the 4x4 block coupling column group `j` into its row group at
/// grade `n`.  Row order is `(P1, P2, R1, R2)` targets; column order is the
/// `(P1, P2, R1, R2)` coordinates of the grade-`(n-1)` generator slot.
pub fn build_block(n: u32, j: u32, kind: BlockKind, coeffs: &Grade1Coeffs) -> Block {
    let (n, j) = (i64::from(n), i64::from(j));
    let mut b = zero_block();
    match kind {
        BlockKind::Diagonal => {
            let d1 = &times(&coeffs.a01[0], j) + &times(&coeffs.a01[1], n - j - 1);
            let d2 = &times(&coeffs.a01[0], j) + &times(&coeffs.a01[1], n - j - 2);
            b[0][0] = times(&d1, 2);
            b[0][1] = times(&coeffs.a01[0], -2);
            b[1][1] = times(&d2, 2);
            b[2][1] = times(&coeffs.b01[0], -2);
            b[2][2] = times(&d1, 2);
            b[3][1] = times(&coeffs.b01[1], -2);
            b[3][3] = times(&d1, 2);
        }
        BlockKind::Sub => {
            let e1 = &times(&coeffs.a10[0], j - 1) + &times(&coeffs.a10[1], n - j - 1);
            let e2 = &times(&coeffs.a10[0], j) + &times(&coeffs.a10[1], n - j - 1);
            b[0][0] = times(&e1, 2);
            b[1][0] = times(&coeffs.a10[1], -2);
            b[1][1] = times(&e2, 2);
            b[2][0] = times(&coeffs.b10[0], -2);
            b[2][2] = times(&e2, 2);
            b[3][0] = times(&coeffs.b10[1], -2);
            b[3][3] = times(&e2, 2);
        }
    }
    b
}

/// The assembled grade-`n` homological matrix in block bi-diagonal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomMatrix {
    n: u32,
    diag: Vec<Block>,
    sub: Vec<Block>,
}

impl HomMatrix {
    /// The grade this matrix acts at.
    pub fn grade(&self) -> u32 {
        self.n
    }

    /// Number of rows, `4(n+1)`.
    pub fn rows(&self) -> usize {
        4 * (self.n as usize + 1)
    }

    /// Number of columns, `4n`.
    pub fn cols(&self) -> usize {
        4 * self.n as usize
    }

    /// Single entry access.
    pub fn entry(&self, r: usize, c: usize) -> Rational {
        let (rg, ri) = (r / 4, r % 4);
        let (cg, ci) = (c / 4, c % 4);
        if rg == cg {
            self.diag[cg][ri][ci].clone()
        } else if rg == cg + 1 {
            self.sub[cg][ri][ci].clone()
        } else {
            Rational::zero()
        }
    }

    /// The diagonal block for column group `j`.
    pub fn diag_block(&self, j: usize) -> &Block {
        &self.diag[j]
    }

    /// The sub-diagonal block for column group `j`.
    pub fn sub_block(&self, j: usize) -> &Block {
        &self.sub[j]
    }

    /// Expands to a dense row-major matrix.
    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut m = vec![vec![Rational::zero(); self.cols()]; self.rows()];
        for j in 0..self.n as usize {
            for ri in 0..4 {
                for ci in 0..4 {
                    m[4 * j + ri][4 * j + ci] = self.diag[j][ri][ci].clone();
                    m[4 * (j + 1) + ri][4 * j + ci] = self.sub[j][ri][ci].clone();
                }
            }
        }
        m
    }
}

/// Assembles the grade-`n` matrix from grade-1 coefficients.  Grades below 2
/// have no homological step and are rejected.
pub fn assemble_a(n: u32, coeffs: &Grade1Coeffs) -> Result<HomMatrix> {
    if n < 2 {
        return Err(Error::GradeTooSmall { got: n, min: 2 });
    }
    let diag = (0..n).map(|j| build_block(n, j, BlockKind::Diagonal, coeffs)).collect();
    let sub = (0..n).map(|j| build_block(n, j, BlockKind::Sub, coeffs)).collect();
    Ok(HomMatrix { n, diag, sub })
}

/// Assembles the grade-`n` matrix straight from a system's grade-1 part.
pub fn assemble_a_system(n: u32, system: &SystemPR) -> Result<HomMatrix> {
    assemble_a(n, &Grade1Coeffs::from_system(system))
}

/// The grade-`n` target generator named by row `r` of the matrix.
pub fn row_term(n: u32, r: usize) -> PRTerm {
    let group = (r / 4) as u32;
    slot_term(r % 4, group, n - group)
}

/// The grade-`(n-1)` generator named by column `c` of the matrix.
pub fn col_term(n: u32, c: usize) -> PRTerm {
    let group = (c / 4) as u32;
    slot_term(c % 4, group, n - 1 - group)
}

/// `(P1, P2, R1, R2)` in-group index to generator.
pub fn slot_term(idx: usize, m: u32, n: u32) -> PRTerm {
    match idx {
        0 => PRTerm::p(1, m, n),
        1 => PRTerm::p(2, m, n),
        2 => PRTerm::r(1, m, n),
        _ => PRTerm::r(2, m, n),
    }
}

/// In-group index of a generator (inverse of [`slot_term`]).
pub fn slot_index(t: &PRTerm) -> usize {
    match (t.family, t.k) {
        (Family::P, 1) => 0,
        (Family::P, 2) => 1,
        (Family::R, 1) => 2,
        (Family::R, _) => 3,
        (Family::P, _) => unreachable!("plane index validated at construction"),
    }
}

// ---------------------------------------------------------------------------
// Exact rank and nullspace
// ---------------------------------------------------------------------------

/// Clears denominators row by row, producing an integer matrix with the same
/// row space.
fn clear_denominators(m: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| {
            let mut lcm = BigInt::one();
            for x in row {
                let d = x.as_big().denom();
                lcm = num::integer::lcm(lcm, d.clone());
            }
            row.iter()
                .map(|x| {
                    let b = x.as_big();
                    b.numer() * (&lcm / b.denom())
                })
                .collect()
        })
        .collect()
}

/// Exact rank of a dense rational matrix via fraction-free (Bareiss)
/// elimination over the integers after clearing denominators.
pub fn rank_dense(m: &[Vec<Rational>]) -> usize {
    if m.is_empty() || m[0].is_empty() {
        return 0;
    }
    let mut a = clear_denominators(m);
    let rows = a.len();
    let cols = a[0].len();
    let mut prev = BigInt::one();
    let mut rank = 0usize;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let num = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division must be exact");
                a[r][c] = num / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Exact rank of a homological matrix.
pub fn rank_exact(m: &HomMatrix) -> usize {
    rank_dense(&m.to_dense())
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip().expect("pivot nonzero");
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                #[allow(clippy::needless_range_loop)]
                for cc in 0..cols {
                    let sub = &m[r][cc] * &f;
                    m[i][cc] = &m[i][cc] - &sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact nullspace basis of a dense rational matrix (one vector per free
/// column, in ascending free-column order).
pub fn nullspace_dense(m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    if m.is_empty() || m[0].is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let pivots = rref(&mut a);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&a[r][free];
        }
        basis.push(v);
    }
    basis
}
