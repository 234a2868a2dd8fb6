//! Exact kernel computation via fraction-free (Bareiss) elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Row echelon form produced by fraction-free elimination.
#[derive(Debug, Clone)]
pub struct Echelon<I> {
    pub rows: Vec<Vec<I>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl<I> Echelon<I> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Bareiss elimination: every intermediate entry is a minor of the input, so
/// the division by the previous pivot is exact and entries stay integral.
pub fn bareiss<I: Integer + Signed + Clone>(mut m: Vec<Vec<I>>, ncols: usize) -> Echelon<I> {
    let nrows = m.len();
    debug_assert!(m.iter().all(|r| r.len() == ncols));
    let mut prev = I::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for col in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let pivot = pivot_row[col].clone();
        for row in rest.iter_mut() {
            let lead = row[col].clone();
            for j in col + 1..ncols {
                let v = pivot.clone() * row[j].clone() - lead.clone() * pivot_row[j].clone();
                row[j] = v.div_floor(&prev);
            }
            row[col] = I::zero();
        }
        prev = pivot;
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    Echelon {
        rows: m,
        pivots,
        ncols,
    }
}

/// Basis of the integer kernel `{x : M x = 0}`; each vector is primitive
/// (gcd 1) with a positive leading entry.
pub fn integer_kernel<I: Integer + Signed + Clone>(m: Vec<Vec<I>>, ncols: usize) -> Vec<Vec<I>> {
    let ech = bareiss(m, ncols);
    ech.free_columns()
        .into_iter()
        .map(|f| ech.kernel_vector(f))
        .collect()
}

impl<I: Integer + Signed + Clone> Echelon<I> {
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ncols).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// The kernel vector with a 1 (before clearing) in free column `f` and 0
    /// in every other free column. Its support lies in columns `≤ f`.
    pub fn kernel_vector(&self, f: usize) -> Vec<I> {
        let mut x: Vec<Ratio<I>> = vec![Ratio::zero(); self.ncols];
        x[f] = Ratio::one();
        for (r, &pc) in self.pivots.iter().enumerate().rev() {
            if pc > f {
                continue;
            }
            let row = &self.rows[r];
            let mut acc = Ratio::<I>::zero();
            for j in pc + 1..=f {
                if !row[j].is_zero() && !x[j].is_zero() {
                    acc = acc + Ratio::from_integer(row[j].clone()) * x[j].clone();
                }
            }
            x[pc] = -acc / Ratio::from_integer(row[pc].clone());
        }
        primitive(x)
    }
}

fn primitive<I: Integer + Signed + Clone>(x: Vec<Ratio<I>>) -> Vec<I> {
    let l = x.iter().fold(I::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<I> = x
        .iter()
        .map(|q| q.numer().clone() * (l.clone() / q.denom().clone()))
        .collect();
    let g = ints.iter().fold(I::zero(), |acc, v| acc.gcd(v));
    let mut out: Vec<I> = if g.is_zero() {
        ints
    } else {
        ints.into_iter().map(|v| v / g.clone()).collect()
    };
    if out.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative()) {
        out = out.into_iter().map(|v| -v).collect();
    }
    out
}

/// Clears the denominators of each row, which leaves the kernel unchanged.
pub fn clear_denominators(rows: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    rows
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(&q.denom()));
            row.iter()
                .map(|q| q.numer() * (&l / q.denom()))
                .collect()
        })
        .collect()
}

/// Integer kernel of a rational matrix.
pub fn rational_kernel(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<BigInt>> {
    integer_kernel(clear_denominators(rows), ncols)
}
