//! Channel matrices, the monomial basis in the off-diagonal entries, the
//! input alphabet built from it, and the finite Condition (*) checker.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Serialize, Serializer};

use crate::dist::atom_budget;
use crate::error::{Error, Result};
use crate::linalg::{bareiss, clear_denominators};
use crate::poly::{Generator, MonoId, Monomial};
use crate::rational::Rational;
use crate::ExactScalar;

/// A `K × K` channel matrix with exact entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelMatrix {
    k: usize,
    entries: Vec<Vec<ExactScalar>>,
}

/// Name of the generator standing for entry `(i, j)` (0-based indices,
/// 1-based names), e.g. `h_1_2`.
pub fn generic_name(i: usize, j: usize) -> String {
    format!("h_{}_{}", i + 1, j + 1)
}

impl ChannelMatrix {
    pub fn new(entries: Vec<Vec<ExactScalar>>) -> Result<Self> {
        let k = entries.len();
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "channel matrix needs K >= 2, got {k}"
            )));
        }
        for row in &entries {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: row.len(),
                });
            }
        }
        Ok(ChannelMatrix { k, entries })
    }

    /// Every entry an independent generator `h_i_j`.
    pub fn generic(k: usize) -> Result<Self> {
        Self::new(
            (0..k)
                .map(|i| (0..k).map(|j| ExactScalar::var(&generic_name(i, j))).collect())
                .collect(),
        )
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| ExactScalar::from_integer(v)).collect())
                .collect(),
        )
    }

    /// `H_λ = [[1, 0, 0], [1, λ, 0], [1, 1, 1]]`.
    pub fn h_lambda(lambda: &Rational) -> Self {
        let one = ExactScalar::one;
        let zero = ExactScalar::zero;
        ChannelMatrix {
            k: 3,
            entries: vec![
                vec![one(), zero(), zero()],
                vec![one(), ExactScalar::from_rational(lambda), zero()],
                vec![one(), one(), one()],
            ],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> &ExactScalar {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<ExactScalar>] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[ExactScalar] {
        &self.entries[i]
    }

    /// Off-diagonal positions in row-major order.
    pub fn off_diagonal_positions(k: usize) -> Vec<(usize, usize)> {
        (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect()
    }

    /// The off-diagonal entries, in the order of [`Self::off_diagonal_positions`].
    pub fn off_diagonal(&self) -> Vec<ExactScalar> {
        Self::off_diagonal_positions(self.k)
            .into_iter()
            .map(|(i, j)| self.entries[i][j].clone())
            .collect()
    }

    /// Every entry nonzero.
    pub fn is_fully_connected(&self) -> bool {
        self.entries.iter().flatten().all(|e| !e.is_zero())
    }
}

impl fmt::Display for ChannelMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

pub fn is_fully_connected(h: &ChannelMatrix) -> bool {
    h.is_fully_connected()
}

/// `φ(d) = C(K(K−1) + d, d)`.
pub fn phi(k: usize, d: usize) -> BigUint {
    let n = BigUint::from(k * (k - 1) + d);
    num_integer::binomial(n, BigUint::from(d))
}

/// All monomials of degree `≤ d` in the `K(K−1)` off-diagonal generators,
/// by degree and then lexicographically descending exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonomialBasis {
    pub k: usize,
    pub d: usize,
    #[serde(skip)]
    pub exponents: Vec<Vec<u32>>,
    pub monomials: Vec<Monomial>,
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Number of monomials of degree `≤ t`.
    pub fn count_up_to(&self, t: usize) -> usize {
        self.exponents
            .iter()
            .take_while(|e| e.iter().sum::<u32>() as usize <= t)
            .count()
    }

    /// `f_j(ȟ)` for each monomial, with the off-diagonal entries of `h`
    /// substituted for the generators.
    pub fn evaluate(&self, h: &ChannelMatrix) -> Result<Vec<ExactScalar>> {
        if h.k() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: h.k(),
            });
        }
        let vals = h.off_diagonal();
        let mut powers: Vec<Vec<ExactScalar>> = vals
            .iter()
            .map(|v| vec![ExactScalar::one(), v.clone()])
            .collect();
        let mut out = Vec::with_capacity(self.len());
        for e in &self.exponents {
            let mut acc = ExactScalar::one();
            for (p, &ep) in e.iter().enumerate() {
                if ep == 0 {
                    continue;
                }
                while powers[p].len() <= ep as usize {
                    let next = powers[p].last().expect("nonempty") * &vals[p];
                    powers[p].push(next);
                }
                acc = &acc * &powers[p][ep as usize];
            }
            out.push(acc);
        }
        Ok(out)
    }
}

fn exponent_vectors(n: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == n {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=total).rev() {
        prefix.push(e);
        exponent_vectors(n, total - e, prefix, out);
        prefix.pop();
    }
}

pub fn enumerate_monomials(k: usize, d: usize) -> MonomialBasis {
    let gens: Vec<Generator> = ChannelMatrix::off_diagonal_positions(k)
        .into_iter()
        .map(|(i, j)| Generator::named(&generic_name(i, j)))
        .collect();
    let mut exponents = Vec::new();
    for t in 0..=d as u32 {
        exponent_vectors(gens.len(), t, &mut Vec::new(), &mut exponents);
    }
    let monomials = exponents
        .iter()
        .map(|e| Monomial::from_powers(gens.iter().copied().zip(e.iter().copied())))
        .collect();
    MonomialBasis {
        k,
        d,
        exponents,
        monomials,
    }
}

/// The input alphabet `{Σ_j a_j f_j(ȟ) : a_j ∈ {1, …, N}}`, deduplicated in
/// enumeration order.
pub fn build_wn(h: &ChannelMatrix, d: usize, n: u64) -> Result<Vec<ExactScalar>> {
    if n < 1 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let basis = enumerate_monomials(h.k(), d);
    let f = basis.evaluate(h)?;
    let budget = atom_budget();
    let fits = (n as f64).powi(f.len() as i32) <= budget as f64;
    if !fits {
        return Err(Error::BudgetExceeded { budget });
    }
    let mut acc = vec![ExactScalar::zero()];
    for fj in &f {
        let multiples: Vec<ExactScalar> = (1..=n as i64)
            .map(|a| fj.scale(&Rational::from_integer(a)))
            .collect();
        let mut next = Vec::with_capacity(acc.len() * multiples.len());
        for x in &acc {
            for m in &multiples {
                next.push(x + m);
            }
        }
        acc = next;
    }
    let mut seen = FxHashSet::default();
    acc.retain(|x| seen.insert(x.clone()));
    Ok(acc)
}

/// Which family of values carries the dependence found for a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `{f_j(ȟ) : deg f_j ≤ d + 1}` alone is dependent.
    Monomial,
    /// `{h_ii f_j(ȟ) : deg f_j ≤ d}` alone is dependent.
    Diagonal,
    /// Each family is independent but their union is not.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessTerm {
    #[serde(serialize_with = "ser_bigint")]
    pub coefficient: BigInt,
    pub diagonal: bool,
    pub monomial: Monomial,
    pub value: ExactScalar,
}

/// A nontrivial integer combination of the values checked for `user` that
/// vanishes identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionWitness {
    pub user: usize,
    pub degree: usize,
    pub family: FamilyKind,
    pub terms: Vec<WitnessTerm>,
}

impl ConditionWitness {
    /// `Σ c_j v_j`, which is zero for a valid witness.
    pub fn combination(&self) -> ExactScalar {
        self.terms.iter().fold(ExactScalar::zero(), |acc, t| {
            acc + t.value.scale(&Rational::from(t.coefficient.clone()))
        })
    }

    /// Re-substitutes the coefficients and checks the result is exactly zero.
    pub fn verify(&self) -> bool {
        self.terms.iter().any(|t| !t.coefficient.is_zero()) && self.combination().is_zero()
    }
}

fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionStatus {
    HoldsUpToBound,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserCheck {
    pub user: usize,
    pub monomial_count: usize,
    pub monomial_rank: usize,
    pub diagonal_count: usize,
    pub diagonal_rank: usize,
    pub combined_rank: usize,
    pub failing: Option<FamilyKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionStarReport {
    pub status: ConditionStatus,
    pub degree: usize,
    pub users: Vec<UserCheck>,
    pub witness: Option<ConditionWitness>,
}

impl ConditionStarReport {
    pub fn holds(&self) -> bool {
        self.status == ConditionStatus::HoldsUpToBound
    }
}

struct Column {
    value: ExactScalar,
    monomial: Monomial,
    diagonal: bool,
}

// Coefficient matrix with one row per monomial in the generators and one
// column per value.
fn coefficient_matrix(cols: &[&Column]) -> Vec<Vec<BigInt>> {
    let mut row_of: FxHashMap<MonoId, usize> = FxHashMap::default();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (c, col) in cols.iter().enumerate() {
        for (m, q) in col.value.id_terms() {
            let r = *row_of.entry(*m).or_insert_with(|| {
                rows.push(vec![Rational::zero(); cols.len()]);
                rows.len() - 1
            });
            rows[r][c] = q.clone();
        }
    }
    clear_denominators(&rows)
}

fn first_dependence(cols: &[&Column]) -> (usize, Option<Vec<BigInt>>) {
    let ech = bareiss(coefficient_matrix(cols), cols.len());
    let witness = ech.free_columns().first().map(|&f| ech.kernel_vector(f));
    (ech.rank(), witness)
}

fn check_user(h: &ChannelMatrix, basis: &MonomialBasis, f: &[ExactScalar], i: usize, d: usize) -> (UserCheck, Option<ConditionWitness>) {
    let low = basis.count_up_to(d);
    let hii = h.entry(i, i);
    let pure: Vec<Column> = f
        .iter()
        .zip(&basis.monomials)
        .map(|(v, m)| Column {
            value: v.clone(),
            monomial: m.clone(),
            diagonal: false,
        })
        .collect();
    let diag: Vec<Column> = f[..low]
        .iter()
        .zip(&basis.monomials)
        .map(|(v, m)| Column {
            value: hii * v,
            monomial: m.clone(),
            diagonal: true,
        })
        .collect();

    let pure_first: Vec<&Column> = pure.iter().chain(&diag).collect();
    let ech = bareiss(coefficient_matrix(&pure_first), pure_first.len());
    let combined_rank = ech.rank();
    let monomial_rank = ech.pivots.iter().filter(|&&p| p < pure.len()).count();
    let diag_refs: Vec<&Column> = diag.iter().collect();
    let (diagonal_rank, diag_witness) = first_dependence(&diag_refs);

    let (family, coeffs, cols): (Option<FamilyKind>, Option<Vec<BigInt>>, Vec<&Column>) =
        if monomial_rank < pure.len() {
            let f0 = ech.free_columns()[0];
            (Some(FamilyKind::Monomial), Some(ech.kernel_vector(f0)), pure_first)
        } else if diagonal_rank < diag.len() {
            (Some(FamilyKind::Diagonal), diag_witness, diag_refs)
        } else if combined_rank < pure_first.len() {
            let f0 = ech.free_columns()[0];
            (Some(FamilyKind::Mixed), Some(ech.kernel_vector(f0)), pure_first)
        } else {
            (None, None, Vec::new())
        };

    let witness = family.zip(coeffs).map(|(family, c)| ConditionWitness {
        user: i,
        degree: d,
        family,
        terms: c
            .into_iter()
            .zip(cols)
            .filter(|(c, _)| !c.is_zero())
            .map(|(coefficient, col)| WitnessTerm {
                coefficient,
                diagonal: col.diagonal,
                monomial: col.monomial.clone(),
                value: col.value.clone(),
            })
            .collect(),
    });
    let check = UserCheck {
        user: i,
        monomial_count: pure.len(),
        monomial_rank,
        diagonal_count: diag.len(),
        diagonal_rank,
        combined_rank,
        failing: family,
    };
    (check, witness)
}

/// Checks, for each user `i`, that the values `f_j(ȟ)` (degree `≤ d + 1`)
/// together with `h_ii f_j(ȟ)` (degree `≤ d`) are linearly independent over
/// the rationals.
pub fn check_condition_star(h: &ChannelMatrix, d: usize) -> Result<ConditionStarReport> {
    let basis = enumerate_monomials(h.k(), d + 1);
    let f = basis.evaluate(h)?;
    let results: Vec<(UserCheck, Option<ConditionWitness>)> = (0..h.k())
        .into_par_iter()
        .map(|i| check_user(h, &basis, &f, i, d))
        .collect();
    let mut users = Vec::with_capacity(results.len());
    let mut witness = None;
    for (check, w) in results {
        users.push(check);
        if witness.is_none() {
            witness = w;
        }
    }
    Ok(ConditionStarReport {
        status: if witness.is_some() {
            ConditionStatus::Violated
        } else {
            ConditionStatus::HoldsUpToBound
        },
        degree: d,
        users,
        witness,
    })
}
