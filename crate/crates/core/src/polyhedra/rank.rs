//! Exact rank of integer vectors by fraction-free row reduction.
//!
//! Rows are kept in echelon form and divided by their content after every
//! elimination. Arithmetic runs in `i128` and replays everything in big
//! integers the first time an operation would overflow.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedMul, CheckedSub, Signed};

trait Entry: Clone + Integer + Signed + CheckedMul + CheckedSub + From<i64> {}
impl Entry for i128 {}
impl Entry for BigInt {}

#[derive(Clone, Debug, Default)]
struct Echelon<T> {
    /// (pivot column, row), sorted by pivot column.
    rows: Vec<(usize, Vec<T>)>,
}

impl<T: Entry> Echelon<T> {
    /// Reduces `v` against the basis; adds it if independent. `None` means
    /// an overflow happened.
    fn insert(&mut self, v: &[i64]) -> Option<bool> {
        let mut v: Vec<T> = v.iter().map(|&a| T::from(a)).collect();
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let (a, b) = (row[*p].clone(), v[*p].clone());
            for (x, r) in v.iter_mut().zip(row) {
                let lhs = x.checked_mul(&a)?;
                let rhs = r.checked_mul(&b)?;
                *x = lhs.checked_sub(&rhs)?;
            }
            normalize(&mut v);
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return Some(false);
        };
        let at = self.rows.partition_point(|(q, _)| *q < p);
        self.rows.insert(at, (p, v));
        Some(true)
    }
}

fn normalize<T: Entry>(v: &mut [T]) {
    let mut g = T::zero();
    for x in v.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
        }
    }
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x = x.div_floor(&g);
        }
    }
}

/// Incremental rank over the rationals.
#[derive(Clone, Debug, Default)]
pub struct RankAccumulator {
    small: Echelon<i128>,
    big: Option<Echelon<BigInt>>,
    accepted: Vec<Vec<i64>>,
}

impl RankAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a vector; true if it raised the rank.
    pub fn push(&mut self, v: &[i64]) -> bool {
        let grew = match &mut self.big {
            Some(big) => big.insert(v).expect("big integers do not overflow"),
            None => match self.small.insert(v) {
                Some(g) => g,
                None => {
                    let mut big = Echelon::<BigInt>::default();
                    for a in &self.accepted {
                        big.insert(a).expect("big integers do not overflow");
                    }
                    let g = big.insert(v).expect("big integers do not overflow");
                    self.big = Some(big);
                    g
                }
            },
        };
        if grew {
            self.accepted.push(v.to_vec());
        }
        grew
    }

    pub fn rank(&self) -> usize {
        self.accepted.len()
    }
}

/// Rank of a set of integer vectors.
pub fn rank_of<'a>(vs: impl IntoIterator<Item = &'a [i64]>) -> usize {
    let mut acc = RankAccumulator::new();
    for v in vs {
        acc.push(v);
    }
    acc.rank()
}
