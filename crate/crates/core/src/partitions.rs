//! Partitions, their classes, and set partitions of small index sets.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalars::{binom, factorial, q, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    All,
    Odd,
    Strict,
}

impl Partition {
    /// Sorts the parts into weakly decreasing order; zero parts are rejected.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidInput("partition parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }
    pub fn empty() -> Self {
        Partition { parts: vec![] }
    }
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }
    pub fn size(&self) -> u32 {
        self.parts.iter().sum()
    }
    pub fn len(&self) -> usize {
        self.parts.len()
    }
    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
    pub fn multiplicity(&self, k: u32) -> usize {
        self.parts.iter().filter(|p| **p == k).count()
    }
    pub fn is_odd(&self) -> bool {
        self.parts.iter().all(|p| p % 2 == 1)
    }
    pub fn is_strict(&self) -> bool {
        self.parts.windows(2).all(|w| w[0] > w[1])
    }
    /// `|Aut(μ)| = Π m_k!`.
    pub fn aut(&self) -> Q {
        let mut r = Q::one();
        let mut i = 0;
        while i < self.parts.len() {
            let mut j = i;
            while j < self.parts.len() && self.parts[j] == self.parts[i] {
                j += 1;
            }
            r *= Q::from_integer(factorial((j - i) as u64));
            i = j;
        }
        r
    }
    pub fn power_sum(&self, r: u32) -> Q {
        self.parts.iter().fold(Q::zero(), |a, p| a + q((*p as i64).pow(r)))
    }
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let parts = s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidInput(format!("bad partition part {x:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// All partitions of `d` in the class, in reverse-lexicographic order.
pub fn enumerate(d: u32, class: Class) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    rec(d, d, class, &mut cur, &mut out);
    out
}

fn rec(rest: u32, max: u32, class: Class, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition { parts: cur.clone() });
        return;
    }
    let mut p = max.min(rest);
    while p >= 1 {
        let ok = match class {
            Class::All => true,
            Class::Odd => p % 2 == 1,
            Class::Strict => true,
        };
        if ok {
            cur.push(p);
            let next_max = if class == Class::Strict { p - 1 } else { p };
            rec(rest - p, next_max, class, cur, out);
            cur.pop();
        }
        p -= 1;
    }
}

/// Odd partitions of every size up to `d`.
pub fn odd_up_to(d: u32) -> Vec<Partition> {
    (0..=d).flat_map(|k| enumerate(k, Class::Odd)).collect()
}

/// `𝔷_μ = |Aut μ| Π μ_i`.
pub fn zmu(mu: &Partition) -> Q {
    mu.aut() * mu.parts.iter().fold(Q::one(), |a, p| a * q(*p as i64))
}

/// Parity `ℓ(λ) mod 2` of a strict partition.
pub fn parity(lambda: &Partition) -> Result<u32> {
    if !lambda.is_strict() {
        return Err(Error::InvalidInput(format!("{lambda} is not strict")));
    }
    Ok((lambda.len() % 2) as u32)
}

/// Pads with 1's to size `d`; `None` when `|μ| > d` (the value is zero).
pub fn pad_to_degree(mu: &Partition, d: u32) -> Option<(Partition, Q)> {
    if mu.size() > d {
        return None;
    }
    let mut parts = mu.parts.clone();
    parts.extend(std::iter::repeat_n(1, (d - mu.size()) as usize));
    let hat = Partition::new(parts).expect("positive parts");
    let f = binom(hat.multiplicity(1) as i64, mu.multiplicity(1) as i64);
    Some((hat, f))
}

/// All set partitions of `0..n`, each block sorted, blocks ordered by their
/// minimum element.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    sp_rec(0, n, &mut blocks, &mut out);
    out
}

fn sp_rec(i: usize, n: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
    if i == n {
        out.push(blocks.clone());
        return;
    }
    for b in 0..blocks.len() {
        blocks[b].push(i);
        sp_rec(i + 1, n, blocks, out);
        blocks[b].pop();
    }
    blocks.push(vec![i]);
    sp_rec(i + 1, n, blocks, out);
    blocks.pop();
}

/// Subsets of `items` containing `items[0]`, as index masks into `items`.
pub fn subsets_with_first(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![];
    }
    (0..(1u64 << (n - 1)))
        .map(|mask| {
            let mut s = vec![0];
            for j in 1..n {
                if mask >> (j - 1) & 1 == 1 {
                    s.push(j);
                }
            }
            s
        })
        .collect()
}
