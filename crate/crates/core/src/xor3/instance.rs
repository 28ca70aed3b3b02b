use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rng::{derive_seed, SeededRng, PRNG_TAG};
use crate::error::{Error, Result};
use crate::poly::binomial;

/// `x_{vars[0]} ⊕ x_{vars[1]} ⊕ x_{vars[2]} = parity`, with `vars` strictly increasing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XorConstraint {
    pub vars: [u32; 3],
    pub parity: bool,
}

impl XorConstraint {
    pub fn new(mut vars: [u32; 3], parity: bool) -> Result<Self> {
        vars.sort_unstable();
        if vars[0] == vars[1] || vars[1] == vars[2] {
            return Err(Error::InvalidParameter(format!(
                "constraint variables {vars:?} are not distinct"
            )));
        }
        Ok(XorConstraint { vars, parity })
    }

    pub fn is_satisfied(&self, x: &[bool]) -> bool {
        (x[self.vars[0] as usize] ^ x[self.vars[1] as usize] ^ x[self.vars[2] as usize])
            == self.parity
    }

    /// The four satisfying assignments to `vars`, in increasing binary order
    /// (first variable most significant).
    pub fn satisfying(&self) -> [[bool; 3]; 4] {
        let mut out = [[false; 3]; 4];
        let mut k = 0;
        for code in 0..8u8 {
            let a = [code & 4 != 0, code & 2 != 0, code & 1 != 0];
            if (a[0] ^ a[1] ^ a[2]) == self.parity {
                out[k] = a;
                k += 1;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Xor3Instance {
    pub n: usize,
    pub constraints: Vec<XorConstraint>,
    pub seed: Option<u64>,
    pub prng: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    n: usize,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    prng: Option<String>,
    constraints: Vec<[u32; 4]>,
}

/// Lexicographic unranking of 3-subsets of `[n]`.
fn unrank_triple(n: usize, mut rank: usize) -> [u32; 3] {
    let mut out = [0u32; 3];
    let mut start = 0usize;
    for (slot, item) in out.iter_mut().enumerate() {
        let remaining = 2 - slot;
        let mut v = start;
        loop {
            let block = binomial(n - v - 1, remaining);
            if rank < block {
                break;
            }
            rank -= block;
            v += 1;
        }
        *item = v as u32;
        start = v + 1;
    }
    out
}

impl Xor3Instance {
    pub fn new(n: usize, constraints: Vec<XorConstraint>) -> Result<Self> {
        for c in &constraints {
            if c.vars[2] as usize >= n {
                return Err(Error::IndexOutOfRange {
                    index: c.vars[2] as usize,
                    len: n,
                });
            }
        }
        Ok(Xor3Instance {
            n,
            constraints,
            seed: None,
            prng: None,
        })
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// `m` independent uniform draws from the `2·C(n,3)` possible constraints.
    pub fn sample_random(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("need n ≥ 3, got {n}")));
        }
        let mut rng = SeededRng::new(seed);
        let triples = binomial(n, 3);
        let constraints = (0..m)
            .map(|_| {
                let u = rng.below(2 * triples as u64) as usize;
                XorConstraint {
                    vars: unrank_triple(n, u / 2),
                    parity: u % 2 == 1,
                }
            })
            .collect();
        Ok(Xor3Instance {
            n,
            constraints,
            seed: Some(seed),
            prng: Some(PRNG_TAG.into()),
        })
    }

    /// Same triples as [`sample_random`](Self::sample_random) with parities set so
    /// that a random hidden assignment satisfies every constraint.
    pub fn sample_planted(n: usize, m: usize, seed: u64) -> Result<(Self, Vec<bool>)> {
        let mut rng = SeededRng::new(derive_seed(seed, 1));
        let x: Vec<bool> = (0..n).map(|_| rng.bit()).collect();
        let inst = Self::sample_planted_with(n, m, seed, &x)?;
        Ok((inst, x))
    }

    pub fn sample_planted_with(n: usize, m: usize, seed: u64, x: &[bool]) -> Result<Self> {
        if x.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let mut inst = Self::sample_random(n, m, seed)?;
        for c in &mut inst.constraints {
            c.parity = x[c.vars[0] as usize] ^ x[c.vars[1] as usize] ^ x[c.vars[2] as usize];
        }
        Ok(inst)
    }

    pub fn satisfied_count(&self, x: &[bool]) -> Result<usize> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self
            .constraints
            .iter()
            .filter(|c| c.is_satisfied(x))
            .count())
    }

    /// Per-variable occurrence counts and their maximum.
    pub fn occurrence_counts(&self) -> (Vec<usize>, usize) {
        let mut counts = vec![0; self.n];
        for c in &self.constraints {
            for &v in &c.vars {
                counts[v as usize] += 1;
            }
        }
        let max = counts.iter().copied().max().unwrap_or(0);
        (counts, max)
    }

    /// Exact maximum number of satisfiable constraints (`n ≤ 28`); among optimal
    /// assignments the lexicographically smallest `(x_0, x_1, …)` is returned.
    pub fn max_sat_bruteforce(&self) -> Result<(usize, Vec<bool>)> {
        const GUARD: usize = 28;
        if self.n > GUARD {
            return Err(Error::Guard(format!(
                "brute force limited to {GUARD} variables, got {}",
                self.n
            )));
        }
        let n = self.n;
        // x_i lives at bit n−1−i so numeric order of the code is lexicographic order of x
        let masks: Vec<(u32, bool)> = self
            .constraints
            .iter()
            .map(|c| {
                let m = c
                    .vars
                    .iter()
                    .fold(0u32, |a, &v| a | 1 << (n - 1 - v as usize));
                (m, c.parity)
            })
            .collect();
        let total: u64 = 1 << n;
        let chunk = 1u64 << n.saturating_sub(6).min(16);
        let chunks = total.div_ceil(chunk);
        let (best, code) = (0..chunks)
            .into_par_iter()
            .map(|k| {
                let mut best = (0usize, u64::MAX);
                for code in k * chunk..((k + 1) * chunk).min(total) {
                    let c32 = code as u32;
                    let sat = masks
                        .iter()
                        .filter(|&&(m, b)| ((c32 & m).count_ones() & 1 == 1) == b)
                        .count();
                    if sat > best.0 || best.1 == u64::MAX {
                        best = (sat, code);
                    }
                }
                best
            })
            .reduce(
                || (0, u64::MAX),
                |a, b| {
                    if b.1 == u64::MAX || a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                        a
                    } else {
                        b
                    }
                },
            );
        let x = (0..n).map(|i| code >> (n - 1 - i) & 1 == 1).collect();
        Ok((best, x))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(InstanceJson {
            n: self.n,
            seed: self.seed,
            prng: self.prng.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| [c.vars[0], c.vars[1], c.vars[2], c.parity as u32])
                .collect(),
        })
        .expect("instance serializes")
    }

    /// Hex SHA-256 of the compact canonical JSON; used as the provenance id.
    pub fn id(&self) -> String {
        let text = serde_json::to_string(&self.to_json()).expect("instance serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: InstanceJson = serde_json::from_value(v.clone())?;
        let mut constraints = Vec::with_capacity(j.constraints.len());
        for c in j.constraints {
            if c[3] > 1 {
                return Err(Error::InvalidParameter(format!(
                    "parity {} is not a bit",
                    c[3]
                )));
            }
            constraints.push(XorConstraint::new([c[0], c[1], c[2]], c[3] == 1)?);
        }
        let mut inst = Self::new(j.n, constraints)?;
        inst.seed = j.seed;
        inst.prng = j.prng;
        Ok(inst)
    }

    /// `p xor n m` header followed by one `i1 i2 i3 b` line per constraint.
    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p xor {} {}\n", self.n, self.m());
        for c in &self.constraints {
            let _ = writeln!(
                s,
                "{} {} {} {}",
                c.vars[0], c.vars[1], c.vars[2], c.parity as u8
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unranking_is_lexicographic() {
        let n = 7;
        let mut expect = Vec::new();
        for a in 0..n as u32 {
            for b in a + 1..n as u32 {
                for c in b + 1..n as u32 {
                    expect.push([a, b, c]);
                }
            }
        }
        let got: Vec<[u32; 3]> = (0..binomial(n, 3)).map(|r| unrank_triple(n, r)).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn forced_triple() {
        for seed in 0..20 {
            let inst = Xor3Instance::sample_random(3, 1, seed).unwrap();
            assert_eq!(inst.constraints[0].vars, [0, 1, 2]);
        }
        assert!(Xor3Instance::sample_random(2, 1, 0).is_err());
    }

    #[test]
    fn determinism() {
        let a = Xor3Instance::sample_random(10, 40, 99).unwrap();
        let b = Xor3Instance::sample_random(10, 40, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().to_string(), b.to_json().to_string());
    }

    #[test]
    fn planted_properties() {
        let (inst, x) = Xor3Instance::sample_planted(8, 30, 5).unwrap();
        assert_eq!(inst.satisfied_count(&x).unwrap(), 30);
        let zero = Xor3Instance::sample_planted_with(8, 30, 5, &[false; 8]).unwrap();
        assert!(zero.constraints.iter().all(|c| !c.parity));
        let random = Xor3Instance::sample_random(8, 30, 5).unwrap();
        let triples = |i: &Xor3Instance| i.constraints.iter().map(|c| c.vars).collect::<Vec<_>>();
        assert_eq!(triples(&inst), triples(&random));
    }

    #[test]
    fn flipping_a_variable_loses_its_occurrences() {
        let (inst, x) = Xor3Instance::sample_planted(9, 25, 11).unwrap();
        let (counts, _) = inst.occurrence_counts();
        for v in 0..9 {
            let mut y = x.clone();
            y[v] = !y[v];
            assert_eq!(inst.satisfied_count(&y).unwrap(), 25 - counts[v]);
        }
        let empty = Xor3Instance::new(4, vec![]).unwrap();
        assert_eq!(empty.satisfied_count(&[false; 4]).unwrap(), 0);
        assert!(empty.satisfied_count(&[false; 3]).is_err());
    }

    #[test]
    fn occurrence_examples() {
        let one = Xor3Instance::new(5, vec![XorConstraint::new([3, 0, 1], true).unwrap()]).unwrap();
        assert_eq!(one.occurrence_counts(), (vec![1, 1, 0, 1, 0], 1));
        let inst = Xor3Instance::sample_random(100, 400, 1).unwrap();
        let (counts, max) = inst.occurrence_counts();
        assert_eq!(counts.iter().sum::<usize>(), 1200);
        assert_eq!(max, *counts.iter().max().unwrap());
    }

    #[test]
    fn single_constraint_witness() {
        let inst =
            Xor3Instance::new(4, vec![XorConstraint::new([1, 2, 3], true).unwrap()]).unwrap();
        let (best, x) = inst.max_sat_bruteforce().unwrap();
        assert_eq!(best, 1);
        assert_eq!(x, vec![false, false, false, true]);
    }

    #[test]
    fn json_and_dimacs() {
        let inst = Xor3Instance::sample_random(5, 3, 2).unwrap();
        let back = Xor3Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
        let text = inst.to_dimacs();
        assert!(text.starts_with("p xor 5 3\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn satisfying_assignments_have_right_parity() {
        for parity in [false, true] {
            let c = XorConstraint::new([0, 1, 2], parity).unwrap();
            for a in c.satisfying() {
                assert_eq!(a[0] ^ a[1] ^ a[2], parity);
            }
        }
    }
}
