//! Instance families.
//!
//! Random instances use `ChaCha8Rng::seed_from_u64(seed)`, which gives the
//! same stream on every platform.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Multigraph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("{family}: {message}")]
    BadParams { family: String, message: String },
    #[error("no {r}-regular multigraph on {n} vertices found")]
    NoRegular { n: usize, r: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// Triangle with every edge of multiplicity `k`.
    FatTriangle { k: usize },
    Petersen,
    /// Two doubled triangles joined by a doubled perfect matching.
    Fig2,
    /// Triangle with multiplicities `⌊d/2⌋, ⌊d/2⌋, ⌈d/2⌉`, so `Δ = d`.
    Shannon { d: usize },
    /// Each pair gets a `Binomial(maxmult, p)` multiplicity.
    Random { n: usize, maxmult: usize, p: f64 },
    /// `r`-regular, multiplicities at most `maxmult`.
    RandomRegular { n: usize, r: usize, maxmult: usize },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::FatTriangle { .. } => "fat-triangle",
            Family::Petersen => "petersen",
            Family::Fig2 => "fig2",
            Family::Shannon { .. } => "shannon",
            Family::Random { .. } => "random",
            Family::RandomRegular { .. } => "random-regular",
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Family::Random { .. } | Family::RandomRegular { .. })
    }

    pub fn generate(&self, seed: u64) -> Result<Multigraph, GenerateError> {
        Ok(match *self {
            Family::FatTriangle { k } => fat_triangle(k),
            Family::Petersen => petersen(),
            Family::Fig2 => fig2(),
            Family::Shannon { d } => shannon(d),
            Family::Random { n, maxmult, p } => random(n, maxmult, p, seed),
            Family::RandomRegular { n, r, maxmult } => random_regular(n, r, maxmult, seed)?,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::FatTriangle { k } => write!(f, "fat-triangle {k}"),
            Family::Shannon { d } => write!(f, "shannon {d}"),
            Family::Random { n, maxmult, p } => write!(f, "random {n} {maxmult} {p}"),
            Family::RandomRegular { n, r, maxmult } => write!(f, "random-regular {n} {r} {maxmult}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Family {
    type Err = GenerateError;

    /// `fat-triangle K`, `petersen`, `fig2`, `shannon D`, `random N MAXMULT P`
    /// or `random-regular N R MAXMULT`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let Some((&name, args)) = toks.split_first() else {
            return Err(GenerateError::UnknownFamily(String::new()));
        };
        let bad = |message: String| GenerateError::BadParams {
            family: name.to_string(),
            message,
        };
        let want = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(bad(format!("expected {k} parameter(s), got {}", args.len())))
            }
        };
        let int = |i: usize| -> Result<usize, GenerateError> {
            args[i].parse().map_err(|_| bad(format!("bad integer `{}`", args[i])))
        };
        let family = match name {
            "fat-triangle" => {
                want(1)?;
                Family::FatTriangle { k: int(0)? }
            }
            "petersen" => {
                want(0)?;
                Family::Petersen
            }
            "fig2" => {
                want(0)?;
                Family::Fig2
            }
            "shannon" => {
                want(1)?;
                Family::Shannon { d: int(0)? }
            }
            "random" => {
                want(3)?;
                let p: f64 = args[2].parse().map_err(|_| bad(format!("bad probability `{}`", args[2])))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad(format!("probability {p} outside [0, 1]")));
                }
                Family::Random {
                    n: int(0)?,
                    maxmult: int(1)?,
                    p,
                }
            }
            "random-regular" => {
                want(3)?;
                Family::RandomRegular {
                    n: int(0)?,
                    r: int(1)?,
                    maxmult: int(2)?,
                }
            }
            other => return Err(GenerateError::UnknownFamily(other.to_string())),
        };
        Ok(family)
    }
}

pub fn fat_triangle(k: usize) -> Multigraph {
    triangle(k, k, k)
}

pub fn shannon(d: usize) -> Multigraph {
    triangle(d / 2, d / 2, d - d / 2)
}

fn triangle(a: usize, b: usize, c: usize) -> Multigraph {
    let mut pairs = vec![(0, 1); a];
    pairs.extend(std::iter::repeat_n((1, 2), b));
    pairs.extend(std::iter::repeat_n((0, 2), c));
    Multigraph::from_pairs(3, &pairs).expect("valid triangle")
}

pub fn petersen() -> Multigraph {
    let mut pairs = Vec::new();
    for i in 0..5 {
        pairs.push((i, (i + 1) % 5));
        pairs.push((i, i + 5));
        pairs.push((5 + i, 5 + (i + 2) % 5));
    }
    Multigraph::from_pairs(10, &pairs).expect("valid Petersen graph")
}

/// Triangles `{0,2,4}` and `{1,3,5}` with the matching `0-1, 2-3, 4-5`, all doubled.
pub fn fig2() -> Multigraph {
    let mut pairs = Vec::new();
    for (u, v) in [(0, 2), (2, 4), (0, 4), (1, 3), (3, 5), (1, 5), (0, 1), (2, 3), (4, 5)] {
        pairs.push((u, v));
        pairs.push((u, v));
    }
    Multigraph::from_pairs(6, &pairs).expect("valid fig2 graph")
}

pub fn random(n: usize, maxmult: usize, p: f64, seed: u64) -> Multigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let m = (0..maxmult).filter(|_| rng.gen_bool(p)).count();
            pairs.extend(std::iter::repeat_n((u, v), m));
        }
    }
    Multigraph::from_pairs(n, &pairs).expect("pairs are in range")
}

/// Pairs vertices of largest remaining deficit with random partners,
/// restarting on a dead end.
pub fn random_regular(n: usize, r: usize, maxmult: usize, seed: u64) -> Result<Multigraph, GenerateError> {
    if (n * r) % 2 == 1 || (r > 0 && (n < 2 || (n - 1) * maxmult < r)) {
        return Err(GenerateError::NoRegular { n, r });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..200 {
        let mut left = vec![r; n];
        let mut mult = vec![0usize; n * n];
        let mut pairs = Vec::with_capacity(n * r / 2);
        let mut order: Vec<usize> = (0..n).collect();
        while let Some(&u) = {
            order.shuffle(&mut rng);
            order.iter().filter(|&&v| left[v] > 0).max_by_key(|&&v| left[v])
        } {
            let cand: Vec<usize> = (0..n)
                .filter(|&v| v != u && left[v] > 0 && mult[u * n + v] < maxmult)
                .collect();
            let Some(&v) = cand.choose(&mut rng) else {
                continue 'attempt;
            };
            left[u] -= 1;
            left[v] -= 1;
            mult[u * n + v] += 1;
            mult[v * n + u] += 1;
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        return Ok(Multigraph::from_pairs(n, &pairs).expect("pairs are in range"));
    }
    Err(GenerateError::NoRegular { n, r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::emit_multigraph;
    use crate::invariants;

    #[test]
    fn anchors() {
        let g = fig2();
        assert_eq!((g.vertex_count(), g.edge_count(), g.max_degree()), (6, 18, 6));
        assert_eq!(invariants::phi(&g).unwrap(), 6);
        let k3 = fat_triangle(1);
        assert_eq!((k3.vertex_count(), k3.edge_count()), (3, 3));
        assert_eq!(shannon(7).max_degree(), 7);
        assert_eq!(shannon(7).edge_count(), 10);
        assert_eq!(petersen().degrees(), vec![3; 10]);
    }

    #[test]
    fn parse_and_display() {
        for s in ["fat-triangle 3", "petersen", "fig2", "shannon 5", "random 8 3 0.5", "random-regular 8 4 2"] {
            let f: Family = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("random 8 3".parse::<Family>().is_err());
        assert!("random 8 3 1.5".parse::<Family>().is_err());
        assert!("cube".parse::<Family>().is_err());
    }

    #[test]
    fn random_is_reproducible() {
        let a = emit_multigraph(&random(12, 4, 0.4, 99));
        let b = emit_multigraph(&random(12, 4, 0.4, 99));
        assert_eq!(a, b);
        assert_ne!(a, emit_multigraph(&random(12, 4, 0.4, 100)));
        assert!(random(12, 4, 0.4, 99).max_multiplicity() <= 4);
    }

    #[test]
    fn regular_degrees() {
        for seed in 0..20 {
            let g = random_regular(10, 5, 2, seed).unwrap();
            assert_eq!(g.degrees(), vec![5; 10]);
            assert!(g.max_multiplicity() <= 2);
        }
        assert!(random_regular(5, 3, 1, 0).is_err());
    }
}
