//! Parameter grids checked cell by cell in parallel; results are merged in
//! key order so output is independent of scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{fundamental_discriminant, is_prime};
use crate::error::{invalid, Result};
use crate::fields::{analyze_place, CmFieldSpec};
use crate::lattice::{nonsplit_criterion, singular_normal_form, GramMatrix};
use crate::witt::{artin_invariant_via_cokernel, fixed_module_basis, FCrystal, LocalFieldData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Cokernel length = d/2 over (p, d, e, N, m).
    Crystal,
    /// φ = p fixed vectors and their rank over the same grid.
    FixedModule,
    /// Lattice split criterion vs. splitting of p in Q(√disc).
    Shimada,
}

impl std::str::FromStr for SweepKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crystal" => Ok(SweepKind::Crystal),
            "fixed_module" | "fixed-module" => Ok(SweepKind::FixedModule),
            "shimada" => Ok(SweepKind::Shimada),
            _ => invalid(format!("unknown sweep {s:?}; expected crystal, fixed-module or shimada")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepCell {
    pub key: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub cells: usize,
    pub failures: usize,
    pub results: Vec<SweepCell>,
}

impl SweepResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrystalCell {
    pub p: u64,
    pub d: u32,
    pub e: u32,
    pub precision: u32,
    pub m: u32,
}

impl CrystalCell {
    fn key(&self) -> String {
        format!("p={} d={:02} e={} N={:02} m={:02}", self.p, self.d, self.e, self.precision, self.m)
    }
}

/// {2,3,5,7} × {2,…,10} × {1,2,3} × N ∈ {4,8,16} × m ∈ {d, 2d}.
pub fn crystal_grid() -> Vec<CrystalCell> {
    let mut cells = Vec::new();
    for p in [2u64, 3, 5, 7] {
        for d in [2u32, 4, 6, 8, 10] {
            for e in 1..=3 {
                for precision in [4u32, 8, 16] {
                    for m in [d, 2 * d] {
                        cells.push(CrystalCell { p, d, e, precision, m });
                    }
                }
            }
        }
    }
    cells
}

pub fn crystal_cell(c: &CrystalCell) -> SweepCell {
    let run = || -> Result<(u32, u32)> {
        let lfd = LocalFieldData::new(c.p, c.d, c.e)?;
        let crystal = FCrystal::build(&lfd, c.m, c.precision)?;
        let a = artin_invariant_via_cokernel(&crystal)?;
        Ok((a.artin_invariant, a.fixed_module_length))
    };
    match run() {
        Ok((a, f)) => SweepCell {
            key: c.key(),
            passed: a == c.d / 2 && f == c.d / 2,
            detail: format!("g_pi length {a}, fixed-module length {f}, expected {}", c.d / 2),
        },
        Err(e) => SweepCell { key: c.key(), passed: false, detail: e.to_string() },
    }
}

pub fn fixed_module_cell(c: &CrystalCell) -> SweepCell {
    let run = || -> Result<(usize, usize, u32)> {
        let lfd = LocalFieldData::new(c.p, c.d, c.e)?;
        let crystal = FCrystal::build(&lfd, c.m, c.precision)?;
        let fm = fixed_module_basis(&crystal)?;
        Ok((fm.vectors.len(), fm.rank, fm.residual_valuation))
    };
    let expected_rank = (c.d * c.e) as usize;
    match run() {
        Ok((count, rank, residual)) => SweepCell {
            key: c.key(),
            passed: count == expected_rank && rank == expected_rank && residual + 1 >= c.precision,
            detail: format!(
                "{count} vectors, rank {rank} (expected {expected_rank}), phi(x) - p x vanishes mod p^{residual}"
            ),
        },
        Err(e) => SweepCell { key: c.key(), passed: false, detail: e.to_string() },
    }
}

/// Even positive-definite binary forms with |entries| ≤ bound.
pub fn even_binary_forms(bound: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    for a1 in (2..=bound).step_by(2) {
        for a3 in (2..=bound).step_by(2) {
            for a2 in -bound..=bound {
                if a1 * a3 > a2 * a2 {
                    out.push((a1, a2, a3));
                }
            }
        }
    }
    out
}

/// Lattice criterion against analyze_place for one prime over all forms;
/// returns (admissible forms, disagreements).
pub fn shimada_prime(p: u64, bound: i64) -> (usize, Vec<String>) {
    let mut admissible = 0;
    let mut bad = Vec::new();
    for (a1, a2, a3) in even_binary_forms(bound) {
        let g = GramMatrix::binary(a1, a2, a3);
        let Ok(nf) = singular_normal_form(&g, p) else { continue };
        admissible += 1;
        let verdict = nonsplit_criterion(&nf);
        let agrees = fundamental_discriminant(nf.disc_pic)
            .and_then(|d| analyze_place(&CmFieldSpec::ImagQuadratic { d }, p))
            .map(|inv| inv.split_q_in_e == !verdict);
        if agrees != Ok(true) {
            bad.push(format!("({a1},{a2},{a3})"));
        }
    }
    (admissible, bad)
}

pub fn shimada_primes() -> Vec<u64> {
    (2..100).filter(|&p| is_prime(p)).collect()
}

fn collect(kind: SweepKind, mut results: Vec<SweepCell>) -> SweepResult {
    results.sort_by(|a, b| a.key.cmp(&b.key));
    let failures = results.iter().filter(|c| !c.passed).count();
    SweepResult { kind, cells: results.len(), failures, results }
}

pub fn run_sweep(kind: SweepKind) -> SweepResult {
    let results: Vec<SweepCell> = match kind {
        SweepKind::Crystal => crystal_grid().par_iter().map(crystal_cell).collect(),
        SweepKind::FixedModule => crystal_grid().par_iter().map(fixed_module_cell).collect(),
        SweepKind::Shimada => shimada_primes()
            .par_iter()
            .map(|&p| {
                let (n, bad) = shimada_prime(p, 20);
                SweepCell {
                    key: format!("p={p:02}"),
                    passed: bad.is_empty() && n > 0,
                    detail: if bad.is_empty() {
                        format!("{n} admissible forms agree")
                    } else {
                        format!("{} of {n} disagree: {}", bad.len(), bad.join(" "))
                    },
                }
            })
            .collect(),
    };
    collect(kind, results)
}
