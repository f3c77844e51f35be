//! Turning a config into a group, generator sets, a complex and codes.

use cayley_ltc::codes::{random_ldpc, LinearCode};
use cayley_ltc::complex::SquareComplex;
use cayley_ltc::generators::{degree_reduce, search_pair, MorgensternFamily, Provenance};
use cayley_ltc::gf2::{BitMatrix, BitVector};
use cayley_ltc::groups::{Field, GeneratorSet, GroupTable};
use cayley_ltc::ltc::{AssemblyMode, SquareCodeInstance};
use cayley_ltc::spectral::{cayley_lambda2, LanczosParams, MethodChoice, SpectralReport};
use serde::Serialize;

use crate::config::{Caps, CodeSpec, EigenMethod, ExperimentConfig, GeneratorSpec, GroupSpec, MorgensternSet};
use crate::{derive_seed, CliError};

pub struct Built {
    pub group: GroupTable,
    pub a: GeneratorSet,
    pub b: GeneratorSet,
    pub provenance: Provenance,
    pub morgenstern: Option<MorgensternFamily>,
    pub complex: SquareComplex,
}

/// Bounds that apply to Morgenstern generator sets.
#[derive(Clone, Debug, Serialize)]
pub struct MorgensternBounds {
    pub q: u32,
    pub i: u32,
    pub ramanujan: f64,
    pub a_bound: f64,
    pub a_prime_bound: f64,
    pub a_set: &'static str,
    pub duplicates: usize,
    pub identity_hits: usize,
    pub order_two: usize,
}

fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut k = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

pub fn parse_permutation_file(text: &str) -> Result<Vec<Vec<u32>>, CliError> {
    let mut gens = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perm = line
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("permutation file line {}: {e}", lineno + 1)))?;
        gens.push(perm);
    }
    Ok(gens)
}

pub fn build_group(spec: &GroupSpec, caps: &Caps) -> Result<GroupTable, CliError> {
    Ok(match spec {
        GroupSpec::Cyclic { n } => GroupTable::cyclic(*n)?,
        GroupSpec::Dihedral { n } => GroupTable::dihedral(*n)?,
        GroupSpec::Psl2 { q, i } => {
            let (p, k) = prime_power(*q).ok_or_else(|| CliError::Config(format!("group.q = {q} is not a prime power")))?;
            GroupTable::psl2(Field::new(p, k * i)?, caps.group_order)?
        }
        GroupSpec::Permutations { generators } => GroupTable::permutations(generators, caps.group_order)?,
        GroupSpec::PermutationFile { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            GroupTable::permutations(&parse_permutation_file(&text)?, caps.group_order)?
        }
    })
}

pub fn build(cfg: &ExperimentConfig) -> Result<(Built, Option<MorgensternBounds>), CliError> {
    let gspec = cfg.group.as_ref().ok_or_else(|| CliError::Config("this command needs a group".into()))?;
    let gen = cfg.generators.as_ref().ok_or_else(|| CliError::Config("this command needs generators".into()))?;
    let (group, a, b, provenance, morgenstern, bounds) = match gen {
        GeneratorSpec::Morgenstern { a_set, reduce_a_to } => {
            let GroupSpec::Psl2 { q, i } = gspec else {
                return Err(CliError::Config("morgenstern generators need a psl2 group".into()));
            };
            let m = MorgensternFamily::new(*q, *i, cfg.caps.group_order)?;
            let ps = match a_set {
                MorgensternSet::APrime => m.a_prime()?,
                MorgensternSet::A => m.a()?,
            };
            let mut a = ps.set.clone();
            if let Some(t) = reduce_a_to {
                let lam = cayley_lambda2(&m.group, &a, MethodChoice::Iterative, lanczos(&cfg.caps, cfg.seed, "reduce"))?.lambda2;
                a = degree_reduce(&m.group, &a, *t, lam)?.reduced;
            }
            let b = m.b()?;
            let bounds = MorgensternBounds {
                q: m.q,
                i: m.i,
                ramanujan: m.ramanujan_bound(),
                a_bound: m.a_bound(),
                a_prime_bound: m.a_prime_bound(),
                a_set: match a_set {
                    MorgensternSet::APrime => "a_prime",
                    MorgensternSet::A => "a",
                },
                duplicates: ps.duplicates,
                identity_hits: ps.identity_hits,
                order_two: ps.order_two.len(),
            };
            (m.group.clone(), a, b, Provenance::Morgenstern, Some(m), Some(bounds))
        }
        GeneratorSpec::Explicit { a, b } => {
            let g = build_group(gspec, &cfg.caps)?;
            let sa = GeneratorSet::new(&g, a.iter().copied())?;
            let sb = GeneratorSet::new(&g, b.iter().copied())?;
            (g, sa, sb, Provenance::User, None, None)
        }
        GeneratorSpec::Search { size_a, size_b, attempts } => {
            let g = build_group(gspec, &cfg.caps)?;
            let pair = search_pair(&g, *size_a, *size_b, derive_seed(cfg.seed, "generators", 0), *attempts)?;
            (g, pair.a, pair.b, pair.provenance, None, None)
        }
    };
    let complex = SquareComplex::build(&group, &a, &b)?;
    Ok((Built { group, a, b, provenance, morgenstern, complex }, bounds))
}

pub fn build_code(spec: &CodeSpec, master: u64, label: &str) -> Result<LinearCode, CliError> {
    Ok(match spec {
        CodeSpec::Repetition { n } => LinearCode::repetition(*n),
        CodeSpec::Parity { n } => LinearCode::parity(*n),
        CodeSpec::Full { n } => LinearCode::full(*n),
        CodeSpec::Explicit { generator } => {
            let rows = generator
                .iter()
                .map(|r| BitVector::parse01(r))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Config(format!("code generator: {e}")))?;
            let n = rows.first().map(|r| r.len()).ok_or_else(|| CliError::Config("empty code generator".into()))?;
            LinearCode::from_generator(&BitMatrix::from_rows(n, rows).map_err(|e| CliError::Config(format!("code generator: {e}")))?)
        }
        CodeSpec::RandomLdpc { c, d, n, seed } => {
            let s = seed.unwrap_or_else(|| derive_seed(master, label, 0));
            random_ldpc(*c, *d, *n, s)?.0
        }
    })
}

pub fn build_instance(cfg: &ExperimentConfig, built: &Built) -> Result<SquareCodeInstance, CliError> {
    let codes = cfg.codes.as_ref().ok_or_else(|| CliError::Config("this command needs codes.a and codes.b".into()))?;
    let ca = build_code(&codes.a, cfg.seed, "code_a")?;
    let cb = build_code(&codes.b, cfg.seed, "code_b")?;
    if ca.len() != built.a.len() || cb.len() != built.b.len() {
        return Err(CliError::Config(format!(
            "code lengths ({}, {}) must equal |A| = {} and |B| = {}",
            ca.len(),
            cb.len(),
            built.a.len(),
            built.b.len()
        )));
    }
    Ok(SquareCodeInstance::assemble(&built.complex, &ca, &cb, AssemblyMode::Edges)?)
}

pub fn lanczos(caps: &Caps, master: u64, label: &str) -> LanczosParams {
    LanczosParams { max_matvecs: caps.eigen_matvecs, seed: derive_seed(master, label, 0), ..LanczosParams::default() }
}

pub fn method(caps: &Caps) -> MethodChoice {
    match caps.eigen_method {
        EigenMethod::Auto => MethodChoice::Auto,
        EigenMethod::Dense => MethodChoice::Dense,
        EigenMethod::Iterative => MethodChoice::Iterative,
    }
}

/// λ₂ of Cay(G, A) and Cay(G, B).
pub fn lambdas(cfg: &ExperimentConfig, built: &Built) -> Result<(SpectralReport, SpectralReport), CliError> {
    let ra = cayley_lambda2(&built.group, &built.a, method(&cfg.caps), lanczos(&cfg.caps, cfg.seed, "lambda_a"))?;
    let rb = cayley_lambda2(&built.group, &built.b, method(&cfg.caps), lanczos(&cfg.caps, cfg.seed, "lambda_b"))?;
    Ok((ra, rb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(16), Some((2, 4)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn permutation_file_lines() {
        let g = parse_permutation_file("# s3\n1 0 2\n\n0 2 1\n").unwrap();
        assert_eq!(g, vec![vec![1, 0, 2], vec![0, 2, 1]]);
        assert!(parse_permutation_file("1 x 2").unwrap_err().to_string().contains("line 1"));
    }
}
