//! The shipped Satake diagram catalog.
//!
//! The catalog is a plain text file embedded at compile time; records carry
//! the family label, ambient Cartan type, black node set, and the involution
//! as a product of 2-cycles. The `fork-swap` keyword records the convention
//! for the involution on odd black forks of DI/DII, where the diagram data
//! alone does not determine it.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::datum::CartanDatum;
use super::satake::SatakeDiagram;
use crate::{Error, Result};

pub const CATALOG_TEXT: &str = include_str!("../../data/satake_catalog.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub label: String,
    pub cartan: String,
    pub rank: usize,
    /// 0-based black nodes.
    pub black: Vec<usize>,
    /// 0-based involution.
    pub tau: Vec<usize>,
    pub note: String,
}

impl CatalogEntry {
    pub fn diagram(&self) -> Result<SatakeDiagram> {
        let datum = CartanDatum::by_name(&self.cartan)?;
        SatakeDiagram::new(datum, self.black.clone(), self.tau.clone())
    }
}

/// Parse catalog text. Each non-comment line is `label cartan black tau [note]`.
pub fn parse_catalog(text: &str) -> Result<Vec<CatalogEntry>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(Error::Invalid(alloc::format!(
                "catalog line {}: expected at least 4 fields",
                ln + 1
            )));
        }
        let label = fields[0].to_string();
        let cartan = fields[1].to_string();
        let rank: usize = cartan
            .split('x')
            .map(|p| p[1..].parse::<usize>().unwrap_or(0))
            .sum();
        if rank == 0 {
            return Err(Error::Invalid(alloc::format!(
                "catalog line {}: bad cartan '{}'",
                ln + 1,
                cartan
            )));
        }
        let black: Vec<usize> = if fields[2] == "-" {
            vec![]
        } else {
            let mut b = Vec::new();
            for p in fields[2].split(',') {
                let v: usize = p
                    .parse()
                    .map_err(|_| Error::Invalid(alloc::format!("bad black node '{p}'")))?;
                if v == 0 || v > rank {
                    return Err(Error::Invalid(alloc::format!("black node {v} out of range")));
                }
                b.push(v - 1);
            }
            b
        };
        let mut tau: Vec<usize> = (0..rank).collect();
        match fields[3] {
            "id" => {}
            "fork-swap" => {
                // swap the two fork nodes (last two) of a D-type diagram
                if rank < 2 {
                    return Err(Error::Invalid("fork-swap needs rank >= 2".into()));
                }
                tau.swap(rank - 1, rank - 2);
            }
            cycles => {
                for cyc in cycles.split(',') {
                    let (a, b) = cyc
                        .split_once('-')
                        .ok_or_else(|| Error::Invalid(alloc::format!("bad tau cycle '{cyc}'")))?;
                    let a: usize = a
                        .parse()
                        .map_err(|_| Error::Invalid(alloc::format!("bad tau cycle '{cyc}'")))?;
                    let b: usize = b
                        .parse()
                        .map_err(|_| Error::Invalid(alloc::format!("bad tau cycle '{cyc}'")))?;
                    if a == 0 || b == 0 || a > rank || b > rank {
                        return Err(Error::Invalid(alloc::format!("tau cycle {cyc} out of range")));
                    }
                    tau.swap(a - 1, b - 1);
                }
            }
        }
        let note = fields[4..].join(" ");
        out.push(CatalogEntry {
            label,
            cartan,
            rank,
            black,
            tau,
            note,
        });
    }
    Ok(out)
}

/// The embedded catalog.
pub fn catalog() -> Vec<CatalogEntry> {
    parse_catalog(CATALOG_TEXT).expect("embedded catalog parses")
}

/// Look up entries by label, optionally filtered by rank.
pub fn find(label: &str, rank: Option<usize>) -> Vec<CatalogEntry> {
    catalog()
        .into_iter()
        .filter(|e| e.label == label && rank.map_or(true, |r| e.rank == r))
        .collect()
}

/// Resolve shorthand like `AI1`, `AII3`, `AIII11`, `AIV2`, `BII2`, `CII3`,
/// `DII4`, `FII` to a unique catalog entry; plain labels need `rank`.
pub fn resolve(type_name: &str, rank: Option<usize>) -> Result<CatalogEntry> {
    if type_name == "AIII11" {
        return catalog()
            .into_iter()
            .find(|e| e.label == "AIII" && e.cartan == "A1xA1")
            .ok_or_else(|| Error::Invalid("AIII11 not in catalog".into()));
    }
    // split trailing digits
    let split = type_name
        .find(|c: char| c.is_ascii_digit())
        .unwrap_or(type_name.len());
    let (label, digits) = type_name.split_at(split);
    let rank = if digits.is_empty() {
        rank
    } else {
        Some(digits.parse::<usize>().map_err(|_| {
            Error::Invalid(alloc::format!("bad type name '{type_name}'"))
        })?)
    };
    let matches = find(label, rank);
    match matches.len() {
        0 => Err(Error::Invalid(alloc::format!(
            "no catalog entry for '{type_name}'{}",
            rank.map(|r| alloc::format!(" rank {r}")).unwrap_or_default()
        ))),
        1 => Ok(matches.into_iter().next().unwrap()),
        _ => Err(Error::Invalid(alloc::format!(
            "ambiguous type '{type_name}': {} entries (specify rank/parameters)",
            matches.len()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_parses() {
        let c = catalog();
        assert!(c.len() > 40);
        assert!(c.iter().any(|e| e.label == "EIX"));
    }

    #[test]
    fn every_entry_is_admissible() {
        for e in catalog() {
            let d = e.diagram().unwrap_or_else(|err| {
                panic!("{} {}: {err}", e.label, e.cartan);
            });
            let rep = d.validate();
            assert!(rep.valid, "{} {}: {}", e.label, e.cartan, rep.failure);
        }
    }

    #[test]
    fn every_white_orbit_classifies() {
        for e in catalog() {
            let d = e.diagram().unwrap();
            for (orbit, _sub, ty) in d.rank_one_decomposition().0 {
                assert!(
                    ty.is_some(),
                    "{} {}: orbit {:?} not classified",
                    e.label,
                    e.cartan,
                    orbit
                );
            }
        }
    }

    #[test]
    fn aiii11_special_case_resolves() {
        let e = resolve("AIII11", None).unwrap();
        assert_eq!(e.cartan, "A1xA1");
        let e = resolve("AI1", None).unwrap();
        assert_eq!(e.cartan, "A1");
        let e = resolve("DII", Some(4)).unwrap();
        assert_eq!(e.cartan, "D4");
        assert!(resolve("XYZ", None).is_err());
    }

    #[test]
    fn default_params_exist_for_all_entries() {
        use crate::cartan::params::QSPParams;
        for e in catalog() {
            let d = e.diagram().unwrap();
            let p = QSPParams::default_for(&d);
            assert!(p.is_ok(), "{} {}: {:?}", e.label, e.cartan, p.err());
        }
    }
}
