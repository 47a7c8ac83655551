use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::checks::Check;
use crate::channels::BipartiteDims;
use crate::tol::Tolerances;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankClass {
    Full,
    /// Rank-deficient `ρ` with `supp ρ ⊆ supp σ`.
    Deficient,
}

impl RankClass {
    /// `(rank ρ, rank σ)` for states on `ℂ^d`.
    pub fn ranks(self, d: usize) -> (usize, usize) {
        match self {
            RankClass::Full => (d, d),
            RankClass::Deficient => {
                let rs = if d > 2 { d - 1 } else { d };
                (rs.div_ceil(2).min(d - 1).max(1), rs)
            }
        }
    }
}

impl fmt::Display for RankClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankClass::Full => "full",
            RankClass::Deficient => "deficient",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub d_a: usize,
    pub d_b: usize,
    pub rank: RankClass,
}

impl Cell {
    pub fn dims(&self) -> Result<BipartiteDims> {
        BipartiteDims::new(self.d_a, self.d_b)
    }

    pub fn d_ab(&self) -> usize {
        self.d_a * self.d_b
    }
}

fn default_seed() -> u64 {
    1
}

fn default_dims() -> Vec<[usize; 2]> {
    vec![[2, 2]]
}

fn default_ranks() -> Vec<RankClass> {
    vec![RankClass::Full, RankClass::Deficient]
}

fn default_samples() -> usize {
    10
}

fn default_checks() -> Vec<String> {
    Check::ALL.iter().map(|c| c.name().to_string()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// `[d_a, d_b]` pairs.
    #[serde(default = "default_dims")]
    pub dims: Vec<[usize; 2]>,
    #[serde(default = "default_ranks")]
    pub ranks: Vec<RankClass>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
}

impl Default for Campaign {
    fn default() -> Self {
        Campaign {
            seed: default_seed(),
            dims: default_dims(),
            ranks: default_ranks(),
            samples: default_samples(),
            tolerances: None,
            checks: default_checks(),
        }
    }
}

impl FromStr for Campaign {
    type Err = Error;

    /// JSON when the text starts with `{`, TOML otherwise.
    fn from_str(text: &str) -> Result<Self> {
        let c: Campaign = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        };
        c.validate()?;
        Ok(c)
    }
}

impl Campaign {
    pub fn validate(&self) -> Result<()> {
        for &[a, b] in &self.dims {
            if a == 0 || b == 0 {
                return Err(Error::InvalidArgument(format!("dimension pair [{a}, {b}] must be positive")));
            }
            if a * b > 9 {
                return Err(Error::InvalidArgument(format!("d_a·d_b = {} exceeds the supported maximum of 9", a * b)));
            }
        }
        for name in &self.checks {
            name.parse::<Check>()?;
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.dims
            .iter()
            .flat_map(|&[d_a, d_b]| self.ranks.iter().map(move |&rank| Cell { d_a, d_b, rank }))
            .collect()
    }

    pub fn selected_checks(&self) -> Result<Vec<Check>> {
        self.checks.iter().map(|n| n.parse()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_toml_parsing() {
        let c: Campaign = "seed = 7\nsamples = 3\ndims = [[2, 3]]\nchecks = [\"dpi\"]\n".parse().unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.ranks, default_ranks());
        assert_eq!(c.cells().len(), 2);
        let d: Campaign = "{}".parse().unwrap();
        assert_eq!(d, Campaign::default());
    }

    #[test]
    fn rejects_unknown_checks_and_fields() {
        assert!(matches!("checks = [\"nope\"]".parse::<Campaign>(), Err(Error::UnknownCheck(_))));
        assert!("bogus = 1".parse::<Campaign>().is_err());
        assert!("dims = [[3, 4]]".parse::<Campaign>().is_err());
    }

    #[test]
    fn tolerance_overrides_are_partial() {
        let c: Campaign = "[tolerances]\ndpi = 1e-6\n".parse().unwrap();
        let t = c.tolerances.unwrap();
        assert_eq!(t.dpi, 1e-6);
        assert_eq!(t.isometry, crate::tol::DEFAULT.isometry);
    }

    #[test]
    fn deficient_ranks_are_nested_and_deficient() {
        for d in 2..=9 {
            let (r, s) = RankClass::Deficient.ranks(d);
            assert!(1 <= r && r <= s && s <= d && r < d, "d = {d}");
        }
    }
}
