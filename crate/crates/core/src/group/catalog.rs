//! Catalog descriptors: `free:2`, `freeproduct:Z2,Z`, `freeproduct:Z/3,Z/4`.

use std::fmt;
use std::str::FromStr;

use super::GroupError;

/// One free factor of a free product.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Block {
    /// Free abelian group `Z^rank`.
    Lattice { rank: usize },
    /// Cyclic group `Z/order`.
    Cyclic { order: i64 },
}

impl Block {
    /// Number of coordinates in a syllable of this factor.
    pub fn dimension(self) -> usize {
        match self {
            Block::Lattice { rank } => rank,
            Block::Cyclic { .. } => 1,
        }
    }

    pub fn label(self) -> String {
        match self {
            Block::Lattice { rank: 1 } => "Z".to_string(),
            Block::Lattice { rank } => format!("Z{rank}"),
            Block::Cyclic { order } => format!("Z/{order}"),
        }
    }
}

impl FromStr for Block {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || GroupError::Descriptor(format!("bad factor `{s}`"));
        let rest = s.strip_prefix('Z').ok_or_else(bad)?;
        if rest.is_empty() {
            return Ok(Block::Lattice { rank: 1 });
        }
        if let Some(order) = rest.strip_prefix('/') {
            let order: i64 = order.parse().map_err(|_| bad())?;
            if order < 2 {
                return Err(GroupError::Descriptor(format!(
                    "cyclic factor needs order >= 2, got `{s}`"
                )));
            }
            return Ok(Block::Cyclic { order });
        }
        let rank = rest.strip_prefix('^').unwrap_or(rest);
        let rank: usize = rank.parse().map_err(|_| bad())?;
        if rank == 0 {
            return Err(GroupError::Descriptor("lattice factor needs rank >= 1".into()));
        }
        Ok(Block::Lattice { rank })
    }
}

/// Which group a catalog entry names.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum GroupKind {
    Free { rank: usize },
    FreeProduct { blocks: Vec<Block> },
}

impl GroupKind {
    pub fn validate(&self) -> Result<(), GroupError> {
        match self {
            GroupKind::Free { rank } => {
                if *rank < 2 {
                    return Err(GroupError::Descriptor(format!(
                        "free group needs rank >= 2, got {rank}"
                    )));
                }
                if *rank > 26 {
                    return Err(GroupError::Descriptor("free group rank capped at 26".into()));
                }
            }
            GroupKind::FreeProduct { blocks } => {
                if blocks.len() < 2 {
                    return Err(GroupError::Descriptor(
                        "free product needs at least two factors".into(),
                    ));
                }
                let z2 = Block::Cyclic { order: 2 };
                if blocks.len() == 2 && blocks.iter().all(|b| *b == z2) {
                    return Err(GroupError::Descriptor(
                        "Z/2 * Z/2 is virtually cyclic".into(),
                    ));
                }
                let coords: usize = blocks.iter().map(|b| b.dimension()).sum();
                if coords > super::PRODUCT_SYMBOLS.len() {
                    return Err(GroupError::Descriptor("too many factor coordinates".into()));
                }
            }
        }
        Ok(())
    }
}

impl FromStr for GroupKind {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (head, tail) = s
            .split_once(':')
            .ok_or_else(|| GroupError::Descriptor(format!("missing `:` in `{s}`")))?;
        let kind = match head {
            "free" => {
                let rank = tail
                    .trim()
                    .parse()
                    .map_err(|_| GroupError::Descriptor(format!("bad rank in `{s}`")))?;
                GroupKind::Free { rank }
            }
            "freeproduct" => {
                let blocks = tail
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<Vec<Block>, _>>()?;
                GroupKind::FreeProduct { blocks }
            }
            other => {
                return Err(GroupError::Descriptor(format!("unknown group family `{other}`")))
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Free { rank } => write!(f, "free:{rank}"),
            GroupKind::FreeProduct { blocks } => {
                let labels: Vec<String> = blocks.iter().map(|b| b.label()).collect();
                write!(f, "freeproduct:{}", labels.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog_strings() {
        assert_eq!("free:2".parse::<GroupKind>().unwrap(), GroupKind::Free { rank: 2 });
        let fp: GroupKind = "freeproduct:Z2,Z".parse().unwrap();
        assert_eq!(
            fp,
            GroupKind::FreeProduct {
                blocks: vec![Block::Lattice { rank: 2 }, Block::Lattice { rank: 1 }]
            }
        );
        let cyc: GroupKind = "freeproduct:Z/3,Z/4".parse().unwrap();
        assert_eq!(cyc.to_string(), "freeproduct:Z/3,Z/4");
        assert_eq!(fp.to_string(), "freeproduct:Z2,Z");
    }

    #[test]
    fn rejects_degenerate_entries() {
        assert!("free:1".parse::<GroupKind>().is_err());
        assert!("freeproduct:Z/2,Z/2".parse::<GroupKind>().is_err());
        assert!("freeproduct:Z2".parse::<GroupKind>().is_err());
        assert!("freeproduct:Z/1,Z".parse::<GroupKind>().is_err());
        assert!("cyclic:3".parse::<GroupKind>().is_err());
        // three involutions generate a non-elementary group
        assert!("freeproduct:Z/2,Z/2,Z/2".parse::<GroupKind>().is_ok());
    }
}
