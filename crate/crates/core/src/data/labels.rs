//! Class vocabulary, one-hot encoding, and the two-way regrouping.
//!
//! The four-way index map is MONOCYTE -> 0, LYMPHOCYTE -> 1, NEUTROPHIL -> 2,
//! EOSINOPHIL -> 3, so NEUTROPHIL encodes as `[0,0,1,0]` and MONOCYTE as
//! `[1,0,0,0]`. The default two-way grouping splits mononuclear cells
//! (lymphocyte, monocyte) from polymorphonuclear ones (eosinophil,
//! neutrophil).

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Dataset label vocabulary, ordered by class index.
pub const CLASS_NAMES: [&str; 4] = ["MONOCYTE", "LYMPHOCYTE", "NEUTROPHIL", "EOSINOPHIL"];

/// A partition of the four-way vocabulary into two named groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    groups: [Vec<String>; 2],
    names: [String; 2],
}

impl Grouping {
    /// Validating constructor: the two sets must partition [`CLASS_NAMES`].
    pub fn new(group0: &[&str], group1: &[&str], names: [&str; 2]) -> Result<Self> {
        let mut seen: Vec<&str> = Vec::new();
        for &label in group0.iter().chain(group1) {
            if !CLASS_NAMES.contains(&label) {
                return Err(Error::Config(format!(
                    "grouping names unknown class '{label}'"
                )));
            }
            if seen.contains(&label) {
                return Err(Error::Config(format!("grouping repeats class '{label}'")));
            }
            seen.push(label);
        }
        if group0.is_empty() || group1.is_empty() || seen.len() != CLASS_NAMES.len() {
            return Err(Error::Config(
                "grouping must split all four classes into two nonempty sets".into(),
            ));
        }
        Ok(Grouping {
            groups: [
                group0.iter().map(|s| s.to_string()).collect(),
                group1.iter().map(|s| s.to_string()).collect(),
            ],
            names: [names[0].to_string(), names[1].to_string()],
        })
    }

    /// Mononuclear (lymphocyte, monocyte) vs polymorphonuclear (eosinophil,
    /// neutrophil).
    pub fn mononuclear_vs_polymorphonuclear() -> Self {
        Grouping::new(
            &["LYMPHOCYTE", "MONOCYTE"],
            &["EOSINOPHIL", "NEUTROPHIL"],
            ["MONONUCLEAR", "POLYMORPHONUCLEAR"],
        )
        .expect("default grouping is a valid partition")
    }

    /// Same partition with the group order flipped.
    pub fn swapped(&self) -> Self {
        Grouping {
            groups: [self.groups[1].clone(), self.groups[0].clone()],
            names: [self.names[1].clone(), self.names[0].clone()],
        }
    }

    pub fn group_of(&self, label: &str) -> Result<usize> {
        for (g, members) in self.groups.iter().enumerate() {
            if members.iter().any(|m| m == label) {
                return Ok(g);
            }
        }
        Err(Error::Label(format!("unknown class label '{label}'")))
    }

    pub fn group_names(&self) -> &[String; 2] {
        &self.names
    }
}

/// Map a four-way label to its group index under `grouping`.
pub fn relabel_two_way(label: &str, grouping: &Grouping) -> Result<usize> {
    grouping.group_of(label)
}

/// Maps dataset labels to class indices for one task (four-way or two-way).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMap {
    output_names: Vec<String>,
    grouping: Option<Grouping>,
}

impl ClassMap {
    pub fn four_way() -> Self {
        ClassMap {
            output_names: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
            grouping: None,
        }
    }

    pub fn two_way(grouping: Grouping) -> Self {
        ClassMap {
            output_names: grouping.group_names().to_vec(),
            grouping: Some(grouping),
        }
    }

    /// Number of output classes (2 or 4).
    pub fn classes(&self) -> usize {
        self.output_names.len()
    }

    /// Output class names in index order.
    pub fn names(&self) -> &[String] {
        &self.output_names
    }

    /// Class index of a dataset label.
    pub fn index_of(&self, label: &str) -> Result<usize> {
        match &self.grouping {
            Some(g) => g.group_of(label),
            None => CLASS_NAMES
                .iter()
                .position(|&n| n == label)
                .ok_or_else(|| Error::Label(format!("unknown class label '{label}'"))),
        }
    }

    /// Unit basis vector at the label's class index.
    pub fn one_hot(&self, label: &str) -> Result<Tensor> {
        let idx = self.index_of(label)?;
        let mut data = vec![0.0; self.classes()];
        data[idx] = 1.0;
        Ok(Tensor::from_vec(data))
    }
}

/// One-hot encode `label` under `class_map`.
pub fn one_hot(label: &str, class_map: &ClassMap) -> Result<Tensor> {
    class_map.one_hot(label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_examples() {
        let map = ClassMap::four_way();
        assert_eq!(
            one_hot("NEUTROPHIL", &map).unwrap().data(),
            &[0.0, 0.0, 1.0, 0.0]
        );
        assert_eq!(
            one_hot("MONOCYTE", &map).unwrap().data(),
            &[1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn every_one_hot_is_a_unit_vector() {
        let map = ClassMap::four_way();
        for name in CLASS_NAMES {
            let v = one_hot(name, &map).unwrap();
            assert_eq!(v.sum(), 1.0);
            assert_eq!(v.data().iter().filter(|&&x| x != 0.0).count(), 1);
        }
    }

    #[test]
    fn unknown_label_rejected() {
        let map = ClassMap::four_way();
        assert!(matches!(one_hot("BASOPHIL", &map), Err(Error::Label(_))));
    }

    #[test]
    fn default_grouping() {
        let g = Grouping::mononuclear_vs_polymorphonuclear();
        assert_eq!(relabel_two_way("LYMPHOCYTE", &g).unwrap(), 0);
        assert_eq!(relabel_two_way("MONOCYTE", &g).unwrap(), 0);
        assert_eq!(relabel_two_way("EOSINOPHIL", &g).unwrap(), 1);
        assert_eq!(relabel_two_way("NEUTROPHIL", &g).unwrap(), 1);
    }

    #[test]
    fn every_label_maps_to_exactly_one_group() {
        let g = Grouping::mononuclear_vs_polymorphonuclear();
        for name in CLASS_NAMES {
            let idx = relabel_two_way(name, &g).unwrap();
            assert!(idx < 2);
        }
    }

    #[test]
    fn swapped_grouping_inverts_outputs() {
        let g = Grouping::mononuclear_vs_polymorphonuclear();
        let s = g.swapped();
        for name in CLASS_NAMES {
            assert_eq!(
                relabel_two_way(name, &g).unwrap(),
                1 - relabel_two_way(name, &s).unwrap()
            );
        }
    }

    #[test]
    fn non_partition_groupings_rejected() {
        // missing a class
        assert!(Grouping::new(&["MONOCYTE"], &["EOSINOPHIL", "NEUTROPHIL"], ["a", "b"]).is_err());
        // repeated class
        assert!(Grouping::new(
            &["MONOCYTE", "LYMPHOCYTE"],
            &["MONOCYTE", "EOSINOPHIL", "NEUTROPHIL"],
            ["a", "b"]
        )
        .is_err());
        // empty side
        assert!(Grouping::new(
            &[],
            &["MONOCYTE", "LYMPHOCYTE", "EOSINOPHIL", "NEUTROPHIL"],
            ["a", "b"]
        )
        .is_err());
    }
}
