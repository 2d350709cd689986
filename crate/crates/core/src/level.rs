//! Informativeness levels over entity-category presence, and the patch
//! triage tasks a message can support.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::entity::EntityCategory::{self, *};

/// Ordered worst to best; the discriminant is the ordinal score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InformativenessLevel {
    VeryPoor = 0,
    Poor = 1,
    Medium = 2,
    Good = 3,
    VeryGood = 4,
    Excellent = 5,
}

impl InformativenessLevel {
    /// Best first, the order rules are tried in.
    pub const DESCENDING: [InformativenessLevel; 6] = [
        InformativenessLevel::Excellent,
        InformativenessLevel::VeryGood,
        InformativenessLevel::Good,
        InformativenessLevel::Medium,
        InformativenessLevel::Poor,
        InformativenessLevel::VeryPoor,
    ];

    pub fn score(self) -> u8 {
        self as u8
    }

    pub fn from_score(score: u8) -> Option<Self> {
        Self::DESCENDING.into_iter().find(|l| l.score() == score)
    }

    pub fn name(self) -> &'static str {
        match self {
            InformativenessLevel::VeryPoor => "Very Poor",
            InformativenessLevel::Poor => "Poor",
            InformativenessLevel::Medium => "Medium",
            InformativenessLevel::Good => "Good",
            InformativenessLevel::VeryGood => "Very Good",
            InformativenessLevel::Excellent => "Excellent",
        }
    }

    /// The presence formula for this level, as printed in report legends.
    pub fn rule(self) -> &'static str {
        match self {
            InformativenessLevel::Excellent => "VULNID ∧ CWEID ∧ SEVERITY ∧ SECWORD ∧ ACTION ∧ FLAW",
            InformativenessLevel::VeryGood => "VULNID ∧ SECWORD ∧ ACTION ∧ FLAW",
            InformativenessLevel::Good => "SECWORD ∧ ACTION ∧ FLAW",
            InformativenessLevel::Medium => "ACTION ∧ (FLAW ∨ SECWORD)",
            InformativenessLevel::Poor => "VULNID ∨ CWEID ∨ SEVERITY ∨ SECWORD ∨ ACTION ∨ FLAW",
            InformativenessLevel::VeryPoor => "no entity found",
        }
    }

    fn satisfied_by(self, s: &BTreeSet<EntityCategory>) -> bool {
        let has = |c| s.contains(&c);
        match self {
            InformativenessLevel::Excellent => EntityCategory::ALL.iter().all(|c| has(*c)),
            InformativenessLevel::VeryGood => has(Vulnid) && has(Secword) && has(Action) && has(Flaw),
            InformativenessLevel::Good => has(Secword) && has(Action) && has(Flaw),
            InformativenessLevel::Medium => has(Action) && (has(Flaw) || has(Secword)),
            InformativenessLevel::Poor => !s.is_empty(),
            InformativenessLevel::VeryPoor => true,
        }
    }
}

impl fmt::Display for InformativenessLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// First satisfied rule, best level first.
pub fn classify(present: &BTreeSet<EntityCategory>) -> InformativenessLevel {
    InformativenessLevel::DESCENDING.into_iter().find(|l| l.satisfied_by(present)).expect("VeryPoor always matches")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskCapability {
    pub detection: bool,
    pub assessment: bool,
    pub prioritization: bool,
}

impl TaskCapability {
    pub fn letters(self) -> String {
        [(self.detection, 'D'), (self.assessment, 'A'), (self.prioritization, 'P')]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, c)| *c)
            .collect()
    }
}

/// From category presence alone, independent of the level.
pub fn capabilities(present: &BTreeSet<EntityCategory>) -> TaskCapability {
    TaskCapability {
        detection: [Vulnid, Action, Flaw, Secword].iter().any(|c| present.contains(c)),
        assessment: present.contains(&Cweid),
        prioritization: present.contains(&Severity),
    }
}

/// Tasks a level is documented to enable in the spectrum legend. For Poor it
/// lists all three even though no Poor message enables all of them at once.
pub fn legend_capabilities(level: InformativenessLevel) -> TaskCapability {
    let all = TaskCapability { detection: true, assessment: true, prioritization: true };
    match level {
        InformativenessLevel::Excellent | InformativenessLevel::Poor => all,
        InformativenessLevel::VeryGood | InformativenessLevel::Good | InformativenessLevel::Medium => {
            TaskCapability { detection: true, ..Default::default() }
        }
        InformativenessLevel::VeryPoor => TaskCapability::default(),
    }
}

/// All 64 presence sets, in bitmask order over [`EntityCategory::ALL`].
pub fn all_subsets() -> Vec<BTreeSet<EntityCategory>> {
    (0u32..64)
        .map(|mask| {
            EntityCategory::ALL.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, c)| *c).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::InformativenessLevel::*;
    use super::*;

    fn set(cats: &[EntityCategory]) -> BTreeSet<EntityCategory> {
        cats.iter().copied().collect()
    }

    #[test]
    fn examples() {
        assert_eq!(classify(&set(&EntityCategory::ALL)), Excellent);
        assert_eq!(classify(&set(&[Action, Secword])), Medium);
        assert_eq!(classify(&set(&[Severity])), Poor);
        assert_eq!(classify(&set(&[])), VeryPoor);
        assert_eq!(classify(&set(&[Secword, Action, Flaw])), Good);
        assert_eq!(classify(&set(&[Vulnid, Secword, Action, Flaw])), VeryGood);
    }

    /// Counts derived by hand from the rule table.
    #[test]
    fn subset_counts() {
        let mut counts = [0usize; 6];
        for s in all_subsets() {
            counts[classify(&s).score() as usize] += 1;
        }
        assert_eq!(counts, [1, 39, 16, 4, 3, 1]);
    }

    #[test]
    fn ordering_and_scores() {
        assert!(VeryPoor < Poor && Poor < Medium && Medium < Good && Good < VeryGood && VeryGood < Excellent);
        for l in InformativenessLevel::DESCENDING {
            assert_eq!(InformativenessLevel::from_score(l.score()), Some(l));
        }
        assert_eq!(InformativenessLevel::from_score(6), None);
    }

    #[test]
    fn capability_examples() {
        assert_eq!(capabilities(&set(&[Cweid])), TaskCapability { assessment: true, ..Default::default() });
        assert_eq!(capabilities(&set(&[])), TaskCapability::default());
        assert_eq!(capabilities(&set(&EntityCategory::ALL)).letters(), "DAP");
        assert_eq!(legend_capabilities(Poor).letters(), "DAP");
        assert_eq!(legend_capabilities(Medium).letters(), "D");
    }

    #[test]
    fn sanity_over_all_subsets() {
        for s in all_subsets() {
            let level = classify(&s);
            assert_eq!(level == VeryPoor, s.is_empty());
            for extra in EntityCategory::ALL {
                let mut bigger = s.clone();
                bigger.insert(extra);
                assert_ne!(classify(&bigger), VeryPoor);
            }
        }
    }
}
