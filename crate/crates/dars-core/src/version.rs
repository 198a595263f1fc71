//! Guideline versions and bump classification.
//!
//! Versions follow the `major.minor[.patch]` convention used in guideline
//! governance; the patch component defaults to 0. A leading `v` is accepted
//! on input and never emitted.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// A guideline version. Ordering is lexicographic on
/// `(major, minor, patch)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SemVer {
    pub major: u32,
    pub minor: u32,
    pub patch: u32,
}

/// What kind of update separates two versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bump {
    None,
    Patch,
    Minor,
    Major,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemVerError {
    #[error("empty version string")]
    Empty,
    #[error("version has {0} component(s), expected 2 or 3")]
    Arity(usize),
    #[error("component {index} is not a number: {text:?}")]
    BadComponent { index: usize, text: String },
}

impl SemVer {
    pub const fn new(major: u32, minor: u32, patch: u32) -> Self {
        Self { major, minor, patch }
    }

    /// Parses `"M.m"` or `"M.m.p"` digit strings, with an optional leading
    /// `v` (`"v1.0"`).
    pub fn parse(text: &str) -> Result<Self, SemVerError> {
        let trimmed = text.strip_prefix('v').unwrap_or(text);
        if trimmed.is_empty() {
            return Err(SemVerError::Empty);
        }
        let parts: Vec<&str> = trimmed.split('.').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(SemVerError::Arity(parts.len()));
        }
        let component = |index: usize| -> Result<u32, SemVerError> {
            let part = parts[index];
            if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(SemVerError::BadComponent {
                    index,
                    text: part.to_string(),
                });
            }
            part.parse().map_err(|_| SemVerError::BadComponent {
                index,
                text: part.to_string(),
            })
        };
        Ok(Self {
            major: component(0)?,
            minor: component(1)?,
            patch: if parts.len() == 3 { component(2)? } else { 0 },
        })
    }
}

impl fmt::Display for SemVer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.patch == 0 {
            write!(f, "{}.{}", self.major, self.minor)
        } else {
            write!(f, "{}.{}.{}", self.major, self.minor, self.patch)
        }
    }
}

/// Compares two versions and classifies the gap between them: the bump is
/// `Major` whenever the major components differ, `Minor` when majors agree
/// and minors differ, and so on.
pub fn compare_semver(a: &SemVer, b: &SemVer) -> (Ordering, Bump) {
    let bump = if a.major != b.major {
        Bump::Major
    } else if a.minor != b.minor {
        Bump::Minor
    } else if a.patch != b.patch {
        Bump::Patch
    } else {
        Bump::None
    };
    (a.cmp(b), bump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_two_and_three_part_versions() {
        assert_eq!(SemVer::parse("v1.0"), Ok(SemVer::new(1, 0, 0)));
        assert_eq!(SemVer::parse("2.0"), Ok(SemVer::new(2, 0, 0)));
        assert_eq!(SemVer::parse("1.2.3"), Ok(SemVer::new(1, 2, 3)));
        assert_eq!(SemVer::parse("v1.1"), Ok(SemVer::new(1, 1, 0)));
    }

    #[test]
    fn rejects_wrong_arity_and_bad_components() {
        assert_eq!(SemVerError::Arity(4), SemVer::parse("1.0.0.0").unwrap_err());
        assert_eq!(SemVerError::Arity(1), SemVer::parse("7").unwrap_err());
        assert_eq!(SemVerError::Empty, SemVer::parse("v").unwrap_err());
        assert_eq!(
            SemVerError::BadComponent {
                index: 1,
                text: "x".into()
            },
            SemVer::parse("1.x").unwrap_err()
        );
        assert_eq!(
            SemVerError::BadComponent {
                index: 0,
                text: "-1".into()
            },
            SemVer::parse("-1.0").unwrap_err()
        );
    }

    #[test]
    fn classifies_bumps() {
        let (ord, bump) = compare_semver(&SemVer::new(1, 0, 0), &SemVer::new(2, 0, 0));
        assert_eq!((ord, bump), (Ordering::Less, Bump::Major));
        let (ord, bump) = compare_semver(&SemVer::new(1, 1, 0), &SemVer::new(1, 1, 0));
        assert_eq!((ord, bump), (Ordering::Equal, Bump::None));
        let (ord, bump) = compare_semver(&SemVer::new(1, 0, 0), &SemVer::new(1, 1, 0));
        assert_eq!((ord, bump), (Ordering::Less, Bump::Minor));
        let (ord, bump) = compare_semver(&SemVer::new(1, 1, 2), &SemVer::new(1, 1, 1));
        assert_eq!((ord, bump), (Ordering::Greater, Bump::Patch));
    }

    #[test]
    fn display_omits_zero_patch() {
        assert_eq!(SemVer::new(1, 0, 0).to_string(), "1.0");
        assert_eq!(SemVer::new(1, 2, 3).to_string(), "1.2.3");
    }

    fn any_semver() -> impl Strategy<Value = SemVer> {
        (0u32..20, 0u32..20, 0u32..20).prop_map(|(a, b, c)| SemVer::new(a, b, c))
    }

    proptest! {
        #[test]
        fn ordering_is_total(a in any_semver(), b in any_semver(), c in any_semver()) {
            // total: exactly one of <, ==, > holds
            let (ord_ab, _) = compare_semver(&a, &b);
            let (ord_ba, _) = compare_semver(&b, &a);
            prop_assert_eq!(ord_ab, ord_ba.reverse());
            // antisymmetric
            if ord_ab == Ordering::Equal {
                prop_assert_eq!(a, b);
            }
            // transitive
            let (ord_bc, _) = compare_semver(&b, &c);
            let (ord_ac, _) = compare_semver(&a, &c);
            if ord_ab == Ordering::Less && ord_bc == Ordering::Less {
                prop_assert_eq!(ord_ac, Ordering::Less);
            }
            if ord_ab == Ordering::Greater && ord_bc == Ordering::Greater {
                prop_assert_eq!(ord_ac, Ordering::Greater);
            }
        }

        #[test]
        fn display_parse_round_trip(v in any_semver()) {
            prop_assert_eq!(SemVer::parse(&v.to_string()), Ok(v));
        }
    }
}
