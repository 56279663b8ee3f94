use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Timestamp;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Self {
                Self(value.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(value: &str) -> Self {
                Self(value.to_string())
            }
        }
    };
}

string_id!(OutlineId);
string_id!(TaskId);
string_id!(SessionId);
string_id!(
    /// Unique within its chapter.
    BranchId
);

/// Time-ordered identifier: `{prefix}_{millis:012x}{random:08x}`.
///
/// Identifiers with the same prefix sort lexicographically by creation time.
pub fn new_id(prefix: &str, at: Timestamp, rng: &mut impl Rng) -> String {
    let millis = at.millis().max(0) as u64;
    format!("{prefix}_{millis:012x}{:08x}", rng.random::<u32>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ids_sort_by_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let early = new_id("ses", Timestamp::from_millis(1_000), &mut rng);
        let late = new_id("ses", Timestamp::from_millis(2_000), &mut rng);
        assert!(early < late);
        assert_eq!(early.len(), "ses_".len() + 20);
    }
}
