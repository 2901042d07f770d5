//! Identifier newtypes shared by every module.
//!
//! All identifiers are plain tokens: non-empty, no whitespace, no quotes.
//! Which extra characters are forbidden depends on the identifier kind and is
//! checked where the identifier is registered, not here.

use std::fmt;

use serde::Serialize;

macro_rules! token_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(token: impl Into<String>) -> Self {
                Self(token.into())
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
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

token_id!(
    /// Name of a predicate in the vocabulary.
    PredicateId
);
token_id!(
    /// Label of a node in the viewpoint hierarchy.
    ViewpointId
);
token_id!(
    /// Name of an event type such as `war` or `invasion`.
    EventTypeId
);
token_id!(
    /// Reference to an event; events are the only legal triple subjects.
    EventId
);

/// Label of the virtual top of every viewpoint hierarchy.
pub const ALL: &str = "ALL";

impl ViewpointId {
    pub fn all() -> Self {
        Self::new(ALL)
    }

    pub fn is_all(&self) -> bool {
        self.0 == ALL
    }
}

/// True for a non-empty token without whitespace, quotes, angle brackets or
/// control characters.
pub fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| !c.is_whitespace() && !c.is_control() && !matches!(c, '"' | '<' | '>' | '\\'))
}

/// Local names of vocabulary entries: letters, digits and underscore.
pub fn is_local_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_')
}
