use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The six reliability and security figures of merit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    /// Far user fails to decode `x2`.
    OpFar,
    /// Near user fails to decode `x2` or `x1`.
    OpNear,
    /// Tag signal is lost: the near user fails on `x2`, `x1` or `c(t)`.
    OpBd,
    /// Eavesdropper decodes `x2`.
    IpFar,
    /// Eavesdropper decodes `x1`.
    IpNear,
    /// Eavesdropper decodes `c(t)`.
    IpBd,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::OpFar,
        Metric::OpNear,
        Metric::OpBd,
        Metric::IpFar,
        Metric::IpNear,
        Metric::IpBd,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Metric::OpFar => "op_far",
            Metric::OpNear => "op_near",
            Metric::OpBd => "op_bd",
            Metric::IpFar => "ip_far",
            Metric::IpNear => "ip_near",
            Metric::IpBd => "ip_bd",
        }
    }

    pub fn is_outage(self) -> bool {
        matches!(self, Metric::OpFar | Metric::OpNear | Metric::OpBd)
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }

    pub fn outage(user: User) -> Metric {
        match user {
            User::Far => Metric::OpFar,
            User::Near => Metric::OpNear,
            User::Bd => Metric::OpBd,
        }
    }

    pub fn intercept(user: User) -> Metric {
        match user {
            User::Far => Metric::IpFar,
            User::Near => Metric::IpNear,
            User::Bd => Metric::IpBd,
        }
    }

    /// Whose signal the metric concerns.
    pub fn user(self) -> User {
        match self {
            Metric::OpFar | Metric::IpFar => User::Far,
            Metric::OpNear | Metric::IpNear => User::Near,
            Metric::OpBd | Metric::IpBd => User::Bd,
        }
    }
}

/// Owner of a signal: far user (`x2`), near user (`x1`) or the tag (`c(t)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum User {
    Far,
    Near,
    Bd,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::invalid("metric", format!("unknown metric `{s}`")))
    }
}
