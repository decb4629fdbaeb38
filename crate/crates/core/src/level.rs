use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

/// Three-valued signal level. `L1` is vacuum asserted on the net, `L0` is
/// near-atmospheric, `LX` is unknown or unsettled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LogicLevel {
    L0,
    L1,
    LX,
}

impl LogicLevel {
    pub fn from_bool(b: bool) -> Self {
        if b {
            LogicLevel::L1
        } else {
            LogicLevel::L0
        }
    }

    pub fn to_bool(self) -> Option<bool> {
        match self {
            LogicLevel::L0 => Some(false),
            LogicLevel::L1 => Some(true),
            LogicLevel::LX => None,
        }
    }

    pub fn is_known(self) -> bool {
        self != LogicLevel::LX
    }

    /// VCD scalar character.
    pub fn vcd_char(self) -> char {
        match self {
            LogicLevel::L0 => '0',
            LogicLevel::L1 => '1',
            LogicLevel::LX => 'x',
        }
    }
}

impl Not for LogicLevel {
    type Output = LogicLevel;

    fn not(self) -> LogicLevel {
        match self {
            LogicLevel::L0 => LogicLevel::L1,
            LogicLevel::L1 => LogicLevel::L0,
            LogicLevel::LX => LogicLevel::LX,
        }
    }
}

impl fmt::Display for LogicLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicLevel::L0 => "0",
            LogicLevel::L1 => "1",
            LogicLevel::LX => "x",
        })
    }
}
