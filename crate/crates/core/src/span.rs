use std::fmt;

use serde::{Deserialize, Serialize};

/// Location of a token or statement in a source file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    /// Length in bytes.
    pub len: usize,
}

impl SourceSpan {
    pub fn new(file: &str, line: usize, column: usize, len: usize) -> Self {
        Self {
            file: file.to_string(),
            line: line.max(1),
            column: column.max(1),
            len,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}
