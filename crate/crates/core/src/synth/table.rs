use std::fmt;

use serde::{Deserialize, Serialize};

pub const MAX_TABLE_VARS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TtValue {
    Zero,
    One,
    DontCare,
}

impl From<bool> for TtValue {
    fn from(b: bool) -> Self {
        if b {
            TtValue::One
        } else {
            TtValue::Zero
        }
    }
}

/// Single-output function of `vars` variables. Row `r` assigns bit `j` of
/// `r` to variable `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTable {
    vars: usize,
    rows: Vec<TtValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("a table over {vars} variables needs {expected} rows, got {got}")]
    Length {
        vars: usize,
        expected: usize,
        got: usize,
    },
    #[error("at most {MAX_TABLE_VARS} variables are supported, got {0}")]
    TooWide(usize),
}

impl TruthTable {
    pub fn new(vars: usize, rows: Vec<TtValue>) -> Result<Self, TableError> {
        if vars > MAX_TABLE_VARS {
            return Err(TableError::TooWide(vars));
        }
        if rows.len() != 1 << vars {
            return Err(TableError::Length {
                vars,
                expected: 1 << vars,
                got: rows.len(),
            });
        }
        Ok(Self { vars, rows })
    }

    pub fn from_fn(vars: usize, f: impl Fn(u32) -> TtValue) -> Self {
        assert!(vars <= MAX_TABLE_VARS);
        Self {
            vars,
            rows: (0..1u32 << vars).map(f).collect(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn rows(&self) -> &[TtValue] {
        &self.rows
    }

    pub fn get(&self, row: u32) -> TtValue {
        self.rows[row as usize]
    }

    pub fn rows_with(&self, v: TtValue) -> impl Iterator<Item = u32> + '_ {
        self.rows
            .iter()
            .enumerate()
            .filter(move |(_, &x)| x == v)
            .map(|(i, _)| i as u32)
    }
}

/// Product term as a cube: variables in `care` are fixed to the matching
/// bit of `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cube {
    pub care: u32,
    pub value: u32,
}

impl Cube {
    pub fn minterm(vars: usize, row: u32) -> Self {
        Cube {
            care: mask(vars),
            value: row,
        }
    }

    pub fn contains(&self, row: u32) -> bool {
        row & self.care == self.value
    }

    pub fn literal_count(&self) -> usize {
        self.care.count_ones() as usize
    }

    /// Literals in variable order as `(variable, positive)`.
    pub fn literals(&self) -> Vec<(usize, bool)> {
        (0..32)
            .filter(|j| self.care >> j & 1 == 1)
            .map(|j| (j, self.value >> j & 1 == 1))
            .collect()
    }

    pub fn from_literals(lits: &[(usize, bool)]) -> Self {
        let mut c = Cube { care: 0, value: 0 };
        for &(j, pos) in lits {
            c.care |= 1 << j;
            if pos {
                c.value |= 1 << j;
            }
        }
        c
    }
}

pub(crate) fn mask(vars: usize) -> u32 {
    if vars >= 32 {
        u32::MAX
    } else {
        (1u32 << vars) - 1
    }
}

/// Sum of products. An empty term list is constant 0; a single empty term
/// is constant 1.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoverExpr {
    pub terms: Vec<Cube>,
}

impl CoverExpr {
    pub fn eval(&self, row: u32) -> bool {
        self.terms.iter().any(|t| t.contains(row))
    }

    pub fn literal_count(&self) -> usize {
        self.terms.iter().map(Cube::literal_count).sum()
    }

    /// (terms, literals): the cost minimized by [`super::minimize`].
    pub fn cost(&self) -> (usize, usize) {
        (self.terms.len(), self.literal_count())
    }

    pub fn is_const_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_const_one(&self) -> bool {
        self.terms.iter().any(|t| t.care == 0)
    }

    /// Agrees with `tt` on every row that is not a don't-care.
    pub fn matches(&self, tt: &TruthTable) -> bool {
        (0..1u32 << tt.vars()).all(|r| match tt.get(r) {
            TtValue::DontCare => true,
            v => v == TtValue::from(self.eval(r)),
        })
    }

    /// Renders with the given variable names, e.g. `Q & !x | y`.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        CoverDisplay { cover: self, names }
    }
}

struct CoverDisplay<'a> {
    cover: &'a CoverExpr,
    names: &'a [String],
}

impl fmt::Display for CoverDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cover.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.cover.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            let lits = t.literals();
            if lits.is_empty() {
                f.write_str("1")?;
            }
            for (k, (j, pos)) in lits.into_iter().enumerate() {
                if k > 0 {
                    f.write_str(" & ")?;
                }
                let name = self.names.get(j).cloned().unwrap_or_else(|| format!("v{j}"));
                write!(f, "{}{}", if pos { "" } else { "!" }, name)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_checked() {
        assert!(TruthTable::new(2, vec![TtValue::One; 3]).is_err());
        assert!(TruthTable::new(17, vec![]).is_err());
        assert!(TruthTable::new(0, vec![TtValue::One]).is_ok());
    }

    #[test]
    fn cube_literals_round_trip() {
        let c = Cube::from_literals(&[(0, true), (2, false)]);
        assert_eq!(c.literals(), vec![(0, true), (2, false)]);
        assert!(c.contains(0b001));
        assert!(!c.contains(0b101));
        let names = vec!["a".to_string(), "b".into(), "c".into()];
        let cover = CoverExpr { terms: vec![c, Cube { care: 0, value: 0 }] };
        assert_eq!(cover.display_with(&names).to_string(), "a & !c | 1");
    }
}
