//! Exact two-level minimization: Quine–McCluskey prime generation followed
//! by a branch-and-bound exact cover.

use std::collections::{BTreeSet, HashSet};

use super::table::{mask, CoverExpr, Cube, TruthTable, TtValue};

pub const MAX_EXACT_VARS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MinimizeError {
    #[error("exact minimization supports at most {MAX_EXACT_VARS} variables, got {0}")]
    TooManyVariables(usize),
}

/// Every prime implicant of the on-set plus don't-cares that covers at
/// least one on-set row, in canonical order.
pub fn prime_implicants(tt: &TruthTable) -> Vec<Cube> {
    let full = mask(tt.vars());
    let mut current: HashSet<Cube> = tt
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != TtValue::Zero)
        .map(|(r, _)| Cube {
            care: full,
            value: r as u32,
        })
        .collect();
    let mut primes = BTreeSet::new();
    while !current.is_empty() {
        let mut next = HashSet::new();
        let mut merged = HashSet::new();
        for c in &current {
            for j in 0..tt.vars() {
                let bit = 1u32 << j;
                if c.care & bit == 0 || c.value & bit != 0 {
                    continue;
                }
                let partner = Cube {
                    care: c.care,
                    value: c.value | bit,
                };
                if current.contains(&partner) {
                    merged.insert(*c);
                    merged.insert(partner);
                    next.insert(Cube {
                        care: c.care & !bit,
                        value: c.value,
                    });
                }
            }
        }
        for c in &current {
            if !merged.contains(c) {
                primes.insert(*c);
            }
        }
        current = next;
    }
    let ones: Vec<u32> = tt.rows_with(TtValue::One).collect();
    let mut out: Vec<Cube> = primes
        .into_iter()
        .filter(|p| ones.iter().any(|&r| p.contains(r)))
        .collect();
    out.sort_by_key(term_key);
    out
}

/// Canonical order of terms: fewer literals first, then by cube bits.
fn term_key(c: &Cube) -> (usize, u32, u32) {
    (c.literal_count(), c.care, c.value)
}

type CoverKey = (usize, usize, Vec<(usize, u32, u32)>);

fn cover_key(terms: &[Cube]) -> CoverKey {
    let mut keys: Vec<_> = terms.iter().map(term_key).collect();
    keys.sort();
    (terms.len(), terms.iter().map(Cube::literal_count).sum(), keys)
}

struct Search<'a> {
    primes: &'a [Cube],
    /// For each on-set row, the primes covering it.
    candidates: Vec<Vec<usize>>,
    rows: Vec<u32>,
    best: Option<(CoverKey, Vec<usize>)>,
}

impl Search<'_> {
    fn run(&mut self, chosen: &mut Vec<usize>, covered: &mut Vec<u32>) {
        let uncovered = (0..self.rows.len())
            .filter(|&i| covered[i] == 0)
            .min_by_key(|&i| (self.candidates[i].len(), self.rows[i]));
        let Some(row) = uncovered else {
            let terms: Vec<Cube> = chosen.iter().map(|&p| self.primes[p]).collect();
            let key = cover_key(&terms);
            if self.best.as_ref().is_none_or(|(b, _)| key < *b) {
                self.best = Some((key, chosen.clone()));
            }
            return;
        };
        if let Some(((best_terms, best_lits, _), _)) = &self.best {
            let lits: usize = chosen.iter().map(|&p| self.primes[p].literal_count()).sum();
            if (chosen.len() + 1, lits) > (*best_terms, *best_lits) {
                return;
            }
        }
        for k in 0..self.candidates[row].len() {
            let p = self.candidates[row][k];
            let cube = self.primes[p];
            for (i, r) in self.rows.iter().enumerate() {
                if cube.contains(*r) {
                    covered[i] += 1;
                }
            }
            chosen.push(p);
            self.run(chosen, covered);
            chosen.pop();
            for (i, r) in self.rows.iter().enumerate() {
                if cube.contains(*r) {
                    covered[i] -= 1;
                }
            }
        }
    }
}

/// Minimum cover by term count, then literal count, then the
/// lexicographically smallest sorted term list.
pub fn minimize(tt: &TruthTable) -> Result<CoverExpr, MinimizeError> {
    if tt.vars() > MAX_EXACT_VARS {
        return Err(MinimizeError::TooManyVariables(tt.vars()));
    }
    let rows: Vec<u32> = tt.rows_with(TtValue::One).collect();
    if rows.is_empty() {
        return Ok(CoverExpr::default());
    }
    let primes = prime_implicants(tt);
    let candidates: Vec<Vec<usize>> = rows
        .iter()
        .map(|&r| (0..primes.len()).filter(|&p| primes[p].contains(r)).collect())
        .collect();

    // Essential primes belong to every cover.
    let mut chosen: Vec<usize> = Vec::new();
    for c in &candidates {
        if c.len() == 1 && !chosen.contains(&c[0]) {
            chosen.push(c[0]);
        }
    }
    let mut covered: Vec<u32> = rows
        .iter()
        .map(|&r| chosen.iter().filter(|&&p| primes[p].contains(r)).count() as u32)
        .collect();

    let mut search = Search {
        primes: &primes,
        candidates,
        rows,
        best: None,
    };
    search.run(&mut chosen, &mut covered);
    let (_, picked) = search.best.expect("primes cover every on-set row");
    let mut terms: Vec<Cube> = picked.into_iter().map(|p| primes[p]).collect();
    terms.sort_by_key(term_key);
    Ok(CoverExpr { terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use TtValue::*;

    fn table(vars: usize, ones: &[u32], dcs: &[u32]) -> TruthTable {
        TruthTable::from_fn(vars, |r| {
            if ones.contains(&r) {
                One
            } else if dcs.contains(&r) {
                DontCare
            } else {
                Zero
            }
        })
    }

    #[test]
    fn constant_one_is_single_empty_term() {
        let c = minimize(&table(2, &[0, 1, 2, 3], &[])).unwrap();
        assert_eq!(c.terms, vec![Cube { care: 0, value: 0 }]);
    }

    #[test]
    fn constant_zero_is_empty() {
        assert!(minimize(&table(3, &[], &[1])).unwrap().terms.is_empty());
    }

    #[test]
    fn single_minterm() {
        let c = minimize(&table(2, &[3], &[])).unwrap();
        assert_eq!(c.terms, vec![Cube::from_literals(&[(0, true), (1, true)])]);
    }

    #[test]
    fn classic_example_with_dont_cares() {
        // f(a,b,c,d) = Σm(4,8,10,11,12,15) + d(9,14): minimum is 3 terms.
        let tt = table(4, &[4, 8, 10, 11, 12, 15], &[9, 14]);
        let c = minimize(&tt).unwrap();
        assert!(c.matches(&tt));
        assert_eq!(c.cost(), (3, 7));
    }

    #[test]
    fn cyclic_core_needs_search() {
        // Σm(0,1,2,5,6,7) over 3 variables has no essential primes.
        let tt = table(3, &[0, 1, 2, 5, 6, 7], &[]);
        let c = minimize(&tt).unwrap();
        assert!(c.matches(&tt));
        assert_eq!(c.cost(), (3, 6));
        assert_eq!(minimize(&tt).unwrap(), c);
    }

    #[test]
    fn too_many_variables() {
        let tt = TruthTable::from_fn(11, |_| Zero);
        assert_eq!(minimize(&tt), Err(MinimizeError::TooManyVariables(11)));
    }
}
