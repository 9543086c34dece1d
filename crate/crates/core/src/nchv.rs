//! Noncontextual hidden-variable engine.
//!
//! A noncontextual model assigns every one of the six observables a fixed
//! value in {−1, +1}, independently of which compatible observables are
//! comeasured. With six observables there are exactly 2⁶ = 64 assignments,
//! so classical bounds are computed by exhaustive enumeration — the
//! enumeration itself is the oracle.

use crate::contexts::Context;
use crate::hilbert::PmLabel;
use serde::{Deserialize, Serialize};

/// A ±1 value for each of the six observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    values: [i8; 6],
}

impl Assignment {
    /// Assignment from a 6-bit pattern: bit `i` set means `PmLabel::ALL[i]`
    /// is assigned +1, cleared means −1.
    pub fn from_bits(bits: u8) -> Self {
        let mut values = [0i8; 6];
        for (i, v) in values.iter_mut().enumerate() {
            *v = if bits >> i & 1 == 1 { 1 } else { -1 };
        }
        Self { values }
    }

    /// Assignment from a per-label rule; the rule must return ±1.
    pub fn from_fn(f: impl Fn(PmLabel) -> i8) -> Self {
        let mut values = [0i8; 6];
        for (i, label) in PmLabel::ALL.iter().enumerate() {
            let v = f(*label);
            assert!(v == 1 || v == -1, "assignment values must be ±1");
            values[i] = v;
        }
        Self { values }
    }

    pub fn get(&self, label: PmLabel) -> i8 {
        self.values[label.index()]
    }

    /// Global sign flip of all six values.
    pub fn flipped(&self) -> Self {
        let mut values = self.values;
        for v in values.iter_mut() {
            *v = -*v;
        }
        Self { values }
    }

    /// Product of the assigned values over an observable list.
    pub fn product(&self, observables: &[PmLabel]) -> i8 {
        observables.iter().map(|l| self.get(*l)).product()
    }

    /// Whether the assignment reproduces the context's predicted product.
    pub fn satisfies(&self, ctx: &Context) -> bool {
        self.product(ctx.observables()) == ctx.predicted_product()
    }
}

/// All 64 assignments in ascending bit-pattern order.
pub fn enumerate_assignments() -> Vec<Assignment> {
    (0u8..64).map(Assignment::from_bits).collect()
}

/// One term of a linear combination of context products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressionTerm {
    pub coefficient: f64,
    pub observables: Vec<PmLabel>,
}

/// A linear combination of products of assigned values plus a constant,
/// e.g. the left-hand side of a noncontextuality inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearExpression {
    pub terms: Vec<ExpressionTerm>,
    #[serde(default)]
    pub constant: f64,
}

impl LinearExpression {
    /// Value of the expression under a definite assignment.
    pub fn value_under(&self, assignment: &Assignment) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|t| t.coefficient * f64::from(assignment.product(&t.observables)))
                .sum::<f64>()
    }

    pub fn from_combination(terms: &[(f64, Context)]) -> Self {
        Self {
            terms: terms
                .iter()
                .map(|(coefficient, ctx)| ExpressionTerm {
                    coefficient: *coefficient,
                    observables: ctx.observables().to_vec(),
                })
                .collect(),
            constant: 0.0,
        }
    }
}

/// The five-term inequality expression (noncontextual bound 3).
pub fn inequality3_expression() -> LinearExpression {
    LinearExpression::from_combination(&crate::contexts::inequality3_combination())
}

/// The three-term inequality expression (noncontextual bound 1).
///
/// A hidden-variable model that reproduces the two state-independent
/// sequential predictions must assign them the value +1, so those contexts
/// enter the measured three-term combination as the constant −2: over six
/// freely assigned labels the three products alone would reach 3, and the
/// bound of 1 is carried entirely by the forced identity contexts.
pub fn inequality4_expression() -> LinearExpression {
    let mut expr = LinearExpression::from_combination(&crate::contexts::inequality3_combination());
    expr.constant = -2.0;
    expr
}

/// Maximum of the expression over all 64 assignments.
pub fn classical_bound(expr: &LinearExpression) -> f64 {
    enumerate_assignments()
        .iter()
        .map(|a| expr.value_under(a))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Result of the exhaustive search for assignments satisfying the five
/// context constraints simultaneously.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsReport {
    /// Largest number of the five constraints any single assignment meets.
    pub max_satisfiable: usize,
    /// One assignment attaining the maximum.
    pub witness: Assignment,
}

/// Brute-force check of the value-assignment contradiction: no assignment
/// satisfies all five constraints, and the best possible satisfies four.
pub fn ks_contradiction() -> KsReport {
    let contexts = crate::contexts::peres_mermin_contexts();
    let mut best = 0usize;
    let mut witness = Assignment::from_bits(0);
    for assignment in enumerate_assignments() {
        let satisfied = contexts.iter().filter(|c| assignment.satisfies(c)).count();
        if satisfied > best {
            best = satisfied;
            witness = assignment;
        }
    }
    KsReport {
        max_satisfiable: best,
        witness,
    }
}

/// Verifies, by counting label occurrences, that every observable appears an
/// even number of times across the given contexts. When that holds, the
/// product of all context values is +1 under any assignment, while the
/// product of the predictions may still be −1 — the parity contradiction.
pub fn bound_check_parity(contexts: &[Context]) -> bool {
    PmLabel::ALL.iter().all(|label| {
        let count: usize = contexts
            .iter()
            .map(|c| c.observables().iter().filter(|l| *l == label).count())
            .sum();
        count.is_multiple_of(2)
    })
}
