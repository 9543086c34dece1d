//! The five measurement contexts of the noncontextuality test.
//!
//! A context is an ordered set of mutually commuting dichotomic observables
//! that are measured together in one experimental run. Sequential (Lüders)
//! measurement of a context is evaluated exactly by enumerating the joint
//! eigenprojectors; for commuting ±1-valued observables this reproduces the
//! expectation of the literal operator product, and both routes are computed
//! and compared on every call.

use crate::hilbert::{commutator, Mat4, PmLabel, QuantumState, TOL_INPUT, TOL_NUMERIC};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContextsError {
    #[error("context must contain 2 or 3 observables, got {0}")]
    WrongArity(usize),
    #[error("predicted product must be -1 or +1, got {0}")]
    BadPrediction(i8),
    #[error("observables {a} and {b} do not commute (norm {norm:.3e})")]
    NonCommuting { a: PmLabel, b: PmLabel, norm: f64 },
}

/// An ordered list of comeasurable observables together with the product
/// value predicted for the entangled state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    observables: Vec<PmLabel>,
    predicted_product: i8,
}

impl Context {
    pub fn new(observables: Vec<PmLabel>, predicted_product: i8) -> Result<Self, ContextsError> {
        if observables.len() < 2 || observables.len() > 3 {
            return Err(ContextsError::WrongArity(observables.len()));
        }
        if predicted_product != -1 && predicted_product != 1 {
            return Err(ContextsError::BadPrediction(predicted_product));
        }
        for (i, a) in observables.iter().enumerate() {
            for b in observables.iter().skip(i + 1) {
                let norm = commutator(&a.matrix(), &b.matrix()).frobenius_norm();
                if norm > TOL_INPUT {
                    return Err(ContextsError::NonCommuting { a: *a, b: *b, norm });
                }
            }
        }
        Ok(Self {
            observables,
            predicted_product,
        })
    }

    pub fn observables(&self) -> &[PmLabel] {
        &self.observables
    }

    pub fn predicted_product(&self) -> i8 {
        self.predicted_product
    }

    /// Human-readable name, e.g. `sxpy·sx·py`.
    pub fn name(&self) -> String {
        self.observables
            .iter()
            .map(|l| l.as_str())
            .collect::<Vec<_>>()
            .join("·")
    }

    /// The literal matrix product of the member observables, in list order.
    pub fn product_matrix(&self) -> Mat4 {
        self.observables
            .iter()
            .fold(Mat4::identity(), |acc, l| acc.mul(&l.matrix()))
    }
}

/// The five contexts, in fixed order: the two correlation pairs, the two
/// identity-valued sequential triples, and the product pair.
pub fn peres_mermin_contexts() -> Vec<Context> {
    use PmLabel::*;
    let table: [(&[PmLabel], i8); 5] = [
        (&[SpinX, PathX], -1),
        (&[SpinY, PathY], -1),
        (&[SpinXPathY, SpinX, PathY], 1),
        (&[SpinYPathX, SpinY, PathX], 1),
        (&[SpinXPathY, SpinYPathX], -1),
    ];
    table
        .into_iter()
        .map(|(labels, predicted)| {
            Context::new(labels.to_vec(), predicted).expect("built-in contexts commute")
        })
        .collect()
}

/// One joint outcome of measuring a context in sequence: a ±1 result per
/// observable and the probability of that tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialOutcome {
    pub results: Vec<i8>,
    pub probability: f64,
}

impl SequentialOutcome {
    /// Product of the individual results.
    pub fn product(&self) -> i8 {
        self.results.iter().product()
    }
}

/// Full outcome distribution of a Lüders chain over the context, obtained
/// from the joint eigenprojectors Π_s = ∏ (1 + sᵢ Oᵢ)/2.
pub fn sequential_outcomes<S: QuantumState>(
    ctx: &Context,
    state: &S,
) -> Result<Vec<SequentialOutcome>, ContextsError> {
    let mats: Vec<Mat4> = ctx.observables().iter().map(|l| l.matrix()).collect();
    let k = mats.len();
    let half = num_complex::Complex64::new(0.5, 0.0);
    let mut outcomes = Vec::with_capacity(1 << k);
    for bits in 0..(1u32 << k) {
        let signs: Vec<i8> = (0..k)
            .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
            .collect();
        let mut proj = Mat4::identity();
        for (sign, m) in signs.iter().zip(mats.iter()) {
            let signed = if *sign == 1 {
                Mat4::identity().add(m)
            } else {
                Mat4::identity().sub(m)
            };
            proj = proj.mul(&signed.scale(half));
        }
        let p = state.expectation_of(&proj);
        debug_assert!(p.im.abs() < TOL_NUMERIC);
        outcomes.push(SequentialOutcome {
            results: signs,
            probability: p.re.max(0.0),
        });
    }
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    assert!(
        (total - 1.0).abs() < TOL_NUMERIC,
        "outcome probabilities sum to {total}"
    );
    Ok(outcomes)
}

/// Expectation of the product of outcomes under sequential measurement.
///
/// Evaluated through the joint eigenbasis and cross-checked against the
/// expectation of the literal operator product; the two routes must agree
/// within [`TOL_NUMERIC`].
pub fn sequential_expectation<S: QuantumState>(
    ctx: &Context,
    state: &S,
) -> Result<f64, ContextsError> {
    let outcomes = sequential_outcomes(ctx, state)?;
    let luders: f64 = outcomes
        .iter()
        .map(|o| f64::from(o.product()) * o.probability)
        .sum();
    let direct = state.expectation_of(&ctx.product_matrix());
    debug_assert!(direct.im.abs() < TOL_NUMERIC);
    assert!(
        (luders - direct.re).abs() < TOL_NUMERIC,
        "eigenbasis route {luders} disagrees with operator product {}",
        direct.re
    );
    Ok(luders)
}

/// Coefficients of the five-context inequality whose noncontextual bound
/// is 3: the sign of each term matches the predicted product, so the
/// entangled state saturates the quantum value 5.
pub fn inequality3_combination() -> Vec<(f64, Context)> {
    peres_mermin_contexts()
        .into_iter()
        .map(|ctx| (f64::from(ctx.predicted_product()), ctx))
        .collect()
}

/// Coefficients of the three-term inequality whose noncontextual bound
/// is 1 (quantum value 3): the two identity-valued contexts are dropped.
pub fn inequality4_combination() -> Vec<(f64, Context)> {
    let contexts = peres_mermin_contexts();
    [0usize, 1, 4]
        .into_iter()
        .map(|i| {
            let ctx = contexts[i].clone();
            (f64::from(ctx.predicted_product()), ctx)
        })
        .collect()
}

fn combination_value<S: QuantumState>(terms: &[(f64, Context)], state: &S) -> f64 {
    terms
        .iter()
        .map(|(coeff, ctx)| {
            coeff
                * sequential_expectation(ctx, state)
                    .expect("built-in contexts commute")
        })
        .sum()
}

/// Quantum value of the five-term inequality (noncontextual bound 3).
pub fn inequality3_quantum<S: QuantumState>(state: &S) -> f64 {
    combination_value(&inequality3_combination(), state)
}

/// Quantum value of the three-term inequality (noncontextual bound 1).
pub fn inequality4_quantum<S: QuantumState>(state: &S) -> f64 {
    combination_value(&inequality4_combination(), state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{
        entangled_state, Arm, DensityState, PureState, Spin, State, TOL_ALGEBRA,
    };
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn predicted_products_multiply_to_minus_one() {
        let product: i8 = peres_mermin_contexts()
            .iter()
            .map(|c| c.predicted_product())
            .product();
        assert_eq!(product, -1);
    }

    #[test]
    fn each_label_appears_exactly_twice() {
        let contexts = peres_mermin_contexts();
        for label in PmLabel::ALL {
            let count: usize = contexts
                .iter()
                .map(|c| c.observables().iter().filter(|l| **l == label).count())
                .sum();
            assert_eq!(count, 2, "{label}");
        }
    }

    #[test]
    fn members_commute_within_each_context() {
        for ctx in peres_mermin_contexts() {
            let obs = ctx.observables();
            for (i, a) in obs.iter().enumerate() {
                for b in obs.iter().skip(i + 1) {
                    let norm = commutator(&a.matrix(), &b.matrix()).frobenius_norm();
                    assert!(norm < TOL_ALGEBRA, "{a} vs {b}: {norm}");
                }
            }
        }
    }

    #[test]
    fn non_commuting_context_rejected() {
        let err = Context::new(vec![PmLabel::SpinX, PmLabel::SpinY], 1).unwrap_err();
        assert!(matches!(err, ContextsError::NonCommuting { .. }));
    }

    #[test]
    fn entangled_state_satisfies_all_five_predictions() {
        let psi = entangled_state();
        for ctx in peres_mermin_contexts() {
            let value = sequential_expectation(&ctx, &psi).unwrap();
            assert_abs_diff_eq!(
                value,
                f64::from(ctx.predicted_product()),
                epsilon = TOL_NUMERIC
            );
        }
    }

    #[test]
    fn sequential_triples_are_identity_valued() {
        // The two three-observable contexts multiply out to the identity,
        // so their sequential expectation is +1 on any state.
        let contexts = peres_mermin_contexts();
        for idx in [2usize, 3] {
            let prod = contexts[idx].product_matrix();
            assert!(prod.max_abs_diff(&Mat4::identity()) < TOL_ALGEBRA);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..100 {
            let state = PureState::random(&mut rng);
            for idx in [2usize, 3] {
                let v = sequential_expectation(&contexts[idx], &state).unwrap();
                assert_abs_diff_eq!(v, 1.0, epsilon = TOL_NUMERIC);
            }
        }
    }

    #[test]
    fn sequential_matches_operator_product_on_random_states() {
        let contexts = peres_mermin_contexts();
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        for trial in 0..50 {
            let state: State = if trial % 2 == 0 {
                PureState::random(&mut rng).into()
            } else {
                DensityState::random_mixed(&mut rng, 3).into()
            };
            for ctx in &contexts {
                let luders = sequential_expectation(ctx, &state).unwrap();
                let direct = state.expectation_of(&ctx.product_matrix()).re;
                assert_abs_diff_eq!(luders, direct, epsilon = TOL_NUMERIC);
            }
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let psi = entangled_state();
        for ctx in peres_mermin_contexts() {
            let outcomes = sequential_outcomes(&ctx, &psi).unwrap();
            assert_eq!(outcomes.len(), 1 << ctx.observables().len());
            let total: f64 = outcomes.iter().map(|o| o.probability).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = TOL_NUMERIC);
            for o in &outcomes {
                assert!((0.0..=1.0 + TOL_NUMERIC).contains(&o.probability));
            }
        }
    }

    #[test]
    fn inequality_values_on_reference_states() {
        let psi = entangled_state();
        assert_abs_diff_eq!(inequality3_quantum(&psi), 5.0, epsilon = TOL_NUMERIC);
        assert_abs_diff_eq!(inequality4_quantum(&psi), 3.0, epsilon = TOL_NUMERIC);

        let mixed = DensityState::maximally_mixed();
        assert_abs_diff_eq!(inequality3_quantum(&mixed), 2.0, epsilon = TOL_NUMERIC);
        assert_abs_diff_eq!(inequality4_quantum(&mixed), 0.0, epsilon = TOL_NUMERIC);

        let up_i = PureState::basis(Spin::Up, Arm::I);
        assert_abs_diff_eq!(inequality3_quantum(&up_i), 1.0, epsilon = TOL_NUMERIC);
        assert_abs_diff_eq!(inequality4_quantum(&up_i), -1.0, epsilon = TOL_NUMERIC);
    }

    #[test]
    fn inequalities_differ_by_the_two_identity_terms() {
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        for trial in 0..40 {
            let state: State = if trial % 2 == 0 {
                PureState::random(&mut rng).into()
            } else {
                DensityState::random_mixed(&mut rng, 2).into()
            };
            let v3 = inequality3_quantum(&state);
            let v4 = inequality4_quantum(&state);
            assert_abs_diff_eq!(v3, v4 + 2.0, epsilon = TOL_NUMERIC);
        }
    }

    #[test]
    fn entangled_state_maximizes_among_samples() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..100 {
            let state = PureState::random(&mut rng);
            assert!(inequality3_quantum(&state) <= 5.0 + TOL_NUMERIC);
            assert!(inequality4_quantum(&state) <= 3.0 + TOL_NUMERIC);
        }
    }
}
