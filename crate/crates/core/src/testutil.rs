//! Shared fixtures for the unit-test suites.

use crate::immersion::{term, BaseSpace, ChartPolynomial, Immersion};

/// A non-flat control immersion: two coordinate lines traversed at different
/// speeds, giving a surface in `Gr_2(C^4)` whose pulled-back quotient bundle
/// is not projectively flat and whose ambient curvature has a genuinely
/// nonzero normal component.  Plane spanned by `(1, z, 0, 0)` and
/// `(0, 0, 1, 2z)`.
pub(crate) fn skew_speed_surface() -> Immersion {
    let entries = vec![
        vec![term(1.0, 0.0, vec![0])], // (0,0): 1
        vec![],
        vec![term(1.0, 0.0, vec![1])], // (1,0): z
        vec![],
        vec![],
        vec![term(1.0, 0.0, vec![0])], // (2,1): 1
        vec![],
        vec![term(2.0, 0.0, vec![1])], // (3,1): 2z
    ];
    let poly = ChartPolynomial::new(4, 2, 1, entries).unwrap();
    Immersion::new("skew_speed_surface", BaseSpace::dense(1), vec![poly], None).unwrap()
}
