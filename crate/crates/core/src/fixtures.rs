//! The four regression substitutions and their closed-form Perron–Frobenius data.

use num_rational::BigRational;

use crate::alphabet::{Letter, LetterInterval};
use crate::scalar::{pow2, ratio, Eigenpair, Scalar};
use crate::subst::Substitution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fixture {
    /// `−1 ↦ (−2,−1,0)`, `0 ↦ (−1,0,1)`, `n ↦ (n−1)(n+1)(n+1)` for `n ≤ −2`,
    /// `n ↦ (n−1)(n−1)(n+1)` for `n ≥ 1`.
    ForwardBack,
    /// The square of [`Fixture::ForwardBack`] carried to 2ℤ; nine-letter images.
    ForwardBackSquared,
    /// `n ↦ (n−1)(n+1)` on ℤ.
    RandomWalk,
    /// `n ↦ (n−2) n n (n+2)` on 2ℤ.
    DrunkenMan,
}

impl Fixture {
    pub const ALL: [Fixture; 4] = [
        Fixture::ForwardBack,
        Fixture::ForwardBackSquared,
        Fixture::RandomWalk,
        Fixture::DrunkenMan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::ForwardBack => "forward-back",
            Fixture::ForwardBackSquared => "forward-back-squared",
            Fixture::RandomWalk => "random-walk",
            Fixture::DrunkenMan => "drunken-man",
        }
    }

    pub fn from_name(name: &str) -> Option<Fixture> {
        Fixture::ALL.into_iter().find(|f| f.name() == name)
    }

    /// The TOML definition shipped in `fixtures/`.
    pub fn source(self) -> &'static str {
        match self {
            Fixture::ForwardBack => include_str!("../../../fixtures/forward-back.toml"),
            Fixture::ForwardBackSquared => {
                include_str!("../../../fixtures/forward-back-squared.toml")
            }
            Fixture::RandomWalk => include_str!("../../../fixtures/random-walk.toml"),
            Fixture::DrunkenMan => include_str!("../../../fixtures/drunken-man.toml"),
        }
    }

    pub fn substitution(self) -> Substitution {
        Substitution::from_toml(self.source()).expect("shipped fixtures are valid")
    }

    pub fn lambda(self) -> BigRational {
        match self {
            Fixture::ForwardBack => ratio(3, 1),
            Fixture::ForwardBackSquared => ratio(9, 1),
            Fixture::RandomWalk => ratio(2, 1),
            Fixture::DrunkenMan => ratio(4, 1),
        }
    }

    /// Closed-form left eigenvector entry, in the customary scaling (the two
    /// central entries equal 1, resp. 1/3, for the summable fixtures).
    pub fn left(self, a: Letter) -> BigRational {
        match self {
            Fixture::ForwardBack => {
                if a >= 0 {
                    pow2(-a)
                } else {
                    pow2(a + 1)
                }
            }
            Fixture::ForwardBackSquared => {
                let k = a / 2;
                if a == 0 || a == -2 {
                    ratio(1, 3)
                } else if a > 0 {
                    pow2(-2 * k)
                } else {
                    pow2(2 * (k + 1))
                }
            }
            Fixture::RandomWalk => ratio(1, 2),
            Fixture::DrunkenMan => ratio(1, 1),
        }
    }

    pub fn right(self, _a: Letter) -> BigRational {
        match self {
            Fixture::RandomWalk => ratio(1, 2),
            _ => ratio(1, 1),
        }
    }

    /// Σ_v ℓ_v over the whole alphabet, when finite.
    pub fn left_total(self) -> Option<BigRational> {
        match self {
            Fixture::ForwardBack => Some(ratio(4, 1)),
            Fixture::ForwardBackSquared => Some(ratio(4, 3)),
            Fixture::RandomWalk | Fixture::DrunkenMan => None,
        }
    }

    /// Closed-form data restricted to the alphabet letters of `window`.
    pub fn eigenpair<T: Scalar>(self, window: LetterInterval) -> Eigenpair<T> {
        let al = self.substitution().alphabet();
        Eigenpair {
            lambda: T::from_rational(&self.lambda()),
            left: al
                .letters_in(window)
                .map(|a| (a, T::from_rational(&self.left(a))))
                .collect(),
            right: al
                .letters_in(window)
                .map(|a| (a, T::from_rational(&self.right(a))))
                .collect(),
        }
    }

    /// As [`Fixture::eigenpair`], with ℓ scaled to a probability vector when
    /// the total mass is finite.
    pub fn normalized_eigenpair<T: Scalar>(self, window: LetterInterval) -> Eigenpair<T> {
        let e = self.eigenpair::<BigRational>(window);
        let e = match self.left_total() {
            Some(total) => e.scale_left(&(ratio(1, 1) / total)),
            None => e,
        };
        e.map(|v| T::from_rational(v))
    }
}
