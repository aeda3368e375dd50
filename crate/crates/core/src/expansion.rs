//! Digits to points (π_ω) and points to digits, with the uniqueness trichotomy.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gls::{ffi_with_depth, Digit, Family, Ffi, GlsSystem, Location, Orientation, DEFAULT_EXACT_DEPTH};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    Depth(usize),
    /// Stop at the first depth whose FFI length is at most δ.
    Tolerance(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub point: f64,
    pub error_bound: f64,
    pub ffi: Ffi,
}

/// Midpoint of ⟨b_1 ⋯ b_n⟩_ω with error bound half its length.
pub fn project(
    family: &Family,
    omega: &[usize],
    digits: impl IntoIterator<Item = Digit>,
    target: Target,
) -> Result<Projection> {
    let mut word = Vec::new();
    let mut log_length = 0.0;
    let mut stream = digits.into_iter();
    let done = |len: usize, log_length: f64| match target {
        Target::Depth(n) => len >= n,
        Target::Tolerance(delta) => log_length <= delta.ln(),
    };
    if let Target::Tolerance(delta) = target {
        if delta.is_nan() || delta <= 0.0 {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {delta}")));
        }
    }
    while !done(word.len(), log_length) {
        let b = stream.next().ok_or(Error::StreamEnded(word.len()))?;
        let s = *omega.get(word.len()).ok_or(Error::OmegaTooShort { have: omega.len(), need: word.len() + 1 })?;
        family.check_symbol(s)?;
        family.system(s).check_digit(b)?;
        log_length -= family.system(s).log_n(b);
        word.push(b);
    }
    let ffi = ffi_with_depth(family, omega, &word, DEFAULT_EXACT_DEPTH)?;
    Ok(Projection { point: ffi.midpoint(), error_bound: 0.5 * ffi.length(), ffi })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub exact: Option<Rational>,
}

/// Σ_n (−1)^{ε_1+⋯+ε_{n−1}} a_{ω_n,b_n} / Π_{k≤n} N_{ω_k,b_k}.
pub fn series_expansion(family: &Family, omega: &[usize], word: &[Digit]) -> Result<SeriesValue> {
    family.check_word(omega, word)?;
    let systems: Vec<&GlsSystem> = omega[..word.len()].iter().map(|&s| family.system(s)).collect();

    let mut value = 0.0;
    let mut log_scale = 0.0;
    let mut sign = 1.0;
    for (sys, &b) in systems.iter().zip(word) {
        log_scale -= sys.log_n(b);
        let (l, r) = sys.image(b);
        let a_over_n = match sys.orientation(b) {
            Orientation::Increasing => l,
            Orientation::Decreasing => r,
        };
        // a/N = f(0); the remaining 1/Π N of earlier levels is exp(log_scale + log N_b)
        value += sign * a_over_n * (log_scale + sys.log_n(b)).exp();
        if sys.orientation(b) == Orientation::Decreasing {
            sign = -sign;
        }
    }

    let exact = (|| {
        let mut total = Rational::zero();
        let mut scale = Rational::one();
        let mut negative = false;
        for (sys, &b) in systems.iter().zip(word) {
            let a = sys.offset_exact(b)?;
            let n = sys.ratio_exact(b)?;
            scale /= n;
            let term = a * &scale;
            if negative {
                total -= term;
            } else {
                total += term;
            }
            if sys.orientation(b) == Orientation::Decreasing {
                negative = !negative;
            }
        }
        Some(total)
    })();
    let value = exact.as_ref().map_or(value, rational::to_f64);
    Ok(SeriesValue { value, exact })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classification {
    Unique,
    /// Two expansions survive; the returned word is the left one.
    Boundary {
        alternative: Vec<Digit>,
    },
    /// Outside every admissible interval at `depth`.
    NoExpansion {
        depth: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub word: Vec<Digit>,
    pub classification: Classification,
}

#[derive(Clone, Debug)]
enum Coord {
    Exact(Rational),
    Float(f64),
}

#[derive(Clone, Debug)]
struct Branch {
    word: Vec<Digit>,
    y: Coord,
}

fn pull_back(sys: &GlsSystem, b: Digit, y: &Coord) -> Coord {
    if let Coord::Exact(y) = y {
        if let Some((l, r)) = sys.image_exact(b) {
            let len = &r - &l;
            return Coord::Exact(match sys.orientation(b) {
                Orientation::Increasing => (y - l) / len,
                Orientation::Decreasing => (r - y) / len,
            });
        }
    }
    let yf = match y {
        Coord::Exact(y) => rational::to_f64(y),
        Coord::Float(y) => *y,
    };
    let (l, r) = sys.image(b);
    let len = sys.length(b);
    let z = match sys.orientation(b) {
        Orientation::Increasing => (yf - l) / len,
        Orientation::Decreasing => (r - yf) / len,
    };
    Coord::Float(z.clamp(0.0, 1.0))
}

fn locate(sys: &GlsSystem, y: &Coord) -> Location {
    match y {
        Coord::Exact(y) => sys.locate_exact(y).unwrap_or_else(|| sys.locate(rational::to_f64(y))),
        Coord::Float(y) => sys.locate(*y),
    }
}

/// Greedy digit extraction for `x` along ω to depth `n`. At a shared
/// endpoint both continuations are followed; the left FFI is canonical.
pub fn digits_of(family: &Family, omega: &[usize], x: &Rational, n: usize) -> Result<Expansion> {
    if !rational::in_unit_interval(x) {
        return Err(Error::PointOutOfRange(rational::format(x)));
    }
    if omega.len() < n {
        return Err(Error::OmegaTooShort { have: omega.len(), need: n });
    }
    let mut branches = vec![Branch { word: Vec::with_capacity(n), y: Coord::Exact(x.clone()) }];
    for (level, &s) in omega[..n].iter().enumerate() {
        family.check_symbol(s)?;
        let sys = family.system(s);
        let mut next = Vec::with_capacity(2);
        for br in &branches {
            match locate(sys, &br.y) {
                Location::Inside(b) => next.push(extend(sys, br, b)),
                Location::Shared { left, right } => {
                    next.push(extend(sys, br, left));
                    next.push(extend(sys, br, right));
                }
                Location::Outside => {}
            }
        }
        if next.is_empty() {
            return Ok(Expansion {
                word: branches.swap_remove(0).word,
                classification: Classification::NoExpansion { depth: level + 1 },
            });
        }
        next.truncate(2);
        branches = next;
    }
    let mut iter = branches.into_iter();
    let first = iter.next().expect("at least one branch survives");
    let classification = match iter.next() {
        Some(second) => Classification::Boundary { alternative: second.word },
        None => Classification::Unique,
    };
    Ok(Expansion { word: first.word, classification })
}

fn extend(sys: &GlsSystem, br: &Branch, b: Digit) -> Branch {
    let mut word = br.word.clone();
    word.push(b);
    Branch { word, y: pull_back(sys, b, &br.y) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Roundtrip {
    pub word: Vec<Digit>,
    pub classification: Classification,
    pub residual: f64,
    pub ffi_length: f64,
    pub passed: bool,
}

/// |project(digits_of(x, n), n) − x| against the depth-n FFI length.
/// Boundary points are accepted: the canonical FFI still contains x.
pub fn roundtrip_check(family: &Family, omega: &[usize], x: &Rational, n: usize) -> Result<Roundtrip> {
    let expansion = digits_of(family, omega, x, n)?;
    if let Classification::NoExpansion { depth } = expansion.classification {
        return Err(Error::NoExpansion(depth));
    }
    let projection = project(family, omega, expansion.word.iter().copied(), Target::Depth(n))?;
    let ffi = &projection.ffi;
    let (residual, passed) = match &ffi.exact {
        Some((l, r)) => {
            let mid = (l + r) / rational::int(2);
            let diff = (mid - x).abs();
            (rational::to_f64(&diff), diff <= r - l)
        }
        None => {
            let diff = (projection.point - rational::to_f64(x)).abs();
            (diff, diff <= ffi.length() + 4.0 * f64::EPSILON)
        }
    };
    Ok(Roundtrip {
        word: expansion.word,
        classification: expansion.classification,
        residual,
        ffi_length: ffi.length(),
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gls::{OmegaRule, Symbol};
    use crate::rational::frac;

    fn luroth() -> Family {
        Family::singleton(GlsSystem::luroth(Symbol::new("L")))
    }

    #[test]
    fn luroth_zero_has_no_expansion() {
        let f = luroth();
        let e = digits_of(&f, &[0; 4], &Rational::zero(), 4).unwrap();
        assert_eq!(e.classification, Classification::NoExpansion { depth: 1 });
    }

    #[test]
    fn luroth_two_fifths_is_fixed_by_digit_two() {
        let f = luroth();
        let e = digits_of(&f, &[0; 6], &frac(2, 5), 6).unwrap();
        assert_eq!(e.word, vec![2; 6]);
        assert_eq!(e.classification, Classification::Unique);
    }

    #[test]
    fn binary_half_is_boundary() {
        let f = Family::singleton(GlsSystem::binary(Symbol::new("B")));
        let e = digits_of(&f, &[0; 5], &frac(1, 2), 5).unwrap();
        assert_eq!(e.word, vec![1, 2, 2, 2, 2]);
        assert_eq!(e.classification, Classification::Boundary { alternative: vec![2, 1, 1, 1, 1] });
    }

    #[test]
    fn luroth_half_keeps_only_the_surviving_branch() {
        // 1/2 is shared by digits 2 (left) and 1 (right); the right branch
        // continues from 0, which Lüroth cannot expand.
        let f = luroth();
        let e = digits_of(&f, &[0; 4], &frac(1, 2), 4).unwrap();
        assert_eq!(e.word, vec![2, 1, 1, 1]);
        assert_eq!(e.classification, Classification::Unique);
    }

    #[test]
    fn projection_cases() {
        let f = luroth();
        let p = project(&f, &[0; 64], std::iter::repeat(1), Target::Tolerance(1e-12)).unwrap();
        assert!((p.point - 1.0).abs() <= p.error_bound);
        let p0 = project(&f, &[], std::iter::empty(), Target::Depth(0)).unwrap();
        assert_eq!((p0.point, p0.error_bound), (0.5, 0.5));
        let err = project(&f, &[0; 4], [1, 2], Target::Depth(3)).unwrap_err();
        assert_eq!(err, Error::StreamEnded(2));
    }

    #[test]
    fn binary_alternating_projects_to_two_thirds() {
        let f = Family::singleton(GlsSystem::binary(Symbol::new("B")));
        let p = project(&f, &[0; 40], [2, 1].into_iter().cycle(), Target::Depth(40)).unwrap();
        assert!((p.point - 2.0 / 3.0).abs() <= 2f64.powi(-40));
    }

    #[test]
    fn luroth_series_matches_displayed_formula() {
        let f = luroth();
        let word = [3, 1, 4, 1, 5];
        let mut expected = Rational::zero();
        let mut denom = Rational::one();
        for &b in &word {
            denom *= rational::int((b * (b + 1)) as i64);
            expected += rational::int(b as i64) / &denom;
        }
        let s = series_expansion(&f, &[0; 5], &word).unwrap();
        assert_eq!(s.exact, Some(expected));
    }

    #[test]
    fn mixed_family_word() {
        let f = Family::new(vec![GlsSystem::binary(Symbol::new("B")), GlsSystem::luroth(Symbol::new("L"))]).unwrap();
        let omega = OmegaRule::periodic(vec![0, 1]).prefix(2);
        let e = crate::gls::ffi(&f, &omega, &[2, 1]).unwrap();
        assert_eq!(e.exact, Some((frac(3, 4), frac(1, 1))));
        assert!((e.log_length - (0.25f64).ln()).abs() < 1e-15);
    }
}
