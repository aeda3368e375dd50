//! Single GLS systems, families, driving sequences and fibre fundamental intervals.
//!
//! A system keeps the digit index (ordered by contraction ratio) separate from
//! the layout that places each digit's image inside [0,1].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::special::{hurwitz_zeta, zeta};

pub type Digit = u64;

/// Largest geometric digit for which exact rational images are produced.
pub const EXACT_GEOMETRIC_DIGIT: Digit = 1 << 12;
pub const DEFAULT_EXACT_DEPTH: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Symbol(pub String);

impl Symbol {
    pub fn new(id: impl Into<String>) -> Self {
        Symbol(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

impl Orientation {
    /// ε ∈ {0, 1}.
    pub fn epsilon(self) -> u8 {
        match self {
            Orientation::Increasing => 0,
            Orientation::Decreasing => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Layout {
    /// Digit 1 starts at 0 and later digits follow to the right.
    Ascending,
    /// Digit 1 ends at 1 and later digits follow to the left (Lüroth placement).
    Descending,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrientationRule {
    Increasing,
    Decreasing,
    /// Odd digits increasing, even digits decreasing.
    Alternating,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParametricRule {
    Luroth,
    Power(f64),
    Geometric(Rational),
}

#[derive(Clone, Debug, PartialEq)]
enum Rule {
    Luroth,
    Power { p: f64, zeta_p: f64 },
    Geometric { r: Rational, r_f64: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub left: Rational,
    pub right: Rational,
    pub orientation: Orientation,
}

#[derive(Clone, Debug, PartialEq)]
struct FiniteBranches {
    branches: Vec<Branch>,
    /// Digit indices (0-based) sorted by left endpoint.
    by_left: Vec<usize>,
    log_n: Vec<f64>,
    images: Vec<(f64, f64)>,
    /// Lengths rounded once from the exact values, so equal lengths compare equal.
    lengths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Finite(FiniteBranches),
    Parametric { rule: Rule, layout: Layout, orientation: OrientationRule },
}

/// How log N_b grows with the digit b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogGrowth {
    Bounded,
    /// log N_b ~ c log b
    Logarithmic(f64),
    /// log N_b ~ c b
    Linear(f64),
}

/// Where a point sits relative to the level-1 images of a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside(Digit),
    /// The point is the right endpoint of `left`'s image and the left endpoint of `right`'s.
    Shared {
        left: Digit,
        right: Digit,
    },
    Outside,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlsSystem {
    symbol: Symbol,
    kind: Kind,
}

impl GlsSystem {
    /// Builds a finite system. Intervals are laid out left to right in input
    /// order; digit labels are then assigned by non-increasing length.
    pub fn finite(symbol: Symbol, entries: &[(Rational, Orientation)]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDigitSet);
        }
        let mut total = Rational::zero();
        for (i, (len, _)) in entries.iter().enumerate() {
            if !len.is_positive() {
                return Err(Error::NonPositiveLength(i));
            }
            total += len;
        }
        if !total.is_one() {
            return Err(Error::LengthSum(rational::format(&total)));
        }
        let mut placed = Vec::with_capacity(entries.len());
        let mut left = Rational::zero();
        for (len, orientation) in entries {
            let right = &left + len;
            placed.push(Branch { left: left.clone(), right: right.clone(), orientation: *orientation });
            left = right;
        }
        let mut order: Vec<usize> = (0..placed.len()).collect();
        order.sort_by(|&a, &b| {
            let la = &placed[a].right - &placed[a].left;
            let lb = &placed[b].right - &placed[b].left;
            lb.cmp(&la)
        });
        let branches = order.into_iter().map(|i| placed[i].clone()).collect();
        Ok(Self::from_branches(symbol, branches))
    }

    /// Builds a finite system from explicit images in digit order, without
    /// any partition checks. Use [`validate_partition`] to inspect it.
    pub fn from_intervals(symbol: Symbol, intervals: Vec<(Rational, Rational, Orientation)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::EmptyDigitSet);
        }
        let mut branches = Vec::with_capacity(intervals.len());
        for (i, (left, right, orientation)) in intervals.into_iter().enumerate() {
            if left.is_negative() || right > Rational::one() || left >= right {
                return Err(Error::InvalidParameter(format!(
                    "interval {i} [{}, {}] is not a non-degenerate subinterval of [0,1]",
                    rational::format(&left),
                    rational::format(&right)
                )));
            }
            branches.push(Branch { left, right, orientation });
        }
        Ok(Self::from_branches(symbol, branches))
    }

    fn from_branches(symbol: Symbol, branches: Vec<Branch>) -> Self {
        let mut by_left: Vec<usize> = (0..branches.len()).collect();
        by_left.sort_by(|&a, &b| branches[a].left.cmp(&branches[b].left));
        let log_n = branches.iter().map(|br| ln_rational(&(&br.right - &br.left)).abs()).collect();
        let images = branches.iter().map(|br| (rational::to_f64(&br.left), rational::to_f64(&br.right))).collect();
        let lengths = branches.iter().map(|br| rational::to_f64(&(&br.right - &br.left))).collect();
        GlsSystem { symbol, kind: Kind::Finite(FiniteBranches { branches, by_left, log_n, images, lengths }) }
    }

    pub fn parametric(
        symbol: Symbol,
        rule: ParametricRule,
        layout: Layout,
        orientation: OrientationRule,
    ) -> Result<Self> {
        let rule = match rule {
            ParametricRule::Luroth => Rule::Luroth,
            ParametricRule::Power(p) => {
                if !(p.is_finite() && p > 1.0) {
                    return Err(Error::InvalidParameter(format!("power rule needs p > 1, got {p}")));
                }
                Rule::Power { p, zeta_p: zeta(p) }
            }
            ParametricRule::Geometric(r) => {
                if !r.is_positive() || r >= Rational::one() {
                    return Err(Error::InvalidParameter(format!(
                        "geometric rule needs r in (0,1), got {}",
                        rational::format(&r)
                    )));
                }
                let r_f64 = rational::to_f64(&r);
                Rule::Geometric { r, r_f64 }
            }
        };
        Ok(GlsSystem { symbol, kind: Kind::Parametric { rule, layout, orientation } })
    }

    pub fn luroth(symbol: Symbol) -> Self {
        Self::parametric(symbol, ParametricRule::Luroth, Layout::Descending, OrientationRule::Increasing)
            .expect("luroth rule has no parameters")
    }

    pub fn binary(symbol: Symbol) -> Self {
        let half = rational::frac(1, 2);
        Self::finite(symbol, &[(half.clone(), Orientation::Increasing), (half, Orientation::Increasing)])
            .expect("binary lengths sum to one")
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    /// B_s, or `None` for a countably infinite digit set.
    pub fn digit_count(&self) -> Option<u64> {
        match &self.kind {
            Kind::Finite(f) => Some(f.branches.len() as u64),
            Kind::Parametric { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.digit_count().is_some()
    }

    pub fn has_digit(&self, b: Digit) -> bool {
        b >= 1 && self.digit_count().is_none_or(|n| b <= n)
    }

    pub fn check_digit(&self, b: Digit) -> Result<()> {
        if self.has_digit(b) {
            Ok(())
        } else {
            Err(Error::DigitOutOfRange { symbol: self.symbol.0.clone(), digit: b })
        }
    }

    /// Largest digit not exceeding `m`.
    pub fn cut(&self, m: u64) -> u64 {
        self.digit_count().map_or(m, |n| n.min(m))
    }

    pub fn rule_name(&self) -> &'static str {
        match &self.kind {
            Kind::Finite(_) => "finite",
            Kind::Parametric { rule: Rule::Luroth, .. } => "luroth",
            Kind::Parametric { rule: Rule::Power { .. }, .. } => "power",
            Kind::Parametric { rule: Rule::Geometric { .. }, .. } => "geometric",
        }
    }

    pub fn layout(&self) -> Option<Layout> {
        match &self.kind {
            Kind::Finite(_) => None,
            Kind::Parametric { layout, .. } => Some(*layout),
        }
    }

    pub fn branches(&self) -> Option<&[Branch]> {
        match &self.kind {
            Kind::Finite(f) => Some(&f.branches),
            Kind::Parametric { .. } => None,
        }
    }

    /// log N_b (natural log).
    pub fn log_n(&self, b: Digit) -> f64 {
        match &self.kind {
            Kind::Finite(f) => f.log_n[(b - 1) as usize],
            Kind::Parametric { rule, .. } => match rule {
                Rule::Luroth => {
                    let x = b as f64;
                    2.0 * x.ln() + (1.0 / x).ln_1p()
                }
                Rule::Power { p, zeta_p } => p * (b as f64).ln() + zeta_p.ln(),
                Rule::Geometric { r_f64, .. } => -(1.0 - r_f64).ln() - (b - 1) as f64 * r_f64.ln(),
            },
        }
    }

    /// |f_b([0,1])| = 1/N_b as a double.
    pub fn length(&self, b: Digit) -> f64 {
        match &self.kind {
            Kind::Finite(f) => f.lengths[(b - 1) as usize],
            Kind::Parametric { .. } => (-self.log_n(b)).exp(),
        }
    }

    pub fn length_exact(&self, b: Digit) -> Option<Rational> {
        match &self.kind {
            Kind::Finite(f) => {
                let br = &f.branches[(b - 1) as usize];
                Some(&br.right - &br.left)
            }
            Kind::Parametric { rule, .. } => match rule {
                Rule::Luroth => {
                    let k = BigInt::from(b);
                    Some(Rational::new(BigInt::one(), &k * (&k + 1u32)))
                }
                Rule::Geometric { r, .. } if b <= EXACT_GEOMETRIC_DIGIT => {
                    Some((Rational::one() - r) * rational::pow(r, b - 1))
                }
                _ => None,
            },
        }
    }

    /// Σ_{j≤k} |f_j([0,1])| for parametric rules, exactly where possible.
    fn cumulative_exact(&self, k: Digit) -> Option<Rational> {
        match &self.kind {
            Kind::Parametric { rule: Rule::Luroth, .. } => Some(Rational::new(BigInt::from(k), BigInt::from(k) + 1u32)),
            Kind::Parametric { rule: Rule::Geometric { r, .. }, .. } if k <= EXACT_GEOMETRIC_DIGIT => {
                Some(Rational::one() - rational::pow(r, k))
            }
            _ => None,
        }
    }

    /// Σ_{j>k} |f_j([0,1])| for parametric rules as a double.
    fn remainder(&self, k: Digit) -> f64 {
        match &self.kind {
            Kind::Parametric { rule, .. } => match rule {
                Rule::Luroth => 1.0 / (k as f64 + 1.0),
                Rule::Geometric { r_f64, .. } => r_f64.powf(k as f64),
                Rule::Power { p, zeta_p } => {
                    if k == 0 {
                        1.0
                    } else {
                        hurwitz_zeta(*p, k as f64 + 1.0) / zeta_p
                    }
                }
            },
            Kind::Finite(f) => f.lengths[k as usize..].iter().sum(),
        }
    }

    pub fn image_exact(&self, b: Digit) -> Option<(Rational, Rational)> {
        match &self.kind {
            Kind::Finite(f) => {
                let br = &f.branches[(b - 1) as usize];
                Some((br.left.clone(), br.right.clone()))
            }
            Kind::Parametric { layout, .. } => {
                let lo = self.cumulative_exact(b - 1)?;
                let hi = self.cumulative_exact(b)?;
                Some(match layout {
                    Layout::Ascending => (lo, hi),
                    Layout::Descending => (Rational::one() - hi, Rational::one() - lo),
                })
            }
        }
    }

    pub fn image(&self, b: Digit) -> (f64, f64) {
        match &self.kind {
            Kind::Finite(f) => f.images[(b - 1) as usize],
            Kind::Parametric { layout, .. } => {
                let after = self.remainder(b);
                let before = self.remainder(b - 1);
                match layout {
                    Layout::Descending => (after, before),
                    Layout::Ascending => (1.0 - before, 1.0 - after),
                }
            }
        }
    }

    pub fn orientation(&self, b: Digit) -> Orientation {
        match &self.kind {
            Kind::Finite(f) => f.branches[(b - 1) as usize].orientation,
            Kind::Parametric { orientation, .. } => match orientation {
                OrientationRule::Increasing => Orientation::Increasing,
                OrientationRule::Decreasing => Orientation::Decreasing,
                OrientationRule::Alternating if b.is_multiple_of(2) => Orientation::Decreasing,
                OrientationRule::Alternating => Orientation::Increasing,
            },
        }
    }

    /// N_b exactly.
    pub fn ratio_exact(&self, b: Digit) -> Option<Rational> {
        self.length_exact(b).map(|l| l.recip())
    }

    /// a_b with f_b(x) = (a_b + (-1)^ε x)/N_b.
    pub fn offset_exact(&self, b: Digit) -> Option<Rational> {
        let (l, r) = self.image_exact(b)?;
        let n = (&r - &l).recip();
        Some(match self.orientation(b) {
            Orientation::Increasing => l * n,
            Orientation::Decreasing => r * n,
        })
    }

    pub fn apply_exact(&self, b: Digit, x: &Rational) -> Option<Rational> {
        let (l, r) = self.image_exact(b)?;
        let len = &r - &l;
        Some(match self.orientation(b) {
            Orientation::Increasing => l + len * x,
            Orientation::Decreasing => r - len * x,
        })
    }

    pub fn apply(&self, b: Digit, x: f64) -> f64 {
        let (l, r) = self.image(b);
        let len = self.length(b);
        match self.orientation(b) {
            Orientation::Increasing => l + len * x,
            Orientation::Decreasing => r - len * x,
        }
    }

    /// Σ_{b>m} 1/N_b.
    pub fn tail_length(&self, m: u64) -> f64 {
        match self.digit_count() {
            Some(n) if m >= n => 0.0,
            _ => self.remainder(m),
        }
    }

    pub fn tail_length_exact(&self, m: u64) -> Option<Rational> {
        match &self.kind {
            Kind::Finite(f) => {
                Some(f.branches.iter().skip(m as usize).fold(Rational::zero(), |acc, br| acc + (&br.right - &br.left)))
            }
            Kind::Parametric { .. } => self.cumulative_exact(m).map(|c| Rational::one() - c),
        }
    }

    /// η(T) = lim log n / log N_n for the named rule.
    pub fn eta_analytic(&self) -> f64 {
        match &self.kind {
            Kind::Finite(_) => 0.0,
            Kind::Parametric { rule, .. } => match rule {
                Rule::Luroth => 0.5,
                Rule::Power { p, .. } => 1.0 / p,
                Rule::Geometric { .. } => 0.0,
            },
        }
    }

    pub fn growth(&self) -> LogGrowth {
        match &self.kind {
            Kind::Finite(_) => LogGrowth::Bounded,
            Kind::Parametric { rule, .. } => match rule {
                Rule::Luroth => LogGrowth::Logarithmic(2.0),
                Rule::Power { p, .. } => LogGrowth::Logarithmic(*p),
                Rule::Geometric { r_f64, .. } => LogGrowth::Linear(-r_f64.ln()),
            },
        }
    }

    /// Σ_{b>m} N_b^{-t}; `None` when the sum diverges.
    pub fn power_tail(&self, t: f64, m: u64) -> Option<f64> {
        match &self.kind {
            Kind::Finite(f) => Some(f.log_n.iter().skip(m as usize).map(|ln| (-t * ln).exp()).sum()),
            Kind::Parametric { rule, .. } => match rule {
                Rule::Luroth => (t > 0.5).then(|| luroth_power_tail(t, m)),
                Rule::Geometric { r_f64, .. } => {
                    (t > 0.0).then(|| (1.0 - r_f64).powf(t) * r_f64.powf(m as f64 * t) / (1.0 - r_f64.powf(t)))
                }
                Rule::Power { p, zeta_p } => {
                    (p * t > 1.0).then(|| zeta_p.powf(-t) * hurwitz_zeta(p * t, m as f64 + 1.0))
                }
            },
        }
    }

    /// Locates `y ∈ [0,1]` among the level-1 images exactly. `None` when the
    /// system has no exact images near `y`.
    pub fn locate_exact(&self, y: &Rational) -> Option<Location> {
        match &self.kind {
            Kind::Finite(f) => Some(locate_finite(f, y)),
            Kind::Parametric { rule, layout, .. } => {
                let z = match layout {
                    Layout::Descending => y.clone(),
                    Layout::Ascending => Rational::one() - y,
                };
                let loc = match rule {
                    Rule::Luroth => locate_luroth_desc(&z),
                    Rule::Geometric { r, r_f64 } => locate_geometric_desc(&z, r, *r_f64)?,
                    Rule::Power { .. } => return None,
                };
                Some(mirror(loc, *layout))
            }
        }
    }

    /// Floating-point locator; shared endpoints are not detected.
    pub fn locate(&self, y: f64) -> Location {
        match &self.kind {
            Kind::Finite(f) => {
                let idx = f.by_left.partition_point(|&i| f.images[i].0 <= y);
                if idx == 0 {
                    return Location::Outside;
                }
                let i = f.by_left[idx - 1];
                if y <= f.images[i].1 {
                    Location::Inside(i as Digit + 1)
                } else {
                    Location::Outside
                }
            }
            Kind::Parametric { rule, layout, .. } => {
                let z = match layout {
                    Layout::Descending => y,
                    Layout::Ascending => 1.0 - y,
                };
                if z <= 0.0 {
                    return Location::Outside;
                }
                if z >= 1.0 {
                    return Location::Inside(1);
                }
                // Smallest b ≥ 1 with remainder(b) ≤ z.
                let guess = match rule {
                    Rule::Luroth => (1.0 / z).floor().max(1.0),
                    Rule::Geometric { r_f64, .. } => (z.ln() / r_f64.ln()).ceil().max(1.0),
                    Rule::Power { p, zeta_p } => (z * (p - 1.0) * zeta_p).powf(-1.0 / (p - 1.0)).max(1.0),
                };
                let guess = if guess.is_finite() && guess < 9.0e18 { guess as u64 } else { return Location::Outside };
                let mut lo = guess;
                while lo > 1 && self.remainder(lo - 1) <= z {
                    lo = (lo / 2).max(1);
                }
                let mut hi = guess.max(1);
                while self.remainder(hi) > z {
                    hi = hi.saturating_mul(2);
                    if hi == u64::MAX {
                        return Location::Outside;
                    }
                }
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if self.remainder(mid) <= z {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                Location::Inside(lo)
            }
        }
    }
}

fn mirror(loc: Location, layout: Layout) -> Location {
    match (loc, layout) {
        (Location::Shared { left, right }, Layout::Ascending) => Location::Shared { left: right, right: left },
        (other, _) => other,
    }
}

fn locate_finite(f: &FiniteBranches, y: &Rational) -> Location {
    let idx = f.by_left.partition_point(|&i| f.branches[i].left <= *y);
    if idx == 0 {
        return Location::Outside;
    }
    let i = f.by_left[idx - 1];
    let br = &f.branches[i];
    let digit = |k: usize| f.by_left[k] as Digit + 1;
    if *y == br.left && idx >= 2 && f.branches[f.by_left[idx - 2]].right == *y {
        return Location::Shared { left: digit(idx - 2), right: digit(idx - 1) };
    }
    if *y < br.right {
        return Location::Inside(i as Digit + 1);
    }
    if *y == br.right {
        if idx < f.by_left.len() && f.branches[f.by_left[idx]].left == *y {
            return Location::Shared { left: digit(idx - 1), right: digit(idx) };
        }
        return Location::Inside(i as Digit + 1);
    }
    Location::Outside
}

/// Lüroth descending layout: digit b occupies [1/(b+1), 1/b].
fn locate_luroth_desc(z: &Rational) -> Location {
    if z.is_zero() {
        return Location::Outside;
    }
    let (q, rem) = z.denom().div_rem(z.numer());
    let q = match q.to_u64() {
        Some(q) => q,
        None => return Location::Outside,
    };
    if rem.is_zero() {
        if q == 1 {
            Location::Inside(1)
        } else {
            Location::Shared { left: q, right: q - 1 }
        }
    } else {
        Location::Inside(q)
    }
}

/// Geometric descending layout: digit b occupies [r^b, r^{b-1}].
fn locate_geometric_desc(z: &Rational, r: &Rational, r_f64: f64) -> Option<Location> {
    if z.is_zero() {
        return Some(Location::Outside);
    }
    let est = (ln_rational(z) / r_f64.ln()).ceil().max(1.0);
    if est.is_nan() || est >= EXACT_GEOMETRIC_DIGIT as f64 {
        return None;
    }
    let mut b = est as u64;
    loop {
        let upper = rational::pow(r, b - 1);
        let lower = &upper * r;
        if *z > upper {
            if b == 1 {
                return Some(Location::Outside);
            }
            b -= 1;
        } else if *z < lower {
            b += 1;
            if b > EXACT_GEOMETRIC_DIGIT {
                return None;
            }
        } else if *z == lower {
            return Some(Location::Shared { left: b + 1, right: b });
        } else if *z == upper && b >= 2 {
            return Some(Location::Shared { left: b, right: b - 1 });
        } else {
            return Some(Location::Inside(b));
        }
    }
}

/// Σ_{k>m} (k(k+1))^{-t} for t > 1/2: direct terms up to K, then the binomial
/// expansion (1+1/k)^{-t} = Σ_j C(-t,j) k^{-j} summed with Hurwitz zetas.
fn luroth_power_tail(t: f64, m: u64) -> f64 {
    let cutoff = (m + 1).max(64);
    let mut direct = 0.0;
    for k in (m + 1..cutoff).rev() {
        let k = k as f64;
        direct += (k * (k + 1.0)).powf(-t);
    }
    let a = cutoff as f64;
    let mut coeff = 1.0;
    let mut series = 0.0;
    for j in 0..80 {
        let term = coeff * hurwitz_zeta(2.0 * t + j as f64, a);
        series += term;
        if term.abs() <= 1e-18 * series.abs() {
            break;
        }
        coeff *= -(t + j as f64) / (j as f64 + 1.0);
    }
    direct + series
}

/// Natural log of a positive rational without overflowing to f64 first.
pub fn ln_rational(r: &Rational) -> f64 {
    let (n, d) = (r.numer().abs(), r.denom().abs());
    let shift = n.bits() as i64 - d.bits() as i64;
    if shift.abs() <= 1 {
        // near 1 the subtraction below would cancel
        return rational::to_f64(&(Rational::new(n - &d, d))).ln_1p();
    }
    // n / d = m * 2^e with m in [1/2, 2) from 64 significant bits
    let k = 63 - shift;
    let q = if k >= 0 { (n << k as u64) / d } else { n / (d << (-k) as u64) };
    let m = q.to_f64().unwrap_or(f64::NAN) / 2f64.powi(63);
    // ln 2 split so that e * LN2_HI is exact
    const LN2_HI: f64 = 0.693_147_180_369_123_8;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    let e = (63 - k) as f64;
    m.ln() + e * LN2_LO + e * LN2_HI
}

/// Validates a symbol id list and maps ids to systems.
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    systems: Vec<GlsSystem>,
}

impl Family {
    pub fn new(systems: Vec<GlsSystem>) -> Result<Self> {
        if systems.is_empty() {
            return Err(Error::InvalidParameter("family has no symbols".into()));
        }
        for (i, a) in systems.iter().enumerate() {
            if systems[..i].iter().any(|b| b.symbol == a.symbol) {
                return Err(Error::InvalidParameter(format!("duplicate symbol {}", a.symbol.0)));
            }
        }
        Ok(Family { systems })
    }

    pub fn singleton(system: GlsSystem) -> Self {
        Family { systems: vec![system] }
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn systems(&self) -> &[GlsSystem] {
        &self.systems
    }

    pub fn system(&self, s: usize) -> &GlsSystem {
        &self.systems[s]
    }

    pub fn symbol(&self, s: usize) -> &str {
        self.systems[s].symbol.as_str()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.systems.iter().position(|sys| sys.symbol.0 == id).ok_or_else(|| Error::UnknownSymbol(id.to_string()))
    }

    /// η_T = max_s η(T_s).
    pub fn eta_t(&self) -> f64 {
        self.systems.iter().map(GlsSystem::eta_analytic).fold(0.0, f64::max)
    }

    /// Checks that `word` is admissible along `omega`.
    pub fn check_word(&self, omega: &[usize], word: &[Digit]) -> Result<()> {
        if omega.len() < word.len() {
            return Err(Error::OmegaTooShort { have: omega.len(), need: word.len() });
        }
        for (&s, &b) in omega.iter().zip(word) {
            self.check_symbol(s)?;
            self.systems[s].check_digit(b)?;
        }
        Ok(())
    }

    pub fn check_symbol(&self, s: usize) -> Result<()> {
        if s < self.systems.len() {
            Ok(())
        } else {
            Err(Error::UnknownSymbol(format!("#{s}")))
        }
    }
}

/// Generator of the driving sequence ω ∈ S^ℕ (symbols as family indices).
#[derive(Clone, Debug, PartialEq)]
pub enum OmegaRule {
    /// Explicit prefix followed by a periodic tail.
    Periodic { prefix: Vec<usize>, cycle: Vec<usize> },
    /// Deterministic greedy sequence whose symbol frequencies track `targets`.
    Weave { targets: Vec<f64> },
    /// i.i.d. symbols drawn from `probs` with a seeded generator.
    Bernoulli { probs: Vec<f64>, seed: u64 },
}

impl OmegaRule {
    pub fn constant(s: usize) -> Self {
        OmegaRule::Periodic { prefix: vec![], cycle: vec![s] }
    }

    pub fn periodic(cycle: Vec<usize>) -> Self {
        OmegaRule::Periodic { prefix: vec![], cycle }
    }

    pub fn validate(&self, symbols: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            OmegaRule::Periodic { prefix, cycle } => {
                if cycle.is_empty() {
                    return bad("periodic omega needs a non-empty cycle".into());
                }
                if let Some(s) = prefix.iter().chain(cycle).find(|&&s| s >= symbols) {
                    return bad(format!("omega refers to symbol #{s}"));
                }
            }
            OmegaRule::Weave { targets: w } | OmegaRule::Bernoulli { probs: w, .. } => {
                if w.len() != symbols {
                    return bad(format!("omega weights have {} entries for {symbols} symbols", w.len()));
                }
                if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return bad("omega weights must be non-negative and sum to 1".into());
                }
            }
        }
        Ok(())
    }

    /// ω_1 ⋯ ω_n.
    pub fn prefix(&self, n: usize) -> Vec<usize> {
        match self {
            OmegaRule::Periodic { prefix, cycle } => (0..n)
                .map(|i| if i < prefix.len() { prefix[i] } else { cycle[(i - prefix.len()) % cycle.len()] })
                .collect(),
            OmegaRule::Weave { targets } => {
                let mut counts = vec![0u64; targets.len()];
                (1..=n)
                    .map(|k| {
                        let k = k as f64;
                        let mut best = 0;
                        let mut best_score = f64::NEG_INFINITY;
                        for (s, &w) in targets.iter().enumerate() {
                            let score = k * w - counts[s] as f64;
                            if w > 0.0 && score > best_score {
                                best_score = score;
                                best = s;
                            }
                        }
                        counts[best] += 1;
                        best
                    })
                    .collect()
            }
            OmegaRule::Bernoulli { probs, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        let mut acc = 0.0;
                        for (s, &p) in probs.iter().enumerate() {
                            acc += p;
                            if u < acc {
                                return s;
                            }
                        }
                        probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
                    })
                    .collect()
            }
        }
    }
}

/// τ_s(ω, n) for every symbol.
pub fn symbol_counts(omega: &[usize], symbols: usize) -> Vec<u64> {
    let mut counts = vec![0u64; symbols];
    for &s in omega {
        counts[s] += 1;
    }
    counts
}

/// A fibre fundamental interval ⟨b_1 ⋯ b_n⟩_ω.
#[derive(Clone, Debug, PartialEq)]
pub struct Ffi {
    pub word: Vec<Digit>,
    pub omega: Vec<usize>,
    /// Exact endpoints when every level has rational images and n ≤ exact depth.
    pub exact: Option<(Rational, Rational)>,
    /// Outward-rounded double bounds.
    pub lo: f64,
    pub hi: f64,
    /// −Σ log N_{ω_ℓ, b_ℓ}.
    pub log_length: f64,
}

impl Ffi {
    pub fn depth(&self) -> usize {
        self.word.len()
    }

    pub fn length(&self) -> f64 {
        self.log_length.exp()
    }

    pub fn midpoint(&self) -> f64 {
        match &self.exact {
            Some((l, r)) => rational::to_f64(&((l + r) / rational::int(2))),
            None => 0.5 * (self.lo + self.hi),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_exact(&self, x: &Rational) -> Option<bool> {
        self.exact.as_ref().map(|(l, r)| l <= x && x <= r)
    }
}

pub fn ffi(family: &Family, omega: &[usize], word: &[Digit]) -> Result<Ffi> {
    ffi_with_depth(family, omega, word, DEFAULT_EXACT_DEPTH)
}

pub fn ffi_with_depth(family: &Family, omega: &[usize], word: &[Digit], exact_depth: usize) -> Result<Ffi> {
    family.check_word(omega, word)?;
    let omega = &omega[..word.len()];
    let systems: Vec<&GlsSystem> = omega.iter().map(|&s| family.system(s)).collect();
    let log_length = -systems.iter().zip(word).map(|(sys, &b)| sys.log_n(b)).sum::<f64>();

    let exact = if word.len() <= exact_depth { compose_exact(&systems, word) } else { None };
    let (lo, hi) = match &exact {
        Some((l, r)) => (rational::to_f64(l).next_down().max(0.0), rational::to_f64(r).next_up().min(1.0)),
        None => compose_f64(&systems, word),
    };
    let log_length = match &exact {
        Some((l, r)) => ln_rational(&(r - l)),
        None => log_length,
    };
    Ok(Ffi { word: word.to_vec(), omega: omega.to_vec(), exact, lo, hi, log_length })
}

fn compose_exact(systems: &[&GlsSystem], word: &[Digit]) -> Option<(Rational, Rational)> {
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    for (sys, &b) in systems.iter().zip(word).rev() {
        let (l, r) = sys.image_exact(b)?;
        let len = &r - &l;
        let (a, c) = match sys.orientation(b) {
            Orientation::Increasing => (&l + &len * &lo, &l + &len * &hi),
            Orientation::Decreasing => (&r - &len * &hi, &r - &len * &lo),
        };
        lo = a;
        hi = c;
    }
    Some((lo, hi))
}

fn compose_f64(systems: &[&GlsSystem], word: &[Digit]) -> (f64, f64) {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for (sys, &b) in systems.iter().zip(word).rev() {
        let (l, r) = sys.image(b);
        let len = r - l;
        let (a, c) = match sys.orientation(b) {
            Orientation::Increasing => (l + len * lo, l + len * hi),
            Orientation::Decreasing => (r - len * hi, r - len * lo),
        };
        lo = a.next_down().max(0.0);
        hi = c.next_up().min(1.0);
    }
    (lo, hi)
}

/// Applies f_{s,b} with a digit check.
pub fn map_apply(system: &GlsSystem, b: Digit, x: f64) -> Result<f64> {
    system.check_digit(b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::PointOutOfRange(x.to_string()));
    }
    Ok(system.apply(b, x))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionReport {
    pub passed: bool,
    pub scanned: u64,
    /// |Σ_{b≤m} 1/N_b + tail(m) − 1|, zero when checked exactly.
    pub sum_deviation: f64,
    pub exact: bool,
    pub violations: Vec<String>,
}

impl PartitionReport {
    pub fn first_violation(&self) -> Option<&str> {
        self.violations.first().map(String::as_str)
    }
}

/// Checks Σ lengths = 1, ratio ordering and interior-disjointness of the
/// first `m` images.
pub fn validate_partition(system: &GlsSystem, m: u64) -> PartitionReport {
    let m = system.cut(m.max(1));
    let mut violations = Vec::new();
    let exact_images: Option<Vec<(Rational, Rational)>> = (1..=m).map(|b| system.image_exact(b)).collect();

    let (sum_deviation, exact) = match (&exact_images, system.tail_length_exact(m)) {
        (Some(images), Some(tail)) => {
            let total = images.iter().fold(tail, |acc, (l, r)| acc + (r - l));
            if !total.is_one() {
                violations.push(format!("lengths sum to {}, not 1", rational::format(&total)));
            }
            (rational::to_f64(&(total - Rational::one())).abs(), true)
        }
        _ => {
            let partial: f64 = (1..=m).map(|b| system.length(b)).sum();
            let dev = (partial + system.tail_length(m) - 1.0).abs();
            if dev > 1e-12 {
                violations.push(format!("lengths sum to 1 only within {dev:e}"));
            }
            (dev, false)
        }
    };

    for b in 1..m {
        let ordered = match (system.length_exact(b), system.length_exact(b + 1)) {
            (Some(x), Some(y)) => x >= y,
            _ => system.length(b) >= system.length(b + 1),
        };
        if !ordered {
            violations.push(format!("ratio ordering fails between digits {b} and {}", b + 1));
        }
    }

    match exact_images {
        Some(images) => {
            let mut order: Vec<usize> = (0..images.len()).collect();
            order.sort_by(|&a, &b| images[a].0.cmp(&images[b].0));
            for (i, &k) in order.iter().enumerate() {
                let (l, r) = &images[k];
                if l.is_negative() || *r > Rational::one() {
                    violations.push(format!("image of digit {} leaves [0,1]", k + 1));
                }
                if let Some(&next) = order.get(i + 1) {
                    if images[next].0 < *r {
                        violations.push(format!("OSC violation: images of digits {} and {} overlap", k + 1, next + 1));
                    }
                }
            }
        }
        None => {
            let mut images: Vec<(f64, f64, u64)> = (1..=m)
                .map(|b| {
                    let (l, r) = system.image(b);
                    (l, r, b)
                })
                .collect();
            images.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in images.windows(2) {
                if w[1].0 < w[0].1 {
                    violations.push(format!("OSC violation: images of digits {} and {} overlap", w[0].2, w[1].2));
                }
            }
        }
    }

    PartitionReport { passed: violations.is_empty(), scanned: m, sum_deviation, exact, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn lur() -> GlsSystem {
        GlsSystem::luroth(Symbol::new("L"))
    }

    #[test]
    fn luroth_first_image_and_map() {
        let l = lur();
        assert_eq!(l.image_exact(1), Some((frac(1, 2), frac(1, 1))));
        assert_eq!(l.apply_exact(1, &Rational::zero()), Some(frac(1, 2)));
        assert_eq!(l.offset_exact(3), Some(rational::int(3)));
        assert_eq!(l.ratio_exact(2), Some(rational::int(6)));
    }

    #[test]
    fn finite_relabels_by_ratio() {
        let inc = Orientation::Increasing;
        let sys =
            GlsSystem::finite(Symbol::new("F"), &[(frac(1, 3), inc), (frac(1, 2), inc), (frac(1, 6), inc)]).unwrap();
        let ns: Vec<Rational> = (1..=3).map(|b| sys.ratio_exact(b).unwrap()).collect();
        assert_eq!(ns, vec![rational::int(2), rational::int(3), rational::int(6)]);
        assert_eq!(sys.image_exact(1), Some((frac(1, 3), frac(5, 6))));
        assert_eq!(sys.image_exact(2), Some((frac(0, 1), frac(1, 3))));
    }

    #[test]
    fn finite_rejects_bad_input() {
        let inc = Orientation::Increasing;
        assert_eq!(GlsSystem::finite(Symbol::new("F"), &[]), Err(Error::EmptyDigitSet));
        assert!(matches!(
            GlsSystem::finite(Symbol::new("F"), &[(frac(99, 200), inc), (frac(1, 2), inc)]),
            Err(Error::LengthSum(_))
        ));
        assert_eq!(
            GlsSystem::finite(Symbol::new("F"), &[(frac(0, 1), inc), (frac(1, 1), inc)]),
            Err(Error::NonPositiveLength(0))
        );
    }

    #[test]
    fn decreasing_branch_endpoints() {
        let dec = Orientation::Decreasing;
        let sys = GlsSystem::finite(Symbol::new("D"), &[(frac(1, 4), dec), (frac(3, 4), dec)]).unwrap();
        // digit 2 is the length-1/4 branch on [0, 1/4], N = 4, a = N·right = 1
        assert_eq!(sys.offset_exact(2), Some(rational::int(1)));
        assert_eq!(sys.apply_exact(2, &Rational::zero()), Some(frac(1, 4)));
        assert_eq!(sys.apply_exact(2, &Rational::one()), Some(frac(0, 1)));
        let n = rational::int(4);
        let full =
            GlsSystem::finite(Symbol::new("E"), &[(frac(1, 4), dec), (frac(3, 4), Orientation::Increasing)]).unwrap();
        assert_eq!(full.image_exact(2), Some((frac(0, 1), frac(1, 4))));
        assert_eq!(full.offset_exact(2).unwrap() / &n, frac(1, 4));
    }

    #[test]
    fn parametric_rules_validate() {
        let s = Symbol::new("P");
        assert!(GlsSystem::parametric(
            s.clone(),
            ParametricRule::Power(1.0),
            Layout::Ascending,
            OrientationRule::Increasing
        )
        .is_err());
        assert!(GlsSystem::parametric(
            s.clone(),
            ParametricRule::Geometric(frac(1, 1)),
            Layout::Ascending,
            OrientationRule::Increasing
        )
        .is_err());
        let g = GlsSystem::parametric(
            s,
            ParametricRule::Geometric(frac(1, 2)),
            Layout::Ascending,
            OrientationRule::Increasing,
        )
        .unwrap();
        assert_eq!(g.image_exact(1), Some((frac(0, 1), frac(1, 2))));
        assert_eq!(g.length_exact(3), Some(frac(1, 8)));
    }

    #[test]
    fn luroth_locator() {
        let l = lur();
        assert_eq!(l.locate_exact(&Rational::zero()), Some(Location::Outside));
        assert_eq!(l.locate_exact(&frac(2, 5)), Some(Location::Inside(2)));
        assert_eq!(l.locate_exact(&frac(1, 3)), Some(Location::Shared { left: 3, right: 2 }));
        assert_eq!(l.locate_exact(&Rational::one()), Some(Location::Inside(1)));
        assert_eq!(l.locate(0.4), Location::Inside(2));
        assert_eq!(l.locate(0.0), Location::Outside);
    }

    #[test]
    fn power_tail_closed_forms() {
        let g = GlsSystem::parametric(
            Symbol::new("G"),
            ParametricRule::Geometric(frac(1, 2)),
            Layout::Ascending,
            OrientationRule::Increasing,
        )
        .unwrap();
        let direct: f64 = (4..200).map(|b| g.length(b).powf(0.7)).sum();
        assert!((g.power_tail(0.7, 3).unwrap() - direct).abs() < 1e-14);
        let l = lur();
        let direct: f64 = (3..2_000_000u64).map(|k| ((k * (k + 1)) as f64).powf(-0.8)).sum();
        // remaining tail beyond 2e6 ~ ∫ x^{-1.6} = x^{-0.6}/0.6
        let rest = (2.0e6f64).powf(-0.6) / 0.6;
        assert!((l.power_tail(0.8, 2).unwrap() - direct - rest).abs() < 1e-7);
        assert!(l.power_tail(0.5, 2).is_none());
    }
}
