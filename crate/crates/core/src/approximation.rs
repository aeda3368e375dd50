//! Finite approximants T^(m): digits b ≤ m are kept and each gap left in
//! [0,1] becomes one increasing affine branch carrying the mass of the
//! digits it swallows.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frequency::FrequencyVector;
use crate::gls::{Digit, Family, GlsSystem, Layout, Orientation, PartitionReport};
use crate::rational::{self, Rational};

/// Base digits merged into one approximant branch: the listed `members` of a
/// finite system, or every digit from `first` on when `open` is set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MergedRange {
    pub first: Digit,
    pub open: bool,
    pub members: Vec<Digit>,
}

impl MergedRange {
    pub fn contains(&self, b: Digit) -> bool {
        if self.open {
            b >= self.first
        } else {
            self.members.contains(&b)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxBranch {
    pub digit: Digit,
    pub left: f64,
    pub right: f64,
    #[serde(skip)]
    pub exact: Option<(Rational, Rational)>,
    pub orientation: Orientation,
    /// Base digits covered by a merged branch; `None` for retained ones.
    pub merged: Option<MergedRange>,
}

impl ApproxBranch {
    pub fn log_n(&self) -> f64 {
        match &self.exact {
            Some((l, r)) => crate::gls::ln_rational(&(r - l).recip()),
            None => -(self.right - self.left).ln(),
        }
    }

    pub fn left_text(&self) -> String {
        self.exact.as_ref().map_or_else(|| self.left.to_string(), |(l, _)| rational::format(l))
    }

    pub fn right_text(&self) -> String {
        self.exact.as_ref().map_or_else(|| self.right.to_string(), |(_, r)| rational::format(r))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxSystem {
    pub symbol: String,
    pub m: u64,
    /// Sorted by digit.
    pub branches: Vec<ApproxBranch>,
}

impl ApproxSystem {
    pub fn branch(&self, digit: Digit) -> Option<&ApproxBranch> {
        self.branches.iter().find(|b| b.digit == digit)
    }

    /// Approximant digit whose branch contains base digit b.
    pub fn digit_for(&self, b: Digit) -> Option<Digit> {
        if b <= self.m {
            return self.branch(b).map(|br| br.digit);
        }
        self.branches.iter().find(|br| br.merged.as_ref().is_some_and(|r| r.contains(b))).map(|br| br.digit)
    }

    pub fn is_exact(&self) -> bool {
        self.branches.iter().all(|b| b.exact.is_some())
    }

    /// Interior endpoints of the branch images, exactly.
    pub fn breakpoints(&self) -> Option<Vec<Rational>> {
        let mut pts: Vec<Rational> = Vec::new();
        for br in &self.branches {
            let (l, r) = br.exact.as_ref()?;
            pts.push(l.clone());
            pts.push(r.clone());
        }
        pts.retain(|p| !p.is_zero() && !p.is_one());
        pts.sort();
        pts.dedup();
        Some(pts)
    }

    /// Images tile [0,1]: sorted by left endpoint they chain from 0 to 1.
    pub fn validate(&self) -> PartitionReport {
        let mut violations = Vec::new();
        let exact = self.is_exact();
        let mut order: Vec<&ApproxBranch> = self.branches.iter().collect();
        let sum_deviation;
        if exact {
            order.sort_by(|a, b| a.exact.as_ref().unwrap().0.cmp(&b.exact.as_ref().unwrap().0));
            let mut cursor = Rational::zero();
            for br in &order {
                let (l, r) = br.exact.as_ref().unwrap();
                if *l != cursor {
                    violations.push(format!(
                        "digit {} starts at {}, expected {}",
                        br.digit,
                        rational::format(l),
                        rational::format(&cursor)
                    ));
                }
                if r <= l {
                    violations.push(format!("digit {} has an empty image", br.digit));
                }
                cursor = r.clone();
            }
            if !cursor.is_one() {
                violations.push(format!("images end at {}, not 1", rational::format(&cursor)));
            }
            sum_deviation = 0.0;
        } else {
            order.sort_by(|a, b| a.left.total_cmp(&b.left));
            let mut cursor = 0.0;
            for br in &order {
                if (br.left - cursor).abs() > 1e-12 {
                    violations.push(format!("digit {} starts at {}, expected {cursor}", br.digit, br.left));
                }
                cursor = br.right;
            }
            sum_deviation =
                (cursor - 1.0f64).abs().max((order.iter().map(|b| b.right - b.left).sum::<f64>() - 1.0).abs());
            if sum_deviation > 1e-12 {
                violations.push(format!("images tile [0,1] only within {sum_deviation:e}"));
            }
        }
        PartitionReport {
            passed: violations.is_empty(),
            scanned: self.branches.len() as u64,
            sum_deviation,
            exact,
            violations,
        }
    }

    /// The approximant as a finite system with digits relabelled 1..=#B^(m) in digit order.
    pub fn to_system(&self) -> Result<GlsSystem> {
        let intervals = self
            .branches
            .iter()
            .map(|br| {
                br.exact
                    .clone()
                    .map(|(l, r)| (l, r, br.orientation))
                    .ok_or_else(|| Error::InvalidParameter("approximant endpoints are not rational".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        GlsSystem::from_intervals(crate::gls::Symbol::new(self.symbol.clone()), intervals)
    }
}

/// Builds T^(m) for one system.
pub fn approximate_system(system: &GlsSystem, m: u64) -> Result<ApproxSystem> {
    if m == 0 {
        return Err(Error::InvalidParameter("cut m must be at least 1".into()));
    }
    let symbol = system.symbol().as_str().to_string();
    let retained = |b: Digit| -> ApproxBranch {
        let (left, right) = system.image(b);
        ApproxBranch {
            digit: b,
            left,
            right,
            exact: system.image_exact(b),
            orientation: system.orientation(b),
            merged: None,
        }
    };
    let mut branches: Vec<ApproxBranch> = (1..=system.cut(m)).map(retained).collect();
    match system.digit_count() {
        Some(n) if m >= n => {}
        Some(n) => {
            // exact sweep over the retained images
            let images: Vec<(Rational, Rational)> = branches.iter().map(|b| b.exact.clone().unwrap()).collect();
            let mut sorted = images.clone();
            sorted.sort();
            let mut gaps = Vec::new();
            let mut cursor = Rational::zero();
            for (l, r) in &sorted {
                if *l > cursor {
                    gaps.push((cursor.clone(), l.clone()));
                }
                cursor = cursor.max(r.clone());
            }
            if cursor < Rational::one() {
                gaps.push((cursor, Rational::one()));
            }
            for (gl, gr) in gaps {
                let members: Vec<Digit> = (m + 1..=n)
                    .filter(|&b| {
                        let (l, r) = system.image_exact(b).unwrap();
                        l >= gl && r <= gr
                    })
                    .collect();
                let first = *members.first().ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "gap [{}, {}] holds no digit image",
                        rational::format(&gl),
                        rational::format(&gr)
                    ))
                })?;
                branches.push(ApproxBranch {
                    digit: first,
                    left: rational::to_f64(&gl),
                    right: rational::to_f64(&gr),
                    exact: Some((gl, gr)),
                    orientation: Orientation::Increasing,
                    merged: Some(MergedRange { first, open: false, members }),
                });
            }
        }
        None => {
            let tail = system.tail_length(m);
            let tail_exact = system.tail_length_exact(m);
            let (left, right, exact) = match system.layout() {
                Some(Layout::Ascending) => {
                    (1.0 - tail, 1.0, tail_exact.map(|t| (Rational::one() - t, Rational::one())))
                }
                _ => (0.0, tail, tail_exact.map(|t| (Rational::zero(), t))),
            };
            branches.push(ApproxBranch {
                digit: m + 1,
                left,
                right,
                exact,
                orientation: Orientation::Increasing,
                merged: Some(MergedRange { first: m + 1, open: true, members: vec![] }),
            });
        }
    }
    branches.sort_by_key(|b| b.digit);
    Ok(ApproxSystem { symbol, m, branches })
}

pub fn approximate_family(family: &Family, m: u64) -> Result<Vec<ApproxSystem>> {
    family.systems().iter().map(|s| approximate_system(s, m)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxAlpha {
    pub digit: Digit,
    pub merged: bool,
    pub alpha: f64,
    #[serde(skip)]
    pub exact: Option<Rational>,
}

/// α^(m) over the approximant digits, per symbol.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxFrequency {
    pub m: u64,
    pub symbols: Vec<Vec<ApproxAlpha>>,
}

impl ApproxFrequency {
    pub fn get(&self, s: usize, digit: Digit) -> Option<&ApproxAlpha> {
        self.symbols[s].iter().find(|a| a.digit == digit)
    }

    pub fn total_exact(&self) -> Option<Rational> {
        self.symbols.iter().flatten().try_fold(Rational::zero(), |acc, a| a.exact.as_ref().map(|e| acc + e))
    }

    pub fn symbol_total_exact(&self, s: usize) -> Option<Rational> {
        self.symbols[s].iter().try_fold(Rational::zero(), |acc, a| a.exact.as_ref().map(|e| acc + e))
    }
}

/// α^(m): unchanged on b ≤ m, summed over the swallowed digits on merged branches.
pub fn project_frequency(family: &Family, alpha: &FrequencyVector, approx: &[ApproxSystem]) -> Result<ApproxFrequency> {
    if approx.len() != family.len() || alpha.symbols() != family.len() {
        return Err(Error::InvalidParameter("approximant, family and frequency vector disagree in size".into()));
    }
    let m = approx.first().map_or(0, |a| a.m);
    let symbols = approx
        .iter()
        .enumerate()
        .map(|(s, sys)| {
            sys.branches
                .iter()
                .map(|br| match &br.merged {
                    None => ApproxAlpha {
                        digit: br.digit,
                        merged: false,
                        alpha: alpha.alpha(s, br.digit),
                        exact: alpha.alpha_exact(s, br.digit),
                    },
                    Some(range) => {
                        let (value, exact) = merged_mass(alpha, s, range);
                        ApproxAlpha { digit: br.digit, merged: true, alpha: value, exact }
                    }
                })
                .collect()
        })
        .collect();
    Ok(ApproxFrequency { m, symbols })
}

fn merged_mass(alpha: &FrequencyVector, s: usize, range: &MergedRange) -> (f64, Option<Rational>) {
    if range.open {
        return (alpha.tail_mass(s, range.first - 1), alpha.tail_mass_exact(s, range.first - 1));
    }
    let exact = range.members.iter().try_fold(Rational::zero(), |acc, &b| alpha.alpha_exact(s, b).map(|a| acc + a));
    let value = exact.as_ref().map_or_else(|| range.members.iter().map(|&b| alpha.alpha(s, b)).sum(), rational::to_f64);
    (value, exact)
}

/// log μ^(m)(⟨word⟩_{ω,m}) for a word over the approximant digits.
pub fn approx_mu_ffi(
    alpha: &FrequencyVector,
    projected: &ApproxFrequency,
    omega: &[usize],
    word: &[Digit],
) -> Result<f64> {
    if omega.len() < word.len() {
        return Err(Error::OmegaTooShort { have: omega.len(), need: word.len() });
    }
    let mut acc = 0.0;
    for (&s, &b) in omega.iter().zip(word) {
        let entry = projected.get(s, b).ok_or_else(|| Error::DigitOutOfRange { symbol: format!("#{s}"), digit: b })?;
        acc += if entry.merged { (entry.alpha / alpha.weight(s)).ln() } else { alpha.law(s).log_prob(b) };
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub m: u64,
    /// log μ^(m) of the base FFI.
    pub log_mu_m: f64,
    /// Bound on |μ^(m) − computed value| when the FFI is not an approximant FFI.
    pub error_bound: f64,
    pub log_mu: f64,
    pub exact_match: Option<bool>,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least m in the range from which μ^(m) = μ on the word for all larger m.
    pub stabilized_from: Option<u64>,
}

/// μ^(m)([0,x]) along ω by descent through the approximant branches.
fn approx_cdf(approx: &[Vec<(f64, f64, bool, f64)>], omega: &[usize], x: f64, tol: f64) -> (f64, f64) {
    let mut acc = 0.0;
    let mut scale = 1.0f64;
    let mut x = x;
    for &s in omega {
        if scale.abs() < tol {
            break;
        }
        let branches = &approx[s];
        let mut found = None;
        for &(l, r, inc, p) in branches {
            if r <= x {
                acc += scale * p;
            } else if l <= x && found.is_none() {
                found = Some((l, r, inc, p));
            }
        }
        match found {
            None => return (acc, 0.0),
            Some((l, r, inc, p)) => {
                let y = ((x - l) / (r - l)).clamp(0.0, 1.0);
                if inc {
                    scale *= p;
                } else {
                    acc += scale * p;
                    scale = -scale * p;
                }
                x = y;
            }
        }
    }
    (acc, scale.abs())
}

/// μ^(m)(⟨word⟩_ω) against μ(⟨word⟩_ω) over a range of cuts. Once m reaches the
/// largest digit the FFI is an approximant FFI and the product formula applies;
/// below that the mass is computed through the distribution function.
pub fn measure_convergence_check(
    family: &Family,
    omega: &[usize],
    alpha: &FrequencyVector,
    word: &[Digit],
    m_range: std::ops::RangeInclusive<u64>,
) -> Result<ConvergenceTable> {
    family.check_word(omega, word)?;
    let log_mu: f64 = omega.iter().zip(word).map(|(&s, &b)| alpha.law(s).log_prob(b)).sum();
    let mu_exact: Option<Rational> =
        omega.iter().zip(word).try_fold(Rational::one(), |acc, (&s, &b)| alpha.law(s).prob_exact(b).map(|p| acc * p));
    let max_digit = word.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    for m in m_range {
        let approx = approximate_family(family, m)?;
        let projected = project_frequency(family, alpha, &approx)?;
        let row = if m >= max_digit {
            let log_mu_m = approx_mu_ffi(alpha, &projected, omega, word)?;
            let exact_m: Option<Rational> = omega.iter().zip(word).try_fold(Rational::one(), |acc, (&s, &b)| {
                let e = projected.get(s, b)?;
                e.exact.as_ref().map(|a| acc * a / alpha.weight_exact(s))
            });
            let exact_match = exact_m.zip(mu_exact.clone()).map(|(a, b)| a == b);
            ConvergenceRow { m, log_mu_m, error_bound: 0.0, log_mu, exact_match, equal: log_mu_m == log_mu }
        } else {
            let ffi = crate::gls::ffi(family, omega, word)?;
            let table: Vec<Vec<(f64, f64, bool, f64)>> = approx
                .iter()
                .enumerate()
                .map(|(s, a)| {
                    a.branches
                        .iter()
                        .map(|br| {
                            let p = projected.get(s, br.digit).map_or(0.0, |e| e.alpha) / alpha.weight(s);
                            (br.left, br.right, br.orientation == Orientation::Increasing, p)
                        })
                        .collect()
                })
                .collect();
            let long_omega: &[usize] = omega;
            let tol = 1e-15;
            let (hi, e1) = approx_cdf(&table, long_omega, ffi.hi, tol);
            let (lo, e2) = approx_cdf(&table, long_omega, ffi.lo, tol);
            let mass = (hi - lo).max(0.0);
            ConvergenceRow { m, log_mu_m: mass.ln(), error_bound: e1 + e2, log_mu, exact_match: None, equal: false }
        };
        rows.push(row);
    }
    let stabilized_from =
        rows.iter().rposition(|r| !r.equal).map_or_else(|| rows.first().map(|r| r.m), |i| rows.get(i + 1).map(|r| r.m));
    Ok(ConvergenceTable { rows, stabilized_from })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxDimension {
    pub m: u64,
    /// (Σ_s α_s log α_s − Σ α^(m) log α^(m)) / Σ α^(m) log N^(m)
    pub beta_m: f64,
    /// R_m of the base system.
    pub r_m: f64,
    pub e_m: f64,
    /// e_m · R_m, a lower bound for `beta_m`.
    pub bound: f64,
    pub bound_holds: bool,
}

/// Finite-approximant dimension value next to the e_m-corrected bound.
pub fn approximant_dimension(family: &Family, alpha: &FrequencyVector, m: u64) -> Result<ApproxDimension> {
    let approx = approximate_family(family, m)?;
    let projected = project_frequency(family, alpha, &approx)?;
    let symbol_entropy: f64 = (0..family.len()).map(|s| x_log_x(alpha.weight(s))).sum();
    let (mut ent_m, mut lyap_m, mut ent_d, mut lyap_d, mut lyap_merged) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (s, sys) in approx.iter().enumerate() {
        for br in &sys.branches {
            let a = projected.get(s, br.digit).map_or(0.0, |e| e.alpha);
            let ln_n = if br.merged.is_some() { br.log_n() } else { family.system(s).log_n(br.digit) };
            ent_m += x_log_x(a);
            lyap_m += a * ln_n;
            if br.merged.is_none() {
                ent_d += x_log_x(a);
                lyap_d += a * ln_n;
            } else {
                lyap_merged += a * ln_n;
            }
        }
    }
    let beta_m = (symbol_entropy - ent_m) / lyap_m;
    let r_m = (symbol_entropy - ent_d) / lyap_d;
    let e_m = lyap_d / (lyap_d + lyap_merged);
    let bound = e_m * r_m;
    Ok(ApproxDimension { m, beta_m, r_m, e_m, bound, bound_holds: beta_m >= bound - 1e-12 })
}

fn x_log_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// N_{s,c} ≥ N^(m)_{s,b} and f_c([0,1]) ⊆ f^(m)_b([0,1]) for swallowed digits c
/// (open-ended ranges are checked on their first `scan` members).
pub fn domination_check(system: &GlsSystem, approx: &ApproxSystem, scan: u64) -> bool {
    approx.branches.iter().filter_map(|br| br.merged.as_ref().map(|r| (br, r))).all(|(br, range)| {
        let members: Vec<Digit> =
            if range.open { (range.first..range.first + scan).collect() } else { range.members.clone() };
        members.into_iter().all(|c| match (&br.exact, system.image_exact(c)) {
            (Some((gl, gr)), Some((l, r))) => l >= *gl && r <= *gr && (&r - &l) <= (gr - gl),
            _ => {
                let (l, r) = system.image(c);
                l >= br.left - 1e-15 && r <= br.right + 1e-15 && system.log_n(c) >= br.log_n() - 1e-12
            }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::ConditionalLaw;
    use crate::gls::Symbol;
    use crate::rational::frac;

    #[test]
    fn luroth_first_approximants() {
        let l = GlsSystem::luroth(Symbol::new("L"));
        let a1 = approximate_system(&l, 1).unwrap();
        assert_eq!(a1.breakpoints().unwrap(), vec![frac(1, 2)]);
        assert_eq!(a1.branch(2).unwrap().exact, Some((frac(0, 1), frac(1, 2))));
        let a2 = approximate_system(&l, 2).unwrap();
        assert_eq!(a2.breakpoints().unwrap(), vec![frac(1, 3), frac(1, 2)]);
        assert!(a2.validate().passed);
        assert!(domination_check(&l, &a2, 50));
    }

    #[test]
    fn finite_system_past_its_digits_is_unchanged() {
        let f = GlsSystem::binary(Symbol::new("B"));
        let a = approximate_system(&f, 5).unwrap();
        assert_eq!(a.branches.len(), 2);
        assert!(a.branches.iter().all(|b| b.merged.is_none()));
    }

    #[test]
    fn projected_masses() {
        let fam = Family::singleton(GlsSystem::luroth(Symbol::new("L")));
        let alpha = FrequencyVector::singleton(&fam, ConditionalLaw::geometric(frac(1, 2)).unwrap()).unwrap();
        let approx = approximate_family(&fam, 1).unwrap();
        let p = project_frequency(&fam, &alpha, &approx).unwrap();
        assert_eq!(p.get(0, 1).unwrap().exact, Some(frac(1, 2)));
        assert_eq!(p.get(0, 2).unwrap().exact, Some(frac(1, 2)));
        assert_eq!(p.total_exact(), Some(Rational::one()));
    }

    #[test]
    fn convergence_stabilizes_at_max_digit() {
        let fam = Family::singleton(GlsSystem::luroth(Symbol::new("L")));
        let alpha = FrequencyVector::singleton(&fam, ConditionalLaw::geometric(frac(1, 2)).unwrap()).unwrap();
        let omega = vec![0; 64];
        let t = measure_convergence_check(&fam, &omega, &alpha, &[3, 1, 2], 1..=6).unwrap();
        assert_eq!(t.stabilized_from, Some(3));
        assert!(t.rows.iter().filter(|r| r.m >= 3).all(|r| r.exact_match == Some(true)));
        let r1 = &t.rows[0];
        assert!(r1.log_mu_m < 0.0 && r1.error_bound < 1e-12, "{r1:?}");
    }

    #[test]
    fn approximant_bound_direction() {
        let fam = Family::singleton(GlsSystem::luroth(Symbol::new("L")));
        let alpha = FrequencyVector::singleton(&fam, ConditionalLaw::geometric(frac(1, 2)).unwrap()).unwrap();
        for m in [1, 2, 5, 10, 20] {
            let d = approximant_dimension(&fam, &alpha, m).unwrap();
            assert!(d.bound_holds, "{d:?}");
            assert!(d.e_m > 0.0 && d.e_m <= 1.0);
        }
    }
}
