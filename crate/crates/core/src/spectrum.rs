//! Exact spectrum of the sub-Laplacian on the compact quotient
//! `M = Γ \ H3` with `Γ = (√(2π) ℤ)² × π ℤ`.
//!
//! The spectrum splits into two sectors:
//!
//! * the **Heisenberg sector** (nonzero central frequency), with eigenvalues
//!   `2m(2l+1)` for `m ≥ 1, l ≥ 0`, each of multiplicity `2m`;
//! * the **torus sector** (functions independent of `z`), which is the flat
//!   Laplacian of `ℝ² / (√(2π) ℤ)²`. A plane wave `exp(i⟨ξ, (x, y)⟩)` is
//!   invariant under the lattice translations exactly when `ξ ∈ √(2π) ℤ²`,
//!   so the eigenvalues are `2π (k1² + k2²)`. The constant function (the zero
//!   eigenvalue) lives here.
//!
//! Equal eigenvalues are merged on exact integer keys: `2m(2l+1)` in the
//! Heisenberg sector and the shell index `k1² + k2²` in the torus sector.
//! No floating-point equality test is ever used.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of sample points of the logarithmic grid used by [`weyl_fit`].
pub const WEYL_GRID_POINTS: usize = 257;

/// Minimum eigenvalue count required before a Weyl fit is attempted.
pub const WEYL_MIN_COUNT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Heisenberg,
    Torus,
}

impl Sector {
    pub fn name(self) -> &'static str {
        match self {
            Sector::Heisenberg => "heisenberg",
            Sector::Torus => "torus",
        }
    }
}

/// A nonempty selection of sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sectors {
    pub heisenberg: bool,
    pub torus: bool,
}

impl Sectors {
    pub const HEISENBERG: Sectors = Sectors {
        heisenberg: true,
        torus: false,
    };
    pub const TORUS: Sectors = Sectors {
        heisenberg: false,
        torus: true,
    };
    pub const ALL: Sectors = Sectors {
        heisenberg: true,
        torus: true,
    };

    pub fn contains(self, sector: Sector) -> bool {
        match sector {
            Sector::Heisenberg => self.heisenberg,
            Sector::Torus => self.torus,
        }
    }

    pub fn is_empty(self) -> bool {
        !self.heisenberg && !self.torus
    }
}

impl Default for Sectors {
    fn default() -> Self {
        Sectors::HEISENBERG
    }
}

/// Quantum numbers labelling a single eigenfunction family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Indices {
    Heisenberg { m: u64, l: u64 },
    Torus { k1: i64, k2: i64 },
}

/// One eigenvalue with its multiplicity.
///
/// `key` is the exact integer the entry is merged on. `indices` is present
/// when the entry stems from a single quantum-number pair and absent for
/// merged entries with several contributors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub value: f64,
    pub key: u64,
    pub multiplicity: u64,
    pub sector: Sector,
    pub indices: Option<Indices>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumQuery {
    pub lambda_max: f64,
    pub sectors: Sectors,
    pub merge_equal: bool,
}

impl SpectrumQuery {
    pub fn new(lambda_max: f64, sectors: Sectors, merge_equal: bool) -> Result<Self> {
        let q = SpectrumQuery {
            lambda_max,
            sectors,
            merge_equal,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_max > 0.0) || !self.lambda_max.is_finite() {
            return Err(Error::domain(format!(
                "lambda_max must be positive and finite, got {}",
                self.lambda_max
            )));
        }
        if self.sectors.is_empty() {
            return Err(Error::domain("sector selection is empty"));
        }
        Ok(())
    }
}

/// Largest `k` with `2k ≤ λ`, i.e. the largest half-eigenvalue in range.
fn half_floor(lambda: f64) -> u64 {
    (lambda / 2.0).floor() as u64
}

/// All Heisenberg-sector eigenvalues `2m(2l+1) ≤ lambda_max`.
///
/// Unmerged output lists one entry per pair `(m, l)` ordered by value and
/// then by `m`; merged output has one entry per distinct value.
pub fn enumerate_heisenberg(q: &SpectrumQuery) -> Result<Vec<EigenEntry>> {
    q.validate()?;
    let kmax = half_floor(q.lambda_max);
    let mut pairs = Vec::new();
    for m in 1..=kmax {
        // 2m(2l+1) ≤ 2 kmax  ⇔  2l+1 ≤ kmax / m
        let mut odd = 1;
        while m * odd <= kmax {
            pairs.push((m * odd, m, (odd - 1) / 2));
            odd += 2;
        }
    }
    pairs.sort_unstable();
    let entry = |half: u64, m: u64, l: u64| EigenEntry {
        value: (2 * half) as f64,
        key: 2 * half,
        multiplicity: 2 * m,
        sector: Sector::Heisenberg,
        indices: Some(Indices::Heisenberg { m, l }),
    };
    if !q.merge_equal {
        return Ok(pairs.into_iter().map(|(h, m, l)| entry(h, m, l)).collect());
    }
    let mut merged: Vec<EigenEntry> = Vec::new();
    for (half, m, l) in pairs {
        match merged.last_mut() {
            Some(last) if last.key == 2 * half => {
                last.multiplicity += 2 * m;
                last.indices = None;
            }
            _ => merged.push(entry(half, m, l)),
        }
    }
    Ok(merged)
}

/// Merged Heisenberg levels as `(value, multiplicity)` pairs, computed with a
/// divisor sieve. Used where millions of levels are needed and per-entry
/// metadata would be wasteful.
pub fn heisenberg_levels(lambda_max: f64) -> Result<Vec<(u64, u64)>> {
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::domain(format!(
            "lambda_max must be positive and finite, got {lambda_max}"
        )));
    }
    let kmax = half_floor(lambda_max) as usize;
    let mut mult = vec![0u64; kmax + 1];
    for m in 1..=kmax {
        let mut k = m;
        while k <= kmax {
            mult[k] += 2 * m as u64;
            k += 2 * m;
        }
    }
    Ok(mult
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(k, c)| (2 * k as u64, c))
        .collect())
}

/// Flat-torus eigenvalue of the lattice point `(k1, k2)`.
pub fn torus_eigenvalue(k1: i64, k2: i64) -> f64 {
    2.0 * PI * torus_shell(k1, k2) as f64
}

fn torus_shell(k1: i64, k2: i64) -> u64 {
    (k1 * k1 + k2 * k2) as u64
}

/// All torus-sector eigenvalues `2π(k1² + k2²) ≤ lambda_max`, including the
/// zero mode.
pub fn enumerate_torus(q: &SpectrumQuery) -> Result<Vec<EigenEntry>> {
    q.validate()?;
    let radius = (q.lambda_max / (2.0 * PI)).sqrt().floor() as i64 + 1;
    let mut points = Vec::new();
    for k1 in -radius..=radius {
        for k2 in -radius..=radius {
            if torus_eigenvalue(k1, k2) <= q.lambda_max {
                points.push((torus_shell(k1, k2), k1, k2));
            }
        }
    }
    points.sort_unstable();
    let entry = |s: u64, k1: i64, k2: i64| EigenEntry {
        value: 2.0 * PI * s as f64,
        key: s,
        multiplicity: 1,
        sector: Sector::Torus,
        indices: Some(Indices::Torus { k1, k2 }),
    };
    if !q.merge_equal {
        return Ok(points.into_iter().map(|(s, a, b)| entry(s, a, b)).collect());
    }
    let mut shells: BTreeMap<u64, EigenEntry> = BTreeMap::new();
    for (s, k1, k2) in points {
        shells
            .entry(s)
            .and_modify(|e| {
                e.multiplicity += 1;
                e.indices = None;
            })
            .or_insert_with(|| entry(s, k1, k2));
    }
    Ok(shells.into_values().collect())
}

/// Spectrum of the selected sectors, sorted by value.
///
/// Heisenberg values are even integers and nonzero torus values are
/// irrational, so the two sectors never share an eigenvalue; a merged list is
/// strictly increasing.
pub fn enumerate(q: &SpectrumQuery) -> Result<Vec<EigenEntry>> {
    q.validate()?;
    let mut out = Vec::new();
    if q.sectors.torus {
        out.extend(enumerate_torus(q)?);
    }
    if q.sectors.heisenberg {
        out.extend(enumerate_heisenberg(q)?);
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.sector.cmp(&b.sector)));
    Ok(out)
}

/// Eigenvalue counting function `N(λ) = #{j : λ_j ≤ λ}` with multiplicity.
pub fn counting_function(lambda: f64, sectors: Sectors) -> Result<u64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "counting function needs a finite lambda ≥ 0, got {lambda}"
        )));
    }
    if sectors.is_empty() {
        return Err(Error::domain("sector selection is empty"));
    }
    let mut n = 0;
    if sectors.heisenberg {
        n += heisenberg_count(lambda);
    }
    if sectors.torus {
        n += torus_count(lambda);
    }
    Ok(n)
}

fn heisenberg_count(lambda: f64) -> u64 {
    let kmax = half_floor(lambda);
    // For fixed m the admissible odd factors are 1, 3, …, ≤ kmax / m.
    (1..=kmax).map(|m| 2 * m * (kmax / m).div_ceil(2)).sum()
}

fn torus_count(lambda: f64) -> u64 {
    let radius = (lambda / (2.0 * PI)).sqrt().floor() as i64 + 1;
    let mut n = 0;
    for k1 in -radius..=radius {
        let mut k2 = 0;
        while torus_eigenvalue(k1, k2 + 1) <= lambda {
            k2 += 1;
        }
        if torus_eigenvalue(k1, 0) <= lambda {
            n += 2 * k2 as u64 + 1;
        }
    }
    n
}

/// Leading Weyl constant of the Heisenberg sector, `N(λ) ~ C λ²`.
///
/// It follows from the leading heat-trace term `π² / (16 z²)` by Karamata's
/// Tauberian theorem: `C = (π²/16) / Γ(3) = π² / 32`.
pub fn heisenberg_weyl_constant() -> f64 {
    PI * PI / 32.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylFit {
    pub c_hat: f64,
    pub relative_residual: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

/// Least-squares fit of `N(λ) ≈ C λ²` on `[lambda_max / 2, lambda_max]`.
pub fn weyl_fit(lambda_max: f64, sectors: Sectors) -> Result<WeylFit> {
    weyl_fit_window(lambda_max / 2.0, lambda_max, sectors)
}

/// Least-squares fit of `N(λ) ≈ C λ²` over a logarithmic grid on `[lo, hi]`.
pub fn weyl_fit_window(lo: f64, hi: f64, sectors: Sectors) -> Result<WeylFit> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::domain(format!(
            "Weyl fit window must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    let top = counting_function(hi, sectors)?;
    if top < WEYL_MIN_COUNT {
        return Err(Error::Precondition(format!(
            "N({hi}) = {top} eigenvalues, a Weyl fit needs at least {WEYL_MIN_COUNT}"
        )));
    }
    let ratio = (hi / lo).ln();
    let mut samples = Vec::with_capacity(WEYL_GRID_POINTS);
    for i in 0..WEYL_GRID_POINTS {
        let lambda = lo * (ratio * i as f64 / (WEYL_GRID_POINTS - 1) as f64).exp();
        let n = counting_function(lambda, sectors)? as f64;
        samples.push((lambda, n));
    }
    let num: f64 = samples.iter().map(|(l, n)| n * l * l).sum();
    let den: f64 = samples.iter().map(|(l, _)| l.powi(4)).sum();
    let c_hat = num / den;
    let res: f64 = samples
        .iter()
        .map(|(l, n)| (n - c_hat * l * l).powi(2))
        .sum();
    let norm: f64 = samples.iter().map(|(_, n)| n * n).sum();
    Ok(WeylFit {
        c_hat,
        relative_residual: (res / norm).sqrt(),
        lambda_lo: lo,
        lambda_hi: hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn merged(lambda_max: f64) -> Vec<(u64, u64)> {
        let q = SpectrumQuery::new(lambda_max, Sectors::HEISENBERG, true).unwrap();
        enumerate_heisenberg(&q)
            .unwrap()
            .into_iter()
            .map(|e| (e.key, e.multiplicity))
            .collect()
    }

    #[test]
    fn lowest_level() {
        assert_eq!(merged(2.0), vec![(2, 2)]);
        assert!(merged(1.0).is_empty());
    }

    #[test]
    fn merges_coincident_levels() {
        // 6 = 2·3·1 (m = 3) = 2·1·3 (m = 1, l = 1)
        assert_eq!(merged(6.0), vec![(2, 2), (4, 4), (6, 8)]);
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        assert!(SpectrumQuery::new(0.0, Sectors::HEISENBERG, true).is_err());
        assert!(SpectrumQuery::new(-3.0, Sectors::TORUS, true).is_err());
        assert!(SpectrumQuery::new(f64::NAN, Sectors::TORUS, true).is_err());
        let bad = SpectrumQuery {
            lambda_max: 0.0,
            sectors: Sectors::TORUS,
            merge_equal: true,
        };
        assert_eq!(enumerate_torus(&bad).unwrap_err().kind(), "domain");
    }

    #[test]
    fn torus_zero_mode_and_first_shell() {
        let q = SpectrumQuery::new(1e-9, Sectors::TORUS, true).unwrap();
        let s = enumerate_torus(&q).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].value, s[0].multiplicity), (0.0, 1));

        let q = SpectrumQuery::new(2.0 * PI + 1e-9, Sectors::TORUS, true).unwrap();
        let s = enumerate_torus(&q).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].multiplicity, 4);
        assert_eq!(s[1].value, 2.0 * PI);
    }

    #[test]
    fn counting_examples() {
        assert_eq!(counting_function(2.0, Sectors::HEISENBERG).unwrap(), 2);
        assert_eq!(counting_function(0.0, Sectors::HEISENBERG).unwrap(), 0);
        assert_eq!(counting_function(6.0, Sectors::HEISENBERG).unwrap(), 14);
        assert_eq!(counting_function(0.0, Sectors::TORUS).unwrap(), 1);
        assert!(counting_function(-1.0, Sectors::ALL).is_err());
    }

    #[test]
    fn sieve_matches_enumeration() {
        let a = heisenberg_levels(500.0).unwrap();
        assert_eq!(a, merged(500.0));
    }

    #[test]
    fn weyl_fit_needs_enough_eigenvalues() {
        let err = weyl_fit(2.0, Sectors::HEISENBERG).unwrap_err();
        assert_eq!(err.kind(), "precondition");
    }

    #[test]
    fn all_sectors_list_is_strictly_increasing() {
        let q = SpectrumQuery::new(80.0, Sectors::ALL, true).unwrap();
        let s = enumerate(&q).unwrap();
        assert!(s.windows(2).all(|w| w[0].value < w[1].value));
        assert_eq!(s[0].value, 0.0);
        assert_eq!(s[0].sector, Sector::Torus);
    }

    #[test]
    fn torus_modes_descend_and_have_the_listed_eigenvalues() {
        // f = exp(i√(2π)(k1 x + k2 y)) is z-independent, so X = ∂x and Y = ∂y on it.
        let s = (2.0 * PI).sqrt();
        let h = 1e-3;
        for (k1, k2) in [(1i64, 0i64), (2, -1), (-3, 2)] {
            let f = |x: f64, y: f64| {
                let ph = s * (k1 as f64 * x + k2 as f64 * y);
                (ph.cos(), ph.sin())
            };
            let (x, y) = (0.37, -1.21);
            let (a, b) = (f(x, y), f(x + s, y - 2.0 * s));
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
            // Fourth-order five-point Laplacian, real part.
            let d2 = |g: &dyn Fn(f64) -> f64, t: f64| {
                (-g(t + 2.0 * h) + 16.0 * g(t + h) - 30.0 * g(t) + 16.0 * g(t - h) - g(t - 2.0 * h))
                    / (12.0 * h * h)
            };
            let lap = d2(&|t| f(t, y).0, x) + d2(&|t| f(x, t).0, y);
            let lambda = torus_eigenvalue(k1, k2);
            assert!(
                (lap + lambda * a.0).abs() < 1e-6 * (1.0 + lambda),
                "{lap} vs {}",
                -lambda * a.0
            );
        }
    }
}
