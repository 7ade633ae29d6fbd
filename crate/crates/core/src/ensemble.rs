//! Canonical ensembles of occupation configurations on the centered lattice
//! `{-ell, ..., ell}` with two pinned observables: the particle number
//! `K = sum eta_k` and the weighted sum `M = sum k eta_k`.
//!
//! Everything exact in this module runs on one dynamic-programming table
//! indexed by (particles used, shifted weight used). The table supports both
//! adding a site and removing one in place, which turns "all marginals" and
//! "sequential exact sampling" into single sweeps instead of a rebuild per
//! site.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Particle-number/weighted-sum pair fixed by the ensemble, together with the
/// lattice half-width `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalSpec {
    ell: u32,
    k: u32,
    m: i64,
}

/// Hard cap on `ell` for the table-sweep operations (exact sampling and
/// exact marginals); the table cost grows like `ell^4`.
pub const EXACT_SWEEP_MAX_ELL: u32 = 80;

const BIG_TABLE_MAX_ENTRIES: usize = 8_000_000;
const LOG_TABLE_MAX_ENTRIES: usize = 25_000_000;
const ENUMERATION_MAX_ELL: u32 = 8;
const SPREAD_MAX_ELL: u32 = 10;

impl CanonicalSpec {
    pub fn new(ell: u32, k: u32, m: i64) -> Result<Self> {
        if ell < 1 {
            return Err(Error::OutOfDomain("ell must be at least 1".into()));
        }
        let n = 2 * ell as u64 + 1;
        if k as u64 > n {
            return Err(Error::InfeasibleConstraint(format!(
                "particle number {k} exceeds the {n} sites"
            )));
        }
        Ok(Self { ell, k, m })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Number of lattice sites, `2 ell + 1`.
    pub fn n(&self) -> u32 {
        2 * self.ell + 1
    }

    pub fn particle_number(&self) -> u32 {
        self.k
    }

    pub fn weighted_sum(&self) -> i64 {
        self.m
    }

    /// Extremes of the weighted sum at this particle number: the particles
    /// packed against either end of the lattice.
    pub fn weighted_sum_bounds(&self) -> (i64, i64) {
        let hw = self.k as i64 * (self.n() as i64 - self.k as i64) / 2;
        (-hw, hw)
    }

    /// Whether any configuration realizes `(K, M)`. Every integer `M` between
    /// the packed extremes is reachable, so this is just the interval test.
    pub fn feasible(&self) -> bool {
        2 * self.m.abs() <= self.k as i64 * (self.n() as i64 - self.k as i64)
    }

    /// Weighted sum after shifting site labels to `1..=n`, which is the
    /// quantity the tables are indexed by: `T = M + (ell + 1) K`.
    fn shifted_sum(&self) -> i64 {
        self.m + (self.ell as i64 + 1) * self.k as i64
    }
}

/// One occupation configuration on `{-ell, ..., ell}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParticleConfig {
    ell: u32,
    occupancy: Vec<u8>,
}

impl ParticleConfig {
    /// `occupancy[i]` is the indicator of site `i - ell`; entries must be 0
    /// or 1 and there must be exactly `2 ell + 1` of them.
    pub fn new(ell: u32, occupancy: Vec<u8>) -> Result<Self> {
        if occupancy.len() != 2 * ell as usize + 1 {
            return Err(Error::OutOfDomain(format!(
                "occupancy has {} entries, lattice has {}",
                occupancy.len(),
                2 * ell + 1
            )));
        }
        if occupancy.iter().any(|&e| e > 1) {
            return Err(Error::OutOfDomain("occupancy entries must be 0 or 1".into()));
        }
        Ok(Self { ell, occupancy })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occupancy
    }

    pub fn is_occupied(&self, site: i64) -> bool {
        let i = site + self.ell as i64;
        i >= 0 && (i as usize) < self.occupancy.len() && self.occupancy[i as usize] == 1
    }

    pub fn particle_number(&self) -> u32 {
        self.occupancy.iter().map(|&e| e as u32).sum()
    }

    pub fn weighted_sum(&self) -> i64 {
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(_, &e)| e == 1)
            .map(|(i, _)| i as i64 - self.ell as i64)
            .sum()
    }

    pub fn to_record(&self) -> ConfigRecord {
        ConfigRecord {
            ell: self.ell,
            k: self.particle_number(),
            m: self.weighted_sum(),
            occupancy: self.occupancy.clone(),
        }
    }
}

/// Serialization form of a configuration, with the conserved pair spelled out
/// so downstream readers need not recompute it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub ell: u32,
    pub k: u32,
    pub m: i64,
    pub occupancy: Vec<u8>,
}

impl ConfigRecord {
    pub fn into_config(self) -> Result<ParticleConfig> {
        let cfg = ParticleConfig::new(self.ell, self.occupancy)?;
        if cfg.particle_number() != self.k || cfg.weighted_sum() != self.m {
            return Err(Error::OutOfDomain(
                "record totals disagree with its occupancy".into(),
            ));
        }
        Ok(cfg)
    }
}

/// Counting table over a prefix of sites. `rows[k][t]` is the number of ways
/// to place `k` particles with shifted weight `t` using the sites currently
/// applied. Sites carry shifted weights `j = site + ell + 1` in `1..=n`.
struct DpTable {
    kmax: usize,
    tmax: usize,
    rows: Vec<Vec<BigUint>>,
}

impl DpTable {
    fn new(kmax: usize, tmax: usize) -> Self {
        let rows = (0..=kmax)
            .map(|k| {
                let mut r = vec![BigUint::zero(); tmax + 1];
                if k == 0 {
                    r[0] = BigUint::from(1u32);
                }
                r
            })
            .collect();
        Self { kmax, tmax, rows }
    }

    /// Add site `j` as available. Particle counts are filled top-down so each
    /// read of row `k - 1` sees the state from before this site.
    fn apply(&mut self, j: usize) {
        for k in (1..=self.kmax).rev() {
            let (lower, upper) = self.rows.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for t in (j..=self.tmax).rev() {
                if !prev[t - j].is_zero() {
                    cur[t] += &prev[t - j];
                }
            }
        }
    }

    /// Remove site `j`, exactly inverting [`DpTable::apply`]. Particle counts
    /// run bottom-up so row `k - 1` is already restored when row `k` reads it.
    fn unapply(&mut self, j: usize) {
        for k in 1..=self.kmax {
            let (lower, upper) = self.rows.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for t in j..=self.tmax {
                if !prev[t - j].is_zero() {
                    cur[t] -= &prev[t - j];
                }
            }
        }
    }

    fn get(&self, k: usize, t: i64) -> &BigUint {
        static ZERO: std::sync::LazyLock<BigUint> = std::sync::LazyLock::new(BigUint::zero);
        if t < 0 || t as usize > self.tmax {
            &ZERO
        } else {
            &self.rows[k][t as usize]
        }
    }
}

fn table_for(spec: &CanonicalSpec) -> Result<DpTable> {
    let kmax = spec.particle_number() as usize;
    let tmax = spec.shifted_sum();
    debug_assert!(tmax >= 0, "guarded by feasibility");
    let tmax = tmax as usize;
    let entries = (kmax + 1) * (tmax + 1);
    if entries > BIG_TABLE_MAX_ENTRIES {
        return Err(Error::CapExceeded(format!(
            "exact table would need {entries} entries (cap {BIG_TABLE_MAX_ENTRIES}); \
             use log_count or sampling estimates"
        )));
    }
    let mut table = DpTable::new(kmax, tmax);
    for j in 1..=spec.n() as usize {
        table.apply(j);
    }
    Ok(table)
}

/// Quotient of two counts as `f64`, accurate to a few ulps even when both
/// exceed the `f64` range: each operand is truncated to its top 53 bits and
/// the discarded scales are recombined as a power of two.
fn big_ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let ns = num.bits().saturating_sub(53);
    let ds = den.bits().saturating_sub(53);
    let nf = (num >> ns as usize).to_f64().expect("53-bit value");
    let df = (den >> ds as usize).to_f64().expect("53-bit value");
    (nf / df) * (ns as f64 - ds as f64).exp2()
}

/// Number of configurations with the given conserved pair. Zero when the
/// pair is infeasible.
pub fn count(spec: &CanonicalSpec) -> Result<BigUint> {
    if !spec.feasible() {
        return Ok(BigUint::zero());
    }
    let table = table_for(spec)?;
    Ok(table
        .get(spec.particle_number() as usize, spec.shifted_sum())
        .clone())
}

/// Natural log of [`count`], computed in log space with `f64` entries so it
/// scales past the exact-table cap. Returns `-inf` for infeasible pairs.
pub fn log_count(spec: &CanonicalSpec) -> Result<f64> {
    if !spec.feasible() {
        return Ok(f64::NEG_INFINITY);
    }
    let kmax = spec.particle_number() as usize;
    let tmax = spec.shifted_sum() as usize;
    let entries = (kmax + 1) * (tmax + 1);
    if entries > LOG_TABLE_MAX_ENTRIES {
        return Err(Error::CapExceeded(format!(
            "log-space table would need {entries} entries (cap {LOG_TABLE_MAX_ENTRIES})"
        )));
    }
    fn log_add(x: f64, y: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return y;
        }
        if y == f64::NEG_INFINITY {
            return x;
        }
        let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
        hi + (lo - hi).exp().ln_1p()
    }
    let mut rows = vec![vec![f64::NEG_INFINITY; tmax + 1]; kmax + 1];
    rows[0][0] = 0.0;
    for j in 1..=spec.n() as usize {
        for k in (1..=kmax).rev() {
            let (lower, upper) = rows.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for t in (j..=tmax).rev() {
                if prev[t - j] != f64::NEG_INFINITY {
                    cur[t] = log_add(cur[t], prev[t - j]);
                }
            }
        }
    }
    Ok(rows[kmax][tmax])
}

fn require_sweepable(spec: &CanonicalSpec) -> Result<()> {
    if spec.ell() > EXACT_SWEEP_MAX_ELL {
        return Err(Error::CapExceeded(format!(
            "ell = {} exceeds the exact-sweep cap {EXACT_SWEEP_MAX_ELL}",
            spec.ell()
        )));
    }
    if !spec.feasible() {
        return Err(Error::InfeasibleConstraint(format!(
            "no configuration has K = {}, M = {} on {} sites",
            spec.particle_number(),
            spec.weighted_sum(),
            spec.n()
        )));
    }
    Ok(())
}

/// Exact probability that all of `sites` are occupied under the uniform
/// measure on the constraint class. At most 4 sites.
pub fn exact_marginal(spec: &CanonicalSpec, sites: &[i64]) -> Result<f64> {
    require_sweepable(spec)?;
    if sites.is_empty() || sites.len() > 4 {
        return Err(Error::OutOfDomain(format!(
            "joint marginals cover 1 to 4 sites, got {}",
            sites.len()
        )));
    }
    let ell = spec.ell() as i64;
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sites.len() {
        return Err(Error::OutOfDomain("marginal sites must be distinct".into()));
    }
    if sites.iter().any(|&s| s < -ell || s > ell) {
        return Err(Error::OutOfDomain(format!(
            "marginal sites must lie in [{}, {}]",
            -ell, ell
        )));
    }
    if (sites.len() as u32) > spec.particle_number() {
        return Ok(0.0);
    }
    let mut table = table_for(spec)?;
    let total = table
        .get(spec.particle_number() as usize, spec.shifted_sum())
        .clone();
    if total.is_zero() {
        return Err(Error::InfeasibleConstraint("empty constraint class".into()));
    }
    let shifted: Vec<usize> = sites.iter().map(|&s| (s + ell + 1) as usize).collect();
    for &j in &shifted {
        table.unapply(j);
    }
    let k_rest = spec.particle_number() as usize - sites.len();
    let t_rest = spec.shifted_sum() - shifted.iter().sum::<usize>() as i64;
    let num = table.get(k_rest, t_rest).clone();
    for &j in &shifted {
        table.apply(j);
    }
    Ok(big_ratio_f64(&num, &total))
}

/// All one-site occupation probabilities, indexed so entry `i` is site
/// `i - ell`. One table build plus one remove/restore pass per site.
pub fn marginal_profile(spec: &CanonicalSpec) -> Result<Vec<f64>> {
    require_sweepable(spec)?;
    let mut table = table_for(spec)?;
    let kk = spec.particle_number() as usize;
    let tt = spec.shifted_sum();
    let total = table.get(kk, tt).clone();
    if total.is_zero() {
        return Err(Error::InfeasibleConstraint("empty constraint class".into()));
    }
    let mut out = Vec::with_capacity(spec.n() as usize);
    for j in 1..=spec.n() as usize {
        if kk == 0 {
            out.push(0.0);
            continue;
        }
        table.unapply(j);
        let num = table.get(kk - 1, tt - j as i64).clone();
        table.apply(j);
        out.push(big_ratio_f64(&num, &total));
    }
    Ok(out)
}

/// Uniform draw below `bound` by rejection on the top limb.
fn biguint_below(rng: &mut ChaCha12Rng, bound: &BigUint) -> BigUint {
    debug_assert!(!bound.is_zero());
    if let Some(b) = bound.to_u64() {
        return BigUint::from(rng.random_range(0..b));
    }
    let bits = bound.bits();
    let limbs = bits.div_ceil(64);
    let top = bits - 64 * (limbs - 1);
    let mask = if top == 64 { u64::MAX } else { (1u64 << top) - 1 };
    loop {
        let mut digits = Vec::with_capacity(2 * limbs as usize);
        for i in 0..limbs {
            let mut w: u64 = rng.random();
            if i == limbs - 1 {
                w &= mask;
            }
            digits.push(w as u32);
            digits.push((w >> 32) as u32);
        }
        let cand = BigUint::new(digits);
        if &cand < bound {
            return cand;
        }
    }
}

/// Draw `n_samples` configurations exactly uniformly from the constraint
/// class. Deterministic in `(spec, n_samples, seed)`.
///
/// Sites are decided from the top of the lattice down; the table is shrunk
/// once per site and shared by all samples, so the per-sample work is just
/// two lookups and one exact Bernoulli draw per site.
pub fn sample_exact(
    spec: &CanonicalSpec,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<ParticleConfig>> {
    require_sweepable(spec)?;
    let n = spec.n() as usize;
    let mut table = table_for(spec)?;
    if table
        .get(spec.particle_number() as usize, spec.shifted_sum())
        .is_zero()
    {
        return Err(Error::InfeasibleConstraint("empty constraint class".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut occ = vec![vec![0u8; n]; n_samples];
    let mut k_rem = vec![spec.particle_number() as usize; n_samples];
    let mut t_rem = vec![spec.shifted_sum(); n_samples];
    for j in (1..=n).rev() {
        table.unapply(j);
        for s in 0..n_samples {
            let n1 = if k_rem[s] >= 1 {
                table.get(k_rem[s] - 1, t_rem[s] - j as i64).clone()
            } else {
                BigUint::zero()
            };
            let n0 = table.get(k_rem[s], t_rem[s]).clone();
            let bound = &n0 + &n1;
            debug_assert!(!bound.is_zero(), "state must stay reachable");
            let occupied = if n1.is_zero() {
                false
            } else if n0.is_zero() {
                true
            } else {
                biguint_below(&mut rng, &bound) < n1
            };
            if occupied {
                occ[s][j - 1] = 1;
                k_rem[s] -= 1;
                t_rem[s] -= j as i64;
            }
        }
    }
    occ.into_iter()
        .map(|o| ParticleConfig::new(spec.ell(), o))
        .collect()
}

/// The configuration that packs particles against the lower edge and then
/// shifts them, topmost first, until the weighted sum is met. Used as the
/// deterministic chain start.
pub fn staircase(spec: &CanonicalSpec) -> Result<ParticleConfig> {
    if !spec.feasible() {
        return Err(Error::InfeasibleConstraint(format!(
            "no configuration has K = {}, M = {} on {} sites",
            spec.particle_number(),
            spec.weighted_sum(),
            spec.n()
        )));
    }
    let n = spec.n() as usize;
    let kk = spec.particle_number() as usize;
    let mut occ = vec![0u8; n];
    let free = (n - kk) as i64;
    let mut shortfall = spec.weighted_sum() - spec.weighted_sum_bounds().0;
    for i in (0..kk).rev() {
        let s = shortfall.min(free);
        occ[i + s as usize] = 1;
        shortfall -= s;
    }
    debug_assert_eq!(shortfall, 0);
    ParticleConfig::new(spec.ell(), occ)
}

/// Burn-in and thinning for [`sample_mcmc`], in sweeps (one sweep is `n`
/// proposals).
#[derive(Debug, Clone, Copy)]
pub struct McmcOptions {
    pub burn_in_sweeps: u64,
    pub thin_sweeps: u64,
}

impl McmcOptions {
    /// Defaults scaled to the diffusive relaxation of the chain, which mixes
    /// in order `n^2` sweeps.
    pub fn for_size(ell: u32) -> Self {
        let n = 2 * ell as u64 + 1;
        Self {
            burn_in_sweeps: (n * n / 4).max(2_000),
            thin_sweeps: (n * n / 32).max(50),
        }
    }
}

/// Kawasaki-type pair dynamics: pick two distinct occupied sites, move one up
/// and the other down by one step. Both conserved quantities are invariant,
/// the proposal is symmetric, and every class is connected, so the chain is
/// uniform on the class. Deterministic in `(spec, n_samples, opts, seed)`.
pub fn sample_mcmc(
    spec: &CanonicalSpec,
    n_samples: usize,
    opts: McmcOptions,
    seed: u64,
) -> Result<Vec<ParticleConfig>> {
    let start = staircase(spec)?;
    let kk = spec.particle_number() as usize;
    if kk < 2 || kk as u32 >= spec.n() {
        // At most one configuration exists; the chain is constant.
        return Ok(vec![start; n_samples]);
    }
    let n = spec.n() as usize;
    let mut occ: Vec<bool> = start.occupancy().iter().map(|&e| e == 1).collect();
    let mut occupied: Vec<usize> = occ
        .iter()
        .enumerate()
        .filter(|(_, &o)| o)
        .map(|(i, _)| i)
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let step = |occ: &mut Vec<bool>, occupied: &mut Vec<usize>, rng: &mut ChaCha12Rng| {
        let ia = rng.random_range(0..kk);
        let ib = rng.random_range(0..kk);
        let d: i64 = if rng.random::<bool>() { 1 } else { -1 };
        if ia == ib {
            return;
        }
        let a = occupied[ia] as i64;
        let b = occupied[ib] as i64;
        let ta = a + d;
        let tb = b - d;
        if ta < 0 || tb < 0 || ta >= n as i64 || tb >= n as i64 || ta == tb {
            return;
        }
        let (ta, tb) = (ta as usize, tb as usize);
        // Targets must be free once the two movers have left.
        let ta_free = !occ[ta] || ta == b as usize;
        let tb_free = !occ[tb] || tb == a as usize;
        if !(ta_free && tb_free) {
            return;
        }
        occ[a as usize] = false;
        occ[b as usize] = false;
        occ[ta] = true;
        occ[tb] = true;
        occupied[ia] = ta;
        occupied[ib] = tb;
    };
    let sweep = n as u64;
    for _ in 0..opts.burn_in_sweeps * sweep {
        step(&mut occ, &mut occupied, &mut rng);
    }
    let mut out = Vec::with_capacity(n_samples);
    for s in 0..n_samples {
        if s > 0 {
            for _ in 0..opts.thin_sweeps.max(1) * sweep {
                step(&mut occ, &mut occupied, &mut rng);
            }
        }
        let bytes: Vec<u8> = occ.iter().map(|&o| o as u8).collect();
        out.push(ParticleConfig::new(spec.ell(), bytes)?);
    }
    Ok(out)
}

/// Per-site empirical occupation means over a batch of configurations drawn
/// from the same lattice.
pub fn site_means(samples: &[ParticleConfig]) -> Result<Vec<f64>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::OutOfDomain("no samples".into()))?;
    let n = first.occupancy().len();
    let mut acc = vec![0.0f64; n];
    for s in samples {
        if s.ell() != first.ell() {
            return Err(Error::OutOfDomain("samples mix lattice sizes".into()));
        }
        for (a, &e) in acc.iter_mut().zip(s.occupancy()) {
            *a += e as f64;
        }
    }
    let inv = 1.0 / samples.len() as f64;
    for a in &mut acc {
        *a *= inv;
    }
    Ok(acc)
}

/// Every configuration in the constraint class, by direct enumeration.
/// Exponential in the lattice size, hence the small cap.
pub fn enumerate_class(spec: &CanonicalSpec) -> Result<Vec<ParticleConfig>> {
    if spec.ell() > ENUMERATION_MAX_ELL {
        return Err(Error::CapExceeded(format!(
            "enumeration is capped at ell = {ENUMERATION_MAX_ELL}, got {}",
            spec.ell()
        )));
    }
    let n = spec.n() as usize;
    let ell = spec.ell() as i64;
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() != spec.particle_number() {
            continue;
        }
        let m: i64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| i as i64 - ell)
            .sum();
        if m != spec.weighted_sum() {
            continue;
        }
        let occ = (0..n).map(|i| (mask >> i & 1) as u8).collect();
        out.push(ParticleConfig::new(spec.ell(), occ)?);
    }
    Ok(out)
}

/// Total-variation distance between the empirical distribution of `samples`
/// and the uniform distribution on the constraint class. Enumeration-backed,
/// so only small lattices.
pub fn tv_to_uniform(spec: &CanonicalSpec, samples: &[ParticleConfig]) -> Result<f64> {
    let class = enumerate_class(spec)?;
    if class.is_empty() {
        return Err(Error::InfeasibleConstraint("empty constraint class".into()));
    }
    if samples.is_empty() {
        return Err(Error::OutOfDomain("no samples".into()));
    }
    let mut index: HashMap<&ParticleConfig, usize> = HashMap::new();
    for (i, c) in class.iter().enumerate() {
        index.insert(c, i);
    }
    let mut freq = vec![0u64; class.len()];
    for s in samples {
        match index.get(s) {
            Some(&i) => freq[i] += 1,
            None => {
                return Err(Error::OutOfDomain(
                    "sample falls outside the constraint class".into(),
                ))
            }
        }
    }
    let total = samples.len() as f64;
    let uniform = 1.0 / class.len() as f64;
    Ok(0.5
        * freq
            .iter()
            .map(|&f| (f as f64 / total - uniform).abs())
            .sum::<f64>())
}

/// Largest relative weight spread within any constraint class, when sites are
/// occupied independently with probabilities `beta_at(x_k)`, `x_k = k / ell`.
///
/// A product measure conditions to the uniform measure on every class exactly
/// when its odds are exponential in the site index; for such profiles this
/// statistic vanishes to rounding, while generic profiles give order-one
/// spreads. Enumeration-backed.
pub fn uniformity_spread(ell: u32, beta_at: impl Fn(f64) -> f64) -> Result<f64> {
    if !(1..=SPREAD_MAX_ELL).contains(&ell) {
        return Err(Error::CapExceeded(format!(
            "uniformity check is capped at ell = {SPREAD_MAX_ELL}, got {ell}"
        )));
    }
    let n = 2 * ell as usize + 1;
    let mut log_p = Vec::with_capacity(n);
    let mut log_q = Vec::with_capacity(n);
    for i in 0..n {
        let x = (i as f64 - ell as f64) / ell as f64;
        let p = beta_at(x);
        if !(p.is_finite() && p > 0.0 && p < 1.0) {
            return Err(Error::OutOfDomain(format!(
                "profile value {p} at x = {x} is not in (0, 1)"
            )));
        }
        log_p.push(p.ln());
        log_q.push((-p).ln_1p());
    }
    let mut classes: HashMap<(u32, i64), Vec<f64>> = HashMap::new();
    for mask in 0u32..(1u32 << n) {
        let mut lw = 0.0;
        let mut m = 0i64;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                lw += log_p[i];
                m += i as i64 - ell as i64;
            } else {
                lw += log_q[i];
            }
        }
        classes.entry((mask.count_ones(), m)).or_default().push(lw);
    }
    let mut worst = 0.0f64;
    for lws in classes.values() {
        let mx = lws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mn = lws.iter().cloned().fold(f64::INFINITY, f64::min);
        let denom: f64 = lws.iter().map(|&lw| (lw - mx).exp()).sum();
        worst = worst.max((-(mn - mx).exp_m1()) / denom);
    }
    Ok(worst)
}
