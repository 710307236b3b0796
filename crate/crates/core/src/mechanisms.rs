//! Data release mechanisms: permutation swapping, its cross-stratum variant,
//! randomized response, and the constant and identity baselines. Each
//! mechanism has a seeded sampler; all but the cross-stratum variant also have
//! an exact output-distribution oracle for small instances.
//!
//! RNG contract: samplers are deterministic given the seed. Per-stratum
//! randomness comes from substreams derived from (seed, stratum key), so the
//! processing order of strata cannot change results.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use crate::divergences::OutputDistribution;
use crate::error::{Error, Result};
use crate::exact::{format_rational, rat_one, rat_pow, rat_to_f64, rat_zero, Rational};
use crate::schema::Dataset;
use crate::Caps;

/// Partitions record positions into strata keyed by the matching-variable
/// value tuple. An empty matching set yields one global stratum.
pub fn stratify(x: &Dataset) -> BTreeMap<Vec<u16>, Vec<usize>> {
    let matching = x.schema().matching_vars();
    let mut strata: BTreeMap<Vec<u16>, Vec<usize>> = BTreeMap::new();
    for i in 0..x.n() {
        let key: Vec<u16> = matching.iter().map(|&v| x.record(i)[v]).collect();
        strata.entry(key).or_default().push(i);
    }
    strata
}

fn stratum_name(x: &Dataset, key: &[u16]) -> String {
    let matching = x.schema().matching_vars();
    if matching.is_empty() {
        return "(global)".into();
    }
    matching
        .iter()
        .zip(key)
        .map(|(&v, &val)| {
            format!(
                "{}={}",
                x.schema().variables()[v].name,
                x.schema().variables()[v].values[val as usize]
            )
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn substream(seed: u64, domain: &str, key: &[u16]) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(domain.as_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.update((key.len() as u64).to_le_bytes());
    for v in key {
        hasher.update(v.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut seed_bytes = [0u8; 32];
    seed_bytes.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(seed_bytes)
}

fn check_rate(name: &str, value: &Rational) -> Result<f64> {
    if value < &rat_zero() || value > &rat_one() {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {}",
            format_rational(value)
        )));
    }
    Ok(rat_to_f64(value))
}

fn require_swapping_vars(x: &Dataset) -> Result<Vec<usize>> {
    let vars = x.schema().swapping_vars();
    if vars.is_empty() {
        return Err(Error::InvalidParameter(
            "schema has no swapping variable".into(),
        ));
    }
    Ok(vars)
}

/// A drawn swap: per-stratum selected positions and the permutation applied
/// to their swapping-value blocks.
#[derive(Debug, Clone)]
pub struct SwapPlan {
    /// Stratum key to ascending selected positions.
    pub selected: BTreeMap<Vec<u16>, Vec<usize>>,
    /// Stratum key to a permutation of `0..selected.len()`; slot `i` receives
    /// the block of `selected[perm[i]]`.
    pub permutation: BTreeMap<Vec<u16>, Vec<usize>>,
}

impl SwapPlan {
    /// Selects each position independently at rate `p` within its stratum and
    /// draws a uniformly random permutation of each stratum's selection.
    pub fn draw(x: &Dataset, p: &Rational, seed: u64) -> Result<SwapPlan> {
        require_swapping_vars(x)?;
        let p_f = check_rate("swap rate", p)?;
        let mut selected = BTreeMap::new();
        let mut permutation = BTreeMap::new();
        for (key, positions) in stratify(x) {
            let mut rng = substream(seed, "swap", &key);
            let sel: Vec<usize> = positions
                .iter()
                .copied()
                .filter(|_| rng.gen::<f64>() < p_f)
                .collect();
            let perm = random_permutation(sel.len(), &mut rng);
            selected.insert(key.clone(), sel);
            permutation.insert(key, perm);
        }
        Ok(SwapPlan {
            selected,
            permutation,
        })
    }

    /// Reassigns swapping-value blocks along the permutation; holding values
    /// are untouched.
    pub fn apply(&self, x: &Dataset) -> Result<Dataset> {
        let swap_vars = require_swapping_vars(x)?;
        let mut out = x.clone();
        for (key, sel) in &self.selected {
            let perm = &self.permutation[key];
            assert_eq!(perm.len(), sel.len(), "permutation domain mismatch");
            let blocks: Vec<Vec<u16>> = sel.iter().map(|&i| x.swap_block(i, &swap_vars)).collect();
            for (slot, &src) in perm.iter().enumerate() {
                out.set_swap_block(sel[slot], &swap_vars, &blocks[src]);
            }
        }
        Ok(out)
    }
}

fn random_permutation(len: usize, rng: &mut ChaCha12Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// One seeded draw of the permutation swapping mechanism.
pub fn psa_sample(x: &Dataset, p: &Rational, seed: u64) -> Result<Dataset> {
    SwapPlan::draw(x, p, seed)?.apply(x)
}

/// Exact support of permutation swapping, as datasets with masses, sorted by
/// canonical label.
///
/// Within each stratum of size `m`, sums over all `2^m` selections (each with
/// probability `p^|S| (1-p)^(m-|S|)`) and all `|S|!` permutations (each with
/// probability `1/|S|!`); strata compose independently. Outputs are
/// canonicalized, so permutations of equal blocks collapse onto one atom and
/// the total mass is exactly 1.
pub fn psa_exact_support(
    x: &Dataset,
    p: &Rational,
    caps: &Caps,
) -> Result<Vec<(Dataset, Rational)>> {
    let swap_vars = require_swapping_vars(x)?;
    check_rate("swap rate", p)?;
    let strata = stratify(x);
    for (key, positions) in &strata {
        if positions.len() > caps.stratum {
            return Err(Error::CapExceeded {
                what: format!("stratum {}", stratum_name(x, key)),
                estimate: positions.len() as u128,
                cap: caps.stratum as u128,
            });
        }
    }

    // Accumulate the product over strata directly on datasets.
    let mut acc: BTreeMap<String, (Dataset, Rational)> = BTreeMap::new();
    acc.insert(x.canonical_label(), (x.clone(), rat_one()));
    for (_, positions) in &strata {
        let local = stratum_swap_distribution(x, positions, &swap_vars, p);
        let mut next: BTreeMap<String, (Dataset, Rational)> = BTreeMap::new();
        for (ds, pr) in acc.values() {
            for (blocks, share) in &local {
                let mut out = ds.clone();
                for (&pos, block) in positions.iter().zip(blocks) {
                    out.set_swap_block(pos, &swap_vars, block);
                }
                let label = out.canonical_label();
                let entry = next.entry(label).or_insert_with(|| (out, rat_zero()));
                entry.1 += pr.clone() * share;
            }
        }
        acc = next;
    }
    Ok(acc.into_values().collect())
}

/// Exact output distribution of permutation swapping; see
/// [`psa_exact_support`].
pub fn psa_exact_distribution(
    x: &Dataset,
    p: &Rational,
    caps: &Caps,
) -> Result<OutputDistribution> {
    OutputDistribution::from_map(
        psa_exact_support(x, p, caps)?
            .into_iter()
            .map(|(ds, pr)| (ds.canonical_label(), pr))
            .collect(),
    )
}

/// Distribution over the block assignment of one stratum's positions.
fn stratum_swap_distribution(
    x: &Dataset,
    positions: &[usize],
    swap_vars: &[usize],
    p: &Rational,
) -> BTreeMap<Vec<Vec<u16>>, Rational> {
    let m = positions.len();
    let blocks: Vec<Vec<u16>> = positions
        .iter()
        .map(|&i| x.swap_block(i, swap_vars))
        .collect();
    let q = rat_one() - p;
    let mut dist: BTreeMap<Vec<Vec<u16>>, Rational> = BTreeMap::new();
    for mask in 0u32..(1u32 << m) {
        let sel: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        let k = sel.len();
        let p_sel = rat_pow(p, k as u32) * rat_pow(&q, (m - k) as u32);
        if p_sel.is_zero() {
            continue;
        }
        let share = p_sel / Rational::from_integer(factorial(k).into());
        for perm in sel.iter().copied().permutations(k) {
            let mut assignment = blocks.clone();
            for (&slot, &src) in sel.iter().zip(perm.iter()) {
                assignment[slot] = blocks[src].clone();
            }
            *dist.entry(assignment).or_insert_with(rat_zero) += share.clone();
        }
    }
    dist
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product::<u64>().max(1)
}

/// One seeded draw of swapping with probabilistic unit matching: each
/// selected position joins a single cross-stratum pool with probability
/// `alpha_cross`, otherwise its own stratum's pool; every pool is permuted
/// uniformly.
pub fn pum_sample(x: &Dataset, p: &Rational, alpha_cross: &Rational, seed: u64) -> Result<Dataset> {
    let swap_vars = require_swapping_vars(x)?;
    let p_f = check_rate("swap rate", p)?;
    let a_f = check_rate("cross-stratum rate", alpha_cross)?;
    let mut out = x.clone();
    let mut global_pool: Vec<usize> = Vec::new();
    for (key, positions) in stratify(x) {
        let mut rng = substream(seed, "pum", &key);
        let mut local: Vec<usize> = Vec::new();
        for &pos in &positions {
            if rng.gen::<f64>() < p_f {
                if rng.gen::<f64>() < a_f {
                    global_pool.push(pos);
                } else {
                    local.push(pos);
                }
            }
        }
        let perm = random_permutation(local.len(), &mut rng);
        let blocks: Vec<Vec<u16>> = local.iter().map(|&i| x.swap_block(i, &swap_vars)).collect();
        for (slot, &src) in perm.iter().enumerate() {
            out.set_swap_block(local[slot], &swap_vars, &blocks[src]);
        }
    }
    global_pool.sort_unstable();
    let mut rng = substream(seed, "pum-global", &[]);
    let perm = random_permutation(global_pool.len(), &mut rng);
    let blocks: Vec<Vec<u16>> = global_pool
        .iter()
        .map(|&i| x.swap_block(i, &swap_vars))
        .collect();
    for (slot, &src) in perm.iter().enumerate() {
        out.set_swap_block(global_pool[slot], &swap_vars, &blocks[src]);
    }
    Ok(out)
}

fn require_single_binary(x: &Dataset) -> Result<()> {
    let vars = x.schema().variables();
    if vars.len() != 1 || vars[0].values.len() != 2 {
        return Err(Error::InvalidParameter(
            "randomized response needs a schema with one binary variable".into(),
        ));
    }
    Ok(())
}

/// One seeded draw of per-record randomized response on a one-bit schema.
pub fn rr_sample(x: &Dataset, flip: &Rational, seed: u64) -> Result<Dataset> {
    require_single_binary(x)?;
    let f = check_rate("flip rate", flip)?;
    let mut rng = substream(seed, "rr", &[]);
    let mut out = x.clone();
    for i in 0..x.n() {
        if rng.gen::<f64>() < f {
            let flipped = 1 - x.record(i)[0];
            out.set_value(i, 0, flipped);
        }
    }
    Ok(out)
}

const RR_EXACT_MAX_RECORDS: usize = 16;

/// Exact support of per-record randomized response, sorted by label.
pub fn rr_exact_support(x: &Dataset, flip: &Rational) -> Result<Vec<(Dataset, Rational)>> {
    require_single_binary(x)?;
    check_rate("flip rate", flip)?;
    let n = x.n();
    if n > RR_EXACT_MAX_RECORDS {
        return Err(Error::CapExceeded {
            what: "randomized-response record count".into(),
            estimate: n as u128,
            cap: RR_EXACT_MAX_RECORDS as u128,
        });
    }
    let keep = rat_one() - flip;
    let mut map: BTreeMap<String, (Dataset, Rational)> = BTreeMap::new();
    for mask in 0u32..(1u32 << n) {
        let mut out = x.clone();
        let mut flips = 0u32;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                flips += 1;
                let flipped = 1 - x.record(i)[0];
                out.set_value(i, 0, flipped);
            }
        }
        let mass = rat_pow(flip, flips) * rat_pow(&keep, n as u32 - flips);
        if !mass.is_zero() {
            let entry = map
                .entry(out.canonical_label())
                .or_insert_with(|| (out, rat_zero()));
            entry.1 += mass;
        }
    }
    Ok(map.into_values().collect())
}

/// Exact product distribution of randomized response.
pub fn rr_exact_distribution(x: &Dataset, flip: &Rational) -> Result<OutputDistribution> {
    OutputDistribution::from_map(
        rr_exact_support(x, flip)?
            .into_iter()
            .map(|(ds, pr)| (ds.canonical_label(), pr))
            .collect(),
    )
}

/// A mechanism with its parameters. Strata are defined by the roles on the
/// input dataset's schema.
#[derive(Debug, Clone)]
pub enum MechanismDescriptor {
    Psa { p: Rational },
    Pum { p: Rational, alpha_cross: Rational },
    RandomizedResponse { flip: Rational },
    Constant { value: Dataset },
    Identity,
}

impl MechanismDescriptor {
    pub fn name(&self) -> &'static str {
        match self {
            MechanismDescriptor::Psa { .. } => "psa",
            MechanismDescriptor::Pum { .. } => "pum",
            MechanismDescriptor::RandomizedResponse { .. } => "randomized_response",
            MechanismDescriptor::Constant { .. } => "constant",
            MechanismDescriptor::Identity => "identity",
        }
    }

    /// Whether an exact output distribution is available.
    pub fn has_exact_oracle(&self) -> bool {
        !matches!(self, MechanismDescriptor::Pum { .. })
    }

    pub fn sample(&self, x: &Dataset, seed: u64) -> Result<Dataset> {
        match self {
            MechanismDescriptor::Psa { p } => psa_sample(x, p, seed),
            MechanismDescriptor::Pum { p, alpha_cross } => pum_sample(x, p, alpha_cross, seed),
            MechanismDescriptor::RandomizedResponse { flip } => rr_sample(x, flip, seed),
            MechanismDescriptor::Constant { value } => Ok(value.clone()),
            MechanismDescriptor::Identity => Ok(x.clone()),
        }
    }

    /// Exact support as datasets with masses; errors for mechanisms without
    /// an exact oracle.
    pub fn exact_support(&self, x: &Dataset, caps: &Caps) -> Result<Vec<(Dataset, Rational)>> {
        match self {
            MechanismDescriptor::Psa { p } => psa_exact_support(x, p, caps),
            MechanismDescriptor::Pum { .. } => Err(Error::InvalidParameter(
                "no exact oracle for cross-stratum swapping".into(),
            )),
            MechanismDescriptor::RandomizedResponse { flip } => rr_exact_support(x, flip),
            MechanismDescriptor::Constant { value } => Ok(vec![(value.clone(), rat_one())]),
            MechanismDescriptor::Identity => Ok(vec![(x.clone(), rat_one())]),
        }
    }

    pub fn exact_distribution(&self, x: &Dataset, caps: &Caps) -> Result<OutputDistribution> {
        OutputDistribution::from_map(
            self.exact_support(x, caps)?
                .into_iter()
                .map(|(ds, pr)| (ds.canonical_label(), pr))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::schema::{Role, Schema, Variable};
    use std::collections::BTreeMap as Map;
    use std::sync::Arc;

    fn swap_schema() -> Arc<Schema> {
        Arc::new(
            Schema::new(vec![
                Variable::new("state", &["A", "B"], Role::Holding, true),
                Variable::new("county", &["x", "y", "z"], Role::Swapping, false),
            ])
            .unwrap(),
        )
    }

    fn no_matching_schema() -> Arc<Schema> {
        Arc::new(
            Schema::new(vec![
                Variable::new("keep", &["k1", "k2"], Role::Holding, false),
                Variable::new("move", &["a", "b"], Role::Swapping, false),
            ])
            .unwrap(),
        )
    }

    fn bit_schema() -> Arc<Schema> {
        Arc::new(
            Schema::new(vec![Variable::new("bit", &["0", "1"], Role::Swapping, false)]).unwrap(),
        )
    }

    #[test]
    fn stratify_cases() {
        let x = Dataset::from_names(
            no_matching_schema(),
            &[vec!["k1", "a"], vec!["k2", "b"], vec!["k1", "b"]],
        )
        .unwrap();
        let strata = stratify(&x);
        assert_eq!(strata.len(), 1);
        assert_eq!(strata[&vec![]], vec![0, 1, 2]);

        let y = Dataset::from_names(
            swap_schema(),
            &[vec!["A", "x"], vec!["B", "y"], vec!["A", "z"]],
        )
        .unwrap();
        let strata = stratify(&y);
        assert_eq!(strata.len(), 2);
        assert_eq!(strata[&vec![0]], vec![0, 2]);
        assert_eq!(strata[&vec![1]], vec![1]);
    }

    #[test]
    fn zero_rate_is_identity() {
        let x = Dataset::from_names(
            swap_schema(),
            &[vec!["A", "x"], vec!["A", "y"], vec!["B", "z"]],
        )
        .unwrap();
        for seed in 0..20 {
            assert_eq!(psa_sample(&x, &rat_zero(), seed).unwrap(), x);
        }
    }

    #[test]
    fn singleton_stratum_is_fixed() {
        let x = Dataset::from_names(swap_schema(), &[vec!["A", "x"], vec!["B", "y"]]).unwrap();
        // two singleton strata: even with certain selection nothing can move
        for seed in 0..20 {
            assert_eq!(psa_sample(&x, &rat_one(), seed).unwrap(), x);
        }
    }

    #[test]
    fn samples_preserve_holding_and_block_multisets() {
        let x = Dataset::from_names(
            swap_schema(),
            &[
                vec!["A", "x"],
                vec!["A", "y"],
                vec!["A", "z"],
                vec!["B", "x"],
                vec!["B", "y"],
            ],
        )
        .unwrap();
        let swap_vars = x.schema().swapping_vars();
        for seed in 0..200 {
            let y = psa_sample(&x, &rat(1, 2), seed).unwrap();
            for i in 0..x.n() {
                assert_eq!(x.record(i)[0], y.record(i)[0], "holding value moved");
            }
            for (key, positions) in stratify(&x) {
                let mut before: Vec<_> =
                    positions.iter().map(|&i| x.swap_block(i, &swap_vars)).collect();
                let mut after: Vec<_> =
                    positions.iter().map(|&i| y.swap_block(i, &swap_vars)).collect();
                before.sort();
                after.sort();
                assert_eq!(before, after, "stratum {key:?} multiset changed");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_in_seed() {
        let x = Dataset::from_names(
            swap_schema(),
            &[vec!["A", "x"], vec!["A", "y"], vec!["A", "z"]],
        )
        .unwrap();
        let a = psa_sample(&x, &rat(1, 3), 99).unwrap();
        let b = psa_sample(&x, &rat(1, 3), 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_two_record_distribution() {
        let x = Dataset::from_names(no_matching_schema(), &[vec!["k1", "a"], vec!["k1", "b"]])
            .unwrap();
        let dist = psa_exact_distribution(&x, &rat(1, 2), &Caps::default()).unwrap();
        // P(identity) = 1 - p^2/2 = 7/8, P(swapped) = p^2/2 = 1/8
        assert_eq!(dist.support_size(), 2);
        assert_eq!(dist.mass(&x.canonical_label()), rat(7, 8));
        let mut swapped = x.clone();
        swapped.set_value(0, 1, 1);
        swapped.set_value(1, 1, 0);
        assert_eq!(dist.mass(&swapped.canonical_label()), rat(1, 8));
    }

    #[test]
    fn equal_blocks_collapse_to_point_mass() {
        let x = Dataset::from_names(no_matching_schema(), &[vec!["k1", "a"], vec!["k2", "a"]])
            .unwrap();
        let dist = psa_exact_distribution(&x, &rat(2, 3), &Caps::default()).unwrap();
        assert_eq!(dist.support_size(), 1);
        assert_eq!(dist.mass(&x.canonical_label()), rat_one());
    }

    #[test]
    fn stratum_cap_error_names_the_stratum() {
        let schema = swap_schema();
        let rows: Vec<Vec<&str>> = (0..9).map(|_| vec!["A", "x"]).collect();
        let x = Dataset::from_names(schema, &rows).unwrap();
        let err = psa_exact_distribution(&x, &rat(1, 2), &Caps::default()).unwrap_err();
        match err {
            Error::CapExceeded { what, .. } => assert!(what.contains("state=A"), "{what}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sample_frequencies_match_exact_distribution() {
        let x = Dataset::from_names(
            no_matching_schema(),
            &[vec!["k1", "a"], vec!["k1", "b"], vec!["k2", "a"]],
        )
        .unwrap();
        let p = rat(3, 10);
        let dist = psa_exact_distribution(&x, &p, &Caps::default()).unwrap();
        let trials = 4000usize;
        let mut counts: Map<String, usize> = Map::new();
        for seed in 0..trials as u64 {
            let y = psa_sample(&x, &p, seed).unwrap();
            *counts.entry(y.canonical_label()).or_default() += 1;
        }
        for (label, mass) in dist.atoms() {
            let expected = rat_to_f64(mass) * trials as f64;
            let sd = (expected * (1.0 - rat_to_f64(mass))).sqrt();
            let observed = counts.get(label).copied().unwrap_or(0) as f64;
            assert!(
                (observed - expected).abs() <= 3.0 * sd + 1.0,
                "{label}: observed {observed}, expected {expected}"
            );
        }
    }

    #[test]
    fn pum_without_crossing_matches_swap_oracle() {
        let x = Dataset::from_names(
            swap_schema(),
            &[vec!["A", "x"], vec!["A", "y"], vec!["B", "x"], vec!["B", "z"]],
        )
        .unwrap();
        let p = rat(1, 2);
        let exact = psa_exact_distribution(&x, &p, &Caps::default()).unwrap();
        let trials = 4000usize;
        let mut counts: Map<String, usize> = Map::new();
        for seed in 0..trials as u64 {
            let y = pum_sample(&x, &p, &rat_zero(), seed).unwrap();
            *counts.entry(y.canonical_label()).or_default() += 1;
        }
        for (label, mass) in exact.atoms() {
            let expected = rat_to_f64(mass) * trials as f64;
            let sd = (expected * (1.0 - rat_to_f64(mass))).sqrt();
            let observed = counts.get(label).copied().unwrap_or(0) as f64;
            assert!(
                (observed - expected).abs() <= 4.0 * sd + 1.0,
                "{label}: observed {observed}, expected {expected}"
            );
        }
        // and nothing outside the oracle support ever appears
        for label in counts.keys() {
            assert!(exact.mass(label) > rat_zero(), "foreign outcome {label}");
        }
    }

    #[test]
    fn pum_full_crossing_moves_blocks_across_strata() {
        let x = Dataset::from_names(
            swap_schema(),
            &[vec!["A", "x"], vec!["A", "x"], vec!["B", "y"], vec!["B", "y"]],
        )
        .unwrap();
        let mut crossed = false;
        for seed in 0..500 {
            let y = pum_sample(&x, &rat_one(), &rat_one(), seed).unwrap();
            // holding values never move
            for i in 0..x.n() {
                assert_eq!(x.record(i)[0], y.record(i)[0]);
            }
            let a_blocks: Vec<u16> = (0..2).map(|i| y.record(i)[1]).collect();
            if a_blocks.iter().any(|&b| b == 1) {
                crossed = true;
            }
        }
        assert!(crossed, "full cross-stratum rate never crossed strata");
    }

    #[test]
    fn rr_edges() {
        let x = Dataset::from_names(bit_schema(), &[vec!["0"], vec!["1"]]).unwrap();
        let frozen = rr_exact_distribution(&x, &rat_zero()).unwrap();
        assert_eq!(frozen.support_size(), 1);
        assert_eq!(frozen.mass(&x.canonical_label()), rat_one());

        let uniform = rr_exact_distribution(&x, &rat(1, 2)).unwrap();
        assert_eq!(uniform.support_size(), 4);
        for (_, mass) in uniform.atoms() {
            assert_eq!(mass, &rat(1, 4));
        }

        let two_var = Dataset::from_names(no_matching_schema(), &[vec!["k1", "a"]]).unwrap();
        assert!(rr_exact_distribution(&two_var, &rat(1, 4)).is_err());
    }

    #[test]
    fn constant_and_identity_oracles() {
        let x = Dataset::from_names(bit_schema(), &[vec!["0"]]).unwrap();
        let y = Dataset::from_names(bit_schema(), &[vec!["1"]]).unwrap();
        let constant = MechanismDescriptor::Constant { value: y.clone() };
        let dist = constant.exact_distribution(&x, &Caps::default()).unwrap();
        assert_eq!(dist.mass(&y.canonical_label()), rat_one());
        let identity = MechanismDescriptor::Identity;
        let dist = identity.exact_distribution(&x, &Caps::default()).unwrap();
        assert_eq!(dist.mass(&x.canonical_label()), rat_one());
    }
}
