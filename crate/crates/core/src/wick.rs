//! Combinatorics of multi-field reconstruction: pair-subset enumeration,
//! perfect matchings (Wick contractions of Gaussian fields), the double-
//! factorial contraction-counting identity, and assembly of the formal
//! reconstruction series
//!
//! ρ_S^m(t) = Σ_k Σ_{𝔞 ∈ 𝔪(m,2k)} ⟨∏_{j∈𝔞} φ_j⟩ (−i)^{m−2k} ρ^{𝔞_c}(t),
//!
//! where 𝔪(m,2k) is the collection of 2k-element subsets of the m field
//! labels and 𝔞_c is the complement whose fields remain attached to the
//! hierarchy.

use num_complex::Complex64;
use std::collections::HashMap;

use crate::error::{CoreError, Result};
use crate::operators::ComplexMatrix;

/// Hard cap on field counts; combinatorial sizes stay within u128 and the
/// physical use cases stop at m = 4.
pub const MAX_FIELDS: usize = 16;

/// A set of m field labels 1..m with their free pairwise correlations
/// ⟨φ_i φ_j⟩ (time-ordering already applied by the caller).
#[derive(Debug, Clone, Default)]
pub struct FieldSet {
    m: usize,
    pairings: HashMap<(usize, usize), Complex64>,
}

impl FieldSet {
    pub fn new(m: usize) -> Result<Self> {
        if m > MAX_FIELDS {
            return Err(CoreError::InvalidParameter(format!(
                "field count {m} exceeds the supported cap {MAX_FIELDS}"
            )));
        }
        Ok(Self {
            m,
            pairings: HashMap::new(),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Records ⟨φ_i φ_j⟩ for an unordered pair of distinct labels.
    pub fn set_pairing(&mut self, i: usize, j: usize, value: Complex64) -> Result<()> {
        if i == j || i == 0 || j == 0 || i > self.m || j > self.m {
            return Err(CoreError::InvalidParameter(format!(
                "pairing ({i},{j}) invalid for labels 1..{}",
                self.m
            )));
        }
        self.pairings.insert((i.min(j), i.max(j)), value);
        Ok(())
    }

    pub fn pairing(&self, i: usize, j: usize) -> Result<Complex64> {
        self.pairings
            .get(&(i.min(j), i.max(j)))
            .copied()
            .ok_or_else(|| {
                CoreError::MissingEntry(format!("free correlation ⟨φ_{i} φ_{j}⟩ not provided"))
            })
    }
}

/// One term of the reconstruction series.
#[derive(Debug, Clone)]
pub struct SeriesTerm {
    /// Number of contracted pairs.
    pub k: usize,
    /// The contracted labels 𝔞 (sorted, size 2k).
    pub subset: Vec<usize>,
    /// ⟨∏_{j∈𝔞} φ_j⟩ · (−i)^{m−2k}.
    pub coefficient: Complex64,
    /// The complement 𝔞_c whose fields stay on the hierarchy (sorted).
    pub complement: Vec<usize>,
}

/// All C(m, 2k) sorted subsets of {1..m} with exactly 2k elements, in
/// lexicographic order (deterministic across runs).
pub fn enumerate_subsets(m: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    if 2 * k > m {
        return Err(CoreError::InvalidParameter(format!(
            "subset size 2k = {} exceeds field count m = {m}",
            2 * k
        )));
    }
    if m > MAX_FIELDS {
        return Err(CoreError::InvalidParameter(format!(
            "field count {m} exceeds the supported cap {MAX_FIELDS}"
        )));
    }
    let size = 2 * k;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn recurse(start: usize, m: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for label in start..=m {
            // Prune when not enough labels remain.
            if m - label + 1 < size - current.len() {
                break;
            }
            current.push(label);
            recurse(label + 1, m, size, current, out);
            current.pop();
        }
    }
    recurse(1, m, size, &mut current, &mut out);
    Ok(out)
}

/// All (2k−1)!! perfect matchings of an even-size label set.
pub fn perfect_matchings(labels: &[usize]) -> Result<Vec<Vec<(usize, usize)>>> {
    if labels.len() % 2 != 0 {
        return Err(CoreError::InvalidParameter(format!(
            "perfect matchings need an even label count, got {}",
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Ok(vec![vec![]]);
    }
    let mut out = Vec::new();
    let first = labels[0];
    for i in 1..labels.len() {
        let partner = labels[i];
        let rest: Vec<usize> = labels[1..]
            .iter()
            .copied()
            .filter(|&l| l != partner)
            .collect();
        for mut sub in perfect_matchings(&rest)? {
            sub.insert(0, (first, partner));
            out.push(sub);
        }
    }
    Ok(out)
}

/// Double factorial n!! with the conventions (−1)!! = 0!! = 1.
fn double_factorial(n: i64) -> u128 {
    let mut acc: u128 = 1;
    let mut v = n;
    while v > 1 {
        acc *= v as u128;
        v -= 2;
    }
    acc
}

fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Both sides of the contraction-counting identity
///
/// (m+n−1)!! = Σ_k C(m,2k) (2k−1)!! · n!/(n−m+2k)! · (n−m+2k−1)!!,
///
/// computed independently in exact integer arithmetic: the left side
/// counts all perfect matchings of m+n objects, the right side organizes
/// them by how many pairs fall entirely within the first m.
pub fn contraction_count_identity(m: usize, n: usize) -> Result<(u128, u128)> {
    if (m + n) % 2 != 0 {
        return Err(CoreError::InvalidParameter(format!(
            "contraction identity needs m + n even, got m = {m}, n = {n}"
        )));
    }
    if m > MAX_FIELDS || n > MAX_FIELDS {
        return Err(CoreError::InvalidParameter(format!(
            "m = {m}, n = {n} exceed the supported cap {MAX_FIELDS}"
        )));
    }
    let lhs = double_factorial((m + n) as i64 - 1);
    let mut rhs: u128 = 0;
    for k in 0..=m / 2 {
        let r = m - 2 * k; // φ's contracted across onto χ's
        if r > n {
            continue;
        }
        let leftover = n - r; // χ's contracted among themselves
        rhs += binomial(m as u64, 2 * k as u64)
            * double_factorial(2 * k as i64 - 1)
            * (factorial(n as u64) / factorial(leftover as u64))
            * double_factorial(leftover as i64 - 1);
    }
    Ok((lhs, rhs))
}

/// Wick value ⟨∏_{j∈𝔞} φ_j⟩: sum over all perfect matchings of the
/// product of pair correlations.  The empty product is 1.
fn wick_value(fs: &FieldSet, subset: &[usize]) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for matching in perfect_matchings(subset)? {
        let mut prod = Complex64::new(1.0, 0.0);
        for (i, j) in matching {
            prod *= fs.pairing(i, j)?;
        }
        acc += prod;
    }
    Ok(acc)
}

/// Enumerates every term of the reconstruction series for `fs`.
pub fn series_terms(fs: &FieldSet) -> Result<Vec<SeriesTerm>> {
    let m = fs.m;
    let mut terms = Vec::new();
    for k in 0..=m / 2 {
        let phase = Complex64::new(0.0, -1.0).powu((m - 2 * k) as u32);
        for subset in enumerate_subsets(m, k)? {
            let complement: Vec<usize> = (1..=m).filter(|l| !subset.contains(l)).collect();
            let coefficient = wick_value(fs, &subset)? * phase;
            terms.push(SeriesTerm {
                k,
                subset,
                coefficient,
                complement,
            });
        }
    }
    Ok(terms)
}

/// Assembles ρ_S^m = Σ terms coefficient · ρ^{𝔞_c}, with the complement
/// matrices supplied by the hierarchy (keyed by the sorted complement).
///
/// For m = 0 this returns the bare system state unchanged.
pub fn assemble_series(
    fs: &FieldSet,
    complement_matrices: &HashMap<Vec<usize>, ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let terms = series_terms(fs)?;
    let mut acc: Option<ComplexMatrix> = None;
    for term in &terms {
        let rho = complement_matrices.get(&term.complement).ok_or_else(|| {
            CoreError::MissingEntry(format!(
                "no hierarchy output supplied for complement {:?}",
                term.complement
            ))
        })?;
        let scaled = rho.scale(term.coefficient);
        acc = Some(match acc {
            None => scaled,
            Some(a) => a.add(&scaled),
        });
    }
    acc.ok_or_else(|| CoreError::InvalidParameter("series has no terms".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn subset_enumeration_examples() {
        assert_eq!(enumerate_subsets(2, 1).unwrap(), vec![vec![1, 2]]);
        assert_eq!(enumerate_subsets(4, 1).unwrap().len(), 6);
        assert_eq!(enumerate_subsets(5, 0).unwrap(), vec![Vec::<usize>::new()]);
        assert!(enumerate_subsets(3, 2).is_err());
    }

    #[test]
    fn subset_enumeration_matches_bitmask_oracle() {
        // Independent oracle: all 6-bit masks with popcount 4.
        let got = enumerate_subsets(6, 2).unwrap();
        let mut oracle: Vec<Vec<usize>> = (0u32..64)
            .filter(|mask| mask.count_ones() == 4)
            .map(|mask| (0..6).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect())
            .collect();
        oracle.sort();
        let mut sorted = got.clone();
        sorted.sort();
        assert_eq!(sorted, oracle);
        assert_eq!(got.len(), 15);
        // Deterministic lexicographic order.
        assert_eq!(got, sorted);
    }

    #[test]
    fn matching_counts_follow_double_factorials() {
        assert_eq!(perfect_matchings(&[1, 2]).unwrap(), vec![vec![(1, 2)]]);
        assert_eq!(perfect_matchings(&[1, 2, 3, 4]).unwrap().len(), 3);
        let eight: Vec<usize> = (1..=8).collect();
        assert_eq!(perfect_matchings(&eight).unwrap().len(), 105); // 7!!
        assert!(perfect_matchings(&[1, 2, 3]).is_err());
        // Every matching covers each label exactly once.
        for matching in perfect_matchings(&eight).unwrap() {
            let mut seen: Vec<usize> = matching.iter().flat_map(|&(a, b)| [a, b]).collect();
            seen.sort();
            assert_eq!(seen, eight);
        }
    }

    #[test]
    fn contraction_identity_examples() {
        assert_eq!(contraction_count_identity(2, 0).unwrap(), (1, 1));
        assert_eq!(contraction_count_identity(4, 2).unwrap(), (15, 15));
        assert_eq!(contraction_count_identity(6, 4).unwrap(), (945, 945));
        assert!(contraction_count_identity(3, 2).is_err());
    }

    #[test]
    fn contraction_identity_holds_for_all_small_counts() {
        for m in 0..=8 {
            for n in 0..=8 {
                if (m + n) % 2 != 0 {
                    continue;
                }
                let (lhs, rhs) = contraction_count_identity(m, n).unwrap();
                assert_eq!(lhs, rhs, "m = {m}, n = {n}");
            }
        }
    }

    #[test]
    fn assemble_bare_state_for_zero_fields() {
        let fs = FieldSet::new(0).unwrap();
        let rho = ComplexMatrix::from_real_rows(&[vec![0.25, 0.0], vec![0.0, 0.75]]).unwrap();
        let mut map = HashMap::new();
        map.insert(vec![], rho.clone());
        let got = assemble_series(&fs, &map).unwrap();
        assert_eq!(got.max_abs_diff(&rho), 0.0);
    }

    #[test]
    fn two_field_series_is_correlation_minus_cross() {
        // ⟨φ₁φ₂⟩ ρ_root + (−i)² ρ^{12}.
        let mut fs = FieldSet::new(2).unwrap();
        fs.set_pairing(1, 2, c64(0.8, 0.1)).unwrap();
        let root = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let cross = ComplexMatrix::from_real_rows(&[vec![0.3, 0.0], vec![0.0, 0.2]]).unwrap();
        let mut map = HashMap::new();
        map.insert(vec![], root.clone());
        map.insert(vec![1, 2], cross.clone());
        let got = assemble_series(&fs, &map).unwrap();
        let want = root.scale(c64(0.8, 0.1)).add(&cross.scale(c64(-1.0, 0.0)));
        assert!(got.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn four_field_series_has_eight_terms_matching_hand_expansion() {
        let mut fs = FieldSet::new(4).unwrap();
        let p: HashMap<(usize, usize), Complex64> = [
            ((1, 2), c64(0.5, 0.2)),
            ((1, 3), c64(-0.1, 0.7)),
            ((1, 4), c64(0.9, -0.3)),
            ((2, 3), c64(0.4, 0.4)),
            ((2, 4), c64(-0.6, 0.1)),
            ((3, 4), c64(0.2, -0.8)),
        ]
        .into_iter()
        .collect();
        for (&(i, j), &v) in &p {
            fs.set_pairing(i, j, v).unwrap();
        }
        let terms = series_terms(&fs).unwrap();
        assert_eq!(terms.len(), 8); // 𝔪(4,0) + 𝔪(4,2) + 𝔪(4,4) = 1 + 6 + 1

        // Hand enumeration: k = 0 term has coefficient (−i)^4 = 1; each
        // pair subset {i,j} contributes ⟨φ_iφ_j⟩(−i)²; the full subset
        // carries its three Wick matchings.
        for term in &terms {
            match term.subset.len() {
                0 => assert!((term.coefficient - c64(1.0, 0.0)).norm() < 1e-15),
                2 => {
                    let key = (term.subset[0], term.subset[1]);
                    assert!((term.coefficient + p[&key]).norm() < 1e-15);
                }
                4 => {
                    let wick = p[&(1, 2)] * p[&(3, 4)]
                        + p[&(1, 3)] * p[&(2, 4)]
                        + p[&(1, 4)] * p[&(2, 3)];
                    assert!((term.coefficient - wick).norm() < 1e-15);
                }
                _ => panic!("unexpected subset size"),
            }
            assert_eq!(term.subset.len() + term.complement.len(), 4);
            assert!(term.subset.iter().all(|l| !term.complement.contains(l)));
        }
    }

    #[test]
    fn odd_field_count_with_zero_correlations_keeps_only_k0() {
        let mut fs = FieldSet::new(3).unwrap();
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            fs.set_pairing(i, j, c64(0.0, 0.0)).unwrap();
        }
        let terms = series_terms(&fs).unwrap();
        let nonzero: Vec<_> = terms.iter().filter(|t| t.coefficient.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].k, 0);
        // (−i)^3 = (−i)²(−i) = i.
        assert!((nonzero[0].coefficient - c64(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn missing_inputs_error_cleanly() {
        let mut fs = FieldSet::new(2).unwrap();
        fs.set_pairing(1, 2, c64(1.0, 0.0)).unwrap();
        let map = HashMap::new();
        assert!(matches!(
            assemble_series(&fs, &map),
            Err(CoreError::MissingEntry(_))
        ));

        let fs = FieldSet::new(2).unwrap(); // no pairing recorded
        assert!(matches!(series_terms(&fs), Err(CoreError::MissingEntry(_))));
    }
}
