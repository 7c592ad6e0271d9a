use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three fractions that must sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions(pub [f64; 3]);

impl SplitFractions {
    pub const TRAIN_VAL_TEST: SplitFractions = SplitFractions([0.6, 0.2, 0.2]);
    pub const SHARED_CANDIDATE_INDEPENDENT: SplitFractions = SplitFractions([0.5, 0.25, 0.25]);

    fn validate(&self, what: &str) -> Result<()> {
        if self.0.iter().any(|&f| !(f > 0.0) || !f.is_finite()) {
            return Err(Error::invalid(format!("{what} fractions must be positive: {:?}", self.0)));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "{what} fractions sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }

    /// Floors each share, then hands the remainder out one by one to the
    /// largest fractions (declaration order on ties).
    pub fn sizes(&self, total: usize) -> [usize; 3] {
        let mut sizes = self.0.map(|f| (f * total as f64 + 1e-9).floor() as usize);
        let assigned: usize = sizes.iter().sum();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| self.0[b].partial_cmp(&self.0[a]).unwrap());
        for &i in order.iter().cycle().take(total.saturating_sub(assigned)) {
            sizes[i] += 1;
        }
        sizes
    }
}

/// Disjoint node sets for the paired-model protocol. `extra` is the set seen
/// by neither model, i.e. the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub shared: Vec<usize>,
    pub candidate: Vec<usize>,
    pub independent: Vec<usize>,
    pub extra: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub split: SplitFractions,
    pub sub: SplitFractions,
    pub seed: u64,
}

impl Partition {
    pub fn train(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self
            .shared
            .iter()
            .chain(&self.candidate)
            .chain(&self.independent)
            .copied()
            .collect();
        t.sort_unstable();
        t
    }
}

pub fn make_partition(
    num_nodes: usize,
    split: SplitFractions,
    sub: SplitFractions,
    seed: u64,
) -> Result<Partition> {
    split.validate("split")?;
    sub.validate("sub-split")?;
    let mut rng = crate::seed::rng(seed);
    let mut nodes: Vec<usize> = (0..num_nodes).collect();
    nodes.shuffle(&mut rng);
    let [n_train, n_val, _] = split.sizes(num_nodes);
    let (train, rest) = nodes.split_at(n_train);
    let (val, test) = rest.split_at(n_val);

    let mut train = train.to_vec();
    train.shuffle(&mut rng);
    let [n_s, n_c, _] = sub.sizes(train.len());
    let (shared, rest) = train.split_at(n_s);
    let (candidate, independent) = rest.split_at(n_c);

    let sorted = |s: &[usize]| {
        let mut v = s.to_vec();
        v.sort_unstable();
        v
    };
    let p = Partition {
        shared: sorted(shared),
        candidate: sorted(candidate),
        independent: sorted(independent),
        extra: sorted(test),
        val: sorted(val),
        test: sorted(test),
        split,
        sub,
        seed,
    };
    for (name, set) in [
        ("shared", &p.shared),
        ("candidate", &p.candidate),
        ("independent", &p.independent),
        ("val", &p.val),
        ("test", &p.test),
    ] {
        if set.is_empty() {
            return Err(Error::invalid(format!(
                "partition of {num_nodes} nodes leaves the {name} set empty"
            )));
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sizes_for_hundred_nodes() {
        let p = make_partition(
            100,
            SplitFractions::TRAIN_VAL_TEST,
            SplitFractions::SHARED_CANDIDATE_INDEPENDENT,
            3,
        )
        .unwrap();
        assert_eq!(
            [p.shared.len(), p.candidate.len(), p.independent.len(), p.val.len(), p.test.len()],
            [30, 15, 15, 20, 20]
        );
        assert_eq!(p.extra, p.test);
    }

    #[test]
    fn rounding_rule() {
        // 1490 * 0.6 = 894; 894 * 0.25 = 223.5
        assert_eq!(SplitFractions::TRAIN_VAL_TEST.sizes(1490), [894, 298, 298]);
        assert_eq!(SplitFractions::SHARED_CANDIDATE_INDEPENDENT.sizes(894), [448, 223, 223]);
        assert_eq!(SplitFractions([0.2, 0.5, 0.3]).sizes(11), [2, 6, 3]);
    }

    #[test]
    fn rejects_bad_fractions_and_tiny_graphs() {
        let bad = SplitFractions([0.5, 0.2, 0.2]);
        assert!(make_partition(100, bad, SplitFractions::SHARED_CANDIDATE_INDEPENDENT, 0).is_err());
        assert!(make_partition(
            3,
            SplitFractions::TRAIN_VAL_TEST,
            SplitFractions::SHARED_CANDIDATE_INDEPENDENT,
            0
        )
        .is_err());
    }

    #[test]
    fn deterministic() {
        let mk = |s| {
            make_partition(
                200,
                SplitFractions::TRAIN_VAL_TEST,
                SplitFractions::SHARED_CANDIDATE_INDEPENDENT,
                s,
            )
            .unwrap()
        };
        assert_eq!(mk(9), mk(9));
        assert_ne!(mk(9), mk(10));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn sets_are_disjoint_and_cover(seed in any::<u64>(), n in 20usize..400) {
            let p = make_partition(
                n,
                SplitFractions::TRAIN_VAL_TEST,
                SplitFractions::SHARED_CANDIDATE_INDEPENDENT,
                seed,
            ).unwrap();
            let mut seen = vec![0u8; n];
            for set in [&p.shared, &p.candidate, &p.independent, &p.val, &p.test] {
                for &v in set.iter() {
                    seen[v] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            prop_assert!(p.extra.iter().all(|v| !p.train().contains(v)));
        }
    }
}
