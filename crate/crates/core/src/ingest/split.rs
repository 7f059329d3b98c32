use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BehaviorClass, IngestError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: BTreeMap<String, BehaviorClass>,
    pub test: BTreeMap<String, BehaviorClass>,
}

/// Per-class random partition. Each class contributes `floor(fraction * size)`
/// addresses to the train side.
pub fn stratified_split(
    labels: &BTreeMap<String, BehaviorClass>,
    train_fraction: f64,
    seed: u64,
) -> Result<Split, IngestError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(IngestError::Fraction(train_fraction));
    }
    let mut by_class: BTreeMap<BehaviorClass, Vec<&str>> = BTreeMap::new();
    for (addr, &class) in labels {
        by_class.entry(class).or_default().push(addr);
    }
    for class in BehaviorClass::ALL {
        if by_class.get(&class).is_none_or(|v| v.is_empty()) {
            return Err(IngestError::DegenerateClass(class));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split {
        train: BTreeMap::new(),
        test: BTreeMap::new(),
    };
    for (class, mut members) in by_class {
        // BTreeMap iteration already sorted the members; shuffle from there.
        members.shuffle(&mut rng);
        let n_train = (train_fraction * members.len() as f64 + 1e-9).floor() as usize;
        for (i, addr) in members.into_iter().enumerate() {
            let side = if i < n_train {
                &mut split.train
            } else {
                &mut split.test
            };
            side.insert(addr.to_string(), class);
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(sizes: [usize; 4]) -> BTreeMap<String, BehaviorClass> {
        let mut m = BTreeMap::new();
        for (c, &n) in BehaviorClass::ALL.iter().zip(&sizes) {
            for i in 0..n {
                m.insert(format!("{c}-{i}"), *c);
            }
        }
        m
    }

    fn count(m: &BTreeMap<String, BehaviorClass>, c: BehaviorClass) -> usize {
        m.values().filter(|&&v| v == c).count()
    }

    #[test]
    fn eighty_twenty() {
        let s = stratified_split(&labels([100; 4]), 0.8, 1).unwrap();
        for c in BehaviorClass::ALL {
            assert_eq!(count(&s.train, c), 80);
            assert_eq!(count(&s.test, c), 20);
        }
    }

    #[test]
    fn floor_on_small_class() {
        let s = stratified_split(&labels([5, 3, 3, 3]), 0.8, 7).unwrap();
        assert_eq!(count(&s.train, BehaviorClass::Exchange), 4);
        assert_eq!(count(&s.test, BehaviorClass::Exchange), 1);
    }

    #[test]
    fn empty_class_is_error() {
        assert!(matches!(
            stratified_split(&labels([3, 0, 3, 3]), 0.8, 0),
            Err(IngestError::DegenerateClass(BehaviorClass::Mining))
        ));
    }

    #[test]
    fn fraction_bounds() {
        assert!(stratified_split(&labels([3; 4]), 0.0, 0).is_err());
        assert!(stratified_split(&labels([3; 4]), 1.0, 0).is_err());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let l = labels([40; 4]);
        let a = stratified_split(&l, 0.5, 3).unwrap();
        assert_eq!(a, stratified_split(&l, 0.5, 3).unwrap());
        assert_ne!(a, stratified_split(&l, 0.5, 4).unwrap());
    }
}
