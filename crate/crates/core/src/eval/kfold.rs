use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

fn check(n: usize, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k-fold needs k >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::InvalidInput(format!("cannot split {n} items into {k} folds")));
    }
    Ok(())
}

fn deal(order: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); k];
    for (pos, &i) in order.iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Item indices `0..n` shuffled with `seed` and dealt into `k` folds whose
/// sizes differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    check(n, k)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(deal(&order, k))
}

/// Like [`kfold_split`], but each class is spread evenly over the folds.
pub fn stratified_kfold_split(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    check(labels.len(), k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut order = Vec::with_capacity(labels.len());
    for c in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        order.extend(members);
    }
    Ok(deal(&order, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_into_five() {
        let folds = kfold_split(10, 5, 1).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        assert_eq!(folds, kfold_split(10, 5, 1).unwrap());
        assert_ne!(folds, kfold_split(10, 5, 2).unwrap());
    }

    #[test]
    fn errors() {
        assert!(kfold_split(3, 4, 0).is_err());
        assert!(kfold_split(3, 1, 0).is_err());
    }

    #[test]
    fn stratified_balances_classes() {
        let labels: Vec<usize> = (0..20).map(|i| usize::from(i < 5)).collect();
        let folds = stratified_kfold_split(&labels, 5, 3).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 4);
            assert_eq!(f.iter().filter(|&&i| labels[i] == 1).count(), 1);
        }
    }
}
