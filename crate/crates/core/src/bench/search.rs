use crate::error::{Error, Result};

/// Smallest integer clock in `[lo, hi]` for which `deadlocks` is false,
/// assuming the predicate is monotone (deadlocking below a threshold).
///
/// `hi` is probed first; then `lo`; then the bracket is halved until it
/// spans one second, so the returned clock minus one has always been probed
/// and found to deadlock (unless the result is `lo`).
pub fn find_threshold(
    lo: u32,
    hi: u32,
    mut deadlocks: impl FnMut(u32) -> Result<bool>,
) -> Result<u32> {
    if deadlocks(hi)? {
        return Err(Error::NoSafeClock { hi });
    }
    if lo >= hi || !deadlocks(lo)? {
        return Ok(lo.min(hi));
    }
    let (mut bad, mut good) = (lo, hi);
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if deadlocks(mid)? {
            bad = mid;
        } else {
            good = mid;
        }
    }
    Ok(good)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_synthetic_threshold() {
        let mut probes = Vec::new();
        let c = find_threshold(0, 200, |c| {
            probes.push(c);
            Ok(c < 50)
        })
        .unwrap();
        assert_eq!(c, 50);
        assert!(probes.contains(&49));
    }

    #[test]
    fn safe_lower_bound() {
        assert_eq!(find_threshold(0, 600, |_| Ok(false)).unwrap(), 0);
        assert_eq!(find_threshold(7, 600, |c| Ok(c < 3)).unwrap(), 7);
    }

    #[test]
    fn no_safe_clock() {
        assert!(matches!(
            find_threshold(0, 600, |_| Ok(true)),
            Err(Error::NoSafeClock { hi: 600 })
        ));
    }

    #[test]
    fn every_threshold_in_range() {
        for t in 0..=64 {
            assert_eq!(find_threshold(0, 64, |c| Ok(c < t)).unwrap(), t);
        }
    }
}
