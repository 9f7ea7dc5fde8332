use crate::error::{Error, Result};

/// The index set `I_{n,h}`: every `h`-tuple of positive integers summing to
/// `n`, in lexicographic order. There are `C(n−1, h−1)` of them.
pub fn compositions(n: usize, h: usize) -> Result<Vec<Vec<usize>>> {
    if n == 0 || h == 0 || h > n {
        return Err(Error::InvalidInput(format!(
            "compositions need 1 <= h <= n, got n = {n}, h = {h}"
        )));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(h);
    extend(n, h, &mut current, &mut out);
    Ok(out)
}

fn extend(remaining: usize, slots: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if slots == 1 {
        current.push(remaining);
        out.push(current.clone());
        current.pop();
        return;
    }
    // leave at least one unit for each of the remaining slots
    for first in 1..=remaining - (slots - 1) {
        current.push(first);
        extend(remaining - first, slots - 1, current, out);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(compositions(3, 1).unwrap(), vec![vec![3]]);
        assert_eq!(compositions(3, 2).unwrap(), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(compositions(3, 3).unwrap(), vec![vec![1, 1, 1]]);
        assert_eq!(compositions(5, 2).unwrap().len(), 4);
    }

    #[test]
    fn out_of_range() {
        assert!(compositions(3, 4).is_err());
        assert!(compositions(3, 0).is_err());
        assert!(compositions(0, 0).is_err());
    }
}
