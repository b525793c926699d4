//! Jaro and Jaro-Winkler string similarity over Unicode scalar values.

/// Common-prefix cap and scaling factor of the Winkler boost.
pub const PREFIX_CAP: usize = 4;
pub const PREFIX_SCALE: f64 = 0.1;

/// Greedy matching is order dependent, so the pair is put in a fixed order
/// (shorter first, then lexicographic) to make the result symmetric.
fn canonical<'a>(a: &'a [char], b: &'a [char]) -> (&'a [char], &'a [char]) {
    if (a.len(), a) <= (b.len(), b) {
        (a, b)
    } else {
        (b, a)
    }
}

fn jaro_chars(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (s1, s2) = canonical(a, b);
    let window = (s1.len().max(s2.len()) / 2).saturating_sub(1);
    let mut used = vec![false; s2.len()];
    let mut s1_matched = Vec::new();
    for (i, &c) in s1.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(s2.len());
        for j in lo..hi {
            if !used[j] && s2[j] == c {
                used[j] = true;
                s1_matched.push(c);
                break;
            }
        }
    }
    let m = s1_matched.len();
    if m == 0 {
        return 0.0;
    }
    let s2_matched = s2.iter().zip(&used).filter(|(_, &u)| u).map(|(c, _)| *c);
    let half_transpositions = s1_matched
        .iter()
        .zip(s2_matched)
        .filter(|(x, y)| **x != *y)
        .count();
    let t = half_transpositions as f64 / 2.0;
    let m = m as f64;
    (m / s1.len() as f64 + m / s2.len() as f64 + (m - t) / m) / 3.0
}

pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    jaro_chars(&a, &b)
}

/// Jaro similarity boosted by the shared prefix (up to four characters,
/// scaled by 0.1). Both empty gives 1.0; exactly one empty gives 0.0.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let j = jaro_chars(&a, &b);
    let prefix = a
        .iter()
        .zip(&b)
        .take(PREFIX_CAP)
        .take_while(|(x, y)| x == y)
        .count();
    j + prefix as f64 * PREFIX_SCALE * (1.0 - j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_examples() {
        assert!((jaro("MARTHA", "MARHTA") - 0.944_444).abs() < 1e-6);
        assert!((jaro_winkler("MARTHA", "MARHTA") - 0.961_111).abs() < 1e-6);
        assert!((jaro_winkler("DIXON", "DICKSONX") - 0.813_333).abs() < 1e-6);
        assert_eq!(jaro_winkler("6E10", "6E10"), 1.0);
        assert_eq!(jaro_winkler("abc", "xyz"), 0.0);
        assert_eq!(jaro_winkler("", ""), 1.0);
        assert_eq!(jaro_winkler("", "a"), 0.0);
    }

    #[test]
    fn symmetric_on_order_sensitive_pair() {
        for (a, b) in [("ab", "ba"), ("abcb", "bcab"), ("aab", "aba")] {
            assert_eq!(jaro_winkler(a, b), jaro_winkler(b, a));
        }
    }
}
