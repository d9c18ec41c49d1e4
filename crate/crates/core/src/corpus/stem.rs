//! Partial stemmer.
//!
//! Only inflectional endings are removed: plural nouns become singular and
//! `-ing`/`-ed` verb forms lose their ending, restoring a silent `e` or
//! undoubling a final consonant where the Porter step-1b conditions say so.
//! Derivational suffixes (`-ation`, `-ness`, ...) are left alone.
//!
//! Rules are applied until none fires, so the result is a fixed point and
//! stemming is idempotent. Every rule shortens the word, so this terminates.

const MIN_STEM: usize = 3;

/// Words no rule may touch.
const PROTECTED: &[&str] = &[
    "always", "anything", "bring", "bus", "ceiling", "during", "evening", "everything",
    "exceed", "gas", "has", "his", "hundred", "king", "kindred", "lens", "morning", "news",
    "nothing", "perhaps", "physics", "plus", "proceed", "ring", "sacred", "series", "sing",
    "something", "species", "spring", "string", "succeed", "thing", "this", "thus",
    "towards", "was", "whereas", "yes",
];

/// Irregular plurals.
const IRREGULAR: &[(&str, &str)] = &[
    ("analyses", "analysis"),
    ("buses", "bus"),
    ("children", "child"),
    ("criteria", "criterion"),
    ("hypotheses", "hypothesis"),
    ("indices", "index"),
    ("matrices", "matrix"),
    ("phenomena", "phenomenon"),
    ("theses", "thesis"),
    ("vertices", "vertex"),
];

/// Stems a lowercase word. Words containing anything other than ASCII
/// letters (numbers, accented words) are returned unchanged.
pub fn stem_word(word: &str) -> String {
    if word.is_empty() || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut current = word.to_string();
    while let Some(next) = step(&current) {
        debug_assert!(next != current);
        current = next;
    }
    current
}

fn step(w: &str) -> Option<String> {
    if let Some(&(_, base)) = IRREGULAR.iter().find(|(from, _)| *from == w) {
        return Some(base.to_string());
    }
    if PROTECTED.contains(&w) {
        return None;
    }
    plural(w).or_else(|| verb(w))
}

fn plural(w: &str) -> Option<String> {
    if let Some(stem) = w.strip_suffix("ies") {
        if stem.len() + 1 >= MIN_STEM {
            return Some(format!("{stem}y"));
        }
    }
    for suffix in ["sses", "zzes", "xes", "ches", "shes"] {
        if w.ends_with(suffix) && w.len() - 2 >= MIN_STEM {
            return Some(w[..w.len() - 2].to_string());
        }
    }
    let stem = w.strip_suffix('s')?;
    if stem.len() < MIN_STEM
        || stem.ends_with('s')
        || stem.ends_with('u')
        || stem.ends_with('i')
        || !has_vowel(stem)
    {
        return None;
    }
    Some(stem.to_string())
}

fn verb(w: &str) -> Option<String> {
    if let Some(stem) = w.strip_suffix("eed") {
        return (measure(stem) > 0).then(|| w[..w.len() - 1].to_string());
    }
    let stem = w.strip_suffix("ing").or_else(|| w.strip_suffix("ed"))?;
    if !has_vowel(stem) {
        return None;
    }
    let b = stem.as_bytes();
    let fixed = if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") {
        format!("{stem}e")
    } else if ends_double_consonant(stem) && !matches!(b[b.len() - 1], b'l' | b's' | b'z') {
        stem[..stem.len() - 1].to_string()
    } else if measure(stem) == 1 && ends_cvc(stem) {
        format!("{stem}e")
    } else {
        stem.to_string()
    };
    (fixed.len() >= MIN_STEM).then_some(fixed)
}

fn is_consonant(b: &[u8], i: usize) -> bool {
    match b[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(b, i - 1),
        _ => true,
    }
}

fn has_vowel(s: &str) -> bool {
    let b = s.as_bytes();
    (0..b.len()).any(|i| !is_consonant(b, i))
}

/// Number of vowel-consonant sequences, the Porter `m`.
fn measure(s: &str) -> usize {
    let b = s.as_bytes();
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..b.len() {
        let vowel = !is_consonant(b, i);
        if prev_vowel && !vowel {
            m += 1;
        }
        prev_vowel = vowel;
    }
    m
}

fn ends_double_consonant(s: &str) -> bool {
    let b = s.as_bytes();
    let n = b.len();
    n >= 2 && b[n - 1] == b[n - 2] && is_consonant(b, n - 1)
}

fn ends_cvc(s: &str) -> bool {
    let b = s.as_bytes();
    let n = b.len();
    n >= 3
        && is_consonant(b, n - 3)
        && !is_consonant(b, n - 2)
        && is_consonant(b, n - 1)
        && !matches!(b[n - 1], b'w' | b'x' | b'y')
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn index_examples() {
        assert_eq!(stem_word("amortized"), "amortize");
        assert_eq!(stem_word("accounting"), "account");
        assert_eq!(stem_word("sorting"), "sort");
        assert_eq!(stem_word("matrix"), "matrix");
    }

    #[test]
    fn plurals() {
        for (w, s) in [
            ("trees", "tree"),
            ("queries", "query"),
            ("boxes", "box"),
            ("matches", "match"),
            ("hashes", "hash"),
            ("classes", "class"),
            ("sizes", "size"),
            ("pointers", "pointer"),
            ("vertices", "vertex"),
            ("analysis", "analysis"),
            ("focus", "focus"),
            ("glass", "glass"),
            ("bus", "bus"),
            ("buses", "bus"),
            ("dies", "die"),
        ] {
            assert_eq!(stem_word(w), s, "{w}");
        }
    }

    #[test]
    fn verbs() {
        for (w, s) in [
            ("making", "make"),
            ("hopping", "hop"),
            ("hoping", "hope"),
            ("running", "run"),
            ("based", "base"),
            ("agreed", "agree"),
            ("needed", "need"),
            ("feed", "feed"),
            ("falling", "fall"),
            ("crossings", "cross"),
            ("thing", "thing"),
            ("string", "string"),
            ("being", "being"),
        ] {
            assert_eq!(stem_word(w), s, "{w}");
        }
        // the fixpoint strips `-ed` from the undoubled stem too
        assert_eq!(stem_word("embedded"), stem_word("embed"));
    }

    #[test]
    fn never_below_three_chars() {
        for w in ["is", "as", "using", "us", "red", "bed", "ties", "sing"] {
            assert!(stem_word(w).len() >= w.len().min(3), "{w}");
        }
    }

    #[test]
    fn non_ascii_and_digits_untouched() {
        assert_eq!(stem_word("27"), "27");
        assert_eq!(stem_word("mp3s"), "mp3s");
        assert_eq!(stem_word("cafés"), "cafés");
    }

    proptest! {
        #[test]
        fn idempotent(w in "[a-z]{1,14}") {
            let once = stem_word(&w);
            prop_assert_eq!(stem_word(&once), once.clone());
            prop_assert!(once.len() >= w.len().min(MIN_STEM));
        }

        #[test]
        fn idempotent_on_inflected(stem in "[a-z]{2,8}", suffix in prop::sample::select(vec!["s", "es", "ies", "ing", "ed", "ings", "eds", "sses"])) {
            let w = format!("{stem}{suffix}");
            let once = stem_word(&w);
            prop_assert_eq!(stem_word(&once), once);
        }
    }
}
