//! The original Porter (1980) suffix-stripping stemmer.
//!
//! Operates on lowercase ASCII. Words of two letters or fewer and words with
//! non-ASCII characters are returned unchanged.

use alloc::string::String;
use alloc::vec::Vec;

struct Word {
    b: Vec<u8>,
}

impl Word {
    fn is_consonant(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_consonant(i - 1),
            _ => true,
        }
    }

    /// Number of VC sequences in `b[..len]`.
    fn measure(&self, len: usize) -> usize {
        let mut n = 0;
        let mut i = 0;
        while i < len && self.is_consonant(i) {
            i += 1;
        }
        loop {
            while i < len && !self.is_consonant(i) {
                i += 1;
            }
            if i >= len {
                return n;
            }
            while i < len && self.is_consonant(i) {
                i += 1;
            }
            n += 1;
        }
    }

    fn has_vowel(&self, len: usize) -> bool {
        (0..len).any(|i| !self.is_consonant(i))
    }

    fn ends_double_consonant(&self, len: usize) -> bool {
        len >= 2 && self.b[len - 1] == self.b[len - 2] && self.is_consonant(len - 1)
    }

    /// consonant-vowel-consonant ending, last consonant not w, x or y.
    fn ends_cvc(&self, len: usize) -> bool {
        if len < 3 {
            return false;
        }
        let c = self.b[len - 1];
        self.is_consonant(len - 3)
            && !self.is_consonant(len - 2)
            && self.is_consonant(len - 1)
            && !matches!(c, b'w' | b'x' | b'y')
    }

    fn ends_with(&self, suffix: &str) -> bool {
        self.b.ends_with(suffix.as_bytes())
    }

    fn stem_len(&self, suffix: &str) -> usize {
        self.b.len() - suffix.len()
    }

    fn replace_suffix(&mut self, suffix: &str, with: &str) {
        let n = self.stem_len(suffix);
        self.b.truncate(n);
        self.b.extend_from_slice(with.as_bytes());
    }

    /// Applies the first rule whose suffix matches, if the stem's measure
    /// exceeds `min_measure`. Later rules are never tried once one matches.
    fn apply_rules(&mut self, rules: &[(&str, &str)], min_measure: usize) -> bool {
        for &(suffix, with) in rules {
            if self.ends_with(suffix) {
                if self.measure(self.stem_len(suffix)) > min_measure {
                    self.replace_suffix(suffix, with);
                    return true;
                }
                return false;
            }
        }
        false
    }

    fn step1a(&mut self) {
        if self.ends_with("sses") {
            self.replace_suffix("sses", "ss");
        } else if self.ends_with("ies") {
            self.replace_suffix("ies", "i");
        } else if self.ends_with("ss") {
        } else if self.ends_with("s") {
            self.replace_suffix("s", "");
        }
    }

    fn step1b(&mut self) {
        if self.ends_with("eed") {
            if self.measure(self.stem_len("eed")) > 0 {
                self.replace_suffix("eed", "ee");
            }
            return;
        }
        let stripped = ["ed", "ing"]
            .into_iter()
            .find(|s| self.ends_with(s) && self.has_vowel(self.stem_len(s)));
        let Some(suffix) = stripped else { return };
        self.replace_suffix(suffix, "");

        if self.ends_with("at") || self.ends_with("bl") || self.ends_with("iz") {
            self.b.push(b'e');
        } else if self.ends_double_consonant(self.b.len())
            && !matches!(self.b[self.b.len() - 1], b'l' | b's' | b'z')
        {
            self.b.pop();
        } else if self.measure(self.b.len()) == 1 && self.ends_cvc(self.b.len()) {
            self.b.push(b'e');
        }
    }

    fn step1c(&mut self) {
        if self.ends_with("y") && self.has_vowel(self.stem_len("y")) {
            self.replace_suffix("y", "i");
        }
    }

    pub(super) fn step2(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("ational", "ate"),
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("entli", "ent"),
            ("eli", "e"),
            ("ousli", "ous"),
            ("ization", "ize"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("biliti", "ble"),
        ];
        self.apply_rules(RULES, 0);
    }

    fn step3(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ];
        self.apply_rules(RULES, 0);
    }

    fn step4(&mut self) {
        const RULES: &[&str] = &[
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent",
            "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
        ];
        for &suffix in RULES {
            if !self.ends_with(suffix) {
                continue;
            }
            if suffix == "ment" && self.ends_with("ement") {
                continue;
            }
            if suffix == "ent" && self.ends_with("ment") {
                continue;
            }
            let len = self.stem_len(suffix);
            let ok = self.measure(len) > 1
                && (suffix != "ion" || (len > 0 && matches!(self.b[len - 1], b's' | b't')));
            if ok {
                self.b.truncate(len);
            }
            return;
        }
    }

    fn step5(&mut self) {
        if self.ends_with("e") {
            let len = self.stem_len("e");
            let m = self.measure(len);
            if m > 1 || (m == 1 && !self.ends_cvc(len)) {
                self.b.truncate(len);
            }
        }
        let len = self.b.len();
        if self.measure(len) > 1 && self.ends_double_consonant(len) && self.b[len - 1] == b'l' {
            self.b.pop();
        }
    }
}

fn stemmable(token: &str) -> bool {
    token.len() > 2 && token.bytes().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
}

/// Stems `token` with steps 1a through 5b, once.
pub fn porter_stem(token: &str) -> String {
    if !stemmable(token) {
        return token.into();
    }
    let mut w = Word { b: token.as_bytes().to_vec() };
    w.step1a();
    w.step1b();
    w.step1c();
    w.step2();
    w.step3();
    w.step4();
    w.step5();
    // Only ASCII bytes were ever written.
    String::from_utf8(w.b).unwrap_or_else(|_| token.into())
}

/// Step 2 alone, for inspecting the double-suffix mapping.
pub fn step2_only(token: &str) -> String {
    if !stemmable(token) {
        return token.into();
    }
    let mut w = Word { b: token.as_bytes().to_vec() };
    w.step2();
    String::from_utf8(w.b).unwrap_or_else(|_| token.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_checks() {
        assert_eq!(porter_stem("going"), "go");
        assert_eq!(porter_stem("caresses"), "caress");
        assert_eq!(porter_stem("secure"), "secur");
        assert_eq!(porter_stem("api"), "api");
        assert_eq!(porter_stem("hopping"), "hop");
        assert_eq!(porter_stem("filing"), "file");
    }

    #[test]
    fn step2_maps_ational() {
        assert_eq!(step2_only("relational"), "relate");
        assert_eq!(step2_only("conditional"), "condition");
    }

    #[test]
    fn short_and_foreign_tokens_untouched() {
        assert_eq!(porter_stem("is"), "is");
        assert_eq!(porter_stem("café"), "café");
        assert_eq!(porter_stem(""), "");
    }
}
