use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::StyleError;

const FUNCTION_WORDS: &str = include_str!("../../data/function_words.lex");

#[derive(Debug, Clone, Default, PartialEq)]
struct Category {
    literals: BTreeSet<String>,
    prefixes: Vec<String>,
}

impl Category {
    fn matches(&self, token: &str) -> bool {
        self.literals.contains(token) || self.prefixes.iter().any(|p| token.starts_with(p.as_str()))
    }

    fn is_empty(&self) -> bool {
        self.literals.is_empty() && self.prefixes.is_empty()
    }
}

/// Word-category dictionary. Patterns are lowercase words or stems with a
/// trailing `*` for prefix matching.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    name: String,
    categories: BTreeMap<String, Category>,
}

impl Lexicon {
    /// Parses the block format:
    ///
    /// ```text
    /// [category]
    /// word
    /// stem*
    /// ```
    ///
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(name: &str, text: &str) -> Result<Lexicon, StyleError> {
        let mut categories: BTreeMap<String, Category> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let header = header.trim();
                if header.is_empty() {
                    return Err(StyleError::Lexicon { line: lineno, reason: "empty category name".into() });
                }
                if categories.contains_key(header) {
                    return Err(StyleError::Lexicon {
                        line: lineno,
                        reason: format!("category [{header}] declared twice"),
                    });
                }
                categories.insert(header.to_string(), Category::default());
                current = Some(header.to_string());
                continue;
            }
            let Some(cat) = current.as_ref().and_then(|c| categories.get_mut(c)) else {
                return Err(StyleError::Lexicon { line: lineno, reason: "pattern before any [category]".into() });
            };
            if line.chars().any(|c| c.is_uppercase() || c.is_whitespace()) {
                return Err(StyleError::Lexicon {
                    line: lineno,
                    reason: format!("pattern {line:?} must be a single lowercase word"),
                });
            }
            let inserted = match line.strip_suffix('*') {
                Some(stem) if !stem.is_empty() => {
                    let fresh = !cat.prefixes.iter().any(|p| p == stem);
                    if fresh {
                        cat.prefixes.push(stem.to_string());
                    }
                    fresh
                }
                Some(_) => {
                    return Err(StyleError::Lexicon { line: lineno, reason: "bare '*' pattern".into() })
                }
                None => cat.literals.insert(line.to_string()),
            };
            if !inserted {
                return Err(StyleError::Lexicon { line: lineno, reason: format!("duplicate pattern {line:?}") });
            }
        }
        if let Some((name, _)) = categories.iter().find(|(_, c)| c.is_empty()) {
            return Err(StyleError::Lexicon { line: 0, reason: format!("category [{name}] has no patterns") });
        }
        if categories.is_empty() {
            return Err(StyleError::Lexicon { line: 0, reason: "no categories".into() });
        }
        Ok(Lexicon { name: name.to_string(), categories })
    }

    pub fn load(path: &Path) -> Result<Lexicon, StyleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StyleError::Lexicon { line: 0, reason: format!("{}: {e}", path.display()) })?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Lexicon::parse(&name, &text)
    }

    /// The bundled open function-word and pronoun lexicon.
    pub fn function_words() -> &'static Lexicon {
        static LEX: OnceLock<Lexicon> = OnceLock::new();
        LEX.get_or_init(|| Lexicon::parse("function_words", FUNCTION_WORDS).expect("bundled lexicon"))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    pub fn has_category(&self, category: &str) -> bool {
        self.categories.contains_key(category)
    }

    pub fn matches(&self, category: &str, token: &str) -> bool {
        self.categories.get(category).is_some_and(|c| c.matches(token))
    }

    /// Number of tokens matching `category`; 0 for unknown categories.
    pub fn count_matches(&self, category: &str, tokens: &[String]) -> usize {
        match self.categories.get(category) {
            Some(c) => tokens.iter().filter(|t| c.matches(t)).count(),
            None => 0,
        }
    }
}

/// Lowercased word tokens. Letters, digits and in-word apostrophes form
/// tokens; everything else (punctuation, the `*` around action text)
/// separates them.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<String>| {
        let t = cur.trim_end_matches('\'');
        if !t.is_empty() {
            out.push(t.to_string());
        }
        cur.clear();
    };
    for ch in text.chars() {
        let ch = if matches!(ch, '\u{2019}' | '\u{2018}') { '\'' } else { ch };
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if ch == '\'' && !cur.is_empty() {
            cur.push(ch);
        } else {
            flush(&mut cur, &mut out);
        }
    }
    flush(&mut cur, &mut out);
    out
}

/// Percentage of tokens matching each category of a lexicon.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StyleProfile {
    pub tokens: usize,
    pub rates: BTreeMap<String, f64>,
}

impl StyleProfile {
    pub fn from_tokens(tokens: &[String], lex: &Lexicon) -> StyleProfile {
        let rates = lex
            .categories()
            .map(|c| {
                let rate = if tokens.is_empty() {
                    0.0
                } else {
                    100.0 * lex.count_matches(c, tokens) as f64 / tokens.len() as f64
                };
                (c.to_string(), rate)
            })
            .collect();
        StyleProfile { tokens: tokens.len(), rates }
    }

    pub fn rate(&self, category: &str) -> f64 {
        self.rates.get(category).copied().unwrap_or(0.0)
    }
}

/// `rate_c = 100 · matches_c / tokens`, 0 for empty text.
pub fn category_rates(text: &str, lex: &Lexicon) -> StyleProfile {
    StyleProfile::from_tokens(&tokenize(text), lex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("I love you."), vec!["i", "love", "you"]);
        assert_eq!(tokenize("*smiles softly*"), vec!["smiles", "softly"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("I'm here, 'ok'"), vec!["i'm", "here", "ok"]);
        assert_eq!(tokenize("Don\u{2019}t GO"), vec!["don't", "go"]);
    }

    #[test]
    fn parse_rejects_bad_lexicons() {
        assert!(Lexicon::parse("x", "word\n").is_err());
        assert!(Lexicon::parse("x", "[a]\n").is_err());
        assert!(Lexicon::parse("x", "[a]\nWord\n").is_err());
        assert!(Lexicon::parse("x", "[a]\nword\nword\n").is_err());
        assert!(Lexicon::parse("x", "[a]\nw*\nw*\n").is_err());
        assert!(Lexicon::parse("x", "[a]\nw\n[a]\nv\n").is_err());
        assert!(Lexicon::parse("x", "").is_err());
    }

    #[test]
    fn prefix_and_literal_matching() {
        let lex = Lexicon::parse("x", "[a]\nhapp*\nsad\n").unwrap();
        assert!(lex.matches("a", "happiness"));
        assert!(lex.matches("a", "sad"));
        assert!(!lex.matches("a", "sadness"));
        assert!(!lex.matches("missing", "sad"));
    }

    #[test]
    fn bundled_lexicon_parses() {
        let lex = Lexicon::function_words();
        for c in ["i", "ppron", "pronoun", "article", "prep", "auxverb", "adverb", "conj", "negate", "quant"] {
            assert!(lex.has_category(c), "{c}");
        }
    }

    #[test]
    fn rates_examples() {
        let lex = Lexicon::function_words();
        let p = category_rates("i walked home slowly past green trees near old river", lex);
        assert_eq!(p.tokens, 10);
        assert_eq!(p.rate("i"), 10.0);
        assert_eq!(category_rates("green trees", lex).rate("i"), 0.0);
        assert_eq!(category_rates("", lex).rate("i"), 0.0);
    }

    fn naive_rate(text: &str, lex_text: &str, category: &str) -> f64 {
        // Independent scan: re-read the pattern block for the category by hand.
        let mut patterns = Vec::new();
        let mut inside = false;
        for line in lex_text.lines().map(str::trim) {
            if line.starts_with('[') {
                inside = line == format!("[{category}]");
            } else if inside && !line.is_empty() && !line.starts_with('#') {
                patterns.push(line.to_string());
            }
        }
        let words: Vec<String> = tokenize(text);
        if words.is_empty() {
            return 0.0;
        }
        let hits = words
            .iter()
            .filter(|w| {
                patterns.iter().any(|p| match p.strip_suffix('*') {
                    Some(stem) => w.starts_with(stem),
                    None => *w == p,
                })
            })
            .count();
        100.0 * hits as f64 / words.len() as f64
    }

    #[test]
    fn rates_agree_with_naive_scan() {
        let text = "Well, I think that we should go to the park because it is not raining and all of you can come.";
        let lex = Lexicon::function_words();
        let p = category_rates(text, lex);
        for c in lex.categories() {
            assert_eq!(p.rate(c), naive_rate(text, FUNCTION_WORDS, c), "{c}");
        }
    }

    proptest! {
        #[test]
        fn tokenize_idempotent(s in "[a-zA-Z0-9 ,.!?*'éü-]{0,60}") {
            let once = tokenize(&s);
            prop_assert_eq!(tokenize(&once.join(" ")), once);
        }

        #[test]
        fn rates_bounded(s in "[a-z ]{0,80}") {
            let p = category_rates(&s, Lexicon::function_words());
            for r in p.rates.values() {
                prop_assert!((0.0..=100.0).contains(r));
            }
        }
    }
}
