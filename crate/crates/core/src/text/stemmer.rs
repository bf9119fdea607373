//! Snowball stemmer for Spanish.
//!
//! Direct transcription of the published Snowball algorithm: regions RV, R1
//! and R2; attached pronouns; standard, y-verb and verb suffixes; residual
//! suffixes; acute accents removed at the end. Operates on `char`s so accented
//! letters count as one position.

const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u', 'á', 'é', 'í', 'ó', 'ú', 'ü'];

fn is_vowel(c: char) -> bool {
    VOWELS.contains(&c)
}

const PRONOUNS: &[&str] = &[
    "me", "se", "sela", "selo", "selas", "selos", "la", "le", "lo", "las", "les", "los", "nos",
];

enum Gerund {
    Replace(&'static str),
    Delete,
    AfterU,
}

const GERUNDS: &[(&str, Gerund)] = &[
    ("iéndo", Gerund::Replace("iendo")),
    ("ándo", Gerund::Replace("ando")),
    ("ár", Gerund::Replace("ar")),
    ("ér", Gerund::Replace("er")),
    ("ír", Gerund::Replace("ir")),
    ("ando", Gerund::Delete),
    ("iendo", Gerund::Delete),
    ("ar", Gerund::Delete),
    ("er", Gerund::Delete),
    ("ir", Gerund::Delete),
    ("yendo", Gerund::AfterU),
];

#[derive(Clone, Copy)]
enum Standard {
    Delete,
    DeleteThenIc,
    Log,
    U,
    Ente,
    Amente,
    Mente,
    Idad,
    Iv,
}

const STANDARD: &[(&str, Standard)] = &[
    ("anza", Standard::Delete),
    ("anzas", Standard::Delete),
    ("ico", Standard::Delete),
    ("ica", Standard::Delete),
    ("icos", Standard::Delete),
    ("icas", Standard::Delete),
    ("ismo", Standard::Delete),
    ("ismos", Standard::Delete),
    ("able", Standard::Delete),
    ("ables", Standard::Delete),
    ("ible", Standard::Delete),
    ("ibles", Standard::Delete),
    ("ista", Standard::Delete),
    ("istas", Standard::Delete),
    ("oso", Standard::Delete),
    ("osa", Standard::Delete),
    ("osos", Standard::Delete),
    ("osas", Standard::Delete),
    ("amiento", Standard::Delete),
    ("amientos", Standard::Delete),
    ("imiento", Standard::Delete),
    ("imientos", Standard::Delete),
    ("adora", Standard::DeleteThenIc),
    ("ador", Standard::DeleteThenIc),
    ("ación", Standard::DeleteThenIc),
    ("acion", Standard::DeleteThenIc),
    ("adoras", Standard::DeleteThenIc),
    ("adores", Standard::DeleteThenIc),
    ("aciones", Standard::DeleteThenIc),
    ("ante", Standard::DeleteThenIc),
    ("antes", Standard::DeleteThenIc),
    ("ancia", Standard::DeleteThenIc),
    ("ancias", Standard::DeleteThenIc),
    ("logía", Standard::Log),
    ("logías", Standard::Log),
    ("ución", Standard::U),
    ("ucion", Standard::U),
    ("uciones", Standard::U),
    ("encia", Standard::Ente),
    ("encias", Standard::Ente),
    ("amente", Standard::Amente),
    ("mente", Standard::Mente),
    ("idad", Standard::Idad),
    ("idades", Standard::Idad),
    ("iva", Standard::Iv),
    ("ivo", Standard::Iv),
    ("ivas", Standard::Iv),
    ("ivos", Standard::Iv),
];

const Y_VERB: &[&str] = &[
    "ya", "ye", "yan", "yen", "yeron", "yendo", "yo", "yó", "yas", "yes", "yais", "yamos",
];

/// Suffixes deleted outright in the verb step, plus the four whose deletion
/// also swallows a `u` after `g`.
const VERB_GU: &[&str] = &["en", "es", "éis", "emos"];
const VERB: &[&str] = &[
    "arían", "arías", "arán", "arás", "aríais", "aría", "aréis", "aríamos", "aremos", "ará",
    "aré", "erían", "erías", "erán", "erás", "eríais", "ería", "eréis", "eríamos", "eremos",
    "erá", "eré", "irían", "irías", "irán", "irás", "iríais", "iría", "iréis", "iríamos",
    "iremos", "irá", "iré", "aba", "ada", "ida", "ía", "ara", "iera", "ad", "ed", "id", "ase",
    "iese", "aste", "iste", "an", "aban", "ían", "aran", "ieran", "asen", "iesen", "aron",
    "ieron", "ado", "ido", "ando", "iendo", "ió", "ar", "er", "ir", "as", "abas", "adas",
    "idas", "ías", "aras", "ieras", "ases", "ieses", "ís", "áis", "abais", "íais", "arais",
    "ierais", "aseis", "ieseis", "asteis", "isteis", "ados", "idos", "amos", "ábamos", "íamos",
    "imos", "áramos", "iéramos", "iésemos", "ásemos",
];

/// Char length of `suffix` if `word[..end]` ends with it.
fn suffix_at(word: &[char], end: usize, suffix: &str) -> Option<usize> {
    let mut i = end;
    for c in suffix.chars().rev() {
        if i == 0 || word[i - 1] != c {
            return None;
        }
        i -= 1;
    }
    Some(end - i)
}

/// Longest entry of `table` ending at `end` whose start is at or after
/// `limit`. Returns (start, entry index).
fn longest<'a, T>(
    word: &[char],
    end: usize,
    limit: usize,
    table: &'a [T],
    key: impl Fn(&'a T) -> &'a str,
) -> Option<(usize, usize)> {
    table
        .iter()
        .enumerate()
        .filter_map(|(idx, entry)| {
            let len = suffix_at(word, end, key(entry))?;
            (end - len >= limit).then_some((end - len, idx))
        })
        .min_by_key(|&(start, _)| start)
}

struct Word {
    chars: Vec<char>,
    rv: usize,
    r1: usize,
    r2: usize,
}

impl Word {
    fn new(s: &str) -> Word {
        let chars: Vec<char> = s.chars().collect();
        let (rv, r1, r2) = regions(&chars);
        Word { chars, rv, r1, r2 }
    }

    fn len(&self) -> usize {
        self.chars.len()
    }

    fn ends_with(&self, suffix: &str) -> Option<usize> {
        suffix_at(&self.chars, self.len(), suffix).map(|l| self.len() - l)
    }

    fn char_before(&self, pos: usize) -> Option<char> {
        pos.checked_sub(1).map(|p| self.chars[p])
    }

    fn replace_from(&mut self, start: usize, with: &str) {
        self.chars.truncate(start);
        self.chars.extend(with.chars());
    }

    /// Deletes a trailing `suffix` if it starts inside R2.
    fn delete_in_r2(&mut self, suffix: &str) -> bool {
        match self.ends_with(suffix) {
            Some(start) if start >= self.r2 => {
                self.chars.truncate(start);
                true
            }
            _ => false,
        }
    }

    /// Deletes the longest trailing entry of `table` if it starts in R2.
    /// Returns the entry that was deleted.
    fn delete_longest_in_r2(&mut self, table: &[&'static str]) -> Option<&'static str> {
        let (start, idx) = longest(&self.chars, self.len(), 0, table, |s| *s)?;
        if start < self.r2 {
            return None;
        }
        self.chars.truncate(start);
        Some(table[idx])
    }
}

/// RV, R1 and R2 start positions.
fn regions(w: &[char]) -> (usize, usize, usize) {
    let n = w.len();
    let first_from = |from: usize, vowel: bool| (from..n).find(|&i| is_vowel(w[i]) == vowel);

    let rv = if n < 2 {
        n
    } else {
        match (is_vowel(w[0]), is_vowel(w[1])) {
            // Vowel then consonant: after the next vowel.
            (true, false) => first_from(2, true).map_or(n, |i| i + 1),
            // Two vowels: after the next consonant.
            (true, true) => first_from(2, false).map_or(n, |i| i + 1),
            // Two consonants: after the next vowel.
            (false, false) => first_from(2, true).map_or(n, |i| i + 1),
            // Consonant then vowel: after the third letter.
            (false, true) => {
                if n >= 3 {
                    3
                } else {
                    n
                }
            }
        }
    };

    // R1: after the first non-vowel that follows a vowel; R2 likewise inside R1.
    let after_vc = |from: usize| -> Option<usize> {
        let v = first_from(from, true)?;
        let c = first_from(v + 1, false)?;
        Some(c + 1)
    };
    let r1 = after_vc(0).unwrap_or(n);
    let r2 = if r1 < n { after_vc(r1).unwrap_or(n) } else { n };
    (rv, r1, r2)
}

fn attached_pronoun(w: &mut Word) {
    let Some((p_start, _)) = longest(&w.chars, w.len(), 0, PRONOUNS, |s| *s) else {
        return;
    };
    let Some((g_start, idx)) = longest(&w.chars, p_start, 0, GERUNDS, |g| g.0) else {
        return;
    };
    if g_start < w.rv {
        return;
    }
    match GERUNDS[idx].1 {
        Gerund::Replace(plain) => w.replace_from(g_start, plain),
        Gerund::Delete => w.chars.truncate(p_start),
        Gerund::AfterU => {
            if w.char_before(g_start) == Some('u') {
                w.chars.truncate(p_start);
            }
        }
    }
}

fn standard_suffix(w: &mut Word) -> bool {
    let Some((start, idx)) = longest(&w.chars, w.len(), 0, STANDARD, |e| e.0) else {
        return false;
    };
    let action = STANDARD[idx].1;
    if matches!(action, Standard::Amente) {
        if start < w.r1 {
            return false;
        }
    } else if start < w.r2 {
        return false;
    }
    match action {
        Standard::Delete => w.chars.truncate(start),
        Standard::DeleteThenIc => {
            w.chars.truncate(start);
            w.delete_in_r2("ic");
        }
        Standard::Log => w.replace_from(start, "log"),
        Standard::U => w.replace_from(start, "u"),
        Standard::Ente => w.replace_from(start, "ente"),
        Standard::Amente => {
            w.chars.truncate(start);
            if w.delete_longest_in_r2(&["iv", "os", "ic", "ad"]) == Some("iv") {
                w.delete_in_r2("at");
            }
        }
        Standard::Mente => {
            w.chars.truncate(start);
            w.delete_longest_in_r2(&["ante", "able", "ible"]);
        }
        Standard::Idad => {
            w.chars.truncate(start);
            w.delete_longest_in_r2(&["abil", "ic", "iv"]);
        }
        Standard::Iv => {
            w.chars.truncate(start);
            w.delete_in_r2("at");
        }
    }
    true
}

fn y_verb_suffix(w: &mut Word) -> bool {
    let Some((start, _)) = longest(&w.chars, w.len(), w.rv, Y_VERB, |s| *s) else {
        return false;
    };
    if w.char_before(start) != Some('u') {
        return false;
    }
    w.chars.truncate(start);
    true
}

fn verb_suffix(w: &mut Word) -> bool {
    let end = w.len();
    let gu = longest(&w.chars, end, w.rv, VERB_GU, |s| *s);
    let plain = longest(&w.chars, end, w.rv, VERB, |s| *s);
    match (gu, plain) {
        (Some((gs, _)), p) if p.is_none_or(|(ps, _)| gs < ps) => {
            let cut = if w.char_before(gs) == Some('u') && w.char_before(gs - 1) == Some('g') {
                gs - 1
            } else {
                gs
            };
            w.chars.truncate(cut);
            true
        }
        (_, Some((ps, _))) => {
            w.chars.truncate(ps);
            true
        }
        _ => false,
    }
}

fn residual_suffix(w: &mut Word) {
    const DELETE: &[&str] = &["os", "a", "o", "á", "í", "ó"];
    const E: &[&str] = &["e", "é"];
    let end = w.len();
    let d = longest(&w.chars, end, 0, DELETE, |s| *s);
    let e = longest(&w.chars, end, 0, E, |s| *s);
    if let Some((start, _)) = d {
        if start >= w.rv {
            w.chars.truncate(start);
        }
    } else if let Some((start, _)) = e {
        if start < w.rv {
            return;
        }
        w.chars.truncate(start);
        if w.char_before(start) == Some('u')
            && w.char_before(start - 1) == Some('g')
            && start > w.rv
        {
            w.chars.truncate(start - 1);
        }
    }
}

fn strip_acute(c: char) -> char {
    match c {
        'á' => 'a',
        'é' => 'e',
        'í' => 'i',
        'ó' => 'o',
        'ú' => 'u',
        other => other,
    }
}

/// Stems one lowercase Spanish word.
pub fn stem(word: &str) -> String {
    let mut w = Word::new(word);
    attached_pronoun(&mut w);
    let _ = standard_suffix(&mut w) || y_verb_suffix(&mut w) || verb_suffix(&mut w);
    residual_suffix(&mut w);
    w.chars.into_iter().map(strip_acute).collect()
}
