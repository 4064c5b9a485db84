//! Folding of the LaTeX markup commonly found in BibTeX field values.

use unicode_normalization::UnicodeNormalization;

fn combining_mark(accent: char) -> Option<char> {
    Some(match accent {
        '`' => '\u{0300}',
        '\'' => '\u{0301}',
        '^' => '\u{0302}',
        '~' => '\u{0303}',
        '=' => '\u{0304}',
        'u' => '\u{0306}',
        '.' => '\u{0307}',
        '"' => '\u{0308}',
        'r' => '\u{030A}',
        'H' => '\u{030B}',
        'v' => '\u{030C}',
        'd' => '\u{0323}',
        'c' => '\u{0327}',
        'k' => '\u{0328}',
        'b' => '\u{0331}',
        _ => return None,
    })
}

fn named_symbol(name: &str) -> Option<&'static str> {
    Some(match name {
        "ss" => "ß",
        "o" => "ø",
        "O" => "Ø",
        "aa" => "å",
        "AA" => "Å",
        "ae" => "æ",
        "AE" => "Æ",
        "oe" => "œ",
        "OE" => "Œ",
        "l" => "ł",
        "L" => "Ł",
        "i" => "i",
        "j" => "j",
        "textbackslash" => "\\",
        "textasciitilde" => "~",
        "textasciicircum" => "^",
        "textendash" => "–",
        "textemdash" => "—",
        "textquotesingle" => "'",
        _ => return None,
    })
}

/// Replace accent macros, escapes and grouping braces with plain Unicode
/// text and collapse whitespace. Unknown commands are dropped, their
/// arguments kept.
pub fn fold_latex(input: &str) -> String {
    let chars: Vec<char> = input.chars().collect();
    let mut out = String::with_capacity(input.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\\' => i = fold_command(&chars, i + 1, &mut out),
            '{' | '}' => i += 1,
            '~' => {
                out.push(' ');
                i += 1;
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    let composed: String = out.nfc().collect();
    composed.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Handle the command starting after a backslash at `i`; returns the index
/// after everything consumed.
fn fold_command(chars: &[char], mut i: usize, out: &mut String) -> usize {
    let Some(&c) = chars.get(i) else {
        return i;
    };
    if matches!(c, '&' | '%' | '$' | '#' | '_' | '{' | '}') {
        out.push(c);
        return i + 1;
    }
    if c == '\\' {
        out.push(' ');
        return i + 1;
    }
    if !c.is_ascii_alphabetic() {
        if let Some(mark) = combining_mark(c) {
            return apply_accent(chars, i + 1, mark, out);
        }
        return i + 1;
    }
    let start = i;
    while i < chars.len() && chars[i].is_ascii_alphabetic() {
        i += 1;
    }
    let name: String = chars[start..i].iter().collect();
    // single-letter accent commands: \c{c}, \v s, \u{a}
    if name.len() == 1 {
        if let Some(mark) = combining_mark(c) {
            if chars.get(i).is_some_and(|n| *n == '{' || n.is_whitespace()) {
                return apply_accent(chars, i, mark, out);
            }
        }
    }
    if let Some(sym) = named_symbol(&name) {
        out.push_str(sym);
        // a following empty group or space only terminates the command
        if chars.get(i) == Some(&'{') && chars.get(i + 1) == Some(&'}') {
            i += 2;
        } else if chars.get(i).is_some_and(|n| *n == ' ') {
            i += 1;
        }
    }
    i
}

/// Apply `mark` to the next base letter, which may be braced, spaced or a
/// dotless-i command.
fn apply_accent(chars: &[char], mut i: usize, mark: char, out: &mut String) -> usize {
    while chars.get(i).is_some_and(|c| *c == ' ') {
        i += 1;
    }
    let braced = chars.get(i) == Some(&'{');
    if braced {
        i += 1;
    }
    let base = match chars.get(i) {
        Some('\\') => {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j].is_ascii_alphabetic() {
                j += 1;
            }
            let name: String = chars[start..j].iter().collect();
            i = j;
            named_symbol(&name).and_then(|s| s.chars().next())
        }
        Some('}') | None => None,
        Some(&c) => {
            i += 1;
            Some(c)
        }
    };
    if braced && chars.get(i) == Some(&'}') {
        i += 1;
    }
    if let Some(b) = base {
        out.push(b);
        out.push(mark);
    }
    i
}

/// Escape text so that [`fold_latex`] returns it unchanged (modulo
/// whitespace collapsing).
pub fn escape_latex(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '~' => out.push_str("\\textasciitilde{}"),
            '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn accent_forms() {
        assert_eq!(fold_latex(r#"M{\"u}ller"#), "Müller");
        assert_eq!(fold_latex(r#"M\"uller"#), "Müller");
        assert_eq!(fold_latex(r"Gr\'{e}goire"), "Grégoire");
        assert_eq!(fold_latex(r"Fran\c{c}ois"), "François");
        assert_eq!(fold_latex(r"\v{S}koda"), "Škoda");
        assert_eq!(fold_latex(r"Mart\'{\i}nez"), "Martínez");
        assert_eq!(fold_latex(r"Erd\H{o}s"), "Erdős");
    }

    #[test]
    fn symbols_and_groups() {
        assert_eq!(fold_latex(r"{\O}yvind"), "Øyvind");
        assert_eq!(fold_latex(r"Stra\ss e"), "Straße");
        assert_eq!(fold_latex(r"{BERT}: Pre-training"), "BERT: Pre-training");
        assert_eq!(fold_latex(r"R\&D \emph{matters}"), "R&D matters");
        assert_eq!(fold_latex("a~b  \n c"), "a b c");
        assert_eq!(fold_latex("5998--6008"), "5998--6008");
    }

    proptest! {
        #[test]
        fn escape_then_fold_is_identity(s in r"[a-zA-Z0-9 {}\\~&%:.,'-]{0,40}") {
            let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ");
            prop_assert_eq!(fold_latex(&escape_latex(&s)), collapsed);
        }
    }
}
