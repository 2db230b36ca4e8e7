use super::ProgramError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

const KEYWORDS: &[&str] = &[
    "cut", "class", "field", "ctor", "method", "var", "if", "else", "while", "for", "return", "new", "call",
    "this", "null", "true", "false", "int", "bool", "float", "void",
];

// Longest symbols first so that maximal munch works by simple prefix test.
const SYMBOLS: &[&str] = &[
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "{", "}", "(", ")", "[", "]", ";", ",", ".", "=", "+", "-",
    "*", "/", "%", "&", "|", "^", "~", "!", "<", ">",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ProgramError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    let advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
        let c = chars[*i];
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (sl, sc) = (line, col);
            advance(&mut i, &mut line, &mut col);
            advance(&mut i, &mut line, &mut col);
            loop {
                if i >= chars.len() {
                    return Err(ProgramError::syntax(sl, sc, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col);
                    advance(&mut i, &mut line, &mut col);
                    break;
                }
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut line, &mut col);
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(&mut i, &mut line, &mut col);
            }
            let mut is_float = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                is_float = true;
                advance(&mut i, &mut line, &mut col);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if is_float {
                Tok::Float(text.parse().map_err(|_| ProgramError::syntax(tl, tc, "bad float literal"))?)
            } else {
                // Magnitude up to 2^63 is accepted so that `-9223372036854775808` folds.
                let v: u64 = text
                    .parse()
                    .map_err(|_| ProgramError::syntax(tl, tc, format!("integer literal `{text}` out of range")))?;
                if v > i64::MAX as u64 + 1 {
                    return Err(ProgramError::syntax(tl, tc, format!("integer literal `{text}` out of range")));
                }
                Tok::Int(v as i64)
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                for _ in s.chars() {
                    advance(&mut i, &mut line, &mut col);
                }
                out.push(Token { tok: Tok::Sym(s), line: tl, col: tc });
            }
            None => return Err(ProgramError::syntax(tl, tc, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_keywords_symbols_and_literals() {
        let toks = tokenize("class A { field int x; } // c\n a <= 3.5 /* x */ 42").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds[0], Tok::Kw("class"));
        assert_eq!(kinds[1], Tok::Ident("A".into()));
        assert!(kinds.contains(&Tok::Sym("<=")));
        assert!(kinds.contains(&Tok::Float(3.5)));
        assert!(kinds.contains(&Tok::Int(42)));
        let a = toks.iter().find(|t| t.tok == Tok::Ident("a".into())).unwrap();
        assert_eq!((a.line, a.col), (2, 2));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("class A {\n  # }").unwrap_err();
        assert_eq!(err.line(), Some(2));
    }
}
