use super::Span;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(f64),
    Arrow,
    Punct(char),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// One source line with its position in the whole text.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Line<'a> {
    pub number: usize,
    pub byte_offset: usize,
    pub text: &'a str,
}

impl Line<'_> {
    /// Span of bytes `start..end` of this line.
    pub fn span(&self, start: usize, end: usize) -> Span {
        let col = |b: usize| self.text[..b].chars().count() + 1;
        Span {
            line: self.number,
            col_start: col(start),
            col_end: col(end),
            byte_start: self.byte_offset + start,
            byte_end: self.byte_offset + end,
        }
    }

    /// Zero-width span at the end of the line, before any comment.
    pub fn end_span(&self) -> Span {
        let end = self.text.find('#').unwrap_or(self.text.len());
        let end = self.text[..end].trim_end().len();
        self.span(end, end)
    }
}

pub(crate) fn lines(src: &str) -> impl Iterator<Item = Line<'_>> {
    let mut offset = 0;
    src.split('\n').enumerate().map(move |(i, raw)| {
        let line = Line { number: i + 1, byte_offset: offset, text: raw.strip_suffix('\r').unwrap_or(raw) };
        offset += raw.len() + 1;
        line
    })
}

/// Lexing failure: offending byte range within the line and a message.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LexError {
    pub span: Span,
    pub message: String,
}

pub(crate) fn lex(line: &Line<'_>) -> Result<Vec<Token>, LexError> {
    let text = line.text;
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = text[i..].chars().next().expect("in bounds");
        let start = i;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(text[start..i].to_string())
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i = scan_number(bytes, i);
            let lexeme = &text[start..i];
            match lexeme.parse::<f64>() {
                Ok(v) if v.is_finite() => Tok::Number(v),
                _ => {
                    return Err(LexError { span: line.span(start, i), message: format!("number '{lexeme}' is out of range") })
                }
            }
        } else if c == '-' && bytes.get(i + 1) == Some(&b'>') {
            i += 2;
            Tok::Arrow
        } else if "[]{}(),;=:+-*/^.".contains(c) {
            i += 1;
            Tok::Punct(c)
        } else {
            i += c.len_utf8();
            return Err(LexError { span: line.span(start, i), message: format!("unexpected character {c:?}") });
        };
        out.push(Token { tok, span: line.span(start, i) });
    }
    Ok(out)
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    let digits = |mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    i = digits(i);
    if bytes.get(i) == Some(&b'.') {
        i = digits(i + 1);
    }
    if matches!(bytes.get(i), Some(b'e' | b'E')) {
        let mut j = i + 1;
        if matches!(bytes.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        if bytes.get(j).is_some_and(u8::is_ascii_digit) {
            i = digits(j);
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        let line = lines(s).next().unwrap();
        lex(&line).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_statements() {
        assert_eq!(
            toks("wire a -> b.in1 # trailing"),
            [
                Tok::Ident("wire".into()),
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Ident("b".into()),
                Tok::Punct('.'),
                Tok::Ident("in1".into())
            ]
        );
        assert_eq!(toks("1e-9 2.5 .5 2e"), [Tok::Number(1e-9), Tok::Number(2.5), Tok::Number(0.5), Tok::Number(2.0), Tok::Ident("e".into())]);
    }

    #[test]
    fn spans_count_characters() {
        let line = lines("x\n  é").nth(1).unwrap();
        let err = lex(&line).unwrap_err();
        assert_eq!((err.span.line, err.span.col_start, err.span.col_end), (2, 3, 4));
        assert_eq!((err.span.byte_start, err.span.byte_end), (4, 6));
    }

    #[test]
    fn overflowing_numbers_are_errors() {
        let line = lines("1e999").next().unwrap();
        assert!(lex(&line).is_err());
    }
}
