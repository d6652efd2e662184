use super::ExprError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TokenKind {
    Number(f64),
    Identifier,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Byte offset of the first character in the source.
    pub offset: usize,
}

/// Splits `src` into tokens, skipping whitespace.
///
/// Numbers are decimal with an optional fraction and exponent (`1.5e-2`).
/// There are no signed literals: a leading `-` is always a separate token.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            b',' => Some(TokenKind::Comma),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Token { kind, lexeme: (c as char).to_string(), offset: start });
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                } else {
                    return Err(ExprError::MalformedNumber { offset: start });
                }
            }
            // A second decimal point or a letter glued to the literal.
            if i < bytes.len() && (bytes[i] == b'.' || bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                return Err(ExprError::MalformedNumber { offset: start });
            }
            let lexeme = &src[start..i];
            let value: f64 = lexeme.parse().map_err(|_| ExprError::MalformedNumber { offset: start })?;
            if !value.is_finite() {
                return Err(ExprError::MalformedNumber { offset: start });
            }
            out.push(Token { kind: TokenKind::Number(value), lexeme: lexeme.to_string(), offset: start });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { kind: TokenKind::Identifier, lexeme: src[start..i].to_string(), offset: start });
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(ExprError::IllegalCharacter { ch, offset: start });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn lexes_product_with_call() {
        use TokenKind::*;
        let toks = tokenize("t*sin(2*v)").unwrap();
        assert_eq!(
            toks.iter().map(|t| t.kind).collect::<Vec<_>>(),
            vec![Identifier, Star, Identifier, LParen, Number(2.0), Star, Identifier, RParen]
        );
        assert_eq!(toks[0].lexeme, "t");
        assert_eq!(toks[2].lexeme, "sin");
        assert!(toks.windows(2).all(|w| w[0].offset < w[1].offset));
    }

    #[test]
    fn lexes_exponent_literal() {
        assert_eq!(kinds("1.5e-2"), vec![TokenKind::Number(0.015)]);
        assert_eq!(kinds(".5"), vec![TokenKind::Number(0.5)]);
        assert_eq!(kinds("2E3"), vec![TokenKind::Number(2000.0)]);
    }

    #[test]
    fn illegal_character_offset() {
        assert_eq!(tokenize("a $ b"), Err(ExprError::IllegalCharacter { ch: '$', offset: 2 }));
    }

    #[test]
    fn malformed_numbers() {
        assert!(matches!(tokenize("1e"), Err(ExprError::MalformedNumber { offset: 0 })));
        assert!(matches!(tokenize("u + 1.2.3"), Err(ExprError::MalformedNumber { offset: 4 })));
        assert!(matches!(tokenize("2u"), Err(ExprError::MalformedNumber { offset: 0 })));
        assert!(matches!(tokenize("x + 1e999"), Err(ExprError::MalformedNumber { offset: 4 })));
    }
}
