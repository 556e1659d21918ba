use serde::{Deserialize, Serialize};

use super::lexicon::{Lexicon, TermKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenKind {
    Keyword,
    LabelRef,
    RelRef,
    PropRef,
    ValueLiteral,
    NumberLiteral,
    FloatLiteral,
    Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    /// Input text covered by the token, quotes included.
    pub surface: String,
    /// Canonical schema name for label, relationship and property refs.
    pub resolved: Option<String>,
    /// Character offsets `[start, end)`.
    pub span: (usize, usize),
}

impl Token {
    /// Lowercase surface with single spaces, for keyword comparison.
    pub fn normalized(&self) -> String {
        self.surface
            .split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn is_quoted(&self) -> bool {
        self.kind == TokenKind::ValueLiteral && self.surface.starts_with(is_open_quote)
    }

    /// The literal text: quotes stripped, everything else as typed.
    pub fn text(&self) -> &str {
        if self.is_quoted() {
            let mut chars = self.surface.chars();
            chars.next();
            chars.next_back();
            chars.as_str()
        } else {
            &self.surface
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PieceKind {
    Word,
    Integer,
    Decimal,
    Quoted,
}

#[derive(Debug, Clone)]
struct Piece {
    kind: PieceKind,
    start: usize,
    end: usize,
    /// Only whitespace separates this piece from the previous one.
    joined: bool,
}

fn is_open_quote(c: char) -> bool {
    matches!(c, '\'' | '"' | '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}')
}

fn closes(open: char, c: char) -> bool {
    match open {
        '"' | '\u{201C}' | '\u{201D}' => matches!(c, '"' | '\u{201C}' | '\u{201D}'),
        _ => matches!(c, '\'' | '\u{2018}' | '\u{2019}'),
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn pieces(chars: &[char]) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut i = 0;
    let mut joined = true;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_open_quote(c) {
            if let Some(len) = chars[i + 1..].iter().position(|&d| closes(c, d)) {
                let end = i + len + 2;
                out.push(Piece {
                    kind: PieceKind::Quoted,
                    start: i,
                    end,
                    joined,
                });
                joined = true;
                i = end;
                continue;
            }
        }
        if !is_word_char(c) {
            joined = false;
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len()
            && (is_word_char(chars[i])
                || (matches!(chars[i], '\'' | '-' | '\u{2019}') && chars.get(i + 1).is_some_and(|&d| is_word_char(d))))
        {
            i += 1;
        }
        let mut kind = if chars[start..i].iter().all(char::is_ascii_digit) {
            PieceKind::Integer
        } else {
            PieceKind::Word
        };
        if kind == PieceKind::Integer
            && chars.get(i) == Some(&'.')
            && chars.get(i + 1).is_some_and(char::is_ascii_digit)
        {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            kind = PieceKind::Decimal;
        }
        out.push(Piece {
            kind,
            start,
            end: i,
            joined,
        });
        joined = true;
    }
    out
}

/// Splits `text` into tokens against `lexicon`.
///
/// Left to right: a quoted string is one value literal; otherwise the
/// longest lexicon phrase starting here wins; otherwise a run of two or
/// more capitalized words or numbers is a value literal; otherwise an
/// integer, decimal or plain word. Punctuation outside quotes is skipped.
pub fn tokenize(text: &str, lexicon: &Lexicon) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let pieces = pieces(&chars);
    let lower: Vec<String> = pieces
        .iter()
        .map(|p| chars[p.start..p.end].iter().collect::<String>().to_lowercase())
        .collect();

    // longest phrase starting at piece i: (piece count, kind, resolved)
    let phrase_at = |i: usize| -> Option<(usize, TermKind, Option<String>)> {
        let max = lexicon.longest_phrase().min(pieces.len() - i);
        (1..=max).rev().find_map(|len| {
            let span = &pieces[i..i + len];
            if span
                .iter()
                .any(|p| p.kind == PieceKind::Quoted || p.kind == PieceKind::Decimal)
                || span[1..].iter().any(|p| !p.joined)
            {
                return None;
            }
            let term = lexicon.term(&lower[i..i + len])?;
            Some((len, term.kind, term.resolved.clone()))
        })
    };
    let capitalized = |p: &Piece| p.kind == PieceKind::Word && chars[p.start].is_uppercase();

    let mut tokens = Vec::new();
    let mut i = 0;
    while i < pieces.len() {
        let p = &pieces[i];
        let (len, kind, resolved) = if p.kind == PieceKind::Quoted {
            (1, TokenKind::ValueLiteral, None)
        } else if let Some((len, term, resolved)) = phrase_at(i) {
            let kind = match term {
                TermKind::Keyword => TokenKind::Keyword,
                TermKind::Relationship => TokenKind::RelRef,
                TermKind::Label => TokenKind::LabelRef,
                TermKind::Property => TokenKind::PropRef,
                TermKind::Value => TokenKind::ValueLiteral,
            };
            (len, kind, resolved)
        } else {
            let mut run = 1;
            if capitalized(p) {
                while let Some(next) = pieces.get(i + run) {
                    let continues = next.joined
                        && (capitalized(next) || matches!(next.kind, PieceKind::Integer | PieceKind::Decimal))
                        && phrase_at(i + run).is_none();
                    if !continues {
                        break;
                    }
                    run += 1;
                }
            }
            if run > 1 {
                (run, TokenKind::ValueLiteral, None)
            } else {
                let kind = match p.kind {
                    PieceKind::Integer => TokenKind::NumberLiteral,
                    PieceKind::Decimal => TokenKind::FloatLiteral,
                    _ => TokenKind::Word,
                };
                (1, kind, None)
            }
        };
        let start = pieces[i].start;
        let end = pieces[i + len - 1].end;
        tokens.push(Token {
            kind,
            surface: chars[start..end].iter().collect(),
            resolved,
            span: (start, end),
        });
        i += len;
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSchema;
    use crate::nl::lexicon::bind_vocabulary;

    fn lexicon() -> Lexicon {
        let mut s = GraphSchema::default();
        s.labels.extend(["Patients".to_string(), "Medications".to_string()]);
        s.properties.insert("Patients".into(), ["RACE".to_string()].into());
        s.properties
            .insert("Medications".into(), ["DESCRIPTION".to_string()].into());
        s.relationship_types.insert(
            "PATIENT_HAS_MEDICATION".into(),
            ("Patients".into(), "Medications".into()),
        );
        bind_vocabulary(&s, &[]).unwrap()
    }

    fn kinds(tokens: &[Token]) -> Vec<(TokenKind, &str)> {
        tokens.iter().map(|t| (t.kind, t.surface.as_str())).collect()
    }

    #[test]
    fn aggregation_question() {
        let tokens = tokenize("How many patients are caucasian?", &lexicon());
        assert_eq!(
            kinds(&tokens),
            vec![
                (TokenKind::Keyword, "How many"),
                (TokenKind::LabelRef, "patients"),
                (TokenKind::Keyword, "are"),
                (TokenKind::Word, "caucasian"),
            ]
        );
        assert_eq!(tokens[1].resolved.as_deref(), Some("Patients"));
        assert_eq!(tokens[3].span, (22, 31));
    }

    #[test]
    fn numbers_and_floats() {
        let tokens = tokenize("with 25 iterations and a damping factor 0.60.", &lexicon());
        assert_eq!(tokens[1].kind, TokenKind::NumberLiteral);
        assert_eq!(
            tokens.last().map(|t| (t.kind, t.surface.as_str())),
            Some((TokenKind::FloatLiteral, "0.60"))
        );
        assert_eq!(tokens[5].surface, "damping factor");
    }

    #[test]
    fn title_case_runs_and_quotes() {
        let tokens = tokenize(
            "the DESCRIPTION is Amlodipine 5 MG Oral Tablet and 'it''s' \"x y\"",
            &lexicon(),
        );
        let k = kinds(&tokens);
        assert_eq!(k[1], (TokenKind::PropRef, "DESCRIPTION"));
        assert_eq!(k[3], (TokenKind::ValueLiteral, "Amlodipine 5 MG Oral Tablet"));
        assert_eq!(k[4], (TokenKind::Keyword, "and"));
        assert_eq!(tokens[5].text(), "it");
        assert!(tokens.last().unwrap().is_quoted());
        assert_eq!(tokens.last().unwrap().text(), "x y");
    }

    #[test]
    fn run_stops_at_schema_terms() {
        let tokens = tokenize("Find the Medications", &lexicon());
        assert_eq!(
            kinds(&tokens),
            vec![
                (TokenKind::Keyword, "Find"),
                (TokenKind::Keyword, "the"),
                (TokenKind::LabelRef, "Medications"),
            ]
        );
        let tokens = tokenize("Boston Medications", &lexicon());
        assert_eq!(tokens[0].kind, TokenKind::Word);
    }

    #[test]
    fn phrases_do_not_cross_punctuation() {
        let tokens = tokenize("how, many", &lexicon());
        assert_eq!(tokens.len(), 2);
        let tokens = tokenize("PATIENT_HAS_MEDICATION", &lexicon());
        assert_eq!(tokens[0].kind, TokenKind::RelRef);
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert!(tokenize("", &lexicon()).is_empty());
        assert!(tokenize(" ?! ", &lexicon()).is_empty());
    }
}
