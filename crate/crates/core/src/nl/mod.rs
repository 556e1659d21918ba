//! Simplified-English questions: vocabulary, tokens, grammar.

mod ast;
mod lexicon;
mod parser;
mod sample;
mod token;

pub use ast::{Condition, Production, QuestionAst};
pub use lexicon::{
    bind_vocabulary, read_synonyms, AlgorithmKind, Lexicon, Synonym, Term, TermKind, VocabularyError, PHRASE_TERMINALS,
    TERMINALS,
};
pub use parser::{parse, parse_question, ParseError};
pub use sample::grammar_sample;
pub use token::{tokenize, Token, TokenKind};
