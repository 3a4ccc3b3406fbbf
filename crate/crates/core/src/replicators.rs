//! Known self-replicators, shipped as data files under `data/replicators`,
//! plus the text formats used to load programs.

use crate::lang::subleq;
use crate::substrate::LanguageId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramParseError {
    #[error("invalid hex program: {0}")]
    Hex(String),
    #[error(transparent)]
    Decimal(#[from] subleq::AsmError),
}

/// Parses hex bytes. Whitespace is ignored and `#` starts a comment that
/// runs to the end of the line.
pub fn parse_hex(text: &str) -> Result<Vec<u8>, ProgramParseError> {
    let digits: String = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.chars())
        .filter(|c| !c.is_whitespace())
        .collect();
    hex::decode(&digits).map_err(|e| ProgramParseError::Hex(e.to_string()))
}

/// Parses a program in the natural text format of `language`: signed
/// decimal listings for the SUBLEQ family, hex for everything else.
pub fn parse_program(language: LanguageId, text: &str) -> Result<Vec<u8>, ProgramParseError> {
    match language {
        LanguageId::Subleq | LanguageId::Rsubleq4 => {
            let body: String = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .collect::<Vec<_>>()
                .join(" ");
            Ok(subleq::assemble(&body)?)
        }
        _ => parse_hex(text),
    }
}

fn builtin(text: &str) -> Vec<u8> {
    parse_hex(text).expect("shipped replicator files are valid hex")
}

pub const BFF_PALINDROME: &str = include_str!("../data/replicators/bff_palindrome.hex");
pub const FORTH_SOUP_ONE_BYTE: &str = include_str!("../data/replicators/forth_soup_one_byte.hex");
pub const FORTH_SOUP_SIX_BYTE: &str = include_str!("../data/replicators/forth_soup_six_byte.hex");
pub const FORTH_SOUP_2D_INC: &str = include_str!("../data/replicators/forth_soup_2d_inc.hex");
pub const FORTH_SOUP_2D_DEC: &str = include_str!("../data/replicators/forth_soup_2d_dec.hex");
pub const FORTH_SOUP_2D_SHORT: &str = include_str!("../data/replicators/forth_soup_2d_short.hex");
pub const FORTH_COPY_SHORT: &str = include_str!("../data/replicators/forth_copy_short.hex");
pub const FORTH_COPY_LONG: &str = include_str!("../data/replicators/forth_copy_long.hex");
pub const RSUBLEQ4_25: &str = include_str!("../data/replicators/rsubleq4_25.txt");

/// 64-byte BFF palindrome `[[{.>]-]` ... `]-]>.{[[`.
pub fn bff_palindrome() -> Vec<u8> {
    builtin(BFF_PALINDROME)
}

pub fn forth_one_byte() -> Vec<u8> {
    builtin(FORTH_SOUP_ONE_BYTE)
}

/// `COPY+64 INC DUP JUMP+2 NOP JUMP-5`
pub fn forth_six_byte() -> Vec<u8> {
    builtin(FORTH_SOUP_SIX_BYTE)
}

pub fn forth_2d() -> [Vec<u8>; 3] {
    [builtin(FORTH_SOUP_2D_INC), builtin(FORTH_SOUP_2D_DEC), builtin(FORTH_SOUP_2D_SHORT)]
}

/// `PUSH-3 PUSH7 COPY INC PUSH-6 PUSH-2 JNZ`
pub fn forth_copy_short() -> Vec<u8> {
    builtin(FORTH_COPY_SHORT)
}

pub fn forth_copy_long() -> Vec<u8> {
    builtin(FORTH_COPY_LONG)
}

pub fn rsubleq4_25() -> Vec<u8> {
    parse_program(LanguageId::Rsubleq4, RSUBLEQ4_25).expect("shipped listing is valid")
}

/// Looks up a shipped replicator by file stem, e.g. `bff_palindrome`.
pub fn by_name(name: &str) -> Option<(LanguageId, Vec<u8>)> {
    Some(match name {
        "bff_palindrome" => (LanguageId::Bff, bff_palindrome()),
        "forth_soup_one_byte" => (LanguageId::ForthSoup, forth_one_byte()),
        "forth_soup_six_byte" => (LanguageId::ForthSoup, forth_six_byte()),
        "forth_soup_2d_inc" => (LanguageId::ForthSoup, builtin(FORTH_SOUP_2D_INC)),
        "forth_soup_2d_dec" => (LanguageId::ForthSoup, builtin(FORTH_SOUP_2D_DEC)),
        "forth_soup_2d_short" => (LanguageId::ForthSoup, builtin(FORTH_SOUP_2D_SHORT)),
        "forth_copy_short" => (LanguageId::ForthCopy, forth_copy_short()),
        "forth_copy_long" => (LanguageId::ForthCopy, forth_copy_long()),
        "rsubleq4_25" => (LanguageId::Rsubleq4, rsubleq4_25()),
        _ => return None,
    })
}
