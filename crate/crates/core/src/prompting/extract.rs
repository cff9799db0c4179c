use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use super::Mode;
use crate::fol::{collect_signature, parse_formula, Formula, SyntaxError};
use crate::prover::Label;

#[derive(Debug, Error, PartialEq)]
pub enum ExtractionError {
    #[error("no True/False/Uncertain label in the generation")]
    NoLabel,
    #[error("{0} generations are FOL programs, not labels")]
    NotALabelMode(Mode),
}

#[derive(Debug, Error, PartialEq)]
pub enum GenerationError {
    #[error("FOL block {block}: {error}")]
    Syntax { block: usize, error: SyntaxError },
    #[error("need at least one premise and a conclusion, found {found} formulas")]
    MissingConclusion { found: usize },
    #[error("{0} generations are labels, not FOL programs")]
    NotAProverMode(Mode),
}

/// Premises and conclusion read from a generation, with the byte range of
/// each formula in the raw text (premises first, conclusion last).
#[derive(Clone, Debug, PartialEq)]
pub struct FolProgram {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    pub source_spans: Vec<Range<usize>>,
}

/// The part of a generation that answers the query: everything before the
/// first `</EVALUATE>` or before the model starts a new problem.
pub fn truncate_generation(raw: &str) -> &str {
    let end = ["</EVALUATE>", "<PREMISES>"]
        .iter()
        .filter_map(|m| raw.find(m))
        .min()
        .unwrap_or(raw.len());
    &raw[..end]
}

fn answer_line() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?im)^[\s*_#>]*answer[\s*_]*:[\s*_]*(true|false|uncertain)\b").unwrap()
    })
}

fn any_label() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(true|false|uncertain)\b").unwrap())
}

/// The final answer of a label-producing generation: the last
/// `ANSWER: <label>` line if there is one, else the last standalone label
/// word.
pub fn extract_label(mode: Mode, raw: &str) -> Result<Label, ExtractionError> {
    if mode.uses_prover() {
        return Err(ExtractionError::NotALabelMode(mode));
    }
    let text = truncate_generation(raw);
    let found = answer_line()
        .captures_iter(text)
        .last()
        .or_else(|| any_label().captures_iter(text).last())
        .ok_or(ExtractionError::NoLabel)?;
    Ok(found[1].parse().expect("regex only matches labels"))
}

fn block_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^[\s*_#>]*(text|reasoning|fol)[\s*_]*:[ \t*_]*").unwrap()
    })
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

/// Trims whitespace and inline-code backticks, returning the byte range of
/// what is left within `line`.
fn formula_range(line: &str, from: usize) -> Option<Range<usize>> {
    let rest = &line[from..];
    let trimmed = rest.trim_matches(|c: char| c.is_whitespace() || c == '`');
    if trimmed.is_empty() {
        return None;
    }
    let start = from + (trimmed.as_ptr() as usize - rest.as_ptr() as usize);
    Some(start..start + trimmed.len())
}

/// Byte ranges of every FOL block. A block's formula is the rest of its
/// `FOL:` line, or the next non-blank line when that is empty.
fn fol_blocks(text: &str) -> Vec<Range<usize>> {
    let mut lines = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        lines.push((offset, line.trim_end_matches(['\n', '\r'])));
        offset += line.len();
    }
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (start, line) = lines[i];
        i += 1;
        let Some(m) = block_marker().captures(line) else {
            continue;
        };
        if !m[1].eq_ignore_ascii_case("fol") {
            continue;
        }
        if let Some(r) = formula_range(line, m[0].len()) {
            blocks.push(start + r.start..start + r.end);
            continue;
        }
        while i < lines.len() {
            let (next_start, next) = lines[i];
            if block_marker().is_match(next) {
                break;
            }
            i += 1;
            if is_fence(next) {
                continue;
            }
            if let Some(r) = formula_range(next, 0) {
                blocks.push(next_start + r.start..next_start + r.end);
                break;
            }
        }
    }
    blocks
}

/// Reads the FOL blocks of a LINC or NSCoT generation. Text and reasoning
/// blocks are ignored; the last formula is the conclusion.
pub fn extract_fol_program(mode: Mode, raw: &str) -> Result<FolProgram, GenerationError> {
    if !mode.uses_prover() {
        return Err(GenerationError::NotAProverMode(mode));
    }
    let text = truncate_generation(raw);
    let spans = fol_blocks(text);
    let mut formulas = Vec::with_capacity(spans.len());
    for (block, span) in spans.iter().enumerate() {
        let formula = parse_formula(&text[span.clone()]).map_err(|error| GenerationError::Syntax {
            block,
            error: error.offset_by(span.start),
        })?;
        formulas.push(formula);
    }
    if formulas.len() < 2 {
        return Err(GenerationError::MissingConclusion {
            found: formulas.len(),
        });
    }
    collect_signature(&formulas).map_err(|error| GenerationError::Syntax {
        block: formulas.len() - 1,
        error,
    })?;
    let conclusion = formulas.pop().unwrap();
    Ok(FolProgram {
        premises: formulas,
        conclusion,
        source_spans: spans,
    })
}
