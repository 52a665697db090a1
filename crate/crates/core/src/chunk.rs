//! Beginning / random middle / end subsampling of long documents before
//! annotation.

use rand::Rng;

use crate::error::{Error, Result};

/// Default character budget per document.
pub const DEFAULT_MAX_CHARS: usize = 30_000;

/// Returns `text` unchanged when it has at most `max_chars` characters.
/// Otherwise keeps a prefix, a randomly centred middle window and a suffix of
/// `max_chars / 3` characters each, separated by `[beginning]`, `[middle]`
/// and `[end]` markers. Lengths count Unicode scalar values.
pub fn chunk_text<R: Rng + ?Sized>(text: &str, max_chars: usize, rng: &mut R) -> Result<String> {
    if max_chars < 9 {
        return Err(Error::Param(format!("max_chars must be at least 9, got {max_chars}")));
    }
    // Byte offset of every char boundary, plus the end of the string.
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let len = bounds.len() - 1;
    if len <= max_chars {
        return Ok(text.to_owned());
    }

    let chunk = max_chars / 3;
    let half = chunk / 2;
    let middle_start = chunk;
    let middle_end = len - chunk;
    let mid_point = rng.gen_range(middle_start + half..=middle_end - half);

    let slice = |from: usize, to: usize| &text[bounds[from]..bounds[to]];
    let start = slice(0, chunk);
    let middle = slice(mid_point - half, mid_point + half);
    let end = slice(len - chunk, len);
    Ok(format!("[beginning]\n{start}\n[middle]\n{middle}\n[end]\n{end}"))
}
