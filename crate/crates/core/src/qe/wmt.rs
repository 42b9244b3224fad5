use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{QeError, QeTag, QeTagging, QeTriple};
use crate::text::TokenSequence;

/// How a tag line relates to its token line.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TagLineMode {
    /// One tag per token.
    #[default]
    Strict,
    /// `2n + 1` tags interleaving gaps and tokens (`gap w1 gap w2 ... gap`);
    /// gap tags are dropped.
    Gapped,
}

/// Pairs tag `k` with token `k` after whitespace-splitting both lines.
/// Only the literals `OK` and `BAD` are accepted.
pub fn parse_wmt_tags(
    tokens_line: &str,
    tags_line: &str,
    mode: TagLineMode,
) -> Result<(TokenSequence, QeTagging), QeError> {
    let tokens = TokenSequence::from_whitespace(tokens_line);
    let raw = tags_line
        .split_whitespace()
        .map(str::parse::<QeTag>)
        .collect::<Result<Vec<_>, _>>()?;
    let tags = match mode {
        TagLineMode::Strict => raw,
        TagLineMode::Gapped => {
            if raw.len() != 2 * tokens.len() + 1 {
                return Err(QeError::LengthMismatch {
                    tokens: tokens.len(),
                    tags: raw.len(),
                });
            }
            raw.into_iter().skip(1).step_by(2).collect()
        }
    };
    if tags.len() != tokens.len() {
        return Err(QeError::LengthMismatch {
            tokens: tokens.len(),
            tags: tags.len(),
        });
    }
    Ok((tokens, QeTagging(tags)))
}

/// Space-joined tag literals.
pub fn serialize_wmt_tags(tagging: &QeTagging) -> String {
    tagging
        .iter()
        .map(|t| t.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

fn at_line(line: usize) -> impl FnOnce(QeError) -> QeError {
    move |e| QeError::AtLine {
        line,
        source: Box::new(e),
    }
}

/// Reads a `.src` / `.mt` / `.tags` file triplet.
pub fn read_wmt_triplets(
    src: impl AsRef<Path>,
    mt: impl AsRef<Path>,
    tags: impl AsRef<Path>,
    mode: TagLineMode,
) -> Result<Vec<QeTriple>, QeError> {
    let src = fs::read_to_string(src)?;
    let mt = fs::read_to_string(mt)?;
    let tags = fs::read_to_string(tags)?;
    let (src, mt, tags): (Vec<_>, Vec<_>, Vec<_>) =
        (src.lines().collect(), mt.lines().collect(), tags.lines().collect());
    if src.len() != mt.len() || mt.len() != tags.len() {
        return Err(QeError::LineCountMismatch(format!(
            "src {}, mt {}, tags {}",
            src.len(),
            mt.len(),
            tags.len()
        )));
    }
    src.iter()
        .zip(&mt)
        .zip(&tags)
        .enumerate()
        .map(|(i, ((s, m), t))| {
            let (target, tagging) = parse_wmt_tags(m, t, mode).map_err(at_line(i + 1))?;
            QeTriple::new(TokenSequence::from_whitespace(s), target, tagging)
                .map_err(at_line(i + 1))
        })
        .collect()
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

/// Writes `<prefix>.src`, `<prefix>.mt` and `<prefix>.tags`. Each file is
/// staged under a temporary name and renamed once all three are written.
pub fn write_wmt_triplets(prefix: impl AsRef<Path>, triples: &[QeTriple]) -> Result<(), QeError> {
    let prefix = prefix.as_ref();
    let mut staged = Vec::new();
    for (ext, render) in [
        ("src", (|t: &QeTriple| t.source().join()) as fn(&QeTriple) -> String),
        ("mt", |t: &QeTriple| t.target().join()),
        ("tags", |t: &QeTriple| serialize_wmt_tags(t.tagging())),
    ] {
        let path = with_ext(prefix, ext);
        let tmp = with_ext(prefix, &format!("{ext}.partial"));
        let mut file = fs::File::create(&tmp)?;
        for triple in triples {
            writeln!(file, "{}", render(triple))?;
        }
        file.sync_all()?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        fs::rename(tmp, path)?;
    }
    Ok(())
}
