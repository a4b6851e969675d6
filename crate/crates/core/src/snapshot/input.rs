//! Reading snapshot dumps: plain text or JSON-lines, optionally gzipped.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Opens `path`, transparently decompressing when it starts with the gzip magic.
pub fn open_dump(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let n = read_up_to(&mut file, &mut magic)?;
    let file = File::open(path)?;
    if n == 2 && magic == GZIP_MAGIC {
        Ok(Box::new(BufReader::with_capacity(
            1 << 20,
            MultiGzDecoder::new(BufReader::new(file)),
        )))
    } else {
        Ok(Box::new(BufReader::with_capacity(1 << 20, file)))
    }
}

fn read_up_to(r: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled)
}

/// What a single dump line yielded.
#[derive(Debug, PartialEq, Eq)]
pub enum LineValue<'a> {
    Blank,
    /// Identifier text, borrowed from the line or extracted from JSON.
    Doi(std::borrow::Cow<'a, str>),
    /// Why the line could not produce an identifier.
    Unreadable(&'static str),
}

/// Extracts the identifier from one line, without the trailing newline.
pub fn parse_line(line: &[u8]) -> LineValue<'_> {
    let line = match line.last() {
        Some(b'\r') => &line[..line.len() - 1],
        _ => line,
    };
    let text = match std::str::from_utf8(line) {
        Ok(t) => t,
        Err(_) => return LineValue::Unreadable("invalid UTF-8"),
    };
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return LineValue::Blank;
    }
    if trimmed.starts_with('{') {
        #[derive(serde::Deserialize)]
        struct Record<'a> {
            #[serde(rename = "DOI", borrow)]
            doi: Option<std::borrow::Cow<'a, str>>,
        }
        return match serde_json::from_str::<Record<'_>>(trimmed) {
            Ok(Record { doi: Some(doi) }) => LineValue::Doi(doi),
            Ok(Record { doi: None }) => LineValue::Unreadable("JSON record without a \"DOI\" member"),
            Err(_) => LineValue::Unreadable("invalid JSON record"),
        };
    }
    LineValue::Doi(std::borrow::Cow::Borrowed(trimmed))
}
