//! Identifier model: raw DOI text, its canonical form, and the normalization
//! rules that make two spellings of the same DOI compare equal.
//!
//! Normalization trims surrounding whitespace, percent-decodes exactly once,
//! and lowercases each character. A literal `%` in the decoded text is always
//! written back as `%25`, so the canonical form never contains a bare percent
//! sign and re-normalizing a canonical DOI is a no-op.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Error produced when a string cannot be read as a DOI.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MalformedDoi {
    #[error("empty identifier")]
    Empty,
    #[error("no '/' separating prefix and suffix in {0:?}")]
    MissingSlash(String),
    #[error("prefix of {0:?} does not start with \"10.\"")]
    BadPrefix(String),
    #[error("empty suffix in {0:?}")]
    EmptySuffix(String),
}

/// A DOI exactly as it appeared in an input line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawDoi<'a>(pub &'a str);

impl<'a> RawDoi<'a> {
    pub fn new(text: &'a str) -> Self {
        RawDoi(text)
    }

    pub fn normalize(self) -> Result<NormalizedDoi, MalformedDoi> {
        normalize_doi(self)
    }
}

/// Canonical DOI: lowercase, percent-decoded once, split at the first `/`.
///
/// Ordering is byte-lexicographic on the full string, which is the order used
/// by every on-disk store in this crate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalizedDoi {
    full: String,
    slash: usize,
}

impl NormalizedDoi {
    pub fn as_str(&self) -> &str {
        &self.full
    }

    /// Registrant code, e.g. `10.1002`.
    pub fn prefix(&self) -> &str {
        &self.full[..self.slash]
    }

    /// Everything after the first slash; may itself contain slashes.
    pub fn suffix(&self) -> &str {
        &self.full[self.slash + 1..]
    }

    pub fn split(&self) -> (&str, &str) {
        (self.prefix(), self.suffix())
    }

    pub fn into_string(self) -> String {
        self.full
    }

    /// Wraps a string that is already in canonical form, such as a line read
    /// back from a sorted store. Falls back to full normalization if it is not.
    pub fn from_canonical(text: &str) -> Result<Self, MalformedDoi> {
        match canonical_fast_path(text) {
            Some(slash) => Ok(NormalizedDoi {
                full: text.to_owned(),
                slash,
            }),
            None => normalize_doi(RawDoi(text)),
        }
    }
}

impl fmt::Display for NormalizedDoi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.full)
    }
}

impl fmt::Debug for NormalizedDoi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NormalizedDoi({:?})", self.full)
    }
}

impl FromStr for NormalizedDoi {
    type Err = MalformedDoi;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_doi(RawDoi(s))
    }
}

impl AsRef<str> for NormalizedDoi {
    fn as_ref(&self) -> &str {
        &self.full
    }
}

impl Serialize for NormalizedDoi {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.full)
    }
}

impl<'de> Deserialize<'de> for NormalizedDoi {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Cow::<'de, str>::deserialize(deserializer)?;
        NormalizedDoi::from_canonical(&raw).map_err(serde::de::Error::custom)
    }
}

/// Normalize a raw DOI into canonical form.
///
/// ```
/// use doi_audit::doi::{normalize_doi, RawDoi};
///
/// let doi = normalize_doi(RawDoi("10.1000/ABC%2Fdef")).unwrap();
/// assert_eq!(doi.as_str(), "10.1000/abc/def");
/// assert_eq!(doi.split(), ("10.1000", "abc/def"));
/// ```
pub fn normalize_doi(raw: RawDoi<'_>) -> Result<NormalizedDoi, MalformedDoi> {
    let text = raw.0.trim();
    if text.is_empty() {
        return Err(MalformedDoi::Empty);
    }
    let canonical = canonicalize(text);
    let slash = validate_structure(&canonical)?;
    Ok(NormalizedDoi {
        full: canonical.into_owned(),
        slash,
    })
}

/// `split_doi` as a free function: `(prefix, suffix)` at the first slash.
pub fn split_doi(doi: &NormalizedDoi) -> (&str, &str) {
    doi.split()
}

/// True when the decoded form of `raw` still contains something that looks
/// like a percent-escape, which usually means the source was double-encoded.
pub fn has_residual_escape(raw: &str) -> bool {
    let bytes = raw.as_bytes();
    let decoded = percent_encoding::percent_decode(bytes).collect::<Vec<u8>>();
    decoded
        .windows(3)
        .any(|w| w[0] == b'%' && w[1].is_ascii_hexdigit() && w[2].is_ascii_hexdigit())
}

fn validate_structure(text: &str) -> Result<usize, MalformedDoi> {
    let slash = text
        .find('/')
        .ok_or_else(|| MalformedDoi::MissingSlash(text.to_owned()))?;
    let prefix = &text[..slash];
    if !prefix.starts_with("10.") || prefix.len() == 3 {
        return Err(MalformedDoi::BadPrefix(text.to_owned()));
    }
    if slash + 1 == text.len() {
        return Err(MalformedDoi::EmptySuffix(text.to_owned()));
    }
    Ok(slash)
}

/// Returns the slash offset if `text` needs no rewriting at all.
fn canonical_fast_path(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let simple = bytes
        .iter()
        .all(|&b| b.is_ascii() && b != b'%' && !b.is_ascii_uppercase() && !b.is_ascii_whitespace());
    if !simple {
        return None;
    }
    validate_structure(text).ok()
}

fn canonicalize(text: &str) -> Cow<'_, str> {
    if !text.bytes().any(|b| b == b'%' || !b.is_ascii() || b.is_ascii_uppercase()) {
        return Cow::Borrowed(text);
    }
    let decoded = decode_once(text);
    let mut out = String::with_capacity(decoded.len());
    for c in decoded.chars() {
        push_lower(&mut out, c);
    }
    Cow::Owned(out)
}

// Per-character lowercase. Multi-char expansions keep only the leading char,
// which matches the simple (1:1) case mapping for the characters that have one.
fn push_lower(out: &mut String, c: char) {
    if c.is_ascii() {
        out.push(c.to_ascii_lowercase());
    } else {
        out.push(c.to_lowercase().next().unwrap_or(c));
    }
}

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

/// Single-pass percent decoding. Runs of escapes that decode to valid UTF-8
/// are substituted; bytes that do not form valid UTF-8 stay escaped. Every
/// literal `%` in the result, decoded or not, is emitted as `%25`.
fn decode_once(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    let mut run: Vec<u8> = Vec::new();
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            if let (Some(h), Some(l)) = (hex_val(bytes[i + 1]), hex_val(bytes[i + 2])) {
                run.push(h << 4 | l);
                i += 3;
                continue;
            }
        }
        flush_run(&mut run, &mut out);
        // Copy the next full character verbatim.
        let ch_len = utf8_len(bytes[i]);
        let ch = &text[i..i + ch_len];
        if ch == "%" {
            out.push_str("%25");
        } else {
            out.push_str(ch);
        }
        i += ch_len;
    }
    flush_run(&mut run, &mut out);
    out
}

fn utf8_len(first: u8) -> usize {
    match first {
        0x00..=0x7f => 1,
        0xc0..=0xdf => 2,
        0xe0..=0xef => 3,
        _ => 4,
    }
}

fn flush_run(run: &mut Vec<u8>, out: &mut String) {
    if run.is_empty() {
        return;
    }
    for chunk in run.utf8_chunks() {
        for c in chunk.valid().chars() {
            if c == '%' {
                out.push_str("%25");
            } else {
                out.push(c);
            }
        }
        for b in chunk.invalid() {
            out.push('%');
            out.push(char::from_digit(u32::from(b >> 4), 16).unwrap());
            out.push(char::from_digit(u32::from(b & 0xf), 16).unwrap());
        }
    }
    run.clear();
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(s: &str) -> String {
        normalize_doi(RawDoi(s)).unwrap().into_string()
    }

    #[test]
    fn canonical_input_is_unchanged() {
        assert_eq!(norm("10.14359/15303"), "10.14359/15303");
    }

    #[test]
    fn unescape_and_downcase() {
        assert_eq!(norm("10.1000/ABC%2Fdef"), "10.1000/abc/def");
        assert_eq!(norm("10.1002/(SICI)1097"), "10.1002/(sici)1097");
        assert_eq!(norm("  10.1/A\r"), "10.1/a");
    }

    #[test]
    fn split_examples() {
        let d = NormalizedDoi::from_str("10.14359/15306").unwrap();
        assert_eq!(split_doi(&d), ("10.14359", "15306"));
        let d = NormalizedDoi::from_str("10.1016/s1876-6102(14)00454-8").unwrap();
        assert_eq!(d.split(), ("10.1016", "s1876-6102(14)00454-8"));
        let d = NormalizedDoi::from_str("10.1000/a/b").unwrap();
        assert_eq!(d.split(), ("10.1000", "a/b"));
        let d = NormalizedDoi::from_str("10.1000//a").unwrap();
        assert_eq!(d.split(), ("10.1000", "/a"));
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(normalize_doi(RawDoi("   ")), Err(MalformedDoi::Empty));
        assert!(matches!(
            normalize_doi(RawDoi("10.1000")),
            Err(MalformedDoi::MissingSlash(_))
        ));
        assert!(matches!(
            normalize_doi(RawDoi("11.1000/x")),
            Err(MalformedDoi::BadPrefix(_))
        ));
        assert!(matches!(
            normalize_doi(RawDoi("10./x")),
            Err(MalformedDoi::BadPrefix(_))
        ));
        assert!(matches!(
            normalize_doi(RawDoi("10.1000/")),
            Err(MalformedDoi::EmptySuffix(_))
        ));
        // an encoded slash does not count as the separator until decoded
        assert_eq!(norm("10.1000%2Fx"), "10.1000/x");
    }

    #[test]
    fn percent_decoded_exactly_once() {
        // %2541 is an escaped "%41"; one pass yields a literal percent.
        assert_eq!(norm("10.1/a%2541"), "10.1/a%2541");
        assert_eq!(norm("10.1/50%"), "10.1/50%25");
        assert_eq!(norm("10.1/50%25"), "10.1/50%25");
        assert_eq!(norm("10.1/%zz"), "10.1/%25zz");
        assert!(has_residual_escape("10.1/a%2541"));
        assert!(!has_residual_escape("10.1/a%41"));
    }

    #[test]
    fn utf8_escapes() {
        assert_eq!(norm("10.1/caf%C3%A9"), "10.1/café");
        assert_eq!(norm("10.1/CAFÉ"), "10.1/café");
        // lone continuation byte stays escaped (lowercase hex)
        assert_eq!(norm("10.1/x%FFy"), "10.1/x%ffy");
        assert_eq!(norm("10.1/x%ffy"), "10.1/x%ffy");
    }

    #[test]
    fn serde_round_trip_uses_canonical_text() {
        let d = NormalizedDoi::from_str("10.1/ABC").unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, "\"10.1/abc\"");
        let back: NormalizedDoi = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    fn doi_like() -> impl Strategy<Value = String> {
        let piece = prop_oneof![
            "[a-zA-Z0-9().;:_-]{1,6}",
            Just("%2F".to_string()),
            Just("%41".to_string()),
            Just("%25".to_string()),
            Just("%".to_string()),
            Just("%C3%A9".to_string()),
            Just("%ff".to_string()),
            Just("É".to_string()),
            Just("/".to_string()),
        ];
        ("[0-9]{1,5}", proptest::collection::vec(piece, 1..8))
            .prop_map(|(reg, parts)| format!("10.{reg}/{}", parts.concat()))
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(raw in doi_like()) {
            let once = norm(&raw);
            prop_assert_eq!(norm(&once), once.clone());
            let via_canonical = NormalizedDoi::from_canonical(&once).unwrap();
            prop_assert_eq!(via_canonical.as_str(), once.as_str());
        }

        #[test]
        fn split_rejoins(raw in doi_like()) {
            let d = normalize_doi(RawDoi(&raw)).unwrap();
            let (p, s) = d.split();
            prop_assert_eq!(format!("{p}/{s}"), d.as_str());
            prop_assert!(p.starts_with("10."));
        }

        #[test]
        fn case_and_encoding_variants_collapse(suffix in "[a-z0-9]{1,10}", upper in proptest::bool::ANY) {
            let plain = format!("10.5555/{suffix}");
            let mut variant = String::from("10.5555%2F");
            for c in suffix.chars() {
                if upper && c.is_ascii_alphabetic() {
                    variant.push(c.to_ascii_uppercase());
                } else {
                    variant.push_str(&format!("%{:02X}", c as u32));
                }
            }
            prop_assert_eq!(norm(&plain), norm(&variant));
        }

        #[test]
        fn no_ascii_uppercase_or_printable_escapes(raw in doi_like()) {
            let once = norm(&raw);
            prop_assert!(!once.bytes().any(|b| b.is_ascii_uppercase()));
            let b = once.as_bytes();
            for i in 0..b.len() {
                if b[i] == b'%' {
                    let h = hex_val(b[i + 1]).unwrap() << 4 | hex_val(b[i + 2]).unwrap();
                    // only the escape for '%' itself or non-UTF-8 bytes survive
                    prop_assert!(h == b'%' || h >= 0x80);
                }
            }
        }
    }
}
