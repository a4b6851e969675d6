//! Interpretation of service response bodies, shared by live and replayed
//! lookups.

use serde_json::Value;

use super::types::{MetadataResult, RaOutcome, WorkRecord};
use crate::doi::NormalizedDoi;

/// Maps a registration-agency lookup body (a JSON array of objects carrying
/// `"RA"` or `"status"`) to an outcome.
pub fn ra_outcome(body: &Value) -> RaOutcome {
    let entry = match body {
        Value::Array(items) => items.first(),
        obj @ Value::Object(_) => Some(obj),
        _ => None,
    };
    let Some(entry) = entry else {
        return RaOutcome::Indeterminate;
    };
    if let Some(ra) = entry.get("RA").and_then(Value::as_str) {
        let ra = ra.trim();
        return if ra.eq_ignore_ascii_case("crossref") {
            RaOutcome::Crossref
        } else if ra.is_empty() {
            RaOutcome::Indeterminate
        } else {
            RaOutcome::OtherRa(ra.to_owned())
        };
    }
    match entry.get("status").and_then(Value::as_str) {
        Some(s) if s.eq_ignore_ascii_case("DOI does not exist") || s.eq_ignore_ascii_case("Invalid DOI") => {
            RaOutcome::DoesNotExist
        }
        _ => RaOutcome::Indeterminate,
    }
}

fn first_string(v: Option<&Value>) -> Option<String> {
    match v? {
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => items.iter().find_map(|i| i.as_str().map(str::to_owned)),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Extracts the fields we use from a works response, either the
/// `{"status":"ok","message":{...}}` envelope or a bare message object.
pub fn work_record(body: &Value) -> Option<WorkRecord> {
    let message = match body.get("message") {
        Some(m @ Value::Object(_)) => m,
        _ if body.is_object() => body,
        _ => return None,
    };
    Some(WorkRecord {
        doc_type: first_string(message.get("type")),
        title: first_string(message.get("title")),
        container_title: first_string(message.get("container-title")),
        volume: first_string(message.get("volume")),
        issue: first_string(message.get("issue")),
        page: first_string(message.get("page")),
    })
}

/// Interprets a works API response by status and body.
pub fn metadata_from_http(status: u16, body: &[u8]) -> MetadataResult {
    match status {
        200..=299 => match serde_json::from_slice::<Value>(body).ok().as_ref().and_then(work_record) {
            Some(record) => MetadataResult::Found { record },
            None => MetadataResult::OtherError { code: status },
        },
        404 if is_not_found_body(&String::from_utf8_lossy(body)) => MetadataResult::ResourceNotFound,
        code => MetadataResult::OtherError { code },
    }
}

pub fn is_not_found_body(text: &str) -> bool {
    text.to_ascii_lowercase().contains("resource not found")
}

/// Finds the `HS_ALIAS` target in a handle-API record.
pub fn handle_alias(body: &Value) -> Option<NormalizedDoi> {
    body.get("values")?
        .as_array()?
        .iter()
        .filter(|v| v.get("type").and_then(Value::as_str) == Some("HS_ALIAS"))
        .find_map(|v| {
            let data = v.get("data")?;
            let text = data.get("value").and_then(Value::as_str).or_else(|| data.as_str())?;
            let text = text.strip_prefix("doi:").unwrap_or(text);
            text.parse().ok()
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn ra_mapping() {
        assert_eq!(ra_outcome(&json!([{"DOI": "10.1/a", "RA": "Crossref"}])), RaOutcome::Crossref);
        assert_eq!(
            ra_outcome(&json!([{"DOI": "10.1/a", "RA": "DataCite"}])),
            RaOutcome::OtherRa("DataCite".into())
        );
        assert_eq!(
            ra_outcome(&json!([{"DOI": "10.1/a", "status": "DOI does not exist"}])),
            RaOutcome::DoesNotExist
        );
        assert_eq!(
            ra_outcome(&json!([{"DOI": "10.1/a", "status": "Invalid DOI"}])),
            RaOutcome::DoesNotExist
        );
        assert_eq!(ra_outcome(&json!([])), RaOutcome::Indeterminate);
        assert_eq!(ra_outcome(&json!([{"RA": ""}])), RaOutcome::Indeterminate);
        assert_eq!(ra_outcome(&json!("nope")), RaOutcome::Indeterminate);
    }

    #[test]
    fn works_record_fields() {
        let body = json!({"status": "ok", "message": {
            "type": "journal-article",
            "title": ["Volume Removed - Publisher's Disclaimer"],
            "container-title": ["Energy Procedia"],
            "volume": "13", "page": "1-10380"
        }});
        let rec = work_record(&body).unwrap();
        assert_eq!(rec.doc_type.as_deref(), Some("journal-article"));
        assert_eq!(rec.title.as_deref(), Some("Volume Removed - Publisher's Disclaimer"));
        assert_eq!(rec.container_title.as_deref(), Some("Energy Procedia"));
        assert_eq!(rec.issue, None);
    }

    #[test]
    fn metadata_statuses() {
        assert_eq!(metadata_from_http(404, b"Resource not found."), MetadataResult::ResourceNotFound);
        assert_eq!(metadata_from_http(404, b"gone"), MetadataResult::OtherError { code: 404 });
        assert_eq!(metadata_from_http(503, b""), MetadataResult::OtherError { code: 503 });
        assert_eq!(metadata_from_http(200, b"not json"), MetadataResult::OtherError { code: 200 });
        assert!(matches!(
            metadata_from_http(200, br#"{"status":"ok","message":{"type":"book"}}"#),
            MetadataResult::Found { .. }
        ));
    }

    #[test]
    fn handle_alias_value() {
        let body = json!({"responseCode": 1, "handle": "10.14359/15303", "values": [
            {"index": 1, "type": "URL", "data": {"format": "string", "value": "https://x"}},
            {"index": 2, "type": "HS_ALIAS", "data": {"format": "string", "value": "10.14359/15306"}}
        ]});
        assert_eq!(handle_alias(&body).unwrap().as_str(), "10.14359/15306");
        assert_eq!(handle_alias(&json!({"values": []})), None);
    }
}
