use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::analytics::Percent;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Pct(Percent),
    Real(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn opt(s: Option<impl Into<String>>) -> Self {
        s.map_or(Cell::Empty, |s| Cell::Text(s.into()))
    }

    /// Plain rendering used for CSV.
    pub fn plain(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Pct(p) => p.to_string(),
            Cell::Real(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    /// Human rendering used for markdown: grouped digits, two-decimal reals.
    pub fn pretty(&self) -> String {
        match self {
            Cell::Int(n) => group_digits(*n),
            Cell::Real(x) => format!("{x:.2}"),
            Cell::Text(s) => s.replace('|', "\\|"),
            other => other.plain(),
        }
    }

    fn is_numeric(&self) -> bool {
        matches!(self, Cell::Int(_) | Cell::Pct(_) | Cell::Real(_))
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(n) => s.serialize_u64(*n),
            Cell::Pct(p) => p.serialize(s),
            Cell::Real(x) => s.serialize_f64(*x),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Empty => s.serialize_none(),
        }
    }
}

pub fn group_digits(n: u64) -> String {
    let raw = n.to_string();
    let mut out = String::with_capacity(raw.len() + raw.len() / 3);
    for (i, c) in raw.chars().enumerate() {
        if i > 0 && (raw.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// A rendered report table. Every percentage column is accompanied by the
/// count it was computed from and its denominator, either as an `n` column
/// or as an overall row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub caption: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Summary figures reported alongside the rows.
    pub totals: Vec<(&'static str, u64)>,
}

impl Table {
    pub fn write_csv(&self, w: impl std::io::Write) -> csv::Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::plain))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_markdown(&self) -> String {
        let mut md = format!("### {}\n\n", self.caption);
        md.push_str(&format!("| {} |\n", self.columns.join(" | ")));
        let align: Vec<&str> = (0..self.columns.len())
            .map(|i| {
                let numeric = self.rows.iter().any(|r| r.get(i).is_some_and(Cell::is_numeric));
                if numeric { "---:" } else { "---" }
            })
            .collect();
        md.push_str(&format!("| {} |\n", align.join(" | ")));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::pretty).collect();
            md.push_str(&format!("| {} |\n", cells.join(" | ")));
        }
        if !self.totals.is_empty() {
            let notes: Vec<String> = self.totals.iter().map(|(k, v)| format!("{k} = {}", group_digits(*v))).collect();
            md.push_str(&format!("\n{}\n", notes.join("; ")));
        }
        md
    }
}

struct Row<'a>(&'a [&'static str], &'a [Cell]);

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

struct Rows<'a>(&'a Table);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.rows.len()))?;
        for r in &self.0.rows {
            seq.serialize_element(&Row(&self.0.columns, r))?;
        }
        seq.end()
    }
}

struct Totals<'a>(&'a [(&'static str, u64)]);

impl Serialize for Totals<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl Serialize for Table {
    /// `{"caption", "columns", "rows": [{column: value}], "totals"}` with keys
    /// in column order.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("caption", &self.caption)?;
        m.serialize_entry("columns", &self.columns)?;
        m.serialize_entry("rows", &Rows(self))?;
        m.serialize_entry("totals", &Totals(&self.totals))?;
        m.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: Vec<Vec<Cell>>) -> Table {
        Table { name: "t", caption: "Sample (n=3)".into(), columns: vec!["name", "count", "%"], rows, totals: vec![("n", 3)] }
    }

    #[test]
    fn csv_quoting_and_headers_only() {
        let t = sample(vec![vec![Cell::text("a, \"b\""), Cell::Int(1), Cell::Pct(Percent::of(1, 3))]]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "name,count,%\r\n\"a, \"\"b\"\"\",1,33.33\r\n");
        let mut buf = Vec::new();
        sample(vec![]).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "name,count,%\r\n");
    }

    #[test]
    fn json_shape() {
        let t = sample(vec![vec![Cell::text("a"), Cell::Int(1234), Cell::Pct(Percent::of(1, 2))]]);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(
            json,
            r#"{"caption":"Sample (n=3)","columns":["name","count","%"],"rows":[{"name":"a","count":1234,"%":50.00}],"totals":{"n":3}}"#
        );
    }

    #[test]
    fn markdown() {
        let t = sample(vec![vec![Cell::text("a|b"), Cell::Int(1234567), Cell::Pct(Percent::of(1, 2))]]);
        let md = t.to_markdown();
        assert!(md.contains("| a\\|b | 1,234,567 | 50.00 |"), "{md}");
        assert!(md.contains("| --- | ---: | ---: |"));
        assert_eq!(group_digits(999), "999");
        assert_eq!(group_digits(1000), "1,000");
    }
}
