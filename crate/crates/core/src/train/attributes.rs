use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// Per-image binary attributes in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttributeTable {
    names: Vec<String>,
    ids: Vec<String>,
    values: Vec<Vec<i8>>,
    index: HashMap<String, usize>,
}

impl AttributeTable {
    pub fn new(names: Vec<String>) -> Self {
        AttributeTable {
            names,
            ..Default::default()
        }
    }

    pub fn push(&mut self, id: impl Into<String>, values: Vec<i8>) -> Result<()> {
        let id = id.into();
        if values.len() != self.names.len() {
            return Err(Error::Shape(format!(
                "row {id} has {} values for {} attributes",
                values.len(),
                self.names.len()
            )));
        }
        if values.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::Shape(format!("row {id} has a value outside {{-1, 1}}")));
        }
        if self.index.contains_key(&id) {
            return Err(Error::Shape(format!("duplicate row {id}")));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.values.push(values);
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn row(&self, id: &str) -> Option<&[i8]> {
        self.index.get(id).map(|&r| self.values[r].as_slice())
    }

    /// 0/1 targets of `id` for the given attribute columns.
    pub fn targets(&self, id: &str, columns: &[usize]) -> Option<Vec<f64>> {
        let row = self.row(id)?;
        Some(columns.iter().map(|&c| if row[c] > 0 { 1.0 } else { 0.0 }).collect())
    }

    /// Parses the CelebA layout: a row count, a line of names, then
    /// `image_id v1 ... vK` rows.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let err = |line: usize, reason: String| Error::Parse { line, reason };

        let (n, first) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let declared: usize = first
            .trim()
            .parse()
            .map_err(|_| err(n, format!("expected a row count, found {:?}", first.trim())))?;
        let names: Vec<String> = match lines.next() {
            Some((_, l)) => l.split_whitespace().map(str::to_string).collect(),
            None if declared == 0 => Vec::new(),
            None => return Err(err(2, "missing attribute names".into())),
        };
        let mut table = AttributeTable::new(names);

        for (n, line) in lines {
            let mut fields = line.split_whitespace();
            let Some(id) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if values.len() != table.names.len() {
                return Err(err(
                    n,
                    format!("row {id} has {} values, expected {}", values.len(), table.names.len()),
                ));
            }
            let values = values
                .iter()
                .map(|v| match *v {
                    "1" => Ok(1),
                    "-1" => Ok(-1),
                    other => Err(err(n, format!("row {id}: value {other:?} is not -1 or 1"))),
                })
                .collect::<Result<Vec<i8>>>()?;
            table.push(id, values).map_err(|e| err(n, e.to_string()))?;
        }
        if table.len() != declared {
            return Err(err(1, format!("declared {declared} rows, found {}", table.len())));
        }
        Ok(table)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n{}\n", self.len(), self.names.join(" "));
        for (id, row) in self.ids.iter().zip(&self.values) {
            s.push_str(id);
            for v in row {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        s
    }
}

pub fn load_attributes(path: &Path) -> Result<AttributeTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    AttributeTable::parse(&text)
}

pub fn write_attributes(path: &Path, table: &AttributeTable) -> Result<()> {
    std::fs::write(path, table.to_text()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_row_file() {
        let t = AttributeTable::parse("2\nMale Young\na.jpg 1 -1\nb.jpg -1 1\n").unwrap();
        assert_eq!(t.names(), ["Male", "Young"]);
        assert_eq!(t.targets("a.jpg", &[0, 1]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(t.targets("b.jpg", &[0, 1]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(t.targets("b.jpg", &[1]).unwrap(), vec![1.0]);
        assert!(t.row("c.jpg").is_none());
    }

    #[test]
    fn celeba_spacing() {
        // The real file pads single-digit values with two spaces.
        let t = AttributeTable::parse("1\nA B \n000001.jpg  1 -1\n").unwrap();
        assert_eq!(t.row("000001.jpg").unwrap(), [1, -1]);
    }

    #[test]
    fn empty_body() {
        let t = AttributeTable::parse("0\nMale Young\n").unwrap();
        assert!(t.is_empty());
        assert_eq!(t.names().len(), 2);
        assert!(AttributeTable::parse("0\n").unwrap().is_empty());
    }

    #[test]
    fn short_row_names_the_line() {
        let names: Vec<String> = (0..40).map(|i| format!("A{i}")).collect();
        let row39 = vec!["1"; 39].join(" ");
        let text = format!("1\n{}\nx.jpg {row39}\n", names.join(" "));
        match AttributeTable::parse(&text) {
            Err(Error::Parse { line: 3, reason }) => assert!(reason.contains("x.jpg") && reason.contains("39")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_and_counts() {
        assert!(matches!(
            AttributeTable::parse("1\nA\nx.jpg 0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(AttributeTable::parse("2\nA\nx.jpg 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(AttributeTable::parse("two\nA\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            AttributeTable::parse("2\nA\nx.jpg 1\nx.jpg -1\n"),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let mut t = AttributeTable::new(vec!["glasses".into(), "Male".into()]);
        t.push("toy000000", vec![1, -1]).unwrap();
        t.push("toy000001", vec![-1, -1]).unwrap();
        assert_eq!(AttributeTable::parse(&t.to_text()).unwrap(), t);
        assert!(t.push("bad", vec![1]).is_err());
    }
}
