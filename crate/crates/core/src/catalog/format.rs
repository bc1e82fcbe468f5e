//! Line-oriented `key = value` documents split into `[section]`s.

use crate::{Error, Result};

/// Sections whose lines are bare entries rather than `key = value` pairs.
const BARE_SECTIONS: [&str; 1] = ["exclude"];

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub source: String,
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str, source: &str) -> Result<Document> {
        let mut doc = Document {
            source: source.to_string(),
            sections: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| {
                        !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                    })
                    .ok_or_else(|| {
                        doc.error(line, "", format!("malformed section header {content:?}"))
                    })?;
                if doc.sections.iter().any(|s| s.name == name) {
                    return Err(doc.error(line, name, "duplicate section"));
                }
                doc.sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let Some(section) = doc.sections.last() else {
                return Err(doc.error(line, "", "entry before the first section header"));
            };
            let entry = if BARE_SECTIONS.contains(&section.name.as_str()) {
                Entry {
                    line,
                    key: String::new(),
                    value: content.to_string(),
                }
            } else {
                let (key, value) = content
                    .split_once('=')
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                    .ok_or_else(|| {
                        doc.error(
                            line,
                            &section.name,
                            format!("expected `key = value`, got {content:?}"),
                        )
                    })?;
                if section.entries.iter().any(|e| e.key == key) {
                    return Err(doc.error(
                        line,
                        &format!("{}.{key}", section.name),
                        "duplicate key",
                    ));
                }
                Entry {
                    line,
                    key: key.to_string(),
                    value: value.to_string(),
                }
            };
            doc.sections
                .last_mut()
                .expect("checked above")
                .entries
                .push(entry);
        }
        Ok(doc)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Fails on any section not in `allowed`.
    pub fn expect_sections(&self, allowed: &[&str]) -> Result<()> {
        match self
            .sections
            .iter()
            .find(|s| !allowed.contains(&s.name.as_str()))
        {
            Some(s) => Err(self.error(
                s.line,
                &s.name,
                format!("unknown section (expected one of {allowed:?})"),
            )),
            None => Ok(()),
        }
    }

    pub fn error(&self, line: usize, path: &str, message: impl Into<String>) -> Error {
        let path = if path.is_empty() {
            format!("{}:{line}", self.source)
        } else {
            format!("{}:{line}: {path}", self.source)
        };
        Error::Schema {
            path,
            message: message.into(),
        }
    }

    pub fn path(&self, section: &str, entry: &Entry) -> String {
        if entry.key.is_empty() {
            format!("{}:{}: {section}", self.source, entry.line)
        } else {
            format!("{}:{}: {section}.{}", self.source, entry.line, entry.key)
        }
    }
}

/// Splits `g[0][1]` or `T[1][0,2]` into the name and its index groups.
pub fn parse_indexed_key(key: &str) -> Option<(&str, Vec<Vec<usize>>)> {
    let open = key.find('[').unwrap_or(key.len());
    let name = key[..open].trim();
    if name.is_empty() {
        return None;
    }
    let mut groups = Vec::new();
    let mut rest = key[open..].trim();
    while !rest.is_empty() {
        let inner = rest.strip_prefix('[')?;
        let close = inner.find(']')?;
        let group = inner[..close]
            .split(',')
            .map(|s| s.trim().parse::<usize>().ok())
            .collect::<Option<Vec<_>>>()?;
        groups.push(group);
        rest = inner[close + 1..].trim_start();
    }
    Some((name, groups))
}
