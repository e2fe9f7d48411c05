//! Metadata transformation rules.
//!
//! A rule document lists element renames and drops:
//!
//! ```xml
//! <Rules>
//!   <Rename from="Title" to="DisplayTitle"/>
//!   <Drop name="ViewCount"/>
//! </Rules>
//! ```
//!
//! Elements are matched by local name at any depth. A dropped element
//! disappears with its whole subtree. Mappings naming absent elements do
//! nothing.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use quick_xml::events::{BytesEnd, BytesStart, Event};
use quick_xml::{Reader, Writer};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransformRules {
    renames: HashMap<String, String>,
    drops: HashSet<String>,
}

impl TransformRules {
    pub fn parse(text: &str) -> Result<Self, String> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let doc = roxmltree::Document::parse(text).map_err(|e| format!("rule document: {e}"))?;
        let root = doc.root_element();
        if root.tag_name().name() != "Rules" {
            return Err(format!(
                "rule document root must be <Rules>, found <{}>",
                root.tag_name().name()
            ));
        }
        let mut rules = Self::default();
        for node in root.children().filter(|n| n.is_element()) {
            match node.tag_name().name() {
                "Rename" => {
                    let from = required_name(node, "from")?;
                    let to = required_name(node, "to")?;
                    rules.renames.insert(from, to);
                }
                "Drop" => {
                    rules.drops.insert(required_name(node, "name")?);
                }
                other => return Err(format!("unknown rule <{other}>")),
            }
        }
        Ok(rules)
    }

    pub fn is_empty(&self) -> bool {
        self.renames.is_empty() && self.drops.is_empty()
    }

    /// Applies the rules to `source`, returning the re-serialized document.
    pub fn apply(&self, source: &str) -> Result<String, String> {
        let mut reader = Reader::from_str(source);
        reader.config_mut().check_end_names = true;
        let mut writer = Writer::new(Vec::new());
        let mut depth = 0usize;
        let mut skip_depth = 0usize;
        let mut saw_root = false;
        loop {
            let event = reader
                .read_event()
                .map_err(|e| format!("source document at byte {}: {e}", reader.error_position()))?;
            let out = match event {
                Event::Eof => break,
                Event::Start(start) => {
                    depth += 1;
                    saw_root = true;
                    if skip_depth > 0 {
                        skip_depth += 1;
                        continue;
                    }
                    if self.drops.contains(&local_name(start.name().as_ref())) {
                        skip_depth = 1;
                        continue;
                    }
                    Event::Start(self.renamed_start(start))
                }
                Event::Empty(start) => {
                    saw_root = true;
                    if skip_depth > 0 || self.drops.contains(&local_name(start.name().as_ref())) {
                        continue;
                    }
                    Event::Empty(self.renamed_start(start))
                }
                Event::End(end) => {
                    depth = depth.saturating_sub(1);
                    if skip_depth > 0 {
                        skip_depth -= 1;
                        continue;
                    }
                    let name = String::from_utf8_lossy(end.name().as_ref()).into_owned();
                    Event::End(BytesEnd::new(self.renamed(&name)))
                }
                other => {
                    if skip_depth > 0 {
                        continue;
                    }
                    other
                }
            };
            writer
                .write_event(out)
                .map_err(|e| format!("writing transformed document: {e}"))?;
        }
        if depth != 0 {
            return Err("source document has unclosed elements".into());
        }
        if !saw_root {
            return Err("source document has no root element".into());
        }
        String::from_utf8(writer.into_inner()).map_err(|e| e.to_string())
    }

    fn renamed(&self, qualified: &str) -> String {
        let (prefix, local) = match qualified.split_once(':') {
            Some((p, l)) => (Some(p), l),
            None => (None, qualified),
        };
        match (self.renames.get(local), prefix) {
            (Some(to), Some(p)) => format!("{p}:{to}"),
            (Some(to), None) => to.clone(),
            (None, _) => qualified.to_string(),
        }
    }

    fn renamed_start<'a>(&self, mut start: BytesStart<'a>) -> BytesStart<'a> {
        let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
        let new_name = self.renamed(&name);
        if new_name != name {
            start.set_name(new_name.as_bytes());
        }
        start
    }
}

fn local_name(qualified: &[u8]) -> String {
    let s = String::from_utf8_lossy(qualified);
    match s.split_once(':') {
        Some((_, local)) => local.to_string(),
        None => s.into_owned(),
    }
}

fn required_name(node: roxmltree::Node<'_, '_>, attr: &str) -> Result<String, String> {
    let value = node
        .attribute(attr)
        .ok_or_else(|| format!("<{}> is missing @{attr}", node.tag_name().name()))?
        .trim();
    let valid = value
        .chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && value
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if !valid {
        return Err(format!("@{attr}={value:?} is not an element name"));
    }
    Ok(value.to_string())
}

/// Where the transformed copy of `source` is written.
pub fn transformed_path(source: &Path) -> PathBuf {
    let name = source
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name.strip_suffix(".xml").unwrap_or(&name);
    source.with_file_name(format!("{stem}.transformed.xml"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const RECORD: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<ContentRecord>
  <CRID>crid://etri.re.kr/webtv/201206020001</CRID>
  <Title lang="en">Tom &amp; Jerry</Title>
  <Extra><Nested>x</Nested></Extra>
  <Empty/>
</ContentRecord>
"#;

    #[test]
    fn rename_preserves_content_and_attributes() {
        let rules =
            TransformRules::parse(r#"<Rules><Rename from="Title" to="DisplayTitle"/></Rules>"#)
                .unwrap();
        let out = rules.apply(RECORD).unwrap();
        assert!(
            out.contains(r#"<DisplayTitle lang="en">Tom &amp; Jerry</DisplayTitle>"#),
            "{out}"
        );
        assert!(!out.contains("<Title"));
    }

    #[test]
    fn drop_removes_subtree_and_empty_elements() {
        let rules =
            TransformRules::parse(r#"<Rules><Drop name="Extra"/><Drop name="Empty"/></Rules>"#)
                .unwrap();
        let out = rules.apply(RECORD).unwrap();
        assert!(!out.contains("Extra") && !out.contains("Nested") && !out.contains("Empty"));
        assert!(out.contains("<CRID>"));
    }

    #[test]
    fn empty_rules_copy_the_document() {
        for empty in ["", "<Rules/>", "<Rules></Rules>"] {
            let rules = TransformRules::parse(empty).unwrap();
            assert!(rules.is_empty());
            assert_eq!(rules.apply(RECORD).unwrap(), RECORD);
        }
    }

    #[test]
    fn absent_elements_are_no_ops() {
        let rules = TransformRules::parse(
            r#"<Rules><Rename from="Nope" to="Other"/><Drop name="Gone"/></Rules>"#,
        )
        .unwrap();
        assert_eq!(rules.apply(RECORD).unwrap(), RECORD);
    }

    #[test]
    fn prefixed_elements_match_by_local_name() {
        let rules =
            TransformRules::parse(r#"<Rules><Rename from="Title" to="Name"/></Rules>"#).unwrap();
        let out = rules
            .apply(r#"<t:Doc xmlns:t="urn:x"><t:Title>a</t:Title></t:Doc>"#)
            .unwrap();
        assert_eq!(out, r#"<t:Doc xmlns:t="urn:x"><t:Name>a</t:Name></t:Doc>"#);
    }

    #[test]
    fn malformed_inputs_are_errors() {
        assert!(TransformRules::parse("<Rules><Rename from=\"a\"/></Rules>").is_err());
        assert!(TransformRules::parse("<Other/>").is_err());
        assert!(TransformRules::parse("<Rules><Explode/></Rules>").is_err());
        assert!(TransformRules::parse("<Rules>").is_err());
        assert!(TransformRules::parse(r#"<Rules><Drop name="1bad"/></Rules>"#).is_err());
        let rules = TransformRules::default();
        assert!(rules.apply("<a><b></a>").is_err());
        assert!(rules.apply("<a>").is_err());
        assert!(rules.apply("just text").is_err());
    }

    #[test]
    fn output_path_sits_next_to_source() {
        assert_eq!(
            transformed_path(Path::new("/d/record.xml")),
            PathBuf::from("/d/record.transformed.xml")
        );
        assert_eq!(
            transformed_path(Path::new("/d/meta.txt")),
            PathBuf::from("/d/meta.txt.transformed.xml")
        );
    }
}
