//! Reader for the indentation-based key/value layout used by scenario
//! documents. Supports the YAML subset those documents need: block
//! mappings, block sequences (including `- key: value` items), one-line
//! flow sequences, quoted and plain scalars, and `#` comments. Trailing
//! comments on scalar lines are kept because the scenario format uses
//! them for annotations.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DocNode {
    Scalar {
        text: String,
        comment: Option<String>,
        line: usize,
    },
    Map(Vec<DocEntry>),
    Seq(Vec<DocNode>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocEntry {
    pub key: String,
    pub value: DocNode,
    pub line: usize,
    /// Trailing comment on the key's own line.
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct DocError {
    pub line: usize,
    pub message: String,
}

impl DocNode {
    pub fn as_map(&self) -> Option<&[DocEntry]> {
        match self {
            DocNode::Map(entries) => Some(entries),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DocNode::Scalar { .. } => "scalar",
            DocNode::Map(_) => "mapping",
            DocNode::Seq(_) => "sequence",
        }
    }

    /// True for an empty scalar (`key:` with nothing nested).
    pub fn is_null(&self) -> bool {
        match self {
            DocNode::Scalar { text, .. } => text.is_empty() || text == "~" || text == "null",
            _ => false,
        }
    }

    pub fn get(&self, key: &str) -> Option<&DocNode> {
        self.as_map()?
            .iter()
            .find(|e| e.key == key)
            .map(|e| &e.value)
    }
}

impl fmt::Display for DocNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocNode::Scalar { text, .. } => f.write_str(text),
            DocNode::Map(_) => f.write_str("<mapping>"),
            DocNode::Seq(_) => f.write_str("<sequence>"),
        }
    }
}

#[derive(Debug, Clone)]
struct Line {
    indent: usize,
    text: String,
    comment: Option<String>,
    number: usize,
}

/// Parses a document. An empty document yields an empty mapping.
pub fn parse_document(input: &str) -> Result<DocNode, DocError> {
    let mut lines = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let number = i + 1;
        let leading = &raw[..raw.len() - raw.trim_start().len()];
        if leading.contains('\t') {
            return Err(DocError {
                line: number,
                message: "tab characters are not allowed in indentation".into(),
            });
        }
        let (text, comment) = split_comment(raw, number)?;
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "---" || trimmed == "..." {
            continue;
        }
        lines.push(Line {
            indent: leading.len(),
            text: trimmed.to_string(),
            comment,
            number,
        });
    }
    if lines.is_empty() {
        return Ok(DocNode::Map(Vec::new()));
    }
    let mut parser = Parser { lines, pos: 0 };
    let indent = parser.lines[0].indent;
    let root = parser.block(indent)?;
    if let Some(line) = parser.lines.get(parser.pos) {
        return Err(DocError {
            line: line.number,
            message: "unexpected indentation".into(),
        });
    }
    Ok(root)
}

fn split_comment(raw: &str, number: usize) -> Result<(String, Option<String>), DocError> {
    let mut quote: Option<char> = None;
    let mut prev_space = true;
    for (i, ch) in raw.char_indices() {
        match quote {
            Some(q) if ch == q => quote = None,
            Some(_) => {}
            None => {
                if ch == '"' || ch == '\'' {
                    quote = Some(ch);
                } else if ch == '#' && prev_space {
                    let comment = raw[i + 1..].trim().to_string();
                    return Ok((raw[..i].to_string(), Some(comment)));
                }
            }
        }
        prev_space = ch.is_whitespace();
    }
    if quote.is_some() {
        return Err(DocError {
            line: number,
            message: "unterminated quoted string".into(),
        });
    }
    Ok((raw.to_string(), None))
}

struct Parser {
    lines: Vec<Line>,
    pos: usize,
}

fn is_seq_item(text: &str) -> bool {
    text == "-" || text.starts_with("- ")
}

/// Splits `key: rest` / `key:`; returns None when the text is not a
/// mapping entry.
fn split_key(text: &str) -> Option<(&str, &str)> {
    let colon = text.find(':')?;
    let key = &text[..colon];
    let rest = &text[colon + 1..];
    if !(rest.is_empty() || rest.starts_with(' ')) {
        return None;
    }
    let valid = !key.is_empty()
        && key
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    valid.then_some((key, rest.trim()))
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> DocError {
        let line = self
            .lines
            .get(self.pos)
            .or(self.lines.last())
            .map_or(0, |l| l.number);
        DocError {
            line,
            message: message.into(),
        }
    }

    fn block(&mut self, indent: usize) -> Result<DocNode, DocError> {
        if is_seq_item(&self.lines[self.pos].text) {
            self.seq(indent)
        } else {
            self.map(indent)
        }
    }

    fn map(&mut self, indent: usize) -> Result<DocNode, DocError> {
        let mut entries: Vec<DocEntry> = Vec::new();
        while let Some(line) = self.lines.get(self.pos) {
            if line.indent < indent {
                break;
            }
            if line.indent > indent {
                return Err(self.error("unexpected indentation"));
            }
            if is_seq_item(&line.text) {
                return Err(self.error("sequence item where a mapping entry was expected"));
            }
            let (key, rest) = split_key(&line.text)
                .ok_or_else(|| self.error(format!("expected `key: value`, found `{}`", line.text)))?;
            let key = key.to_string();
            let rest = rest.to_string();
            let number = line.number;
            let comment = line.comment.clone();
            if entries.iter().any(|e| e.key == key) {
                return Err(self.error(format!("duplicate key `{key}`")));
            }
            self.pos += 1;
            let value = if rest.is_empty() {
                match self.lines.get(self.pos) {
                    Some(next) if next.indent > indent => {
                        let ni = next.indent;
                        self.block(ni)?
                    }
                    Some(next) if next.indent == indent && is_seq_item(&next.text) => {
                        self.seq(indent)?
                    }
                    _ => DocNode::Scalar {
                        text: String::new(),
                        comment: comment.clone(),
                        line: number,
                    },
                }
            } else if rest.starts_with('[') {
                flow_seq(&rest, number)?
            } else if rest.starts_with('{') {
                return Err(DocError {
                    line: number,
                    message: "flow mappings are not supported".into(),
                });
            } else {
                DocNode::Scalar {
                    text: unquote(&rest, number)?,
                    comment: comment.clone(),
                    line: number,
                }
            };
            entries.push(DocEntry {
                key,
                value,
                line: number,
                comment,
            });
        }
        Ok(DocNode::Map(entries))
    }

    fn seq(&mut self, indent: usize) -> Result<DocNode, DocError> {
        let mut items = Vec::new();
        while let Some(line) = self.lines.get(self.pos) {
            if line.indent < indent || !is_seq_item(&line.text) {
                if line.indent > indent {
                    return Err(self.error("unexpected indentation"));
                }
                break;
            }
            if line.indent > indent {
                return Err(self.error("unexpected indentation"));
            }
            let after_dash = &line.text[1..];
            let rest = after_dash.trim_start();
            let col = indent + 1 + (after_dash.len() - rest.len());
            let number = line.number;
            if rest.is_empty() {
                self.pos += 1;
                match self.lines.get(self.pos) {
                    Some(next) if next.indent > indent => {
                        let ni = next.indent;
                        items.push(self.block(ni)?);
                    }
                    _ => items.push(DocNode::Scalar {
                        text: String::new(),
                        comment: None,
                        line: number,
                    }),
                }
            } else if split_key(rest).is_some() || is_seq_item(rest) {
                // Re-home the item's first line at its content column so the
                // block parser sees an ordinary nested block.
                let rest = rest.to_string();
                let l = &mut self.lines[self.pos];
                l.indent = col;
                l.text = rest;
                items.push(self.block(col)?);
            } else if rest.starts_with('[') {
                let rest = rest.to_string();
                self.pos += 1;
                items.push(flow_seq(&rest, number)?);
            } else {
                let text = unquote(rest, number)?;
                let comment = line.comment.clone();
                self.pos += 1;
                items.push(DocNode::Scalar {
                    text,
                    comment,
                    line: number,
                });
            }
        }
        Ok(DocNode::Seq(items))
    }
}

fn flow_seq(text: &str, line: usize) -> Result<DocNode, DocError> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| DocError {
            line,
            message: "unterminated flow sequence".into(),
        })?;
    let mut items = Vec::new();
    if inner.trim().is_empty() {
        return Ok(DocNode::Seq(items));
    }
    for part in inner.split(',') {
        let part = part.trim();
        if part.is_empty() || part.starts_with('[') || part.starts_with('{') {
            return Err(DocError {
                line,
                message: format!("unsupported flow sequence item `{part}`"),
            });
        }
        items.push(DocNode::Scalar {
            text: unquote(part, line)?,
            comment: None,
            line,
        });
    }
    Ok(DocNode::Seq(items))
}

fn unquote(text: &str, line: usize) -> Result<String, DocError> {
    for q in ['"', '\''] {
        if let Some(rest) = text.strip_prefix(q) {
            return rest
                .strip_suffix(q)
                .map(str::to_string)
                .ok_or_else(|| DocError {
                    line,
                    message: "unterminated quoted string".into(),
                });
        }
    }
    Ok(text.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(node: &DocNode) -> &str {
        match node {
            DocNode::Scalar { text, .. } => text,
            other => panic!("expected scalar, got {}", other.kind()),
        }
    }

    #[test]
    fn nested_maps_and_sequences() {
        let doc = "\
environment:
  weather: rainy   # from text
road_network:
  traffic_signs: [stop_sign, 'yield_sign']
npc_actors:
  - actor_type: car
    position:
      relative_position: front
  - actor_type: truck
";
        let root = parse_document(doc).unwrap();
        let env = root.get("environment").unwrap();
        match env.get("weather").unwrap() {
            DocNode::Scalar { text, comment, .. } => {
                assert_eq!(text, "rainy");
                assert_eq!(comment.as_deref(), Some("from text"));
            }
            _ => panic!(),
        }
        let signs = root.get("road_network").unwrap().get("traffic_signs").unwrap();
        assert_eq!(
            signs,
            &DocNode::Seq(vec![
                DocNode::Scalar { text: "stop_sign".into(), comment: None, line: 4 },
                DocNode::Scalar { text: "yield_sign".into(), comment: None, line: 4 },
            ])
        );
        let DocNode::Seq(npcs) = root.get("npc_actors").unwrap() else {
            panic!()
        };
        assert_eq!(npcs.len(), 2);
        let pos = npcs[0].get("position").unwrap();
        assert_eq!(scalar(pos.get("relative_position").unwrap()), "front");
        assert_eq!(scalar(npcs[1].get("actor_type").unwrap()), "truck");
    }

    #[test]
    fn sequence_at_key_indent() {
        let doc = "npc_actors:\n- actor_type: car\n  lane_idx: 1\n- actor_type: bus\n";
        let root = parse_document(doc).unwrap();
        let DocNode::Seq(items) = root.get("npc_actors").unwrap() else {
            panic!()
        };
        assert_eq!(items.len(), 2);
        assert_eq!(scalar(items[0].get("lane_idx").unwrap()), "1");
    }

    #[test]
    fn empty_value_is_null() {
        let root = parse_document("a:\nb: 1\n").unwrap();
        assert!(root.get("a").unwrap().is_null());
    }

    #[test]
    fn rejects_bad_indentation_and_duplicates() {
        assert!(parse_document("a: 1\n   b: 2\n").is_err());
        let err = parse_document("a: 1\na: 2\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(parse_document("a:\n\t b: 1\n").is_err());
        assert!(parse_document("a: [x, y\n").is_err());
        assert!(parse_document("just some prose\n").is_err());
    }

    #[test]
    fn hash_inside_quotes_is_not_a_comment() {
        let root = parse_document("a: \"x # y\"\n").unwrap();
        assert_eq!(scalar(root.get("a").unwrap()), "x # y");
    }
}
