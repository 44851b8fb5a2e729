use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::RetrievalError;

/// Bundled synthetic forum corpus (JSON Lines).
pub const BUNDLED_CORPUS: &str = include_str!("../../data/askubuntu_mini.jsonl");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub title: String,
    pub body: String,
    pub accepted_answer: Option<String>,
    pub score: i64,
}

impl Post {
    /// Text that gets indexed: title followed by body.
    pub fn indexed_text(&self) -> String {
        format!("{}\n{}", self.title, self.body)
    }
}

/// Parses one post per non-blank line and rejects duplicate ids.
pub fn load_corpus(text: &str) -> Result<Vec<Post>, RetrievalError> {
    let mut posts = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let post: Post = serde_json::from_str(line).map_err(|e| RetrievalError::MalformedPost {
            line: i + 1,
            message: e.to_string(),
        })?;
        if !ids.insert(post.id.clone()) {
            return Err(RetrievalError::DuplicateId(post.id));
        }
        posts.push(post);
    }
    Ok(posts)
}

/// One `<row>` of a Stack Exchange `Posts.xml` dump, with attribute values
/// already extracted. Reading the XML itself is left to the caller.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DumpRow {
    /// `Id`
    pub id: String,
    /// `PostTypeId`: 1 for questions, 2 for answers.
    pub post_type_id: u8,
    /// `Title` (questions only)
    pub title: Option<String>,
    /// `Body`, HTML
    pub body: String,
    /// `AcceptedAnswerId` (questions only)
    pub accepted_answer_id: Option<String>,
    /// `Score`
    pub score: i64,
}

/// Maps dump rows to posts: each question becomes a post with id `Id`,
/// `Title`, tag-stripped `Body`, and the tag-stripped body of the row named
/// by `AcceptedAnswerId` (null when absent or missing from the dump).
/// Answer rows only contribute their bodies.
pub fn convert_dump_rows(rows: &[DumpRow]) -> Vec<Post> {
    let answers: HashMap<&str, &str> = rows
        .iter()
        .filter(|r| r.post_type_id == 2)
        .map(|r| (r.id.as_str(), r.body.as_str()))
        .collect();
    rows.iter()
        .filter(|r| r.post_type_id == 1)
        .map(|r| Post {
            id: r.id.clone(),
            title: r.title.clone().unwrap_or_default(),
            body: strip_tags(&r.body),
            accepted_answer: r
                .accepted_answer_id
                .as_deref()
                .and_then(|a| answers.get(a))
                .map(|b| strip_tags(b)),
            score: r.score,
        })
        .collect()
}

fn strip_tags(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut in_tag = false;
    for c in html.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    out.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&amp;", "&")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_corpus_loads() {
        let posts = load_corpus(BUNDLED_CORPUS).unwrap();
        assert_eq!(posts.len(), 60);
        assert!(posts.iter().any(|p| p.accepted_answer.is_none()));
    }

    #[test]
    fn duplicate_id_rejected() {
        let line = r#"{"id":"x","title":"t","body":"b","accepted_answer":null,"score":1}"#;
        let text = format!("{line}\n{line}\n");
        assert_eq!(load_corpus(&text), Err(RetrievalError::DuplicateId("x".into())));
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = "\n{\"id\": 3}\n";
        assert!(matches!(load_corpus(text), Err(RetrievalError::MalformedPost { line: 2, .. })));
    }

    #[test]
    fn dump_rows_resolve_accepted_answers() {
        let rows = vec![
            DumpRow {
                id: "1".into(),
                post_type_id: 1,
                title: Some("Permission denied".into()),
                body: "<p>apt says &quot;are you root?&quot;</p>".into(),
                accepted_answer_id: Some("2".into()),
                score: 5,
            },
            DumpRow {
                id: "2".into(),
                post_type_id: 2,
                body: "<p>prefix the command with <code>sudo</code></p>".into(),
                ..DumpRow::default()
            },
            DumpRow {
                id: "3".into(),
                post_type_id: 1,
                title: Some("unanswered".into()),
                body: "<p>?</p>".into(),
                accepted_answer_id: Some("99".into()),
                score: 0,
            },
        ];
        let posts = convert_dump_rows(&rows);
        assert_eq!(posts.len(), 2);
        assert_eq!(posts[0].body, "apt says \"are you root?\"");
        assert_eq!(posts[0].accepted_answer.as_deref(), Some("prefix the command with sudo"));
        assert_eq!(posts[1].accepted_answer, None);
    }
}
