//! RSS 2.0 and ATOM 1.0 subset reader.
//!
//! RSS: `rss/channel/item`, content from `enclosure@url`, falling back to
//! `link`. ATOM: `feed/entry`, content from `link[rel=enclosure]@href`,
//! falling back to the first `link`. Entries without any content link are
//! skipped; relative links resolve against the feed URL.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeedError {
    #[error("feed host unreachable: {0}")]
    Unreachable(String),
    #[error("feed request to {url} returned HTTP {status}")]
    HttpStatus { url: String, status: u16 },
    #[error("not a feed: {0}")]
    NotAFeed(String),
    #[error("unsupported feed root element <{0}>")]
    UnsupportedRoot(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeedEntry {
    pub title: String,
    pub content_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mime_type_hint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_hint: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credentials {
    pub id: String,
    pub password: String,
}

/// Fetches the raw bytes behind an `http(s)://` or `file://` URL.
pub async fn fetch_bytes(
    client: &reqwest::Client,
    url: &Url,
    credentials: Option<&Credentials>,
) -> Result<Vec<u8>, FeedError> {
    match url.scheme() {
        "file" => {
            let path = url
                .to_file_path()
                .map_err(|_| FeedError::Unreachable(url.to_string()))?;
            read_local(&path)
        }
        "http" | "https" => {
            let mut req = client.get(url.clone());
            if let Some(c) = credentials {
                req = req.basic_auth(&c.id, Some(&c.password));
            }
            let resp = req
                .send()
                .await
                .map_err(|e| FeedError::Unreachable(format!("{url}: {e}")))?;
            let status = resp.status();
            if !status.is_success() {
                return Err(FeedError::HttpStatus {
                    url: url.to_string(),
                    status: status.as_u16(),
                });
            }
            resp.bytes()
                .await
                .map(|b| b.to_vec())
                .map_err(|e| FeedError::Unreachable(format!("{url}: {e}")))
        }
        other => Err(FeedError::Unreachable(format!(
            "unsupported scheme {other}"
        ))),
    }
}

fn read_local(path: &Path) -> Result<Vec<u8>, FeedError> {
    std::fs::read(path).map_err(|e| FeedError::Unreachable(format!("{}: {e}", path.display())))
}

/// Parses a feed document into entries, in document order.
pub fn parse_feed(text: &str, base: &Url) -> Result<Vec<FeedEntry>, FeedError> {
    let doc = roxmltree::Document::parse(text)
        .map_err(|e| FeedError::NotAFeed(format!("payload is not well-formed XML ({e})")))?;
    let root = doc.root_element();
    match root.tag_name().name() {
        "rss" => Ok(parse_rss(root, base)),
        "feed" => Ok(parse_atom(root, base)),
        "html" => Err(FeedError::NotAFeed("payload is an HTML page".into())),
        other => Err(FeedError::UnsupportedRoot(other.to_string())),
    }
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, name: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == name)
}

fn text_of(node: Option<roxmltree::Node<'_, '_>>) -> Option<String> {
    let t: String = node?
        .descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect();
    let t = t.trim();
    (!t.is_empty()).then(|| t.to_string())
}

fn resolve(base: &Url, href: &str) -> Option<String> {
    base.join(href.trim()).ok().map(|u| u.to_string())
}

fn parse_rss(root: roxmltree::Node<'_, '_>, base: &Url) -> Vec<FeedEntry> {
    let Some(channel) = child(root, "channel") else {
        return Vec::new();
    };
    channel
        .children()
        .filter(|n| n.is_element() && n.tag_name().name() == "item")
        .filter_map(|item| {
            let enclosure = child(item, "enclosure").filter(|e| e.attribute("url").is_some());
            let (url, mime, size) = match enclosure {
                Some(e) => (
                    resolve(base, e.attribute("url")?)?,
                    e.attribute("type").map(str::to_string),
                    e.attribute("length").and_then(|l| l.trim().parse().ok()),
                ),
                None => (resolve(base, &text_of(child(item, "link"))?)?, None, None),
            };
            Some(FeedEntry {
                title: text_of(child(item, "title")).unwrap_or_default(),
                content_url: url,
                mime_type_hint: mime,
                size_hint: size,
            })
        })
        .collect()
}

fn parse_atom(root: roxmltree::Node<'_, '_>, base: &Url) -> Vec<FeedEntry> {
    root.children()
        .filter(|n| n.is_element() && n.tag_name().name() == "entry")
        .filter_map(|entry| {
            let links: Vec<_> = entry
                .children()
                .filter(|n| n.is_element() && n.tag_name().name() == "link")
                .filter(|n| n.attribute("href").is_some())
                .collect();
            let link = links
                .iter()
                .find(|l| l.attribute("rel") == Some("enclosure"))
                .or_else(|| links.first())?;
            Some(FeedEntry {
                title: text_of(child(entry, "title")).unwrap_or_default(),
                content_url: resolve(base, link.attribute("href")?)?,
                mime_type_hint: link.attribute("type").map(str::to_string),
                size_hint: link.attribute("length").and_then(|l| l.trim().parse().ok()),
            })
        })
        .collect()
}
