//! Demo data: fixture feeds and media served under `/fixtures`, the three
//! reference device profiles and a demo account.

use std::fs;
use std::path::{Path, PathBuf};

use webtv_api::UserStore;
use webtv_core::domain::{DeviceClass, DeviceProfile};
use webtv_core::registry::Registry;
use webtv_core::storage::{write_atomic, DataLayout};

use crate::error::CliError;

pub const DEMO_USER: &str = "demo";
pub const DEMO_PASSWORD: &str = "demo";

pub const DEMO_RSS: &str = "feeds/demo.rss";
pub const DEMO_ATOM: &str = "feeds/demo.atom";
pub const DEAD_LINK_RSS: &str = "feeds/dead-link.rss";

const RSS_MEDIA: [(&str, &str); 3] = [
    ("Evening news", "news-1.mp4"),
    ("Morning news", "news-2.mp4"),
    ("Drama episode 1", "drama-1.mp4"),
];
const ATOM_MEDIA: (&str, &str) = ("Match highlights", "sports-1.mp4");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedReport {
    pub data_dir: PathBuf,
    pub users_file: PathBuf,
    pub profiles: usize,
    pub media_files: Vec<PathBuf>,
}

pub fn demo_profiles() -> [DeviceProfile; 3] {
    let profile = |id: &str, class, width, height| DeviceProfile {
        device_id: id.to_string(),
        device_class: class,
        width,
        height,
        video_encoding: "H.264".into(),
        audio_encoding: "faac".into(),
    };
    [
        profile("pc-1", DeviceClass::Pc, 1280, 768),
        profile("ipad-1", DeviceClass::Ipad, 1024, 768),
        profile("iphone-1", DeviceClass::Iphone, 960, 640),
    ]
}

/// Deterministic stand-in bytes for a demo clip.
pub fn demo_media_bytes(name: &str) -> Vec<u8> {
    let mut out = format!("WEBTV-DEMO {name}\n").into_bytes();
    let mut x: u32 = name
        .bytes()
        .fold(2166136261, |h, b| (h ^ b as u32).wrapping_mul(16777619));
    while out.len() < 48 * 1024 {
        x ^= x << 13;
        x ^= x >> 17;
        x ^= x << 5;
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn rss(title: &str, items: &[(&str, String)]) -> String {
    let mut body = String::new();
    for (t, url) in items {
        body.push_str(&format!(
            "    <item>\n      <title>{t}</title>\n      <enclosure url=\"{url}\" type=\"video/mp4\"/>\n    </item>\n"
        ));
    }
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<rss version=\"2.0\">\n  <channel>\n    <title>{title}</title>\n    <link>{{{{base_url}}}}/</link>\n{body}  </channel>\n</rss>\n"
    )
}

fn media_url(file: &str) -> String {
    format!("{{{{base_url}}}}/fixtures/media/{file}")
}

/// Installs the demo data under `data_dir`, creating it if needed.
/// Running it again leaves the same state.
pub fn seed_demo(data_dir: &Path) -> Result<SeedReport, CliError> {
    let io = |what: &str, e: std::io::Error| CliError::Runtime(format!("{what}: {e}"));
    fs::create_dir_all(data_dir).map_err(|e| io("cannot create data directory", e))?;
    let layout = DataLayout::new(data_dir);
    let fixtures = layout.fixtures_dir();

    let mut media_files = Vec::new();
    for (_, file) in RSS_MEDIA.iter().chain([&ATOM_MEDIA]) {
        let path = fixtures.join("media").join(file);
        write_atomic(&path, &demo_media_bytes(file)).map_err(|e| io("cannot write fixture", e))?;
        media_files.push(path);
    }

    let items: Vec<(&str, String)> = RSS_MEDIA.iter().map(|(t, f)| (*t, media_url(f))).collect();
    let dead = vec![
        (RSS_MEDIA[0].0, media_url(RSS_MEDIA[0].1)),
        ("Withdrawn clip", media_url("withdrawn.mp4")),
    ];
    let atom = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<feed xmlns=\"http://www.w3.org/2005/Atom\">\n  <title>Demo sports</title>\n  <entry>\n    <title>{}</title>\n    <link rel=\"enclosure\" type=\"video/mp4\" href=\"{}\"/>\n  </entry>\n</feed>\n",
        ATOM_MEDIA.0,
        media_url(ATOM_MEDIA.1)
    );
    for (rel, text) in [
        (DEMO_RSS, rss("Demo channel", &items)),
        (DEAD_LINK_RSS, rss("Channel with a dead link", &dead)),
        (DEMO_ATOM, atom),
    ] {
        write_atomic(&fixtures.join(rel), text.as_bytes())
            .map_err(|e| io("cannot write fixture", e))?;
    }

    let registry = Registry::open(layout.registry_dir())
        .map_err(|e| CliError::Runtime(format!("cannot open registry: {e}")))?;
    let profiles = demo_profiles();
    for p in &profiles {
        if registry.get_device_profile(&p.device_id).ok().as_ref() == Some(p) {
            continue;
        }
        registry
            .put_device_profile(p.clone())
            .map_err(|e| CliError::Runtime(format!("cannot store profile {}: {e}", p.device_id)))?;
    }

    let users_file = data_dir.join("users.txt");
    let existing = match fs::read_to_string(&users_file) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(io("cannot read user file", e)),
    };
    let mut lines: Vec<String> = existing
        .lines()
        .filter(|l| !l.trim_start().starts_with(&format!("{DEMO_USER}:")))
        .map(str::to_string)
        .collect();
    lines.push(UserStore::entry(DEMO_USER, DEMO_PASSWORD));
    write_atomic(&users_file, format!("{}\n", lines.join("\n")).as_bytes())
        .map_err(|e| io("cannot write user file", e))?;

    Ok(SeedReport {
        data_dir: data_dir.to_path_buf(),
        users_file,
        profiles: profiles.len(),
        media_files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn media_bytes_are_stable_and_distinct() {
        assert_eq!(demo_media_bytes("a.mp4"), demo_media_bytes("a.mp4"));
        assert_ne!(demo_media_bytes("a.mp4"), demo_media_bytes("b.mp4"));
        assert!(demo_media_bytes("a.mp4").len() >= 48 * 1024);
    }

    #[test]
    fn feeds_carry_placeholders() {
        let text = rss("t", &[("x", media_url("x.mp4"))]);
        assert!(text.contains("url=\"{{base_url}}/fixtures/media/x.mp4\""));
    }
}
