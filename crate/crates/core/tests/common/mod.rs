#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use tempfile::TempDir;
use webtv_core::domain::{DeviceClass, DeviceProfile};
use webtv_core::mediation::SimulatedBackend;
use webtv_core::{Cms, CmsConfig, JobRecord, JobState};

pub const WAIT: Duration = Duration::from_secs(10);

pub struct Harness {
    pub dir: TempDir,
    pub cms: Cms,
    pub backend: Arc<SimulatedBackend>,
}

impl Harness {
    pub fn new() -> Self {
        Self::with_latency(Duration::from_millis(20))
    }

    pub fn with_latency(unit: Duration) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let backend = Arc::new(SimulatedBackend::new(unit));
        let cms = open(dir.path(), backend.clone());
        let h = Self { dir, cms, backend };
        h.seed_profiles();
        h
    }

    pub fn reopen(self) -> Self {
        let Harness { dir, cms, backend } = self;
        drop(cms);
        let cms = open(dir.path(), backend.clone());
        Self { dir, cms, backend }
    }

    pub fn data(&self) -> &Path {
        self.dir.path()
    }

    fn seed_profiles(&self) {
        for (id, class, w, h) in [
            ("pc-1", DeviceClass::Pc, 1280, 768),
            ("ipad-1", DeviceClass::Ipad, 1024, 768),
            ("iphone-1", DeviceClass::Iphone, 960, 640),
        ] {
            self.cms
                .registry()
                .put_device_profile(DeviceProfile {
                    device_id: id.into(),
                    device_class: class,
                    width: w,
                    height: h,
                    video_encoding: "H.264".into(),
                    audio_encoding: "faac".into(),
                })
                .unwrap();
        }
    }

    /// Writes media files and an RSS feed linking them; returns the feed
    /// URL and the item URLs.
    pub fn rss_fixture(&self, names: &[&str]) -> (String, Vec<String>) {
        let src = self.data().join("origin");
        std::fs::create_dir_all(&src).unwrap();
        let mut items = String::new();
        let mut urls = Vec::new();
        for (i, name) in names.iter().enumerate() {
            let path = src.join(name);
            if !name.starts_with("missing") {
                std::fs::write(&path, format!("video bytes of {name} #{i}").repeat(50)).unwrap();
            }
            let url = format!("file://{}", path.display());
            items.push_str(&format!(
                "<item><title>Clip {i}</title><enclosure url=\"{url}\" type=\"video/mp4\" length=\"10\"/></item>"
            ));
            urls.push(url);
        }
        let feed = src.join(format!("feed-{}.rss", names.len()));
        std::fs::write(
            &feed,
            format!("<?xml version=\"1.0\"?><rss version=\"2.0\"><channel><title>t</title>{items}</channel></rss>"),
        )
        .unwrap();
        (format!("file://{}", feed.display()), urls)
    }

    pub async fn wait(&self, job: &JobRecord) -> JobRecord {
        self.cms
            .jobs()
            .wait_terminal(&job.event_identifier, WAIT)
            .await
            .unwrap()
    }

    /// Aggregates every item of a fresh fixture feed; returns the new CRIDs.
    pub async fn aggregate(&self, names: &[&str]) -> Vec<String> {
        let (feed, _) = self.rss_fixture(names);
        let req = webtv_core::aggregation::AggregationRequest {
            reference: "test".into(),
            feed_url: feed,
            id: None,
            password: None,
            selection: (0..names.len())
                .map(webtv_core::aggregation::Selection::Index)
                .collect(),
        };
        let job = self.cms.aggregation().aggregate_content(req).await.unwrap();
        let done = self.wait(&job).await;
        assert_eq!(done.state, JobState::Succeeded, "{}", done.detail);
        done.outputs
    }

    pub fn temp_entries(&self) -> Vec<PathBuf> {
        match std::fs::read_dir(self.data().join("mediator-tmp")) {
            Ok(rd) => rd.map(|e| e.unwrap().path()).collect(),
            Err(_) => Vec::new(),
        }
    }
}

fn open(dir: &Path, backend: Arc<SimulatedBackend>) -> Cms {
    let mut config = CmsConfig::with_data_dir(dir);
    config.mediation_workers = 4;
    Cms::open_with_backend(config, backend).unwrap()
}
