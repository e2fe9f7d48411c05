#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};
use tempfile::TempDir;
use tokio::sync::oneshot;
use webtv_api::{AppState, UserStore};
use webtv_core::domain::{DeviceClass, DeviceProfile};
use webtv_core::mediation::SimulatedBackend;
use webtv_core::{Cms, CmsConfig};

pub struct Server {
    pub dir: TempDir,
    pub addr: SocketAddr,
    pub client: reqwest::Client,
    pub backend: Arc<SimulatedBackend>,
    stop: Option<oneshot::Sender<()>>,
    task: Option<tokio::task::JoinHandle<std::io::Result<()>>>,
}

pub const MEDIA: [(&str, &str); 2] = [("alpha.mp4", "first clip"), ("beta.mp4", "second clip")];

impl Server {
    pub async fn start() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let fixtures = dir.path().join("fixtures");
        std::fs::create_dir_all(fixtures.join("media")).unwrap();
        let mut items = String::new();
        for (name, text) in MEDIA {
            std::fs::write(fixtures.join("media").join(name), text.repeat(100)).unwrap();
            items.push_str(&format!(
                "<item><title>{name}</title><enclosure url=\"{{{{base_url}}}}/fixtures/media/{name}\" type=\"video/mp4\"/></item>"
            ));
        }
        std::fs::write(
            fixtures.join("demo.rss"),
            format!("<rss version=\"2.0\"><channel><title>demo</title>{items}</channel></rss>"),
        )
        .unwrap();

        let backend = Arc::new(SimulatedBackend::new(Duration::from_millis(10)));
        let cms =
            Cms::open_with_backend(CmsConfig::with_data_dir(dir.path()), backend.clone()).unwrap();
        cms.registry()
            .put_device_profile(DeviceProfile {
                device_id: "iphone-1".into(),
                device_class: DeviceClass::Iphone,
                width: 960,
                height: 640,
                video_encoding: "H.264".into(),
                audio_encoding: "faac".into(),
            })
            .unwrap();
        let users = UserStore::parse(&UserStore::entry("demo", "demo")).unwrap();
        let state = AppState::new(cms, users, Duration::from_secs(600));

        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = oneshot::channel();
        let task = tokio::spawn(webtv_api::serve(listener, state, async {
            let _ = rx.await;
        }));
        Self {
            dir,
            addr,
            client: reqwest::Client::new(),
            backend,
            stop: Some(tx),
            task: Some(task),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub async fn login(&self) -> String {
        let resp = self
            .client
            .post(self.url("/api/v1/login"))
            .json(&json!({"userId": "demo", "password": "demo"}))
            .send()
            .await
            .unwrap();
        assert_eq!(resp.status(), 200);
        resp.json::<Value>().await.unwrap()["token"]
            .as_str()
            .unwrap()
            .to_string()
    }

    pub async fn get(&self, token: &str, path: &str) -> (u16, Value) {
        let resp = self
            .client
            .get(self.url(path))
            .bearer_auth(token)
            .send()
            .await
            .unwrap();
        let status = resp.status().as_u16();
        (status, resp.json().await.unwrap_or(Value::Null))
    }

    pub async fn post(&self, token: &str, path: &str, body: Value) -> (u16, Value) {
        let resp = self
            .client
            .post(self.url(path))
            .bearer_auth(token)
            .json(&body)
            .send()
            .await
            .unwrap();
        let status = resp.status().as_u16();
        (status, resp.json().await.unwrap_or(Value::Null))
    }

    /// Polls a status endpoint until the job is terminal.
    pub async fn wait_job(&self, token: &str, status_path: &str) -> Value {
        for _ in 0..500 {
            let (code, job) = self.get(token, status_path).await;
            assert_eq!(code, 200, "{job}");
            if job["state"] == "Succeeded" || job["state"] == "Failed" {
                return job;
            }
            tokio::time::sleep(Duration::from_millis(10)).await;
        }
        panic!("job at {status_path} did not finish");
    }

    pub async fn stop(mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(task) = self.task.take() {
            task.await.unwrap().unwrap();
        }
    }
}
