//! Transcoder backends.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::Serialize;

use crate::config::BackendConfig;
use crate::storage::remove_file_if_exists;

/// Resolution and codecs a variant is encoded to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TargetProfile {
    #[serde(rename = "Width")]
    pub width: u32,
    #[serde(rename = "Height")]
    pub height: u32,
    #[serde(rename = "VideoEncoding")]
    pub video_encoding: String,
    #[serde(rename = "AudioEncoding")]
    pub audio_encoding: String,
}

#[derive(Debug, Clone)]
pub struct TranscodeTask {
    pub source: PathBuf,
    pub target: PathBuf,
    pub profile: TargetProfile,
    /// Normalized server load of this conversion path.
    pub load_share: f64,
}

/// Contract: the target file exists if and only if `transcode` returns
/// `Ok`. Implementations must be callable concurrently from workers.
#[async_trait]
pub trait TranscoderBackend: Send + Sync {
    fn name(&self) -> &str;

    async fn transcode(&self, task: &TranscodeTask) -> Result<Duration, String>;
}

pub fn backend_from_config(config: &BackendConfig) -> Arc<dyn TranscoderBackend> {
    match config {
        BackendConfig::Simulated { latency_unit_ms } => Arc::new(SimulatedBackend::new(
            Duration::from_millis(*latency_unit_ms),
        )),
        BackendConfig::External { template } => Arc::new(ExternalCommandBackend::new(template)),
    }
}

/// Copies the source bytes to the target, writes a `<target>.xml`
/// sidecar describing the profile, and takes `latency_unit * load_share`.
#[derive(Debug)]
pub struct SimulatedBackend {
    latency_unit: Duration,
    invocations: AtomicUsize,
    failing: AtomicBool,
}

impl SimulatedBackend {
    pub fn new(latency_unit: Duration) -> Self {
        Self {
            latency_unit,
            invocations: AtomicUsize::new(0),
            failing: AtomicBool::new(false),
        }
    }

    pub fn latency_for(&self, load_share: f64) -> Duration {
        self.latency_unit.mul_f64(load_share.max(0.0))
    }

    pub fn invocations(&self) -> usize {
        self.invocations.load(Ordering::SeqCst)
    }

    /// Makes every following run fail, for exercising failure paths.
    pub fn set_failing(&self, failing: bool) {
        self.failing.store(failing, Ordering::SeqCst);
    }

    pub fn sidecar_path(target: &Path) -> PathBuf {
        let mut name = target.as_os_str().to_owned();
        name.push(".xml");
        PathBuf::from(name)
    }
}

#[derive(Serialize)]
#[serde(rename = "TranscodeInfo")]
struct Sidecar<'a> {
    #[serde(rename = "Source")]
    source: String,
    #[serde(rename = "Target")]
    profile: &'a TargetProfile,
}

#[async_trait]
impl TranscoderBackend for SimulatedBackend {
    fn name(&self) -> &str {
        "simulated"
    }

    async fn transcode(&self, task: &TranscodeTask) -> Result<Duration, String> {
        self.invocations.fetch_add(1, Ordering::SeqCst);
        let started = Instant::now();
        tokio::time::sleep(self.latency_for(task.load_share)).await;
        let sidecar = Self::sidecar_path(&task.target);
        let run = async {
            if self.failing.load(Ordering::SeqCst) {
                return Err("simulated encoder failure".to_string());
            }
            if let Some(dir) = task.target.parent() {
                tokio::fs::create_dir_all(dir)
                    .await
                    .map_err(|e| e.to_string())?;
            }
            tokio::fs::copy(&task.source, &task.target)
                .await
                .map_err(|e| format!("{}: {e}", task.source.display()))?;
            let doc = crate::xmldoc::to_document(&Sidecar {
                source: task.source.display().to_string(),
                profile: &task.profile,
            })
            .map_err(|e| e.to_string())?;
            tokio::fs::write(&sidecar, doc)
                .await
                .map_err(|e| e.to_string())
        };
        match run.await {
            Ok(()) => Ok(started.elapsed()),
            Err(e) => {
                let _ = remove_file_if_exists(&task.target);
                let _ = remove_file_if_exists(&sidecar);
                Err(e)
            }
        }
    }
}

/// Runs a system-installed encoder. The template is split on whitespace
/// and placeholders are substituted per argument, so paths with spaces
/// stay a single argument.
#[derive(Debug, Clone)]
pub struct ExternalCommandBackend {
    template: String,
}

impl ExternalCommandBackend {
    pub fn new(template: impl Into<String>) -> Self {
        Self {
            template: template.into(),
        }
    }

    pub fn command_line(&self, task: &TranscodeTask) -> Vec<String> {
        let src = task.source.display().to_string();
        let dst = task.target.display().to_string();
        let w = task.profile.width.to_string();
        let h = task.profile.height.to_string();
        self.template
            .split_whitespace()
            .map(|arg| {
                arg.replace("{src}", &src)
                    .replace("{dst}", &dst)
                    .replace("{w}", &w)
                    .replace("{h}", &h)
                    .replace("{vcodec}", &task.profile.video_encoding)
                    .replace("{acodec}", &task.profile.audio_encoding)
            })
            .collect()
    }
}

#[async_trait]
impl TranscoderBackend for ExternalCommandBackend {
    fn name(&self) -> &str {
        "external"
    }

    async fn transcode(&self, task: &TranscodeTask) -> Result<Duration, String> {
        let args = self.command_line(task);
        let Some((program, rest)) = args.split_first() else {
            return Err("empty encoder template".into());
        };
        if let Some(dir) = task.target.parent() {
            tokio::fs::create_dir_all(dir)
                .await
                .map_err(|e| e.to_string())?;
        }
        let started = Instant::now();
        let output = tokio::process::Command::new(program)
            .args(rest)
            .kill_on_drop(true)
            .output()
            .await;
        let outcome = match output {
            Err(e) => Err(format!("could not start {program}: {e}")),
            Ok(out) if !out.status.success() => Err(format!(
                "{program} exited with {}: {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )),
            Ok(_) if !task.target.exists() => {
                Err(format!("{program} succeeded but produced no output file"))
            }
            Ok(_) => Ok(started.elapsed()),
        };
        if outcome.is_err() {
            let _ = remove_file_if_exists(&task.target);
        }
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(dir: &Path, share: f64) -> TranscodeTask {
        std::fs::write(dir.join("in.mp4"), b"source bytes").unwrap();
        TranscodeTask {
            source: dir.join("in.mp4"),
            target: dir.join("out/out file.mp4"),
            profile: TargetProfile {
                width: 960,
                height: 640,
                video_encoding: "H.264".into(),
                audio_encoding: "faac".into(),
            },
            load_share: share,
        }
    }

    #[tokio::test]
    async fn simulated_copies_and_writes_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let backend = SimulatedBackend::new(Duration::from_millis(10));
        let t = task(dir.path(), 0.3);
        backend.transcode(&t).await.unwrap();
        assert_eq!(std::fs::read(&t.target).unwrap(), b"source bytes");
        let sidecar = std::fs::read_to_string(SimulatedBackend::sidecar_path(&t.target)).unwrap();
        assert!(sidecar.contains("<TranscodeInfo>"));
        assert!(sidecar.contains("<Width>960</Width>"));
        assert!(sidecar.contains("<AudioEncoding>faac</AudioEncoding>"));
        assert_eq!(backend.invocations(), 1);
    }

    #[tokio::test]
    async fn simulated_failure_leaves_no_target() {
        let dir = tempfile::tempdir().unwrap();
        let backend = SimulatedBackend::new(Duration::ZERO);
        let t = task(dir.path(), 0.2);
        backend.set_failing(true);
        assert!(backend.transcode(&t).await.is_err());
        assert!(!t.target.exists());

        backend.set_failing(false);
        let mut missing = t.clone();
        missing.source = dir.path().join("absent.mp4");
        assert!(backend.transcode(&missing).await.is_err());
        assert!(!missing.target.exists());
    }

    #[test]
    fn latency_follows_load_share_order() {
        let backend = SimulatedBackend::new(Duration::from_millis(100));
        let alpha = backend.latency_for(0.5);
        let beta = backend.latency_for(0.3);
        let gamma = backend.latency_for(0.2);
        assert!(alpha > beta && beta > gamma);
        assert_eq!(alpha, Duration::from_millis(50));
    }

    #[test]
    fn external_template_substitution() {
        let dir = tempfile::tempdir().unwrap();
        let t = task(dir.path(), 0.3);
        let b = ExternalCommandBackend::new(
            "ffmpeg -i {src} -s {w}x{h} -c:v {vcodec} -c:a {acodec} {dst}",
        );
        let line = b.command_line(&t);
        assert_eq!(line[0], "ffmpeg");
        assert_eq!(line[2], t.source.display().to_string());
        assert_eq!(line[4], "960x640");
        assert_eq!(line[6], "H.264");
        assert_eq!(line[8], "faac");
        assert_eq!(line[9], t.target.display().to_string());
    }

    #[tokio::test]
    async fn external_runs_command_and_checks_output() {
        let dir = tempfile::tempdir().unwrap();
        let t = task(dir.path(), 0.3);
        let ok = ExternalCommandBackend::new("cp {src} {dst}");
        ok.transcode(&t).await.unwrap();
        assert_eq!(std::fs::read(&t.target).unwrap(), b"source bytes");

        let t2 = TranscodeTask {
            target: dir.path().join("out/second.mp4"),
            ..t.clone()
        };
        let fails = ExternalCommandBackend::new("false {src} {dst}");
        assert!(fails.transcode(&t2).await.is_err());
        assert!(!t2.target.exists());

        let silent = ExternalCommandBackend::new("true");
        assert!(silent.transcode(&t2).await.is_err());
        let missing = ExternalCommandBackend::new("definitely-not-an-encoder-binary {src}");
        assert!(missing.transcode(&t2).await.is_err());
    }
}
