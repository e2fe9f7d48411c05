mod common;

use common::Harness;
use webtv_core::jobs::{JobStore, INTERRUPTED};
use webtv_core::mediation::TranscodingInfo;
use webtv_core::{Crid, JobKind, JobState};

#[tokio::test]
async fn registry_and_jobs_survive_reopen() {
    let h = Harness::new();
    let crids = h.aggregate(&["a.mp4", "b.mp4"]).await;
    let job = h
        .cms
        .mediation()
        .transcode_content("r", &crids[0], &TranscodingInfo::device("iphone-1"))
        .unwrap();
    let done = h.wait(&job).await;

    let h = h.reopen();
    assert_eq!(h.cms.registry().list_content().len(), 3);
    assert_eq!(h.cms.registry().list_device_profiles().len(), 3);
    let variant = h.cms.registry().find_variant(
        &crids[0].parse().unwrap(),
        &webtv_core::ProfileHash::new(960, 640, "H.264", "faac"),
    );
    assert_eq!(variant.unwrap().crid.to_string(), done.outputs[0]);
    let status = h
        .cms
        .mediation()
        .transcoding_status(&job.event_identifier)
        .unwrap();
    assert_eq!(status.state, JobState::Succeeded);

    let more = h.aggregate(&["c.mp4"]).await;
    let all: Vec<Crid> = crids
        .iter()
        .chain(&done.outputs)
        .chain(&more)
        .map(|c| c.parse().unwrap())
        .collect();
    let mut counters: Vec<u32> = all.iter().map(Crid::counter).collect();
    counters.sort_unstable();
    counters.dedup();
    assert_eq!(counters.len(), 4);
}

#[test]
fn unfinished_jobs_are_failed_on_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("journal.jsonl");
    let (pending, running, finished) = {
        let store = JobStore::open(&path).unwrap();
        let p = store.create(JobKind::Upload, "a").unwrap();
        let r = store.create(JobKind::Transcode, "b").unwrap();
        store.start(&r.event_identifier, "working").unwrap();
        let f = store.create(JobKind::Update, "c").unwrap();
        store.start(&f.event_identifier, "working").unwrap();
        store
            .succeed(&f.event_identifier, "ok", None, vec![])
            .unwrap();
        (p.event_identifier, r.event_identifier, f.event_identifier)
    };
    let store = JobStore::open(&path).unwrap();
    for id in [&pending, &running] {
        let j = store.get(id).unwrap();
        assert_eq!(j.state, JobState::Failed);
        assert_eq!(j.detail, INTERRUPTED);
    }
    assert_eq!(store.get(&finished).unwrap().state, JobState::Succeeded);
}
