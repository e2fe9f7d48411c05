mod common;

use std::sync::Arc;

use common::Harness;
use webtv_core::mediation::{SimulatedBackend, TranscodingInfo};
use webtv_core::{CmsError, Crid, JobState};

#[tokio::test]
async fn transcode_registers_variant_with_lineage() {
    let h = Harness::new();
    let crids = h.aggregate(&["movie.mp4"]).await;
    let original: Crid = crids[0].parse().unwrap();

    let info = TranscodingInfo::device("iphone-1");
    let before = h
        .cms
        .mediation()
        .is_exist_content(&crids[0], &info, None)
        .unwrap();
    assert!(!before.exists);

    let job = h
        .cms
        .mediation()
        .transcode_content("r", &crids[0], &info)
        .unwrap();
    let done = h.wait(&job).await;
    assert_eq!(done.state, JobState::Succeeded, "{}", done.detail);
    let variant: Crid = done.outputs[0].parse().unwrap();
    let rec = h.cms.registry().get_content_record(&variant).unwrap();
    assert_eq!(rec.original_crid.as_ref(), Some(&original));
    assert_eq!(
        rec.profile_hash.as_ref().unwrap().as_str(),
        "960x640:H.264:faac"
    );
    assert_eq!(
        rec.filename(),
        format!("movie_{}_h264.mp4", variant.serial())
    );
    assert_eq!(
        done.result_location.as_deref(),
        Some(rec.storage_location.as_str())
    );
    assert!(std::path::Path::new(&rec.storage_location).is_file());

    let after = h
        .cms
        .mediation()
        .is_exist_content(&crids[0], &info, None)
        .unwrap();
    assert!(after.exists);
    assert_eq!(after.crid.as_ref(), Some(&variant));
    let by_fallback = h
        .cms
        .mediation()
        .is_exist_content("", &info, Some(&crids[0]))
        .unwrap();
    assert!(by_fallback.exists);

    let orig = h.cms.registry().get_content_record(&original).unwrap();
    assert_eq!(orig.mediation_count, 1);
}

#[tokio::test]
async fn second_request_completes_from_registry() {
    let h = Harness::new();
    let crids = h.aggregate(&["a.mp4"]).await;
    let info = TranscodingInfo::device("ipad-1");
    let first = h
        .cms
        .mediation()
        .transcode_content("r", &crids[0], &info)
        .unwrap();
    let first = h.wait(&first).await;
    let second = h
        .cms
        .mediation()
        .transcode_content("r", &crids[0], &info)
        .unwrap();
    assert_eq!(second.state, JobState::Succeeded);
    assert_eq!(second.outputs, first.outputs);
    assert_eq!(h.backend.invocations(), 1);

    let variant_location = first.result_location.unwrap();
    let via_variant = h
        .cms
        .mediation()
        .transcode_content("r", &variant_location, &TranscodingInfo::device("ipad-1"))
        .unwrap();
    assert_eq!(via_variant.state, JobState::Succeeded);
    assert_eq!(h.backend.invocations(), 1);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_identical_requests_run_backend_once() {
    let h = Harness::new();
    let crids = h.aggregate(&["a.mp4"]).await;
    let mediation = Arc::new(h);
    let mut handles = Vec::new();
    for _ in 0..16 {
        let h = mediation.clone();
        let src = crids[0].clone();
        handles.push(tokio::spawn(async move {
            let job = h
                .cms
                .mediation()
                .transcode_content("r", &src, &TranscodingInfo::device("iphone-1"))
                .unwrap();
            h.wait(&job).await
        }));
    }
    let mut outputs = Vec::new();
    for handle in handles {
        let done = handle.await.unwrap();
        assert_eq!(done.state, JobState::Succeeded, "{}", done.detail);
        outputs.push(done.outputs[0].clone());
    }
    outputs.dedup();
    assert_eq!(outputs.len(), 1);
    assert_eq!(mediation.backend.invocations(), 1);
    let variants = mediation
        .cms
        .registry()
        .variants_of(&crids[0].parse().unwrap());
    assert_eq!(variants.len(), 1);
}

#[tokio::test]
async fn inline_profile_and_distinct_profiles() {
    let h = Harness::new();
    let crids = h.aggregate(&["a.mp4"]).await;
    let inline = TranscodingInfo::Inline {
        width: 960,
        height: 640,
        video_encoding: "H.264".into(),
        audio_encoding: "faac".into(),
    };
    let a = h
        .cms
        .mediation()
        .transcode_content("r", &crids[0], &inline)
        .unwrap();
    let a = h.wait(&a).await;
    let b = h
        .cms
        .mediation()
        .transcode_content("r", &crids[0], &TranscodingInfo::device("iphone-1"))
        .unwrap();
    assert_eq!(b.state, JobState::Succeeded);
    assert_eq!(a.outputs, b.outputs);

    let c = h
        .cms
        .mediation()
        .transcode_content("r", &crids[0], &TranscodingInfo::device("ipad-1"))
        .unwrap();
    let c = h.wait(&c).await;
    assert_ne!(a.outputs, c.outputs);
    assert_eq!(h.backend.invocations(), 2);
}

#[tokio::test]
async fn backend_failure_leaves_nothing_behind() {
    let h = Harness::new();
    let crids = h.aggregate(&["a.mp4"]).await;
    let temp_before = h.temp_entries().len();
    h.backend.set_failing(true);
    let job = h
        .cms
        .mediation()
        .transcode_content("r", &crids[0], &TranscodingInfo::device("iphone-1"))
        .unwrap();
    let done = h.wait(&job).await;
    assert_eq!(done.state, JobState::Failed);
    assert_eq!(h.cms.registry().list_content().len(), 1);
    assert_eq!(h.temp_entries().len(), temp_before);

    h.backend.set_failing(false);
    let retry = h
        .cms
        .mediation()
        .transcode_content("r", &crids[0], &TranscodingInfo::device("iphone-1"))
        .unwrap();
    assert_eq!(h.wait(&retry).await.state, JobState::Succeeded);
}

#[tokio::test]
async fn synchronous_rejections() {
    let h = Harness::new();
    let crids = h.aggregate(&["a.mp4"]).await;
    let m = h.cms.mediation();
    assert!(matches!(
        m.transcode_content("r", &crids[0], &TranscodingInfo::device("toaster")),
        Err(CmsError::Validation(_))
    ));
    assert!(matches!(
        m.transcode_content(
            "r",
            "crid://etri.re.kr/webtv/201201010001",
            &TranscodingInfo::device("iphone-1")
        ),
        Err(CmsError::NotFound(_))
    ));
    assert!(matches!(
        m.transcode_content("r", "/nowhere/x.mp4", &TranscodingInfo::device("iphone-1")),
        Err(CmsError::NotFound(_))
    ));
    assert!(matches!(
        m.transcoding_status("missing"),
        Err(CmsError::NotFound(_))
    ));
    assert!(h
        .cms
        .jobs()
        .list()
        .iter()
        .all(|j| j.kind != webtv_core::JobKind::Transcode));
}

#[tokio::test]
async fn metadata_transformation() {
    let h = Harness::new();
    let src = h.data().join("meta.xml");
    std::fs::write(
        &src,
        "<Item><Title>News</Title><Secret>x</Secret><Duration>60</Duration></Item>",
    )
    .unwrap();
    let rules = r#"<Rules><Rename from="Title" to="Name"/><Drop name="Secret"/></Rules>"#;
    let job = h
        .cms
        .mediation()
        .transform_metadata("r", &format!("file://{}", src.display()), rules)
        .unwrap();
    let done = h.wait(&job).await;
    assert_eq!(done.state, JobState::Succeeded, "{}", done.detail);
    let out = std::fs::read_to_string(done.result_location.unwrap()).unwrap();
    assert!(out.contains("<Name>News</Name>"));
    assert!(!out.contains("Secret"));
    assert!(out.contains("<Duration>60</Duration>"));
    let status = h
        .cms
        .mediation()
        .transcoding_status(&job.event_identifier)
        .unwrap();
    assert_eq!(status.state, JobState::Succeeded);

    let bad = h
        .cms
        .mediation()
        .transform_metadata("r", src.to_str().unwrap(), "<Rules><Explode/></Rules>")
        .unwrap();
    assert_eq!(h.wait(&bad).await.state, JobState::Failed);

    assert!(matches!(
        h.cms
            .mediation()
            .transform_metadata("r", "/no/such.xml", ""),
        Err(CmsError::NotFound(_))
    ));
}

#[tokio::test]
async fn registry_document_can_be_transformed() {
    let h = Harness::new();
    let crids = h.aggregate(&["a.mp4"]).await;
    let job = h
        .cms
        .mediation()
        .transform_metadata("r", &crids[0], r#"<Rules><Drop name="ViewCount"/></Rules>"#)
        .unwrap();
    let done = h.wait(&job).await;
    assert_eq!(done.state, JobState::Succeeded, "{}", done.detail);
    let out = std::fs::read_to_string(done.result_location.unwrap()).unwrap();
    assert!(out.contains(&crids[0]));
    assert!(!out.contains("ViewCount"));
}

#[test]
fn simulated_latency_scales_with_share() {
    let b = SimulatedBackend::new(std::time::Duration::from_millis(100));
    assert_eq!(b.latency_for(0.5).as_millis(), 50);
    assert_eq!(b.latency_for(0.2).as_millis(), 20);
}
