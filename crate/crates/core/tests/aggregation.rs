mod common;

use common::Harness;
use webtv_core::aggregation::{AggregationRequest, Selection};
use webtv_core::{CmsError, JobState};

fn request(feed: &str, selection: Vec<Selection>) -> AggregationRequest {
    AggregationRequest {
        reference: "ref-1".into(),
        feed_url: feed.into(),
        id: None,
        password: None,
        selection,
    }
}

#[tokio::test]
async fn aggregates_selected_items_into_temp_storage() {
    let h = Harness::new();
    let (feed, urls) = h.rss_fixture(&["a.mp4", "b.mp4", "c.mp4"]);
    let entries = h.cms.aggregation().fetch_feed(&feed, None).await.unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(entries[1].content_url, urls[1]);

    let job = h
        .cms
        .aggregation()
        .aggregate_content(request(
            &feed,
            vec![Selection::Index(0), Selection::Url(urls[2].clone())],
        ))
        .await
        .unwrap();
    assert_eq!(job.state, JobState::Pending);
    let done = h.wait(&job).await;
    assert_eq!(done.state, JobState::Succeeded, "{}", done.detail);
    assert_eq!(done.outputs.len(), 2);

    let status = h
        .cms
        .aggregation()
        .aggregation_status(&job.event_identifier)
        .unwrap();
    assert_eq!(status.state, JobState::Succeeded);

    for (crid, url) in done.outputs.iter().zip([&urls[0], &urls[2]]) {
        let rec = h
            .cms
            .registry()
            .get_content_record(&crid.parse().unwrap())
            .unwrap();
        assert!(!rec.is_variant());
        assert_eq!(&rec.source_url, url);
        let path = std::path::PathBuf::from(&rec.storage_location);
        assert!(path.starts_with(h.data().join("mediator-tmp").join(rec.crid.serial())));
        let original = std::fs::read(url.strip_prefix("file://").unwrap()).unwrap();
        assert_eq!(std::fs::read(path).unwrap(), original);
    }
}

#[tokio::test]
async fn dead_link_fails_whole_job() {
    let h = Harness::new();
    let (feed, _) = h.rss_fixture(&["good.mp4", "missing.mp4"]);
    let job = h
        .cms
        .aggregation()
        .aggregate_content(request(
            &feed,
            vec![Selection::Index(0), Selection::Index(1)],
        ))
        .await
        .unwrap();
    let done = h.wait(&job).await;
    assert_eq!(done.state, JobState::Failed);
    assert!(done.detail.contains("missing.mp4"));
    assert!(h.cms.registry().list_content().is_empty());
    assert!(h.temp_entries().is_empty(), "{:?}", h.temp_entries());
}

#[tokio::test]
async fn selection_is_checked_before_a_job_exists() {
    let h = Harness::new();
    let (feed, _) = h.rss_fixture(&["a.mp4"]);
    let err = h
        .cms
        .aggregation()
        .aggregate_content(request(&feed, vec![Selection::Index(5)]))
        .await
        .unwrap_err();
    assert!(matches!(err, CmsError::Validation(_)));
    let err = h
        .cms
        .aggregation()
        .aggregate_content(request(&feed, vec![]))
        .await
        .unwrap_err();
    assert!(matches!(err, CmsError::Validation(_)));
    assert!(h.cms.jobs().list().is_empty());
}

#[tokio::test]
async fn html_page_is_not_a_feed() {
    let h = Harness::new();
    let page = h.data().join("page.html");
    std::fs::write(&page, "<!DOCTYPE html><html><body>hello</body></html>").unwrap();
    let err = h
        .cms
        .aggregation()
        .fetch_feed(&format!("file://{}", page.display()), None)
        .await
        .unwrap_err();
    assert!(matches!(
        err,
        CmsError::Feed(webtv_core::aggregation::FeedError::NotAFeed(_))
    ));
}

#[tokio::test]
async fn atom_feed_and_unknown_status() {
    let h = Harness::new();
    let media = h.data().join("clip.m4v");
    std::fs::write(&media, b"atom bytes").unwrap();
    let atom = h.data().join("feed.atom");
    std::fs::write(
        &atom,
        format!(
            r#"<feed xmlns="http://www.w3.org/2005/Atom"><entry><title>A</title><link rel="enclosure" href="file://{}"/></entry></feed>"#,
            media.display()
        ),
    )
    .unwrap();
    let entries = h
        .cms
        .aggregation()
        .fetch_feed(&format!("file://{}", atom.display()), None)
        .await
        .unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0].title, "A");

    assert!(matches!(
        h.cms.aggregation().aggregation_status("no-such-event"),
        Err(CmsError::NotFound(_))
    ));
}
