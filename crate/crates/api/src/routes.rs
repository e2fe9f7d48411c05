use axum::body::Body;
use axum::extract::{Path, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Extension, Json, Router};
use serde::{Deserialize, Serialize};
use tokio_util::io::ReaderStream;
use webtv_core::aggregation::{AggregationRequest, Credentials};
use webtv_core::device::classify_device;
use webtv_core::mediation::TranscodingInfo;
use webtv_core::storage::{public_media_url, safe_segment};
use webtv_core::{Crid, JobRecord};

use crate::auth::Session;
use crate::error::ApiError;
use crate::extract::{ApiJson, ApiQuery};
use crate::views::{ContentDetail, ContentView, ProfileView};
use crate::AppState;

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    let protected = Router::new()
        .route("/session", get(current_session))
        .route("/logout", post(logout))
        .route("/feeds", get(fetch_feed))
        .route("/aggregation/aggregateContent", post(aggregate_content))
        .route("/aggregation/status/{event}", get(aggregation_status))
        .route("/mediation/transcodeContent", post(transcode_content))
        .route("/mediation/isExistContent", post(is_exist_content))
        .route("/mediation/transformMetadata", post(transform_metadata))
        .route("/mediation/status/{event}", get(transcoding_status))
        .route("/deployment/uploadContent", post(upload_content))
        .route("/deployment/updateContent", post(update_content))
        .route("/deployment/deleteContent", post(delete_content))
        .route("/deployment/status/{event}", get(deployment_status))
        .route("/deployment/share", post(share))
        .route("/content", get(list_content))
        .route("/content/{*crid}", get(get_content))
        .route("/profiles", get(list_profiles))
        .route_layer(middleware::from_fn_with_state(
            state.clone(),
            require_session,
        ));

    let api = Router::new().route("/login", post(login)).merge(protected);

    Router::new()
        .nest("/api/v1", api)
        .route("/media/{serial}/{file}", get(media))
        .route("/fixtures/{*path}", get(fixture))
        .fallback(|| async { ApiError::not_found("no such route") })
        .with_state(state)
}

async fn require_session(
    State(state): State<AppState>,
    mut request: Request,
    next: Next,
) -> Response {
    let token = request
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim);
    let Some(token) = token.filter(|t| !t.is_empty()) else {
        return ApiError::unauthorized("missing bearer token").into_response();
    };
    match state.sessions().get(token) {
        Some(session) => {
            request.extensions_mut().insert(session);
            next.run(request).await
        }
        None => ApiError::unauthorized("invalid or expired session").into_response(),
    }
}

fn user_agent(headers: &HeaderMap) -> &str {
    headers
        .get(header::USER_AGENT)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct LoginRequest {
    #[serde(alias = "id")]
    user_id: String,
    password: String,
}

async fn login(
    State(state): State<AppState>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<LoginRequest>,
) -> ApiResult<Json<Session>> {
    if !state.users().verify(&req.user_id, &req.password) {
        return Err(ApiError::unauthorized("invalid user id or password"));
    }
    let class = classify_device(user_agent(&headers));
    Ok(Json(state.sessions().issue(&req.user_id, class)))
}

async fn current_session(Extension(session): Extension<Session>) -> Json<Session> {
    Json(session)
}

async fn logout(
    State(state): State<AppState>,
    Extension(session): Extension<Session>,
) -> StatusCode {
    state.sessions().revoke(&session.token);
    StatusCode::NO_CONTENT
}

#[derive(Deserialize)]
struct FeedQuery {
    url: Option<String>,
    id: Option<String>,
    password: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FeedListing {
    #[serde(rename = "feedURL")]
    feed_url: String,
    entries: Vec<webtv_core::aggregation::FeedEntry>,
}

async fn fetch_feed(
    State(state): State<AppState>,
    ApiQuery(q): ApiQuery<FeedQuery>,
) -> ApiResult<Json<FeedListing>> {
    let url = q
        .url
        .filter(|u| !u.trim().is_empty())
        .ok_or_else(|| ApiError::bad_request("query parameter url is required", Some("url")))?;
    let credentials = q.id.map(|id| Credentials {
        id,
        password: q.password.unwrap_or_default(),
    });
    let entries = state
        .cms()
        .aggregation()
        .fetch_feed(&url, credentials.as_ref())
        .await?;
    Ok(Json(FeedListing {
        feed_url: url,
        entries,
    }))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Accepted {
    event_identifier: String,
}

fn accepted(job: JobRecord) -> (StatusCode, Json<Accepted>) {
    (
        StatusCode::ACCEPTED,
        Json(Accepted {
            event_identifier: job.event_identifier,
        }),
    )
}

async fn aggregate_content(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<AggregationRequest>,
) -> ApiResult<(StatusCode, Json<Accepted>)> {
    Ok(accepted(
        state.cms().aggregation().aggregate_content(req).await?,
    ))
}

async fn aggregation_status(
    State(state): State<AppState>,
    Path(event): Path<String>,
) -> ApiResult<Json<JobRecord>> {
    Ok(Json(state.cms().aggregation().aggregation_status(&event)?))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct TranscodeRequest {
    reference: String,
    #[serde(rename = "srcContentURL")]
    src_content_url: String,
    transcoding_info: TranscodingInfo,
}

async fn transcode_content(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<TranscodeRequest>,
) -> ApiResult<(StatusCode, Json<Accepted>)> {
    let job = state.cms().mediation().transcode_content(
        &req.reference,
        &req.src_content_url,
        &req.transcoding_info,
    )?;
    Ok(accepted(job))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ExistRequest {
    #[serde(rename = "srcContentURL", default)]
    src_content_url: String,
    transcoding_info: TranscodingInfo,
    #[serde(default)]
    original_content: Option<String>,
}

async fn is_exist_content(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<ExistRequest>,
) -> ApiResult<Json<webtv_core::mediation::ExistResult>> {
    let result = state.cms().mediation().is_exist_content(
        &req.src_content_url,
        &req.transcoding_info,
        req.original_content.as_deref(),
    )?;
    Ok(Json(result))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct TransformRequest {
    reference: String,
    #[serde(rename = "srcMetadataURL")]
    src_metadata_url: String,
    #[serde(default)]
    transformation_rule: String,
}

async fn transform_metadata(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<TransformRequest>,
) -> ApiResult<(StatusCode, Json<Accepted>)> {
    let job = state.cms().mediation().transform_metadata(
        &req.reference,
        &req.src_metadata_url,
        &req.transformation_rule,
    )?;
    Ok(accepted(job))
}

async fn transcoding_status(
    State(state): State<AppState>,
    Path(event): Path<String>,
) -> ApiResult<Json<JobRecord>> {
    Ok(Json(state.cms().mediation().transcoding_status(&event)?))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct PublishRequest {
    #[serde(alias = "referenxe")]
    reference: String,
    src_location: String,
    #[serde(default = "default_destination")]
    dst_location: String,
}

fn default_destination() -> String {
    "media".to_string()
}

async fn upload_content(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<PublishRequest>,
) -> ApiResult<(StatusCode, Json<Accepted>)> {
    let job = state.cms().deployment().upload_content(
        &req.reference,
        &req.src_location,
        &req.dst_location,
    )?;
    Ok(accepted(job))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct UpdateRequest {
    #[serde(alias = "referenxe")]
    reference: String,
    src_location: String,
    dst_location: String,
}

async fn update_content(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<UpdateRequest>,
) -> ApiResult<(StatusCode, Json<Accepted>)> {
    let job = state.cms().deployment().update_content(
        &req.reference,
        &req.src_location,
        &req.dst_location,
    )?;
    Ok(accepted(job))
}

#[derive(Deserialize)]
struct DeleteRequest {
    #[serde(default)]
    reference: String,
    crid: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Deleted {
    deleted: bool,
    reference: String,
    record: ContentView,
}

async fn delete_content(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<DeleteRequest>,
) -> ApiResult<Json<Deleted>> {
    let record = state
        .cms()
        .deployment()
        .delete_content(&req.reference, &req.crid)?;
    Ok(Json(Deleted {
        deleted: true,
        reference: req.reference,
        record: record.into(),
    }))
}

/// Upload and update jobs share one status endpoint.
async fn deployment_status(
    State(state): State<AppState>,
    Path(event): Path<String>,
) -> ApiResult<Json<JobRecord>> {
    let deployment = state.cms().deployment();
    let job = deployment
        .uploading_status(&event)
        .or_else(|_| deployment.updating_status(&event))?;
    Ok(Json(job))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ShareRequest {
    #[serde(alias = "sinkKind")]
    sink: String,
    #[serde(default)]
    account: Option<String>,
    review: String,
    content_url: String,
}

async fn share(
    State(state): State<AppState>,
    Extension(session): Extension<Session>,
    ApiJson(req): ApiJson<ShareRequest>,
) -> ApiResult<(StatusCode, Json<webtv_core::deployment::SharePost>)> {
    let account = req.account.unwrap_or(session.user_id);
    let post = state.cms().deployment().share_to_sns(
        &req.sink,
        &account,
        &req.review,
        &req.content_url,
    )?;
    Ok((StatusCode::CREATED, Json(post)))
}

async fn list_content(State(state): State<AppState>) -> Json<Vec<ContentView>> {
    let mut records = state.cms().registry().list_content();
    records.sort_by(|a, b| a.crid.cmp(&b.crid));
    Json(records.into_iter().map(ContentView::from).collect())
}

/// Accepts the CRID with or without its scheme; a path segment may have
/// collapsed the `//` after `crid:`.
fn crid_from_path(raw: &str) -> ApiResult<Crid> {
    let rest = raw
        .strip_prefix("crid://")
        .or_else(|| raw.strip_prefix("crid:/"))
        .unwrap_or(raw);
    format!("crid://{rest}")
        .parse()
        .map_err(|e: webtv_core::CridError| ApiError::bad_request(e.to_string(), Some("crid")))
}

async fn get_content(
    State(state): State<AppState>,
    Path(raw): Path<String>,
) -> ApiResult<Json<ContentDetail>> {
    let crid = crid_from_path(&raw)?;
    let registry = state.cms().registry();
    let record = registry.get_content_record(&crid)?;
    let mut variants = registry.variants_of(&crid);
    variants.sort_by(|a, b| a.crid.cmp(&b.crid));
    Ok(Json(ContentDetail {
        record: record.into(),
        variants: variants.into_iter().map(ContentView::from).collect(),
    }))
}

async fn list_profiles(State(state): State<AppState>) -> Json<Vec<ProfileView>> {
    let mut profiles = state.cms().registry().list_device_profiles();
    profiles.sort_by(|a, b| a.device_id.cmp(&b.device_id));
    Json(profiles.into_iter().map(ProfileView::from).collect())
}

fn content_type(name: &str) -> &'static str {
    let ext = name.rsplit_once('.').map(|(_, e)| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("mp4" | "m4v") => "video/mp4",
        Some("webm") => "video/webm",
        Some("mov") => "video/quicktime",
        Some("ts") => "video/mp2t",
        Some("mp3") => "audio/mpeg",
        Some("m4a" | "aac") => "audio/aac",
        Some("rss") => "application/rss+xml",
        Some("atom") => "application/atom+xml",
        Some("xml") => "application/xml",
        Some("html" | "htm") => "text/html; charset=utf-8",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    }
}

/// Public read of published bytes; counts a view on the owning record.
async fn media(
    State(state): State<AppState>,
    Path((serial, file)): Path<(String, String)>,
) -> ApiResult<Response> {
    if !safe_segment(&serial) || !safe_segment(&file) {
        return Err(ApiError::not_found("no such media object"));
    }
    let path = state.cms().layout().media_dir().join(&serial).join(&file);
    let handle = tokio::fs::File::open(&path)
        .await
        .map_err(|_| ApiError::not_found("no such media object"))?;
    let len = handle.metadata().await.map(|m| m.len()).ok();

    let location = format!("/media/{serial}/{file}");
    let registry = state.cms().registry();
    if let Some(record) = registry.find_by_location(&location) {
        debug_assert_eq!(public_media_url(&record.crid, &file), location);
        if let Err(e) = registry.update_content_record(&record.crid, |r| r.view_count += 1) {
            tracing::warn!(crid = %record.crid, error = %e, "could not count view");
        }
    }

    let mut response = Body::from_stream(ReaderStream::new(handle)).into_response();
    let headers = response.headers_mut();
    headers.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static(content_type(&file)),
    );
    if let Some(len) = len {
        headers.insert(header::CONTENT_LENGTH, HeaderValue::from(len));
    }
    Ok(response)
}

/// Demo fixtures. Feed documents get `{{base_url}}` replaced by this
/// server's address so their links point back here.
async fn fixture(
    State(state): State<AppState>,
    headers: HeaderMap,
    Path(path): Path<String>,
) -> ApiResult<Response> {
    let mut file = state.cms().layout().fixtures_dir();
    for segment in path.split('/') {
        if !safe_segment(segment) {
            return Err(ApiError::not_found("no such fixture"));
        }
        file.push(segment);
    }
    let bytes = tokio::fs::read(&file)
        .await
        .map_err(|_| ApiError::not_found("no such fixture"))?;
    let kind = content_type(&path);
    let body = if kind.contains("xml") {
        let host = headers
            .get(header::HOST)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("127.0.0.1");
        String::from_utf8_lossy(&bytes)
            .replace("{{base_url}}", &format!("http://{host}"))
            .into_bytes()
    } else {
        bytes
    };
    Ok(([(header::CONTENT_TYPE, kind)], body).into_response())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crids_from_paths() {
        let full = "crid://etri.re.kr/webtv/201206020001";
        assert_eq!(crid_from_path(full).unwrap().to_string(), full);
        assert_eq!(
            crid_from_path("crid:/etri.re.kr/webtv/201206020001")
                .unwrap()
                .to_string(),
            full
        );
        assert_eq!(
            crid_from_path("etri.re.kr/webtv/201206020001")
                .unwrap()
                .to_string(),
            full
        );
        assert!(crid_from_path("etri.re.kr/webtv").is_err());
    }

    #[test]
    fn media_types() {
        assert_eq!(content_type("a_201206020001_h264.mp4"), "video/mp4");
        assert_eq!(content_type("feed.RSS"), "application/rss+xml");
        assert_eq!(content_type("noext"), "application/octet-stream");
    }
}
