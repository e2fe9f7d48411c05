use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use webtv_core::aggregation::FeedError;
use webtv_core::CmsError;

/// JSON error body: `{"error": code, "message": text, "field": name?}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub field: Option<String>,
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            field: None,
        }
    }

    pub fn bad_request(message: impl Into<String>, field: Option<&str>) -> Self {
        Self {
            field: field.map(str::to_string),
            ..Self::new(StatusCode::BAD_REQUEST, "invalid_request", message)
        }
    }

    pub fn unauthorized(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            error: self.code,
            message: &self.message,
            field: self.field.as_deref(),
        };
        let mut response = (self.status, Json(body)).into_response();
        if self.status == StatusCode::UNAUTHORIZED {
            response.headers_mut().insert(
                axum::http::header::WWW_AUTHENTICATE,
                axum::http::HeaderValue::from_static("Bearer"),
            );
        }
        response
    }
}

impl From<CmsError> for ApiError {
    fn from(e: CmsError) -> Self {
        let message = e.to_string();
        let (status, code) = match &e {
            CmsError::Validation(_) | CmsError::Crid(_) => {
                (StatusCode::BAD_REQUEST, "invalid_request")
            }
            CmsError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            CmsError::Conflict(_) | CmsError::InvalidTransition { .. } => {
                (StatusCode::CONFLICT, "conflict")
            }
            CmsError::NothingToUpdate(_) => (StatusCode::CONFLICT, "nothing_to_update"),
            CmsError::Feed(FeedError::NotAFeed(_) | FeedError::UnsupportedRoot(_)) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "not_a_feed")
            }
            CmsError::Feed(_) => (StatusCode::BAD_GATEWAY, "feed_unreachable"),
            CmsError::Backend(_) => (StatusCode::BAD_GATEWAY, "backend_failed"),
            CmsError::SinkUnavailable(_) => (StatusCode::SERVICE_UNAVAILABLE, "sink_unavailable"),
            CmsError::Xml(_) | CmsError::Io(_) => {
                tracing::error!(error = %e, "internal error");
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        Self::new(status, code, message)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        let text = rejection.body_text();
        let status = match rejection {
            JsonRejection::MissingJsonContentType(_) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
            _ => StatusCode::BAD_REQUEST,
        };
        Self {
            field: field_of(&text),
            ..Self::new(status, "invalid_request", text)
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(rejection: QueryRejection) -> Self {
        let text = rejection.body_text();
        Self::bad_request(text.clone(), field_of(&text).as_deref())
    }
}

/// Best-effort field name from a deserializer message: a path prefix
/// such as `transcodingInfo.width: ...` or a quoted name such as
/// missing field `feedURL`.
fn field_of(message: &str) -> Option<String> {
    let detail = message.split_once("type: ").map_or(message, |(_, d)| d);
    if let Some((path, _)) = detail.split_once(": ") {
        if !path.is_empty() && !path.contains(' ') {
            return Some(path.to_string());
        }
    }
    let start = detail.find('`')? + 1;
    let len = detail[start..].find('`')?;
    Some(detail[start..start + len].to_string())
}
