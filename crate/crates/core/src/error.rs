use thiserror::Error;

use crate::aggregation::FeedError;
use crate::domain::CridError;

pub type Result<T, E = CmsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CmsError {
    #[error("invalid request: {0}")]
    Validation(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("nothing to update: {0}")]
    NothingToUpdate(String),

    #[error("invalid job transition for {id}: {from:?} -> {to:?}")]
    InvalidTransition {
        id: String,
        from: crate::domain::JobState,
        to: crate::domain::JobState,
    },

    #[error(transparent)]
    Crid(#[from] CridError),

    #[error(transparent)]
    Feed(#[from] FeedError),

    #[error("transcoder backend: {0}")]
    Backend(String),

    #[error("sink unavailable: {0}")]
    SinkUnavailable(String),

    #[error("xml: {0}")]
    Xml(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl From<quick_xml::DeError> for CmsError {
    fn from(e: quick_xml::DeError) -> Self {
        CmsError::Xml(e.to_string())
    }
}

impl From<quick_xml::SeError> for CmsError {
    fn from(e: quick_xml::SeError) -> Self {
        CmsError::Xml(e.to_string())
    }
}
