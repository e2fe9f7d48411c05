//! Content management core of the social Web TV service: the content
//! registry, asynchronous job store, and the aggregation, mediation and
//! deployment enablers over one data directory.

pub mod aggregation;
mod cms;
pub mod config;
pub mod deployment;
pub mod device;
pub mod domain;
pub mod error;
pub mod jobs;
pub mod mediation;
pub mod registry;
pub mod storage;
pub mod xmldoc;

pub use cms::Cms;
pub use config::{BackendConfig, CmsConfig, LoadShares};
pub use domain::{
    transcoded_filename, ContentRecord, Crid, CridError, DeviceClass, DeviceProfile, JobKind,
    JobRecord, JobState, ProfileHash,
};
pub use error::{CmsError, Result};
