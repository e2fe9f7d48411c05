//! Shared domain types and naming conventions.

mod content;
mod crid;
mod filename;
mod job;
mod profile;

pub use content::ContentRecord;
pub use crid::{Crid, CridError, DailyCounter, MAX_DAILY_COUNTER};
pub use filename::transcoded_filename;
pub use job::{JobKind, JobRecord, JobState};
pub use profile::{DeviceClass, DeviceProfile, ProfileHash};
