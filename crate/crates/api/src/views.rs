use chrono::{DateTime, Utc};
use serde::Serialize;
use webtv_core::storage::public_media_path;
use webtv_core::{ContentRecord, DeviceClass, DeviceProfile};

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ContentView {
    pub crid: String,
    pub title: String,
    pub source_url: String,
    pub storage_location: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub public_url: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub original_crid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_hash: Option<String>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub view_count: u64,
    pub mediation_count: u64,
}

impl From<ContentRecord> for ContentView {
    fn from(r: ContentRecord) -> Self {
        Self {
            crid: r.crid.to_string(),
            title: r.title,
            public_url: public_media_path(&r.storage_location).map(str::to_string),
            source_url: r.source_url,
            storage_location: r.storage_location,
            original_crid: r.original_crid.map(|c| c.to_string()),
            profile_hash: r.profile_hash.map(|h| h.as_str().to_string()),
            created_at: r.created_at,
            updated_at: r.updated_at,
            view_count: r.view_count,
            mediation_count: r.mediation_count,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ContentDetail {
    #[serde(flatten)]
    pub record: ContentView,
    pub variants: Vec<ContentView>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfileView {
    pub device_id: String,
    pub device_class: DeviceClass,
    pub width: u32,
    pub height: u32,
    pub video_encoding: String,
    pub audio_encoding: String,
    pub profile_hash: String,
}

impl From<DeviceProfile> for ProfileView {
    fn from(p: DeviceProfile) -> Self {
        Self {
            profile_hash: p.profile_hash().as_str().to_string(),
            device_id: p.device_id,
            device_class: p.device_class,
            width: p.width,
            height: p.height,
            video_encoding: p.video_encoding,
            audio_encoding: p.audio_encoding,
        }
    }
}
