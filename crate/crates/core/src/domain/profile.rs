use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CmsError, Result};

/// The three screens served by the CMS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeviceClass {
    #[serde(rename = "PC")]
    Pc,
    #[serde(rename = "iPad")]
    Ipad,
    #[serde(rename = "iPhone")]
    Iphone,
}

impl DeviceClass {
    pub const ALL: [DeviceClass; 3] = [DeviceClass::Pc, DeviceClass::Ipad, DeviceClass::Iphone];

    pub fn as_str(self) -> &'static str {
        match self {
            DeviceClass::Pc => "PC",
            DeviceClass::Ipad => "iPad",
            DeviceClass::Iphone => "iPhone",
        }
    }

    /// Best guess of the screen a target resolution was made for.
    pub fn from_resolution(width: u32, height: u32) -> DeviceClass {
        if width >= 1280 {
            DeviceClass::Pc
        } else if height >= 768 {
            DeviceClass::Ipad
        } else {
            DeviceClass::Iphone
        }
    }
}

impl fmt::Display for DeviceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeviceClass {
    type Err = CmsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pc" => Ok(DeviceClass::Pc),
            "ipad" => Ok(DeviceClass::Ipad),
            "iphone" => Ok(DeviceClass::Iphone),
            _ => Err(CmsError::Validation(format!("unknown device class {s:?}"))),
        }
    }
}

/// Identity of a transcoding target: resolution plus codecs.
///
/// Two profiles with equal hashes produce interchangeable variants, so
/// the hash is the deduplication key for mediation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProfileHash(String);

impl ProfileHash {
    pub fn new(width: u32, height: u32, video_encoding: &str, audio_encoding: &str) -> Self {
        ProfileHash(format!(
            "{width}x{height}:{video_encoding}:{audio_encoding}"
        ))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn resolution(&self) -> Option<(u32, u32)> {
        let (res, _) = self.0.split_once(':')?;
        let (w, h) = res.split_once('x')?;
        Some((w.parse().ok()?, h.parse().ok()?))
    }
}

impl fmt::Display for ProfileHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<String> for ProfileHash {
    fn from(s: String) -> Self {
        ProfileHash(s)
    }
}

/// Target resolution and codecs for one device, as stored by the profile
/// server. Serialized as a flat XML document rooted at `DeviceProfile`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename = "DeviceProfile")]
pub struct DeviceProfile {
    #[serde(rename = "DeviceID")]
    pub device_id: String,
    #[serde(rename = "DeviceClass")]
    pub device_class: DeviceClass,
    #[serde(rename = "Width")]
    pub width: u32,
    #[serde(rename = "Height")]
    pub height: u32,
    #[serde(rename = "VideoEncoding")]
    pub video_encoding: String,
    #[serde(rename = "AudioEncoding")]
    pub audio_encoding: String,
}

impl DeviceProfile {
    pub fn validate(&self) -> Result<()> {
        if self.device_id.is_empty()
            || !self
                .device_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            || self.device_id.starts_with('.')
        {
            return Err(CmsError::Validation(format!(
                "deviceId {:?} must be non-empty and use only [A-Za-z0-9._-]",
                self.device_id
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(CmsError::Validation(format!(
                "profile {} must have a positive resolution, got {}x{}",
                self.device_id, self.width, self.height
            )));
        }
        if self.video_encoding.trim().is_empty() || self.audio_encoding.trim().is_empty() {
            return Err(CmsError::Validation(format!(
                "profile {} must name both codecs",
                self.device_id
            )));
        }
        Ok(())
    }

    pub fn profile_hash(&self) -> ProfileHash {
        ProfileHash::new(
            self.width,
            self.height,
            &self.video_encoding,
            &self.audio_encoding,
        )
    }

    pub fn to_xml(&self) -> Result<String> {
        crate::xmldoc::to_document(self)
    }

    pub fn from_xml(text: &str) -> Result<Self> {
        crate::xmldoc::from_document(text)
    }
}
