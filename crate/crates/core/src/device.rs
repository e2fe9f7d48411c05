//! Device-aware function: pick the device class from a user agent.

use serde::{Deserialize, Serialize};

use crate::domain::DeviceClass;

/// Classifies a user-agent string. Matching is case-insensitive:
/// "iphone" or "ipod" means iPhone, otherwise "ipad" means iPad, and
/// anything else (including the empty string) is a PC.
pub fn classify_device(user_agent: &str) -> DeviceClass {
    classify_device_bytes(user_agent.as_bytes())
}

/// Same rule over raw header bytes, which need not be UTF-8.
pub fn classify_device_bytes(user_agent: &[u8]) -> DeviceClass {
    let lower = user_agent.to_ascii_lowercase();
    let has = |needle: &[u8]| lower.windows(needle.len()).any(|w| w == needle);
    if has(b"iphone") || has(b"ipod") {
        DeviceClass::Iphone
    } else if has(b"ipad") {
        DeviceClass::Ipad
    } else {
        DeviceClass::Pc
    }
}

/// Which page layout a device gets. PC and iPad share the full page.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PageVariant {
    Full,
    Mobile,
}

pub fn page_variant(class: DeviceClass) -> PageVariant {
    match class {
        DeviceClass::Iphone => PageVariant::Mobile,
        DeviceClass::Pc | DeviceClass::Ipad => PageVariant::Full,
    }
}
