//! Content reference identifiers.
//!
//! A CRID is written `crid://<authority>/<service>/<serial>` where the
//! serial is the issue date (`YYYYMMDD`) followed by a four digit,
//! zero-padded counter that restarts every day.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const SCHEME: &str = "crid://";
pub const MAX_DAILY_COUNTER: u32 = 9999;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CridError {
    #[error("crid must start with `crid://`: {0:?}")]
    Scheme(String),
    #[error("invalid crid authority {0:?}")]
    Authority(String),
    #[error("invalid crid service {0:?}")]
    Service(String),
    #[error("invalid crid serial {0:?}: expected YYYYMMDD followed by a 4-digit counter")]
    Serial(String),
    #[error("crid has unexpected trailing segments: {0:?}")]
    Trailing(String),
    #[error("crid counter exhausted for {0}: more than 9999 identifiers in one day")]
    CounterOverflow(NaiveDate),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Crid {
    authority: String,
    service: String,
    serial: String,
}

impl Crid {
    /// Builds the CRID issued as the `counter`-th identifier of `date`.
    pub fn generate(
        authority: &str,
        service: &str,
        date: NaiveDate,
        counter: u32,
    ) -> Result<Crid, CridError> {
        if !valid_authority(authority) {
            return Err(CridError::Authority(authority.to_string()));
        }
        if !valid_service(service) {
            return Err(CridError::Service(service.to_string()));
        }
        if counter == 0 || counter > MAX_DAILY_COUNTER {
            return Err(CridError::CounterOverflow(date));
        }
        Ok(Crid {
            authority: authority.to_string(),
            service: service.to_string(),
            serial: format!("{}{counter:04}", date.format("%Y%m%d")),
        })
    }

    pub fn authority(&self) -> &str {
        &self.authority
    }

    pub fn service(&self) -> &str {
        &self.service
    }

    pub fn serial(&self) -> &str {
        &self.serial
    }

    pub fn date(&self) -> NaiveDate {
        NaiveDate::parse_from_str(&self.serial[..8], "%Y%m%d").expect("validated serial")
    }

    pub fn counter(&self) -> u32 {
        self.serial[8..].parse().expect("validated serial")
    }

    /// File-system safe key, unique per CRID.
    pub fn storage_key(&self) -> String {
        format!("{}+{}+{}", self.authority, self.service, self.serial)
    }
}

fn valid_authority(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with(['.', '-'])
        && !s.ends_with(['.', '-'])
        && !s.contains("..")
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '-')
}

fn valid_service(s: &str) -> bool {
    !s.is_empty()
        && s != "."
        && s != ".."
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_' | '~'))
}

fn valid_serial(s: &str) -> bool {
    s.len() == 12
        && s.bytes().all(|b| b.is_ascii_digit())
        && NaiveDate::parse_from_str(&s[..8], "%Y%m%d").is_ok()
        && &s[8..] != "0000"
}

impl FromStr for Crid {
    type Err = CridError;

    fn from_str(text: &str) -> Result<Self, CridError> {
        let rest = text
            .strip_prefix(SCHEME)
            .ok_or_else(|| CridError::Scheme(text.to_string()))?;
        let mut parts = rest.splitn(3, '/');
        let authority = parts.next().unwrap_or_default();
        let service = parts.next().unwrap_or_default();
        let serial = parts.next().unwrap_or_default();
        if !valid_authority(authority) {
            return Err(CridError::Authority(authority.to_string()));
        }
        if !valid_service(service) {
            return Err(CridError::Service(service.to_string()));
        }
        if serial.contains('/') {
            return Err(CridError::Trailing(serial.to_string()));
        }
        if !valid_serial(serial) {
            return Err(CridError::Serial(serial.to_string()));
        }
        Ok(Crid {
            authority: authority.to_string(),
            service: service.to_string(),
            serial: serial.to_string(),
        })
    }
}

impl fmt::Display for Crid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{SCHEME}{}/{}/{}",
            self.authority, self.service, self.serial
        )
    }
}

impl Serialize for Crid {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Crid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-day counter feeding [`Crid::generate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyCounter {
    pub date: NaiveDate,
    pub last: u32,
}

impl DailyCounter {
    pub fn new(date: NaiveDate) -> Self {
        Self { date, last: 0 }
    }

    /// Next unused counter for `date`, restarting at 1 on a new day.
    pub fn next(&mut self, date: NaiveDate) -> Result<u32, CridError> {
        if date != self.date {
            self.date = date;
            self.last = 0;
        }
        if self.last >= MAX_DAILY_COUNTER {
            return Err(CridError::CounterOverflow(date));
        }
        self.last += 1;
        Ok(self.last)
    }

    /// Makes sure later values never reuse `counter` on `date`.
    pub fn observe(&mut self, date: NaiveDate, counter: u32) {
        if date > self.date {
            self.date = date;
            self.last = counter;
        } else if date == self.date {
            self.last = self.last.max(counter);
        }
    }
}
