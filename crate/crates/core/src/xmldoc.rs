//! Flat XML documents for profiles and content records.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;

const DECLARATION: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

pub fn to_document<T: Serialize>(value: &T) -> Result<String> {
    let mut body = String::new();
    let mut ser = quick_xml::se::Serializer::new(&mut body);
    ser.indent(' ', 2);
    value.serialize(ser)?;
    Ok(format!("{DECLARATION}{body}\n"))
}

pub fn from_document<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(quick_xml::de::from_str(text)?)
}
