use super::Crid;

/// Name of a transcoded file: the original stem, the CRID serial and the
/// lower-cased alphanumeric video codec joined by underscores, keeping the
/// original extension (`movie.mp4` -> `movie_201206020001_h264.mp4`).
pub fn transcoded_filename(original_filename: &str, crid: &Crid, video_encoding: &str) -> String {
    let codec: String = video_encoding
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect();
    let (stem, extension) = match original_filename.rsplit_once('.') {
        Some((stem, ext)) if !stem.is_empty() && !ext.is_empty() => (stem, Some(ext)),
        _ => (original_filename, None),
    };
    let mut name = format!("{stem}_{}_{codec}", crid.serial());
    if let Some(ext) = extension {
        name.push('.');
        name.push_str(ext);
    }
    name
}
