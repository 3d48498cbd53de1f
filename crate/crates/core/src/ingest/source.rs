use std::path::{Path, PathBuf};

use super::{Frame, IngestError, RgbImage};

/// Timestamp spacing assigned to image sequences, which carry no clock (25 fps).
pub const DEFAULT_FRAME_INTERVAL_MS: u64 = 40;

/// Frames decoded lazily from a directory, in lexicographic filename order.
///
/// Each file consumes one index whether or not it decodes, so indices stay
/// aligned with detection streams recorded against the same directory.
#[derive(Debug)]
pub struct FrameSource {
    files: Vec<PathBuf>,
    next: usize,
    interval_ms: u64,
}

pub fn open_frame_source(dir: impl AsRef<Path>) -> Result<FrameSource, IngestError> {
    let dir = dir.as_ref();
    let io_err = |source| IngestError::Io { path: dir.to_path_buf(), source };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err)? {
        let entry = entry.map_err(io_err)?;
        if entry.file_type().map_err(io_err)?.is_file() {
            files.push(entry.path());
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(FrameSource { files, next: 0, interval_ms: DEFAULT_FRAME_INTERVAL_MS })
}

impl FrameSource {
    pub fn with_frame_interval_ms(mut self, interval_ms: u64) -> Self {
        self.interval_ms = interval_ms;
        self
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.files
    }
}

impl Iterator for FrameSource {
    type Item = Result<Frame, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        let path = self.files.get(self.next)?;
        let index = self.next as u64;
        self.next += 1;
        Some(RgbImage::read(path).map(|image| Frame::new(index, index * self.interval_ms, image)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.files.len() - self.next;
        (left, Some(left))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_in_lexicographic_order() {
        let dir = tempfile::tempdir().unwrap();
        RgbImage::filled(3, 2, [2, 2, 2]).write(&dir.path().join("b.ppm")).unwrap();
        RgbImage::filled(4, 2, [1, 1, 1]).write(&dir.path().join("a.ppm")).unwrap();
        let frames: Vec<Frame> = open_frame_source(dir.path()).unwrap().map(Result::unwrap).collect();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].index, 0);
        assert_eq!(frames[0].width(), 4);
        assert_eq!(frames[1].index, 1);
        assert_eq!(frames[1].timestamp_ms, DEFAULT_FRAME_INTERVAL_MS);
    }

    #[test]
    fn empty_directory_is_empty_stream() {
        let dir = tempfile::tempdir().unwrap();
        let mut src = open_frame_source(dir.path()).unwrap();
        assert!(src.is_empty());
        assert!(src.next().is_none());
    }

    #[test]
    fn truncated_ppm_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = RgbImage::filled(4, 4, [0, 0, 0]).encode_ppm();
        bytes.truncate(20);
        std::fs::write(dir.path().join("broken.ppm"), bytes).unwrap();
        RgbImage::filled(4, 4, [0, 0, 0]).write(&dir.path().join("ok.png")).unwrap();
        let items: Vec<_> = open_frame_source(dir.path()).unwrap().collect();
        let err = items[0].as_ref().unwrap_err();
        assert!(matches!(err, IngestError::Decode { .. }));
        assert!(err.to_string().contains("broken.ppm"));
        // the bad file still consumes index 0
        assert_eq!(items[1].as_ref().unwrap().index, 1);
    }

    #[test]
    fn unsupported_extension_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("notes.txt"), b"hi").unwrap();
        let items: Vec<_> = open_frame_source(dir.path()).unwrap().collect();
        assert!(matches!(items[0], Err(IngestError::UnsupportedFormat(_))));
    }

    #[test]
    fn missing_directory_is_io_error() {
        assert!(matches!(open_frame_source("/nonexistent/frames"), Err(IngestError::Io { .. })));
    }
}
