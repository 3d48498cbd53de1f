use sentinel_core::geometry::BoundingBox;
use sentinel_core::ingest::{
    load_detection_stream, open_frame_source, write_detection_stream, FrameRecord, IngestError, RawDetection, RgbImage,
};

fn gradient(w: u32, h: u32) -> RgbImage {
    let mut img = RgbImage::filled(w, h, [0, 0, 0]);
    for y in 0..h {
        for x in 0..w {
            img.put(x, y, [(x * 7) as u8, (y * 11) as u8, (x + y) as u8]);
        }
    }
    img
}

#[test]
fn mixed_formats_read_in_name_order() {
    let dir = tempfile::tempdir().unwrap();
    let a = gradient(9, 5);
    let b = gradient(4, 6);
    a.write(&dir.path().join("b.png")).unwrap();
    b.write(&dir.path().join("a.ppm")).unwrap();
    std::fs::write(dir.path().join("c.txt"), "notes").unwrap();
    std::fs::create_dir(dir.path().join("subdir")).unwrap();

    let source = open_frame_source(dir.path()).unwrap();
    assert_eq!(source.len(), 3);
    let frames: Vec<_> = source.collect();
    let first = frames[0].as_ref().unwrap();
    assert_eq!((first.index, first.timestamp_ms), (0, 0));
    assert_eq!(first.image, b);
    let second = frames[1].as_ref().unwrap();
    assert_eq!((second.index, second.timestamp_ms), (1, 40));
    assert_eq!(second.image, a);
    assert!(matches!(frames[2], Err(IngestError::UnsupportedFormat(_))));
}

#[test]
fn missing_directory_is_io_error() {
    assert!(matches!(open_frame_source("/nonexistent/frames"), Err(IngestError::Io { .. })));
}

#[test]
fn detection_stream_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let records = vec![
        FrameRecord { frame: 0, detections: vec![RawDetection::new(BoundingBox::new(1.5, 2.0, 30.25, 40.0), 0.875)] },
        FrameRecord::empty(3),
    ];
    let mut buf = Vec::new();
    write_detection_stream(&mut buf, &records).unwrap();
    std::fs::write(&path, buf).unwrap();
    let back: Vec<_> = load_detection_stream(&path).unwrap().collect::<Result<_, _>>().unwrap();
    assert_eq!(back, records);
    assert!(load_detection_stream(dir.path().join("absent.jsonl")).is_err());
}
