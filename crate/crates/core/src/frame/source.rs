use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdout, Command, Stdio};

use super::raw::RawFrameReader;
use super::{preprocess, Frame, FrameSpec};
use crate::error::{Error, Result};

/// Where frames come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VideoSource {
    /// Directory of `%08d.png` / `%08d.jpg` files.
    ImageDir(PathBuf),
    /// File in the `SLTF` raw-frame format.
    Raw(PathBuf),
    /// Container file decoded by an external process that writes `SLTF` to stdout.
    Container { path: PathBuf, decoder: PathBuf },
}

impl VideoSource {
    /// Pick a backend from the path: directories are image sequences,
    /// `.sltf`/`.raw` files are raw streams, anything else goes to `decoder`.
    pub fn from_path(path: impl Into<PathBuf>, decoder: Option<PathBuf>) -> Result<Self> {
        let path = path.into();
        if path.is_dir() {
            return Ok(VideoSource::ImageDir(path));
        }
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("sltf") | Some("raw") => Ok(VideoSource::Raw(path)),
            _ => match decoder {
                Some(decoder) => Ok(VideoSource::Container { path, decoder }),
                None => Err(Error::UnreadableSource(format!(
                    "{}: not a frame directory or SLTF file and no decoder configured",
                    path.display()
                ))),
            },
        }
    }

    pub fn path(&self) -> &Path {
        match self {
            VideoSource::ImageDir(p) | VideoSource::Raw(p) => p,
            VideoSource::Container { path, .. } => path,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamInfo {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub fps: Option<f64>,
    pub frame_count: Option<usize>,
}

/// Random-access view of an image-sequence directory.
#[derive(Debug, Clone)]
pub struct ImageDir {
    root: PathBuf,
    files: Vec<PathBuf>,
    width: u32,
    height: u32,
}

impl ImageDir {
    pub fn open(root: &Path) -> Result<Self> {
        let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
        let mut indexed = BTreeMap::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(root, e))?;
            let path = entry.path();
            let Some(index) = frame_file_index(&path) else {
                continue;
            };
            if let Some(prev) = indexed.insert(index, path.clone()) {
                return Err(Error::UnreadableSource(format!(
                    "frame {index} present twice: {} and {}",
                    prev.display(),
                    path.display()
                )));
            }
        }
        if indexed.is_empty() {
            return Err(Error::UnreadableSource(format!(
                "{}: no %08d.png/.jpg frames",
                root.display()
            )));
        }
        let mut files = Vec::with_capacity(indexed.len());
        for (expected, (index, path)) in indexed.into_iter().enumerate() {
            if index != expected {
                return Err(Error::UnreadableSource(format!(
                    "{}: frame {expected:08} missing",
                    root.display()
                )));
            }
            files.push(path);
        }
        let (width, height) =
            image::image_dimensions(&files[0]).map_err(|source| Error::Image {
                path: files[0].clone(),
                source,
            })?;
        Ok(Self {
            root: root.to_path_buf(),
            files,
            width,
            height,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn frame_path(&self, index: usize) -> Option<&Path> {
        self.files.get(index).map(PathBuf::as_path)
    }

    pub fn read_frame(&self, index: usize) -> Result<Frame> {
        let path = self.files.get(index).ok_or_else(|| {
            Error::InvalidInput(format!("frame {index} beyond {} frames", self.files.len()))
        })?;
        let img = image::open(path)
            .map_err(|source| Error::Image {
                path: path.clone(),
                source,
            })?
            .to_rgb8();
        if img.dimensions() != (self.width, self.height) {
            return Err(Error::Geometry {
                offset: 0,
                message: format!(
                    "{} is {}x{}, sequence is {}x{}",
                    path.display(),
                    img.width(),
                    img.height(),
                    self.width,
                    self.height
                ),
            });
        }
        Ok(Frame::from_rgb_image(index, img))
    }
}

/// `00000042.png` → 42. Anything else is ignored.
fn frame_file_index(path: &Path) -> Option<usize> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    if !matches!(ext.as_str(), "png" | "jpg" | "jpeg") {
        return None;
    }
    let stem = path.file_stem()?.to_str()?;
    if stem.len() != 8 || !stem.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    stem.parse().ok()
}

enum Backend {
    Dir { dir: ImageDir, next: usize },
    Raw(RawFrameReader<Box<dyn Read + Send>>),
    Process {
        reader: RawFrameReader<BufReader<ChildStdout>>,
        child: Child,
        decoder: PathBuf,
    },
}

/// Sequential single-consumer frame stream. Yields decoded frames in index
/// order, each exactly once.
pub struct FrameStream {
    backend: Backend,
    info: StreamInfo,
    finished: bool,
}

impl FrameStream {
    pub fn open(source: &VideoSource) -> Result<Self> {
        match source {
            VideoSource::ImageDir(root) => {
                let dir = ImageDir::open(root)?;
                let (width, height) = dir.dimensions();
                let info = StreamInfo {
                    width,
                    height,
                    channels: 3,
                    fps: None,
                    frame_count: Some(dir.len()),
                };
                Ok(Self {
                    backend: Backend::Dir { dir, next: 0 },
                    info,
                    finished: false,
                })
            }
            VideoSource::Raw(path) => {
                let file = File::open(path).map_err(|e| Error::io(path, e))?;
                Self::from_reader(Box::new(BufReader::new(file)))
            }
            VideoSource::Container { path, decoder } => {
                let mut child = Command::new(decoder)
                    .arg(path)
                    .stdin(Stdio::null())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(|e| {
                        Error::UnreadableSource(format!(
                            "cannot start decoder {}: {e}",
                            decoder.display()
                        ))
                    })?;
                let stdout = child.stdout.take().expect("stdout piped");
                let reader = match RawFrameReader::new(BufReader::new(stdout)) {
                    Ok(r) => r,
                    Err(e) => {
                        let _ = child.kill();
                        let _ = child.wait();
                        return Err(e);
                    }
                };
                let info = info_from_header(reader.header());
                Ok(Self {
                    backend: Backend::Process {
                        reader,
                        child,
                        decoder: decoder.clone(),
                    },
                    info,
                    finished: false,
                })
            }
        }
    }

    /// Stream from any byte source carrying the `SLTF` format (pipes, sockets).
    pub fn from_reader(reader: Box<dyn Read + Send>) -> Result<Self> {
        let reader = RawFrameReader::new(reader)?;
        let info = info_from_header(reader.header());
        Ok(Self {
            backend: Backend::Raw(reader),
            info,
            finished: false,
        })
    }

    pub fn info(&self) -> StreamInfo {
        self.info
    }

    pub fn with_fps(mut self, fps: Option<f64>) -> Self {
        if fps.is_some() {
            self.info.fps = fps;
        }
        self
    }

    fn next_frame(&mut self) -> Result<Option<Frame>> {
        match &mut self.backend {
            Backend::Dir { dir, next } => {
                if *next >= dir.len() {
                    return Ok(None);
                }
                let frame = dir.read_frame(*next)?;
                *next += 1;
                Ok(Some(frame))
            }
            Backend::Raw(reader) => reader.read_frame(),
            Backend::Process {
                reader,
                child,
                decoder,
            } => match reader.read_frame()? {
                Some(frame) => Ok(Some(frame)),
                None => {
                    let status = child.wait().map_err(|e| Error::io(decoder.clone(), e))?;
                    if status.success() {
                        Ok(None)
                    } else {
                        Err(Error::UnreadableSource(format!(
                            "decoder {} exited with {status}",
                            decoder.display()
                        )))
                    }
                }
            },
        }
    }

    /// Apply `spec` to every frame as it is read.
    pub fn preprocessed(self, spec: FrameSpec) -> PreprocessedStream {
        PreprocessedStream { inner: self, spec }
    }
}

fn info_from_header(h: &super::raw::RawHeader) -> StreamInfo {
    StreamInfo {
        width: h.width,
        height: h.height,
        channels: h.channels as u8,
        fps: None,
        frame_count: h.frame_count.map(|n| n as usize),
    }
}

impl Iterator for FrameStream {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        match self.next_frame() {
            Ok(Some(frame)) => Some(Ok(frame)),
            Ok(None) => {
                self.finished = true;
                None
            }
            Err(e) => {
                self.finished = true;
                Some(Err(e))
            }
        }
    }
}

impl Drop for FrameStream {
    fn drop(&mut self) {
        if let Backend::Process { child, .. } = &mut self.backend {
            if !self.finished {
                let _ = child.kill();
            }
            let _ = child.wait();
        }
    }
}

pub struct PreprocessedStream {
    inner: FrameStream,
    spec: FrameSpec,
}

impl PreprocessedStream {
    pub fn info(&self) -> StreamInfo {
        self.inner.info()
    }

    pub fn spec(&self) -> &FrameSpec {
        &self.spec
    }
}

impl Iterator for PreprocessedStream {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        let frame = self.inner.next()?;
        Some(frame.and_then(|f| preprocess(&f, &self.spec)))
    }
}

/// Open `source` and preprocess each frame with `spec`.
pub fn open_stream(source: &VideoSource, spec: &FrameSpec) -> Result<PreprocessedStream> {
    spec.validate()?;
    Ok(FrameStream::open(source)?.preprocessed(*spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_file_names() {
        assert_eq!(frame_file_index(Path::new("a/00000042.png")), Some(42));
        assert_eq!(frame_file_index(Path::new("00000001.JPG")), Some(1));
        assert_eq!(frame_file_index(Path::new("0000042.png")), None);
        assert_eq!(frame_file_index(Path::new("00000042.txt")), None);
        assert_eq!(frame_file_index(Path::new("sidecar.json")), None);
    }

    #[test]
    fn directory_streams_in_index_order() {
        let tmp = tempfile::tempdir().unwrap();
        // Written out of order on purpose.
        for i in (0..100usize).rev() {
            let f = Frame::filled(i, 8, 6, &[i as u8, 0, 255 - i as u8]).unwrap();
            f.save_png(&tmp.path().join(format!("{i:08}.png"))).unwrap();
        }
        std::fs::write(tmp.path().join("notes.txt"), "ignored").unwrap();
        let stream = FrameStream::open(&VideoSource::ImageDir(tmp.path().into())).unwrap();
        assert_eq!(stream.info().frame_count, Some(100));
        let frames: Vec<Frame> = stream.collect::<Result<_>>().unwrap();
        assert_eq!(frames.len(), 100);
        for (i, f) in frames.iter().enumerate() {
            assert_eq!(f.index(), i);
            assert_eq!(f.pixel(0, 0), &[i as u8, 0, 255 - i as u8]);
        }
    }

    #[test]
    fn directory_gap_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        for i in [0usize, 1, 3] {
            Frame::filled(i, 4, 4, &[0, 0, 0])
                .unwrap()
                .save_png(&tmp.path().join(format!("{i:08}.png")))
                .unwrap();
        }
        let err = ImageDir::open(tmp.path()).unwrap_err();
        assert!(err.to_string().contains("00000002"), "{err}");
    }

    #[test]
    fn missing_directory_is_unreadable() {
        assert!(FrameStream::open(&VideoSource::ImageDir("/nonexistent/frames".into())).is_err());
    }

    #[test]
    fn source_kind_from_path() {
        let tmp = tempfile::tempdir().unwrap();
        assert_eq!(
            VideoSource::from_path(tmp.path(), None).unwrap(),
            VideoSource::ImageDir(tmp.path().into())
        );
        assert!(matches!(
            VideoSource::from_path("x.sltf", None).unwrap(),
            VideoSource::Raw(_)
        ));
        assert!(VideoSource::from_path("lecture.mp4", None).is_err());
        assert!(matches!(
            VideoSource::from_path("lecture.mp4", Some("/usr/bin/dec".into())).unwrap(),
            VideoSource::Container { .. }
        ));
    }
}
