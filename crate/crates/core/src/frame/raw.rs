//! `SLTF` raw-frame wire format used between external decoders and the
//! pipeline.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "SLTF" | u32 width | u32 height | u32 channels | u32 frame_count (0 = unknown)
//! frame 0 | frame 1 | ...        each width*height*channels bytes, row-major
//! ```

use std::io::{self, Read, Write};

use super::Frame;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SLTF";
pub const HEADER_LEN: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawHeader {
    pub width: u32,
    pub height: u32,
    pub channels: u32,
    /// `None` when the producer did not know the count up front.
    pub frame_count: Option<u32>,
}

impl RawHeader {
    pub fn frame_bytes(&self) -> usize {
        self.width as usize * self.height as usize * self.channels as usize
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        for v in [
            self.width,
            self.height,
            self.channels,
            self.frame_count.unwrap_or(0),
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut buf = [0u8; HEADER_LEN as usize];
        let got = read_full(r, &mut buf).map_err(|e| Error::UnreadableSource(e.to_string()))?;
        if got < buf.len() {
            return Err(Error::Geometry {
                offset: got as u64,
                message: format!("truncated header ({got} of {HEADER_LEN} bytes)"),
            });
        }
        if &buf[..4] != MAGIC {
            return Err(Error::UnreadableSource(format!(
                "bad magic {:?}, expected SLTF",
                &buf[..4]
            )));
        }
        let word = |i: usize| u32::from_le_bytes(buf[4 + i * 4..8 + i * 4].try_into().unwrap());
        let header = RawHeader {
            width: word(0),
            height: word(1),
            channels: word(2),
            frame_count: Some(word(3)).filter(|&n| n > 0),
        };
        if header.width == 0 || header.height == 0 {
            return Err(Error::Geometry {
                offset: 4,
                message: format!("degenerate geometry {}x{}", header.width, header.height),
            });
        }
        if header.channels != 1 && header.channels != 3 {
            return Err(Error::Geometry {
                offset: 12,
                message: format!("unsupported channel count {}", header.channels),
            });
        }
        Ok(header)
    }
}

/// Reads as many bytes as available up to `buf.len()`, retrying short reads.
fn read_full(r: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Sequential reader over an `SLTF` byte stream.
pub struct RawFrameReader<R> {
    inner: R,
    header: RawHeader,
    next_index: usize,
    offset: u64,
    done: bool,
}

impl<R: Read> RawFrameReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let header = RawHeader::read_from(&mut inner)?;
        Ok(Self {
            inner,
            header,
            next_index: 0,
            offset: HEADER_LEN,
            done: false,
        })
    }

    pub fn header(&self) -> &RawHeader {
        &self.header
    }

    pub fn read_frame(&mut self) -> Result<Option<Frame>> {
        if self.done {
            return Ok(None);
        }
        if let Some(n) = self.header.frame_count {
            if self.next_index >= n as usize {
                self.done = true;
                return Ok(None);
            }
        }
        let mut buf = vec![0u8; self.header.frame_bytes()];
        let got = read_full(&mut self.inner, &mut buf).map_err(|e| Error::Io {
            path: "<raw stream>".into(),
            source: e,
        })?;
        let frame_start = self.offset;
        self.offset += got as u64;
        if got == 0 {
            self.done = true;
            if let Some(n) = self.header.frame_count {
                return Err(Error::Geometry {
                    offset: frame_start,
                    message: format!(
                        "stream ended after {} of {n} declared frames",
                        self.next_index
                    ),
                });
            }
            return Ok(None);
        }
        if got < buf.len() {
            self.done = true;
            return Err(Error::Geometry {
                offset: self.offset,
                message: format!(
                    "short read in frame {}: {got} of {} bytes for {}x{}x{}",
                    self.next_index,
                    buf.len(),
                    self.header.width,
                    self.header.height,
                    self.header.channels
                ),
            });
        }
        let frame = Frame::new(
            self.next_index,
            self.header.width,
            self.header.height,
            self.header.channels as u8,
            buf,
        )?;
        self.next_index += 1;
        Ok(Some(frame))
    }

    pub fn into_inner(self) -> R {
        self.inner
    }
}

/// Writes frames in the `SLTF` format.
pub struct RawFrameWriter<W: Write> {
    inner: W,
    header: RawHeader,
    written: u32,
}

impl<W: Write> RawFrameWriter<W> {
    pub fn new(mut inner: W, header: RawHeader) -> io::Result<Self> {
        header.write_to(&mut inner)?;
        Ok(Self {
            inner,
            header,
            written: 0,
        })
    }

    pub fn write_frame(&mut self, frame: &Frame) -> Result<()> {
        if frame.width() != self.header.width
            || frame.height() != self.header.height
            || u32::from(frame.channels()) != self.header.channels
        {
            return Err(Error::FrameMismatch(format!(
                "frame {} is {}x{}x{}, stream declares {}x{}x{}",
                frame.index(),
                frame.width(),
                frame.height(),
                frame.channels(),
                self.header.width,
                self.header.height,
                self.header.channels
            )));
        }
        self.inner
            .write_all(frame.pixels())
            .map_err(|e| Error::io("<raw stream>", e))?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }

    pub fn frames_written(&self) -> u32 {
        self.written
    }
}

/// Header of a raw frame file plus the number of whole frames it holds.
pub fn probe_file(path: &std::path::Path) -> Result<(RawHeader, usize)> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let header = RawHeader::read_from(&mut file)?;
    let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let stored = (len.saturating_sub(HEADER_LEN) / header.frame_bytes() as u64) as usize;
    let n = header.frame_count.map_or(stored, |c| stored.min(c as usize));
    Ok((header, n))
}

/// Random access to frame `index` of a raw frame file.
pub fn read_frame_at(path: &std::path::Path, index: usize) -> Result<Frame> {
    use std::io::{Seek, SeekFrom};
    let (header, n) = probe_file(path)?;
    if index >= n {
        return Err(Error::InvalidInput(format!("{}: frame {index} out of range (0..{n})", path.display())));
    }
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let bytes = header.frame_bytes();
    file.seek(SeekFrom::Start(HEADER_LEN + (index * bytes) as u64))
        .map_err(|e| Error::io(path, e))?;
    let mut buf = vec![0u8; bytes];
    file.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
    Frame::new(index, header.width, header.height, header.channels as u8, buf)
}
