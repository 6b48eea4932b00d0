//! Rate-capped feed replay over TCP, and the sampling-proportion estimate
//! derived from limit notices.
//!
//! Wire format: each frame is a 4-byte big-endian length followed by that
//! many bytes of UTF-8. A payload starting with `P` carries a post record
//! line; one starting with `L` carries `<timestamp> <withheld>`. The server
//! closes the connection after the last frame.

use std::fs::OpenOptions;
use std::io::{self, BufWriter, ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::Path;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use crate::corpus::Post;
use crate::error::{Error, Result};
use crate::sift::match_keywords;

/// Frames larger than this are rejected as malformed.
pub const MAX_FRAME: u32 = 16 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitNotice {
    pub timestamp: u64,
    /// Posts withheld in this notice's one-second window.
    pub withheld: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamStats {
    pub collected: u64,
    pub limit_sum: u64,
    pub notices: u64,
    /// Absent when nothing was collected or withheld.
    pub estimated_rho: Option<f64>,
}

impl StreamStats {
    pub fn new(collected: u64, limits: &[LimitNotice]) -> Self {
        StreamStats {
            collected,
            limit_sum: limits.iter().map(|l| l.withheld).sum(),
            notices: limits.len() as u64,
            estimated_rho: estimate_sampling(collected, limits).ok(),
        }
    }
}

/// `collected / (collected + Σ withheld)`.
pub fn estimate_sampling(collected: u64, limits: &[LimitNotice]) -> Result<f64> {
    let withheld: u64 = limits.iter().map(|l| l.withheld).sum();
    let total = collected + withheld;
    if total == 0 {
        return Err(Error::Undefined);
    }
    Ok(collected as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Post(Post),
    Limit(LimitNotice),
}

impl Frame {
    pub fn payload(&self) -> String {
        match self {
            Frame::Post(p) => format!("P{}", p.to_record_line()),
            Frame::Limit(l) => format!("L{} {}", l.timestamp, l.withheld),
        }
    }

    pub fn parse(payload: &str) -> Result<Frame> {
        let proto = |msg: String| Error::ProtocolError(msg);
        match payload.split_at_checked(1) {
            Some(("P", record)) => Post::from_record_line(record, 0)
                .map(Frame::Post)
                .map_err(|e| proto(format!("bad post frame: {e}"))),
            Some(("L", rest)) => {
                let (ts, n) = rest
                    .split_once(' ')
                    .ok_or_else(|| proto(format!("bad limit frame {payload:?}")))?;
                let parse = |s: &str| s.parse::<u64>().map_err(|_| proto(format!("bad limit frame {payload:?}")));
                Ok(Frame::Limit(LimitNotice {
                    timestamp: parse(ts)?,
                    withheld: parse(n)?,
                }))
            }
            _ => Err(proto(format!("unknown frame {payload:?}"))),
        }
    }
}

pub fn write_frame<W: Write>(w: &mut W, frame: &Frame) -> io::Result<()> {
    let payload = frame.payload();
    w.write_all(&(payload.len() as u32).to_be_bytes())?;
    w.write_all(payload.as_bytes())
}

/// Next frame, or `None` on a clean end of stream at a frame boundary.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Frame>> {
    let mut len = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(Error::ProtocolError("stream ended inside a frame header".into())),
            Ok(n) => got += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(Error::Stream(e)),
        }
    }
    let len = u32::from_be_bytes(len);
    if len > MAX_FRAME {
        return Err(Error::ProtocolError(format!("frame of {len} bytes exceeds limit")));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::ProtocolError("stream ended inside a frame".into()),
        _ => Error::Stream(e),
    })?;
    let text = String::from_utf8(buf).map_err(|_| Error::ProtocolError("frame is not UTF-8".into()))?;
    Frame::parse(&text).map(Some)
}

/// Server-side counters for one replay.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReplayTally {
    pub matching: u64,
    pub delivered: u64,
    pub withheld: u64,
    pub notices: u64,
}

/// The frames a client receives, in order, plus the server's own tally.
/// Posts matching `query` (all posts when empty) are replayed in timestamp
/// order; each one-second window delivers its first `rate_cap` posts and, if
/// any were held back, ends with a single notice.
pub fn replay_schedule<S: AsRef<str>>(posts: &[Post], rate_cap: u64, query: &[S]) -> (Vec<Frame>, ReplayTally) {
    assert!(rate_cap >= 1, "rate cap must be at least 1");
    let mut matching: Vec<&Post> = posts
        .iter()
        .filter(|p| query.is_empty() || match_keywords(p, query))
        .collect();
    matching.sort_by_key(|p| p.timestamp);

    let mut frames = Vec::with_capacity(matching.len());
    let mut tally = ReplayTally {
        matching: matching.len() as u64,
        ..Default::default()
    };
    for window in matching.chunk_by(|a, b| a.timestamp == b.timestamp) {
        let n = window.len() as u64;
        let sent = n.min(rate_cap);
        frames.extend(window[..sent as usize].iter().map(|p| Frame::Post((*p).clone())));
        tally.delivered += sent;
        if n > sent {
            frames.push(Frame::Limit(LimitNotice {
                timestamp: window[0].timestamp,
                withheld: n - sent,
            }));
            tally.withheld += n - sent;
            tally.notices += 1;
        }
    }
    (frames, tally)
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub rate_cap: u64,
    pub keyword_query: Vec<String>,
    /// Sleep one real second per elapsed virtual second.
    pub pace: bool,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            rate_cap: 50,
            keyword_query: Vec::new(),
            pace: false,
        }
    }
}

pub struct FeedServer {
    listener: TcpListener,
    frames: Arc<Vec<Frame>>,
    tally: ReplayTally,
    pace: bool,
}

impl FeedServer {
    pub fn bind(addr: impl ToSocketAddrs + std::fmt::Debug, posts: &[Post], config: &ServerConfig) -> Result<Self> {
        if config.rate_cap < 1 {
            return Err(Error::InvalidHyper("rate cap must be at least 1".into()));
        }
        let listener = TcpListener::bind(&addr).map_err(|source| Error::BindFailure {
            addr: format!("{addr:?}"),
            source,
        })?;
        let (frames, tally) = replay_schedule(posts, config.rate_cap, &config.keyword_query);
        Ok(FeedServer {
            listener,
            frames: Arc::new(frames),
            tally,
            pace: config.pace,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// What every complete session delivers.
    pub fn tally(&self) -> ReplayTally {
        self.tally
    }

    /// Accepts clients, each replayed on its own thread. Returns after
    /// `max_clients` sessions have finished, or never when `None`.
    pub fn serve(&self, max_clients: Option<usize>) -> Result<()> {
        let mut handles = Vec::new();
        for (n, conn) in self.listener.incoming().enumerate() {
            match conn {
                Ok(stream) => {
                    let frames = Arc::clone(&self.frames);
                    let pace = self.pace;
                    handles.push(thread::spawn(move || {
                        let peer = stream.peer_addr().ok();
                        if let Err(e) = replay_to(stream, &frames, pace) {
                            log::warn!("client {peer:?} disconnected: {e}");
                        }
                    }));
                }
                Err(e) => log::warn!("accept failed: {e}"),
            }
            if max_clients.is_some_and(|m| n + 1 >= m) {
                break;
            }
        }
        for h in handles {
            let _ = h.join();
        }
        Ok(())
    }
}

fn replay_to(stream: TcpStream, frames: &[Frame], pace: bool) -> io::Result<()> {
    let mut out = BufWriter::new(stream);
    let mut clock: Option<u64> = None;
    for frame in frames {
        if let (true, Frame::Post(p)) = (pace, frame) {
            if let Some(prev) = clock.filter(|&c| p.timestamp > c) {
                out.flush()?;
                thread::sleep(Duration::from_secs(p.timestamp - prev));
            }
            clock = Some(p.timestamp);
        }
        write_frame(&mut out, frame)?;
    }
    out.flush()
}

/// Connects, appends every delivered post to `output` in record-line form,
/// and collects limit notices until the server closes the stream.
pub fn consume(addr: impl ToSocketAddrs + std::fmt::Debug, output: impl AsRef<Path>) -> Result<(StreamStats, Vec<LimitNotice>)> {
    let stream = TcpStream::connect(&addr).map_err(|source| Error::ConnectFailure {
        addr: format!("{addr:?}"),
        source,
    })?;
    let path = output.as_ref();
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut reader = io::BufReader::new(stream);
    let mut collected = 0u64;
    let mut limits = Vec::new();
    let mut last_ts = 0u64;
    while let Some(frame) = read_frame(&mut reader)? {
        match frame {
            Frame::Post(p) => {
                if p.timestamp < last_ts {
                    log::warn!("post {} arrived out of timestamp order", p.id);
                }
                last_ts = p.timestamp;
                writeln!(out, "{}", p.to_record_line()).map_err(|e| Error::io(path, e))?;
                collected += 1;
            }
            Frame::Limit(l) => limits.push(l),
        }
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok((StreamStats::new(collected, &limits), limits))
}
