//! TCP server speaking newline-delimited JSON, one client at a time.
//!
//! Each request line `{"pink_action": a, "green_action": b}` gets exactly
//! one reply line. `pink_action = -1` resets, `-2` resets with the
//! starting tiles exchanged. Observations are sent raw; clients normalise.

mod wire;

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use wire::{format_error, format_request, format_reward, format_step_reply, parse_request, Request, RESET, SWAP_RESET};

use crate::env::{determine_winner, reset, step, EnvConfig, EnvState, GameAction, Outcome};

/// Longest accepted request line, excluding the newline.
pub const MAX_LINE_BYTES: usize = 1 << 20;

/// Per-episode record written to the optional episode log. Returns are the
/// sums of the rewards exactly as they appeared on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLogEntry {
    pub episode: u64,
    pub swap_starts: bool,
    pub steps: u32,
    pub return_pink: f64,
    pub return_green: f64,
    pub winner: Outcome,
}

struct Episode {
    state: EnvState,
    swap_starts: bool,
    returns: [f64; 2],
}

/// Protocol state for one connection, independent of any socket.
pub struct Session {
    env: EnvConfig,
    episode: Option<Episode>,
    finished: Vec<EpisodeLogEntry>,
    episodes_started: u64,
}

impl Session {
    pub fn new(env: EnvConfig) -> Self {
        Session {
            env,
            episode: None,
            finished: Vec::new(),
            episodes_started: 0,
        }
    }

    /// Handles one request line (no newline) and returns the reply line
    /// (no newline).
    pub fn handle_line(&mut self, line: &str) -> String {
        match parse_request(line).and_then(|req| self.handle(req)) {
            Ok(reply) => reply,
            Err(msg) => format_error(&msg),
        }
    }

    fn handle(&mut self, req: Request) -> Result<String, String> {
        match req {
            Request::Reset { swap_starts } => {
                let (state, obs_pink, obs_green) = reset(&self.env, swap_starts);
                self.episodes_started += 1;
                self.episode = Some(Episode {
                    state,
                    swap_starts,
                    returns: [0.0; 2],
                });
                Ok(format_step_reply(&obs_pink, &obs_green, "0.0", "0.0", false))
            }
            Request::Step { pink, green } => {
                let ep = self.episode.as_mut().ok_or("no episode in progress; send a reset (pink_action -1)")?;
                if ep.state.done {
                    return Err("episode is over; send a reset (pink_action -1 or -2)".into());
                }
                let action = |a: i64| {
                    usize::try_from(a)
                        .ok()
                        .and_then(|i| GameAction::from_index(i).ok())
                        .ok_or_else(|| format!("action {a} is not in 0..=4"))
                };
                let (a_pink, a_green) = (action(pink)?, action(green)?);
                let r = step(&mut ep.state, &self.env, a_pink, a_green).map_err(|e| e.to_string())?;
                let rp = format_reward(r.reward_pink);
                let rg = format_reward(r.reward_green);
                ep.returns[0] += rp.parse::<f64>().expect("formatted reward parses");
                ep.returns[1] += rg.parse::<f64>().expect("formatted reward parses");
                if r.done {
                    self.finished.push(EpisodeLogEntry {
                        episode: self.episodes_started,
                        swap_starts: ep.swap_starts,
                        steps: ep.state.step,
                        return_pink: ep.returns[0],
                        return_green: ep.returns[1],
                        winner: determine_winner(&ep.state).map_err(|e| e.to_string())?,
                    });
                }
                Ok(format_step_reply(&r.obs_pink, &r.obs_green, &rp, &rg, r.done))
            }
        }
    }

    /// Episodes completed since the last call.
    pub fn drain_finished(&mut self) -> Vec<EpisodeLogEntry> {
        std::mem::take(&mut self.finished)
    }
}

#[derive(Debug, Clone, Default)]
pub struct BridgeConfig {
    pub env: EnvConfig,
    /// Append one JSON line per completed episode here.
    pub episode_log: Option<PathBuf>,
}

pub struct Server {
    listener: TcpListener,
    config: BridgeConfig,
}

impl Server {
    pub fn bind<A: ToSocketAddrs>(addr: A, config: BridgeConfig) -> io::Result<Self> {
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            config,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves clients one after another, forever.
    pub fn run(&self) -> io::Result<()> {
        loop {
            self.serve_one()?;
        }
    }

    /// Accepts a single client and serves it until it disconnects.
    pub fn serve_one(&self) -> io::Result<()> {
        let (stream, peer) = self.listener.accept()?;
        log::info!("client connected from {peer}");
        let result = self.session(stream);
        log::info!("client {peer} disconnected");
        match result {
            Err(e) if is_disconnect(&e) => Ok(()),
            other => other,
        }
    }

    fn session(&self, stream: TcpStream) -> io::Result<()> {
        stream.set_nodelay(true)?;
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut writer = BufWriter::new(stream);
        let mut log = match &self.config.episode_log {
            Some(p) => Some(File::options().create(true).append(true).open(p)?),
            None => None,
        };
        let mut session = Session::new(self.config.env.clone());
        let mut buf = Vec::new();
        loop {
            let reply = match read_bounded_line(&mut reader, &mut buf)? {
                LineRead::Eof => return Ok(()),
                LineRead::TooLong => format_error(&format!("line exceeds {MAX_LINE_BYTES} bytes")),
                LineRead::Line => match std::str::from_utf8(&buf) {
                    Ok(text) => session.handle_line(text.strip_suffix('\r').unwrap_or(text)),
                    Err(_) => format_error("line is not valid UTF-8"),
                },
            };
            // Log before replying so a client that has seen `done` can
            // already read its episode's entry.
            let finished = session.drain_finished();
            if let Some(f) = &mut log {
                for entry in finished {
                    let mut l = serde_json::to_vec(&entry).map_err(io::Error::other)?;
                    l.push(b'\n');
                    f.write_all(&l)?;
                }
            }
            let mut line = reply.into_bytes();
            line.push(b'\n');
            writer.write_all(&line)?;
            writer.flush()?;
        }
    }
}

/// Minimal synchronous client for the same protocol.
pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

/// A parsed step reply.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct StepReply {
    pub pink_obs: Vec<f64>,
    pub green_obs: Vec<f64>,
    pub pink_reward: f64,
    pub green_reward: f64,
    pub done: bool,
}

impl Client {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Client {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
        })
    }

    /// Sends one raw line (a newline is appended) and returns the reply
    /// line without its newline.
    pub fn exchange(&mut self, line: &str) -> io::Result<String> {
        let mut msg = Vec::with_capacity(line.len() + 1);
        msg.extend_from_slice(line.as_bytes());
        msg.push(b'\n');
        self.writer.write_all(&msg)?;
        let mut reply = String::new();
        if self.reader.read_line(&mut reply)? == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "server closed the connection"));
        }
        if reply.ends_with('\n') {
            reply.pop();
        }
        Ok(reply)
    }

    pub fn reset(&mut self, swap_starts: bool) -> io::Result<StepReply> {
        self.request(if swap_starts { SWAP_RESET } else { RESET }, 0)
    }

    pub fn step(&mut self, pink_action: usize, green_action: usize) -> io::Result<StepReply> {
        self.request(pink_action as i64, green_action as i64)
    }

    fn request(&mut self, pink: i64, green: i64) -> io::Result<StepReply> {
        let reply = self.exchange(&format_request(pink, green))?;
        serde_json::from_str(&reply).map_err(|_| io::Error::new(io::ErrorKind::InvalidData, reply))
    }
}

enum LineRead {
    Line,
    TooLong,
    Eof,
}

/// Reads up to the next newline into `buf` (newline stripped). A line
/// longer than [`MAX_LINE_BYTES`] is consumed and reported as too long. A
/// final line without a newline still counts.
fn read_bounded_line<R: BufRead>(reader: &mut R, buf: &mut Vec<u8>) -> io::Result<LineRead> {
    buf.clear();
    let n = reader.by_ref().take(MAX_LINE_BYTES as u64 + 1).read_until(b'\n', buf)?;
    if n == 0 {
        return Ok(LineRead::Eof);
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
        return Ok(LineRead::Line);
    }
    if buf.len() <= MAX_LINE_BYTES {
        return Ok(LineRead::Line);
    }
    // Discard the rest of the oversized line.
    loop {
        let available = reader.fill_buf()?;
        if available.is_empty() {
            break;
        }
        if let Some(i) = available.iter().position(|b| *b == b'\n') {
            reader.consume(i + 1);
            break;
        }
        let len = available.len();
        reader.consume(len);
    }
    buf.clear();
    Ok(LineRead::TooLong)
}

fn is_disconnect(e: &io::Error) -> bool {
    matches!(
        e.kind(),
        io::ErrorKind::BrokenPipe | io::ErrorKind::ConnectionReset | io::ErrorKind::ConnectionAborted | io::ErrorKind::UnexpectedEof
    )
}
