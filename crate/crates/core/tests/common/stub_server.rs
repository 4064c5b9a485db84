//! Minimal HTTP/1.1 server imitating the Crossref works API.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Instant;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `/works/{doi}` answers with a work titled after the DOI suffix.
    Healthy,
    /// Every request gets a 503.
    Down,
}

pub struct StubServer {
    pub base: String,
    hits: Arc<Mutex<Vec<(Instant, String)>>>,
}

impl StubServer {
    pub fn start(mode: Mode) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let hits = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&hits);
        thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let log = Arc::clone(&log);
                thread::spawn(move || serve(stream, mode, &log));
            }
        });
        Self { base, hits }
    }

    /// Arrival times of all requests so far, sorted.
    pub fn arrivals(&self) -> Vec<Instant> {
        let mut times: Vec<Instant> = self.hits.lock().unwrap().iter().map(|(t, _)| *t).collect();
        times.sort();
        times
    }

    pub fn paths(&self) -> Vec<String> {
        self.hits.lock().unwrap().iter().map(|(_, p)| p.clone()).collect()
    }
}

/// Largest number of arrivals inside any half-open window of `width`.
pub fn max_in_window(times: &[Instant], width: std::time::Duration) -> usize {
    (0..times.len())
        .map(|i| {
            times[i..]
                .iter()
                .take_while(|t| t.duration_since(times[i]) < width)
                .count()
        })
        .max()
        .unwrap_or(0)
}

fn serve(stream: TcpStream, mode: Mode, log: &Mutex<Vec<(Instant, String)>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).is_err() {
        return;
    }
    let now = Instant::now();
    loop {
        let mut header = String::new();
        match reader.read_line(&mut header) {
            Ok(0) | Err(_) => break,
            Ok(_) if header == "\r\n" => break,
            Ok(_) => {}
        }
    }
    let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_owned();
    log.lock().unwrap().push((now, path.clone()));

    let (status, body) = match mode {
        Mode::Down => ("503 Service Unavailable", String::from("{}")),
        Mode::Healthy => match path.strip_prefix("/works/") {
            Some(doi) => ("200 OK", work(doi)),
            None => ("200 OK", String::from(r#"{"message":{"items":[]}}"#)),
        },
    };
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
}

fn work(doi: &str) -> String {
    let suffix = doi.rsplit('/').next().unwrap_or(doi);
    serde_json::json!({
        "message": {
            "DOI": doi,
            "title": [format!("Stub work {suffix}")],
            "author": [{"given": "Ada", "family": "Stub"}],
            "issued": {"date-parts": [[2020]]},
            "container-title": ["Journal of Stubs"]
        }
    })
    .to_string()
}

/// A plain-text bibliography of `n` references the healthy stub verifies.
pub fn stub_bibliography(n: usize) -> String {
    (0..n)
        .map(|i| {
            format!(
                "[{}] Ada Stub. Stub work w{i}. Journal of Stubs, 2020. doi:10.5555/w{i}\n",
                i + 1
            )
        })
        .collect()
}
