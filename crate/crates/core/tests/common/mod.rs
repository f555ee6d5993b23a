//! Loopback chat-completion stub for interpret tests.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

#[derive(Debug, Clone)]
pub enum Reply {
    /// 200 with this completion text.
    Text(String),
    /// Bare status code with an empty JSON body.
    Status(u16),
    /// Read the request, then say nothing for this long.
    Hang(Duration),
}

#[derive(Debug, Clone)]
pub struct Captured {
    pub headers: Vec<(String, String)>,
    pub body: Value,
}

pub struct Stub {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Captured>>>,
}

impl Stub {
    pub fn count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }

    pub fn bodies(&self) -> Vec<Value> {
        self.requests.lock().unwrap().iter().map(|c| c.body.clone()).collect()
    }
}

/// Serves `script` in arrival order; the last reply repeats once the script runs out.
pub fn stub(script: Vec<Reply>) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let seen = requests.clone();
    std::thread::spawn(move || {
        for conn in listener.incoming() {
            let Ok(conn) = conn else { continue };
            let seen = seen.clone();
            let script = script.clone();
            std::thread::spawn(move || handle(conn, &script, &seen));
        }
    });
    Stub { url, requests }
}

fn handle(mut conn: TcpStream, script: &[Reply], seen: &Mutex<Vec<Captured>>) {
    let mut reader = BufReader::new(conn.try_clone().unwrap());
    let mut headers = Vec::new();
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
            if k == "content-length" {
                len = v.parse().unwrap_or(0);
            }
            headers.push((k, v));
        }
    }
    let mut body = vec![0u8; len];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let body: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    let reply = {
        let mut s = seen.lock().unwrap();
        s.push(Captured { headers, body });
        script[(s.len() - 1).min(script.len() - 1)].clone()
    };
    let (status, payload) = match reply {
        Reply::Text(t) => (200, json!({"choices": [{"message": {"role": "assistant", "content": t}}]})),
        Reply::Status(code) => (code, json!({})),
        Reply::Hang(d) => {
            std::thread::sleep(d);
            return;
        }
    };
    let text = payload.to_string();
    let _ = write!(
        conn,
        "HTTP/1.1 {status} Stub\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
        text.len()
    );
    let _ = conn.flush();
}
