use std::io::{BufRead, BufReader, Cursor, Write};
use std::net::{TcpListener, TcpStream};

use fohh_core::session::SessionConfig;

const CUBE: &[&str] = &[
    r#"{"op":"load","program":"cube(X,Y) :- Y is X*X*X."}"#,
    r#"{"op":"query","goal":"forall X (exists Y (nat(X) => cube(X,Y)))"}"#,
    r#"{"op":"read_reply","value":"5"}"#,
];

fn event_names(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["ev"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn serve_flag_speaks_the_protocol_on_stdio() {
    let mut input = Cursor::new(CUBE.join("\n") + "\n");
    let mut out = Vec::new();
    assert_eq!(fohh_cli::main_with(["fohh", "--serve"], &mut input, &mut out), 0);
    let text = String::from_utf8(out).unwrap();
    assert_eq!(event_names(&text), ["loaded", "proved", "read_request", "witness", "completed"]);
    assert!(text.contains(r#"{"ev":"witness","name":"Y","value":"125"}"#), "{text}");
}

#[test]
fn serve_rejects_a_program_argument() {
    let mut out = Vec::new();
    assert_eq!(fohh_cli::main_with(["fohh", "--serve", "x.fohh"], &mut std::io::empty(), &mut out), 3);
    assert_eq!(fohh_cli::main_with(["fohh", "--serve", "--script", "s"], &mut std::io::empty(), &mut out), 3);
}

#[test]
fn tcp_connections_get_independent_sessions() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || fohh_cli::serve_tcp(listener, SessionConfig::default()));
    let mut a = TcpStream::connect(addr).unwrap();
    let mut b = TcpStream::connect(addr).unwrap();
    let mut ra = BufReader::new(a.try_clone().unwrap());
    let mut rb = BufReader::new(b.try_clone().unwrap());
    let mut line = String::new();

    writeln!(a, "{}", CUBE[0]).unwrap();
    ra.read_line(&mut line).unwrap();
    assert!(line.contains("loaded"), "{line}");
    // The second connection has loaded nothing.
    line.clear();
    writeln!(b, "{}", CUBE[1]).unwrap();
    rb.read_line(&mut line).unwrap();
    assert!(line.contains(r#""code":"state""#), "{line}");

    writeln!(a, "{}\n{}", CUBE[1], CUBE[2]).unwrap();
    let mut got = Vec::new();
    for _ in 0..4 {
        line.clear();
        ra.read_line(&mut line).unwrap();
        got.push(line.trim().to_string());
    }
    assert_eq!(event_names(&got.join("\n")), ["proved", "read_request", "witness", "completed"]);
}
