use fohh_core::session::{serve, ErrorCode, ServerEvent, Session, SessionConfig, SessionState};

fn send(s: &mut Session, line: &str) -> Vec<ServerEvent> {
    s.handle_line(line)
}

fn cube_session() -> Session {
    let mut s = Session::default();
    let ev = send(&mut s, r#"{"op":"load","program":"cube(X,Y) :- Y is X*X*X."}"#);
    assert_eq!(ev, vec![ServerEvent::Loaded { clauses: 1 }]);
    s
}

#[test]
fn cube_end_to_end() {
    let mut s = cube_session();
    let ev = send(&mut s, r#"{"op":"query","goal":"forall X (exists Y (nat(X) => cube(X,Y)))"}"#);
    assert!(matches!(ev[0], ServerEvent::Proved { .. }));
    match &ev[1] {
        ServerEvent::ReadRequest { var, .. } => assert_eq!(var, "X"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(s.state(), SessionState::AwaitingRead { .. }));
    let ev = send(&mut s, r#"{"op":"read_reply","value":"5"}"#);
    assert_eq!(ev, vec![ServerEvent::Witness { name: "Y".into(), value: "125".into() }, ServerEvent::Completed]);
    assert_eq!(s.state(), &SessionState::Completed);
    let ev = send(&mut s, r#"{"op":"tree"}"#);
    match &ev[0] {
        ServerEvent::Tree { nodes } => assert_eq!(nodes.last().unwrap().index, nodes.len()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn read_reply_when_idle_is_a_state_error() {
    let mut s = Session::default();
    let ev = send(&mut s, r#"{"op":"read_reply","value":"5"}"#);
    assert!(matches!(ev.as_slice(), [ServerEvent::Error { code: ErrorCode::State, .. }]));
    assert_eq!(s.state(), &SessionState::Idle);
}

#[test]
fn failed_query() {
    let mut s = Session::default();
    send(&mut s, r#"{"op":"load","program":""}"#);
    let ev = send(&mut s, r#"{"op":"query","goal":"p"}"#);
    assert_eq!(ev, vec![ServerEvent::Failed { reason: "no proof".into() }]);
    assert_eq!(s.state(), &SessionState::Failed);
}

#[test]
fn abort_during_read() {
    let mut s = cube_session();
    send(&mut s, r#"{"op":"query","goal":"forall X (exists Y (nat(X) => cube(X,Y)))"}"#);
    let ev = send(&mut s, r#"{"op":"abort"}"#);
    assert_eq!(ev, vec![ServerEvent::Failed { reason: "aborted".into() }]);
    assert!(matches!(send(&mut s, r#"{"op":"abort"}"#)[0], ServerEvent::Error { code: ErrorCode::State, .. }));
}

#[test]
fn bad_input_is_reprompted_over_the_wire() {
    let mut s = cube_session();
    send(&mut s, r#"{"op":"query","goal":"forall X (exists Y (nat(X) => cube(X,Y)))"}"#);
    let ev = send(&mut s, r#"{"op":"read_reply","value":"foo"}"#);
    assert!(matches!(ev[0], ServerEvent::Error { code: ErrorCode::Parse, .. }));
    assert!(matches!(ev[1], ServerEvent::ReadRequest { .. }));
    let ev = send(&mut s, r#"{"op":"read_reply","value":"2"}"#);
    assert_eq!(ev[0], ServerEvent::Witness { name: "Y".into(), value: "8".into() });
}

#[test]
fn residual_violation_event() {
    let mut s = Session::default();
    send(&mut s, r#"{"op":"load","program":""}"#);
    send(&mut s, r#"{"op":"query","goal":"forall X (X < 3)"}"#);
    let ev = send(&mut s, r#"{"op":"read_reply","value":"9"}"#);
    assert_eq!(ev, vec![ServerEvent::Violation { node: 1 }]);
}

#[test]
fn illegal_transitions() {
    let mut s = Session::default();
    assert!(matches!(
        send(&mut s, r#"{"op":"query","goal":"p"}"#)[0],
        ServerEvent::Error { code: ErrorCode::State, .. }
    ));
    assert!(matches!(send(&mut s, r#"{"op":"tree"}"#)[0], ServerEvent::Error { code: ErrorCode::State, .. }));
    let mut s = cube_session();
    send(&mut s, r#"{"op":"query","goal":"forall X (exists Y (nat(X) => cube(X,Y)))"}"#);
    assert!(matches!(
        send(&mut s, r#"{"op":"load","program":"p."}"#)[0],
        ServerEvent::Error { code: ErrorCode::State, .. }
    ));
    assert!(matches!(s.state(), SessionState::AwaitingRead { .. }));
}

#[test]
fn parse_and_protocol_errors() {
    let mut s = Session::default();
    assert!(matches!(
        send(&mut s, r#"{"op":"load","program":"p :- ."}"#)[0],
        ServerEvent::Error { code: ErrorCode::Parse, .. }
    ));
    for bad in ["", "{", "null", r#"{"op":"fly"}"#, r#"{"op":"load"}"#] {
        assert!(matches!(send(&mut s, bad)[0], ServerEvent::Error { code: ErrorCode::Protocol, .. }), "{bad}");
    }
}

#[test]
fn serve_over_streams() {
    let mut input = Vec::new();
    input.extend_from_slice(br#"{"op":"load","program":"cube(X,Y) :- Y is X*X*X."}"#);
    input.extend_from_slice(b"\n");
    input.extend_from_slice(br#"{"op":"query","goal":"forall X (exists Y (nat(X) => cube(X,Y)))"}"#);
    input.extend_from_slice(b"\n\xff\xfe\n");
    input.extend_from_slice(br#"{"op":"read_reply","value":"10"}"#);
    input.extend_from_slice(b"\n");
    let mut out = Vec::new();
    serve(SessionConfig::default(), input.as_slice(), &mut out).unwrap();
    let lines: Vec<&str> = std::str::from_utf8(&out).unwrap().lines().collect();
    assert_eq!(lines[0], r#"{"ev":"loaded","clauses":1}"#);
    assert!(lines[1].starts_with(r#"{"ev":"proved","nodes":"#));
    assert!(lines[2].starts_with(r#"{"ev":"read_request","var":"X","#));
    assert_eq!(lines[3], r#"{"ev":"error","code":"protocol","message":"frame is not valid UTF-8"}"#);
    assert_eq!(lines[4], r#"{"ev":"witness","name":"Y","value":"1000"}"#);
    assert_eq!(lines[5], r#"{"ev":"completed"}"#);
}

#[test]
fn dropping_a_waiting_session_stops_its_worker() {
    let mut s = cube_session();
    send(&mut s, r#"{"op":"query","goal":"forall X (exists Y (nat(X) => cube(X,Y)))"}"#);
    drop(s);
}
