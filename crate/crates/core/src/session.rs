//! Sessions driven by a line-oriented JSON protocol.
//!
//! A client loads a program, poses a query and answers read requests. Phase
//! 2 runs on a worker thread per query; the worker's input provider hands
//! each read request back to the session and blocks until the client
//! replies, so the executor keeps its blocking contract.

use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde::{Deserialize, Serialize};

use crate::executor::{execute_with, ExecOptions, ExecStatus, ExecutionResult, InputProvider, ReadRequest, Reply};
use crate::formula::Program;
use crate::parser::{parse_goal, parse_program};
use crate::proof_tree::{FlatProofTree, NodeRecord};
use crate::prover::{ProofFailure, Prover, SearchLimits};
use crate::term::Param;
use crate::unify::UnifyOptions;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ClientMessage {
    Load { program: String },
    Query { goal: String },
    ReadReply { value: String },
    Tree,
    Abort,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "ev", rename_all = "snake_case")]
pub enum ServerEvent {
    Loaded { clauses: usize },
    Proved { nodes: usize },
    Failed { reason: String },
    ReadRequest { var: String, prompt: String, node: usize },
    Witness { name: String, value: String },
    Completed,
    Violation { node: usize },
    Tree { nodes: Vec<TreeNode> },
    Error { code: ErrorCode, message: String },
}

/// Wire form of one flat-tree node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub index: usize,
    pub rule: String,
    pub offsets: Vec<usize>,
    pub sequent: String,
}

impl From<NodeRecord> for TreeNode {
    fn from(r: NodeRecord) -> Self {
        TreeNode { index: r.index, rule: r.rule, offsets: r.offsets, sequent: r.sequent }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Parse,
    State,
    Protocol,
}

impl ServerEvent {
    fn error(code: ErrorCode, message: impl Into<String>) -> ServerEvent {
        ServerEvent::Error { code, message: message.into() }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SessionState {
    Idle,
    Loaded,
    Proved,
    AwaitingRead { node: usize, param: Param },
    Completed,
    Failed,
}

impl SessionState {
    pub fn name(&self) -> &'static str {
        match self {
            SessionState::Idle => "idle",
            SessionState::Loaded => "loaded",
            SessionState::Proved => "proved",
            SessionState::AwaitingRead { .. } => "awaiting_read",
            SessionState::Completed => "completed",
            SessionState::Failed => "failed",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SessionConfig {
    pub limits: SearchLimits,
    pub unify: UnifyOptions,
}

enum WorkerMsg {
    Read(ReadRequest),
    Done(ExecutionResult),
}

struct Worker {
    replies: Sender<Reply>,
    events: Receiver<WorkerMsg>,
    handle: Option<JoinHandle<()>>,
}

impl Drop for Worker {
    fn drop(&mut self) {
        let _ = self.replies.send(Reply::Declined);
        // Keep answering so a re-prompting executor can finish.
        while let Ok(WorkerMsg::Read(_)) = self.events.recv() {
            let _ = self.replies.send(Reply::Declined);
        }
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

struct ChannelProvider {
    to_session: Sender<WorkerMsg>,
    replies: Receiver<Reply>,
}

impl InputProvider for ChannelProvider {
    fn request(&mut self, req: &ReadRequest) -> Reply {
        if self.to_session.send(WorkerMsg::Read(req.clone())).is_err() {
            return Reply::Declined;
        }
        self.replies.recv().unwrap_or(Reply::Declined)
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub struct Session {
    id: String,
    config: SessionConfig,
    state: SessionState,
    program: Option<Arc<Program>>,
    tree: Option<FlatProofTree>,
    worker: Option<Worker>,
    result: Option<ExecutionResult>,
}

impl Default for Session {
    fn default() -> Self {
        Session::new(SessionConfig::default())
    }
}

impl Session {
    pub fn new(config: SessionConfig) -> Session {
        Session {
            id: format!("s{}", NEXT_ID.fetch_add(1, Ordering::Relaxed)),
            config,
            state: SessionState::Idle,
            program: None,
            tree: None,
            worker: None,
            result: None,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn tree(&self) -> Option<&FlatProofTree> {
        self.tree.as_ref()
    }

    /// Outcome of the last finished execution.
    pub fn result(&self) -> Option<&ExecutionResult> {
        self.result.as_ref()
    }

    /// Parses one frame and handles it. Never panics on bad input.
    pub fn handle_line(&mut self, line: &str) -> Vec<ServerEvent> {
        match serde_json::from_str::<ClientMessage>(line) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerEvent::error(ErrorCode::Protocol, e.to_string())],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerEvent> {
        let awaiting = matches!(self.state, SessionState::AwaitingRead { .. });
        match msg {
            ClientMessage::Load { .. } | ClientMessage::Query { .. } if awaiting => {
                vec![self.state_error("an execution is waiting for input; send read_reply or abort")]
            }
            ClientMessage::Load { program } => match parse_program(&program) {
                Ok(p) => {
                    let clauses = p.len();
                    self.program = Some(Arc::new(p));
                    self.tree = None;
                    self.result = None;
                    self.state = SessionState::Loaded;
                    vec![ServerEvent::Loaded { clauses }]
                }
                Err(e) => vec![ServerEvent::error(ErrorCode::Parse, e.to_string())],
            },
            ClientMessage::Query { goal } => self.query(&goal),
            ClientMessage::ReadReply { value } => {
                if !awaiting {
                    return vec![self.state_error("no read is pending")];
                }
                self.resume(Reply::Text(value))
            }
            ClientMessage::Tree => match &self.tree {
                Some(t) => vec![ServerEvent::Tree { nodes: t.records().into_iter().map(TreeNode::from).collect() }],
                None => vec![self.state_error("no proof tree yet")],
            },
            ClientMessage::Abort => {
                if !awaiting {
                    return vec![self.state_error("nothing to abort")];
                }
                self.resume(Reply::Declined)
            }
        }
    }

    fn state_error(&self, why: &str) -> ServerEvent {
        ServerEvent::error(ErrorCode::State, format!("{why} (state {})", self.state.name()))
    }

    fn query(&mut self, text: &str) -> Vec<ServerEvent> {
        let Some(program) = self.program.clone() else {
            return vec![self.state_error("load a program first")];
        };
        let goal = match parse_goal(text) {
            Ok(g) => g,
            Err(e) => return vec![ServerEvent::error(ErrorCode::Parse, e.to_string())],
        };
        let prover =
            Prover::new(program).with_limits(self.config.limits).with_occurs_check(self.config.unify.occurs_check);
        self.result = None;
        let proof = match prover.prove_tree(&goal) {
            Ok(p) => p,
            Err(f) => {
                self.tree = None;
                self.state = SessionState::Failed;
                let reason = match f {
                    ProofFailure::NoProof => "no proof",
                    ProofFailure::DepthExceeded => "depth limit exceeded",
                };
                return vec![ServerEvent::Failed { reason: reason.into() }];
            }
        };
        let tree = proof.tree;
        self.tree = Some(tree.clone());
        self.state = SessionState::Proved;
        let mut events = vec![ServerEvent::Proved { nodes: tree.len() }];

        let (to_session, events_rx) = channel();
        let (replies_tx, replies) = channel();
        let opts = ExecOptions { unify: self.config.unify };
        let handle = std::thread::spawn(move || {
            let mut provider = ChannelProvider { to_session: to_session.clone(), replies };
            let result = execute_with(&tree, &mut provider, opts).expect("prover trees are well formed");
            let _ = to_session.send(WorkerMsg::Done(result));
        });
        self.worker = Some(Worker { replies: replies_tx, events: events_rx, handle: Some(handle) });
        events.extend(self.pump());
        events
    }

    fn resume(&mut self, reply: Reply) -> Vec<ServerEvent> {
        let worker = self.worker.as_ref().expect("awaiting a read implies a worker");
        if worker.replies.send(reply).is_err() {
            self.worker = None;
            self.state = SessionState::Failed;
            return vec![ServerEvent::Failed { reason: "execution worker stopped".into() }];
        }
        self.pump()
    }

    // Waits for the worker's next read request or its final result.
    fn pump(&mut self) -> Vec<ServerEvent> {
        let worker = self.worker.as_ref().expect("running execution");
        let msg = worker.events.recv();
        let mut events = Vec::new();
        match msg {
            Ok(WorkerMsg::Read(req)) => {
                if let Some(why) = &req.rejected {
                    events.push(ServerEvent::error(ErrorCode::Parse, format!("rejected input: {why}")));
                }
                self.state = SessionState::AwaitingRead { node: req.node, param: req.param.clone() };
                events.push(ServerEvent::ReadRequest { var: req.var.to_string(), prompt: req.prompt, node: req.node });
            }
            Ok(WorkerMsg::Done(result)) => {
                if let Some(mut w) = self.worker.take() {
                    if let Some(h) = w.handle.take() {
                        let _ = h.join();
                    }
                }
                match &result.status {
                    ExecStatus::Completed => {
                        for (name, value) in &result.witnesses {
                            events.push(ServerEvent::Witness { name: name.to_string(), value: value.to_string() });
                        }
                        events.push(ServerEvent::Completed);
                        self.state = SessionState::Completed;
                    }
                    ExecStatus::ResidualViolation { node, .. } => {
                        events.push(ServerEvent::Violation { node: *node });
                        self.state = SessionState::Failed;
                    }
                    ExecStatus::Aborted { .. } => {
                        events.push(ServerEvent::Failed { reason: "aborted".into() });
                        self.state = SessionState::Failed;
                    }
                }
                self.result = Some(result);
            }
            Err(_) => {
                self.worker = None;
                self.state = SessionState::Failed;
                events.push(ServerEvent::Failed { reason: "execution worker stopped".into() });
            }
        }
        events
    }
}

/// Serves one session over newline-delimited frames until end of input.
/// Frames that are not UTF-8 or not valid messages get an error event.
pub fn serve(config: SessionConfig, mut input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
    let mut session = Session::new(config);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        let events = match std::str::from_utf8(&buf) {
            Ok(line) if line.trim().is_empty() => continue,
            Ok(line) => session.handle_line(line.trim_end_matches(['\n', '\r'])),
            Err(_) => vec![ServerEvent::error(ErrorCode::Protocol, "frame is not valid UTF-8")],
        };
        for ev in events {
            writeln!(output, "{}", ev.to_line())?;
        }
        output.flush()?;
    }
}
