//! Terminal front end: batch runs, the REPL and the session server.
//!
//! Everything a run prints goes to one transcript writer so batch output can
//! be compared byte for byte. Usage errors from argument parsing go to
//! standard error.

use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use clap::Parser;
use fohh_core::executor::{execute_with, ExecOptions, ExecStatus, InputProvider, ReadRequest, Reply};
use fohh_core::prover::{ProofFailure, Prover, SearchLimits};
use fohh_core::session::{serve, SessionConfig};
use fohh_core::{parse_goal, parse_program, FlatProofTree, GFormula, Program, UnifyOptions};

mod repl;

pub use repl::repl;

/// Proved and executed to completion.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_PROOF: i32 = 1;
/// A residual constraint failed or the input ran out.
pub const EXIT_STOPPED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub limits: SearchLimits,
    pub occurs_check: bool,
    pub trace: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { limits: SearchLimits::default(), occurs_check: true, trace: false }
    }
}

impl Config {
    fn prover(&self, program: Program) -> Prover {
        Prover::new(program).with_limits(self.limits).with_occurs_check(self.occurs_check)
    }

    fn unify(&self) -> UnifyOptions {
        UnifyOptions { occurs_check: self.occurs_check }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fohh", version, about = "Two-phase interpreter for first-order hereditary Harrop formulas")]
pub struct Cli {
    /// Program file to load.
    pub program: Option<PathBuf>,
    /// Goal to prove and execute. Without one the REPL starts.
    pub goal: Option<String>,
    /// Maximum proof depth.
    #[arg(long, default_value_t = 64)]
    pub depth: u32,
    /// Phase-1 answers to enumerate; the first one is executed.
    #[arg(long, default_value_t = 1)]
    pub solutions: usize,
    #[arg(long)]
    pub no_occurs_check: bool,
    /// Answers for the reads, one term per line.
    #[arg(long, value_name = "FILE")]
    pub script: Option<PathBuf>,
    /// Print each node index as execution visits it.
    #[arg(long)]
    pub trace: bool,
    /// Run the JSON session protocol on standard streams.
    #[arg(long, conflicts_with_all = ["goal", "script", "listen"])]
    pub serve: bool,
    /// Run the session protocol on a TCP address, one session per connection.
    #[arg(long, value_name = "ADDR", conflicts_with_all = ["goal", "script"])]
    pub listen: Option<String>,
}

impl Cli {
    pub fn config(&self) -> Result<Config, String> {
        let limits = SearchLimits::new(self.depth, self.solutions).map_err(|e| e.to_string())?;
        Ok(Config { limits, occurs_check: !self.no_occurs_check, trace: self.trace })
    }
}

/// Runs the command line `args` (program name first). Returns the exit code.
pub fn main_with<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match cli.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = if cli.serve {
        if cli.program.is_some() {
            eprintln!("error: --serve takes no program; send a load message");
            return EXIT_USAGE;
        }
        serve(session_config(&cfg), stdin, out).map(|()| EXIT_OK)
    } else if let Some(addr) = &cli.listen {
        listen(addr, session_config(&cfg))
    } else if let Some(goal) = &cli.goal {
        let program = cli.program.as_deref().expect("clap requires the program before the goal");
        run_batch(program, goal, cli.script.as_deref(), &cfg, stdin, out)
    } else {
        let interactive = io::stdin().is_terminal();
        repl(&cfg, cli.program.as_deref(), stdin, out, interactive)
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn session_config(cfg: &Config) -> SessionConfig {
    SessionConfig { limits: cfg.limits, unify: cfg.unify() }
}

fn listen(addr: &str, config: SessionConfig) -> io::Result<i32> {
    let listener = TcpListener::bind(addr)?;
    eprintln!("listening on {}", listener.local_addr()?);
    serve_tcp(listener, config)?;
    Ok(EXIT_OK)
}

/// Accepts connections forever, one session and thread per connection.
pub fn serve_tcp(listener: TcpListener, config: SessionConfig) -> io::Result<()> {
    for conn in listener.incoming() {
        let conn = conn?;
        std::thread::spawn(move || {
            let reader = io::BufReader::new(match conn.try_clone() {
                Ok(c) => c,
                Err(_) => return,
            });
            let _ = serve(config, reader, conn);
        });
    }
    Ok(())
}

/// Proves `goal` against the program file and executes the proof, taking
/// reads from `script` if given and from `stdin` otherwise.
pub fn run_batch(
    program: &Path,
    goal: &str,
    script: Option<&Path>,
    cfg: &Config,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
) -> io::Result<i32> {
    let text = match fs::read_to_string(program) {
        Ok(t) => t,
        Err(e) => {
            writeln!(out, "error: {}: {e}", program.display())?;
            return Ok(EXIT_USAGE);
        }
    };
    let script_text = match script.map(fs::read_to_string).transpose() {
        Ok(s) => s,
        Err(e) => {
            writeln!(out, "error: {}: {e}", script.unwrap().display())?;
            return Ok(EXIT_USAGE);
        }
    };
    let name = program.file_name().map_or_else(|| program.display().to_string(), |n| n.to_string_lossy().into_owned());
    let program = match parse_program(&text) {
        Ok(p) => p,
        Err(e) => {
            writeln!(out, "error: {name}:{e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    let goal = match parse_goal(goal.trim().trim_start_matches("?-")) {
        Ok(g) => g,
        Err(e) => {
            writeln!(out, "error: goal:{e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    writeln!(out, "?- {goal}.")?;
    let code = match script_text {
        Some(s) => {
            let mut lines = io::Cursor::new(s);
            run_query(cfg, program, &goal, &mut lines, true, out)?.0
        }
        None => {
            let echo = !io::stdin().is_terminal();
            run_query(cfg, program, &goal, stdin, echo, out)?.0
        }
    };
    Ok(code)
}

/// Phase 1 then phase 2 for one goal. Reads come from `input`; `echo`
/// copies each answer into the transcript after its prompt.
pub fn run_query(
    cfg: &Config,
    program: Program,
    goal: &GFormula,
    input: &mut dyn BufRead,
    echo: bool,
    out: &mut dyn Write,
) -> io::Result<(i32, Option<FlatProofTree>)> {
    let prover = cfg.prover(program);
    if cfg.limits.max_solutions > 1 {
        for (n, a) in prover.solve(goal).enumerate() {
            writeln!(out, "% answer {}: {a}", n + 1)?;
        }
    }
    let proof = match prover.prove_tree(goal) {
        Ok(p) => p,
        Err(ProofFailure::DepthExceeded) => {
            writeln!(out, "% depth limit {} exceeded", cfg.limits.max_depth)?;
            writeln!(out, "no.")?;
            return Ok((EXIT_NO_PROOF, None));
        }
        Err(ProofFailure::NoProof) => {
            writeln!(out, "no.")?;
            return Ok((EXIT_NO_PROOF, None));
        }
    };
    let tree = proof.tree;
    if cfg.trace {
        writeln!(out, "% proof tree: {} nodes", tree.len())?;
    }
    let mut prompter = Prompter { input, out: &mut *out, echo, trace: cfg.trace, failed: None };
    let result =
        execute_with(&tree, &mut prompter, ExecOptions { unify: cfg.unify() }).expect("prover trees are well formed");
    if let Some(e) = prompter.failed.take() {
        return Err(e);
    }
    let code = match &result.status {
        ExecStatus::Completed => {
            for (name, value) in result.answer(&tree) {
                writeln!(out, "{name} = {value}")?;
            }
            writeln!(out, "yes.")?;
            EXIT_OK
        }
        ExecStatus::ResidualViolation { node, violation } => {
            writeln!(out, "% node {node}: {violation}")?;
            writeln!(out, "no.")?;
            EXIT_STOPPED
        }
        ExecStatus::Aborted { node } => {
            writeln!(out, "% aborted at node {node}")?;
            writeln!(out, "no.")?;
            EXIT_STOPPED
        }
    };
    Ok((code, Some(tree)))
}

// Answers reads from a line source, writing `X ? ` prompts.
struct Prompter<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    echo: bool,
    trace: bool,
    failed: Option<io::Error>,
}

impl Prompter<'_> {
    fn next_line(&mut self) -> io::Result<Option<String>> {
        let mut line = String::new();
        loop {
            line.clear();
            if self.input.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            let t = line.trim();
            if !t.is_empty() {
                return Ok(Some(t.to_string()));
            }
        }
    }

    fn ask(&mut self, req: &ReadRequest) -> io::Result<Reply> {
        if let Some(why) = &req.rejected {
            writeln!(self.out, "% rejected: {why}")?;
        }
        write!(self.out, "{} ? ", req.var)?;
        self.out.flush()?;
        let line = self.next_line()?;
        match line {
            Some(l) => {
                if self.echo {
                    writeln!(self.out, "{l}")?;
                }
                Ok(Reply::Text(l))
            }
            None => {
                writeln!(self.out)?;
                Ok(Reply::Declined)
            }
        }
    }
}

impl InputProvider for Prompter<'_> {
    fn request(&mut self, req: &ReadRequest) -> Reply {
        if self.failed.is_some() {
            return Reply::Declined;
        }
        self.ask(req).unwrap_or_else(|e| {
            self.failed = Some(e);
            Reply::Declined
        })
    }

    fn visit(&mut self, node: usize) {
        if self.trace && self.failed.is_none() {
            if let Err(e) = writeln!(self.out, "% visit {node}") {
                self.failed = Some(e);
            }
        }
    }
}
