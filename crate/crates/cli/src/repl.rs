use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use fohh_core::{parse_goal, parse_program, FlatProofTree, Program};

use crate::{run_query, Config, EXIT_OK};

const HELP: &str = "\
:load FILE   replace the program with FILE
:list        print the program
?- GOAL.     prove GOAL, then execute it, asking for each forall variable
:tree        print the last proof tree as an offset list
:quit        leave";

struct Repl<'a> {
    cfg: &'a Config,
    program: Program,
    tree: Option<FlatProofTree>,
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    interactive: bool,
}

/// Reads commands from `input` until `:quit` or end of input. Errors in
/// commands are reported and the loop goes on.
pub fn repl(
    cfg: &Config,
    program: Option<&Path>,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    interactive: bool,
) -> io::Result<i32> {
    let mut r = Repl { cfg, program: Program::empty(), tree: None, input, out, interactive };
    if let Some(p) = program {
        r.load(&p.to_string_lossy())?;
    }
    loop {
        if r.interactive {
            write!(r.out, "fohh> ")?;
            r.out.flush()?;
        }
        let Some(line) = r.read_line()? else {
            return Ok(EXIT_OK);
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !r.command(line)? {
            return Ok(EXIT_OK);
        }
    }
}

impl Repl<'_> {
    fn read_line(&mut self) -> io::Result<Option<String>> {
        let mut line = String::new();
        Ok((self.input.read_line(&mut line)? > 0).then_some(line))
    }

    // False once the user quits.
    fn command(&mut self, line: &str) -> io::Result<bool> {
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match head {
            ":quit" | ":q" => return Ok(false),
            ":help" => writeln!(self.out, "{HELP}")?,
            ":load" if !rest.trim().is_empty() => self.load(rest.trim())?,
            ":load" => writeln!(self.out, "error: :load needs a file name")?,
            ":list" => {
                if self.program.is_empty() {
                    writeln!(self.out, "% no clauses")?;
                }
                for d in self.program.clauses() {
                    writeln!(self.out, "{d}.")?;
                }
            }
            ":tree" => match &self.tree {
                Some(t) => writeln!(self.out, "{}", t.to_paper_list())?,
                None => writeln!(self.out, "% no proof yet")?,
            },
            _ if line.starts_with("?-") => self.query(line)?,
            _ => writeln!(self.out, "error: unknown command `{head}`; :help lists commands")?,
        }
        Ok(true)
    }

    fn load(&mut self, path: &str) -> io::Result<()> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return writeln!(self.out, "error: {path}: {e}"),
        };
        match parse_program(&text) {
            Ok(p) => {
                let n = p.len();
                writeln!(self.out, "% loaded {n} clause{} from {path}", if n == 1 { "" } else { "s" })?;
                self.program = p;
                self.tree = None;
            }
            Err(e) => writeln!(self.out, "error: {path}:{e}")?,
        }
        Ok(())
    }

    fn query(&mut self, first: &str) -> io::Result<()> {
        // A goal may run over several lines up to its final `.`.
        let mut text = first.trim_start_matches("?-").to_string();
        while !text.trim_end().ends_with('.') {
            match self.read_line()? {
                Some(more) => text.push_str(&more),
                None => break,
            }
        }
        let goal = match parse_goal(&text) {
            Ok(g) => g,
            Err(e) => return writeln!(self.out, "error: goal:{e}"),
        };
        let (_, tree) = run_query(self.cfg, self.program.clone(), &goal, self.input, !self.interactive, self.out)?;
        if tree.is_some() {
            self.tree = tree;
        }
        Ok(())
    }
}
