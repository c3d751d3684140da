//! Command line interface. Exit codes: 0 success, 1 negative result,
//! 2 usage or grammar error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};

use crate::chart::{parse, Status};
use crate::genertest::{run_suite, SuiteConfig};
use crate::grammar::{parse_grammar, validate_grammar, Grammar};
use crate::lookahead::next_tokens;
use crate::reference::ReferenceEngine;
use crate::service::{self, AppState};

pub const SUCCESS: i32 = 0;
pub const NEGATIVE: i32 = 1;
pub const FAILURE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "codeco", version, about = "Parse, complete and test controlled-language grammars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a grammar file and print its warnings.
    Check { grammar: PathBuf },
    /// Parse a token sequence; exits 1 unless it is a complete text.
    Parse {
        grammar: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        tokens: Vec<String>,
        /// Print up to this many syntax trees of a complete text.
        #[arg(long, default_value_t = 1)]
        trees: usize,
    },
    /// Print the abstract and concrete options after a token sequence.
    Options {
        grammar: PathBuf,
        #[arg(long, num_args = 0.., default_value = "")]
        tokens: Vec<String>,
    },
    /// List every sentence up to a length, one per line.
    Generate {
        grammar: PathBuf,
        #[arg(long)]
        max_tokens: usize,
    },
    /// Run the ambiguity, equivalence and lookahead checks.
    Test {
        grammar: PathBuf,
        #[arg(long)]
        max_tokens: usize,
        /// Skip the lookahead check.
        #[arg(long)]
        no_lookahead: bool,
        /// Also write the report as JSON lines to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Serve the HTTP API. The grammar id is the file stem.
    Serve {
        #[arg(env = "CODECO_GRAMMAR")]
        grammar: PathBuf,
        #[arg(long, env = "CODECO_PORT", default_value_t = 8080)]
        port: u16,
        /// Idle session lifetime in seconds.
        #[arg(long, env = "CODECO_SESSION_TTL", default_value_t = 1800)]
        session_ttl: u64,
    },
}

/// Runs the command line `args` (program name first), writing to `out`
/// and `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { FAILURE } else { SUCCESS };
            let rendered = e.render().to_string();
            let _ =
                if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            FAILURE
        }
    }
}

pub fn load_grammar(path: &Path) -> Result<Grammar, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_grammar(&text)
        .map_err(|errors| errors.iter().map(|e| format!("{}:{e}", path.display())).collect::<Vec<_>>().join("\n"))
}

fn tokens_of(grammar: &Grammar, args: &[String]) -> Vec<String> {
    grammar.tokenize(&args.join(" "))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match command {
        Command::Check { grammar } => {
            let g = load_grammar(&grammar)?;
            let report = validate_grammar(&g);
            for finding in &report.findings {
                writeln!(err, "{finding}").map_err(io)?;
            }
            writeln!(
                out,
                "ok: {} rules, {} lexical entries, {} warnings",
                g.rules().len(),
                g.lexicon().len(),
                report.warnings().count()
            )
            .map_err(io)?;
            Ok(SUCCESS)
        }
        Command::Parse { grammar, tokens, trees } => {
            let g = load_grammar(&grammar)?;
            let session = parse(&g, &tokens_of(&g, &tokens));
            let status = session.status();
            writeln!(out, "{status}").map_err(io)?;
            if status == Status::Complete {
                writeln!(out, "derivations: {}", session.derivation_count()).map_err(io)?;
                for tree in session.trees(trees) {
                    writeln!(out, "{tree}").map_err(io)?;
                }
                Ok(SUCCESS)
            } else {
                Ok(NEGATIVE)
            }
        }
        Command::Options { grammar, tokens } => {
            let g = load_grammar(&grammar)?;
            let session = parse(&g, &tokens_of(&g, &tokens));
            writeln!(out, "status: {}", session.status()).map_err(io)?;
            let options = next_tokens(&session);
            writeln!(out, "abstract:").map_err(io)?;
            for option in &options.abstract_options {
                writeln!(out, "  {option}").map_err(io)?;
            }
            writeln!(out, "concrete:").map_err(io)?;
            for option in &options.concrete {
                writeln!(out, "  {option}").map_err(io)?;
            }
            Ok(if session.status() == Status::Dead { NEGATIVE } else { SUCCESS })
        }
        Command::Generate { grammar, max_tokens } => {
            let g = load_grammar(&grammar)?;
            let sentences = ReferenceEngine::new(&g).generate(max_tokens).map_err(|e| e.to_string())?;
            for s in &sentences {
                writeln!(out, "{}", s.text()).map_err(io)?;
            }
            Ok(SUCCESS)
        }
        Command::Test { grammar, max_tokens, no_lookahead, report } => {
            let g = load_grammar(&grammar)?;
            let mut config = SuiteConfig::new(max_tokens);
            config.lookahead = !no_lookahead;
            let (result, timings) = run_suite(&g, config).map_err(|e| e.to_string())?;
            write!(out, "{result}").map_err(io)?;
            writeln!(
                err,
                "time: generation {:.2?}, ambiguity {:.2?}, equivalence {:.2?}, lookahead {:.2?}",
                timings.generation, timings.ambiguity, timings.equivalence, timings.lookahead
            )
            .map_err(io)?;
            if let Some(path) = report {
                std::fs::write(&path, result.to_json_lines()).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(if result.passed() { SUCCESS } else { NEGATIVE })
        }
        Command::Serve { grammar, port, session_ttl } => {
            let g = load_grammar(&grammar)?;
            let id = grammar.file_stem().and_then(|s| s.to_str()).unwrap_or("grammar").to_owned();
            let state = AppState::new(Duration::from_secs(session_ttl));
            state.add_grammar(&id, g);
            let runtime = tokio::runtime::Runtime::new().map_err(io)?;
            runtime
                .block_on(async {
                    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
                    writeln!(err, "serving grammar '{id}' on {}", listener.local_addr()?)?;
                    service::serve(state, listener).await
                })
                .map_err(io)?;
            Ok(SUCCESS)
        }
    }
}
