use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use uttt_core::rules::render_sketch;
use uttt_core::{
    apply_opening, census, classify, decode, roll, BoardState, DigitSequence, OpeningClass,
    RollPolicy, UniformDigits,
};
use uttt_service::{router, GameService, OpeningView};

#[derive(Parser, Debug)]
#[command(
    name = "uttt",
    version,
    about = "Randomized openings for Ultimate Tic-Tac-Toe"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CensusFormat {
    Table,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Roll five digits and show the resulting opening
    Roll {
        /// Seed for a reproducible roll
        #[arg(long)]
        seed: Option<u64>,
        /// Keep sequences matching the forced-win digit pattern
        #[arg(long)]
        allow_forced_win: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Classify a five-digit sequence (exit 0 playable, 2 forced-win pattern, 3 illegal)
    Classify {
        /// Exactly five characters 0-8, e.g. 61245
        digits: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exact class counts over all 59,049 sequences
    Census {
        #[arg(long, value_enum, default_value_t = CensusFormat::Table)]
        format: CensusFormat,
    },
    /// Run the game service
    Serve {
        #[arg(long, env = "UTTT_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "UTTT_HOST", default_value = "127.0.0.1")]
        host: String,
        /// Directory of web UI assets
        #[arg(long, env = "UTTT_STATIC_DIR")]
        static_dir: Option<PathBuf>,
        /// Append-only session file; sessions are restored from it on start
        #[arg(long, env = "UTTT_PERSIST")]
        persist: Option<PathBuf>,
    },
}

fn print_opening_text(seq: DigitSequence, class: OpeningClass, board: Option<&BoardState>) {
    let opening = decode(seq);
    println!("sequence: {seq}");
    let flag = match class {
        OpeningClass::ForcedWinPattern => "  (matches the forced-win pattern)",
        _ => "",
    };
    println!("classification: {class}{flag}");
    for (k, p) in opening.placements.iter().enumerate() {
        println!("{}{}: ({}, {})", p.mark, k + 1, p.field, p.spot);
    }
    println!("X5: field {}", opening.x5_field);
    if let Some(board) = board {
        println!();
        print!("{}", render_sketch(board));
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_roll(seed: Option<u64>, allow_forced_win: bool, format: Format) -> anyhow::Result<ExitCode> {
    let policy = if allow_forced_win {
        RollPolicy::allowing_forced_win()
    } else {
        RollPolicy::default()
    };
    let rolled = match seed {
        Some(s) => roll(&mut UniformDigits::seeded(s), &policy),
        None => roll(&mut UniformDigits::from_os(), &policy),
    }?;
    match format {
        Format::Json => {
            let mut view = OpeningView::of(rolled.seq);
            view.rejected_draws = Some(rolled.rejected_draws);
            print_json(&view)?;
        }
        Format::Text => {
            print_opening_text(rolled.seq, rolled.class, Some(&rolled.board));
            println!("rejected draws: {}", rolled.rejected_draws);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(digits: &str, format: Format) -> anyhow::Result<ExitCode> {
    let seq: DigitSequence = match digits.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {digits:?}: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    let class = classify(seq);
    match format {
        Format::Json => print_json(&OpeningView::of(seq))?,
        Format::Text => {
            let applied = apply_opening(seq);
            print_opening_text(seq, class, applied.as_ref().ok());
            if let Err(conflict) = applied {
                println!(
                    "conflict: move {} targets occupied cell {}",
                    conflict.move_index, conflict.at
                );
            }
        }
    }
    Ok(ExitCode::from(match class {
        OpeningClass::Playable => 0,
        OpeningClass::ForcedWinPattern => 2,
        OpeningClass::Illegal { .. } => 3,
    }))
}

fn cmd_census(format: CensusFormat) -> anyhow::Result<ExitCode> {
    let report = census();
    match format {
        CensusFormat::Table => print!("{}", report.to_table()),
        CensusFormat::Json => print_json(report)?,
    }
    Ok(ExitCode::SUCCESS)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

fn cmd_serve(
    host: &str,
    port: u16,
    static_dir: Option<PathBuf>,
    persist: Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    let service = Arc::new(match &persist {
        Some(path) => GameService::with_persistence(path)
            .with_context(|| format!("loading sessions from {}", path.display()))?,
        None => GameService::in_memory(),
    });
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .with_context(|| format!("invalid address {host}:{port}"))?;
    let app = router(Arc::clone(&service), static_dir);

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        println!("listening on http://{}", listener.local_addr()?);
        use std::io::Write;
        std::io::stdout().flush()?;
        axum::serve(listener, app)
            .with_graceful_shutdown(shutdown_signal())
            .await?;
        anyhow::Ok(())
    })?;
    service.flush().context("flushing session file")?;
    eprintln!("shut down cleanly");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // exit 2 is reserved for the forced-win classification
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    let result = match cli.command {
        Command::Roll {
            seed,
            allow_forced_win,
            format,
        } => cmd_roll(seed, allow_forced_win, format),
        Command::Classify { digits, format } => cmd_classify(&digits, format),
        Command::Census { format } => cmd_census(format),
        Command::Serve {
            port,
            host,
            static_dir,
            persist,
        } => cmd_serve(&host, port, static_dir, persist),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
