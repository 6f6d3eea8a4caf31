mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use commands::Outcome;
use config::{Cli, Format, Resolved};

fn render(r: &Resolved, out: &Outcome) -> Result<Vec<u8>, String> {
    match r.cfg.format {
        Format::Json => {
            let doc = json!({
                "version": env!("CARGO_PKG_VERSION"),
                "command": r.cfg.command,
                "config": r.cfg,
                "result": out.result,
            });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut buf = Vec::new();
            writeln!(buf, "# version {}", env!("CARGO_PKG_VERSION")).map_err(|e| e.to_string())?;
            let cfg = serde_json::to_string(&r.cfg).map_err(|e| e.to_string())?;
            writeln!(buf, "# config {cfg}").map_err(|e| e.to_string())?;
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&out.table.header).map_err(|e| e.to_string())?;
            for row in &out.table.rows {
                w.write_record(row).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())?;
            drop(w);
            Ok(buf)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    let resolved = match config::resolve(cli.command, &cli.common) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_config_error() { 2 } else { 3 });
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(resolved.cfg.threads).build_global() {
        eprintln!("error: cannot start worker pool: {e}");
        return ExitCode::from(3);
    }
    let outcome = match commands::run(&resolved) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_config_error() { 2 } else { 3 });
        }
    };
    let bytes = match render(&resolved, &outcome) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let written = match &cli.common.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    if outcome.failed {
        eprintln!("verification failed");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
