//! The `gavis` command line.
//!
//! Exit codes: 0 on success, 1 when the input is rejected with diagnostics,
//! 2 on usage errors.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{CommandFactory, Parser, Subcommand};
use gavis::agents::{self, external_plan, PipelineConfig, PlanRequest, MAX_RETRIES};
use gavis::algebra::Signature;
use gavis::bench::{bench, parse_dataset};
use gavis::codegen::{self, CodegenError};
use gavis::script::{self, Diagnostic};
use gavis::symbolic::EmissionStyle;

use crate::api::{router, AppState};
use crate::compile::{compile_script, CompileFailure, CompileRequest};
use crate::runner::HttpPlanner;
use crate::store::TaskStore;

pub const EXIT_OK: u8 = 0;
pub const EXIT_DIAGNOSTICS: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gavis",
    version,
    about = "Geometric algebra script compiler and task pipeline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a script and print the generated program
    Compile {
        file: PathBuf,
        #[arg(long, default_value = "cga3d", value_parser = parse_space)]
        space: String,
        /// python or json-ir
        #[arg(long, default_value = "python", value_parser = parse_target)]
        target: String,
    },
    /// Compile and evaluate a script, printing outputs and scene as JSON
    Run {
        file: PathBuf,
        /// Parameter value, as name=value; repeatable
        #[arg(long = "bind", value_name = "NAME=VALUE", value_parser = parse_binding)]
        bindings: Vec<(String, f64)>,
        /// Use the script's literal values for parameters not bound
        #[arg(long)]
        defaults: bool,
        #[arg(long, default_value = "cga3d", value_parser = parse_space)]
        space: String,
    },
    /// Decompose a task description into subtasks and print the plan as JSON
    Plan {
        description: String,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, env = "PLANNER_URL")]
        planner_url: Option<String>,
    },
    /// Serve the HTTP API
    Serve {
        #[arg(long, env = "PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        #[arg(long, env = "PLANNER_URL")]
        planner_url: Option<String>,
        #[arg(long, default_value_t = MAX_RETRIES)]
        max_retries: usize,
    },
    /// Run a benchmark dataset through the pipeline
    Bench {
        dataset: PathBuf,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = MAX_RETRIES)]
        max_retries: usize,
    },
}

fn parse_space(s: &str) -> Result<String, String> {
    Signature::from_name(s)
        .map(|_| s.to_string())
        .map_err(|e| e.to_string())
}

fn parse_target(s: &str) -> Result<String, String> {
    EmissionStyle::from_name(s)
        .map(|_| s.to_string())
        .ok_or_else(|| "expected python or json-ir".to_string())
}

fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value: f64 = value.trim().parse().map_err(|e| format!("{value}: {e}"))?;
    Ok((name.trim().to_string(), value))
}

/// Parses `args` and runs the command, returning the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString>,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let mut rendered = e.render().to_string();
            if e.use_stderr() && !rendered.contains("Usage:") {
                rendered.push_str(&format!("\n{}\n", usage_for(args.get(1))));
            }
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_DIAGNOSTICS
        }
    }
}

/// Usage of the subcommand named by `first`, or of the whole program.
fn usage_for(first: Option<&std::ffi::OsString>) -> String {
    let mut command = Cli::command();
    command.build();
    let name = first.and_then(|s| s.to_str()).unwrap_or_default();
    match command.find_subcommand_mut(name) {
        Some(sub) => sub.render_usage().to_string(),
        None => command.render_usage().to_string(),
    }
}

fn report(err: &mut dyn Write, file: &Path, diagnostics: &[Diagnostic]) -> u8 {
    for d in diagnostics {
        let _ = writeln!(err, "{}: {d}", file.display());
    }
    EXIT_DIAGNOSTICS
}

fn read(file: &Path) -> anyhow::Result<String> {
    fs::read_to_string(file).map_err(|e| anyhow::anyhow!("{}: {e}", file.display()))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<u8> {
    match command {
        Command::Compile {
            file,
            space,
            target,
        } => {
            let request = CompileRequest {
                space,
                target,
                ..CompileRequest::new(read(&file)?)
            };
            match compile_script(&request) {
                Ok(response) => {
                    out.write_all(response.code.as_bytes())?;
                    for w in &response.warnings {
                        writeln!(err, "{}: {w}", file.display())?;
                    }
                    Ok(EXIT_OK)
                }
                Err(CompileFailure::Diagnostics(d)) => Ok(report(err, &file, &d)),
                Err(CompileFailure::Request(e)) => Err(e.into()),
            }
        }
        Command::Run {
            file,
            bindings,
            defaults,
            space,
        } => run(&file, bindings, defaults, &space, out, err),
        Command::Plan {
            description,
            formula,
            planner_url,
        } => {
            let mut request = PlanRequest::new(description);
            request.formula = formula;
            let plan = match planner_url {
                Some(url) => external_plan(&request, &HttpPlanner::new(url))?,
                None => match agents::plan(&request) {
                    Ok(plan) => plan,
                    Err(e) => {
                        writeln!(err, "error[A006]: {e}")?;
                        return Ok(EXIT_DIAGNOSTICS);
                    }
                },
            };
            serde_json::to_writer_pretty(&mut *out, &plan)?;
            writeln!(out)?;
            Ok(EXIT_OK)
        }
        Command::Serve {
            port,
            data_dir,
            planner_url,
            max_retries,
        } => {
            let store = TaskStore::open(&data_dir)?;
            let pipeline = PipelineConfig {
                max_retries,
                ..PipelineConfig::default()
            };
            let planner =
                planner_url.map(|url| Arc::new(HttpPlanner::new(url)) as crate::api::SharedPlanner);
            let state = AppState::new(store, pipeline, planner);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let addr = SocketAddr::from(([0, 0, 0, 0], port));
                let listener = tokio::net::TcpListener::bind(addr).await?;
                tracing::info!(%addr, data_dir = %data_dir.display(), "listening");
                axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
            })?;
            Ok(EXIT_OK)
        }
        Command::Bench {
            dataset,
            report: report_path,
            max_retries,
        } => {
            let cases = match parse_dataset(&read(&dataset)?) {
                Ok(cases) => cases,
                Err(e) => {
                    writeln!(err, "{}: {e}", dataset.display())?;
                    return Ok(EXIT_DIAGNOSTICS);
                }
            };
            let config = PipelineConfig {
                max_retries,
                ..PipelineConfig::default()
            };
            let result = bench(&cases, &config);
            let json = serde_json::to_string_pretty(&result)?;
            match report_path {
                Some(path) => {
                    fs::write(&path, json + "\n")
                        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
                    for case in result.cases.iter().filter(|c| !c.success) {
                        writeln!(out, "FAIL {}: {}", case.id, case.failures.join("; "))?;
                    }
                    writeln!(
                        out,
                        "{} tasks, {} succeeded, success rate {:.1}%",
                        result.total, result.successes, result.success_rate
                    )?;
                }
                None => writeln!(out, "{json}")?,
            }
            Ok(EXIT_OK)
        }
    }
}

fn run(
    file: &Path,
    bindings: Vec<(String, f64)>,
    defaults: bool,
    space: &str,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<u8> {
    let source = read(file)?;
    let ast = match script::parse_source(&source) {
        Ok(ast) => ast,
        Err(d) => return Ok(report(err, file, &d)),
    };
    let program = match codegen::compile(&ast, Signature::from_name(space)?) {
        Ok(p) => p,
        Err(e) => return Ok(report(err, file, &e.diagnostics())),
    };
    let mut values: BTreeMap<String, f64> = if defaults {
        codegen::default_values(&ast)
    } else {
        BTreeMap::new()
    };
    values.extend(bindings);
    let outcome = codegen::bind(&program, &values).and_then(|(assignment, extra)| {
        codegen::run(&program, &assignment).map(|results| (results, extra))
    });
    let (results, extra) = match outcome {
        Ok(r) => r,
        Err(CodegenError::MissingInput(name)) => {
            writeln!(err, "{}: error[R001] MissingInput: {name} has no value; pass --bind {name}=<value> or --defaults", file.display())?;
            return Ok(EXIT_DIAGNOSTICS);
        }
        Err(e) => return Ok(report(err, file, &e.diagnostics())),
    };
    let (scene, warnings) = codegen::scene_of(&program, &results);
    for w in program.warnings.iter().chain(&extra).chain(&warnings) {
        writeln!(err, "{}: {w}", file.display())?;
    }
    let outputs: BTreeMap<&String, BTreeMap<String, f64>> = results
        .iter()
        .map(|(name, mv)| (name, mv.terms().map(|(b, c)| (b.to_string(), *c)).collect()))
        .collect();
    serde_json::to_writer_pretty(
        &mut *out,
        &serde_json::json!({ "outputs": outputs, "scene": scene }),
    )?;
    writeln!(out)?;
    Ok(EXIT_OK)
}
