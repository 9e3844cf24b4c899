//! Command-line entry point.
//!
//! Exit codes are a stable contract for scripting: 0 on success, 1 on a
//! usage or configuration error, 2 when the admissible set is empty.

mod commands;
mod config;

use config::Settings;

const USAGE: &str = "\
minweier - minimal surfaces from holomorphic data

USAGE:
    minweier <COMMAND> [OPTIONS]

COMMANDS:
    generate     evaluate the surface over the domain, write mesh + report
    verify       run every residual family at two stencil steps
    pde          residuals of the natural PDE of the curvature function
    reconstruct  rebuild a surface from Gauss-map samples (CSV or round trip)
    classify     sign of nu_x nu_y over the grid

OPTIONS:
    --config PATH     flat 'key = value' file, applied before other flags
    --expr STRING     holomorphic datum w(z), e.g. \"z\", \"exp(z)\", \"z^2/2\"
    --domain A,B,C,D  rectangle xmin,xmax,ymin,ymax   [default 0.1,1.1,0.1,1.1]
    --z0 A,B          base point                      [default: domain center]
    --grid NxM        sample counts                   [default 33x33]
    --quad-tol T      quadrature tolerance            [default 1e-10]
    --fd-step H       stencil step    [default 1e-4 x diagonal, in [1e-6, 1e-2]]
    --out DIR         output directory                [default out]

CONFIG-ONLY KEYS:
    mu_floor, reg_floor, nu_floor, formats (obj,ply), gauss_csv PATH, base I,J

ENVIRONMENT:
    MINWEIER_THREADS  cap worker threads (default: all cores)

EXIT CODES:
    0 success    1 usage or configuration error    2 empty admissible set
";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(run(&args));
}

fn run(args: &[String]) -> i32 {
    if args.iter().any(|a| a == "--help" || a == "-h") {
        print!("{USAGE}");
        return 0;
    }
    match dispatch(args) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            eprintln!("run 'minweier --help' for usage");
            1
        }
    }
}

fn dispatch(args: &[String]) -> Result<i32, String> {
    init_thread_pool()?;
    let Some(command) = args.first() else {
        return Err("missing command".into());
    };
    let settings = parse_flags(&args[1..])?;
    match command.as_str() {
        "generate" => commands::cmd_generate(&settings),
        "verify" => commands::cmd_verify(&settings),
        "pde" => commands::cmd_pde(&settings),
        "reconstruct" => commands::cmd_reconstruct(&settings),
        "classify" => commands::cmd_classify(&settings),
        other => Err(format!("unknown command '{other}'")),
    }
}

fn init_thread_pool() -> Result<(), String> {
    let Ok(raw) = std::env::var("MINWEIER_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MINWEIER_THREADS: expected a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("MINWEIER_THREADS: {e}"))
}

fn parse_flags(args: &[String]) -> Result<Settings, String> {
    let mut settings = Settings::default();
    // --config first so that the remaining flags override it
    let mut rest: Vec<(&str, &str)> = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| format!("unexpected argument '{flag}'"))?;
        let value = it
            .next()
            .ok_or_else(|| format!("--{key}: missing value"))?;
        if key == "config" {
            let text = std::fs::read_to_string(value)
                .map_err(|e| format!("cannot read config '{value}': {e}"))?;
            settings.apply_config_text(&text, value)?;
        } else {
            rest.push((key, value));
        }
    }
    for (key, value) in rest {
        let config_key = match key {
            "expr" | "domain" | "z0" | "grid" | "out" => key,
            "quad-tol" => "quad_tol",
            "fd-step" => "fd_step",
            other => return Err(format!("unknown flag --{other}")),
        };
        settings.apply(config_key, value)?;
    }
    Ok(settings)
}
