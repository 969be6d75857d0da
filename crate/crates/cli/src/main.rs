//! `ncrat`: compile, test, rank and sample noncommutative rational functions.

mod commands;
mod report;

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use ncrat::exactalg::{PrimeField, MERSENNE_61};

pub use report::{CliError, Report};

/// Parameters shared by every subcommand, resolved before dispatch.
pub struct Context {
    pub field: PrimeField,
    pub seed: u64,
    pub seed_derived: bool,
    pub trials: Option<usize>,
    pub max_dim: Option<usize>,
}

pub trait Subcommand {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    fn args(&self, cmd: Command) -> Command;
    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Report, CliError>;
}

pub struct Registry {
    commands: BTreeMap<&'static str, Box<dyn Subcommand>>,
}

impl Registry {
    pub fn new() -> Self {
        Self { commands: BTreeMap::new() }
    }

    pub fn register(&mut self, c: Box<dyn Subcommand>) {
        let prev = self.commands.insert(c.name(), c);
        assert!(prev.is_none(), "subcommand registered twice");
    }

    pub fn get(&self, name: &str) -> Option<&dyn Subcommand> {
        self.commands.get(name).map(|b| b.as_ref())
    }

    pub fn cli(&self) -> Command {
        let mut root = Command::new("ncrat")
            .about("Noncommutative rational identity testing and rank")
            .subcommand_required(true)
            .arg_required_else_help(true)
            .arg(Arg::new("prime").long("prime").global(true).value_parser(value_parser!(u64)).help("Working field modulus [default: 2^61-1]"))
            .arg(Arg::new("seed").long("seed").global(true).value_parser(value_parser!(u64)).help("Random seed [default: hash of the arguments]"))
            .arg(Arg::new("trials").long("trials").global(true).value_parser(value_parser!(usize)).help("Random trials per dimension"))
            .arg(Arg::new("max-dim").long("max-dim").global(true).value_parser(value_parser!(usize)).help("Largest probed matrix dimension"))
            .arg(Arg::new("json").long("json").global(true).action(ArgAction::SetTrue).help("Append a JSON block to the report"));
        for c in self.commands.values() {
            root = root.subcommand(c.args(Command::new(c.name()).about(c.about())));
        }
        root
    }
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self::new();
        commands::register_all(&mut r);
        r
    }
}

/// FNV-1a over the NUL-joined arguments.
pub fn derive_seed(args: &[String]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for a in args {
        for b in a.bytes().chain([0]) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn context(m: &ArgMatches, args: &[String]) -> Result<Context, CliError> {
    let p = m.get_one::<u64>("prime").copied().unwrap_or(MERSENNE_61);
    let field = PrimeField::new(p).map_err(|e| CliError::input(format!("--prime {p}: {e}")))?;
    let (seed, seed_derived) = match m.get_one::<u64>("seed") {
        Some(&s) => (s, false),
        None => (derive_seed(args), true),
    };
    let trials = m.get_one::<usize>("trials").copied();
    if trials == Some(0) {
        return Err(CliError::input("--trials must be positive"));
    }
    let max_dim = m.get_one::<usize>("max-dim").copied();
    if max_dim == Some(0) {
        return Err(CliError::input("--max-dim must be positive"));
    }
    Ok(Context { field, seed, seed_derived, trials, max_dim })
}

/// Parses `argv` (without the program name), runs the subcommand and returns the text and exit code.
pub fn run(registry: &Registry, args: &[String]) -> (String, u8) {
    let argv = std::iter::once("ncrat".to_string()).chain(args.iter().cloned());
    let m = match registry.cli().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (e.render().to_string(), code);
        }
    };
    let (name, sub) = m.subcommand().expect("subcommand required");
    let cmd = registry.get(name).expect("registered");
    let result = context(&m, args).and_then(|ctx| {
        let mut report = cmd.run(sub, &ctx)?;
        report.prepend_params(name, &ctx);
        Ok(report)
    });
    match result {
        Ok(r) => {
            let code = r.exit_code();
            (r.render(m.get_flag("json")), code)
        }
        Err(e) => (e.render(name), e.exit_code()),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (out, code) = run(&Registry::default(), &args);
    if code == 2 {
        eprint!("{out}");
    } else {
        print!("{out}");
    }
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_every_subcommand() {
        let r = Registry::default();
        let names: Vec<&str> = r.commands.keys().copied().collect();
        assert_eq!(names, ["bootstrap", "compile", "eval", "hitgen", "ncrank", "rit", "series-zero"]);
        r.cli().debug_assert();
    }

    #[test]
    #[should_panic(expected = "registered twice")]
    fn duplicate_registration_panics() {
        let mut r = Registry::default();
        commands::register_all(&mut r);
    }

    #[test]
    fn derived_seed_depends_on_arguments() {
        let a = derive_seed(&["rit".into(), "x1".into()]);
        assert_eq!(a, derive_seed(&["rit".into(), "x1".into()]));
        assert_ne!(a, derive_seed(&["rit".into(), "x2".into()]));
        assert_ne!(derive_seed(&["ab".into()]), derive_seed(&["a".into(), "b".into()]));
    }

    #[test]
    fn run_returns_codes() {
        let r = Registry::default();
        let (out, code) = run(&r, &["rit".into(), "inv(x1) + inv(x2)".into(), "--seed".into(), "1".into()]);
        assert_eq!(code, 0);
        assert!(out.contains("verdict=NONZERO\n"));
        assert_eq!(run(&r, &["rit".into(), "(".into()]).1, 2);
    }
}
