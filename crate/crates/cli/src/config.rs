//! INI-style run configuration.
//!
//! ```ini
//! [problem]
//! name = experiment3
//! gamma = 11
//!
//! [run]
//! scheme = implicit
//! resolution = 64, 128
//! r = 1, 2, 4, 8
//!
//! [output]
//! dir = out
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use hjbmarch::advect1d::Scheme1D;
use hjbmarch::problem::{advection_catalog, by_name, ProblemParams, ADVECTION_CASES};
use hjbmarch::{DynProblem64, Scheme};

pub const DEFAULT_TRUTH_RESOLUTION: usize = 512;
pub const DEFAULT_REPEATS: usize = 3;
pub const DEFAULT_OUT_DIR: &str = "hjbmarch-out";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.path {
            write!(f, "{}:", p.display())?;
        }
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err_at(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: None,
        line: Some(line),
        message: message.into(),
    }
}

fn err(message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: None,
        line: None,
        message: message.into(),
    }
}

/// Which family of marcher a config selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnyScheme {
    Grid(Scheme),
    Line(Scheme1D),
}

impl AnyScheme {
    pub fn name(self) -> &'static str {
        match self {
            AnyScheme::Grid(s) => s.name(),
            AnyScheme::Line(s) => s.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: String,
    pub params: ProblemParams,
    pub schemes: Vec<AnyScheme>,
    pub resolutions: Vec<usize>,
    pub multipliers: Vec<f64>,
    /// Slices to write out. `None` means the problem's default: `t = 0` in 2D,
    /// the case's report time in 1D.
    pub report: Option<Vec<f64>>,
    pub repeats: usize,
    pub truth_resolution: usize,
    pub out_dir: PathBuf,
    pub write_fields: bool,
    pub seed: u64,
}

impl RunSpec {
    /// A spec with the documented defaults for everything but the essentials.
    pub fn new(problem: &str, schemes: Vec<AnyScheme>, resolutions: Vec<usize>) -> Self {
        Self {
            problem: problem.to_string(),
            params: ProblemParams::new(),
            schemes,
            resolutions,
            multipliers: vec![1.0],
            report: None,
            repeats: DEFAULT_REPEATS,
            truth_resolution: DEFAULT_TRUTH_RESOLUTION,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            write_fields: true,
            seed: 0,
        }
    }

    pub fn is_1d(&self) -> bool {
        is_1d(&self.problem)
    }

    pub fn problem_2d(&self) -> hjbmarch::Result<DynProblem64> {
        by_name::<f64>(&self.problem, &self.params)
    }

    pub fn problem_1d(&self) -> hjbmarch::Result<hjbmarch::Advection1DProblem64> {
        advection_catalog::<f64>(&self.problem)
    }

    /// Report times with the default filled in.
    pub fn report_times(&self) -> hjbmarch::Result<Vec<f64>> {
        match &self.report {
            Some(r) => Ok(r.clone()),
            None if self.is_1d() => Ok(vec![self.problem_1d()?.report_time]),
            None => Ok(vec![0.0]),
        }
    }

    /// Number of sweep rows `run` produces.
    pub fn cells(&self) -> usize {
        self.schemes.len() * self.resolutions.len() * self.multipliers.len()
    }
}

pub fn is_1d(problem: &str) -> bool {
    ADVECTION_CASES.contains(&problem)
}

fn problem_param_keys(name: &str) -> Option<&'static [&'static str]> {
    match name {
        "experiment1" | "experiment4" => Some(&[]),
        "experiment2" => Some(&["lambda"]),
        "experiment3" => Some(&["gamma"]),
        _ if is_1d(name) => Some(&[]),
        _ => None,
    }
}

const RUN_KEYS: [&str; 7] = [
    "scheme",
    "resolution",
    "r",
    "report",
    "repeats",
    "truth_resolution",
    "seed",
];
const OUTPUT_KEYS: [&str; 2] = ["dir", "fields"];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

type Section = BTreeMap<String, Entry>;

/// Splits the text into sections of `key = value` entries, remembering lines.
fn tokenize(text: &str) -> Result<BTreeMap<String, (usize, Section)>, ConfigError> {
    let mut sections: BTreeMap<String, (usize, Section)> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err_at(line, format!("malformed section header `{s}`")))?
                .trim()
                .to_ascii_lowercase();
            if !matches!(name.as_str(), "problem" | "run" | "output") {
                return Err(err_at(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                return Err(err_at(line, format!("section [{name}] appears twice")));
            }
            sections.insert(name.clone(), (line, Section::new()));
            current = Some(name);
            continue;
        }
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| err_at(line, format!("expected `key = value`, got `{s}`")))?;
        let key = key.trim().to_ascii_lowercase();
        if key.is_empty() {
            return Err(err_at(line, "empty key"));
        }
        let value = value.split(" #").next().unwrap_or("").trim().to_string();
        let section = current
            .as_ref()
            .ok_or_else(|| err_at(line, format!("key `{key}` appears before any section")))?;
        let entries = &mut sections.get_mut(section).expect("section was inserted").1;
        if let Some(prev) = entries.get(&key) {
            return Err(err_at(
                line,
                format!("key `{key}` already set on line {}", prev.line),
            ));
        }
        entries.insert(key, Entry { value, line });
    }
    Ok(sections)
}

fn parse_list<T: std::str::FromStr>(
    e: &Entry,
    key: &str,
    what: &str,
) -> Result<Vec<T>, ConfigError> {
    let items: Vec<&str> = e
        .value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(err_at(e.line, format!("`{key}` needs at least one {what}")));
    }
    items
        .into_iter()
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| err_at(e.line, format!("`{key}`: `{s}` is not a valid {what}")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(e: &Entry, key: &str, what: &str) -> Result<T, ConfigError> {
    e.value.parse::<T>().map_err(|_| {
        err_at(
            e.line,
            format!("`{key}`: `{}` is not a valid {what}", e.value),
        )
    })
}

fn parse_bool(e: &Entry, key: &str) -> Result<bool, ConfigError> {
    match e.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        v => Err(err_at(e.line, format!("`{key}`: `{v}` is not a boolean"))),
    }
}

fn check_keys(section: &str, entries: &Section, allowed: &[&str]) -> Result<(), ConfigError> {
    for (k, e) in entries {
        if !allowed.contains(&k.as_str()) {
            return Err(err_at(e.line, format!("unknown key `{k}` in [{section}]")));
        }
    }
    Ok(())
}

/// Parses configuration text. `path` is only used in messages.
pub fn parse_config_str(text: &str, path: Option<&Path>) -> Result<RunSpec, ConfigError> {
    parse_inner(text).map_err(|mut e| {
        e.path = path.map(Path::to_path_buf);
        e
    })
}

pub fn parse_config(path: &Path) -> Result<RunSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: Some(path.to_path_buf()),
        line: None,
        message: format!("cannot read: {e}"),
    })?;
    parse_config_str(&text, Some(path))
}

fn parse_inner(text: &str) -> Result<RunSpec, ConfigError> {
    let sections = tokenize(text)?;
    let empty = (0, Section::new());

    let (problem_line, problem) = sections
        .get("problem")
        .ok_or_else(|| err("missing section [problem]"))?;
    let name_entry = problem
        .get("name")
        .ok_or_else(|| err_at(*problem_line, "[problem] needs a `name`"))?;
    let name = name_entry.value.to_ascii_lowercase();
    let allowed = problem_param_keys(&name).ok_or_else(|| {
        err_at(
            name_entry.line,
            format!(
                "unknown problem `{name}` (expected experiment1-4 or one of {})",
                ADVECTION_CASES.join(", ")
            ),
        )
    })?;
    let mut params = ProblemParams::new();
    for (k, e) in problem {
        if k == "name" {
            continue;
        }
        if !allowed.contains(&k.as_str()) {
            return Err(err_at(
                e.line,
                format!("unknown key `{k}` in [problem] for `{name}`"),
            ));
        }
        params.insert(k.clone(), parse_one::<f64>(e, k, "number")?);
    }
    if !is_1d(&name) {
        by_name::<f64>(&name, &params).map_err(|e| {
            let line = params
                .keys()
                .next()
                .and_then(|k| problem.get(k))
                .map_or(name_entry.line, |e| e.line);
            err_at(line, e.to_string())
        })?;
    }

    let (run_line, run) = sections
        .get("run")
        .ok_or_else(|| err("missing section [run]"))?;
    check_keys("run", run, &RUN_KEYS)?;
    let scheme_entry = run
        .get("scheme")
        .ok_or_else(|| err_at(*run_line, "[run] needs a `scheme`"))?;
    let names: Vec<String> = parse_list(scheme_entry, "scheme", "scheme name")?;
    let schemes = names
        .iter()
        .map(|s| {
            if is_1d(&name) {
                s.parse::<Scheme1D>().map(AnyScheme::Line)
            } else {
                s.parse::<Scheme>().map(AnyScheme::Grid)
            }
            .map_err(|e| err_at(scheme_entry.line, format!("{e} for `{name}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let res_entry = run
        .get("resolution")
        .ok_or_else(|| err_at(*run_line, "[run] needs a `resolution`"))?;
    let resolutions: Vec<usize> = parse_list(res_entry, "resolution", "cell count")?;
    if let Some(bad) = resolutions.iter().find(|&&n| n < 2) {
        return Err(err_at(
            res_entry.line,
            format!("resolution {bad} is below 2 cells"),
        ));
    }

    let mut spec = RunSpec::new(&name, schemes, resolutions);
    spec.params = params;
    if let Some(e) = run.get("r") {
        spec.multipliers = parse_list(e, "r", "number")?;
        if let Some(bad) = spec
            .multipliers
            .iter()
            .find(|r| !(r.is_finite() && **r > 0.0))
        {
            return Err(err_at(
                e.line,
                format!("step multiplier {bad} must be positive"),
            ));
        }
    }
    if let Some(e) = run.get("report") {
        let times: Vec<f64> = parse_list(e, "report", "time")?;
        let horizon = if is_1d(&name) {
            f64::INFINITY
        } else {
            spec.problem_2d()
                .map_err(|x| err(x.to_string()))?
                .terminal_time()
        };
        if let Some(bad) = times
            .iter()
            .find(|t| !(t.is_finite() && **t >= 0.0 && **t <= horizon))
        {
            return Err(err_at(
                e.line,
                format!("report time {bad} is outside [0, {horizon}]"),
            ));
        }
        if is_1d(&name) && times.len() != 1 {
            return Err(err_at(e.line, "1D problems take a single report time"));
        }
        if is_1d(&name) && times[0] <= 0.0 {
            return Err(err_at(e.line, "1D report time must be positive"));
        }
        spec.report = Some(times);
    }
    if let Some(e) = run.get("repeats") {
        spec.repeats = parse_one(e, "repeats", "count")?;
        if spec.repeats == 0 {
            return Err(err_at(e.line, "`repeats` must be at least 1"));
        }
    }
    if let Some(e) = run.get("truth_resolution") {
        spec.truth_resolution = parse_one(e, "truth_resolution", "cell count")?;
    }
    if let Some(e) = run.get("seed") {
        spec.seed = parse_one(e, "seed", "integer")?;
    }

    let (_, output) = sections.get("output").unwrap_or(&empty);
    check_keys("output", output, &OUTPUT_KEYS)?;
    if let Some(e) = output.get("dir") {
        if e.value.is_empty() {
            return Err(err_at(e.line, "`dir` is empty"));
        }
        spec.out_dir = PathBuf::from(&e.value);
    }
    if let Some(e) = output.get("fields") {
        spec.write_fields = parse_bool(e, "fields")?;
    }

    let needs_truth = !spec.is_1d()
        && !spec
            .problem_2d()
            .map_err(|x| err(x.to_string()))?
            .has_analytic();
    if needs_truth {
        if let Some(bad) = spec
            .resolutions
            .iter()
            .find(|&&n| !spec.truth_resolution.is_multiple_of(n))
        {
            let line = run.get("truth_resolution").unwrap_or(res_entry).line;
            return Err(err_at(
                line,
                format!(
                    "resolution {bad} does not divide the ground-truth resolution {}",
                    spec.truth_resolution
                ),
            ));
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunSpec, ConfigError> {
        parse_config_str(text, None)
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let s = parse("[problem]\nname = experiment1\n[run]\nscheme = explicit\nresolution = 64\n")
            .unwrap();
        assert_eq!(s.multipliers, vec![1.0]);
        assert_eq!(s.report_times().unwrap(), vec![0.0]);
        assert_eq!(s.repeats, DEFAULT_REPEATS);
        assert_eq!(s.out_dir, PathBuf::from(DEFAULT_OUT_DIR));
        assert_eq!(s.cells(), 1);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let e = parse(
            "[problem]\nname = experiment1\n[run]\nscheme = explicit\nfoo = 3\nresolution = 64\n",
        )
        .unwrap_err();
        assert_eq!(e.line, Some(5));
        assert!(e.to_string().contains("`foo`"), "{e}");
        assert!(e.to_string().contains("line 5"), "{e}");
    }

    #[test]
    fn problem_parameters_flow_through() {
        let s = parse("[problem]\nname = experiment3\ngamma = 11\n[run]\nscheme = implicit\nresolution = 64, 128\nr = 1, 2, 4, 8\n")
            .unwrap();
        assert_eq!(s.params.get("gamma"), Some(&11.0));
        assert_eq!(s.cells(), 8);
        let p = s.problem_2d().unwrap();
        assert!(p.id().contains("11"), "{}", p.id());
    }

    #[test]
    fn parameter_of_another_problem_is_rejected() {
        let e = parse("[problem]\nname = experiment1\n\ngamma = 3\n[run]\nscheme = explicit\nresolution = 8\n")
            .unwrap_err();
        assert_eq!(e.line, Some(4));
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        let cases = [
            ("[problem]\nname experiment1\n", 2),
            ("name = experiment1\n", 1),
            ("[problem]\nname = experiment1\n[runs]\n", 3),
            ("[problem]\nname = experiment9\n", 2),
            ("[problem]\nname = experiment1\n[run]\nscheme = fast\nresolution = 8\n", 4),
            ("[problem]\nname = experiment1\n[run]\nscheme = explicit\nresolution = 8, x\n", 5),
            ("[problem]\nname = experiment1\n[run]\nscheme = explicit\nresolution = 8\nr = 0\n", 6),
            ("[problem]\nname = experiment1\n[run]\nscheme = explicit\nresolution = 8\nreport = 5\n", 6),
            ("[problem]\nname = experiment1\n[run]\nscheme = explicit\nscheme = implicit\n", 5),
            ("[problem]\nname = experiment2\nlambda = -1\n[run]\nscheme = explicit\nresolution = 8\n", 3),
            ("[problem]\nname = experiment1\n[run]\nscheme = explicit\nresolution = 8\n[output]\nfields = maybe\n", 7),
        ];
        for (text, line) in cases {
            let e = parse(text).unwrap_err();
            assert_eq!(e.line, Some(line), "{text:?}: {e}");
        }
    }

    #[test]
    fn missing_pieces_are_reported() {
        assert!(parse("").unwrap_err().to_string().contains("[problem]"));
        let e = parse("[problem]\nname = experiment1\n").unwrap_err();
        assert!(e.to_string().contains("[run]"));
        let e = parse("[problem]\nname = experiment1\n[run]\nscheme = explicit\n").unwrap_err();
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn advection_cases_take_1d_schemes() {
        let s = parse(
            "[problem]\nname = fig2a\n[run]\nscheme = semilagrangian, implicit\nresolution = 256\n",
        )
        .unwrap();
        assert!(s.is_1d());
        assert_eq!(
            s.schemes,
            vec![
                AnyScheme::Line(Scheme1D::SemiLagrangian),
                AnyScheme::Line(Scheme1D::Implicit)
            ]
        );
        assert_eq!(s.report_times().unwrap(), vec![1.0]);
        assert!(parse(
            "[problem]\nname = experiment1\n[run]\nscheme = semilagrangian\nresolution = 8\n"
        )
        .is_err());
    }

    #[test]
    fn ground_truth_resolution_must_nest() {
        let ok = "[problem]\nname = experiment4\n[run]\nscheme = hybrid\nresolution = 64, 128\n";
        assert!(parse(ok).is_ok());
        let e = parse("[problem]\nname = experiment4\n[run]\nscheme = hybrid\nresolution = 96\n")
            .unwrap_err();
        assert_eq!(e.line, Some(5));
    }

    #[test]
    fn comments_and_case_are_tolerated() {
        let s = parse(
            "# sweep\n[Problem]\nNAME = experiment2\nlambda = 0.8  # steep\n\n; other comment\n[run]\nscheme = Explicit\nresolution = 32\n[output]\ndir = results\nfields = no\n",
        )
        .unwrap();
        assert_eq!(s.params.get("lambda"), Some(&0.8));
        assert_eq!(s.out_dir, PathBuf::from("results"));
        assert!(!s.write_fields);
    }
}
