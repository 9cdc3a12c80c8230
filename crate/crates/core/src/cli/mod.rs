//! Scenario files, the end-to-end pipeline and its report.

mod config;
mod report;
mod run;

pub use config::{
    parse_config, parse_config_file, parse_config_in, ConfigError, ConfigErrors, Family, LambdaSchedule,
    ModelConfig, PotentialSource, ScenarioConfig, Tolerances,
};
pub use report::{Check, ConditionFlag, CriticalTriple, RunReport, SolveSummary};
pub use run::{resolve_output_dir, run_scenario, OUTPUT_DIR_ENV};

/// Built-in scenarios as `(name, summary, config text)`.
pub const BUILTINS: [(&str, &str, &str); 5] = [
    (
        "mechanical-a1",
        "V = cos 2πx, a ≡ 1: maximal family converges to u0",
        include_str!("../../scenarios/mechanical-a1.conf"),
    ),
    (
        "sign-changing-dichotomy",
        "a = cos 2πx + 1/2: maximal family converges, constructed family diverges to -∞",
        include_str!("../../scenarios/sign-changing-dichotomy.conf"),
    ),
    (
        "sin-contact-trichotomy",
        "G = sin u + |p|²: constants 0, ±π/λ converge, diverge up, diverge down",
        include_str!("../../scenarios/sin-contact-trichotomy.conf"),
    ),
    (
        "two-wells",
        "V = cos 4πx: two Aubry points, u0 from the fractional LP",
        include_str!("../../scenarios/two-wells.conf"),
    ),
    (
        "mechanical-2d",
        "V = cos 2πx + cos 2πy on the 2-torus, a ≡ 1",
        include_str!("../../scenarios/mechanical-2d.conf"),
    ),
];

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _, _)| *n == name).map(|(_, _, text)| *text)
}
