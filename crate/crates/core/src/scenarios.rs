//! Bundled scenario configurations, one per reproduced figure.

use crate::config::{ConfigError, ScenarioConfig};

const BUNDLED: [(&str, &str); 9] = [
    ("fig2_case1", include_str!("../scenarios/fig2_case1.json")),
    (
        "fig2_single_slope",
        include_str!("../scenarios/fig2_single_slope.json"),
    ),
    (
        "fig3_case1_L8.5",
        include_str!("../scenarios/fig3_case1_L8.5.json"),
    ),
    (
        "fig4_L_sweep",
        include_str!("../scenarios/fig4_L_sweep.json"),
    ),
    (
        "fig6_antenna_L8.5",
        include_str!("../scenarios/fig6_antenna_L8.5.json"),
    ),
    (
        "fig6_baseline_L8.5",
        include_str!("../scenarios/fig6_baseline_L8.5.json"),
    ),
    (
        "fig7_rician_L8.5",
        include_str!("../scenarios/fig7_rician_L8.5.json"),
    ),
    (
        "fig8_case2_L8.5",
        include_str!("../scenarios/fig8_case2_L8.5.json"),
    ),
    (
        "fig8_approx_case2_L8.5",
        include_str!("../scenarios/fig8_approx_case2_L8.5.json"),
    ),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn raw(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

pub fn load(name: &str) -> Option<Result<ScenarioConfig, ConfigError>> {
    raw(name).map(ScenarioConfig::from_json)
}
