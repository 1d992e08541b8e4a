//! Scenarios compiled into the binary.

pub const SCENARIOS: &[(&str, &str)] = &[
    ("bgw-active-attack", include_str!("../../../scenarios/bgw-active-attack.toml")),
    ("bgw-hamming-demo", include_str!("../../../scenarios/bgw-hamming-demo.toml")),
    ("bgw-passive", include_str!("../../../scenarios/bgw-passive.toml")),
    ("bgw-quadratic-demo", include_str!("../../../scenarios/bgw-quadratic-demo.toml")),
    ("bgw-track-xbar", include_str!("../../../scenarios/bgw-track-xbar.toml")),
    ("hamdist-alice-zero-scalar", include_str!("../../../scenarios/hamdist-alice-zero-scalar.toml")),
    ("hamdist-bob-substitution", include_str!("../../../scenarios/hamdist-bob-substitution.toml")),
    ("hamdist-charlie-view", include_str!("../../../scenarios/hamdist-charlie-view.toml")),
    ("hamdist-identity-permutation", include_str!("../../../scenarios/hamdist-identity-permutation.toml")),
    ("hamdist-passive", include_str!("../../../scenarios/hamdist-passive.toml")),
];

/// Looks a built-in scenario up by name, with or without `.toml`.
pub fn find(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".toml").unwrap_or(name);
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
