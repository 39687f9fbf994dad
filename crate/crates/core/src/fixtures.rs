//! The example games from the literature shipped with the crate.

use crate::format::{parse_game, Game};
use crate::model::{Arena, Mechanism, Objective};

pub const FIG1A: &str = include_str!("../fixtures/fig1a.json");
pub const FIG1C: &str = include_str!("../fixtures/fig1c.json");
pub const FIG1C_BUCHI: &str = include_str!("../fixtures/fig1c_buchi.json");
pub const FIG3: &str = include_str!("../fixtures/fig3.json");
pub const FIG4: &str = include_str!("../fixtures/fig4.json");
pub const FIG6: &str = include_str!("../fixtures/fig6.json");
/// Finite-horizon reachability thresholds of [`FIG1A`] for `t = 0..=6`.
pub const FIG5_TABLE: &str = include_str!("../fixtures/fig5_table.csv");

pub const ALL: [(&str, &str); 6] = [
    ("fig1a", FIG1A),
    ("fig1c", FIG1C),
    ("fig1c_buchi", FIG1C_BUCHI),
    ("fig3", FIG3),
    ("fig4", FIG4),
    ("fig6", FIG6),
];

pub fn game(name: &str) -> Option<Game> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_game(text).expect("bundled fixture is valid"))
}

fn parts(text: &str) -> (Arena, Mechanism, Objective) {
    let g = parse_game(text).expect("bundled fixture is valid");
    (g.arena, g.mechanism, g.objective)
}

pub fn fig1a() -> (Arena, Mechanism, Objective) {
    parts(FIG1A)
}

pub fn fig1c() -> (Arena, Mechanism, Objective) {
    parts(FIG1C)
}

/// The arena of `fig1c` with `t -> b` replacing the self-loop at `t`.
pub fn fig1c_buchi() -> (Arena, Mechanism, Objective) {
    parts(FIG1C_BUCHI)
}

pub fn fig3() -> (Arena, Mechanism, Objective) {
    parts(FIG3)
}

pub fn fig4() -> (Arena, Mechanism, Objective) {
    parts(FIG4)
}

/// Explicit self-loops on the sinks `f` and `g`.
pub fn fig6() -> (Arena, Mechanism, Objective) {
    parts(FIG6)
}
