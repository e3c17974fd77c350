//! A 2×3 gridworld with a trap.
//!
//! ```text
//!   +-----+------+-----+
//!   |  s  | trap |     |     row 1 (top)
//!   +-----+------+-----+
//!   |     |      |  g  |     row 0
//!   +-----+------+-----+
//! ```
//!
//! Each diagonal action moves in one of its two cardinal components with
//! probability 0.4 each and stays put with probability 0.2. A move into a
//! wall stays put. The trap is absorbing. The objective is `G F s & G F g`.

use crate::acceptance::AcceptanceCondition;
use crate::automata::automaton::{gf_s_and_gf_g, OmegaAutomaton};
use crate::mdp::Mdp;

pub const WIDTH: usize = 3;
pub const HEIGHT: usize = 2;
pub const ACTIONS: [&str; 4] = ["NE", "NW", "SE", "SW"];
pub const START: (usize, usize) = (0, 1);
pub const TRAP: (usize, usize) = (1, 1);
pub const GOAL: (usize, usize) = (2, 0);
pub const MOVE_PROBABILITY: f64 = 0.4;
pub const STAY_PROBABILITY: f64 = 0.2;

/// Cells are numbered row-major from the top-left.
pub fn cell(x: usize, y: usize) -> usize {
    (HEIGHT - 1 - y) * WIDTH + x
}

fn coords(c: usize) -> (usize, usize) {
    (c % WIDTH, HEIGHT - 1 - c / WIDTH)
}

fn shift(c: usize, dx: i32, dy: i32) -> usize {
    let (x, y) = coords(c);
    let (nx, ny) = (x as i32 + dx, y as i32 + dy);
    if nx < 0 || ny < 0 || nx >= WIDTH as i32 || ny >= HEIGHT as i32 {
        c
    } else {
        cell(nx as usize, ny as usize)
    }
}

pub fn mdp() -> Mdp {
    let n = WIDTH * HEIGHT;
    let start = cell(START.0, START.1);
    let mut m = Mdp::new(n, ACTIONS.len(), start, AcceptanceCondition::buchi([]));
    m.set_action_names(ACTIONS.iter().map(|a| a.to_string()).collect());
    let mut names = Vec::new();
    for c in 0..n {
        let (x, y) = coords(c);
        names.push(match (x, y) {
            START => "s".to_string(),
            TRAP => "trap".to_string(),
            GOAL => "g".to_string(),
            _ => format!("c{x}{y}"),
        });
    }
    m.set_state_names(names);
    m.set_labels(start, ["s"]);
    m.set_labels(cell(GOAL.0, GOAL.1), ["g"]);
    // (vertical, horizontal) components of NE, NW, SE, SW
    let dirs = [((0, 1), (1, 0)), ((0, 1), (-1, 0)), ((0, -1), (1, 0)), ((0, -1), (-1, 0))];
    for c in 0..n {
        for (a, &(v, h)) in dirs.iter().enumerate() {
            if coords(c) == TRAP {
                m.add_transition(c, a, c, 1.0);
                continue;
            }
            m.add_transition(c, a, shift(c, v.0, v.1), MOVE_PROBABILITY);
            m.add_transition(c, a, shift(c, h.0, h.1), MOVE_PROBABILITY);
            m.add_transition(c, a, c, STAY_PROBABILITY);
        }
    }
    m
}

pub fn automaton() -> OmegaAutomaton {
    gf_s_and_gf_g()
}
