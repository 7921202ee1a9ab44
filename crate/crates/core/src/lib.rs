//! Online POMDP trajectory planning for an automated vehicle crossing an
//! unsignalized intersection.
//!
//! * [`pomdp`]: generative model contract, particle beliefs, Bayes update.
//! * [`abt`]: anytime belief-tree search with UCB and tree reuse.
//! * [`topology`]: lane maps, entrance→exit paths, arc-length splines.
//! * [`domain`]: the intersection POMDP (point-mass and IDM dynamics,
//!   observation model, intention inference, reward, collisions).
//! * [`sim`]: closed-loop replay of recorded traffic around a planned ego.
//! * [`sweep`]: seeded parameter studies and CSV/SVG reports.

pub mod abt;
pub mod domain;
pub mod pomdp;
pub mod sim;
pub mod sweep;
pub mod topology;
