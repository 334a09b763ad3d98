//! Small hand-built instances used throughout tests, docs and the CLI.

use crate::admg::Admg;
use crate::scm::{Mechanism, Scm};

/// Four vertices with every kind of confounding interaction:
/// `V3 -> V1 -> Y`, `V2 -> Y`, and latents `V1<->V2`, `V1<->V3`,
/// `V2<->Y`, `V3<->Y`.
pub fn four_vertex_graph() -> Admg {
    Admg::new(
        &["V1", "V2", "V3", "Y"],
        "Y",
        &[("V3", "V1"), ("V1", "Y"), ("V2", "Y")],
        &[("V1", "V2"), ("V1", "V3"), ("V2", "Y"), ("V3", "Y")],
    )
    .expect("valid graph")
}

/// `X1 = U1`, `X2 = X1 xor U2`, `Y = X2 xor U2` with `U1, U2 ~ Ber(0.5)`
/// and `U2` the latent shared by `X2` and `Y`.
///
/// `E[Y | do(X1 = 1)] = 1` while every other arm pays 0.5 or less.
pub fn xor_scm() -> Scm {
    let g = Admg::new(
        &["X1", "X2", "Y"],
        "Y",
        &[("X1", "X2"), ("X2", "Y")],
        &[("X2", "Y")],
    )
    .expect("valid graph");
    // X1 reads (noise); X2 and Y read (parent, noise, U2)
    let x1 = Mechanism { table: vec![0, 1] };
    let xor = Mechanism {
        table: vec![0, 1, 1, 0],
    };
    Scm::from_parts(
        g,
        vec![vec![0.5, 0.5], vec![1.0], vec![1.0]],
        vec![vec![0.5, 0.5]],
        vec![x1, xor.clone(), xor],
    )
    .expect("consistent parts")
}
