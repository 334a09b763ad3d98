use super::tally::Frequencies;
use crate::admg::VarId;

/// Ancestrality test: does intervening on the cause move the marginal of
/// `target` by more than `gap / 2`?
///
/// `interventional[x]` holds data under `do(cause = x, w)`, `base` under
/// `do(w)`.
pub fn ancestrality_test<D: Frequencies>(
    base: &D,
    interventional: &[D],
    target: VarId,
    target_domain: u32,
    gap: f64,
) -> bool {
    interventional.iter().any(|int| {
        (0..target_domain).any(|y| {
            let p = base.frequency((target, y), None).value;
            let q = int.frequency((target, y), None).value;
            (p - q).abs() > gap / 2.0
        })
    })
}

/// Do-see test: does `P(effect | do(cause = x), do(w))` differ from
/// `P(effect | cause = x, do(w))` by more than `gap / 2` for some values?
/// Conditionals without support are skipped.
pub fn latent_test<D: Frequencies>(
    interventional: &[D],
    base: &D,
    cause: VarId,
    effect: VarId,
    effect_domain: u32,
    gap: f64,
) -> bool {
    interventional.iter().enumerate().any(|(x, int)| {
        (0..effect_domain).any(|y| {
            let seen = base.frequency((effect, y), Some((cause, x as u32)));
            if seen.support == 0 {
                return false;
            }
            let done = int.frequency((effect, y), None).value;
            (done - seen.value).abs() > gap / 2.0
        })
    })
}
