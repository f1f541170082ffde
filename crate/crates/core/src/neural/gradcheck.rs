//! Central finite-difference check of the analytic gradients.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::model::Model;
use crate::error::Result;
use crate::lang::Symbol;

/// Gradient norms below this are under the resolution of a central
/// difference on an f64 loss; the relative error is measured against it.
pub const NORM_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct GroupCheck {
    pub name: String,
    pub coordinates: usize,
    /// Candidates skipped because a probe crossed a ReLU kink.
    pub kinks: usize,
    /// `‖analytic − numeric‖₂ / max(‖analytic‖₂ + ‖numeric‖₂, NORM_FLOOR)` over the
    /// checked coordinates.
    pub relative_error: f64,
    pub analytic_norm: f64,
}

/// Checks up to `per_group` coordinates of every parameter tensor. Half of
/// them are drawn among coordinates with a non-zero analytic gradient (when
/// any exist), the rest uniformly.
///
/// A coordinate whose `±h` probes flip some ReLU has no derivative over the
/// probed interval, so the central difference says nothing about it. Such
/// coordinates are skipped, counted in `kinks`, and replaced by the next
/// candidate.
pub fn gradient_check<R: Rng + ?Sized>(
    model: &Model,
    batch: &[(&[Symbol], &[Vec<u8>])],
    per_group: usize,
    h: f64,
    rng: &mut R,
) -> Result<Vec<GroupCheck>> {
    let mut grads = model.params().zeros_like();
    model.loss_and_grad(batch, &mut grads)?;
    let pattern = model.relu_pattern(batch)?;
    let mut probe = model.clone();
    let mut out = Vec::new();
    for (g, name) in model.params().names().iter().enumerate() {
        let analytic = &grads.get(g).data;
        let size = analytic.len();
        let mut nonzero: Vec<usize> = (0..size).filter(|&i| analytic[i] != 0.0).collect();
        nonzero.shuffle(rng);
        nonzero.truncate(per_group / 2);
        let mut rest: Vec<usize> = (0..size).filter(|i| !nonzero.contains(i)).collect();
        rest.shuffle(rng);

        let (mut checked, mut kinks) = (0, 0);
        let (mut diff2, mut a2, mut n2) = (0.0, 0.0, 0.0);
        for c in nonzero.into_iter().chain(rest) {
            if checked == per_group {
                break;
            }
            let orig = model.params().get(g).data[c];
            probe.params_mut().get_mut(g).data[c] = orig + h;
            let plus = probe.loss(batch)?;
            let mut kink = probe.relu_pattern(batch)? != pattern;
            probe.params_mut().get_mut(g).data[c] = orig - h;
            let minus = probe.loss(batch)?;
            kink |= probe.relu_pattern(batch)? != pattern;
            probe.params_mut().get_mut(g).data[c] = orig;
            if kink {
                kinks += 1;
                continue;
            }
            checked += 1;
            let numeric = (plus - minus) / (2.0 * h);
            diff2 += (analytic[c] - numeric).powi(2);
            a2 += analytic[c].powi(2);
            n2 += numeric.powi(2);
        }
        let denom = (a2.sqrt() + n2.sqrt()).max(NORM_FLOOR);
        out.push(GroupCheck {
            name: name.clone(),
            coordinates: checked,
            kinks,
            relative_error: diff2.sqrt() / denom,
            analytic_norm: a2.sqrt(),
        });
    }
    Ok(out)
}
