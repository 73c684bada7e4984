//! Alternating least-squares initialisation without a prior.
//!
//! Solves `min ½‖UV^H − Z‖_F²` subject to `P_Ω(H†(Z)) = P_Ω(x)` by cycling
//!
//! ```text
//! U ← Z V (V^H V)^†
//! V ← Z^H U (U^H U)^†
//! Z ← UV^H + H(P_Ω(x − H†(UV^H)))
//! ```
//!
//! The last step shifts each observed anti-diagonal of `UV^H` so that its
//! average equals the observation and leaves every other entry alone, which
//! is the least-change way of restoring the constraint.

use crate::error::{Error, Result};
use crate::hankel::HankelShape;
use crate::linalg::pinv;
use crate::rng::{complex_normal, rng_from_seed};
use crate::scalar::{cz, CMatrix, Real};
use crate::signal::{ComplexSignal, SampleSet};

pub fn lmafit_init<T: Real>(
    obs: &ComplexSignal<T>,
    omega: &SampleSet,
    shape: &HankelShape,
    rank: usize,
    iters: usize,
    seed: u64,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let max = shape.rows().min(shape.cols());
    if rank == 0 || rank > max {
        return Err(Error::RankTooLarge { rank, max });
    }
    obs.check_dims(shape.dims())?;
    let observed = omega.indicator();
    let masked: Vec<_> =
        obs.values().iter().zip(&observed).map(|(v, &o)| if o { *v } else { cz() }).collect();
    let mut z = shape.lift_values(&masked);

    let mut rng = rng_from_seed(seed);
    let mut v = CMatrix::from_fn(shape.cols(), rank, |_, _| complex_normal::<T>(&mut rng));
    let mut u = CMatrix::zeros(shape.rows(), rank);
    let tol = T::machine_eps() * T::lit(64.0);
    for _ in 0..iters.max(1) {
        u = &z * &v * pinv(&(v.adjoint() * &v), tol);
        v = z.adjoint() * &u * pinv(&(u.adjoint() * &u), tol);
        let x = &u * v.adjoint();
        let means = shape.anti_diagonal_means(&x);
        let shift: Vec<_> = means
            .iter()
            .zip(obs.values())
            .zip(&observed)
            .map(|((m, o), &seen)| if seen { *o - *m } else { cz() })
            .collect();
        z = x + shape.lift_values(&shift);
    }
    Ok((u, v))
}
