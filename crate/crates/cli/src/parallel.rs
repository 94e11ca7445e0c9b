//! Parallel grid fills.
//!
//! The thread count comes from `LOEWNER_THREADS`; unset or `0` means the
//! available parallelism and `1` runs everything on the calling thread.
//! Every task gets its own clone of the evaluator, so trajectory caches are
//! never shared, and results are gathered in grid order.

use loewner_core::becker::{assemble_extension, extension_point, extension_precheck, seam_point, BoundarySettings, QCExtensionGrid};
use loewner_core::chains::ChainEvaluator;
use loewner_core::evolution::EvolutionTrajectory;
use loewner_core::geometry::{angle, PolarGrid};
use rayon::prelude::*;

use crate::CliError;

pub const THREADS_ENV: &str = "LOEWNER_THREADS";

pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            let n: usize = v.trim().parse().map_err(|_| CliError::config(THREADS_ENV, format!("`{v}` is not a thread count")))?;
            Ok(if n == 0 { default_threads() } else { n })
        }
        _ => Ok(default_threads()),
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Maps `f` over `0..len`. Each task builds its own state with `init`, so
/// non-`Sync` evaluators are never shared. The first error in index order
/// wins, whatever the schedule.
pub fn map_indexed<S, T, I, F>(threads: usize, len: usize, init: I, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    I: Fn() -> loewner_core::Result<S> + Sync + Send,
    F: Fn(&S, usize) -> loewner_core::Result<T> + Sync + Send,
{
    let results: Vec<loewner_core::Result<T>> = if threads <= 1 {
        let state = init()?;
        (0..len).map(|i| f(&state, i)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Format(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..len)
                .into_par_iter()
                .map_init(&init, |state, i| match state {
                    Ok(s) => f(s, i),
                    Err(e) => Err(e.clone()),
                })
                .collect()
        })
    };
    results.into_iter().collect::<loewner_core::Result<Vec<T>>>().map_err(CliError::from)
}

/// A fresh evaluator with the same field and settings as `chain`.
pub fn chain_factory(chain: &ChainEvaluator) -> impl Fn() -> loewner_core::Result<ChainEvaluator> + Sync + Send {
    let field = chain.trajectory().field().clone();
    let solver = *chain.trajectory().settings();
    let settings = *chain.settings();
    let mode = chain.mode();
    move || ChainEvaluator::new(EvolutionTrajectory::new(field.clone(), solver)?, settings, mode)
}

/// [`loewner_core::becker::becker_extend`] with the points spread over threads.
pub fn becker_extend(
    chain: &ChainEvaluator,
    grid: &PolarGrid,
    settings: &BoundarySettings,
    threads: usize,
) -> Result<QCExtensionGrid, CliError> {
    extension_precheck(chain, grid, settings)?;
    let n = grid.angular_count();
    let radii = grid.radii();
    let make = chain_factory(chain);
    let points = map_indexed(threads, grid.len(), &make, |c, idx| extension_point(c, radii[idx / n], angle(idx % n, n), settings))?;
    let seam = map_indexed(threads, n, &make, |c, j| seam_point(c, angle(j, n), settings))?;
    Ok(assemble_extension(grid.clone(), points, seam, settings)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use loewner_core::chains::ChainSettings;
    use loewner_core::evolution::SolverSettings;
    use loewner_core::herglotz::HerglotzSpec;

    #[test]
    fn parallel_fill_matches_serial_bit_for_bit() {
        let chain = ChainEvaluator::radial(HerglotzSpec::koebe(0.4).unwrap(), SolverSettings::default(), ChainSettings::default()).unwrap();
        let grid = PolarGrid::new(vec![0.5, 1.5, 2.0], 16).unwrap();
        let settings = BoundarySettings::default();
        let serial = becker_extend(&chain, &grid, &settings, 1).unwrap();
        let parallel = becker_extend(&chain, &grid, &settings, 4).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial, loewner_core::becker::becker_extend(&chain, &grid, &settings).unwrap());
    }

    #[test]
    fn first_error_in_index_order_wins() {
        let err = map_indexed(4, 100, || Ok(()), |_, i| {
            if i >= 10 {
                Err(loewner_core::Error::Extrapolation { t: i as f64 })
            } else {
                Ok(i)
            }
        })
        .unwrap_err();
        assert!(matches!(err, CliError::Core(loewner_core::Error::Extrapolation { t }) if t == 10.0));
    }
}
