use crate::diagnostics::{DiagnosticsRow, RowBuilder};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial::{sample_initial, InitialData};
use crate::lagrangian::{sampler, ParticleSet};
use crate::params::PhysParams;
use crate::state::FluidState;

use super::{SchemeConfig, Solver};

/// Receives every diagnostics row as it is produced, with the particle positions
/// at the same instant.
pub trait Sink {
    fn record(&mut self, row: &DiagnosticsRow, particles: &ParticleSet);
}

impl<F: FnMut(&DiagnosticsRow, &ParticleSet)> Sink for F {
    fn record(&mut self, row: &DiagnosticsRow, particles: &ParticleSet) {
        self(row, particles)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub rows: Vec<DiagnosticsRow>,
    /// Particle positions at each row time.
    pub tracks: Vec<(f64, Vec<f64>)>,
    /// Step sizes in order.
    pub dts: Vec<f64>,
    /// Clipped mass summed over all steps.
    pub clipped_mass: f64,
    /// `(particle, time)` for every particle that left the domain.
    pub escapes: Vec<(usize, f64)>,
    /// Weighted momentum removed from cells below the cutoff up to each row time.
    pub vacuum_moment: Vec<f64>,
}

impl TimeSeries {
    pub fn steps(&self) -> usize {
        self.dts.len()
    }

    pub fn first(&self) -> Option<&DiagnosticsRow> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&DiagnosticsRow> {
        self.rows.last()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Completed,
    Aborted(Error),
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub series: TimeSeries,
    pub outcome: RunOutcome,
    /// The last state that passed every check.
    pub final_state: FluidState,
    pub particles: ParticleSet,
    /// Absolute vacuum cutoff used for velocities and the support.
    pub cutoff: f64,
}

impl RunResult {
    pub fn completed(&self) -> bool {
        self.outcome == RunOutcome::Completed
    }
}

/// Evolves `initial` to `cfg.t_end`.
///
/// Errors are returned only for inconsistent inputs; a failure during time
/// stepping ends the run with [`RunOutcome::Aborted`] and keeps everything
/// recorded up to the last valid state.
pub fn run(
    initial: &InitialData,
    params: &PhysParams,
    grid: &Grid,
    cfg: &SchemeConfig,
    sinks: &mut [&mut dyn Sink],
) -> Result<RunResult> {
    let mut state = sample_initial(initial, grid)?;
    let solver = Solver::new(*params, grid, *cfg, &state)?;
    let mut builder = RowBuilder::new(*params, grid, initial.radius, solver.cutoff());
    let mut particles = ParticleSet::standard(grid.geometry(), initial.radius, grid.extent())?;
    let mut series = TimeSeries::default();

    let mut vacuum_moment = 0.0;
    let emit = |row: DiagnosticsRow,
                particles: &ParticleSet,
                vacuum_moment: f64,
                series: &mut TimeSeries,
                sinks: &mut [&mut dyn Sink]| {
        for sink in sinks.iter_mut() {
            sink.record(&row, particles);
        }
        series.rows.push(row);
        series.tracks.push((row.t, particles.positions().to_vec()));
        series.vacuum_moment.push(vacuum_moment);
    };
    emit(builder.observe(&state), &particles, 0.0, &mut series, sinks);

    let t_end = cfg.t_end;
    let mut outcome = RunOutcome::Completed;
    let mut u_old = solver.velocity(&state);
    while state.t < t_end {
        let mut dt = match solver.cfl_dt(&state) {
            Ok(dt) => dt,
            Err(e) => {
                outcome = RunOutcome::Aborted(e);
                break;
            }
        };
        let last = state.t + dt >= t_end;
        if last {
            dt = t_end - state.t;
        }
        let mut next = match solver.step_with_dt(&state, dt) {
            Ok((next, report)) => {
                series.clipped_mass += report.clipped_mass;
                vacuum_moment += report.vacuum_moment;
                next
            }
            Err(e) => {
                outcome = RunOutcome::Aborted(e);
                break;
            }
        };
        if last {
            next.t = t_end;
        }
        if let Err(e) = next.check_finite() {
            outcome = RunOutcome::Aborted(e);
            break;
        }
        let u_new = solver.velocity(&next);
        let left = particles.advect(state.t, dt, grid.extent(), sampler(grid, &u_old, &u_new));
        series.escapes.extend(left.into_iter().map(|i| (i, next.t)));
        series.dts.push(dt);
        state = next;
        u_old = u_new;
        if series.dts.len() % cfg.output_every == 0 || last {
            emit(
                builder.observe(&state),
                &particles,
                vacuum_moment,
                &mut series,
                sinks,
            );
        }
    }
    // An aborted run still reports its last valid state.
    if outcome != RunOutcome::Completed && series.rows.last().map(|r| r.t) != Some(state.t) {
        emit(
            builder.observe(&state),
            &particles,
            vacuum_moment,
            &mut series,
            sinks,
        );
    }

    Ok(RunResult {
        series,
        outcome,
        final_state: state,
        particles,
        cutoff: solver.cutoff(),
    })
}
