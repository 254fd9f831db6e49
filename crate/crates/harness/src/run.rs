//! Runs resolved experiments through the analysis engines and the
//! simulator and turns the results into rows.

use mgrit_modes::advection::AdvectionModel;
use mgrit_modes::elasticity::ElasticityModel;
use mgrit_modes::lfa::{self, LfaSweep, SingularPolicy};
use mgrit_modes::mgrit::{self, ExperimentSpec, Guess, InitialCondition};
use mgrit_modes::ra;
use mgrit_modes::sama::{self, NormKind, SamaVariant, Scope};
use mgrit_modes::sweep::{PredictionSeries, SweepMap};
use mgrit_modes::{Cycle, Frequency, Relaxation, SymbolSource};

use crate::average::{average_reduction, Average};
use crate::config::{Experiment, GuessKind, MethodKind, Problem};
use crate::csv::ResultRow;

/// Which methods of an experiment a subcommand runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Analysis,
    Simulation,
    All,
}

impl Selection {
    fn includes(self, m: MethodKind) -> bool {
        match self {
            Selection::Analysis => m.is_analysis(),
            Selection::Simulation => !m.is_analysis(),
            Selection::All => true,
        }
    }
}

/// Rows of a run and whether any engine failed.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub rows: Vec<ResultRow>,
    pub failed: bool,
}

pub fn scope_name(s: Scope) -> &'static str {
    match s {
        Scope::Full => "full",
        Scope::CPoints => "cpoints",
    }
}

pub fn variant_name(v: SamaVariant) -> String {
    let norm = match v.norm {
        NormKind::Exact2 => "exact2",
        NormKind::OneInfBound => "oneinf",
    };
    format!("{}-{norm}", scope_name(v.scope))
}

pub fn relax_name(r: Relaxation) -> &'static str {
    match r {
        Relaxation::F => "F",
        Relaxation::FCF => "FCF",
    }
}

pub fn cycle_name(c: Cycle) -> &'static str {
    match c {
        Cycle::TwoLevel => "two-level",
        Cycle::ThreeLevelV => "v-cycle",
        Cycle::ThreeLevelF => "f-cycle",
    }
}

fn source(e: &Experiment) -> Box<dyn SymbolSource> {
    match e.problem {
        Problem::Advection(p) => Box::new(AdvectionModel::new(p)),
        Problem::Elasticity(p) => Box::new(ElasticityModel::new(p)),
    }
}

struct RowBuilder<'a> {
    e: &'a Experiment,
    relax: Relaxation,
    method: &'static str,
    variant: String,
    notes: Vec<(String, String)>,
}

impl RowBuilder<'_> {
    fn row(&self, k: usize, value: Option<f64>, at: Option<Frequency>) -> ResultRow {
        let mut annotations = self.e.annotations.clone();
        annotations.extend(self.notes.iter().cloned());
        ResultRow {
            problem: self.e.problem.name().into(),
            method: self.method.into(),
            variant: self.variant.clone(),
            relax: relax_name(self.relax).into(),
            levels: self.e.levels(),
            cycle: cycle_name(self.e.cycle).into(),
            m: self.e.m,
            m2: self.e.m2,
            nx: self.e.nx,
            nt: self.e.nt,
            k,
            value,
            theta_x: at.map(|f| f.theta_x),
            theta_y: at.and_then(|f| f.theta_y),
            omega0: at.and_then(|f| f.omega0),
            annotations,
        }
    }

    fn series(&self, s: &PredictionSeries) -> Vec<ResultRow> {
        s.points
            .iter()
            .map(|p| self.row(p.k, Some(p.value), Some(p.argmax)))
            .collect()
    }

    fn map(&self, map: &SweepMap) -> Vec<ResultRow> {
        let mut out = Vec::new();
        for mode in &map.modes {
            for (i, v) in mode.values.iter().enumerate() {
                out.push(self.row(i + 1, Some(*v), Some(mode.frequency)));
            }
        }
        out
    }

    fn error(&self, message: String) -> ResultRow {
        let mut r = self.row(1, None, None);
        r.annotations.push(("error".into(), message));
        r
    }
}

fn note(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

/// Runs one experiment. Engine failures become error rows.
pub fn run_experiment(e: &Experiment, sel: Selection) -> Output {
    let mut out = Output::default();
    let src = source(e);
    let h = e.hierarchy();
    for &relax in &e.relax {
        let method = e.method(relax);
        for &kind in e.methods.iter().filter(|m| sel.includes(**m)) {
            match kind {
                MethodKind::Lfa => {
                    let mut b = RowBuilder {
                        e,
                        relax,
                        method: "lfa",
                        variant: "full-exact2".into(),
                        notes: Vec::new(),
                    };
                    let sweep = LfaSweep {
                        k_max: e.k_max,
                        h_theta: e.h_theta,
                        h_omega: e.h_omega,
                        singular: SingularPolicy::Exclude,
                    };
                    match lfa::lfa_map(src.as_ref(), &h, &method, &sweep) {
                        Ok(map) => {
                            if !map.excluded.is_empty() {
                                b.notes.push(note("excluded", map.excluded.len()));
                            }
                            out.rows.extend(b.series(&map.reduce()));
                            if e.emit_argmax_map {
                                b.method = "lfa-mode";
                                out.rows.extend(b.map(&map));
                            }
                        }
                        Err(err) => {
                            out.failed = true;
                            out.rows.push(b.error(err.to_string()));
                        }
                    }
                }
                MethodKind::Sama => {
                    let gated = e.sama_variants();
                    let variants: Vec<SamaVariant> = gated.iter().map(|(v, _)| *v).collect();
                    let result = sama::sama_maps_on(
                        src.as_ref(),
                        &mgrit_modes::sweep::spatial_grid(src.dimension(), e.h_theta).expect("validated"),
                        &h,
                        &method,
                        &variants,
                        e.k_max,
                    );
                    for (i, (v, was_gated)) in gated.iter().enumerate() {
                        let mut b = RowBuilder {
                            e,
                            relax,
                            method: "sama",
                            variant: variant_name(*v),
                            notes: Vec::new(),
                        };
                        if *was_gated {
                            b.notes.push(note("gated", "exact2"));
                        }
                        match &result {
                            Ok(maps) => {
                                out.rows.extend(b.series(&maps[i].reduce()));
                                if e.emit_argmax_map {
                                    b.method = "sama-mode";
                                    out.rows.extend(b.map(&maps[i]));
                                }
                            }
                            Err(err) => {
                                out.failed = true;
                                out.rows.push(b.error(err.to_string()));
                            }
                        }
                    }
                }
                MethodKind::Ra => {
                    for &scope in &e.ra_scopes {
                        let mut b = RowBuilder {
                            e,
                            relax,
                            method: "ra",
                            variant: format!("{}-bound", scope_name(scope)),
                            notes: Vec::new(),
                        };
                        match ra::ra_map(src.as_ref(), &h, relax, scope, e.k_max, e.h_theta) {
                            Ok(sweep) => {
                                let d = &sweep.diagnostics;
                                b.notes.push(note("kappa_max", format!("{:.6e}", d.kappa_max)));
                                b.notes.push(note(
                                    "simultaneity_residual",
                                    format!("{:.6e}", d.simultaneity_residual_max),
                                ));
                                if d.non_simultaneous > 0 {
                                    b.notes.push(note("non_simultaneous", d.non_simultaneous));
                                }
                                if !sweep.map.excluded.is_empty() {
                                    b.notes.push(note("excluded", sweep.map.excluded.len()));
                                }
                                out.rows.extend(b.series(&sweep.map.reduce()));
                                if e.emit_argmax_map {
                                    b.method = "ra-mode";
                                    out.rows.extend(b.map(&sweep.map));
                                }
                            }
                            Err(err) => {
                                out.failed = true;
                                out.rows.push(b.error(err.to_string()));
                            }
                        }
                    }
                }
                MethodKind::Measured => measured(e, relax, &mut out),
            }
        }
    }
    out
}

fn measured(e: &Experiment, relax: Relaxation, out: &mut Output) {
    let Problem::Advection(p) = e.problem else {
        unreachable!("validated: measured runs need advection")
    };
    let h = e.hierarchy();
    for &g in &e.guesses {
        let guess = match g {
            GuessKind::Random => Guess::Random { seed: e.seed },
            GuessKind::Zero => Guess::Zero,
        };
        let spec = ExperimentSpec {
            initial_condition: InitialCondition::CosineSum(e.initial_terms()),
            guess,
            iters: e.k_max,
            error_norm_scope: e.error_scope,
        };
        let mut b = RowBuilder {
            e,
            relax,
            method: "measured",
            variant: format!("{}-reduction", g.name()),
            notes: vec![note("seed", e.seed)],
        };
        match mgrit::run_experiment(&p, &h, &e.method(relax), &spec) {
            Ok(m) => {
                if let Some(k) = m.converged_at {
                    b.notes.push(note("converged_at", k));
                }
                for (i, v) in m.reductions.iter().enumerate() {
                    out.rows.push(b.row(i + 1, Some(*v), None));
                }
                b.variant = format!("{}-factor", g.name());
                for (i, v) in m.factors.iter().enumerate() {
                    out.rows.push(b.row(i + 1, Some(*v), None));
                }
            }
            Err(err) => {
                out.failed = true;
                out.rows.push(b.error(err.to_string()));
            }
        }
    }
}

/// Groups rows into series (everything but `k`, value and position equal)
/// and emits one average-reduction row per series over `window`.
pub fn averages(rows: &[ResultRow], window: (usize, usize)) -> Vec<ResultRow> {
    let mut groups: Vec<(ResultRow, Vec<f64>)> = Vec::new();
    for r in rows.iter().filter(|r| !r.is_error() && !r.method.ends_with("-mode")) {
        let Some(v) = r.value else { continue };
        let key = |x: &ResultRow| {
            (
                x.problem.clone(),
                x.method.clone(),
                x.variant.clone(),
                x.relax.clone(),
                x.cycle.clone(),
                x.m,
                x.m2,
                x.nt,
                x.annotations.clone(),
            )
        };
        match groups.iter_mut().find(|(g, _)| key(g) == key(r)) {
            Some((_, vals)) if vals.len() + 1 == r.k => vals.push(v),
            Some(_) => {}
            None if r.k == 1 => groups.push((r.clone(), vec![v])),
            None => {}
        }
    }
    let mut out = Vec::new();
    for (first, vals) in groups {
        let mut row = first.clone();
        row.method = format!("{}-avg", first.method);
        row.k = window.1;
        row.theta_x = None;
        row.theta_y = None;
        row.omega0 = None;
        row.annotations
            .push(note("window", format!("{}..{}", window.0, window.1)));
        match average_reduction(&vals, window) {
            Ok(Average::Factor(f)) => row.value = Some(f),
            Ok(Average::Converged { k }) => {
                row.value = Some(0.0);
                row.annotations.push(note("converged_at", k));
            }
            Err(err) => {
                row.value = None;
                row.annotations.push(note("error", err));
            }
        }
        out.push(row);
    }
    out
}
