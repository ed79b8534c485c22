//! The per-load synthesis pipeline.
//!
//! Time is counted in ticks of 1/30 s from January 1st of year 0, on a grid
//! of 52-week years. Every level is aligned to that grid, so week `w` of the
//! output is always week `w % 52 + 1` of some year, hour `h` lies in week
//! `h / 168`, and so on. A request is turned into a window `[start, end)` on
//! that grid; only the profiles overlapping the window are generated.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::seam::{apply_seam_filter, SeamFilter};
use super::trend::{add_hour_trend_at, scale_to_parent};
use super::ComposeError;
use crate::neural::{CGanModel, ConditionLabel, GanModel};
use crate::resample::downsample;
use crate::resolution::Resolution;
use crate::rng;
use crate::scalar::{mean, Scalar};
use crate::svdgen::SvdModel;
use crate::types::{Level, LoadClass, Metric, Season, WEEKS_PER_YEAR};

/// Longest supported request.
pub const MAX_YEARS: usize = 10;

/// Cap on the composed samples per load before downsampling.
pub const MAX_DRIVING_SAMPLES: u64 = 100_000_000;

const HOURS_PER_WEEK: u64 = 168;
const BLOCKS_PER_HOUR: u64 = 120;
const WEEK_TICKS: u64 = 18_144_000;
const YEAR_TICKS: u64 = WEEK_TICKS * WEEKS_PER_YEAR as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeasonChoice {
    /// Seasons follow the calendar, starting on January 1st.
    AutoYearly,
    /// Start at the season's first week and label every week with it.
    Fixed(Season),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    pub n_residential: usize,
    pub n_industrial: usize,
    pub resolution: Resolution,
    pub duration_s: f64,
    pub season: SeasonChoice,
    pub aggregation: Metric,
    /// Multiplier applied to every per-unit output value.
    pub base_mw: f64,
    pub seed: u64,
}

impl GenerationRequest {
    /// A calendar-following, mean-aggregated, per-unit request.
    pub fn new(n_residential: usize, n_industrial: usize, resolution: Resolution, duration_s: f64, seed: u64) -> Self {
        Self {
            n_residential,
            n_industrial,
            resolution,
            duration_s,
            season: SeasonChoice::AutoYearly,
            aggregation: Metric::Mean,
            base_mw: 1.0,
            seed,
        }
    }

    /// Classes of the requested loads: residential first, then industrial.
    pub fn load_classes(&self) -> Vec<LoadClass> {
        let mut v = vec![LoadClass::MainlyResidential; self.n_residential];
        v.extend(std::iter::repeat_n(LoadClass::MainlyIndustrial, self.n_industrial));
        v
    }

    /// Number of output rows per load.
    pub fn rows(&self) -> Result<usize, ComposeError> {
        Ok(self.plan()?.rows)
    }

    fn plan(&self) -> Result<Plan, ComposeError> {
        let invalid = |m: String| Err(ComposeError::InvalidRequest(m));
        if self.n_residential + self.n_industrial == 0 {
            return invalid("at least one load is required".into());
        }
        if !(self.base_mw.is_finite() && self.base_mw > 0.0) {
            return invalid(format!("base_mw must be positive, got {}", self.base_mw));
        }
        let period_s = self.resolution.effective_period_s();
        let Some(period) = self.resolution.period_ticks() else {
            return invalid(format!("sampling period {period_s} s is not a whole multiple of 1/30 s"));
        };
        if !(self.duration_s.is_finite() && self.duration_s >= period_s) {
            return invalid(format!("duration {} s is shorter than the sampling period {period_s} s", self.duration_s));
        }
        if self.duration_s > (MAX_YEARS as u64 * YEAR_TICKS) as f64 / 30.0 {
            return Err(ComposeError::DurationExceedsYear { duration_s: self.duration_s, max_years: MAX_YEARS });
        }
        let rows = (self.duration_s * 30.0 / period as f64 + 1e-9).floor() as usize;
        let driving = driving_level(period);
        let factor = (period / driving.period_ticks()) as usize;
        let samples = rows as u64 * factor as u64;
        if samples > MAX_DRIVING_SAMPLES {
            return Err(ComposeError::RequestTooLarge { samples, level: driving, limit: MAX_DRIVING_SAMPLES });
        }
        let base = match self.season {
            SeasonChoice::AutoYearly => 0,
            SeasonChoice::Fixed(s) => (s.first_week() as u64 - 1) * WEEK_TICKS,
        };
        // Short windows start at a random point of the first profile, but
        // never leave the starting week.
        let window = rows as u64 * period;
        let room = driving.span_ticks().min(WEEK_TICKS);
        let offset = if window < room {
            let choices = (room - window) / period + 1;
            rng::rng(rng::split_tag(self.seed, "offset")).random_range(0..choices) * period
        } else {
            0
        };
        Ok(Plan { rows, factor, driving, start: base + offset, end: base + offset + window })
    }
}

/// Coarsest level whose sampling period divides `period_ticks`.
pub fn driving_level(period_ticks: u64) -> Level {
    Level::ALL
        .into_iter()
        .rev()
        .find(|l| period_ticks % l.period_ticks() == 0)
        .unwrap_or(Level::L1)
}

trait SpanTicks {
    fn span_ticks(self) -> u64;
}

impl SpanTicks for Level {
    fn span_ticks(self) -> u64 {
        self.period_ticks() * self.profile_length() as u64
    }
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    rows: usize,
    factor: usize,
    driving: Level,
    start: u64,
    end: u64,
}

/// Everything the pipeline needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Models<T> {
    pub l1: GanModel<T>,
    pub l2: GanModel<T>,
    pub l3: CGanModel<T>,
    pub l4_residential: SvdModel<T>,
    pub l4_industrial: SvdModel<T>,
    pub seam: SeamFilter<T>,
}

impl<T: Scalar> Models<T> {
    pub fn l4(&self, class: LoadClass) -> &SvdModel<T> {
        match class {
            LoadClass::MainlyResidential => &self.l4_residential,
            LoadClass::MainlyIndustrial => &self.l4_industrial,
        }
    }

    pub fn check(&self) -> Result<(), ComposeError> {
        let bad = |m: String| Err(ComposeError::ModelMismatch(m));
        for (m, level) in [(&self.l1, Level::L1), (&self.l2, Level::L2)] {
            if m.level != level || m.is_conditional() {
                return bad(format!("expected an unconditional {level} model, got {}", m.level));
            }
        }
        if self.l3.level() != Level::L3 || !self.l3.gan.is_conditional() {
            return bad(format!("expected a conditional level 3 model, got {}", self.l3.level()));
        }
        for class in LoadClass::ALL {
            if self.l4(class).load_class != class {
                return bad(format!("level 4 model for {class} was fitted on {}", self.l4(class).load_class));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLoad<T> {
    pub load_class: LoadClass,
    pub values: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis<T> {
    /// Time of the first row, in seconds from January 1st of year 0.
    pub start_s: f64,
    pub period_s: f64,
    /// Level the series was composed at before downsampling.
    pub driving_level: Level,
    pub loads: Vec<SyntheticLoad<T>>,
}

impl<T> Synthesis<T> {
    pub fn rows(&self) -> usize {
        self.loads.first().map_or(0, |l| l.values.len())
    }

    /// Row times in seconds from January 1st of year 0.
    pub fn times_s(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows()).map(|k| self.start_s + k as f64 * self.period_s)
    }
}

/// Per-level work done for one load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InvocationCounters {
    pub l1_profiles: usize,
    pub l2_profiles: usize,
    pub l3_profiles: usize,
    pub l4_profiles: usize,
    /// Seams smoothed by the filter, per level.
    pub l1_seams_filtered: usize,
    pub l2_seams_filtered: usize,
    pub l3_seams_filtered: usize,
}

/// Intermediate series of one load. Series of levels that were not
/// generated are empty; `first_*` give the grid index of element 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadTrace<T> {
    pub first_week: u64,
    /// Parent value each week was scaled to (1 when no yearly profile was drawn).
    pub weekly: Vec<T>,
    pub hourly_prefilter: Vec<T>,
    pub hourly: Vec<T>,
    pub first_hour: u64,
    pub half_minute: Vec<T>,
    pub first_block: u64,
    pub pmu: Vec<T>,
    pub counters: InvocationCounters,
}

pub fn synthesize<T: Scalar>(request: &GenerationRequest, models: &Models<T>) -> Result<Synthesis<T>, ComposeError> {
    run(request, models, None)
}

/// [`synthesize`] that also returns every load's intermediate series.
pub fn synthesize_traced<T: Scalar>(
    request: &GenerationRequest,
    models: &Models<T>,
) -> Result<(Synthesis<T>, Vec<LoadTrace<T>>), ComposeError> {
    let mut traces = Vec::new();
    let out = run(request, models, Some(&mut traces))?;
    Ok((out, traces))
}

fn run<T: Scalar>(
    request: &GenerationRequest,
    models: &Models<T>,
    mut traces: Option<&mut Vec<LoadTrace<T>>>,
) -> Result<Synthesis<T>, ComposeError> {
    models.check()?;
    let plan = request.plan()?;
    let mut loads = Vec::new();
    for (i, class) in request.load_classes().into_iter().enumerate() {
        let mut trace = LoadTrace::default();
        let seed = rng::split(request.seed, i as u64);
        let (series, first) = compose_load(&plan, request.season, class, seed, models, &mut trace, traces.is_some())?;
        let from = (plan.start / plan.driving.period_ticks() - first) as usize;
        let window = &series[from..from + plan.rows * plan.factor];
        let base = T::lit(request.base_mw);
        let values = downsample(window, plan.factor, request.aggregation)?.values.into_iter().map(|v| v * base).collect();
        loads.push(SyntheticLoad { load_class: class, values });
        if let Some(t) = traces.as_deref_mut() {
            t.push(trace);
        }
    }
    Ok(Synthesis {
        start_s: plan.start as f64 / 30.0,
        period_s: request.resolution.effective_period_s(),
        driving_level: plan.driving,
        loads,
    })
}

/// Composes one load down to the driving level over the profiles covering
/// the plan's window, filling `trace` (the large fine-level series only
/// when `keep` is set). Returns the series and the driving-grid index of its
/// first sample.
fn compose_load<T: Scalar>(
    plan: &Plan,
    season: SeasonChoice,
    class: LoadClass,
    seed: u64,
    models: &Models<T>,
    trace: &mut LoadTrace<T>,
    keep: bool,
) -> Result<(Vec<T>, u64), ComposeError> {
    let ceil_div = |a: u64, b: u64| a.div_ceil(b);
    let (w_lo, w_hi) = (plan.start / WEEK_TICKS, ceil_div(plan.end, WEEK_TICKS));
    trace.first_week = w_lo;

    let yearly = plan.driving == Level::L4 || season == SeasonChoice::AutoYearly || w_hi - w_lo > 1;
    let weekly: Vec<T> = if yearly {
        let model = models.l4(class);
        let stream = rng::split_tag(seed, "l4");
        let mut years = BTreeMap::new();
        for w in w_lo..w_hi {
            let y = w / WEEKS_PER_YEAR as u64;
            years.entry(y).or_insert_with(|| model.generate(1, rng::split(stream, y)).remove(0));
        }
        trace.counters.l4_profiles += years.len();
        (w_lo..w_hi)
            .map(|w| years[&(w / WEEKS_PER_YEAR as u64)].samples[(w % WEEKS_PER_YEAR as u64) as usize])
            .collect()
    } else {
        vec![T::one(); (w_hi - w_lo) as usize]
    };
    trace.weekly = weekly.clone();
    if plan.driving == Level::L4 {
        return Ok((weekly, w_lo));
    }

    // Weeks, scaled to their yearly values, then smoothed at their seams.
    let stream = rng::split_tag(seed, "l3");
    let streams: Vec<_> = (w_lo..w_hi)
        .map(|w| {
            let s = match season {
                SeasonChoice::Fixed(s) => s,
                SeasonChoice::AutoYearly => Season::of_week((w % WEEKS_PER_YEAR as u64) as usize + 1),
            };
            (rng::split(stream, w), ConditionLabel::new(class, s))
        })
        .collect();
    let weeks = models.l3.generate_streams(&streams)?;
    trace.counters.l3_profiles += weeks.len();
    let mut hourly = Vec::with_capacity(weeks.len() * HOURS_PER_WEEK as usize);
    for (p, &v) in weeks.iter().zip(&weekly) {
        hourly.extend(scale_to_parent(p, v)?.samples);
    }
    let seams: Vec<usize> = (1..weeks.len()).map(|k| k * HOURS_PER_WEEK as usize - 1).collect();
    let filtered = apply_seam_filter(&hourly, &seams, &models.seam)?;
    trace.counters.l3_seams_filtered += seams.len();
    trace.hourly_prefilter = hourly;
    trace.hourly = filtered.clone();
    let first_hour_of_weeks = w_lo * HOURS_PER_WEEK;
    if plan.driving == Level::L3 {
        return Ok((filtered, first_hour_of_weeks));
    }

    // Hours: fluctuation scaled to the hourly value plus the local trend.
    let (h_lo, h_hi) = (plan.start / Level::L3.period_ticks(), ceil_div(plan.end, Level::L3.period_ticks()));
    trace.first_hour = h_lo;
    let stream = rng::split_tag(seed, "l2");
    let streams: Vec<u64> = (h_lo..h_hi).map(|h| rng::split(stream, h)).collect();
    let hours = models.l2.generate_streams(&streams)?;
    trace.counters.l2_profiles += hours.len();
    let mut half_minute = Vec::with_capacity(hours.len() * BLOCKS_PER_HOUR as usize);
    for (h, p) in (h_lo..h_hi).zip(&hours) {
        let rel = (h - first_hour_of_weeks) as usize;
        let start = rel.saturating_sub(2).min(filtered.len() - 5);
        let context: [T; 5] = filtered[start..start + 5].try_into().expect("five values");
        let v = filtered[rel];
        let scaled: Vec<T> = p.samples.iter().map(|&g| g * v).collect();
        let mut block = add_hour_trend_at(&scaled, &context, rel as i32 - start as i32 - 2);
        let drift = v - mean(&block);
        block.iter_mut().for_each(|x| *x += drift);
        half_minute.extend(block);
    }
    let first_block_of_hours = h_lo * BLOCKS_PER_HOUR;
    if plan.driving == Level::L2 {
        if keep {
            trace.half_minute = half_minute.clone();
        }
        return Ok((half_minute, first_block_of_hours));
    }

    // 30-second windows, each scaled to its half-minute value, unfiltered.
    let (b_lo, b_hi) = (plan.start / Level::L2.period_ticks(), ceil_div(plan.end, Level::L2.period_ticks()));
    trace.first_block = b_lo;
    let stream = rng::split_tag(seed, "l1");
    let streams: Vec<u64> = (b_lo..b_hi).map(|b| rng::split(stream, b)).collect();
    let windows = models.l1.generate_streams(&streams)?;
    trace.counters.l1_profiles += windows.len();
    let mut pmu = Vec::with_capacity(windows.len() * Level::L1.profile_length());
    for (b, p) in (b_lo..b_hi).zip(&windows) {
        pmu.extend(scale_to_parent(p, half_minute[(b - first_block_of_hours) as usize])?.samples);
    }
    if keep {
        trace.half_minute = half_minute;
        trace.pmu = pmu.clone();
    }
    Ok((pmu, b_lo * Level::L1.profile_length() as u64))
}
