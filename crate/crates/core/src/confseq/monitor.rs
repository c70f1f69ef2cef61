//! Streaming two-sided intervals.

use serde::Serialize;

use super::boundaries::{
    dkw_boundary, kappa_upper, ks_two_sample_boundary, mean_boundary, mmd_boundary, ot_boundary, tv_finite_boundary,
    KlBoundary,
};
use super::config::{ConfSeqConfig, DivergenceKind};
use crate::error::{Error, Result};
use crate::estimators::ks::{ks_one_sample_sorted, ks_two_sample_sorted};
use crate::estimators::ot::CostKind;
use crate::estimators::{kl_finite, ot_cost_discrete, tv_finite, CategoricalCounts, MmdState};

const KL_INITIAL_HORIZON: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Real(f64),
    Point(Vec<f64>),
    Category(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalRecord {
    pub t: u64,
    pub s: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub reject: bool,
}

#[derive(Debug, Clone)]
enum Stats {
    Dkw { sorted: Vec<f64> },
    Ks { x: Vec<f64>, y: Vec<f64> },
    Mmd(MmdState),
    Tv(CategoricalCounts),
    Kl { counts: CategoricalCounts, boundary: KlBoundary },
    Ot { x: CategoricalCounts, y: CategoricalCounts },
    Mean { sum: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct ConfSeqState {
    config: ConfSeqConfig,
    t: u64,
    s: u64,
    stats: Stats,
}

fn mismatch(kind: &DivergenceKind, what: &str) -> Error {
    Error::KindMismatch(format!("{} monitor cannot take {what}", kind.name()))
}

fn insert_sorted(v: &mut Vec<f64>, x: f64) {
    let i = v.partition_point(|&u| u <= x);
    v.insert(i, x);
}

impl ConfSeqState {
    pub fn new(config: ConfSeqConfig) -> Result<Self> {
        config.validate()?;
        let stats = match &config.kind {
            DivergenceKind::Dkw { .. } => Stats::Dkw { sorted: Vec::new() },
            DivergenceKind::Ks => Stats::Ks { x: Vec::new(), y: Vec::new() },
            DivergenceKind::Mmd { kernel, dim } => Stats::Mmd(MmdState::new(kernel.clone(), *dim)),
            DivergenceKind::Tv { p } => Stats::Tv(CategoricalCounts::zeros(p.len())?),
            DivergenceKind::Kl { p, schedule, factor } => Stats::Kl {
                counts: CategoricalCounts::zeros(p.len())?,
                boundary: KlBoundary::new(p, config.delta / 2.0, config.stitching, *schedule, *factor, KL_INITIAL_HORIZON)?,
            },
            DivergenceKind::Ot { cost, .. } => match &cost.kind {
                CostKind::Matrix(c) => {
                    let cols = c.first().map_or(0, |r| r.len());
                    Stats::Ot { x: CategoricalCounts::zeros(c.len())?, y: CategoricalCounts::zeros(cols)? }
                }
                CostKind::MetricPower { .. } => {
                    return Err(Error::InvalidArgument("the transport monitor needs a cost matrix".into()))
                }
            },
            DivergenceKind::Mean { mu0, .. } => Stats::Mean { sum: vec![0.0; mu0.len()] },
        };
        Ok(Self { config, t: 0, s: 0, stats })
    }

    pub fn config(&self) -> &ConfSeqConfig {
        &self.config
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    /// Largest possible value of the target divergence.
    pub fn cap(&self) -> f64 {
        match &self.config.kind {
            DivergenceKind::Dkw { .. } | DivergenceKind::Ks | DivergenceKind::Tv { .. } => 1.0,
            DivergenceKind::Mmd { kernel, .. } => 2.0 * kernel.bound.sqrt(),
            DivergenceKind::Kl { p, .. } => -p.iter().copied().fold(f64::INFINITY, f64::min).ln(),
            DivergenceKind::Ot { cost, .. } => cost.delta,
            DivergenceKind::Mean { .. } => f64::INFINITY,
        }
    }

    /// Checks the observation against the configured kind without touching state.
    fn coerce(&self, obs: &Observation, stream: Stream) -> Result<Observation> {
        let kind = &self.config.kind;
        if stream == Stream::Y && !kind.two_sample() {
            return Err(mismatch(kind, "a second stream"));
        }
        let real = |o: &Observation| match o {
            Observation::Real(v) => Some(*v),
            Observation::Point(p) if p.len() == 1 => Some(p[0]),
            _ => None,
        };
        let point = |o: &Observation, d: usize| -> Result<Vec<f64>> {
            let p = match o {
                Observation::Real(v) => vec![*v],
                Observation::Point(p) => p.clone(),
                Observation::Category(_) => return Err(mismatch(kind, "a category")),
            };
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite coordinate".into()));
            }
            Ok(p)
        };
        let category = |o: &Observation, k: usize| -> Result<usize> {
            match o {
                Observation::Category(c) if *c < k => Ok(*c),
                Observation::Category(c) => Err(Error::InvalidArgument(format!("category {c} outside 0..{k}"))),
                _ => Err(mismatch(kind, "a real value")),
            }
        };
        Ok(match (&self.stats, stream) {
            (Stats::Dkw { .. } | Stats::Ks { .. }, _) => {
                let v = real(obs).ok_or_else(|| mismatch(kind, "a vector or category"))?;
                if !v.is_finite() {
                    return Err(Error::InvalidArgument("non-finite value".into()));
                }
                Observation::Real(v)
            }
            (Stats::Mmd(m), _) => Observation::Point(point(obs, m.x_sample().dim())?),
            (Stats::Mean { sum }, _) => Observation::Point(point(obs, sum.len())?),
            (Stats::Tv(c) | Stats::Kl { counts: c, .. }, _) => Observation::Category(category(obs, c.k())?),
            (Stats::Ot { x, .. }, Stream::X) => Observation::Category(category(obs, x.k())?),
            (Stats::Ot { y, .. }, Stream::Y) => Observation::Category(category(obs, y.k())?),
        })
    }

    /// Adds one observation and returns the interval at the new `(t, s)`.
    ///
    /// On error the state is unchanged.
    pub fn update(&mut self, obs: &Observation, stream: Stream) -> Result<IntervalRecord> {
        let obs = self.coerce(obs, stream)?;
        let next_t = self.t + u64::from(stream == Stream::X);
        if let Stats::Kl { boundary, .. } = &mut self.stats {
            // grow the radius table first so a failure leaves counts untouched
            boundary.gamma(next_t)?;
        }
        match (&mut self.stats, obs) {
            (Stats::Dkw { sorted }, Observation::Real(v)) => insert_sorted(sorted, v),
            (Stats::Ks { x, .. }, Observation::Real(v)) if stream == Stream::X => insert_sorted(x, v),
            (Stats::Ks { y, .. }, Observation::Real(v)) => insert_sorted(y, v),
            (Stats::Mmd(m), Observation::Point(p)) if stream == Stream::X => m.push_x(&p)?,
            (Stats::Mmd(m), Observation::Point(p)) => m.push_y(&p)?,
            (Stats::Tv(c) | Stats::Kl { counts: c, .. }, Observation::Category(i)) => c.push(i)?,
            (Stats::Ot { x, .. }, Observation::Category(i)) if stream == Stream::X => x.push(i)?,
            (Stats::Ot { y, .. }, Observation::Category(i)) => y.push(i)?,
            (Stats::Mean { sum }, Observation::Point(p)) => {
                for (a, b) in sum.iter_mut().zip(&p) {
                    *a += b;
                }
            }
            _ => unreachable!("coerce matched the kind"),
        }
        match stream {
            Stream::X => self.t += 1,
            Stream::Y => self.s += 1,
        }
        self.record()
    }

    /// Interval at the current `(t, s)`.
    pub fn record(&mut self) -> Result<IntervalRecord> {
        let (t, s) = (self.t, self.s);
        let cap = self.cap();
        let cfg = &self.config;
        let (delta, st, mode) = (cfg.delta, &cfg.stitching, cfg.mode);
        let vacuous = IntervalRecord { t, s, estimate: 0.0, lower: 0.0, upper: cap, reject: false };
        if t == 0 || (cfg.kind.two_sample() && s == 0) {
            return Ok(vacuous);
        }
        // (estimate, gamma, kappa); kappa = None leaves the upper end at the cap
        let (estimate, gamma, kappa) = match (&mut self.stats, &cfg.kind) {
            (Stats::Dkw { sorted }, DivergenceKind::Dkw { cdf }) => (
                ks_one_sample_sorted(sorted, |x| cdf.eval(x)),
                dkw_boundary(t, delta / 2.0, st)?,
                Some(kappa_upper(t, delta, st, 1.0)?),
            ),
            (Stats::Ks { x, y }, _) => {
                let r = ks_two_sample_boundary(t, s, delta, st, mode)?;
                (ks_two_sample_sorted(x, y), r.gamma, Some(r.kappa))
            }
            (Stats::Mmd(m), DivergenceKind::Mmd { kernel, .. }) => {
                let r = mmd_boundary(t, s, delta, st, kernel.bound, mode)?;
                (m.value().unwrap_or(0.0), r.gamma, Some(r.kappa))
            }
            (Stats::Tv(c), DivergenceKind::Tv { p }) => (
                tv_finite(c, p)?,
                tv_finite_boundary(t, delta / 2.0, st, p.len(), mode)?,
                Some(kappa_upper(t, delta, st, 1.0)?),
            ),
            (Stats::Kl { counts, boundary }, DivergenceKind::Kl { p, .. }) => {
                (kl_finite(counts, p)?, boundary.gamma(t)?, None)
            }
            (Stats::Ot { x, y }, DivergenceKind::Ot { cost, bias }) => {
                let r = ot_boundary(t, s, delta, st, cost.delta, bias, mode)?;
                (ot_cost_discrete(&x.frequencies(), &y.frequencies(), cost)?, r.gamma, Some(r.kappa))
            }
            (Stats::Mean { sum }, DivergenceKind::Mean { mu0, envelope, covering }) => {
                let tf = t as f64;
                let est = sum.iter().zip(mu0).map(|(a, m)| (a / tf - m).powi(2)).sum::<f64>().sqrt();
                let r = mean_boundary(t, delta, st, envelope, *covering)?;
                (est, r, Some(r))
            }
            _ => unreachable!("stats follow the kind"),
        };
        let lower = (estimate - gamma).max(0.0);
        let upper = kappa.map_or(cap, |k| (estimate + k).min(cap)).max(estimate);
        Ok(IntervalRecord { t, s, estimate, lower, upper, reject: lower > 0.0 })
    }
}

pub fn monitor_update(state: &mut ConfSeqState, obs: &Observation, stream: Stream) -> Result<IntervalRecord> {
    state.update(obs, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::CgfEnvelope;
    use crate::confseq::config::{BiasBound, Covering, LambdaSchedule, ReferenceCdf};
    use crate::estimators::{ks_two_sample, mmd_v, CostSpec, EmpiricalSample, KernelSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(kind: DivergenceKind) -> ConfSeqConfig {
        ConfSeqConfig::new(0.05, kind).unwrap()
    }

    #[test]
    fn first_ks_record_is_vacuous() {
        let mut st = ConfSeqState::new(cfg(DivergenceKind::Ks)).unwrap();
        let r = st.update(&Observation::Real(0.3), Stream::X).unwrap();
        assert_eq!((r.t, r.s, r.lower, r.upper, r.reject), (1, 0, 0.0, 1.0, false));
        let r = st.update(&Observation::Real(0.7), Stream::Y).unwrap();
        assert_eq!((r.lower, r.upper), (0.0, 1.0));
        let mut d = ConfSeqState::new(cfg(DivergenceKind::Dkw { cdf: ReferenceCdf::Uniform { lo: 0.0, hi: 1.0 } })).unwrap();
        let r = d.update(&Observation::Real(0.5), Stream::X).unwrap();
        assert_eq!((r.t, r.lower, r.upper), (1, 0.0, 1.0));
    }

    #[test]
    fn incremental_matches_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ks = ConfSeqState::new(cfg(DivergenceKind::Ks)).unwrap();
        let kernel = KernelSpec::gaussian(1.0).unwrap();
        let mut mmd = ConfSeqState::new(cfg(DivergenceKind::Mmd { kernel: kernel.clone(), dim: 1 })).unwrap();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for i in 0..200 {
            let v: f64 = rng.random();
            let stream = if rng.random::<bool>() || i == 0 { Stream::X } else { Stream::Y };
            match stream {
                Stream::X => xs.push(v),
                Stream::Y => ys.push(v),
            }
            let a = ks.update(&Observation::Real(v), stream).unwrap();
            let b = mmd.update(&Observation::Real(v), stream).unwrap();
            if !ys.is_empty() {
                let (x, y) = (EmpiricalSample::from_scalars(xs.clone()), EmpiricalSample::from_scalars(ys.clone()));
                assert!((a.estimate - ks_two_sample(&x, &y).unwrap()).abs() < 1e-15);
                assert!((b.estimate - mmd_v(&x, &y, &kernel).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn identical_streams_never_reject() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut st = ConfSeqState::new(cfg(DivergenceKind::Ks)).unwrap();
        for _ in 0..2000 {
            let v: f64 = rng.random();
            st.update(&Observation::Real(v), Stream::X).unwrap();
            let r = st.update(&Observation::Real(v), Stream::Y).unwrap();
            assert!(!r.reject);
            assert_eq!(r.estimate, 0.0);
        }
    }

    #[test]
    fn interval_ordering_all_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cost = CostSpec::matrix(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap();
        let kinds = vec![
            DivergenceKind::Dkw { cdf: ReferenceCdf::Normal { mean: 0.0, sd: 1.0 } },
            DivergenceKind::Tv { p: vec![0.25; 4] },
            DivergenceKind::Kl { p: vec![0.2, 0.3, 0.5], schedule: LambdaSchedule::SqrtKOverT, factor: 2 },
            DivergenceKind::Ot { cost: cost.clone(), bias: BiasBound::finite_alphabet(2.0, 3) },
            DivergenceKind::Mean {
                mu0: vec![0.0, 0.0],
                envelope: CgfEnvelope::sub_gaussian(0.0, 1.0),
                covering: Covering::Euclidean { d: 2, gamma: 0.5 },
            },
        ];
        for kind in kinds {
            let mut st = ConfSeqState::new(cfg(kind.clone())).unwrap();
            for i in 0..300 {
                let (obs, stream) = match &kind {
                    DivergenceKind::Dkw { .. } => (Observation::Real(rng.random::<f64>()), Stream::X),
                    DivergenceKind::Tv { .. } => (Observation::Category(rng.random_range(0..4)), Stream::X),
                    DivergenceKind::Kl { .. } => (Observation::Category(rng.random_range(0..3)), Stream::X),
                    DivergenceKind::Ot { .. } => {
                        (Observation::Category(rng.random_range(0..3)), if i % 2 == 0 { Stream::X } else { Stream::Y })
                    }
                    _ => (Observation::Point(vec![rng.random(), rng.random()]), Stream::X),
                };
                let r = st.update(&obs, stream).unwrap();
                assert!(r.lower <= r.estimate && r.estimate <= r.upper, "{} {r:?}", kind.name());
                assert!(r.upper <= st.cap());
            }
        }
    }

    #[test]
    fn mismatches_leave_state_alone() {
        let mut st = ConfSeqState::new(cfg(DivergenceKind::Tv { p: vec![0.5, 0.5] })).unwrap();
        st.update(&Observation::Category(1), Stream::X).unwrap();
        assert!(matches!(st.update(&Observation::Real(0.5), Stream::X), Err(Error::KindMismatch(_))));
        assert!(matches!(st.update(&Observation::Category(0), Stream::Y), Err(Error::KindMismatch(_))));
        assert!(st.update(&Observation::Category(7), Stream::X).is_err());
        assert_eq!(st.t(), 1);
        let r = st.update(&Observation::Category(0), Stream::X).unwrap();
        assert_eq!((r.t, r.estimate), (2, 0.0));
    }

    #[test]
    fn mean_rejects_shifted_stream() {
        let kind = DivergenceKind::Mean {
            mu0: vec![0.0],
            envelope: CgfEnvelope::sub_gaussian(0.0, 1.0),
            covering: Covering::Scalar,
        };
        let mut st = ConfSeqState::new(cfg(kind)).unwrap();
        let mut last = None;
        for _ in 0..400 {
            last = Some(st.update(&Observation::Real(1.0), Stream::X).unwrap());
        }
        assert!(last.unwrap().reject);
    }
}
