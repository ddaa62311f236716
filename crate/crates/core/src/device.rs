//! Fog device telemetry and its stochastic evolution.
//!
//! Every channel is a percentage oriented so that larger values are worse:
//! more mobile, busier CPU, slower network, slower response, poorer power.
//! The random-walk generator is a modelling choice for desk-scale runs, not
//! a measured distribution.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fuzzy::{normalize, FuzzyError};
use crate::trace::FailureCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Mobility,
    Cpu,
    Network,
    Response,
    Power,
}

impl Channel {
    /// Fixed iteration order; also the order of random draws in [`evolve`].
    pub const ALL: [Channel; 5] = [
        Channel::Mobility,
        Channel::Cpu,
        Channel::Network,
        Channel::Response,
        Channel::Power,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Raw range `[alpha, beta]` of a telemetry source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRange {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for RawRange {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceState {
    pub device_id: u32,
    pub mobility_pct: f64,
    pub cpu_util_pct: f64,
    pub network_pct: f64,
    pub response_pct: f64,
    pub power_pct: f64,
    /// Processing capacity per slot, million instructions per second.
    pub mips: f64,
    pub up: bool,
    pub failure_count: u32,
    pub unpredicted_failure_count: u32,
    pub raw_ranges: [RawRange; 5],
}

impl DeviceState {
    pub fn new(device_id: u32, mips: f64) -> Self {
        Self {
            device_id,
            mobility_pct: 0.0,
            cpu_util_pct: 0.0,
            network_pct: 0.0,
            response_pct: 0.0,
            power_pct: 0.0,
            mips,
            up: true,
            failure_count: 0,
            unpredicted_failure_count: 0,
            raw_ranges: [RawRange::default(); 5],
        }
    }

    pub fn get(&self, ch: Channel) -> f64 {
        match ch {
            Channel::Mobility => self.mobility_pct,
            Channel::Cpu => self.cpu_util_pct,
            Channel::Network => self.network_pct,
            Channel::Response => self.response_pct,
            Channel::Power => self.power_pct,
        }
    }

    pub fn set(&mut self, ch: Channel, v: f64) {
        let slot = match ch {
            Channel::Mobility => &mut self.mobility_pct,
            Channel::Cpu => &mut self.cpu_util_pct,
            Channel::Network => &mut self.network_pct,
            Channel::Response => &mut self.response_pct,
            Channel::Power => &mut self.power_pct,
        };
        *slot = v;
    }

    /// Stores a raw reading after normalizing it against the channel's range.
    pub fn set_raw(&mut self, ch: Channel, raw: f64) -> Result<(), FuzzyError> {
        let r = self.raw_ranges[ch.index()];
        let unit = normalize(raw, r.alpha, r.beta)?;
        self.set(ch, unit * 100.0);
        Ok(())
    }

    pub fn telemetry(&self) -> [f64; 5] {
        Channel::ALL.map(|c| self.get(c))
    }

    pub fn telemetry_in_range(&self) -> bool {
        self.telemetry().iter().all(|v| (0.0..=100.0).contains(v))
    }
}

/// Random-walk parameters for one channel. `lo..=hi` are the clamp bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    /// Noise amplitude per square-root second.
    pub step: f64,
    /// Deterministic drift per second.
    pub drift: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ChannelProfile {
    pub const fn new(step: f64, drift: f64, lo: f64, hi: f64) -> Self {
        Self {
            step,
            drift,
            lo,
            hi,
        }
    }
}

impl Default for ChannelProfile {
    /// Wanders inside the fuzzy safe zone so only ramps reach the unsafe bands.
    fn default() -> Self {
        Self::new(0.5, 0.0, 0.0, 40.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct TelemetryProfile {
    pub mobility: ChannelProfile,
    pub cpu: ChannelProfile,
    pub network: ChannelProfile,
    pub response: ChannelProfile,
    pub power: ChannelProfile,
    /// Overrides the run seed for telemetry streams when set.
    pub seed: Option<u64>,
}

impl TelemetryProfile {
    pub fn uniform(ch: ChannelProfile) -> Self {
        Self {
            mobility: ch,
            cpu: ch,
            network: ch,
            response: ch,
            power: ch,
            seed: None,
        }
    }

    pub fn channel(&self, ch: Channel) -> &ChannelProfile {
        match ch {
            Channel::Mobility => &self.mobility,
            Channel::Cpu => &self.cpu,
            Channel::Network => &self.network,
            Channel::Response => &self.response,
            Channel::Power => &self.power,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for ch in Channel::ALL {
            let p = self.channel(ch);
            if !(p.step >= 0.0) {
                errs.push(format!("telemetry.{ch:?}.step must be >= 0"));
            }
            if !p.drift.is_finite() {
                errs.push(format!("telemetry.{ch:?}.drift must be finite"));
            }
            if !(0.0 <= p.lo && p.lo <= p.hi && p.hi <= 100.0) {
                errs.push(format!(
                    "telemetry.{ch:?} bounds must satisfy 0 <= lo <= hi <= 100"
                ));
            }
        }
        errs
    }
}

/// Dedicated random stream for one device.
pub fn device_rng(seed: u64, device_id: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + u64::from(device_id));
    rng
}

/// One random-walk step of every channel:
/// `x' = clamp(x + drift*dt + step*sqrt(dt)*u, lo, hi)`, `u ~ U[-1, 1]`.
///
/// Exactly one draw per channel is taken in [`Channel::ALL`] order.
pub fn evolve<R: Rng + ?Sized>(
    state: &DeviceState,
    profile: &TelemetryProfile,
    dt: f64,
    rng: &mut R,
) -> DeviceState {
    debug_assert!(dt > 0.0);
    let mut next = state.clone();
    evolve_in_place(&mut next, profile, dt, rng);
    next
}

pub(crate) fn evolve_in_place<R: Rng + ?Sized>(
    state: &mut DeviceState,
    profile: &TelemetryProfile,
    dt: f64,
    rng: &mut R,
) {
    let sqrt_dt = dt.sqrt();
    for ch in Channel::ALL {
        let p = profile.channel(ch);
        let u: f64 = rng.random_range(-1.0..=1.0);
        let x = state.get(ch) + p.drift * dt + p.step * sqrt_dt * u;
        state.set(ch, x.clamp(p.lo, p.hi));
    }
}

/// Initial telemetry drawn uniformly from `[lo, hi]` on the device stream.
pub fn initial_telemetry<R: Rng + ?Sized>(state: &mut DeviceState, lo: f64, hi: f64, rng: &mut R) {
    for ch in Channel::ALL {
        let v = if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        };
        state.set(ch, v);
    }
}

/// Channels that degrade ahead of a failure of the given category.
pub fn ramp_channels(category: FailureCategory) -> &'static [Channel] {
    match category {
        FailureCategory::Cpu => &[Channel::Cpu],
        FailureCategory::Power => &[Channel::Power],
        FailureCategory::Network => &[Channel::Network],
        _ => &Channel::ALL,
    }
}

/// Telemetry value every ramp reaches at failure onset.
pub const RAMP_TARGET: f64 = 95.0;

/// Linear degradation of selected channels ahead of a known failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RampPlan {
    pub begin_s: f64,
    pub onset_s: f64,
    pub category: FailureCategory,
    /// Channel values captured when the ramp began.
    pub start: [f64; 5],
    pub target: f64,
}

impl RampPlan {
    /// Starts a ramp observed at `now` for a failure at `onset_s`. Returns
    /// `None` for a zero window or when `now` lies outside the window.
    pub fn begin(
        state: &DeviceState,
        category: FailureCategory,
        onset_s: f64,
        window_s: f64,
        now: f64,
    ) -> Option<Self> {
        if !(window_s > 0.0) || now >= onset_s || now < onset_s - window_s {
            return None;
        }
        Some(Self {
            begin_s: now,
            onset_s,
            category,
            start: state.telemetry(),
            target: RAMP_TARGET,
        })
    }

    /// Ramp anchored at the nominal window start rather than the first
    /// observation.
    pub fn anchored(
        state: &DeviceState,
        category: FailureCategory,
        onset_s: f64,
        window_s: f64,
    ) -> Option<Self> {
        if !(window_s > 0.0) {
            return None;
        }
        Some(Self {
            begin_s: onset_s - window_s,
            onset_s,
            category,
            start: state.telemetry(),
            target: RAMP_TARGET,
        })
    }
}

/// Linear interpolation from `start` at `begin` to `target` at `onset`.
pub fn ramp_value(start: f64, target: f64, begin: f64, onset: f64, t: f64) -> f64 {
    if onset <= begin || t >= onset {
        return target;
    }
    if t <= begin {
        return start;
    }
    start + (target - start) * (t - begin) / (onset - begin)
}

/// Applies the ramp at time `t`. A channel never improves because of a
/// ramp: the result is the larger of the ramp value and the current value.
pub fn pre_failure_ramp(state: &DeviceState, plan: &RampPlan, t: f64) -> DeviceState {
    let mut next = state.clone();
    apply_ramp_in_place(&mut next, plan, t);
    next
}

pub(crate) fn apply_ramp_in_place(state: &mut DeviceState, plan: &RampPlan, t: f64) {
    for &ch in ramp_channels(plan.category) {
        let start = plan.start[ch.index()];
        let v = ramp_value(start, plan.target, plan.begin_s, plan.onset_s, t);
        state.set(ch, v.max(state.get(ch)).clamp(0.0, 100.0));
    }
}
