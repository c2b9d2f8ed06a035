//! Per-channel on/off switch schedules for a tick-based controller.
//!
//! Each channel is a 50% duty square wave: high for half a period starting at
//! its rise tick. High maps to load state 2, matching the pulse of
//! [`ModulationWaveform`](crate::modulation::ModulationWaveform).

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_TICKS_PER_PERIOD: u32 = 360;

/// Nominal logic-high voltage of the controller outputs.
pub const DEFAULT_AMPLITUDE_V: f64 = 3.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub tick: u32,
    pub level: Level,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchSchedule {
    pub f0: f64,
    pub ticks_per_period: u32,
    /// Edges per channel, sorted by tick.
    pub channels: Vec<Vec<Edge>>,
    pub amplitude_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChannelTiming {
    pub rise_tick: u32,
    pub fall_tick: u32,
}

pub fn build_switch_schedule(
    phases_deg: &[f64],
    f0: f64,
    ticks_per_period: u32,
) -> Result<SwitchSchedule> {
    if ticks_per_period == 0 || !ticks_per_period.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "ticks per period must be a positive even number, got {ticks_per_period}"
        )));
    }
    if !(f0.is_finite() && f0 > 0.0) {
        return Err(Error::Parameter(format!("f0 must be positive, got {f0}")));
    }
    let ticks = ticks_per_period as f64;
    let half = ticks_per_period / 2;
    let channels = phases_deg
        .iter()
        .map(|&psi| {
            if !psi.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite phase {psi}")));
            }
            let rise =
                ((psi.rem_euclid(360.0) / 360.0 * ticks + 0.5).floor() as u32) % ticks_per_period;
            let fall = (rise + half) % ticks_per_period;
            let mut edges = vec![
                Edge {
                    tick: rise,
                    level: Level::High,
                },
                Edge {
                    tick: fall,
                    level: Level::Low,
                },
            ];
            edges.sort_by_key(|e| e.tick);
            Ok(edges)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SwitchSchedule {
        f0,
        ticks_per_period,
        channels,
        amplitude_v: DEFAULT_AMPLITUDE_V,
    })
}

impl SwitchSchedule {
    pub fn period(&self) -> f64 {
        1.0 / self.f0
    }

    pub fn tick_duration(&self) -> f64 {
        1.0 / (self.f0 * self.ticks_per_period as f64)
    }

    /// Rise and fall ticks of every channel, validating the edge structure.
    pub fn timings(&self) -> Result<Vec<ChannelTiming>> {
        let half = self.ticks_per_period / 2;
        self.channels
            .iter()
            .enumerate()
            .map(|(i, edges)| {
                let find = |level| {
                    let mut it = edges.iter().filter(|e| e.level == level);
                    match (it.next(), it.next()) {
                        (Some(e), None) => Ok(e.tick),
                        _ => Err(Error::Structure(format!(
                            "channel {i} needs exactly one {level:?} edge"
                        ))),
                    }
                };
                if edges.len() != 2 {
                    return Err(Error::Structure(format!(
                        "channel {i} has {} edges, expected 2",
                        edges.len()
                    )));
                }
                let rise = find(Level::High)?;
                let fall = find(Level::Low)?;
                if rise >= self.ticks_per_period || fall != (rise + half) % self.ticks_per_period {
                    return Err(Error::Structure(format!(
                        "channel {i}: rise {rise}, fall {fall} is not a 50% duty pair"
                    )));
                }
                Ok(ChannelTiming {
                    rise_tick: rise,
                    fall_tick: fall,
                })
            })
            .collect()
    }

    /// Output level of `channel` at time `t` seconds.
    pub fn level_at(&self, channel: usize, t: f64) -> Result<Level> {
        let timing = *self
            .timings()?
            .get(channel)
            .ok_or_else(|| Error::Parameter(format!("no channel {channel}")))?;
        let ticks = self.ticks_per_period as u64;
        let tick = ((t / self.tick_duration()).floor() as i64).rem_euclid(ticks as i64) as u64;
        let since_rise = (tick + ticks - timing.rise_tick as u64) % ticks;
        Ok(if since_rise < ticks / 2 {
            Level::High
        } else {
            Level::Low
        })
    }

    /// Flat text table: one row per tick, one 0/1 column per channel.
    pub fn tick_table(&self) -> Result<String> {
        let timings = self.timings()?;
        let half = self.ticks_per_period / 2;
        let mut out = String::from("tick");
        for i in 0..timings.len() {
            out.push_str(&format!(",ch{}", i + 1));
        }
        out.push('\n');
        for tick in 0..self.ticks_per_period {
            out.push_str(&tick.to_string());
            for t in &timings {
                let since = (tick + self.ticks_per_period - t.rise_tick) % self.ticks_per_period;
                out.push_str(if since < half { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Phases recovered from rise ticks, `rise · 360° / ticks`.
pub fn schedule_roundtrip_phases(s: &SwitchSchedule) -> Result<Vec<f64>> {
    Ok(s.timings()?
        .iter()
        .map(|t| t.rise_tick as f64 * 360.0 / s.ticks_per_period as f64)
        .collect())
}
