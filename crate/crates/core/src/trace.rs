//! Uniformly sampled multi-channel signals.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::stl::StlError;

/// A discrete-time, uniformly sampled, multi-channel signal.
///
/// Every channel carries exactly `len` samples taken `dt` seconds apart.
/// Channels are keyed by name so formulas can refer to them symbolically;
/// the map is ordered, which keeps every traversal deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    dt: f64,
    len: usize,
    channels: BTreeMap<String, Vec<f64>>,
}

impl Trace {
    /// Creates an empty trace skeleton with the given sampling period and length.
    pub fn new(dt: f64, len: usize) -> Result<Self, StlError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(StlError::BadTrace("dt must be positive and finite"));
        }
        if len == 0 {
            return Err(StlError::BadTrace("trace must hold at least one sample"));
        }
        Ok(Self {
            dt,
            len,
            channels: BTreeMap::new(),
        })
    }

    /// Adds a channel; its length must match the trace length.
    pub fn insert_channel(
        &mut self,
        name: impl Into<String>,
        series: Vec<f64>,
    ) -> Result<(), StlError> {
        if series.len() != self.len {
            return Err(StlError::BadTrace("channel length mismatch"));
        }
        self.channels.insert(name.into(), series);
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // len >= 1 by construction
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.get(name).map(|v| v.as_slice())
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.keys().map(|s| s.as_str())
    }

    pub fn has_channel(&self, name: &str) -> bool {
        self.channels.contains_key(name)
    }

    /// Sample of a named channel at index `t`.
    pub fn sample(&self, name: &str, t: usize) -> Result<f64, StlError> {
        let series = self
            .channels
            .get(name)
            .ok_or_else(|| StlError::UnknownChannel(name.into()))?;
        series
            .get(t)
            .copied()
            .ok_or(StlError::BadTrace("sample index out of range"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Trace::new(0.0, 5).is_err());
        assert!(Trace::new(0.5, 0).is_err());
        let mut tr = Trace::new(0.5, 3).unwrap();
        assert!(tr.insert_channel("a", vec![1.0, 2.0]).is_err());
        assert!(tr.insert_channel("a", vec![1.0, 2.0, 3.0]).is_ok());
        assert_eq!(tr.sample("a", 1).unwrap(), 2.0);
        assert!(tr.sample("b", 0).is_err());
    }
}
