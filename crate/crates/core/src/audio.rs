use alloc::vec::Vec;

use crate::{Error, Result};

/// A mono clip of real amplitudes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioClip {
    /// Builds a clip, checking that it is non-empty, finite and has a
    /// positive sample rate.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let clip = Self { samples, sample_rate };
        clip.validate()?;
        Ok(clip)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::EmptyAudio);
        }
        if self.sample_rate == 0 {
            return Err(Error::InvalidSampleRate);
        }
        if let Some(i) = self.samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Drops the first `n` samples. Used to simulate frame misalignment.
    pub fn skip(&self, n: usize) -> Result<Self> {
        Self::new(self.samples[n.min(self.samples.len())..].to_vec(), self.sample_rate)
    }

    /// Hard-clips into `[-1, 1]` and returns how many samples were touched.
    pub fn hard_clip(&mut self) -> usize {
        let mut count = 0;
        for s in &mut self.samples {
            if *s > 1.0 {
                *s = 1.0;
                count += 1;
            } else if *s < -1.0 {
                *s = -1.0;
                count += 1;
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_empty_and_nan() {
        assert_eq!(AudioClip::new(vec![], 44100), Err(Error::EmptyAudio));
        assert_eq!(AudioClip::new(vec![0.0, f64::NAN], 44100), Err(Error::NonFiniteSample(1)));
        assert_eq!(AudioClip::new(vec![0.0], 0), Err(Error::InvalidSampleRate));
    }

    #[test]
    fn hard_clip_counts() {
        let mut c = AudioClip::new(vec![1.5, -0.2, -1.01, 1.0], 8000).unwrap();
        assert_eq!(c.hard_clip(), 2);
        assert_eq!(c.samples, vec![1.0, -0.2, -1.0, 1.0]);
    }
}
