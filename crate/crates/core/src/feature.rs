//! Dense grids: multi-channel feature maps and single-channel depth maps.
//!
//! Layout is row-major with the channel index fastest, so the feature vector
//! of one grid cell is a contiguous slice.

use crate::error::{Error, Result};
use crate::real::Real;

/// Row-major index of a grid cell, `row * width + col`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeIndex(pub usize);

impl NodeIndex {
    pub fn encode(row: usize, col: usize, width: usize) -> Self {
        NodeIndex(row * width + col)
    }

    pub fn decode(self, width: usize) -> (usize, usize) {
        (self.0 / width, self.0 % width)
    }
}

fn check_dims(height: usize, width: usize, channels: usize) -> Result<()> {
    if height == 0 || width == 0 || channels == 0 {
        return Err(Error::Dimension(format!("dimensions must be positive, got {height}x{width}x{channels}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap<T = f64> {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Real> FeatureMap<T> {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        check_dims(height, width, channels)?;
        let expected = height * width * channels;
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "data length {} does not match {height}x{width}x{channels} = {expected}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value at offset {pos}")));
        }
        Ok(Self { height, width, channels, data })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::new(height, width, channels, vec![T::zero(); height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn node_count(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Channel vector of node `i`.
    pub fn node(&self, i: usize) -> &[T] {
        let c = self.channels;
        &self.data[i * c..(i + 1) * c]
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> T {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    /// Extracts one channel as a plain row-major vector.
    pub fn channel(&self, channel: usize) -> Result<Vec<T>> {
        if channel >= self.channels {
            return Err(Error::Index { index: channel, len: self.channels });
        }
        Ok(self.data.iter().skip(channel).step_by(self.channels).copied().collect())
    }

    pub fn cast<U: Real>(&self) -> FeatureMap<U> {
        FeatureMap {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self.data.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
        }
    }

    pub(crate) fn from_parts_unchecked(height: usize, width: usize, channels: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), height * width * channels);
        Self { height, width, channels, data }
    }
}

/// Single-channel nonnegative map.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap<T = f64> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> DepthMap<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        check_dims(height, width, 1)?;
        if data.len() != height * width {
            return Err(Error::Dimension(format!("data length {} does not match {height}x{width}", data.len())));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::Data(format!("depth at offset {pos} is not a finite nonnegative value")));
        }
        Ok(Self { height, width, data })
    }

    pub fn filled(height: usize, width: usize, value: T) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn at(&self, row: usize, col: usize) -> T {
        self.data[row * self.width + col]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.height == other.height && self.width == other.width
    }

    /// Multiplies every value by a nonnegative factor.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.height, self.width, self.data.iter().map(|v| *v * factor).collect())
    }

    /// Rescales values linearly onto `[0, 1]`; constant maps become all zero.
    pub fn min_max_normalized(&self) -> Self {
        let (lo, hi) = min_max(&self.data);
        let span = hi - lo;
        let data = if span > T::zero() {
            self.data.iter().map(|v| (*v - lo) / span).collect()
        } else {
            vec![T::zero(); self.data.len()]
        };
        Self { height: self.height, width: self.width, data }
    }

    /// Builds a depth map from one channel of a feature map, shifted by its
    /// minimum so that every value is nonnegative. Intended for visualisation.
    pub fn from_channel_shifted(map: &FeatureMap<T>, channel: usize) -> Result<Self> {
        let values = map.channel(channel)?;
        let (lo, _) = min_max(&values);
        Self::new(map.height(), map.width(), values.into_iter().map(|v| v - lo).collect())
    }

    pub fn into_feature_map(self) -> FeatureMap<T> {
        FeatureMap::from_parts_unchecked(self.height, self.width, 1, self.data)
    }
}

impl<T: Real> TryFrom<FeatureMap<T>> for DepthMap<T> {
    type Error = Error;

    fn try_from(map: FeatureMap<T>) -> Result<Self> {
        if map.channels() != 1 {
            return Err(Error::Dimension(format!("depth maps have one channel, got {}", map.channels())));
        }
        let (h, w) = (map.height(), map.width());
        DepthMap::new(h, w, map.into_data())
    }
}

pub(crate) fn min_max<T: Real>(values: &[T]) -> (T, T) {
    values.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}
