//! Flat f64 tensors used by the network. Layout is row-major and contiguous;
//! layers index through the slice helpers so loop order (and therefore
//! floating-point reduction order) stays fixed.

/// Batched sequence tensor, indexed `[batch][channel][time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub batch: usize,
    pub channels: usize,
    pub len: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(batch: usize, channels: usize, len: usize) -> Self {
        Tensor3 {
            batch,
            channels,
            len,
            data: vec![0.0; batch * channels * len],
        }
    }

    #[inline]
    pub fn row(&self, b: usize, c: usize) -> &[f64] {
        let start = (b * self.channels + c) * self.len;
        &self.data[start..start + self.len]
    }

    #[inline]
    pub fn row_mut(&mut self, b: usize, c: usize) -> &mut [f64] {
        let start = (b * self.channels + c) * self.len;
        &mut self.data[start..start + self.len]
    }

    #[inline]
    pub fn get(&self, b: usize, c: usize, t: usize) -> f64 {
        self.data[(b * self.channels + c) * self.len + t]
    }
}

/// Batched feature matrix, indexed `[row][col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2 {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2 {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Tensor2 {
            rows: rows.len(),
            cols,
            data,
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let start = r * self.cols;
        &mut self.data[start..start + self.cols]
    }
}

/// Activation flowing through the layer stack: a sequence until the flatten
/// point, a feature matrix afterwards.
#[derive(Debug, Clone)]
pub enum Value {
    Seq(Tensor3),
    Flat(Tensor2),
}

impl Value {
    pub fn batch(&self) -> usize {
        match self {
            Value::Seq(t) => t.batch,
            Value::Flat(t) => t.rows,
        }
    }

    pub fn into_seq(self) -> crate::Result<Tensor3> {
        match self {
            Value::Seq(t) => Ok(t),
            Value::Flat(_) => Err(crate::Error::ShapeMismatch(
                "expected a sequence activation, got a flat one".into(),
            )),
        }
    }

    pub fn into_flat(self) -> crate::Result<Tensor2> {
        match self {
            Value::Flat(t) => Ok(t),
            Value::Seq(_) => Err(crate::Error::ShapeMismatch(
                "expected a flat activation, got a sequence".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor3_rows_are_contiguous() {
        let mut t = Tensor3::zeros(2, 3, 4);
        t.row_mut(1, 2)[3] = 5.0;
        assert_eq!(t.get(1, 2, 3), 5.0);
        assert_eq!(t.data[(1 * 3 + 2) * 4 + 3], 5.0);
    }

    #[test]
    fn tensor2_from_rows() {
        let t = Tensor2::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(t.row(1), &[3.0, 4.0]);
        assert_eq!((t.rows, t.cols), (2, 2));
    }
}
