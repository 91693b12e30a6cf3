use std::ops::Range;

use crate::scalar::Scalar;

/// Number of weights in a flattened 3×3 kernel.
pub const FILTER_LEN: usize = 9;

pub type Filter<T> = [T; FILTER_LEN];

/// Row-major `n × 9` matrix of flattened 3×3 kernels.
///
/// Row `i` holds `(w00, w01, w02, w10, …, w22)` of the i-th filter.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterMatrix<T> {
    data: Vec<T>,
}

impl<T: Scalar> FilterMatrix<T> {
    pub fn new() -> Self {
        Self { data: Vec::new() }
    }

    pub fn with_capacity(rows: usize) -> Self {
        Self {
            data: Vec::with_capacity(rows * FILTER_LEN),
        }
    }

    /// Builds a matrix from a flat row-major buffer. Returns `None` when the
    /// length is not a multiple of 9.
    pub fn from_flat(data: Vec<T>) -> Option<Self> {
        (data.len() % FILTER_LEN == 0).then_some(Self { data })
    }

    pub fn from_rows<I>(rows: I) -> Self
    where
        I: IntoIterator<Item = Filter<T>>,
    {
        let mut m = Self::new();
        for r in rows {
            m.push(r);
        }
        m
    }

    pub fn push(&mut self, row: Filter<T>) {
        self.data.extend_from_slice(&row);
    }

    pub fn extend_from_slice(&mut self, flat: &[T]) {
        assert_eq!(flat.len() % FILTER_LEN, 0, "partial filter row");
        self.data.extend_from_slice(flat);
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / FILTER_LEN
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * FILTER_LEN..(i + 1) * FILTER_LEN]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * FILTER_LEN..(i + 1) * FILTER_LEN]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.data.chunks_exact(FILTER_LEN)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<T> {
        self.data
    }

    /// Copies the given rows into a new matrix.
    pub fn gather(&self, indices: &[usize]) -> Self {
        let mut out = Self::with_capacity(indices.len());
        for &i in indices {
            out.data.extend_from_slice(self.row(i));
        }
        out
    }

    pub fn slice_rows(&self, range: Range<usize>) -> Self {
        Self {
            data: self.data[range.start * FILTER_LEN..range.end * FILTER_LEN].to_vec(),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> FilterMatrix<U> {
        FilterMatrix {
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn view(&self) -> IndexView<'_, T> {
        IndexView {
            matrix: self,
            indices: None,
        }
    }

    pub fn select<'a>(&'a self, indices: &'a [usize]) -> IndexView<'a, T> {
        IndexView {
            matrix: self,
            indices: Some(indices),
        }
    }
}

/// Read access to a set of filters, owned or borrowed through an index set.
pub trait FilterSet<T: Scalar>: Sync {
    fn len(&self) -> usize;

    fn filter(&self, i: usize) -> &[T];

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<T: Scalar> FilterSet<T> for FilterMatrix<T> {
    fn len(&self) -> usize {
        self.n_rows()
    }

    fn filter(&self, i: usize) -> &[T] {
        self.row(i)
    }
}

/// A subset of a [`FilterMatrix`] addressed by row indices. Never copies
/// filter payloads.
#[derive(Debug, Clone, Copy)]
pub struct IndexView<'a, T> {
    matrix: &'a FilterMatrix<T>,
    indices: Option<&'a [usize]>,
}

impl<'a, T: Scalar> IndexView<'a, T> {
    pub fn indices(&self) -> Option<&'a [usize]> {
        self.indices
    }

    pub fn to_matrix(&self) -> FilterMatrix<T> {
        match self.indices {
            Some(ix) => self.matrix.gather(ix),
            None => self.matrix.clone(),
        }
    }
}

impl<T: Scalar> FilterSet<T> for IndexView<'_, T> {
    fn len(&self) -> usize {
        match self.indices {
            Some(ix) => ix.len(),
            None => self.matrix.n_rows(),
        }
    }

    fn filter(&self, i: usize) -> &[T] {
        match self.indices {
            Some(ix) => self.matrix.row(ix[i]),
            None => self.matrix.row(i),
        }
    }
}

impl<T: Scalar, S: FilterSet<T> + ?Sized> FilterSet<T> for &S {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn filter(&self, i: usize) -> &[T] {
        (**self).filter(i)
    }
}
