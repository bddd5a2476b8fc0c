//! Walsh-Hadamard spreading of pilot-plus-data blocks and the 2D chip
//! mapping onto time-frequency tiles.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::ComplexFrame;

/// Normalized Sylvester-order Walsh-Hadamard sequence set.
///
/// Entry `(i, j)` is `(-1)^popcount(i & j) / sqrt(L)`; the matrix is
/// symmetric so sequence `c_i` is both row and column `i`. Indices are
/// 0-based here; the pilot index in [`crate::LinkConfig`] is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingMatrix {
    size: usize,
    pilot: usize,
    scale: f64,
}

impl SpreadingMatrix {
    /// `pilot` is the 0-based index of the pilot sequence.
    pub fn new(size: usize, pilot: usize) -> Result<Self> {
        if !size.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(size));
        }
        if pilot >= size {
            return Err(Error::SizeMismatch {
                expected: size,
                got: pilot + 1,
            });
        }
        Ok(SpreadingMatrix {
            size,
            pilot,
            scale: 1.0 / (size as f64).sqrt(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn pilot_index(&self) -> usize {
        self.pilot
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if (i & j).count_ones() & 1 == 0 {
            self.scale
        } else {
            -self.scale
        }
    }

    pub fn sequence(&self, i: usize) -> Vec<f64> {
        (0..self.size).map(|j| self.entry(i, j)).collect()
    }

    pub fn pilot_sequence(&self) -> Vec<f64> {
        self.sequence(self.pilot)
    }

    /// Dense row-major copy of the matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let l = self.size;
        let mut m = Vec::with_capacity(l * l);
        for i in 0..l {
            for j in 0..l {
                m.push(self.entry(i, j));
            }
        }
        m
    }

    /// `C * v` via the fast Walsh-Hadamard transform. Since `C` is
    /// symmetric and orthonormal this is also `C^H * v`, i.e. despreading
    /// with every sequence at once.
    pub fn transform(&self, v: &mut [Complex64]) {
        debug_assert_eq!(v.len(), self.size);
        fwht(v);
        for x in v.iter_mut() {
            *x *= self.scale;
        }
    }
}

/// Sylvester matrix of size `l` scaled by `1/sqrt(l)`, pilot on sequence 0.
pub fn wh_matrix(l: usize) -> Result<SpreadingMatrix> {
    SpreadingMatrix::new(l, 0)
}

/// In-place unnormalized fast Walsh-Hadamard transform (natural order).
pub fn fwht(v: &mut [Complex64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for k in start..start + h {
                let a = v[k];
                let b = v[k + h];
                v[k] = a + b;
                v[k + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// One block of `L - 1` data symbols plus the pilot.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetPayload {
    pub data: Vec<Complex64>,
    pub pilot: Complex64,
    pub boost: f64,
}

impl SubsetPayload {
    /// Pilot as transmitted, `sqrt(B) * x_p`.
    pub fn effective_pilot(&self) -> Complex64 {
        self.pilot * self.boost.sqrt()
    }

    /// Symbol vector indexed by sequence: data in order, skipping the pilot
    /// slot which holds `sqrt(B) * x_p`.
    pub fn symbol_vector(&self, pilot: usize) -> Vec<Complex64> {
        let l = self.data.len() + 1;
        let mut v = Vec::with_capacity(l);
        let mut data = self.data.iter();
        for i in 0..l {
            if i == pilot {
                v.push(self.effective_pilot());
            } else {
                v.push(*data.next().unwrap());
            }
        }
        v
    }
}

/// `s = sum_{i != p} c_i x_i + c_p sqrt(B) x_p`.
pub fn spread(payload: &SubsetPayload, c: &SpreadingMatrix) -> Result<Vec<Complex64>> {
    if payload.data.len() + 1 != c.size() {
        return Err(Error::SizeMismatch {
            expected: c.size() - 1,
            got: payload.data.len(),
        });
    }
    let mut v = payload.symbol_vector(c.pilot_index());
    c.transform(&mut v);
    Ok(v)
}

/// Inner product `c_i^H r` with sequence `i`.
pub fn despread(r: &[Complex64], c: &SpreadingMatrix, i: usize) -> Result<Complex64> {
    if r.len() != c.size() {
        return Err(Error::SizeMismatch {
            expected: c.size(),
            got: r.len(),
        });
    }
    Ok(r.iter()
        .enumerate()
        .map(|(j, &rj)| rj * c.entry(i, j))
        .sum())
}

/// Despreads with every sequence: element `i` of the result is `c_i^H r`.
pub fn despread_all(r: &[Complex64], c: &SpreadingMatrix) -> Result<Vec<Complex64>> {
    if r.len() != c.size() {
        return Err(Error::SizeMismatch {
            expected: c.size(),
            got: r.len(),
        });
    }
    let mut v = r.to_vec();
    c.transform(&mut v);
    Ok(v)
}

/// Order in which the `L` chips of a subset fill its `Lt x Lf` tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChipMapping {
    /// Fill `Lt` cells in time, then move to the next carrier.
    #[default]
    ZigzagTime,
    /// Like `ZigzagTime` but every other carrier runs backwards in time.
    SnakeTime,
    /// Fill `Lf` carriers, then move to the next OFDM symbol.
    ZigzagFrequency,
    SnakeFrequency,
}

impl ChipMapping {
    /// `(time offset, frequency offset)` of 0-based chip `j` in the tile.
    #[inline]
    pub fn position(self, j: usize, lt: usize, lf: usize) -> (usize, usize) {
        match self {
            ChipMapping::ZigzagTime => (j % lt, j / lt),
            ChipMapping::SnakeTime => {
                let (col, row) = (j / lt, j % lt);
                if col % 2 == 1 {
                    (lt - 1 - row, col)
                } else {
                    (row, col)
                }
            }
            ChipMapping::ZigzagFrequency => (j / lf, j % lf),
            ChipMapping::SnakeFrequency => {
                let (row, col) = (j / lf, j % lf);
                if row % 2 == 1 {
                    (row, lf - 1 - col)
                } else {
                    (row, col)
                }
            }
        }
    }
}

/// Layout of subsets over a frame. Subsets are numbered frequency-major:
/// all tiles of the first `Lt` symbols, then the next `Lt` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tiling {
    pub lt: usize,
    pub lf: usize,
    pub n_symbols: usize,
    pub n_carriers: usize,
    pub mapping: ChipMapping,
}

impl Tiling {
    pub fn new(lt: usize, lf: usize, n_symbols: usize, n_carriers: usize) -> Result<Self> {
        if lt == 0 || lf == 0 || n_symbols % lt != 0 || n_carriers % lf != 0 {
            return Err(Error::Tiling {
                rows: n_symbols,
                cols: n_carriers,
                lt,
                lf,
            });
        }
        Ok(Tiling {
            lt,
            lf,
            n_symbols,
            n_carriers,
            mapping: ChipMapping::ZigzagTime,
        })
    }

    pub fn with_mapping(mut self, mapping: ChipMapping) -> Self {
        self.mapping = mapping;
        self
    }

    pub fn chips_per_subset(&self) -> usize {
        self.lt * self.lf
    }

    pub fn n_subsets(&self) -> usize {
        (self.n_symbols / self.lt) * (self.n_carriers / self.lf)
    }

    /// Frame cell `(symbol, carrier)` of chip `j` in subset `s`.
    #[inline]
    pub fn cell(&self, s: usize, j: usize) -> (usize, usize) {
        let per_row = self.n_carriers / self.lf;
        let (tb, fb) = (s / per_row, s % per_row);
        let (dt, df) = self.mapping.position(j, self.lt, self.lf);
        (tb * self.lt + dt, fb * self.lf + df)
    }

    /// Carrier indices covered by subset `s`, in chip order.
    pub fn carriers(&self, s: usize) -> Vec<usize> {
        (0..self.chips_per_subset())
            .map(|j| self.cell(s, j).1)
            .collect()
    }
}

/// Places `chips` (subset-major, `L` per subset) onto a frame.
pub fn map_chips(chips: &[Complex64], tiling: &Tiling) -> Result<ComplexFrame> {
    let l = tiling.chips_per_subset();
    let expected = l * tiling.n_subsets();
    if chips.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            got: chips.len(),
        });
    }
    let mut frame = ComplexFrame::zeros(tiling.n_symbols, tiling.n_carriers);
    for (s, block) in chips.chunks_exact(l).enumerate() {
        for (j, &chip) in block.iter().enumerate() {
            let (t, f) = tiling.cell(s, j);
            frame.set(t, f, chip);
        }
    }
    Ok(frame)
}

/// Inverse of [`map_chips`].
pub fn demap_chips(frame: &ComplexFrame, tiling: &Tiling) -> Result<Vec<Complex64>> {
    if frame.dims() != (tiling.n_symbols, tiling.n_carriers) {
        return Err(Error::SizeMismatch {
            expected: tiling.n_symbols * tiling.n_carriers,
            got: frame.n_symbols() * frame.n_carriers(),
        });
    }
    let l = tiling.chips_per_subset();
    let mut chips = Vec::with_capacity(l * tiling.n_subsets());
    for s in 0..tiling.n_subsets() {
        for j in 0..l {
            let (t, f) = tiling.cell(s, j);
            chips.push(frame.get(t, f));
        }
    }
    Ok(chips)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::spawn_stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense_mul(m: &[f64], v: &[Complex64]) -> Vec<Complex64> {
        let l = v.len();
        (0..l)
            .map(|i| (0..l).map(|j| v[j] * m[i * l + j]).sum())
            .collect()
    }

    #[test]
    fn wh_small_cases() {
        assert_eq!(wh_matrix(1).unwrap().to_dense(), vec![1.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m2 = wh_matrix(2).unwrap().to_dense();
        for (a, b) in m2.iter().zip([h, h, h, -h]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(wh_matrix(6), Err(Error::NotPowerOfTwo(6))));
    }

    #[test]
    fn wh8_orthonormal_by_direct_product() {
        let m = wh_matrix(8).unwrap().to_dense();
        for i in 0..8 {
            for k in 0..8 {
                let dot: f64 = (0..8).map(|j| m[j * 8 + i] * m[j * 8 + k]).sum();
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-15, "({i},{k}) {dot}");
            }
        }
    }

    // Exact when sqrt(L) is a power of two (entries are powers of two);
    // otherwise 1/sqrt(L) is rounded and partial sums pick up an ulp or two.
    #[test]
    fn orthonormal_exactly_up_to_256() {
        for n in 1..=8 {
            let l = 1usize << n;
            let c = wh_matrix(l).unwrap();
            for i in 0..l {
                assert!((c.entry(i, 0).powi(2) * l as f64 - 1.0).abs() < 1e-15);
                for k in i..l {
                    let dot: f64 = (0..l).map(|j| c.entry(j, i) * c.entry(j, k)).sum();
                    let want = if i == k { 1.0 } else { 0.0 };
                    if n % 2 == 0 {
                        assert_eq!(dot, want, "L={l} ({i},{k})");
                    } else {
                        assert!((dot - want).abs() < 1e-14, "L={l} ({i},{k})");
                    }
                }
            }
        }
    }

    #[test]
    fn spread_pilot_only_l2() {
        let m = SpreadingMatrix::new(2, 1).unwrap();
        let p = SubsetPayload {
            data: vec![c(0.0, 0.0)],
            pilot: c(1.0, 0.0),
            boost: 1.0,
        };
        let s = spread(&p, &m).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s[0] - c(h, 0.0)).norm() < 1e-15);
        assert!((s[1] - c(-h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn spread_boosted_pilot_l4() {
        let m = SpreadingMatrix::new(4, 0).unwrap();
        let p = SubsetPayload {
            data: vec![c(0.0, 0.0); 3],
            pilot: c(1.0, 0.0),
            boost: 4.0,
        };
        let s = spread(&p, &m).unwrap();
        for chip in s {
            assert_eq!(chip, c(1.0, 0.0));
        }
    }

    #[test]
    fn spread_matches_dense_and_despread_inverts() {
        let mut rng = spawn_stream(5, 5);
        let l = 16;
        let m = SpreadingMatrix::new(l, 3).unwrap();
        let data: Vec<_> = (0..l - 1).map(|_| rng.complex_gaussian(1.0)).collect();
        let p = SubsetPayload {
            data: data.clone(),
            pilot: c(0.0, 1.0),
            boost: 2.5,
        };
        let s = spread(&p, &m).unwrap();
        let oracle = dense_mul(&m.to_dense(), &p.symbol_vector(3));
        for (a, b) in s.iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-13);
        }
        let back = despread_all(&s, &m).unwrap();
        let mut k = 0;
        for (i, y) in back.iter().enumerate() {
            if i == 3 {
                assert!((y / p.effective_pilot() - c(1.0, 0.0)).norm() < 1e-13);
            } else {
                assert!((y - data[k]).norm() < 1e-13);
                assert!((despread(&s, &m, i).unwrap() - data[k]).norm() < 1e-13);
                k += 1;
            }
        }
    }

    #[test]
    fn despread_orthogonality() {
        let m = wh_matrix(8).unwrap();
        let to_c = |v: Vec<f64>| v.into_iter().map(|x| c(x, 0.0)).collect::<Vec<_>>();
        let cp = to_c(m.sequence(0));
        let cq = to_c(m.sequence(5));
        assert!((despread(&cp, &m, 0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(despread(&cq, &m, 0).unwrap(), c(0.0, 0.0));
        assert!(despread(&cp[..4], &m, 0).is_err());
    }

    #[test]
    fn spread_rejects_wrong_size() {
        let m = wh_matrix(4).unwrap();
        let p = SubsetPayload {
            data: vec![c(0.0, 0.0); 2],
            pilot: c(1.0, 0.0),
            boost: 1.0,
        };
        assert!(spread(&p, &m).is_err());
    }

    #[test]
    fn zigzag_in_time_positions() {
        let t = Tiling::new(2, 2, 2, 2).unwrap();
        let cells: Vec<_> = (0..4).map(|j| t.cell(0, j)).collect();
        assert_eq!(cells, vec![(0, 0), (1, 0), (0, 1), (1, 1)]);
        let t = Tiling::new(1, 4, 1, 4).unwrap();
        assert_eq!(
            (0..4).map(|j| t.cell(0, j)).collect::<Vec<_>>(),
            vec![(0, 0), (0, 1), (0, 2), (0, 3)]
        );
        let t = Tiling::new(4, 1, 4, 1).unwrap();
        assert_eq!(
            (0..4).map(|j| t.cell(0, j)).collect::<Vec<_>>(),
            vec![(0, 0), (1, 0), (2, 0), (3, 0)]
        );
    }

    #[test]
    fn subsets_tile_frequency_major() {
        let t = Tiling::new(2, 2, 4, 6).unwrap();
        assert_eq!(t.n_subsets(), 6);
        assert_eq!(t.cell(1, 0), (0, 2));
        assert_eq!(t.cell(2, 0), (0, 4));
        assert_eq!(t.cell(3, 0), (2, 0));
        assert_eq!(t.cell(5, 3), (3, 5));
    }

    #[test]
    fn single_chip_lands_where_expected() {
        let t = Tiling::new(2, 2, 2, 4).unwrap();
        let mut chips = vec![c(0.0, 0.0); 8];
        chips[2] = c(1.0, 0.0);
        let frame = map_chips(&chips, &t).unwrap();
        assert_eq!(frame.get(0, 1), c(1.0, 0.0));
        assert_eq!(frame.energy(), 1.0);
    }

    #[test]
    fn map_rejects_partial_tiles() {
        assert!(Tiling::new(3, 2, 32, 1728).is_err());
        assert!(Tiling::new(2, 128, 32, 1728).is_err());
    }

    #[test]
    fn every_mapping_is_a_bijection() {
        for mapping in [
            ChipMapping::ZigzagTime,
            ChipMapping::SnakeTime,
            ChipMapping::ZigzagFrequency,
            ChipMapping::SnakeFrequency,
        ] {
            let t = Tiling::new(4, 8, 8, 16).unwrap().with_mapping(mapping);
            let mut seen = vec![false; 8 * 16];
            for s in 0..t.n_subsets() {
                for j in 0..t.chips_per_subset() {
                    let (r, col) = t.cell(s, j);
                    assert!(!seen[r * 16 + col], "{mapping:?}");
                    seen[r * 16 + col] = true;
                }
            }
            assert!(seen.iter().all(|&x| x));
        }
    }
}
