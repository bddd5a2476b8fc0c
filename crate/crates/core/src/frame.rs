use num_complex::Complex64;

use crate::error::{Error, Result};

/// Time-frequency grid of complex cells, indexed `(ofdm_symbol, carrier)`
/// and stored row-major by OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFrame {
    n_symbols: usize,
    n_carriers: usize,
    cells: Vec<Complex64>,
}

impl ComplexFrame {
    pub fn zeros(n_symbols: usize, n_carriers: usize) -> Self {
        ComplexFrame {
            n_symbols,
            n_carriers,
            cells: vec![Complex64::new(0.0, 0.0); n_symbols * n_carriers],
        }
    }

    pub fn from_cells(n_symbols: usize, n_carriers: usize, cells: Vec<Complex64>) -> Result<Self> {
        if cells.len() != n_symbols * n_carriers {
            return Err(Error::SizeMismatch {
                expected: n_symbols * n_carriers,
                got: cells.len(),
            });
        }
        Ok(ComplexFrame {
            n_symbols,
            n_carriers,
            cells,
        })
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn n_carriers(&self) -> usize {
        self.n_carriers
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_symbols, self.n_carriers)
    }

    /// Checks that the frame tiles exactly into `lt x lf` subsets.
    pub fn check_tiling(&self, lt: usize, lf: usize) -> Result<()> {
        if lt == 0 || lf == 0 || self.n_symbols % lt != 0 || self.n_carriers % lf != 0 {
            return Err(Error::Tiling {
                rows: self.n_symbols,
                cols: self.n_carriers,
                lt,
                lf,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, symbol: usize, carrier: usize) -> Complex64 {
        self.cells[symbol * self.n_carriers + carrier]
    }

    #[inline]
    pub fn set(&mut self, symbol: usize, carrier: usize, value: Complex64) {
        self.cells[symbol * self.n_carriers + carrier] = value;
    }

    pub fn symbol(&self, symbol: usize) -> &[Complex64] {
        &self.cells[symbol * self.n_carriers..(symbol + 1) * self.n_carriers]
    }

    pub fn symbol_mut(&mut self, symbol: usize) -> &mut [Complex64] {
        &mut self.cells[symbol * self.n_carriers..(symbol + 1) * self.n_carriers]
    }

    pub fn cells(&self) -> &[Complex64] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [Complex64] {
        &mut self.cells
    }

    pub fn energy(&self) -> f64 {
        self.cells.iter().map(|c| c.norm_sqr()).sum()
    }
}
