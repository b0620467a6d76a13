use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Integer momentum label.
pub type Mode = [i64; 3];

/// Cubic truncation `|n|_∞ ≤ M` of the momentum lattice of a torus of side `L`.
///
/// Coefficients are stored lexicographically in `(n_x, n_y, n_z)` with the last
/// component fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusLattice {
    length: f64,
    cutoff: usize,
}

impl TorusLattice {
    pub fn new(length: f64, cutoff: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid(format!(
                "box length must be positive, got {length}"
            )));
        }
        if cutoff == 0 {
            return Err(invalid("momentum cutoff must be at least 1"));
        }
        Ok(Self { length, cutoff })
    }

    /// Lattice holding every difference of two modes of `self`.
    pub fn difference(&self) -> Self {
        Self {
            length: self.length,
            cutoff: 2 * self.cutoff,
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Points per axis, `2M + 1`.
    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: Mode) -> bool {
        let m = self.cutoff as i64;
        n.iter().all(|c| c.abs() <= m)
    }

    pub fn index(&self, n: Mode) -> Option<usize> {
        if !self.contains(n) {
            return None;
        }
        let m = self.cutoff as i64;
        let s = self.side();
        Some((((n[0] + m) as usize * s) + (n[1] + m) as usize) * s + (n[2] + m) as usize)
    }

    pub fn mode(&self, index: usize) -> Mode {
        let s = self.side();
        let m = self.cutoff as i64;
        [
            (index / (s * s)) as i64 - m,
            ((index / s) % s) as i64 - m,
            (index % s) as i64 - m,
        ]
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }

    /// Physical momentum `2πn/L`.
    pub fn momentum(&self, n: Mode) -> [f64; 3] {
        let f = 2.0 * PI / self.length;
        [f * n[0] as f64, f * n[1] as f64, f * n[2] as f64]
    }

    /// Kinetic symbol `4π²|n|²/L²`.
    pub fn kinetic(&self, n: Mode) -> f64 {
        let f = 2.0 * PI / self.length;
        f * f * norm_sq(n) as f64
    }

    /// Kinetic symbol for every index, in storage order.
    pub fn kinetic_symbols(&self) -> Vec<f64> {
        self.modes().map(|n| self.kinetic(n)).collect()
    }

    /// Index permutation used for every reduction: shells of `|n|²` ascending,
    /// lexicographic within a shell. Cached per cutoff.
    pub fn reduction_order(&self) -> Arc<[u32]> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<[u32]>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(self.cutoff)
            .or_insert_with(|| {
                let mut order: Vec<u32> = (0..self.len() as u32).collect();
                order.sort_by_key(|&i| (norm_sq(self.mode(i as usize)), i));
                order.into()
            })
            .clone()
    }

    /// Sum of `f(index)` in the deterministic reduction order.
    pub fn ordered_sum(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        self.reduction_order().iter().map(|&i| f(i as usize)).sum()
    }
}

pub fn norm_sq(n: Mode) -> i64 {
    n[0] * n[0] + n[1] * n[1] + n[2] * n[2]
}

pub fn parse_mode(text: &str) -> Result<Mode> {
    let parts: Vec<&str> = text.split([',', ':']).map(str::trim).collect();
    if parts.len() != 3 {
        return Err(invalid(format!(
            "mode `{text}` needs three integer components"
        )));
    }
    let mut n = [0i64; 3];
    for (slot, p) in n.iter_mut().zip(&parts) {
        *slot = p
            .parse()
            .map_err(|_| invalid(format!("mode component `{p}` is not an integer")))?;
    }
    Ok(n)
}

pub fn format_mode(n: Mode) -> String {
    format!("{}:{}:{}", n[0], n[1], n[2])
}
