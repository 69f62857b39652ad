use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::spincore::{deer_frequencies, DeerFrequencies, FieldSetting, SpinPairSystem};
use crate::{Error, PhysicalConstants, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    /// Shift of A's line when B goes `|0> -> |-1>`.
    Dnu1,
    /// Shift of A's line when B goes `|0> -> |+1>`.
    Dnu2,
    Sum,
}

impl Observable {
    pub fn of(self, d: &DeerFrequencies) -> f64 {
        match self {
            Observable::Dnu1 => d.dnu1(),
            Observable::Dnu2 => d.dnu2(),
            Observable::Sum => d.sum(),
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Observable::Dnu1 => "dnu1",
            Observable::Dnu2 => "dnu2",
            Observable::Sum => "sum",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dnu1" | "Δν1" => Ok(Observable::Dnu1),
            "dnu2" | "Δν2" => Ok(Observable::Dnu2),
            "sum" | "dnu1+dnu2" | "Δν1+Δν2" => Ok(Observable::Sum),
            other => Err(Error::invalid(alloc::format!(
                "unknown observable `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeerEntry {
    pub field: FieldSetting,
    pub observable: Observable,
    /// Hz
    pub value: f64,
    /// Hz
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeerDataset {
    entries: Vec<DeerEntry>,
}

impl DeerDataset {
    pub fn new(entries: Vec<DeerEntry>) -> Result<Self> {
        for e in &entries {
            if !(e.sigma > 0.0 && e.sigma.is_finite()) {
                return Err(Error::invalid("dataset uncertainties must be positive"));
            }
            if !e.value.is_finite() {
                return Err(Error::invalid("dataset values must be finite"));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[DeerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct field settings, in first-appearance order, and for each entry the
    /// index of its field.
    pub(crate) fn field_groups(&self) -> (Vec<FieldSetting>, Vec<usize>) {
        let mut fields: Vec<FieldSetting> = Vec::new();
        let mut index = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            match fields.iter().position(|f| f == &e.field) {
                Some(i) => index.push(i),
                None => {
                    index.push(fields.len());
                    fields.push(e.field);
                }
            }
        }
        (fields, index)
    }
}

/// Forward model for one observable.
pub fn predict_value(
    system: &SpinPairSystem,
    field: &FieldSetting,
    observable: Observable,
    constants: &PhysicalConstants,
) -> Result<f64> {
    deer_frequencies(system, field, constants).map(|d| observable.of(&d))
}

/// Predicted value of every entry; a labeling failure is reported for its entry only.
pub fn predict_dataset(
    system: &SpinPairSystem,
    dataset: &DeerDataset,
    constants: &PhysicalConstants,
) -> Vec<Result<f64>> {
    let (fields, index) = dataset.field_groups();
    let freqs: Vec<Result<DeerFrequencies>> = fields
        .iter()
        .map(|f| deer_frequencies(system, f, constants))
        .collect();
    dataset
        .entries
        .iter()
        .zip(index)
        .map(|(e, i)| freqs[i].clone().map(|d| e.observable.of(&d)))
        .collect()
}
