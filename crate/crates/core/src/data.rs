//! Training data: bars and stripes, Ising spectra and labeled splits.
//!
//! Spins follow `s_i = 1 - 2 b_i`, so bit 0 is spin +1 (the `Z` eigenvalue of
//! `|0>`). Labels use `y = 0` for the real / low-energy side.

use std::io::{Read, Write};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::statevec::BitString;

/// Largest spectrum that is enumerated exhaustively.
pub const MAX_SPECTRUM_SPINS: usize = 16;

/// All `rows x cols` binary images whose rows, or whose columns, are each
/// constant, flattened row-major and sorted by index.
pub fn bars_and_stripes(rows: usize, cols: usize) -> Vec<BitString> {
    let n = rows * cols;
    let mut out: Vec<BitString> = (0..1usize << n)
        .map(|i| BitString::from_index(i, n))
        .filter(|b| {
            let px = |r: usize, c: usize| b.bit(r * cols + c);
            let rows_const = (0..rows).all(|r| (0..cols).all(|c| px(r, c) == px(r, 0)));
            let cols_const = (0..cols).all(|c| (0..rows).all(|r| px(r, c) == px(0, c)));
            rows_const || cols_const
        })
        .collect();
    out.sort_by_key(BitString::index);
    out
}

/// The six 2x2 images, indices 0, 3, 5, 10, 12, 15.
pub fn bars_and_stripes_2x2() -> Vec<BitString> {
    bars_and_stripes(2, 2)
}

/// Classical Ising model `H = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingInstance {
    couplings: Vec<Vec<f64>>,
    fields: Vec<f64>,
}

impl IsingInstance {
    /// `couplings` must be symmetric with a zero diagonal.
    pub fn new(couplings: Vec<Vec<f64>>, fields: Vec<f64>) -> Result<Self> {
        let n = fields.len();
        if n == 0 {
            return Err(Error::Empty("ising fields"));
        }
        check_len("coupling rows", n, couplings.len())?;
        for (i, row) in couplings.iter().enumerate() {
            check_len("coupling row", n, row.len())?;
            if row[i] != 0.0 {
                return Err(Error::Config(format!("coupling J[{i}][{i}] must be zero")));
            }
            for j in 0..i {
                if row[j] != couplings[j][i] {
                    return Err(Error::Config(format!(
                        "couplings not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { couplings, fields })
    }

    /// Open chain with unit nearest-neighbour couplings and no field.
    pub fn chain(n_spins: usize) -> Result<Self> {
        if n_spins < 2 {
            return Err(Error::InvalidCount("a chain needs at least 2 spins".into()));
        }
        let mut j = vec![vec![0.0; n_spins]; n_spins];
        for i in 0..n_spins - 1 {
            j[i][i + 1] = 1.0;
            j[i + 1][i] = 1.0;
        }
        Self::new(j, vec![0.0; n_spins])
    }

    pub fn n_spins(&self) -> usize {
        self.fields.len()
    }

    pub fn couplings(&self) -> &[Vec<f64>] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn energy(&self, x: &BitString) -> Result<f64> {
        check_len("ising configuration", self.n_spins(), x.len())?;
        let s: Vec<f64> = x.iter().map(spin).collect();
        let mut e = 0.0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                e += self.couplings[i][j] * s[i] * s[j];
            }
            e += self.fields[i] * s[i];
        }
        Ok(e)
    }
}

#[inline]
fn spin(bit: bool) -> f64 {
    if bit {
        -1.0
    } else {
        1.0
    }
}

/// `sum_i s_i s_{i+1}` with open boundaries.
pub fn chain_energy(x: &BitString) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::InvalidCount(format!(
            "chain energy needs at least 2 spins, got {}",
            x.len()
        )));
    }
    Ok((0..x.len() - 1)
        .map(|i| spin(x.bit(i)) * spin(x.bit(i + 1)))
        .sum())
}

/// Every configuration with its energy, ascending; ties by basis index.
pub fn sorted_spectrum(instance: &IsingInstance) -> Result<Vec<(BitString, f64)>> {
    let n = instance.n_spins();
    if n > MAX_SPECTRUM_SPINS {
        return Err(Error::InvalidCount(format!(
            "spectrum enumeration capped at {MAX_SPECTRUM_SPINS} spins, got {n}"
        )));
    }
    let mut spectrum = (0..1usize << n)
        .map(|i| {
            let b = BitString::from_index(i, n);
            let e = instance.energy(&b)?;
            Ok((b, e))
        })
        .collect::<Result<Vec<_>>>()?;
    spectrum.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.index().cmp(&b.0.index())));
    Ok(spectrum)
}

pub const DEFAULT_QUARTILE_FRACTION: f64 = 0.25;

/// `k` distinct states drawn uniformly from the lowest `quartile_fraction` of
/// the sorted spectrum, returned in spectrum order.
pub fn select_training_states<R: Rng + ?Sized>(
    instance: &IsingInstance,
    k: usize,
    quartile_fraction: f64,
    rng: &mut R,
) -> Result<Vec<BitString>> {
    let spectrum = sorted_spectrum(instance)?;
    if !(quartile_fraction > 0.0 && quartile_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "quartile fraction {quartile_fraction} outside (0, 1]"
        )));
    }
    let pool = (quartile_fraction * spectrum.len() as f64).floor() as usize;
    if k == 0 || k > pool {
        return Err(Error::InvalidCount(format!(
            "cannot draw {k} states from a pool of {pool}"
        )));
    }
    let mut picked = sample(rng, pool, k).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| spectrum[i].0.clone()).collect())
}

/// One labeled example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledItem {
    pub bits: BitString,
    pub label: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    pub items: Vec<LabeledItem>,
}

impl LabeledDataset {
    pub fn new(items: Vec<LabeledItem>) -> Result<Self> {
        if let Some(first) = items.first() {
            for item in &items {
                check_len("dataset bit string", first.bits.len(), item.bits.len())?;
                if item.label > 1 {
                    return Err(Error::Config(format!("label {} is not binary", item.label)));
                }
            }
        }
        Ok(Self { items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn count_label(&self, label: u8) -> usize {
        self.items.iter().filter(|i| i.label == label).count()
    }

    /// Rows `bits,label[,energy]` under a header line.
    pub fn write_text<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        let with_energy = self.items.iter().any(|i| i.energy.is_some());
        if with_energy {
            w.write_record(["bits", "label", "energy"]).map_err(csv_err)?;
        } else {
            w.write_record(["bits", "label"]).map_err(csv_err)?;
        }
        for item in &self.items {
            let mut rec = vec![item.bits.to_string(), item.label.to_string()];
            if with_energy {
                rec.push(item.energy.map(|e| e.to_string()).unwrap_or_default());
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut items = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let bits = field(0)
                .parse()
                .map_err(|e| Error::Config(format!("{e}")))?;
            let label = field(1)
                .parse()
                .map_err(|_| Error::Config(format!("bad label {:?}", field(1))))?;
            let energy = match rec.get(2) {
                Some(s) if !s.is_empty() => Some(
                    s.parse()
                        .map_err(|_| Error::Config(format!("bad energy {s:?}")))?,
                ),
                _ => None,
            };
            items.push(LabeledItem {
                bits,
                label,
                energy,
            });
        }
        Self::new(items)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Bars and stripes as a supervised task: members `y = 0`, the rest `y = 1`.
pub fn bars_and_stripes_task() -> LabeledDataset {
    let members: Vec<usize> = bars_and_stripes_2x2().iter().map(BitString::index).collect();
    LabeledDataset {
        items: (0..16)
            .map(|i| LabeledItem {
                bits: BitString::from_index(i, 4),
                label: u8::from(!members.contains(&i)),
                energy: None,
            })
            .collect(),
    }
}

/// How an Ising spectrum is cut into low (`y = 0`) and high (`y = 1`) states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitMode {
    /// Lower half against upper half of the full spectrum.
    Balanced,
    /// The `n_low` lowest states against all others.
    ImbalancedFull { n_low: usize },
    /// The `n_low` lowest states against `n_high` drawn from the rest.
    Reduced { n_low: usize, n_high: usize },
}

pub fn labeled_split<R: Rng + ?Sized>(
    instance: &IsingInstance,
    mode: SplitMode,
    rng: &mut R,
) -> Result<LabeledDataset> {
    let spectrum = sorted_spectrum(instance)?;
    let total = spectrum.len();
    let item = |(bits, e): &(BitString, f64), label: u8| LabeledItem {
        bits: bits.clone(),
        label,
        energy: Some(*e),
    };
    let items = match mode {
        SplitMode::Balanced => spectrum
            .iter()
            .enumerate()
            .map(|(i, s)| item(s, u8::from(i >= total / 2)))
            .collect(),
        SplitMode::ImbalancedFull { n_low } => {
            if n_low == 0 || n_low >= total {
                return Err(Error::InvalidCount(format!(
                    "{n_low} low states out of {total}"
                )));
            }
            spectrum
                .iter()
                .enumerate()
                .map(|(i, s)| item(s, u8::from(i >= n_low)))
                .collect()
        }
        SplitMode::Reduced { n_low, n_high } => {
            if n_low == 0 || n_high == 0 || n_low + n_high > total {
                return Err(Error::InvalidCount(format!(
                    "{n_low} low + {n_high} high states out of {total}"
                )));
            }
            let mut items: Vec<_> = spectrum[..n_low].iter().map(|s| item(s, 0)).collect();
            let mut picked = sample(rng, total - n_low, n_high).into_vec();
            picked.sort_unstable();
            items.extend(picked.into_iter().map(|i| item(&spectrum[n_low + i], 1)));
            items
        }
    };
    Ok(LabeledDataset { items })
}
