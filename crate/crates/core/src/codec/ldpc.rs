//! Short systematic LDPC codes with a sum-product decoder.
//!
//! Parity-check matrices are built column by column from a seeded stream:
//! every column gets weight 3, row weights differ by at most one, and no two
//! columns share more than one check (girth ≥ 6). The columns are then
//! reordered so that the last `n - k` form an invertible block, which makes
//! the first `k` codeword positions carry the data word verbatim.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_DATA_BITS: usize = 16;
pub const DEFAULT_CODE_BITS: usize = 48;
pub const DEFAULT_MAX_BP_ITERATIONS: usize = 50;
pub const DEFAULT_CROSSOVER_PRIOR: f64 = 0.05;

const COLUMN_WEIGHT: usize = 3;
const MAX_ATTEMPTS: u64 = 1000;
/// Keeps `atanh` finite when a check sees near-certain inputs.
const TANH_CLAMP: f64 = 1.0 - 1e-12;

/// A data word of exactly `k_data` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DataWord(BitString);

impl DataWord {
    pub fn new(bits: BitString, code: &LdpcCode) -> Result<Self> {
        expect_len(code.k_data(), bits.len())?;
        Ok(Self(bits))
    }

    /// A 16-bit word, most significant bit first.
    pub fn from_u16(value: u16) -> Self {
        Self(BitString::from_u64(value as u64, 16).expect("16 bits"))
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn into_bits(self) -> BitString {
        self.0
    }
}

/// A block of exactly `n_code` bits produced by [`LdpcCode::encode`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword(BitString);

impl Codeword {
    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn into_bits(self) -> BitString {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub word: DataWord,
    /// Hamming distance between the received block and the decoder's output.
    pub corrected_bit_count: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdpcCode {
    seed: u64,
    k_data: usize,
    n_code: usize,
    /// Row-major parity checks; each row lists the codeword positions it covers.
    checks: Vec<Vec<usize>>,
    /// For each variable, the checks it participates in.
    var_checks: Vec<Vec<usize>>,
    /// Parity bit `i` (codeword position `k + i`) is the XOR of these data positions.
    parity_sources: Vec<Vec<usize>>,
    pub max_bp_iterations: usize,
    pub channel_crossover_prior: f64,
}

impl LdpcCode {
    /// Builds the code deterministically from `seed`.
    pub fn build(seed: u64, k_data: usize, n_code: usize) -> Result<Self> {
        if k_data == 0 || k_data >= n_code {
            return Err(Error::LdpcConstruction {
                seed,
                reason: format!("need 0 < k_data < n_code, got k_data={k_data}, n_code={n_code}"),
            });
        }
        let m = n_code - k_data;
        if m < 2 {
            return Err(Error::LdpcConstruction {
                seed,
                reason: format!("{m} parity rows cannot give every column weight >= 2"),
            });
        }
        let col_weight = COLUMN_WEIGHT.min(m);
        for attempt in 0..MAX_ATTEMPTS {
            let mut rng = rng::stream("ldpc-construction", seed, &[attempt]);
            let Some(columns) = place_columns(&mut rng, n_code, m, col_weight) else {
                continue;
            };
            let Some((order, parity_sources)) = systematic_form(&columns, m, k_data) else {
                continue;
            };
            let mut checks = vec![Vec::new(); m];
            let mut var_checks = vec![Vec::new(); n_code];
            for (pos, &col) in order.iter().enumerate() {
                for &row in &columns[col] {
                    checks[row].push(pos);
                    var_checks[pos].push(row);
                }
            }
            for row in &mut checks {
                row.sort_unstable();
            }
            for vc in &mut var_checks {
                vc.sort_unstable();
            }
            return Ok(Self {
                seed,
                k_data,
                n_code,
                checks,
                var_checks,
                parity_sources,
                max_bp_iterations: DEFAULT_MAX_BP_ITERATIONS,
                channel_crossover_prior: DEFAULT_CROSSOVER_PRIOR,
            });
        }
        Err(Error::LdpcConstruction {
            seed,
            reason: format!("no full-rank girth-6 matrix found in {MAX_ATTEMPTS} attempts"),
        })
    }

    pub fn with_decoder(mut self, max_bp_iterations: usize, crossover_prior: f64) -> Result<Self> {
        if !(crossover_prior > 0.0 && crossover_prior < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "crossover prior must lie in (0, 0.5), got {crossover_prior}"
            )));
        }
        if max_bp_iterations == 0 {
            return Err(Error::InvalidParameter("max_bp_iterations must be >= 1".into()));
        }
        self.max_bp_iterations = max_bp_iterations;
        self.channel_crossover_prior = crossover_prior;
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn k_data(&self) -> usize {
        self.k_data
    }

    pub fn n_code(&self) -> usize {
        self.n_code
    }

    pub fn rate(&self) -> f64 {
        self.k_data as f64 / self.n_code as f64
    }

    pub fn parity_rows(&self) -> usize {
        self.checks.len()
    }

    /// Dense `(n - k) × n` parity-check matrix.
    pub fn parity_matrix(&self) -> Vec<Vec<bool>> {
        self.checks
            .iter()
            .map(|row| {
                let mut dense = vec![false; self.n_code];
                for &c in row {
                    dense[c] = true;
                }
                dense
            })
            .collect()
    }

    pub fn syndrome_is_zero(&self, bits: &[bool]) -> bool {
        self.checks.iter().all(|row| !row.iter().fold(false, |acc, &c| acc ^ bits[c]))
    }

    pub fn is_codeword(&self, bits: &BitString) -> bool {
        bits.len() == self.n_code && self.syndrome_is_zero(bits.as_slice())
    }

    pub fn encode(&self, word: &DataWord) -> Result<Codeword> {
        expect_len(self.k_data, word.0.len())?;
        let data = word.0.as_slice();
        let mut out = Vec::with_capacity(self.n_code);
        out.extend_from_slice(data);
        out.extend(self.parity_sources.iter().map(|src| src.iter().fold(false, |acc, &j| acc ^ data[j])));
        Ok(Codeword(BitString::new(out)?))
    }

    /// Sum-product decoding over a binary symmetric channel.
    ///
    /// Non-convergence is reported through [`DecodeResult::converged`]; the
    /// returned word is then the final iteration's hard decision.
    pub fn decode(&self, received: &BitString) -> Result<DecodeResult> {
        expect_len(self.n_code, received.len())?;
        let rx = received.as_slice();
        if self.syndrome_is_zero(rx) {
            return Ok(self.result(rx.to_vec(), 0, true));
        }

        let p = self.channel_crossover_prior;
        let magnitude = ((1.0 - p) / p).ln();
        let channel: Vec<f64> = rx.iter().map(|&b| if b { -magnitude } else { magnitude }).collect();

        // Edge messages indexed in check-major order.
        let edge_start: Vec<usize> = self
            .checks
            .iter()
            .scan(0, |acc, row| {
                let s = *acc;
                *acc += row.len();
                Some(s)
            })
            .collect();
        let edge_count: usize = self.checks.iter().map(Vec::len).sum();
        let mut var_to_check = vec![0.0f64; edge_count];
        let mut check_to_var = vec![0.0f64; edge_count];
        for (c, row) in self.checks.iter().enumerate() {
            for (slot, &v) in row.iter().enumerate() {
                var_to_check[edge_start[c] + slot] = channel[v];
            }
        }
        // Edge lookup for each (variable, check) pair.
        let mut var_edges: Vec<Vec<usize>> = vec![Vec::new(); self.n_code];
        for (c, row) in self.checks.iter().enumerate() {
            for (slot, &v) in row.iter().enumerate() {
                var_edges[v].push(edge_start[c] + slot);
            }
        }

        let mut hard = rx.to_vec();
        let mut tanh_buf = Vec::new();
        for _ in 0..self.max_bp_iterations {
            for (c, row) in self.checks.iter().enumerate() {
                let base = edge_start[c];
                tanh_buf.clear();
                tanh_buf.extend((0..row.len()).map(|s| (var_to_check[base + s] / 2.0).tanh()));
                for s in 0..row.len() {
                    let prod: f64 = tanh_buf.iter().enumerate().filter(|&(t, _)| t != s).map(|(_, &x)| x).product();
                    check_to_var[base + s] = 2.0 * prod.clamp(-TANH_CLAMP, TANH_CLAMP).atanh();
                }
            }
            for v in 0..self.n_code {
                let total: f64 = channel[v] + var_edges[v].iter().map(|&e| check_to_var[e]).sum::<f64>();
                hard[v] = total < 0.0;
                for &e in &var_edges[v] {
                    var_to_check[e] = total - check_to_var[e];
                }
            }
            if self.syndrome_is_zero(&hard) {
                let corrected = count_diff(&hard, rx);
                return Ok(self.result(hard, corrected, true));
            }
        }
        let corrected = count_diff(&hard, rx);
        Ok(self.result(hard, corrected, false))
    }

    fn result(&self, mut bits: Vec<bool>, corrected: usize, converged: bool) -> DecodeResult {
        bits.truncate(self.k_data);
        DecodeResult {
            word: DataWord(BitString::new(bits).expect("k_data >= 1")),
            corrected_bit_count: corrected,
            converged,
        }
    }

    /// Checks each variable participates in; exposed for structural tests.
    pub fn variable_checks(&self, position: usize) -> &[usize] {
        &self.var_checks[position]
    }
}

fn expect_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

fn count_diff(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Assigns `col_weight` distinct rows to each of `n` columns, filling rows
/// with the most spare capacity first and rejecting any row that would give
/// two columns more than one shared check.
fn place_columns<R: Rng>(rng: &mut R, n: usize, m: usize, col_weight: usize) -> Option<Vec<Vec<usize>>> {
    let edges = n * col_weight;
    let mut capacity: Vec<usize> = (0..m).map(|r| edges / m + usize::from(r < edges % m)).collect();
    capacity.shuffle(rng);
    let mut pair_used = vec![vec![false; m]; m];
    let mut columns = Vec::with_capacity(n);
    for _ in 0..n {
        let mut rows: Vec<usize> = Vec::with_capacity(col_weight);
        let mut candidates: Vec<usize> = (0..m).filter(|&r| capacity[r] > 0).collect();
        candidates.shuffle(rng);
        candidates.sort_by(|a, b| capacity[*b].cmp(&capacity[*a]));
        for &r in &candidates {
            if rows.len() == col_weight {
                break;
            }
            if rows.iter().all(|&q| !pair_used[q][r]) {
                rows.push(r);
            }
        }
        if rows.len() < col_weight {
            return None;
        }
        for (i, &a) in rows.iter().enumerate() {
            capacity[a] -= 1;
            for &b in &rows[i + 1..] {
                pair_used[a][b] = true;
                pair_used[b][a] = true;
            }
        }
        rows.sort_unstable();
        columns.push(rows);
    }
    Some(columns)
}

/// Gaussian elimination over GF(2).
///
/// Returns the column order (information columns first, pivot columns last)
/// and, for each parity position, the information positions it sums.
fn systematic_form(columns: &[Vec<usize>], m: usize, k: usize) -> Option<(Vec<usize>, Vec<Vec<usize>>)> {
    let n = columns.len();
    let words = n.div_ceil(64);
    let mut rows = vec![vec![0u64; words]; m];
    for (c, col) in columns.iter().enumerate() {
        for &r in col {
            rows[r][c / 64] |= 1 << (c % 64);
        }
    }
    let bit = |row: &[u64], c: usize| (row[c / 64] >> (c % 64)) & 1 == 1;

    // Scan from the right so pivots prefer late columns.
    let mut pivots = Vec::with_capacity(m);
    let mut rank = 0;
    for c in (0..n).rev() {
        let Some(p) = (rank..m).find(|&r| bit(&rows[r], c)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && bit(row, c) {
                row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
            }
        }
        pivots.push(c);
        rank += 1;
        if rank == m {
            break;
        }
    }
    if rank < m {
        return None;
    }

    let is_pivot = {
        let mut v = vec![false; n];
        pivots.iter().for_each(|&c| v[c] = true);
        v
    };
    let info: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    debug_assert_eq!(info.len(), k);
    let mut order = info.clone();
    order.extend(pivots.iter().copied());

    // Reduced row r has a single pivot column pivots[r]; its parity bit is the
    // XOR of the information columns set in that row.
    let parity_sources = (0..m)
        .map(|r| info.iter().enumerate().filter(|&(_, &c)| bit(&rows[r], c)).map(|(pos, _)| pos).collect())
        .collect();
    Some((order, parity_sources))
}
