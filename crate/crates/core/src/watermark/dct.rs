//! Orthonormal 8×8 DCT-II and its inverse.

use std::sync::OnceLock;

pub const N: usize = 8;

fn basis() -> &'static [[f64; N]; N] {
    static BASIS: OnceLock<[[f64; N]; N]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut b = [[0.0; N]; N];
        for (k, row) in b.iter_mut().enumerate() {
            let scale = if k == 0 { (1.0 / N as f64).sqrt() } else { (2.0 / N as f64).sqrt() };
            for (n, v) in row.iter_mut().enumerate() {
                *v = scale * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / (2 * N) as f64).cos();
            }
        }
        b
    })
}

/// `out[u][v] = Σ_x Σ_y B[u][x] B[v][y] block[x][y]`.
pub fn forward(block: &[[f64; N]; N]) -> [[f64; N]; N] {
    let b = basis();
    let mut tmp = [[0.0; N]; N];
    for u in 0..N {
        for y in 0..N {
            tmp[u][y] = (0..N).map(|x| b[u][x] * block[x][y]).sum();
        }
    }
    let mut out = [[0.0; N]; N];
    for u in 0..N {
        for v in 0..N {
            out[u][v] = (0..N).map(|y| b[v][y] * tmp[u][y]).sum();
        }
    }
    out
}

pub fn inverse(coeffs: &[[f64; N]; N]) -> [[f64; N]; N] {
    let b = basis();
    let mut tmp = [[0.0; N]; N];
    for x in 0..N {
        for v in 0..N {
            tmp[x][v] = (0..N).map(|u| b[u][x] * coeffs[u][v]).sum();
        }
    }
    let mut out = [[0.0; N]; N];
    for x in 0..N {
        for y in 0..N {
            out[x][y] = (0..N).map(|v| b[v][y] * tmp[x][v]).sum();
        }
    }
    out
}
