//! Banded LU factorization with partial pivoting.

/// Square matrix with `kl` sub- and `ku` super-diagonals, stored row-wise with room for
/// the `kl` extra super-diagonals created by row interchanges.
#[derive(Debug, Clone)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl, "({i}, {j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl || j >= self.n {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` at `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside band kl={} ku={}", self.kl, self.ku);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Factorizes in place; `None` if a pivot column is exactly zero.
    pub fn factor(mut self) -> Option<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let reach = self.ku + self.kl;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            piv[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let m = self.data[ik] / d;
                self.data[ik] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= m * kj;
                    }
                }
            }
        }
        Some(BandedLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    m: Banded,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.m;
        let n = a.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for i in k + 1..=(k + a.kl).min(n - 1) {
                x[i] -= a.data[a.idx(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + a.ku + a.kl).min(n - 1) {
                s -= a.data[a.idx(k, j)] * x[j];
            }
            x[k] = s / a.data[a.idx(k, k)];
        }
        x
    }

    /// Ratio of largest to smallest pivot magnitude.
    pub fn pivot_ratio(&self) -> f64 {
        let a = &self.m;
        let d: Vec<f64> = (0..a.n).map(|k| a.data[a.idx(k, k)].abs()).collect();
        let hi = d.iter().cloned().fold(0.0, f64::max);
        let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_against_dense_oracle() {
        let n = 60;
        let (kl, ku) = (2, 7);
        let mut a = Banded::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // Weak diagonal forces pivoting.
                let v = if i == j { 0.01 } else { (((i * 31 + j * 17) % 13) as f64 - 6.0) / 7.0 };
                a.add(i, j, v);
                dense[i][j] = v;
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i][j] * x[j]).sum()).collect();
        assert!(a.mul_vec(&x).iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
        let lu = a.factor().unwrap();
        let y = lu.solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-9, "{p} vs {q}");
        }
    }

    #[test]
    fn zero_column_is_reported() {
        let mut a = Banded::zeros(3, 1, 1);
        a.add(0, 0, 1.0);
        a.add(2, 2, 1.0);
        assert!(a.factor().is_none());
    }
}
