/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<u32>,
    pub val: Vec<f64>,
}

impl CsrMatrix {
    /// Builds the sparsity pattern from (row, col) pairs; values start at zero.
    pub fn from_pattern(n: usize, mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _) in &pairs {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col: Vec<u32> = pairs.iter().map(|&(_, c)| c).collect();
        let nnz = col.len();
        CsrMatrix {
            n,
            row_ptr,
            col,
            val: vec![0.0; nnz],
        }
    }

    fn slot(&self, r: usize, c: usize) -> usize {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col[lo..hi].binary_search(&(c as u32)) {
            Ok(k) => lo + k,
            Err(_) => panic!("entry ({r}, {c}) outside sparsity pattern"),
        }
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self.slot(r, c);
        self.val[k] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col[lo..hi].binary_search(&(c as u32)) {
            Ok(k) => self.val[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k] as usize];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// Same pattern, values scaled by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        let mut m = self.clone();
        for v in &mut m.val {
            *v *= a;
        }
        m
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[k] as usize;
                if (self.val[k] - self.get(j, i)).abs() > tol * (1.0 + self.val[k].abs()) {
                    return false;
                }
            }
        }
        true
    }
}
