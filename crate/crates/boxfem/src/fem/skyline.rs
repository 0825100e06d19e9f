//! Envelope (skyline) storage with an in-place LDL^T factorization, plus the
//! reverse Cuthill-McKee ordering that keeps the envelope tight on swept
//! meshes.
//!
//! The matrix must be symmetric positive definite; a non-positive pivot
//! aborts factorization and reports the offending equation so the caller can
//! translate it into a mesh diagnostic (typically an unsupported part).
//! A Jacobi-preconditioned conjugate gradient on the same storage serves as
//! the iterative fallback.

/// Symmetric matrix stored by column envelopes: column `j` keeps rows
/// `first_row[j]..=j` contiguously, diagonal entry last.
pub struct Skyline {
    n: usize,
    first_row: Vec<usize>,
    colptr: Vec<usize>,
    a: Vec<f64>,
    /// Pivots after factorization.
    diag: Vec<f64>,
    factored: bool,
}

impl Skyline {
    /// Allocates the envelope; `first_row[j] <= j` is required.
    pub fn new(first_row: Vec<usize>) -> Self {
        let n = first_row.len();
        let mut colptr = Vec::with_capacity(n + 1);
        colptr.push(0);
        for (j, &f) in first_row.iter().enumerate() {
            assert!(f <= j, "envelope row {f} above diagonal {j}");
            colptr.push(colptr[j] + (j - f + 1));
        }
        let nnz = colptr[n];
        Skyline {
            n,
            first_row,
            colptr,
            a: vec![0.0; nnz],
            diag: vec![0.0; n],
            factored: false,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries (envelope size).
    pub fn envelope_len(&self) -> usize {
        self.a.len()
    }

    /// Adds `v` at symmetric position `(i, j)`; both triangles accepted.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        debug_assert!(
            r >= self.first_row[c],
            "entry ({r}, {c}) outside envelope starting at {}",
            self.first_row[c]
        );
        let idx = self.colptr[c] + (r - self.first_row[c]);
        self.a[idx] += v;
    }

    /// `y = A x` on the unfactored matrix.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert!(!self.factored, "matrix was already factored in place");
        y.fill(0.0);
        for j in 0..self.n {
            let f = self.first_row[j];
            let col = &self.a[self.colptr[j]..self.colptr[j + 1]];
            let mut acc = 0.0;
            for (k, &v) in (f..j).zip(col.iter()) {
                acc += v * x[k];
                y[k] += v * x[j];
            }
            y[j] += acc + col[j - f] * x[j];
        }
    }

    /// Diagonal of the unfactored matrix.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.a[self.colptr[j + 1] - 1]).collect()
    }

    /// In-place LDL^T. On failure returns the equation whose pivot was not
    /// positive.
    pub fn factorize(&mut self) -> Result<(), usize> {
        assert!(!self.factored);
        let mut w = vec![0.0; self.n];
        // Tolerance relative to the largest diagonal entry.
        let max_diag = (0..self.n)
            .map(|j| self.a[self.colptr[j + 1] - 1].abs())
            .fold(0.0f64, f64::max);
        let tol = 1e-14 * max_diag;
        for j in 0..self.n {
            let fj = self.first_row[j];
            let (head, cur) = self.a.split_at_mut(self.colptr[j]);
            let col_j = &mut cur[..self.colptr[j + 1] - self.colptr[j]];
            w[fj..=j].copy_from_slice(col_j);
            for i in (fj + 1)..j {
                let fi = self.first_row[i];
                let start = fi.max(fj);
                let li = &head[self.colptr[i] + (start - fi)..self.colptr[i] + (i - fi)];
                let mut acc = 0.0;
                for (lv, wv) in li.iter().zip(&w[start..i]) {
                    acc += lv * wv;
                }
                w[i] -= acc;
            }
            let mut dj = w[j];
            for k in fj..j {
                let l = w[k] / self.diag[k];
                dj -= l * w[k];
                col_j[k - fj] = l;
            }
            if !(dj > tol) || !dj.is_finite() {
                return Err(j);
            }
            col_j[j - fj] = dj;
            self.diag[j] = dj;
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` in place after [`Self::factorize`].
    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert!(self.factored, "factorize first");
        // Forward: y = L^-1 b.
        for j in 0..self.n {
            let fj = self.first_row[j];
            let col = &self.a[self.colptr[j]..self.colptr[j + 1] - 1];
            let mut acc = 0.0;
            for (lv, xv) in col.iter().zip(&x[fj..j]) {
                acc += lv * xv;
            }
            x[j] -= acc;
        }
        for j in 0..self.n {
            x[j] /= self.diag[j];
        }
        // Backward: x = L^-T z.
        for j in (0..self.n).rev() {
            let fj = self.first_row[j];
            let col = &self.a[self.colptr[j]..self.colptr[j + 1] - 1];
            let xj = x[j];
            for (lv, xv) in col.iter().zip(x[fj..j].iter_mut()) {
                *xv -= lv * xj;
            }
        }
    }
}

/// Jacobi-preconditioned conjugate gradient on the unfactored matrix.
///
/// Returns the solution and the achieved relative residual.
pub fn pcg_solve(
    a: &Skyline,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64), crate::fem::FemError> {
    let n = a.n();
    let inv_d: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Ok((vec![0.0; n], 0.0));
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_d).map(|(rv, dv)| rv * dv).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let norm_r = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_r <= tol * norm_b {
            return Ok((x, norm_r / norm_b));
        }
        for i in 0..n {
            z[i] = r[i] * inv_d[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        if it == max_iter - 1 {
            return Err(crate::fem::FemError::CgStalled {
                residual: norm_r / norm_b,
                iterations: max_iter,
            });
        }
    }
    unreachable!("max_iter must be positive")
}

/// Reverse Cuthill-McKee ordering of an undirected graph given as adjacency
/// lists. Returns `perm` with `perm[new] = old`; disconnected components are
/// ordered one after another. Deterministic: ties break on the node id.
pub fn reverse_cuthill_mckee(adj: &[Vec<u32>]) -> Vec<usize> {
    let n = adj.len();
    let degree = |v: usize| adj[v].len();
    let mut visited = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut scratch: Vec<u32> = Vec::new();

    // Breadth-first traversal from `start`, neighbours sorted by degree.
    let bfs = |start: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>, scratch: &mut Vec<u32>| {
        let base = out.len();
        visited[start] = true;
        out.push(start);
        let mut head = base;
        while head < out.len() {
            let v = out[head];
            head += 1;
            scratch.clear();
            scratch.extend(adj[v].iter().filter(|&&w| !visited[w as usize]));
            scratch.sort_by_key(|&w| (adj[w as usize].len(), w));
            for &w in scratch.iter() {
                if !visited[w as usize] {
                    visited[w as usize] = true;
                    out.push(w as usize);
                }
            }
        }
    };

    let mut cursor = 0usize;
    while order.len() < n {
        // Deterministic minimum-degree unvisited seed.
        while visited[cursor] {
            cursor += 1;
        }
        let mut seed = cursor;
        for v in cursor..n {
            if !visited[v] && degree(v) < degree(seed) {
                seed = v;
            }
        }
        // March towards a pseudo-peripheral node: restart the BFS from the
        // farthest minimum-degree node while the eccentricity grows.
        let mut trial: Vec<usize> = Vec::new();
        let mut trial_visited = visited.clone();
        bfs(seed, &mut trial_visited, &mut trial, &mut scratch);
        let component = trial.clone();
        for _ in 0..4 {
            let last = *trial.last().unwrap();
            let mut next_visited = visited.clone();
            let mut next: Vec<usize> = Vec::new();
            bfs(last, &mut next_visited, &mut next, &mut scratch);
            if next.len() != trial.len() {
                break;
            }
            if last == seed || next.last() == Some(&seed) {
                break;
            }
            seed = last;
            trial = next;
        }
        let _ = component;
        bfs(seed, &mut visited, &mut order, &mut scratch);
    }
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_skyline(m: &nalgebra::DMatrix<f64>) -> Skyline {
        let n = m.nrows();
        let mut first = vec![0usize; n];
        for j in 0..n {
            let mut f = j;
            for i in 0..j {
                if m[(i, j)] != 0.0 {
                    f = f.min(i);
                }
            }
            first[j] = f;
        }
        let mut sky = Skyline::new(first);
        for j in 0..n {
            for i in sky.first_row[j]..=j {
                let v = m[(i, j)];
                if v != 0.0 {
                    sky.add(i, j, v);
                }
            }
        }
        sky
    }

    fn random_spd(n: usize, seed: u64) -> nalgebra::DMatrix<f64> {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let b = nalgebra::DMatrix::from_fn(n, n, |_, _| next());
        let mut m = &b * b.transpose();
        for i in 0..n {
            m[(i, i)] += n as f64;
        }
        m
    }

    #[test]
    fn factorization_reproduces_dense_solutions() {
        for seed in [3u64, 17, 99] {
            let n = 24;
            let m = random_spd(n, seed);
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut sky = dense_to_skyline(&m);
            sky.factorize().unwrap();
            let mut x = b.clone();
            sky.solve_in_place(&mut x);
            let xb = nalgebra::DVector::from_vec(b.clone());
            let dense = m.clone().cholesky().unwrap().solve(&xb);
            for i in 0..n {
                assert!(
                    (x[i] - dense[i]).abs() < 1e-10 * dense.amax().max(1.0),
                    "seed {seed} row {i}: {} vs {}",
                    x[i],
                    dense[i]
                );
            }
        }
    }

    #[test]
    fn residual_of_skyline_solution_is_tiny() {
        let n = 60;
        let m = random_spd(n, 11);
        let mut sky = dense_to_skyline(&m);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let mut r = vec![0.0; n];
        sky.matvec(&b, &mut r);
        // matvec against dense first.
        let dense_r = &m * nalgebra::DVector::from_vec(b.clone());
        for i in 0..n {
            assert!((r[i] - dense_r[i]).abs() < 1e-10 * dense_r.amax());
        }
        sky.factorize().unwrap();
        let mut x = b.clone();
        sky.solve_in_place(&mut x);
        let res = &m * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(b);
        assert!(res.amax() < 1e-9);
    }

    #[test]
    fn indefinite_matrix_is_reported_with_its_equation() {
        let mut m = random_spd(10, 5);
        m[(7, 7)] = -50.0;
        // Keep symmetry intact; the negative pivot should surface at or
        // before column 7.
        let mut sky = dense_to_skyline(&m);
        match sky.factorize() {
            Err(eq) => assert!(eq <= 7),
            Ok(()) => panic!("expected a pivot failure"),
        }
    }

    #[test]
    fn pcg_matches_the_direct_solution() {
        let n = 40;
        let m = random_spd(n, 23);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i % 5) as f64).collect();
        let sky = dense_to_skyline(&m);
        let (x, res) = pcg_solve(&sky, &b, 1e-12, 10_000).unwrap();
        assert!(res <= 1e-12);
        let mut sky2 = dense_to_skyline(&m);
        sky2.factorize().unwrap();
        let mut xd = b.clone();
        sky2.solve_in_place(&mut xd);
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-8 * xd.iter().fold(1.0f64, |a, v| a.max(v.abs())));
        }
    }

    #[test]
    fn rcm_recovers_a_narrow_band_on_a_shuffled_path() {
        // Path graph of 50 nodes, randomly relabelled; RCM must bring the
        // bandwidth back to 1.
        let n = 50usize;
        let mut label: Vec<usize> = (0..n).collect();
        let mut state = 77u64;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            label.swap(i, j);
        }
        let mut adj = vec![Vec::new(); n];
        for k in 0..n - 1 {
            let (a, b) = (label[k] as u32, label[k + 1] as u32);
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        let perm = reverse_cuthill_mckee(&adj);
        let mut pos = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            pos[old] = new;
        }
        let mut bw = 0usize;
        for v in 0..n {
            for &w in &adj[v] {
                bw = bw.max(pos[v].abs_diff(pos[w as usize]));
            }
        }
        assert_eq!(bw, 1, "bandwidth after RCM");
    }

    #[test]
    fn rcm_handles_disconnected_components_deterministically() {
        // Two triangles, no edges between them.
        let adj: Vec<Vec<u32>> = vec![
            vec![1, 2],
            vec![0, 2],
            vec![0, 1],
            vec![4, 5],
            vec![3, 5],
            vec![3, 4],
        ];
        let p1 = reverse_cuthill_mckee(&adj);
        let p2 = reverse_cuthill_mckee(&adj);
        assert_eq!(p1, p2);
        let mut sorted = p1.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
    }
}
