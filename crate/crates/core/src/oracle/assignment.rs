use nalgebra::DMatrix;

/// Optimal permutation for a square cost matrix: row `i` goes to column
/// `columns[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub columns: Vec<usize>,
    pub cost: f64,
}

/// Exact minimum-cost perfect matching (Hungarian method with potentials,
/// `O(n³)`).
///
/// # Panics
/// If `cost` is not square or contains non-finite entries.
pub fn hungarian(cost: &DMatrix<f64>) -> Assignment {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "cost matrix must be square");
    assert!(cost.iter().all(|c| c.is_finite()), "cost matrix must be finite");
    if n == 0 {
        return Assignment { columns: vec![], cost: 0.0 };
    }

    // 1-based with a virtual column 0, following the classic formulation.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut columns = vec![0; n];
    for j in 1..=n {
        columns[p[j] - 1] = j - 1;
    }
    let total = columns.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
    Assignment { columns, cost: total }
}
