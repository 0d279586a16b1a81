//! Minimum-cost perfect matching on a square integer cost matrix
//! (Hungarian method with potentials, O(n³)).

/// Optimal assignment: `row_to_col[i]` is the column matched to row `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub cost: i64,
    pub row_to_col: Vec<usize>,
}

/// Solves the assignment problem for a row-major `n × n` matrix.
///
/// Panics if `costs.len() != n * n`.
pub fn min_cost_assignment(n: usize, costs: &[i64]) -> Assignment {
    assert_eq!(costs.len(), n * n, "cost matrix must be n × n");
    if n == 0 {
        return Assignment {
            cost: 0,
            row_to_col: Vec::new(),
        };
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based internally; index 0 is the virtual source.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_to = vec![INF; n + 1];
    let mut used = vec![false; n + 1];

    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0;
        min_to.iter_mut().for_each(|x| *x = INF);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = INF;
            let mut j1 = 0;
            let row_costs = &costs[(i0 - 1) * n..i0 * n];
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = row_costs[j - 1] - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    way[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        row_to_col[col_owner[j] - 1] = j - 1;
    }
    let cost = row_to_col
        .iter()
        .enumerate()
        .map(|(i, &j)| costs[i * n + j])
        .sum();
    Assignment { cost, row_to_col }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(n: usize, costs: &[i64]) -> i64 {
        fn go(row: usize, n: usize, costs: &[i64], used: &mut Vec<bool>) -> i64 {
            if row == n {
                return 0;
            }
            let mut best = i64::MAX;
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    best = best.min(costs[row * n + j] + go(row + 1, n, costs, used));
                    used[j] = false;
                }
            }
            best
        }
        go(0, n, costs, &mut vec![false; n])
    }

    #[test]
    fn small_examples() {
        assert_eq!(min_cost_assignment(0, &[]).cost, 0);
        assert_eq!(min_cost_assignment(1, &[7]).cost, 7);
        let a = min_cost_assignment(3, &[4, 1, 3, 2, 0, 5, 3, 2, 2]);
        assert_eq!(a.cost, 5);
        assert_eq!(a.row_to_col, vec![1, 0, 2]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            (n, costs) in (1usize..7).prop_flat_map(|n| (Just(n), proptest::collection::vec(-20i64..50, n * n)))
        ) {
            let a = min_cost_assignment(n, &costs);
            prop_assert_eq!(a.cost, brute_force(n, &costs));
            let mut cols = a.row_to_col.clone();
            cols.sort_unstable();
            prop_assert_eq!(cols, (0..n).collect::<Vec<_>>());
        }
    }
}
