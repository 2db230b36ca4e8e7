use std::cmp::Ordering;

/// `a` is no worse than `b` everywhere and better somewhere (minimisation).
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Pareto fronts of `points`, best first; indices ascending within a front.
pub fn fast_nondominated_sort<V: AsRef<[f64]>>(points: &[V]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates(a, b) {
                dominated_by[i].push(j);
                count[j] += 1;
            } else if dominates(b, a) {
                dominated_by[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Preference sorting: the first front holds, for every objective, the
/// test minimising it (ties to the shorter test, then the earlier one);
/// everything else is ranked by non-dominated sorting.
///
/// With no objectives the whole population forms one front.
pub fn preference_sorting<V: AsRef<[f64]>>(points: &[V], lengths: &[usize]) -> Vec<Vec<usize>> {
    let n = points.len();
    let m = points.first().map_or(0, |p| p.as_ref().len());
    let mut first: Vec<usize> = Vec::new();
    for j in 0..m {
        let best = (0..n).min_by(|&a, &b| {
            let (x, y) = (points[a].as_ref()[j], points[b].as_ref()[j]);
            x.partial_cmp(&y).unwrap_or(Ordering::Equal).then(lengths[a].cmp(&lengths[b])).then(a.cmp(&b))
        });
        if let Some(b) = best {
            first.push(b);
        }
    }
    first.sort_unstable();
    first.dedup();
    let rest: Vec<usize> = (0..n).filter(|i| first.binary_search(i).is_err()).collect();
    let sub: Vec<&[f64]> = rest.iter().map(|&i| points[i].as_ref()).collect();
    let mut fronts = Vec::new();
    if !first.is_empty() {
        fronts.push(first);
    }
    for f in fast_nondominated_sort(&sub) {
        fronts.push(f.into_iter().map(|k| rest[k]).collect());
    }
    fronts
}

/// Subvector-dominance diversity: for each point, the smallest number of
/// objectives on which it beats any other member. A singleton scores 0.
pub fn subvector_dominance<V: AsRef<[f64]>>(front: &[V]) -> Vec<f64> {
    let n = front.len();
    (0..n)
        .map(|i| {
            let x = front[i].as_ref();
            (0..n)
                .filter(|&j| j != i)
                .map(|j| x.iter().zip(front[j].as_ref()).filter(|(a, b)| a < b).count())
                .min()
                .unwrap_or(0) as f64
        })
        .collect()
}
