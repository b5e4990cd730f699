/// Dense table over a set of discrete variables, last variable fastest.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// Stride of each of `vars` inside factor `f` (0 when `f` does not mention it).
fn strides_in(f: &Factor, vars: &[usize]) -> Vec<usize> {
    let own = strides(&f.cards);
    vars.iter()
        .map(|v| f.vars.iter().position(|w| w == v).map_or(0, |p| own[p]))
        .collect()
}

/// Calls `visit(out_index, offsets)` for every assignment of `cards`, where
/// `offsets[k]` is the running linear index under `stride_sets[k]`.
fn odometer<const K: usize>(
    cards: &[usize],
    stride_sets: [&[usize]; K],
    mut visit: impl FnMut(usize, [usize; K]),
) {
    let total: usize = cards.iter().product();
    let mut digit = vec![0usize; cards.len()];
    let mut off = [0usize; K];
    for out in 0..total {
        visit(out, off);
        for d in (0..cards.len()).rev() {
            digit[d] += 1;
            for k in 0..K {
                off[k] += stride_sets[k][d];
            }
            if digit[d] < cards[d] {
                break;
            }
            for k in 0..K {
                off[k] -= stride_sets[k][d] * cards[d];
            }
            digit[d] = 0;
        }
    }
}

impl Factor {
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(vars.len(), cards.len());
        debug_assert_eq!(values.len(), cards.iter().product::<usize>());
        Factor { vars, cards, values }
    }

    pub fn scalar(v: f64) -> Self {
        Factor { vars: vec![], cards: vec![], values: vec![v] }
    }

    pub fn card_of(&self, var: usize) -> Option<usize> {
        self.vars.iter().position(|&v| v == var).map(|p| self.cards[p])
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(v) {
                vars.push(*v);
                cards.push(*c);
            }
        }
        let sa = strides_in(self, &vars);
        let sb = strides_in(other, &vars);
        let mut values = vec![0.0; cards.iter().product()];
        odometer(&cards, [&sa, &sb], |out, [ia, ib]| {
            values[out] = self.values[ia] * other.values[ib];
        });
        Factor { vars, cards, values }
    }

    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let target = Factor { values: vec![0.0; cards.iter().product()], vars, cards };
        let st = strides_in(&target, &self.vars);
        let mut values = target.values;
        odometer(&self.cards, [&st], |src, [dst]| values[dst] += self.values[src]);
        Factor { values, ..target }
    }

    /// Keeps only the entries where `var == state`, dropping `var`.
    pub fn restrict(&self, var: usize, state: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let own = strides(&self.cards);
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let mut src_strides = own.clone();
        src_strides.remove(pos);
        let base = state * own[pos];
        let mut values = vec![0.0; cards.iter().product()];
        odometer(&cards, [&src_strides], |out, [src]| values[out] = self.values[base + src]);
        Factor { vars, cards, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(f: &Factor, assignment: &[(usize, usize)]) -> f64 {
        let s = strides(&f.cards);
        let idx: usize = f
            .vars
            .iter()
            .zip(&s)
            .map(|(v, st)| assignment.iter().find(|(w, _)| w == v).unwrap().1 * st)
            .sum();
        f.values[idx]
    }

    #[test]
    fn product_matches_pointwise() {
        let a = Factor::new(vec![0, 1], vec![2, 3], (0..6).map(|x| x as f64 + 1.0).collect());
        let b = Factor::new(vec![2, 1], vec![2, 3], (0..6).map(|x| 0.5 * x as f64).collect());
        let p = a.product(&b);
        assert_eq!(p.vars, vec![0, 1, 2]);
        for x in 0..2 {
            for y in 0..3 {
                for z in 0..2 {
                    let asg = [(0, x), (1, y), (2, z)];
                    assert_eq!(at(&p, &asg), at(&a, &asg) * at(&b, &asg));
                }
            }
        }
    }

    #[test]
    fn sum_out_and_restrict() {
        let a = Factor::new(vec![0, 1], vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(a.sum_out(0).values, vec![5.0, 7.0, 9.0]);
        assert_eq!(a.sum_out(1).values, vec![6.0, 15.0]);
        assert_eq!(a.restrict(0, 1).values, vec![4.0, 5.0, 6.0]);
        assert_eq!(a.restrict(1, 2).values, vec![3.0, 6.0]);
        assert_eq!(a.sum_out(0).sum_out(1).values, vec![21.0]);
    }
}
