//! Brute-force oracles that share no code with the crate under test: groups
//! as explicit Cayley tables, restricted sums as dense coordinate vectors.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::Hash;

use algent_core::builders::{build, GroupDescriptor};
use algent_core::Group;
use serde_json::Value;

pub fn group(v: Value) -> Group {
    build(&GroupDescriptor::from_json(&v).expect("descriptor parses")).expect("descriptor builds")
}

/// A finite group given by its full multiplication table.
#[derive(Clone, Debug)]
pub struct Table {
    pub names: Vec<String>,
    pub mul: Vec<Vec<usize>>,
    pub e: usize,
}

impl Table {
    pub fn from_fn<T: Clone + Eq + Hash + std::fmt::Debug>(elems: Vec<T>, op: impl Fn(&T, &T) -> T) -> Table {
        let index: HashMap<T, usize> = elems.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        let mul: Vec<Vec<usize>> =
            elems.iter().map(|a| elems.iter().map(|b| index[&op(a, b)]).collect()).collect();
        let e = (0..elems.len()).find(|&i| (0..elems.len()).all(|j| mul[i][j] == j)).expect("identity exists");
        Table { names: elems.iter().map(|x| format!("{x:?}")).collect(), mul, e }
    }

    pub fn cyclic(n: usize) -> Table {
        Table::from_fn((0..n).collect(), |a, b| (a + b) % n)
    }

    /// `Q8` as signed quaternion units; units are 0 = 1, 1 = i, 2 = j, 3 = k.
    pub fn quaternion() -> Table {
        let elems: Vec<(bool, u8)> = [false, true].iter().flat_map(|&s| (0..4).map(move |u| (s, u))).collect();
        Table::from_fn(elems, |&(sa, a), &(sb, b)| {
            let (neg, u) = unit_product(a, b);
            (sa ^ sb ^ neg, u)
        })
    }

    /// Permutations of three letters under composition.
    pub fn sym3() -> Table {
        let perms: Vec<[usize; 3]> =
            vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        Table::from_fn(perms, |p, q| [p[q[0]], p[q[1]], p[q[2]]])
    }

    /// `Z(m) x| Z(k)` with the generator acting as multiplication by `u`.
    pub fn semidirect(m: u64, k: u64, u: u64) -> Table {
        let elems: Vec<(u64, u64)> = (0..m).flat_map(|a| (0..k).map(move |x| (a, x))).collect();
        Table::from_fn(elems, move |&(a, x), &(b, y)| {
            let mut ub = b;
            for _ in 0..x {
                ub = ub * u % m;
            }
            ((a + ub) % m, (x + y) % k)
        })
    }

    pub fn product(&self, other: &Table) -> Table {
        let elems: Vec<(usize, usize)> =
            (0..self.order()).flat_map(|a| (0..other.order()).map(move |b| (a, b))).collect();
        Table::from_fn(elems, |&(a, b), &(c, d)| (self.mul[a][c], other.mul[b][d]))
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn inv(&self, x: usize) -> usize {
        (0..self.order()).find(|&y| self.mul[x][y] == self.e).expect("inverse exists")
    }

    pub fn closure(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::from([self.e]);
        let mut stack = vec![self.e];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.mul[x][g];
                if set.insert(y) {
                    stack.push(y);
                }
            }
        }
        set
    }

    pub fn cyclic_subgroup(&self, x: usize) -> BTreeSet<usize> {
        self.closure(&[x])
    }

    pub fn product_set(&self, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> BTreeSet<usize> {
        a.iter().flat_map(|&x| b.iter().map(move |&y| self.mul[x][y])).collect()
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..self.order()).all(|b| self.mul[a][b] == self.mul[b][a]))
    }

    pub fn is_normal(&self, h: &BTreeSet<usize>) -> bool {
        (0..self.order()).all(|g| {
            let gi = self.inv(g);
            h.iter().all(|&x| h.contains(&self.mul[self.mul[g][x]][gi]))
        })
    }

    /// Every subgroup is normal iff every cyclic subgroup is.
    pub fn all_subgroups_normal(&self) -> bool {
        (0..self.order()).all(|x| self.is_normal(&self.cyclic_subgroup(x)))
    }

    pub fn is_hamiltonian(&self) -> bool {
        !self.is_abelian() && self.all_subgroups_normal()
    }

    /// Subgroups permute iff cyclic subgroups permute pairwise.
    pub fn is_quasihamiltonian(&self) -> bool {
        let cyc: Vec<BTreeSet<usize>> = (0..self.order()).map(|x| self.cyclic_subgroup(x)).collect();
        cyc.iter().all(|a| cyc.iter().all(|b| self.product_set(a, b) == self.product_set(b, a)))
    }

    pub fn derived_subgroup(&self) -> BTreeSet<usize> {
        let n = self.order();
        let comms: Vec<usize> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| self.mul[self.mul[self.inv(a)][self.inv(b)]][self.mul[a][b]])
            .collect();
        self.closure(&comms)
    }

    /// Sizes `|T_1|, ..., |T_n|` of the trajectory of `phi` along `base`.
    pub fn trajectory_sizes(&self, phi: &dyn Fn(usize) -> usize, base: &BTreeSet<usize>, n: usize) -> Vec<usize> {
        let mut t = base.clone();
        let mut img = base.clone();
        let mut sizes = vec![t.len()];
        for _ in 1..n {
            img = img.iter().map(|&x| phi(x)).collect();
            t = self.product_set(&t, &img);
            sizes.push(t.len());
        }
        sizes
    }
}

fn unit_product(a: u8, b: u8) -> (bool, u8) {
    match (a, b) {
        (0, x) | (x, 0) => (false, x),
        (x, y) if x == y => (true, 0),
        (1, 2) => (false, 3),
        (2, 3) => (false, 1),
        (3, 1) => (false, 2),
        (2, 1) => (true, 3),
        (3, 2) => (true, 1),
        (1, 3) => (true, 2),
        _ => unreachable!(),
    }
}

/// Elements of `Z(m)^d`, a window of a restricted sum, as dense vectors.
pub type Vector = Vec<u64>;

pub fn span(m: u64, gens: &[Vector]) -> HashSet<Vector> {
    let d = gens.first().map_or(0, Vec::len);
    let mut set: HashSet<Vector> = HashSet::from([vec![0; d]]);
    let mut stack = vec![vec![0; d]];
    while let Some(x) = stack.pop() {
        for g in gens {
            let y: Vector = x.iter().zip(g).map(|(a, b)| (a + b) % m).collect();
            if set.insert(y.clone()) {
                stack.push(y);
            }
        }
    }
    set
}

/// Trajectory sizes of a coordinatewise map on `Z(m)^d`, by explicit sums.
pub fn vector_trajectory_sizes(
    m: u64,
    base: &HashSet<Vector>,
    phi: &dyn Fn(&Vector) -> Vector,
    n: usize,
) -> Vec<usize> {
    let mut t = base.clone();
    let mut img: HashSet<Vector> = base.clone();
    let mut sizes = vec![t.len()];
    for _ in 1..n {
        img = img.iter().map(phi).collect();
        let mut next = HashSet::new();
        for x in &t {
            for y in &img {
                next.insert(x.iter().zip(y).map(|(a, b)| (a + b) % m).collect::<Vector>());
            }
        }
        t = next;
        sizes.push(t.len());
    }
    sizes
}

/// Unit vector `e_i` in `Z(m)^d`.
pub fn unit(d: usize, i: usize) -> Vector {
    let mut v = vec![0; d];
    v[i] = 1;
    v
}

/// Right shift by `k` coordinates, dropping what leaves the window.
pub fn shift_vector(v: &Vector, k: usize) -> Vector {
    let mut out = vec![0; v.len()];
    for (i, &x) in v.iter().enumerate() {
        if i + k < v.len() {
            out[i + k] = x;
        }
    }
    out
}
