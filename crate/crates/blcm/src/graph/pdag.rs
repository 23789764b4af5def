//! Partially directed graphs: Meek closure, consistent DAG extension, and
//! pattern construction. Internal machinery shared by CPDAG conversion and
//! greedy equivalence search.

/// Mutable partially directed graph over `n` nodes with adjacency-matrix
/// storage. Directed and undirected edges are disjoint by construction of
/// the mutators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Pdag {
    pub n: usize,
    dir: Vec<bool>,
    und: Vec<bool>,
}

impl Pdag {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            dir: vec![false; n * n],
            und: vec![false; n * n],
        }
    }

    #[inline]
    pub fn has_directed(&self, a: usize, b: usize) -> bool {
        self.dir[a * self.n + b]
    }

    #[inline]
    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.und[a * self.n + b]
    }

    #[inline]
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_directed(a, b) || self.has_directed(b, a) || self.has_undirected(a, b)
    }

    pub fn add_directed(&mut self, a: usize, b: usize) {
        debug_assert!(a != b && !self.adjacent(a, b));
        self.dir[a * self.n + b] = true;
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) {
        debug_assert!(a != b && !self.adjacent(a, b));
        self.und[a * self.n + b] = true;
        self.und[b * self.n + a] = true;
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.dir[a * self.n + b] = false;
        self.dir[b * self.n + a] = false;
        self.und[a * self.n + b] = false;
        self.und[b * self.n + a] = false;
    }

    /// Turn the undirected edge a–b into a→b.
    pub fn orient(&mut self, a: usize, b: usize) {
        debug_assert!(self.has_undirected(a, b));
        self.und[a * self.n + b] = false;
        self.und[b * self.n + a] = false;
        self.dir[a * self.n + b] = true;
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&a| self.has_directed(a, v)).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.has_directed(v, b)).collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.has_undirected(v, b)).collect()
    }

    pub fn adjacents(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| b != v && self.adjacent(v, b)).collect()
    }

    /// Pattern of a DAG: skeleton plus v-structure arrows.
    pub fn pattern_of_dag(n: usize, has_edge: &impl Fn(usize, usize) -> bool) -> Pdag {
        let mut p = Pdag::new(n);
        // collect v-structure arrows first, then lay down remaining skeleton
        let mut compelled = vec![false; n * n];
        for v in 0..n {
            let pa: Vec<usize> = (0..n).filter(|&a| has_edge(a, v)).collect();
            for (i, &a) in pa.iter().enumerate() {
                for &b in &pa[i + 1..] {
                    if !has_edge(a, b) && !has_edge(b, a) {
                        compelled[a * n + v] = true;
                        compelled[b * n + v] = true;
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if has_edge(a, b) {
                    if compelled[a * n + b] {
                        p.add_directed(a, b);
                    } else {
                        p.add_undirected(a, b);
                    }
                }
            }
        }
        p
    }

    /// Close under Meek's orientation rules R1–R3.
    ///
    /// R4 is only needed with background knowledge; every closure here starts
    /// from the pattern of a DAG, where R1–R3 suffice.
    pub fn meek_close(&mut self) {
        loop {
            let mut to_orient: Vec<(usize, usize)> = Vec::new();
            // R1: a→b, b–c, a not adjacent to c  =>  b→c
            for a in 0..self.n {
                for b in self.children(a) {
                    for c in self.neighbors(b) {
                        if c != a && !self.adjacent(a, c) {
                            to_orient.push((b, c));
                        }
                    }
                }
            }
            // R2: a→c→b, a–b  =>  a→b
            for a in 0..self.n {
                for b in self.neighbors(a) {
                    let reaches = self.children(a).iter().any(|&c| self.has_directed(c, b));
                    if reaches {
                        to_orient.push((a, b));
                    }
                }
            }
            // R3: a–b, a–c, a–d, c→b, d→b, c not adjacent to d  =>  a→b
            for a in 0..self.n {
                let nb = self.neighbors(a);
                for &b in &nb {
                    let pa_b = self.parents(b);
                    let cands: Vec<usize> =
                        pa_b.into_iter().filter(|&c| nb.contains(&c)).collect();
                    let mut fire = false;
                    for (i, &c) in cands.iter().enumerate() {
                        for &d in &cands[i + 1..] {
                            if !self.adjacent(c, d) {
                                fire = true;
                            }
                        }
                    }
                    if fire {
                        to_orient.push((a, b));
                    }
                }
            }
            let mut changed = false;
            for (a, b) in to_orient {
                if self.has_undirected(a, b) {
                    self.orient(a, b);
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }

    /// Consistent DAG extension (Dor–Tarsi): orient every undirected edge
    /// without creating new v-structures or cycles. Returns the full directed
    /// adjacency, or `None` if no extension exists.
    pub fn to_consistent_dag(&self) -> Option<Vec<bool>> {
        let n = self.n;
        let mut work = self.clone();
        let mut result = self.dir.clone();
        let mut alive = vec![true; n];
        let mut remaining = n;
        while remaining > 0 {
            let mut found = None;
            'outer: for x in 0..n {
                if !alive[x] {
                    continue;
                }
                if !work.children(x).is_empty() {
                    continue;
                }
                let nbrs = work.neighbors(x);
                let adjs = work.adjacents(x);
                for &y in &nbrs {
                    for &z in &adjs {
                        if z != y && !work.adjacent(y, z) {
                            continue 'outer;
                        }
                    }
                }
                found = Some(x);
                break;
            }
            let x = found?;
            for y in work.neighbors(x) {
                result[y * n + x] = true;
            }
            for v in 0..n {
                work.remove_edge(x, v);
            }
            alive[x] = false;
            remaining -= 1;
        }
        Some(result)
    }

    /// CPDAG of a DAG given by its directed adjacency: pattern + Meek closure.
    pub fn cpdag_of_dag(n: usize, adj: &[bool]) -> Pdag {
        let mut p = Pdag::pattern_of_dag(n, &|a, b| adj[a * n + b]);
        p.meek_close();
        p
    }
}
