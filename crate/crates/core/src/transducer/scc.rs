use super::Transducer;

/// Strongly connected components of the transition digraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentReport {
    /// Component id of every state.
    pub scc_of: Vec<usize>,
    /// States of each component, ascending. Ids are in reverse topological
    /// order (a component only reaches components with smaller ids).
    pub components: Vec<Vec<usize>>,
    /// Closed components: no edge leaves them.
    pub ergodic: Vec<usize>,
    /// States outside every ergodic component, ascending.
    pub transient_states: Vec<usize>,
    /// Exactly one component, closed, containing the initial state.
    pub is_minimal: bool,
}

impl ComponentReport {
    pub fn is_ergodic_state(&self, state: usize) -> bool {
        self.ergodic.contains(&self.scc_of[state])
    }
}

const UNVISITED: usize = usize::MAX;

/// Iterative Tarjan with an explicit call stack.
pub(super) fn analyze(t: &Transducer) -> ComponentReport {
    let n = t.num_states();
    let letters = t.input_letters();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut scc_of = vec![UNVISITED; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;
    // (state, next letter to explore)
    let mut calls: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        calls.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut letter)) = calls.last_mut() {
            if *letter < letters {
                let w = t.step(v, *letter).0;
                *letter += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let id = components.len();
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    scc_of[w] = id;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }

    let ergodic: Vec<usize> = (0..components.len())
        .filter(|&c| {
            components[c]
                .iter()
                .all(|&s| t.successors(s).all(|w| scc_of[w] == c))
        })
        .collect();
    let transient_states = (0..n).filter(|&s| !ergodic.contains(&scc_of[s])).collect();
    let is_minimal =
        components.len() == 1 && ergodic.len() == 1 && scc_of[t.initial()] == ergodic[0];
    ComponentReport {
        scc_of,
        components,
        ergodic,
        transient_states,
        is_minimal,
    }
}
