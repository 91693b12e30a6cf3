use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use super::graph::ModelGraph;
use super::IngestError;

pub const CONV_OP: &str = "Conv";

/// For every node, the indices of the nodes producing its inputs.
fn producers(g: &ModelGraph) -> Vec<Vec<usize>> {
    let mut by_tensor: HashMap<&str, usize> = HashMap::new();
    for (i, n) in g.nodes.iter().enumerate() {
        for o in &n.outputs {
            if !o.is_empty() {
                by_tensor.insert(o.as_str(), i);
            }
        }
    }
    g.nodes
        .iter()
        .map(|n| {
            let mut p: Vec<usize> = n
                .inputs
                .iter()
                .filter_map(|t| by_tensor.get(t.as_str()).copied())
                .collect();
            p.sort_unstable();
            p.dedup();
            p
        })
        .collect()
}

/// Kahn's algorithm, always releasing the lowest ready node index first so
/// the order is a deterministic function of the file.
pub fn topological_order(g: &ModelGraph) -> Result<Vec<usize>, IngestError> {
    let prods = producers(g);
    let mut indegree: Vec<usize> = prods.iter().map(Vec::len).collect();
    let mut consumers = vec![Vec::new(); g.nodes.len()];
    for (i, ps) in prods.iter().enumerate() {
        for &p in ps {
            consumers[p].push(i);
        }
    }

    let mut ready: BinaryHeap<Reverse<usize>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| Reverse(i))
        .collect();
    let mut order = Vec::with_capacity(g.nodes.len());
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &c in &consumers[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }

    if order.len() != g.nodes.len() {
        let stuck = (0..g.nodes.len())
            .find(|&i| indegree[i] > 0)
            .map(|i| g.nodes[i].name.clone())
            .unwrap_or_default();
        return Err(IngestError::CycleDetected(stuck));
    }
    Ok(order)
}

/// Number of `Conv` nodes on the longest directed path from a graph input up
/// to, but excluding, each node. Non-conv nodes carry the running count.
pub fn compute_conv_depths(g: &ModelGraph) -> Result<BTreeMap<usize, usize>, IngestError> {
    let order = topological_order(g)?;
    let prods = producers(g);
    let mut below = vec![0usize; g.nodes.len()];
    for &i in &order {
        below[i] = prods[i]
            .iter()
            .map(|&p| below[p] + usize::from(g.nodes[p].op_type == CONV_OP))
            .max()
            .unwrap_or(0);
    }
    Ok(below.into_iter().enumerate().collect())
}

/// Number of nodes on the longest path through the graph.
pub fn model_depth(g: &ModelGraph) -> Result<usize, IngestError> {
    let order = topological_order(g)?;
    let prods = producers(g);
    let mut depth = vec![0usize; g.nodes.len()];
    for &i in &order {
        depth[i] = 1 + prods[i].iter().map(|&p| depth[p]).max().unwrap_or(0);
    }
    Ok(depth.into_iter().max().unwrap_or(0))
}
