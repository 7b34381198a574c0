//! Labeled-leg tensors and pairwise network contraction.
//!
//! Legs are matched by label (einsum style): a label appearing on two
//! different tensors is an edge and gets summed over; a label appearing once
//! stays open. Contracting two tensors always sums over *all* their shared
//! labels at once, so the result is independent of the edge order chosen.

use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};

#[derive(Debug, Clone)]
pub struct Tensor {
    /// (label, dimension) per leg, in data order (row-major).
    pub legs: Vec<(String, usize)>,
    pub data: ArrayD<C64>,
}

impl Tensor {
    pub fn new(legs: Vec<(String, usize)>, data: ArrayD<C64>) -> Result<Self> {
        let shape: Vec<usize> = legs.iter().map(|l| l.1).collect();
        if data.shape() != shape.as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "tensor data shape {:?} vs legs {:?}",
                data.shape(),
                shape
            )));
        }
        for i in 0..legs.len() {
            for j in i + 1..legs.len() {
                if legs[i].0 == legs[j].0 {
                    return Err(Error::InvalidInput(format!(
                        "duplicate leg label '{}' within one tensor",
                        legs[i].0
                    )));
                }
            }
        }
        Ok(Tensor { legs, data })
    }

    pub fn from_matrix(row_label: &str, col_label: &str, m: &CMat) -> Result<Self> {
        let (r, c) = m.dim();
        let data = ArrayD::from_shape_vec(IxDyn(&[r, c]), m.iter().cloned().collect())
            .expect("matrix reshape");
        Tensor::new(
            vec![(row_label.into(), r), (col_label.into(), c)],
            data,
        )
    }

    pub fn scalar_value(&self) -> Result<C64> {
        if !self.legs.is_empty() {
            return Err(Error::InvalidInput(format!(
                "tensor still has open legs {:?}",
                self.legs.iter().map(|l| &l.0).collect::<Vec<_>>()
            )));
        }
        Ok(self.data.iter().copied().next().unwrap_or(ZERO))
    }

    /// Reorder legs into `order` (a permutation of the current labels).
    pub fn permuted(&self, order: &[String]) -> Result<Tensor> {
        if order.len() != self.legs.len() {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        let mut perm = Vec::with_capacity(order.len());
        for lab in order {
            let pos = self
                .legs
                .iter()
                .position(|l| &l.0 == lab)
                .ok_or_else(|| Error::InvalidInput(format!("no leg '{lab}'")))?;
            perm.push(pos);
        }
        let permuted = self.data.clone().permuted_axes(IxDyn(&perm));
        let data = ArrayD::from_shape_vec(
            IxDyn(&perm.iter().map(|&p| self.legs[p].1).collect::<Vec<_>>()),
            permuted.iter().cloned().collect(),
        )
        .expect("permuted reshape");
        let legs = perm.iter().map(|&p| self.legs[p].clone()).collect();
        Tensor::new(legs, data)
    }
}

/// Contract two tensors over every label they share (tensordot). With no
/// shared labels this is the outer product.
pub fn contract_pair(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let shared: Vec<String> = a
        .legs
        .iter()
        .filter(|(lab, _)| b.legs.iter().any(|(l2, _)| l2 == lab))
        .map(|(lab, _)| lab.clone())
        .collect();
    for lab in &shared {
        let da = a.legs.iter().find(|l| &l.0 == lab).unwrap().1;
        let db = b.legs.iter().find(|l| &l.0 == lab).unwrap().1;
        if da != db {
            return Err(Error::ShapeMismatch(format!(
                "edge '{lab}' has dimensions {da} vs {db}"
            )));
        }
    }
    let a_free: Vec<String> = a
        .legs
        .iter()
        .filter(|(lab, _)| !shared.contains(lab))
        .map(|(lab, _)| lab.clone())
        .collect();
    let b_free: Vec<String> = b
        .legs
        .iter()
        .filter(|(lab, _)| !shared.contains(lab))
        .map(|(lab, _)| lab.clone())
        .collect();

    // permute a to (free..., shared...), b to (shared..., free...)
    let mut a_order = a_free.clone();
    a_order.extend(shared.iter().cloned());
    let mut b_order = shared.clone();
    b_order.extend(b_free.iter().cloned());
    let ap = a.permuted(&a_order)?;
    let bp = b.permuted(&b_order)?;

    let dim_of = |t: &Tensor, labs: &[String]| -> usize {
        labs.iter()
            .map(|lab| t.legs.iter().find(|l| &l.0 == lab).unwrap().1)
            .product()
    };
    let m = dim_of(&ap, &a_free);
    let k = dim_of(&ap, &shared);
    let n = dim_of(&bp, &b_free);

    let am = ndarray::Array2::from_shape_vec((m, k), ap.data.iter().cloned().collect())
        .expect("a reshape");
    let bm = ndarray::Array2::from_shape_vec((k, n), bp.data.iter().cloned().collect())
        .expect("b reshape");
    let prod = am.dot(&bm);

    let mut legs: Vec<(String, usize)> = Vec::new();
    for lab in &a_free {
        legs.push(a.legs.iter().find(|l| &l.0 == lab).unwrap().clone());
    }
    for lab in &b_free {
        legs.push(b.legs.iter().find(|l| &l.0 == lab).unwrap().clone());
    }
    let shape: Vec<usize> = legs.iter().map(|l| l.1).collect();
    let data = ArrayD::from_shape_vec(IxDyn(&shape), prod.iter().cloned().collect())
        .expect("product reshape");
    Tensor::new(legs, data)
}

#[derive(Debug, Clone)]
pub struct TensorNetwork {
    pub tensors: Vec<Tensor>,
}

impl TensorNetwork {
    pub fn new(tensors: Vec<Tensor>) -> Result<Self> {
        // every label appears at most twice, and then on distinct tensors
        // with equal dimensions
        let mut seen: std::collections::HashMap<String, (usize, usize)> =
            std::collections::HashMap::new();
        for (ti, t) in tensors.iter().enumerate() {
            for (lab, dim) in &t.legs {
                match seen.get(lab) {
                    None => {
                        seen.insert(lab.clone(), (ti, *dim));
                    }
                    Some(&(tj, dj)) => {
                        if tj == ti {
                            return Err(Error::InvalidInput(format!(
                                "label '{lab}' repeated within tensor {ti}"
                            )));
                        }
                        if dj != *dim {
                            return Err(Error::ShapeMismatch(format!(
                                "edge '{lab}' dimension mismatch {dj} vs {dim}"
                            )));
                        }
                        // mark as fully used: a third occurrence must fail
                        seen.insert(lab.clone(), (usize::MAX, dj));
                    }
                }
                if seen[lab].0 == usize::MAX && {
                    // count occurrences so far
                    tensors[..=ti]
                        .iter()
                        .flat_map(|t| t.legs.iter())
                        .filter(|l| &l.0 == lab)
                        .count()
                        > 2
                } {
                    return Err(Error::InvalidInput(format!(
                        "label '{lab}' appears more than twice"
                    )));
                }
            }
        }
        Ok(TensorNetwork { tensors })
    }
}

/// Contract a whole network down to one tensor over its open legs.
///
/// `order`: optional sequence of edge labels to contract in that order.
/// (Contracting an edge merges the two tensors over *all* their shared
/// labels, so the final value never depends on the order.) Without an
/// order, edges are contracted greedily; disconnected components end in
/// outer products.
pub fn contract(net: &TensorNetwork, order: Option<&[String]>) -> Result<Tensor> {
    let mut pool: Vec<Tensor> = net.tensors.clone();
    if pool.is_empty() {
        return Err(Error::InvalidInput("empty network".into()));
    }
    if let Some(order) = order {
        for lab in order {
            let holders: Vec<usize> = pool
                .iter()
                .enumerate()
                .filter(|(_, t)| t.legs.iter().any(|l| &l.0 == lab))
                .map(|(i, _)| i)
                .collect();
            match holders.len() {
                0 => continue, // already merged by an earlier shared label
                2 => {
                    let b = pool.remove(holders[1]);
                    let a = pool.remove(holders[0]);
                    pool.push(contract_pair(&a, &b)?);
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "label '{lab}' is not an edge between two tensors"
                    )))
                }
            }
        }
    }
    // greedy phase: contract any remaining shared labels
    'outer: loop {
        for i in 0..pool.len() {
            for j in i + 1..pool.len() {
                let share = pool[i]
                    .legs
                    .iter()
                    .any(|(lab, _)| pool[j].legs.iter().any(|(l2, _)| l2 == lab));
                if share {
                    let b = pool.remove(j);
                    let a = pool.remove(i);
                    pool.push(contract_pair(&a, &b)?);
                    continue 'outer;
                }
            }
        }
        break;
    }
    // outer products for disconnected components
    let mut result = pool.remove(0);
    for t in pool {
        result = contract_pair(&result, &t)?;
    }
    Ok(result)
}
