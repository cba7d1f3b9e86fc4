use serde::{Deserialize, Serialize};

use super::FederationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStatus {
    Up,
    Down,
}

/// Client → edge wiring under a single global server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    assignment: Vec<usize>,
    edges: Vec<EdgeStatus>,
}

/// Round-robin: client `i` → edge `i mod n_edges`.
pub fn build_topology(n_clients: usize, n_edges: usize) -> Result<Topology, FederationError> {
    if n_clients == 0 || n_edges == 0 {
        return Err(FederationError::InvalidConfig(format!(
            "need at least one client and one edge, got {n_clients} clients / {n_edges} edges"
        )));
    }
    Ok(Topology {
        assignment: (0..n_clients).map(|i| i % n_edges).collect(),
        edges: vec![EdgeStatus::Up; n_edges],
    })
}

impl Topology {
    /// Explicit wiring; every edge starts up.
    pub fn from_assignment(n_edges: usize, assignment: Vec<usize>) -> Result<Topology, FederationError> {
        if n_edges == 0 || assignment.is_empty() {
            return Err(FederationError::InvalidConfig("empty topology".into()));
        }
        if let Some(&e) = assignment.iter().find(|&&e| e >= n_edges) {
            return Err(FederationError::InvalidConfig(format!(
                "client assigned to edge {e}, only {n_edges} exist"
            )));
        }
        Ok(Topology {
            assignment,
            edges: vec![EdgeStatus::Up; n_edges],
        })
    }

    pub fn n_clients(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_of(&self, client: usize) -> usize {
        self.assignment[client]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn status(&self, edge: usize) -> EdgeStatus {
        self.edges[edge]
    }

    pub fn up_edges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e] == EdgeStatus::Up)
            .collect()
    }

    /// Clients wired to `edge`, ascending.
    pub fn clients_of(&self, edge: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&c| self.assignment[c] == edge)
            .collect()
    }

    /// Marks `failed` down and deals its clients, ascending, round-robin over
    /// the remaining up edges in ascending id order.
    pub fn handle_edge_failure(&self, failed: usize) -> Result<Topology, FederationError> {
        if failed >= self.edges.len() {
            return Err(FederationError::InvalidConfig(format!(
                "edge {failed} does not exist"
            )));
        }
        let mut next = self.clone();
        next.edges[failed] = EdgeStatus::Down;
        let survivors = next.up_edges();
        if survivors.is_empty() {
            return Err(FederationError::NoEdgeAvailable);
        }
        for (k, client) in self.clients_of(failed).into_iter().enumerate() {
            next.assignment[client] = survivors[k % survivors.len()];
        }
        Ok(next)
    }
}
