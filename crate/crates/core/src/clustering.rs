//! Base-station cluster selection for one multicast group.
//!
//! Gains are pathloss-only power gains indexed `[bs][user]` over every BS of
//! the network; BSs outside the cluster count as interference.

use crate::channel::NetworkLayout;
use crate::error::{Error, Result};

/// Inputs of a cluster selection.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterRequest {
    /// Candidate BSs (the synchronization area).
    pub sync_area: Vec<usize>,
    /// Columns of the gain table that belong to the group.
    pub users: Vec<usize>,
    /// Minimum cluster size K_T'.
    pub min_size: usize,
    pub noise_power: f64,
    pub tx_power: f64,
}

impl ClusterRequest {
    /// Request covering every user of `layout`.
    pub fn for_layout(layout: &NetworkLayout, min_size: usize, noise_power: f64, tx_power: f64) -> Self {
        Self {
            sync_area: layout.sync_area.clone(),
            users: (0..layout.user_positions.len()).collect(),
            min_size,
            noise_power,
            tx_power,
        }
    }
}

/// How the serving cluster is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusteringPolicy {
    /// Every BS of the sync area.
    Mbsfn,
    /// The strongest BS of each user.
    ScPtm,
    /// Strongest BSs, then greedy additions up to the given size.
    Greedy(usize),
}

/// Received-power SINR of `user` when the BSs in `cluster` transmit and all
/// other BSs in the table interfere.
pub fn sinr_for_cluster(cluster: &[usize], user: usize, gains: &[Vec<f64>], tx_power: f64, noise_power: f64) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (t, row) in gains.iter().enumerate() {
        if cluster.contains(&t) {
            signal += row[user] * tx_power;
        } else {
            interference += row[user] * tx_power;
        }
    }
    signal / (interference + noise_power)
}

fn check(req: &ClusterRequest, gains: &[Vec<f64>]) -> Result<()> {
    if req.users.is_empty() {
        return Err(Error::EmptyGroup);
    }
    if req.sync_area.is_empty() {
        return Err(Error::InvalidInput("sync area is empty".into()));
    }
    let ok = req.sync_area.iter().all(|&t| t < gains.len())
        && gains.iter().all(|row| req.users.iter().all(|&u| u < row.len()));
    if ok {
        Ok(())
    } else {
        Err(Error::ShapeMismatch("gain table does not cover the request".into()))
    }
}

/// Strongest sync-area BS of every user (lowest index on ties), deduplicated
/// in order of first selection.
pub fn strongest_bss(req: &ClusterRequest, gains: &[Vec<f64>]) -> Result<Vec<usize>> {
    check(req, gains)?;
    let mut sorted_area = req.sync_area.clone();
    sorted_area.sort_unstable();
    let mut out = Vec::new();
    for &u in &req.users {
        let mut best = sorted_area[0];
        for &t in &sorted_area[1..] {
            if gains[t][u] > gains[best][u] {
                best = t;
            }
        }
        if !out.contains(&best) {
            out.push(best);
        }
    }
    Ok(out)
}

/// Greedy clustering: strongest BS per user, then repeatedly add the BS that
/// maximizes the users' summed SINR until the cluster has `min_size` BSs.
/// Returns BS indices sorted ascending.
pub fn greedy_cluster(req: &ClusterRequest, gains: &[Vec<f64>]) -> Result<Vec<usize>> {
    let mut cluster = strongest_bss(req, gains)?;
    let mut candidates = req.sync_area.clone();
    candidates.sort_unstable();
    candidates.dedup();
    let target = req.min_size.min(candidates.len());
    while cluster.len() < target {
        let mut best: Option<(usize, f64)> = None;
        for &cand in candidates.iter().filter(|t| !cluster.contains(t)) {
            let mut trial = cluster.clone();
            trial.push(cand);
            let score: f64 = req
                .users
                .iter()
                .map(|&u| sinr_for_cluster(&trial, u, gains, req.tx_power, req.noise_power))
                .sum();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((cand, score));
            }
        }
        match best {
            Some((t, _)) => cluster.push(t),
            None => break,
        }
    }
    cluster.sort_unstable();
    Ok(cluster)
}

/// Cluster for the given policy, sorted ascending.
pub fn select_cluster(policy: ClusteringPolicy, req: &ClusterRequest, gains: &[Vec<f64>]) -> Result<Vec<usize>> {
    match policy {
        ClusteringPolicy::Mbsfn => {
            check(req, gains)?;
            let mut s = req.sync_area.clone();
            s.sort_unstable();
            s.dedup();
            Ok(s)
        }
        ClusteringPolicy::ScPtm => {
            let mut s = strongest_bss(req, gains)?;
            s.sort_unstable();
            Ok(s)
        }
        ClusteringPolicy::Greedy(k) => greedy_cluster(&ClusterRequest { min_size: k, ..req.clone() }, gains),
    }
}
