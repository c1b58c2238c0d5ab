//! Discrete-event simulation of a mining network.
//!
//! Every node keeps its own [`BlockStore`] and mempool and mines on its own
//! tip. Block discovery follows exponential clocks whose mean is the current
//! `sa_sweeps` times `seconds_per_sweep`, divided by the node's power, so the
//! chain's retargeting steers the simulated interval exactly as it would
//! steer real solver effort. In `real` mode each discovered block is
//! additionally mined with an actual solver and fully verified by every node.
//!
//! After the horizon, transactions stop arriving but mining continues until
//! no deliveries are in flight and every node reports the same tip.

mod race;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::baselines::SaParams;
use crate::gdsim::GdParams;
use crate::ledger::{AppendOutcome, BlockStore, ChainParams, LedgerError, TipChange, VerifyMode};
use crate::pow::{
    merkle_root, mine, Block, BlockHeader, DifficultyTarget, GdSolver, Hash32, PowError, SaSolver,
    Solution, Solver, Transaction, BLOCK_VERSION,
};
use crate::rng;

pub use race::{
    attacker_race, attacker_race_profile, gamblers_ruin, modeled_block_time, RaceResult,
    RACE_GIVE_UP,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Pow(#[from] PowError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MiningMode {
    Modeled,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Gdsim,
    Sa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub power: f64,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
}

fn default_solver() -> SolverKind {
    SolverKind::Sa
}

/// Per-link delay: `base` plus an exponential jitter of mean `jitter_mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyConfig {
    pub base: f64,
    pub jitter_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub nodes: Vec<NodeConfig>,
    pub latency: LatencyConfig,
    pub target_interval: f64,
    pub window: u64,
    /// Simulated seconds of regular operation.
    pub horizon: f64,
    pub mode: MiningMode,
    pub seed: u64,
    /// Network-wide transaction arrivals per second.
    pub tx_rate: f64,
    pub max_block_txs: usize,
    /// Unit-power seconds per verifier sweep; converts the target's
    /// `sa_sweeps` into expected block time.
    pub seconds_per_sweep: f64,
    pub target: DifficultyTarget,
    /// Depth at which a transaction counts as confirmed.
    pub confirmations: u64,
    /// Solver budgets for `real` mode.
    pub sa: SaParams,
    pub gd: GdParams,
    /// Nonce cap per real mining attempt.
    pub max_nonce: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            nodes: vec![NodeConfig {
                power: 1.0,
                solver: SolverKind::Sa,
            }],
            latency: LatencyConfig {
                base: 0.1,
                jitter_mean: 0.1,
            },
            target_interval: 2.0,
            window: 20,
            horizon: 400.0,
            mode: MiningMode::Modeled,
            seed: 0,
            tx_rate: 1.0,
            max_block_txs: 50,
            seconds_per_sweep: 0.1,
            target: DifficultyTarget {
                n: 16,
                density_pct: 50.0,
                sa_sweeps: 20,
                ..Default::default()
            },
            confirmations: 6,
            sa: SaParams {
                sweeps: 200,
                restarts: 1,
                ..SaParams::default()
            },
            gd: GdParams {
                restarts: 1,
                ..GdParams::default()
            },
            max_nonce: 1000,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if self.nodes.is_empty() {
            return bad("at least one node is required".into());
        }
        if let Some((i, n)) = self
            .nodes
            .iter()
            .enumerate()
            .find(|(_, n)| !(n.power > 0.0 && n.power.is_finite()))
        {
            return bad(format!("node {i} has non-positive power {}", n.power));
        }
        let positive = [
            ("target_interval", self.target_interval),
            ("horizon", self.horizon),
            ("seconds_per_sweep", self.seconds_per_sweep),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return bad(format!("{name} must be positive, got {v}"));
        }
        if !(self.latency.base >= 0.0 && self.latency.jitter_mean >= 0.0)
            || !self.latency.base.is_finite()
            || !self.latency.jitter_mean.is_finite()
        {
            return bad("latency parameters must be finite and non-negative".into());
        }
        if !(self.tx_rate >= 0.0 && self.tx_rate.is_finite()) {
            return bad(format!(
                "tx_rate must be non-negative, got {}",
                self.tx_rate
            ));
        }
        if self.window < 2 {
            return bad(format!("window must be at least 2, got {}", self.window));
        }
        if self.mode == MiningMode::Real && self.target.n > 64 {
            return bad(format!(
                "real mining is limited to n <= 64, got {}",
                self.target.n
            ));
        }
        self.target.validate()?;
        Ok(())
    }

    fn chain_params(&self) -> ChainParams {
        ChainParams {
            genesis_target: self.target.clone(),
            target_interval: self.target_interval,
            window: self.window,
            verify: match self.mode {
                MiningMode::Modeled => VerifyMode::Linkage,
                MiningMode::Real => VerifyMode::Full,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum EventKind {
    TxArrival { seq: u64 },
    BlockFound { node: usize, attempt: u64 },
    BlockDelivered { node: usize, block: usize },
}

#[derive(Debug)]
struct Scheduled {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // Reversed so the max-heap pops the earliest (time, seq) first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Pending transactions in arrival order.
#[derive(Debug, Default, Clone)]
struct Mempool {
    by_seq: BTreeMap<u64, Transaction>,
}

impl Mempool {
    fn insert(&mut self, seq: u64, tx: Transaction) {
        self.by_seq.insert(seq, tx);
    }

    fn take(&self, max: usize) -> Vec<Transaction> {
        self.by_seq.values().take(max).cloned().collect()
    }

    fn apply(&mut self, store: &BlockStore, change: &TipChange) {
        for id in &change.disconnected {
            for tx in &store
                .get(id)
                .expect("disconnected block stored")
                .transactions
            {
                if let Some(seq) = tx_seq(tx) {
                    self.by_seq.insert(seq, tx.clone());
                }
            }
        }
        for id in &change.connected {
            for tx in &store.get(id).expect("connected block stored").transactions {
                if let Some(seq) = tx_seq(tx) {
                    self.by_seq.remove(&seq);
                }
            }
        }
    }
}

const TX_TAG: &[u8] = b"tx";
const COINBASE_TAG: &[u8] = b"cb";

fn user_tx(seq: u64) -> Transaction {
    let mut p = TX_TAG.to_vec();
    p.extend_from_slice(&seq.to_le_bytes());
    Transaction::new(p).expect("10-byte payload")
}

fn tx_seq(tx: &Transaction) -> Option<u64> {
    let p = tx.payload();
    (p.len() == 10 && p.starts_with(TX_TAG))
        .then(|| u64::from_le_bytes(p[2..].try_into().expect("8 bytes")))
}

fn coinbase(node: usize, height: u64, nonce: u64) -> Transaction {
    let mut p = COINBASE_TAG.to_vec();
    p.extend_from_slice(&(node as u32).to_le_bytes());
    p.extend_from_slice(&height.to_le_bytes());
    p.extend_from_slice(&nonce.to_le_bytes());
    Transaction::new(p).expect("22-byte payload")
}

struct Node {
    store: BlockStore,
    mempool: Mempool,
    power: f64,
    solver: SolverKind,
    attempt: u64,
    mining_rng: ChaCha8Rng,
    link_rng: ChaCha8Rng,
    reorgs: u64,
    max_reorg_depth: u64,
}

/// Summary statistics of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMetrics {
    pub blocks_produced: u64,
    pub main_chain_height: u64,
    pub stale_blocks: u64,
    /// Stale blocks over blocks produced.
    pub fork_rate: f64,
    pub mean_interval: f64,
    /// Mean time from a transaction's arrival until its block is buried
    /// `confirmations` deep on the final chain.
    pub mean_confirmation_time: f64,
    pub confirmed_transactions: u64,
    pub tips_agree: bool,
    /// Fraction of nodes whose tip equals node 0's.
    pub tip_agreement: f64,
    pub quiesced: bool,
    pub end_time: f64,
    pub reorgs: u64,
    pub max_reorg_depth: u64,
    /// Transactions buried at least `confirmations` deep on some node but
    /// missing from the common prefix of all nodes.
    pub reorg_safety_violations: u64,
    pub final_sa_sweeps: u64,
    pub real_attempts: u64,
    /// Digest of every processed event, for determinism checks.
    pub event_digest: String,
}

/// One row per main-chain block of node 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub height: u64,
    pub time: f64,
    pub timestamp: u64,
    pub interval: f64,
    pub sa_sweeps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub metrics: SimMetrics,
    pub series: Vec<SeriesRow>,
}

impl SimReport {
    /// Mean interval over main-chain blocks strictly above `height`.
    pub fn mean_interval_after(&self, height: u64) -> Option<f64> {
        let rows: Vec<_> = self.series.iter().filter(|r| r.height > height).collect();
        if rows.is_empty() {
            return None;
        }
        Some(rows.iter().map(|r| r.interval).sum::<f64>() / rows.len() as f64)
    }

    pub fn series_csv(&self) -> String {
        let mut out = String::from("height,time,timestamp,interval,sa_sweeps\n");
        for r in &self.series {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.height, r.time, r.timestamp, r.interval, r.sa_sweeps
            ));
        }
        out
    }
}

struct Sim<'a> {
    cfg: &'a ScenarioConfig,
    queue: BinaryHeap<Scheduled>,
    next_seq: u64,
    nodes: Vec<Node>,
    blocks: Vec<Block>,
    found_at: HashMap<Hash32, f64>,
    tx_times: Vec<f64>,
    tx_rng: ChaCha8Rng,
    tx_scheduled: u64,
    in_flight: usize,
    produced: u64,
    real_attempts: u64,
    digest: Sha256,
    now: f64,
}

/// Runs one scenario to quiescence.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimReport, SimError> {
    cfg.validate()?;
    let params = cfg.chain_params();
    let store = BlockStore::new(params)?;
    let nodes = cfg
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| Node {
            store: store.clone(),
            mempool: Mempool::default(),
            power: n.power,
            solver: n.solver,
            attempt: 0,
            mining_rng: rng::seeded(rng::derive_seed(cfg.seed, 1_000 + i as u64)),
            link_rng: rng::seeded(rng::derive_seed(cfg.seed, 2_000 + i as u64)),
            reorgs: 0,
            max_reorg_depth: 0,
        })
        .collect();
    let sim = Sim {
        cfg,
        queue: BinaryHeap::new(),
        next_seq: 0,
        nodes,
        blocks: Vec::new(),
        found_at: HashMap::new(),
        tx_times: Vec::new(),
        tx_rng: rng::seeded(rng::derive_seed(cfg.seed, 1)),
        tx_scheduled: 0,
        in_flight: 0,
        produced: 0,
        real_attempts: 0,
        digest: Sha256::new(),
        now: 0.0,
    };
    sim.run()
}

impl Sim<'_> {
    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.queue.push(Scheduled {
            time,
            seq: self.next_seq,
            kind,
        });
        self.next_seq += 1;
    }

    fn expected_block_seconds(&self, node: usize) -> Result<f64, SimError> {
        let store = &self.nodes[node].store;
        let target = store.next_target(&store.tip())?;
        Ok(target.sa_sweeps as f64 * self.cfg.seconds_per_sweep)
    }

    fn start_mining(&mut self, node: usize) -> Result<(), SimError> {
        let difficulty = self.expected_block_seconds(node)?;
        let n = &mut self.nodes[node];
        n.attempt += 1;
        let attempt = n.attempt;
        let wait = modeled_block_time(&mut n.mining_rng, n.power, difficulty);
        self.schedule(self.now + wait, EventKind::BlockFound { node, attempt });
        Ok(())
    }

    fn schedule_tx(&mut self) {
        if self.cfg.tx_rate <= 0.0 {
            return;
        }
        let wait = modeled_block_time(&mut self.tx_rng, self.cfg.tx_rate, 1.0);
        if self.now + wait < self.cfg.horizon {
            let seq = self.tx_scheduled;
            self.tx_scheduled += 1;
            self.schedule(self.now + wait, EventKind::TxArrival { seq });
        }
    }

    fn log(&mut self, kind: &EventKind) {
        self.digest.update(self.now.to_le_bytes());
        match kind {
            EventKind::TxArrival { seq } => {
                self.digest.update([0]);
                self.digest.update(seq.to_le_bytes());
            }
            EventKind::BlockFound { node, attempt } => {
                self.digest.update([1]);
                self.digest.update((*node as u64).to_le_bytes());
                self.digest.update(attempt.to_le_bytes());
            }
            EventKind::BlockDelivered { node, block } => {
                self.digest.update([2]);
                self.digest.update((*node as u64).to_le_bytes());
                self.digest.update(self.blocks[*block].block_id);
            }
        }
    }

    fn tips_agree(&self) -> bool {
        let t = self.nodes[0].store.tip();
        self.nodes.iter().all(|n| n.store.tip() == t)
    }

    fn run(mut self) -> Result<SimReport, SimError> {
        for i in 0..self.nodes.len() {
            self.start_mining(i)?;
        }
        self.schedule_tx();
        let cap = 2.0 * self.cfg.horizon + 100.0 * self.cfg.target_interval;
        let mut quiesced = false;
        while let Some(ev) = self.queue.pop() {
            if ev.time >= self.cfg.horizon && self.in_flight == 0 && self.tips_agree() {
                quiesced = true;
                self.now = self.now.max(self.cfg.horizon);
                break;
            }
            if ev.time > cap {
                self.now = cap;
                break;
            }
            self.now = ev.time;
            self.log(&ev.kind);
            match ev.kind {
                EventKind::TxArrival { seq } => {
                    debug_assert_eq!(seq as usize, self.tx_times.len());
                    self.tx_times.push(self.now);
                    let tx = user_tx(seq);
                    for n in &mut self.nodes {
                        n.mempool.insert(seq, tx.clone());
                    }
                    self.schedule_tx();
                }
                EventKind::BlockFound { node, attempt } => {
                    if attempt == self.nodes[node].attempt {
                        self.produce(node)?;
                    }
                }
                EventKind::BlockDelivered { node, block } => {
                    self.in_flight -= 1;
                    let b = self.blocks[block].clone();
                    self.receive(node, b)?;
                }
            }
        }
        Ok(self.report(quiesced))
    }

    fn produce(&mut self, node: usize) -> Result<(), SimError> {
        let cfg = self.cfg;
        let n = &self.nodes[node];
        let parent = n.store.tip();
        let height = n.store.tip_height() + 1;
        let target = n.store.next_target(&parent)?;
        let mut txs = vec![coinbase(node, height, n.attempt)];
        txs.extend(n.mempool.take(cfg.max_block_txs));
        let timestamp = self.now.floor() as u64;
        let block = match cfg.mode {
            MiningMode::Modeled => {
                let merkle = merkle_root(&txs)?;
                let header = BlockHeader {
                    version: BLOCK_VERSION,
                    prev_id: parent,
                    merkle_root: merkle,
                    timestamp,
                    target: target.clone(),
                    nonce: 0,
                };
                let bytes = match target.mode {
                    crate::problem::Mode::Qubo => (target.n as usize).div_ceil(8),
                    crate::problem::Mode::Qco => 2 * target.n as usize,
                };
                Block::new(
                    header,
                    txs,
                    Solution {
                        mode: target.mode,
                        encoded: vec![0; bytes],
                        claimed_objective: 0.0,
                    },
                )
            }
            MiningMode::Real => {
                let solver: Box<dyn Solver> = match n.solver {
                    SolverKind::Sa => Box::new(SaSolver(cfg.sa.clone())),
                    SolverKind::Gdsim => Box::new(GdSolver(cfg.gd.clone())),
                };
                match mine(
                    parent,
                    timestamp,
                    txs,
                    &target,
                    solver.as_ref(),
                    cfg.max_nonce,
                ) {
                    Ok(m) => {
                        self.real_attempts += m.attempts;
                        m.block
                    }
                    Err(PowError::NonceExhausted { .. }) => {
                        self.real_attempts += u64::from(cfg.max_nonce) + 1;
                        return self.start_mining(node);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        };
        self.produced += 1;
        self.found_at.insert(block.block_id, self.now);
        let index = self.blocks.len();
        self.blocks.push(block.clone());
        for other in 0..self.nodes.len() {
            if other == node {
                continue;
            }
            let lat = cfg.latency;
            let jitter = if lat.jitter_mean > 0.0 {
                modeled_block_time(&mut self.nodes[node].link_rng, 1.0, lat.jitter_mean)
            } else {
                0.0
            };
            self.in_flight += 1;
            self.schedule(
                self.now + lat.base + jitter,
                EventKind::BlockDelivered {
                    node: other,
                    block: index,
                },
            );
        }
        self.receive(node, block)
    }

    fn receive(&mut self, node: usize, block: Block) -> Result<(), SimError> {
        let n = &mut self.nodes[node];
        match n.store.append(block) {
            AppendOutcome::Accepted {
                tip_change: Some(change),
                ..
            } => {
                if change.is_reorg() {
                    n.reorgs += 1;
                    n.max_reorg_depth = n.max_reorg_depth.max(change.disconnected.len() as u64);
                }
                n.mempool.apply(&n.store, &change);
                self.start_mining(node)
            }
            AppendOutcome::Accepted {
                tip_change: None, ..
            }
            | AppendOutcome::Orphaned => Ok(()),
            AppendOutcome::Rejected(r) => Err(SimError::InvalidConfig(format!(
                "node {node} rejected a block: {r:?}"
            ))),
        }
    }

    fn report(self, quiesced: bool) -> SimReport {
        let store = &self.nodes[0].store;
        let main = store.main_chain();
        let height = store.tip_height();
        let mut series = Vec::with_capacity(main.len());
        let mut prev_time = 0.0;
        for (h, id) in main.iter().enumerate().skip(1) {
            let b = store.get(id).expect("main chain stored");
            let time = self.found_at.get(id).copied().unwrap_or(0.0);
            series.push(SeriesRow {
                height: h as u64,
                time,
                timestamp: b.header.timestamp,
                interval: time - prev_time,
                sa_sweeps: b.header.target.sa_sweeps,
            });
            prev_time = time;
        }
        let mean_interval = if series.is_empty() {
            0.0
        } else {
            prev_time / series.len() as f64
        };

        let k = self.cfg.confirmations as usize;
        let mut conf_total = 0.0;
        let mut confirmed = 0_u64;
        for (h, id) in main.iter().enumerate() {
            let Some(burier) = main.get(h + k) else { break };
            let when = self.found_at.get(burier).copied().unwrap_or(0.0);
            for tx in &store.get(id).expect("main chain stored").transactions {
                if let Some(seq) = tx_seq(tx) {
                    conf_total += when - self.tx_times[seq as usize];
                    confirmed += 1;
                }
            }
        }

        let common =
            self.nodes
                .iter()
                .map(|n| n.store.main_chain())
                .fold(main.to_vec(), |acc, m| {
                    acc.iter()
                        .zip(m)
                        .take_while(|(a, b)| a == b)
                        .map(|(a, _)| *a)
                        .collect()
                });
        let common_txs: HashSet<&Hash32> = common
            .iter()
            .flat_map(|id| {
                store
                    .get(id)
                    .expect("common prefix stored")
                    .transactions
                    .iter()
                    .map(|t| t.txid())
            })
            .collect();
        let mut violations = 0_u64;
        for n in &self.nodes {
            let m = n.store.main_chain();
            for id in m.iter().take(m.len().saturating_sub(k)) {
                for tx in &n.store.get(id).expect("main chain stored").transactions {
                    if !common_txs.contains(tx.txid()) {
                        violations += 1;
                    }
                }
            }
        }

        let tip = store.tip();
        let agreeing = self.nodes.iter().filter(|n| n.store.tip() == tip).count();
        let stale = self.produced.saturating_sub(height);
        let final_sweeps = store.next_target(&tip).map(|t| t.sa_sweeps).unwrap_or(0);
        let metrics = SimMetrics {
            blocks_produced: self.produced,
            main_chain_height: height,
            stale_blocks: stale,
            fork_rate: if self.produced == 0 {
                0.0
            } else {
                stale as f64 / self.produced as f64
            },
            mean_interval,
            mean_confirmation_time: if confirmed == 0 {
                0.0
            } else {
                conf_total / confirmed as f64
            },
            confirmed_transactions: confirmed,
            tips_agree: agreeing == self.nodes.len(),
            tip_agreement: agreeing as f64 / self.nodes.len() as f64,
            quiesced,
            end_time: self.now,
            reorgs: self.nodes.iter().map(|n| n.reorgs).sum(),
            max_reorg_depth: self
                .nodes
                .iter()
                .map(|n| n.max_reorg_depth)
                .max()
                .unwrap_or(0),
            reorg_safety_violations: violations,
            final_sa_sweeps: final_sweeps,
            real_attempts: self.real_attempts,
            event_digest: hex::encode(self.digest.finalize()),
        };
        SimReport { metrics, series }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(count: usize) -> Vec<NodeConfig> {
        vec![
            NodeConfig {
                power: 1.0,
                solver: SolverKind::Sa
            };
            count
        ]
    }

    #[test]
    fn single_node_tracks_target_interval() {
        let cfg = ScenarioConfig {
            horizon: 600.0,
            ..ScenarioConfig::default()
        };
        let r = run_scenario(&cfg).unwrap();
        let m = r.mean_interval_after(2 * cfg.window).unwrap();
        assert!((m - 2.0).abs() < 0.5, "{m}");
        assert_eq!(r.metrics.stale_blocks, 0);
        assert!(r.metrics.quiesced);
    }

    #[test]
    fn zero_latency_pair_never_forks() {
        let cfg = ScenarioConfig {
            nodes: nodes(2),
            latency: LatencyConfig {
                base: 0.0,
                jitter_mean: 0.0,
            },
            ..ScenarioConfig::default()
        };
        let r = run_scenario(&cfg).unwrap();
        assert_eq!(r.metrics.stale_blocks, 0);
        assert!(r.metrics.tips_agree);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = ScenarioConfig {
            nodes: nodes(3),
            horizon: 200.0,
            seed: 5,
            ..ScenarioConfig::default()
        };
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a, b);
        let c = run_scenario(&ScenarioConfig { seed: 6, ..cfg }).unwrap();
        assert_ne!(a.metrics.event_digest, c.metrics.event_digest);
    }

    #[test]
    fn transactions_are_confirmed() {
        let cfg = ScenarioConfig {
            nodes: nodes(3),
            horizon: 300.0,
            ..ScenarioConfig::default()
        };
        let r = run_scenario(&cfg).unwrap();
        assert!(r.metrics.confirmed_transactions > 0);
        assert!(r.metrics.mean_confirmation_time > 0.0);
        assert_eq!(r.metrics.reorg_safety_violations, 0);
    }

    #[test]
    fn real_mode_mines_verifiable_blocks() {
        let cfg = ScenarioConfig {
            nodes: nodes(2),
            mode: MiningMode::Real,
            horizon: 20.0,
            target: DifficultyTarget {
                n: 8,
                density_pct: 50.0,
                sa_sweeps: 5,
                ..Default::default()
            },
            seconds_per_sweep: 0.4,
            tx_rate: 0.5,
            ..ScenarioConfig::default()
        };
        let r = run_scenario(&cfg).unwrap();
        assert!(r.metrics.main_chain_height > 0);
        assert!(r.metrics.real_attempts >= r.metrics.blocks_produced);
        assert!(r.metrics.tips_agree);
    }

    #[test]
    fn config_validation() {
        for cfg in [
            ScenarioConfig {
                nodes: vec![],
                ..ScenarioConfig::default()
            },
            ScenarioConfig {
                nodes: vec![NodeConfig {
                    power: 0.0,
                    solver: SolverKind::Sa,
                }],
                ..ScenarioConfig::default()
            },
            ScenarioConfig {
                window: 1,
                ..ScenarioConfig::default()
            },
            ScenarioConfig {
                horizon: 0.0,
                ..ScenarioConfig::default()
            },
            ScenarioConfig {
                latency: LatencyConfig {
                    base: -1.0,
                    jitter_mean: 0.0,
                },
                ..ScenarioConfig::default()
            },
        ] {
            assert!(matches!(
                run_scenario(&cfg),
                Err(SimError::InvalidConfig(_))
            ));
        }
        let json = r#"{"nodes": [{"power": 1.0}], "bogus": 1}"#;
        assert!(serde_json::from_str::<ScenarioConfig>(json).is_err());
    }
}
