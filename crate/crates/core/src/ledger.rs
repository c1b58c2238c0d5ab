//! Block storage, fork choice and chain validation.

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pow::{
    adjust_difficulty, compute_block_id, genesis_block, merkle_root, verify, verify_genesis, Block,
    DifficultyTarget, Hash32, PowError, RejectReason, BLOCK_VERSION,
};

/// Capacity of the orphan pool; the oldest orphan is evicted first.
pub const ORPHAN_CAPACITY: usize = 1024;

/// How thoroughly appended blocks are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    /// Complete proof-of-work verification.
    Full,
    /// Version, parent link, expected target, Merkle root and block id only.
    /// Used where block production is simulated rather than solved.
    Linkage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub genesis_target: DifficultyTarget,
    /// Desired seconds between blocks.
    pub target_interval: f64,
    /// Retarget period in blocks.
    pub window: u64,
    pub verify: VerifyMode,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            genesis_target: DifficultyTarget::default(),
            target_interval: 10.0,
            window: 20,
            verify: VerifyMode::Full,
        }
    }
}

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error(transparent)]
    Pow(#[from] PowError),
    #[error("block at position {index} rejected: {reason}")]
    Rejected { index: usize, reason: RejectReason },
    #[error("block at position {index} does not connect to the chain")]
    Disconnected { index: usize },
    #[error("duplicate block at position {index}")]
    Duplicate { index: usize },
    #[error("chain file: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown block {0}")]
    UnknownBlock(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    block: Block,
    height: u64,
    arrival: u64,
}

/// The blocks abandoned and adopted by a tip change, each listed from the
/// common ancestor outward.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TipChange {
    pub old_tip: Hash32,
    pub new_tip: Hash32,
    pub disconnected: Vec<Hash32>,
    pub connected: Vec<Hash32>,
}

impl TipChange {
    /// A switch that abandons at least one previously-main block.
    pub fn is_reorg(&self) -> bool {
        !self.disconnected.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AppendOutcome {
    /// Stored. `adopted` lists orphans that connected through this block;
    /// `tip_change` is set when the best chain moved.
    Accepted {
        height: u64,
        adopted: Vec<Hash32>,
        tip_change: Option<TipChange>,
    },
    /// Parent unknown; held in the orphan pool.
    Orphaned,
    Rejected(Rejection),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    Duplicate,
    Invalid(RejectReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Confirmations {
    pub depth: u64,
    pub on_main_chain: bool,
}

/// Chain state rooted at a fixed genesis block.
#[derive(Debug, Clone)]
pub struct BlockStore {
    params: ChainParams,
    blocks: HashMap<Hash32, Entry>,
    children: HashMap<Hash32, Vec<Hash32>>,
    /// Insertion order, genesis first; drives persistence.
    order: Vec<Hash32>,
    orphans: VecDeque<Block>,
    main: Vec<Hash32>,
    next_arrival: u64,
}

impl BlockStore {
    pub fn new(params: ChainParams) -> Result<Self, PowError> {
        if params.window < 2 {
            return Err(PowError::InvalidHistory(format!(
                "window must be at least 2, got {}",
                params.window
            )));
        }
        let genesis = genesis_block(&params.genesis_target)?;
        let id = genesis.block_id;
        let mut blocks = HashMap::new();
        blocks.insert(
            id,
            Entry {
                block: genesis,
                height: 0,
                arrival: 0,
            },
        );
        Ok(Self {
            params,
            blocks,
            children: HashMap::new(),
            order: vec![id],
            orphans: VecDeque::new(),
            main: vec![id],
            next_arrival: 1,
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn genesis_id(&self) -> Hash32 {
        self.main[0]
    }

    pub fn tip(&self) -> Hash32 {
        *self.main.last().expect("genesis always present")
    }

    pub fn tip_height(&self) -> u64 {
        self.main.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, id: &Hash32) -> bool {
        self.blocks.contains_key(id)
    }

    pub fn get(&self, id: &Hash32) -> Option<&Block> {
        self.blocks.get(id).map(|e| &e.block)
    }

    pub fn height(&self, id: &Hash32) -> Option<u64> {
        self.blocks.get(id).map(|e| e.height)
    }

    pub fn children(&self, id: &Hash32) -> &[Hash32] {
        self.children.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn orphan_count(&self) -> usize {
        self.orphans.len()
    }

    /// Block ids of the best chain, genesis first.
    pub fn main_chain(&self) -> &[Hash32] {
        &self.main
    }

    /// The target a child of `parent` must carry.
    pub fn next_target(&self, parent: &Hash32) -> Result<DifficultyTarget, LedgerError> {
        let entry = self
            .blocks
            .get(parent)
            .ok_or_else(|| LedgerError::UnknownBlock(hex::encode(parent)))?;
        let mut recent = Vec::with_capacity(self.params.window as usize + 1);
        let mut cur = Some(entry);
        while let Some(e) = cur {
            recent.push((e.height, e.block.header.timestamp));
            if recent.len() > self.params.window as usize || e.height == 0 {
                break;
            }
            cur = self.blocks.get(&e.block.header.prev_id);
        }
        recent.reverse();
        Ok(adjust_difficulty(
            &entry.block.header.target,
            &recent,
            self.params.target_interval,
            self.params.window,
        )?)
    }

    fn check(&self, block: &Block, parent: &Hash32) -> Result<(), RejectReason> {
        let target = self
            .next_target(parent)
            .map_err(|_| RejectReason::PrevMismatch)?;
        match self.params.verify {
            VerifyMode::Full => verify(block, parent, &target).map(|_| ()),
            VerifyMode::Linkage => check_linkage(block, parent, &target),
        }
    }

    /// Adds a block, updating the tip by fork choice and connecting any
    /// orphans that were waiting for it.
    pub fn append(&mut self, block: Block) -> AppendOutcome {
        let id = block.block_id;
        if self.blocks.contains_key(&id) || self.orphans.iter().any(|o| o.block_id == id) {
            return AppendOutcome::Rejected(Rejection::Duplicate);
        }
        let parent = block.header.prev_id;
        if !self.blocks.contains_key(&parent) {
            if self.orphans.len() == ORPHAN_CAPACITY {
                self.orphans.pop_front();
            }
            self.orphans.push_back(block);
            return AppendOutcome::Orphaned;
        }
        if let Err(reason) = self.check(&block, &parent) {
            return AppendOutcome::Rejected(Rejection::Invalid(reason));
        }
        let old_tip = self.tip();
        let height = self.insert(block);
        let mut adopted = Vec::new();
        let mut frontier = vec![id];
        while let Some(p) = frontier.pop() {
            while let Some(pos) = self.orphans.iter().position(|o| o.header.prev_id == p) {
                let orphan = self.orphans.remove(pos).expect("index from position");
                if self.check(&orphan, &p).is_ok() {
                    let oid = orphan.block_id;
                    self.insert(orphan);
                    adopted.push(oid);
                    frontier.push(oid);
                }
            }
        }
        let best = std::iter::once(&id)
            .chain(&adopted)
            .copied()
            .fold(old_tip, |a, b| self.better(a, b));
        let tip_change = self.update_tip(old_tip, best);
        AppendOutcome::Accepted {
            height,
            adopted,
            tip_change,
        }
    }

    fn insert(&mut self, block: Block) -> u64 {
        let id = block.block_id;
        let parent = block.header.prev_id;
        let height = self.blocks[&parent].height + 1;
        self.children.entry(parent).or_default().push(id);
        self.blocks.insert(
            id,
            Entry {
                block,
                height,
                arrival: self.next_arrival,
            },
        );
        self.next_arrival += 1;
        self.order.push(id);
        height
    }

    fn rank(&self, id: &Hash32) -> (std::cmp::Reverse<u64>, u64, Hash32) {
        let e = &self.blocks[id];
        (std::cmp::Reverse(e.height), e.arrival, *id)
    }

    fn better(&self, a: Hash32, b: Hash32) -> Hash32 {
        if self.rank(&b) < self.rank(&a) {
            b
        } else {
            a
        }
    }

    /// Head of the longest chain; ties go to the earliest arrival, then the
    /// lowest id. Scans every stored head; `tip()` is maintained
    /// incrementally and always agrees with this.
    pub fn fork_choice(&self) -> Hash32 {
        self.blocks
            .keys()
            .filter(|id| self.children(id).is_empty())
            .min_by_key(|id| self.rank(id))
            .copied()
            .expect("genesis always present")
    }

    fn update_tip(&mut self, old_tip: Hash32, new_tip: Hash32) -> Option<TipChange> {
        if new_tip == old_tip {
            return None;
        }
        let mut branch = Vec::new();
        let mut cur = new_tip;
        loop {
            let e = &self.blocks[&cur];
            let h = e.height as usize;
            if h < self.main.len() && self.main[h] == cur {
                break;
            }
            branch.push(cur);
            cur = e.block.header.prev_id;
        }
        let fork_height = self.blocks[&cur].height as usize;
        let disconnected = self.main.split_off(fork_height + 1);
        branch.reverse();
        self.main.extend_from_slice(&branch);
        Some(TipChange {
            old_tip,
            new_tip,
            disconnected,
            connected: branch,
        })
    }

    pub fn confirmations(&self, id: &Hash32) -> Option<Confirmations> {
        let h = self.blocks.get(id)?.height;
        let on_main_chain = self.main.get(h as usize) == Some(id);
        let depth = if on_main_chain {
            self.tip_height() - h
        } else {
            0
        };
        Some(Confirmations {
            depth,
            on_main_chain,
        })
    }

    /// Blocks from genesis to `head`, inclusive.
    pub fn ancestry(&self, head: &Hash32) -> Result<Vec<&Block>, LedgerError> {
        let mut out = Vec::new();
        let mut cur = *head;
        loop {
            let e = self
                .blocks
                .get(&cur)
                .ok_or_else(|| LedgerError::UnknownBlock(hex::encode(cur)))?;
            out.push(&e.block);
            if e.height == 0 {
                break;
            }
            cur = e.block.header.prev_id;
        }
        out.reverse();
        Ok(out)
    }

    /// Re-verifies every block from genesis to `head`.
    pub fn validate_chain(&self, head: &Hash32) -> Result<(), LedgerError> {
        let blocks: Vec<Block> = self.ancestry(head)?.into_iter().cloned().collect();
        validate_blocks(&self.params, &blocks)
    }

    /// Writes every stored block, in arrival order, as `len u32 ‖ wire bytes`.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        for id in &self.order {
            let bytes = self.blocks[id].block.to_bytes();
            w.write_all(&(bytes.len() as u32).to_le_bytes())?;
            w.write_all(&bytes)?;
        }
        Ok(())
    }

    /// Rebuilds a store from a chain file. The first record must be this
    /// chain's genesis; every later block must connect and verify.
    pub fn read_from(params: ChainParams, r: impl Read) -> Result<Self, LedgerError> {
        let blocks = read_records(r)?;
        let mut store = Self::new(params)?;
        let mut iter = blocks.into_iter().enumerate();
        match iter.next() {
            Some((_, g))
                if g.block_id == store.genesis_id()
                    && g == store.blocks[&store.genesis_id()].block => {}
            Some((_, g)) => {
                let reason = verify_genesis(&g, &store.params.genesis_target)
                    .err()
                    .unwrap_or(RejectReason::BlockIdMismatch);
                return Err(LedgerError::Rejected { index: 0, reason });
            }
            None => return Ok(store),
        }
        for (index, block) in iter {
            match store.append(block) {
                AppendOutcome::Accepted { .. } => {}
                AppendOutcome::Orphaned => return Err(LedgerError::Disconnected { index }),
                AppendOutcome::Rejected(Rejection::Duplicate) => {
                    return Err(LedgerError::Duplicate { index })
                }
                AppendOutcome::Rejected(Rejection::Invalid(reason)) => {
                    return Err(LedgerError::Rejected { index, reason })
                }
            }
        }
        Ok(store)
    }

    pub fn summary(&self) -> ChainSummary {
        let blocks = self
            .main
            .iter()
            .map(|id| {
                let e = &self.blocks[id];
                let h = &e.block.header;
                BlockSummary {
                    height: e.height,
                    id: hex::encode(id),
                    prev_id: hex::encode(h.prev_id),
                    timestamp: h.timestamp,
                    nonce: h.nonce,
                    transactions: e.block.transactions.len(),
                    objective: e.block.solution.claimed_objective,
                    sa_sweeps: h.target.sa_sweeps,
                }
            })
            .collect();
        ChainSummary {
            height: self.tip_height(),
            tip: hex::encode(self.tip()),
            stored_blocks: self.blocks.len(),
            orphans: self.orphans.len(),
            blocks,
        }
    }
}

/// Parses a chain file into its block records.
pub fn read_records(mut r: impl Read) -> Result<Vec<Block>, LedgerError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < data.len() {
        let Some(len_bytes) = data.get(pos..pos + 4) else {
            return Err(
                PowError::Decode(format!("truncated record length at offset {pos}")).into(),
            );
        };
        let len = u32::from_le_bytes(len_bytes.try_into().expect("4 bytes")) as usize;
        pos += 4;
        let Some(record) = data.get(pos..pos + len) else {
            return Err(PowError::Decode(format!("truncated record at offset {pos}")).into());
        };
        out.push(Block::from_bytes(record)?);
        pos += len;
    }
    Ok(out)
}

/// Verifies a linear chain, genesis first, recomputing every retarget.
/// The error names the first offending block.
pub fn validate_blocks(params: &ChainParams, blocks: &[Block]) -> Result<(), LedgerError> {
    let Some(genesis) = blocks.first() else {
        return Ok(());
    };
    verify_genesis(genesis, &params.genesis_target)
        .map_err(|reason| LedgerError::Rejected { index: 0, reason })?;
    let mut recent: VecDeque<(u64, u64)> = VecDeque::from([(0, genesis.header.timestamp)]);
    for (index, pair) in blocks.windows(2).enumerate() {
        let (parent, block) = (&pair[0], &pair[1]);
        let index = index + 1;
        let target = adjust_difficulty(
            &parent.header.target,
            recent.make_contiguous(),
            params.target_interval,
            params.window,
        )?;
        let checked = match params.verify {
            VerifyMode::Full => verify(block, &parent.block_id, &target).map(|_| ()),
            VerifyMode::Linkage => check_linkage(block, &parent.block_id, &target),
        };
        checked.map_err(|reason| LedgerError::Rejected { index, reason })?;
        recent.push_back((index as u64, block.header.timestamp));
        if recent.len() > params.window as usize + 1 {
            recent.pop_front();
        }
    }
    Ok(())
}

fn check_linkage(
    block: &Block,
    parent: &Hash32,
    target: &DifficultyTarget,
) -> Result<(), RejectReason> {
    let h = &block.header;
    if h.version != BLOCK_VERSION {
        return Err(RejectReason::UnsupportedVersion(h.version));
    }
    if &h.prev_id != parent {
        return Err(RejectReason::PrevMismatch);
    }
    if &h.target != target {
        return Err(RejectReason::TargetMismatch);
    }
    match merkle_root(&block.transactions) {
        Err(_) => return Err(RejectReason::EmptyBlock),
        Ok(root) if root != h.merkle_root => return Err(RejectReason::MerkleMismatch),
        Ok(_) => {}
    }
    if compute_block_id(h, &block.solution) != block.block_id {
        return Err(RejectReason::BlockIdMismatch);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSummary {
    pub height: u64,
    pub id: String,
    pub prev_id: String,
    pub timestamp: u64,
    pub nonce: u32,
    pub transactions: usize,
    pub objective: f64,
    pub sa_sweeps: u64,
}

/// Inspection view of the best chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub height: u64,
    pub tip: String,
    pub stored_blocks: usize,
    pub orphans: usize,
    pub blocks: Vec<BlockSummary>,
}
