//! The problem datum: item data for both agents, their capacities, the
//! efficiency ordering and the plain-text instance format.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{BkpError, ParseError};

/// A bilevel knapsack instance with interdiction constraints.
///
/// Items are indexed from 0 internally. Profits and both weight vectors are
/// stored in the order the instance was created with; use
/// [`sort_by_efficiency`] to obtain the non-increasing `p/w` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub profits: Vec<i64>,
    /// Follower weights `w_i`.
    pub weights: Vec<i64>,
    /// Leader (interdiction) weights `v_i`.
    pub leader_weights: Vec<i64>,
    pub leader_capacity: i64,
    pub follower_capacity: i64,
}

/// One violated assumption found by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonPositiveProfit {
        item: usize,
    },
    NonPositiveWeight {
        item: usize,
    },
    NonPositiveLeaderWeight {
        item: usize,
    },
    /// `v_i < C_u` fails for the item.
    LeaderWeightTooLarge {
        item: usize,
    },
    /// `w_i < C_l` fails for the item.
    WeightTooLarge {
        item: usize,
    },
    /// `Σ v_i > C_u` fails.
    LeaderTrivial,
    /// `Σ w_i > C_l` fails.
    FollowerTrivial,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Items are reported 1-based, as in the instance file.
        match self {
            Violation::NonPositiveProfit { item } => write!(f, "p_{} > 0 violated", item + 1),
            Violation::NonPositiveWeight { item } => write!(f, "w_{} > 0 violated", item + 1),
            Violation::NonPositiveLeaderWeight { item } => {
                write!(f, "v_{} > 0 violated", item + 1)
            }
            Violation::LeaderWeightTooLarge { item } => {
                write!(f, "v_{} < C_u violated", item + 1)
            }
            Violation::WeightTooLarge { item } => write!(f, "w_{} < C_l violated", item + 1),
            Violation::LeaderTrivial => write!(f, "Σv_i > C_u violated"),
            Violation::FollowerTrivial => write!(f, "Σw_i > C_l violated"),
        }
    }
}

impl Instance {
    pub fn new(
        profits: Vec<i64>,
        weights: Vec<i64>,
        leader_weights: Vec<i64>,
        leader_capacity: i64,
        follower_capacity: i64,
    ) -> Result<Self, BkpError> {
        let n = profits.len();
        if weights.len() != n || leader_weights.len() != n {
            return Err(BkpError::LengthMismatch {
                profits: n,
                weights: weights.len(),
                leader_weights: leader_weights.len(),
            });
        }
        Ok(Self {
            profits,
            weights,
            leader_weights,
            leader_capacity,
            follower_capacity,
        })
    }

    /// Number of items.
    pub fn len(&self) -> usize {
        self.profits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profits.is_empty()
    }

    pub fn total_weight(&self) -> i64 {
        self.weights.iter().sum()
    }

    pub fn total_leader_weight(&self) -> i64 {
        self.leader_weights.iter().sum()
    }

    pub fn total_profit(&self) -> i64 {
        self.profits.iter().sum()
    }

    /// Checks every modelling assumption and reports all violations.
    /// An empty report means the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        for i in 0..self.len() {
            if self.profits[i] < 1 {
                report.push(Violation::NonPositiveProfit { item: i });
            }
            if self.weights[i] < 1 {
                report.push(Violation::NonPositiveWeight { item: i });
            }
            if self.leader_weights[i] < 1 {
                report.push(Violation::NonPositiveLeaderWeight { item: i });
            }
            if self.leader_weights[i] >= self.leader_capacity {
                report.push(Violation::LeaderWeightTooLarge { item: i });
            }
            if self.weights[i] >= self.follower_capacity {
                report.push(Violation::WeightTooLarge { item: i });
            }
        }
        if self.total_leader_weight() <= self.leader_capacity {
            report.push(Violation::LeaderTrivial);
        }
        if self.total_weight() <= self.follower_capacity {
            report.push(Violation::FollowerTrivial);
        }
        report
    }

    /// True when the bilevel problem is well posed: positive item data and
    /// non-negative capacities. The solvers accept any well-posed instance,
    /// valid or not.
    pub fn is_well_posed(&self) -> bool {
        self.leader_capacity >= 0
            && self.follower_capacity >= 0
            && self.profits.iter().all(|&p| p >= 1)
            && self.weights.iter().all(|&w| w >= 1)
            && self.leader_weights.iter().all(|&v| v >= 1)
    }

    /// True when items are in non-increasing `p/w` order.
    pub fn is_efficiency_sorted(&self) -> bool {
        (1..self.len()).all(|i| {
            compare_efficiency(
                self.profits[i - 1],
                self.weights[i - 1],
                self.profits[i],
                self.weights[i],
            ) != Ordering::Less
        })
    }

    /// Returns the instance with items reordered so that item `k` of the
    /// result is item `order[k]` of `self`.
    fn reordered(&self, order: &[usize]) -> Instance {
        Instance {
            profits: order.iter().map(|&i| self.profits[i]).collect(),
            weights: order.iter().map(|&i| self.weights[i]).collect(),
            leader_weights: order.iter().map(|&i| self.leader_weights[i]).collect(),
            leader_capacity: self.leader_capacity,
            follower_capacity: self.follower_capacity,
        }
    }
}

/// Compares `p1/w1` against `p2/w2` by cross-multiplication.
pub fn compare_efficiency(p1: i64, w1: i64, p2: i64, w2: i64) -> Ordering {
    (p1 as i128 * w2 as i128).cmp(&(p2 as i128 * w1 as i128))
}

/// Bijection between original and sorted item positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    /// `forward[original] = sorted position`.
    pub forward: Vec<usize>,
    /// `backward[sorted] = original position`.
    pub backward: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            forward: (0..n).collect(),
            backward: (0..n).collect(),
        }
    }

    fn from_backward(backward: Vec<usize>) -> Self {
        let mut forward = vec![0; backward.len()];
        for (sorted, &orig) in backward.iter().enumerate() {
            forward[orig] = sorted;
        }
        Self { forward, backward }
    }

    pub fn is_identity(&self) -> bool {
        self.backward.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Maps a vector indexed by sorted position back to original order.
    pub fn to_original<T: Clone>(&self, sorted: &[T]) -> Vec<T> {
        self.forward.iter().map(|&s| sorted[s].clone()).collect()
    }

    /// Maps a vector indexed by original position into sorted order.
    pub fn to_sorted<T: Clone>(&self, original: &[T]) -> Vec<T> {
        self.backward.iter().map(|&o| original[o].clone()).collect()
    }
}

/// Sorts items by non-increasing `p_i / w_i`, ties broken by ascending
/// original index.
pub fn sort_by_efficiency(inst: &Instance) -> (Instance, Permutation) {
    let mut order: Vec<usize> = (0..inst.len()).collect();
    // Stable sort keeps the original index order among equal ratios.
    order.sort_by(|&a, &b| {
        compare_efficiency(
            inst.profits[b],
            inst.weights[b],
            inst.profits[a],
            inst.weights[a],
        )
    });
    let sorted = inst.reordered(&order);
    (sorted, Permutation::from_backward(order))
}

/// Parses the plain-text instance format:
///
/// ```text
/// n
/// C_u C_l
/// p_1 w_1 v_1
/// ...
/// ```
pub fn read_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines.next().ok_or(ParseError::Empty)?;
    let n = parse_fields(line, header, 1, "header")?[0];
    if n < 0 {
        return Err(ParseError::Invalid {
            line,
            message: "item count must be non-negative".into(),
        });
    }
    let n = n as usize;

    let (line, caps) = lines.next().ok_or(ParseError::Truncated {
        expected: n,
        found: 0,
    })?;
    let caps = parse_fields(line, caps, 2, "capacity line")?;
    for &c in &caps {
        if c < 1 {
            return Err(ParseError::Invalid {
                line,
                message: format!("capacity {c} must be positive"),
            });
        }
    }

    let mut profits = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut leader_weights = Vec::with_capacity(n);
    for row in 1..=n {
        let (line, text) = lines.next().ok_or(ParseError::Truncated {
            expected: n,
            found: row - 1,
        })?;
        let fields = parse_fields(line, text, 3, &format!("row {row}"))?;
        if let Some(bad) = fields.iter().find(|&&f| f < 1) {
            return Err(ParseError::Invalid {
                line,
                message: format!("row {row}: datum {bad} must be positive"),
            });
        }
        profits.push(fields[0]);
        weights.push(fields[1]);
        leader_weights.push(fields[2]);
    }
    if let Some((line, _)) = lines.next() {
        return Err(ParseError::Invalid {
            line,
            message: format!("unexpected data after {n} item rows"),
        });
    }

    Ok(Instance {
        profits,
        weights,
        leader_weights,
        leader_capacity: caps[0],
        follower_capacity: caps[1],
    })
}

fn parse_fields(
    line: usize,
    text: &str,
    expected: usize,
    what: &str,
) -> Result<Vec<i64>, ParseError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != expected {
        return Err(ParseError::FieldCount {
            line,
            what: what.to_string(),
            expected,
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<i64>().map_err(|_| ParseError::Invalid {
                line,
                message: format!("{what}: '{f}' is not an integer"),
            })
        })
        .collect()
}

/// Writes the canonical text form: single spaces, one trailing newline.
pub fn write_instance(inst: &Instance) -> String {
    let mut out = format!(
        "{}\n{} {}\n",
        inst.len(),
        inst.leader_capacity,
        inst.follower_capacity
    );
    for i in 0..inst.len() {
        out.push_str(&format!(
            "{} {} {}\n",
            inst.profits[i], inst.weights[i], inst.leader_weights[i]
        ));
    }
    out
}
