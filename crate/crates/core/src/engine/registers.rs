use std::fmt;

use rand::Rng;

use crate::graph::{Edge, NodeId};
use crate::label::LcaLabel;
use crate::Graph;

/// ⌈log2 x⌉, with at least one bit.
pub fn ceil_log2(x: u64) -> usize {
    if x <= 2 {
        1
    } else {
        (64 - (x - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Int(u64),
    Node(Option<NodeId>),
    Label(LcaLabel),
    Edge(Option<Edge>),
    Records(Vec<(NodeId, usize)>),
    /// Structured register shown for tracing only.
    Opaque(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{}", u8::from(*b)),
            Value::Int(x) => write!(f, "{x}"),
            Value::Node(None) | Value::Edge(None) => write!(f, "-"),
            Value::Node(Some(v)) => write!(f, "{v}"),
            Value::Label(l) => write!(f, "{l:?}"),
            Value::Edge(Some(e)) => write!(f, "{e}"),
            Value::Records(r) => {
                write!(f, "[")?;
                for (i, (id, d)) in r.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "({id},{d})")?;
                }
                write!(f, "]")
            }
            Value::Opaque(s) => write!(f, "{s}"),
        }
    }
}

/// Upper bound of an integer register, in terms of the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// 0..=n
    Nodes,
    /// 0..=Δ+1
    Degree,
    /// 0..=n·W
    Distance,
    /// 0..=W
    Weight,
    /// 0..=k·n
    Scaled(u64),
    Fixed(u64),
}

impl Bound {
    pub fn max(&self, net: &Graph) -> u64 {
        let n = net.n() as u64;
        match *self {
            Bound::Nodes => n,
            Bound::Degree => net.max_degree() as u64 + 1,
            Bound::Distance => n.saturating_mul(net.max_weight()),
            Bound::Weight => net.max_weight(),
            Bound::Scaled(k) => k.saturating_mul(n),
            Bound::Fixed(x) => x,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Encoding {
    Bool,
    /// Optional node reference, ⌈log2 n⌉ bits.
    Node,
    Int(Bound),
    /// Sequence of (id, offset) pairs, 2⌈log2 n⌉ bits per pair.
    Label,
    /// Optional edge with its weight.
    Edge,
    /// Sequence of (id, degree) records, 2⌈log2 n⌉ bits per record.
    Records,
    /// Structured register of fixed declared width.
    Opaque(fn(&Graph) -> usize),
}

impl Encoding {
    pub fn width(&self, net: &Graph, v: Option<&Value>) -> usize {
        let lg_n = ceil_log2(net.n() as u64);
        match self {
            Encoding::Bool => 1,
            Encoding::Node => lg_n,
            Encoding::Int(b) => ceil_log2(b.max(net).saturating_add(1)),
            Encoding::Label => match v {
                Some(Value::Label(l)) => l.len() * 2 * lg_n,
                _ => 0,
            },
            Encoding::Edge => ceil_log2(net.max_weight() + 1) + 2 * lg_n,
            Encoding::Records => match v {
                Some(Value::Records(r)) => r.len() * 2 * lg_n,
                _ => 0,
            },
            Encoding::Opaque(f) => f(net),
        }
    }

    /// Random value from the domain for a register of node `u`. Node
    /// references mostly name a neighbor of `u`, so faults build plausible
    /// structures such as parent cycles. Structured registers are not sampled here.
    pub fn random<R: Rng>(&self, net: &Graph, u: NodeId, rng: &mut R) -> Value {
        let n = net.n();
        match self {
            Encoding::Bool => Value::Bool(rng.gen()),
            Encoding::Node => {
                let nbs = net.neighbors(u);
                match rng.gen_range(0..8) {
                    0 => Value::Node(None),
                    1 => Value::Node(Some(rng.gen_range(0..n))),
                    _ if nbs.is_empty() => Value::Node(None),
                    _ => Value::Node(Some(nbs[rng.gen_range(0..nbs.len())].node)),
                }
            }
            Encoding::Int(b) => Value::Int(rng.gen_range(0..=b.max(net))),
            Encoding::Label => {
                let max_pairs = ceil_log2(n as u64) + 1;
                let len = rng.gen_range(1..=max_pairs);
                Value::Label(LcaLabel((0..len).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect()))
            }
            Encoding::Edge => {
                if rng.gen_ratio(1, 4) {
                    Value::Edge(None)
                } else {
                    let i = rng.gen_range(0..net.m());
                    Value::Edge(net.edges().nth(i).map(|(e, _)| e))
                }
            }
            Encoding::Records => {
                let len = rng.gen_range(0..=n.min(4));
                let d = net.max_degree();
                Value::Records((0..len).map(|_| (rng.gen_range(0..n), rng.gen_range(0..=d))).collect())
            }
            Encoding::Opaque(_) => Value::Opaque(String::new()),
        }
    }

    pub fn admits(&self, net: &Graph, v: &Value) -> bool {
        let n = net.n();
        match (self, v) {
            (Encoding::Bool, Value::Bool(_)) => true,
            (Encoding::Node, Value::Node(x)) => x.is_none_or(|x| x < n),
            (Encoding::Int(b), Value::Int(x)) => *x <= b.max(net),
            (Encoding::Label, Value::Label(l)) => l.0.iter().all(|&(id, d)| id < n && d < n),
            (Encoding::Edge, Value::Edge(e)) => e.is_none_or(|e| net.is_edge(e.lo(), e.hi())),
            (Encoding::Records, Value::Records(r)) => r.iter().all(|&(id, d)| id < n && d <= net.max_degree()),
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RegisterSpec {
    pub name: &'static str,
    pub encoding: Encoding,
}

impl RegisterSpec {
    pub const fn new(name: &'static str, encoding: Encoding) -> Self {
        RegisterSpec { name, encoding }
    }
}

/// Conversion between a register field and a [`Value`].
pub trait RegisterField: Sized {
    fn to_value(&self) -> Value;
    fn from_value(v: Value) -> Option<Self>;
}

impl RegisterField for bool {
    fn to_value(&self) -> Value {
        Value::Bool(*self)
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }
}

macro_rules! int_field {
    ($($t:ty),*) => {$(
        impl RegisterField for $t {
            fn to_value(&self) -> Value {
                Value::Int(*self as u64)
            }
            fn from_value(v: Value) -> Option<Self> {
                match v {
                    Value::Int(x) => <$t>::try_from(x).ok(),
                    _ => None,
                }
            }
        }
    )*};
}

int_field!(u8, u32, u64, usize);

impl RegisterField for Option<NodeId> {
    fn to_value(&self) -> Value {
        Value::Node(*self)
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Node(x) => Some(x),
            _ => None,
        }
    }
}

impl RegisterField for LcaLabel {
    fn to_value(&self) -> Value {
        Value::Label(self.clone())
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Label(l) => Some(l),
            _ => None,
        }
    }
}

impl RegisterField for Option<Edge> {
    fn to_value(&self) -> Value {
        Value::Edge(*self)
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Edge(e) => Some(e),
            _ => None,
        }
    }
}

impl RegisterField for Vec<(NodeId, usize)> {
    fn to_value(&self) -> Value {
        Value::Records(self.clone())
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Records(r) => Some(r),
            _ => None,
        }
    }
}

/// Implements by-name register access for a state struct whose listed fields
/// implement [`RegisterField`].
#[macro_export]
macro_rules! register_access {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl $ty {
            pub fn register(&self, name: &str) -> Option<$crate::engine::Value> {
                #[allow(unused_imports)]
                use $crate::engine::RegisterField;
                match name {
                    $(stringify!($field) => Some(self.$field.to_value()),)*
                    _ => None,
                }
            }

            pub fn set_register(&mut self, name: &str, v: $crate::engine::Value) -> Result<(), $crate::EngineError> {
                #[allow(unused_imports)]
                use $crate::engine::RegisterField;
                match name {
                    $(stringify!($field) => {
                        let shown = v.to_string();
                        self.$field = RegisterField::from_value(v).ok_or_else(|| $crate::EngineError::OutOfDomain {
                            register: name.to_string(),
                            value: shown,
                        })?;
                        Ok(())
                    })*
                    _ => Err($crate::EngineError::UnknownRegister(name.to_string())),
                }
            }
        }
    };
}
