use std::fmt;

use serde::Serialize;

use super::Formula;

/// Three-valued closure metadata.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Yes,
    No,
    Unknown,
}

impl Flag {
    pub fn symbol(self) -> &'static str {
        match self {
            Flag::Yes => "+",
            Flag::No => "-",
            Flag::Unknown => "?",
        }
    }

    pub fn is_yes(self) -> bool {
        self == Flag::Yes
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// The five closure properties tracked per dependency.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    EmptyTeam,
    Downwards,
    Union,
    Upwards,
    DomainIndependence,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::EmptyTeam,
        Property::Downwards,
        Property::Union,
        Property::Upwards,
        Property::DomainIndependence,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Property::EmptyTeam => "empty",
            Property::Downwards => "down",
            Property::Union => "union",
            Property::Upwards => "up",
            Property::DomainIndependence => "domind",
        }
    }

    pub fn from_key(key: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.key() == key)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct ClosureFlags {
    pub empty_team: Flag,
    pub downwards: Flag,
    pub union: Flag,
    pub upwards: Flag,
    pub domain_independent: Flag,
}

impl ClosureFlags {
    pub const UNKNOWN: ClosureFlags = ClosureFlags {
        empty_team: Flag::Unknown,
        downwards: Flag::Unknown,
        union: Flag::Unknown,
        upwards: Flag::Unknown,
        domain_independent: Flag::Unknown,
    };

    pub fn from_row(row: [Flag; 5]) -> ClosureFlags {
        ClosureFlags {
            empty_team: row[0],
            downwards: row[1],
            union: row[2],
            upwards: row[3],
            domain_independent: row[4],
        }
    }

    pub fn row(&self) -> [Flag; 5] {
        [
            self.empty_team,
            self.downwards,
            self.union,
            self.upwards,
            self.domain_independent,
        ]
    }

    pub fn get(&self, p: Property) -> Flag {
        match p {
            Property::EmptyTeam => self.empty_team,
            Property::Downwards => self.downwards,
            Property::Union => self.union,
            Property::Upwards => self.upwards,
            Property::DomainIndependence => self.domain_independent,
        }
    }
}

/// The built-in atom families.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Dep,
    Inc,
    Exc,
    Anon,
    Indep,
    Ne,
    Const,
    All,
}

impl Builtin {
    pub const ALL: [Builtin; 8] = [
        Builtin::Dep,
        Builtin::Inc,
        Builtin::Exc,
        Builtin::Anon,
        Builtin::Indep,
        Builtin::Ne,
        Builtin::Const,
        Builtin::All,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Builtin::Dep => "dep",
            Builtin::Inc => "inc",
            Builtin::Exc => "exc",
            Builtin::Anon => "anon",
            Builtin::Indep => "indep",
            Builtin::Ne => "ne",
            Builtin::Const => "const",
            Builtin::All => "all",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.keyword() == s)
    }

    /// Number of `;`-separated argument groups.
    pub fn group_count(self) -> usize {
        match self {
            Builtin::Dep | Builtin::Inc | Builtin::Exc | Builtin::Anon | Builtin::Indep => 2,
            Builtin::Ne | Builtin::Const | Builtin::All => 1,
        }
    }

    pub fn needs_equal_groups(self) -> bool {
        matches!(self, Builtin::Inc | Builtin::Exc)
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DependencyBody {
    Builtin(Builtin),
    /// A sentence over the single relation symbol `relation`.
    Sentence { relation: String, sentence: Formula },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DependencySpec {
    pub name: String,
    /// Group sizes; the arity is their sum.
    pub split: Vec<usize>,
    pub body: DependencyBody,
    pub flags: ClosureFlags,
}

impl DependencySpec {
    pub fn arity(&self) -> usize {
        self.split.iter().sum()
    }

    pub fn builtin(&self) -> Option<Builtin> {
        match self.body {
            DependencyBody::Builtin(b) => Some(b),
            DependencyBody::Sentence { .. } => None,
        }
    }

    /// Display label such as `dep(1;1)` or `sym/2`.
    pub fn label(&self) -> String {
        match self.body {
            DependencyBody::Builtin(b) => {
                let parts: Vec<String> = self.split.iter().map(|k| k.to_string()).collect();
                format!("{b}({})", parts.join(";"))
            }
            DependencyBody::Sentence { .. } => format!("{}/{}", self.name, self.arity()),
        }
    }
}
