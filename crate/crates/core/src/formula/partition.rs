use serde::{Deserialize, Serialize};

use super::{Assignment, FormulaError, Var, VarSet};

/// The role of a variable in the minimality ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// P: minimized.
    Min,
    /// Q: fixed.
    Fixed,
    /// Z: varying.
    Varying,
}

/// A partition of the universe into minimized (P), fixed (Q) and varying
/// (Z) variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    roles: Vec<Role>,
}

impl Partition {
    /// Every variable minimized: the plain bitwise ordering.
    pub fn all_min(num_vars: u32) -> Partition {
        Partition {
            roles: vec![Role::Min; num_vars as usize],
        }
    }

    pub fn from_roles(roles: Vec<Role>) -> Partition {
        Partition { roles }
    }

    /// Builds a partition from explicit sets, which must be pairwise disjoint
    /// and cover `1..=num_vars`.
    pub fn from_sets(
        num_vars: u32,
        p: &VarSet,
        q: &VarSet,
        z: &VarSet,
    ) -> Result<Partition, FormulaError> {
        let mut roles: Vec<Option<Role>> = vec![None; num_vars as usize];
        for (set, role) in [(p, Role::Min), (q, Role::Fixed), (z, Role::Varying)] {
            for v in set {
                let slot = roles
                    .get_mut(v.index())
                    .ok_or(FormulaError::VarOutOfRange {
                        var: v.get(),
                        universe: num_vars,
                    })?;
                if slot.is_some() {
                    return Err(FormulaError::Precondition(format!(
                        "variable {v} assigned to more than one partition block"
                    )));
                }
                *slot = Some(role);
            }
        }
        let roles = roles
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.ok_or_else(|| {
                    FormulaError::Precondition(format!(
                        "variable {} not covered by the partition",
                        i + 1
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Partition { roles })
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    /// Variables beyond the partition's universe are minimized.
    pub fn role(&self, v: Var) -> Role {
        self.roles.get(v.index()).copied().unwrap_or(Role::Min)
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    /// Grows the universe, new variables are minimized.
    pub fn extend_to(&mut self, num_vars: u32) {
        if self.roles.len() < num_vars as usize {
            self.roles.resize(num_vars as usize, Role::Min);
        }
    }

    pub fn extended(&self, num_vars: u32) -> Partition {
        let mut p = self.clone();
        p.extend_to(num_vars);
        p
    }

    pub fn vars_with(&self, role: Role) -> impl Iterator<Item = Var> + '_ {
        self.roles
            .iter()
            .enumerate()
            .filter(move |(_, &r)| r == role)
            .map(|(i, _)| Var::from_index(i))
    }

    pub fn minimized(&self) -> VarSet {
        self.vars_with(Role::Min).collect()
    }

    pub fn fixed(&self) -> VarSet {
        self.vars_with(Role::Fixed).collect()
    }

    pub fn varying(&self) -> VarSet {
        self.vars_with(Role::Varying).collect()
    }

    pub fn is_all_min(&self) -> bool {
        self.roles.iter().all(|&r| r == Role::Min)
    }

    /// `mu ≤_(P,Z) nu`: equal on Q, pointwise below on P.
    pub fn leq(&self, mu: &Assignment, nu: &Assignment) -> bool {
        mu.vars().all(|v| match self.role(v) {
            Role::Min => !mu.get(v) || nu.get(v),
            Role::Fixed => mu.get(v) == nu.get(v),
            Role::Varying => true,
        })
    }

    /// `mu <_(P,Z) nu`.
    pub fn less(&self, mu: &Assignment, nu: &Assignment) -> bool {
        self.leq(mu, nu) && !self.leq(nu, mu)
    }
}

fn perr(line: usize, message: impl Into<String>) -> FormulaError {
    FormulaError::Partition {
        line,
        message: message.into(),
    }
}

/// Parses a partition file over `num_vars` variables.
///
/// Lines have the form `min <ids…> 0`, `fix <ids…> 0` or `var <ids…> 0`;
/// `c` lines are comments. Unlisted variables are minimized. Ids beyond
/// `num_vars` grow the universe.
pub fn parse_partition(text: &str, num_vars: u32) -> Result<Partition, FormulaError> {
    let mut roles: Vec<Option<Role>> = vec![None; num_vars as usize];
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let mut fields = line.split_whitespace();
        let Some(head) = fields.next() else { continue };
        let role = match head {
            "c" => continue,
            "min" => Role::Min,
            "fix" => Role::Fixed,
            "var" => Role::Varying,
            other => return Err(perr(lineno, format!("unknown block `{other}`"))),
        };
        let mut terminated = false;
        for tok in fields {
            if terminated {
                return Err(perr(lineno, "tokens after terminating 0"));
            }
            let id: u32 = tok
                .parse()
                .map_err(|_| perr(lineno, format!("invalid variable id `{tok}`")))?;
            if id == 0 {
                terminated = true;
                continue;
            }
            let idx = id as usize - 1;
            if idx >= roles.len() {
                roles.resize(idx + 1, None);
            }
            match roles[idx] {
                Some(prev) if prev != role => {
                    return Err(perr(lineno, format!("variable {id} listed in two blocks")));
                }
                _ => roles[idx] = Some(role),
            }
        }
        if !terminated {
            return Err(perr(lineno, "line not terminated by 0"));
        }
    }
    Ok(Partition {
        roles: roles.into_iter().map(|r| r.unwrap_or(Role::Min)).collect(),
    })
}
