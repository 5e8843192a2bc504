//! TOML run configuration and its resolution into library values.

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use gentensor::action::{ActionPair, Perm, PermAction, DEFAULT_MAX_GROUP_ORDER};
use gentensor::canon::FamilyKind;
use gentensor::rules::{alpha_from_q, lift_binary_op, midpoint_relation};
use gentensor::words::DEFAULT_MAX_WORDS;
use gentensor::{
    BinaryOp, BuiltinOp, Carrier, Elem, QRelation, RelationalRule, RuleSystem, SaturationOptions,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub x: CarrierSpec,
    pub y: CarrierSpec,
    pub rules: RulesSpec,
    #[serde(default = "default_bound")]
    pub bound: usize,
    #[serde(default = "default_true")]
    pub stability: bool,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<ActionsSpec>,
    /// The smaller rule system for `refine`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<RulesSpec>,
}

fn default_bound() -> usize {
    3
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meet: Option<Vec<Vec<ElemRef>>>,
    #[serde(default)]
    pub reversed: bool,
}

/// An element given by index or by label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemRef {
    Index(u64),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<RuleSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<RuleSpec>>,
}

/// Exactly one of `builtin`, `table`, `tuples`, `q_pairs`, `midpoint`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    /// Display name for `table` and `tuples` rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<ElemRef>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuples: Option<Vec<Vec<ElemRef>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_pairs: Option<Vec<Vec<ElemRef>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub midpoint: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    pub max_words: usize,
    pub max_group_order: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_words: DEFAULT_MAX_WORDS,
            max_group_order: DEFAULT_MAX_GROUP_ORDER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<GroupSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    /// Generators as image lists.
    #[serde(default)]
    pub generators: Vec<Vec<ElemRef>>,
    /// All translations `x -> x + k` of a modular ring.
    #[serde(default)]
    pub translations: bool,
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.bound == 0 {
            return Err(cfg_err("bound", "must be at least 1"));
        }
        Ok(cfg)
    }

    pub fn saturation_options(&self) -> SaturationOptions {
        SaturationOptions {
            check_stability: self.stability,
            max_words: self.limits.max_words,
        }
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let x = Arc::new(self.x.build("x")?);
        let y = Arc::new(self.y.build("y")?);
        let (rules, family) = self.rules.build("rules", &x, &y)?;
        let actions = match &self.actions {
            None => None,
            Some(a) => Some(ActionPair::new(
                group(a.g.as_ref(), &x, "actions.g", self.limits.max_group_order)?,
                group(a.h.as_ref(), &y, "actions.h", self.limits.max_group_order)?,
            )),
        };
        let refine = match &self.refine {
            None => None,
            Some(r) => Some(Arc::new(r.build("refine", &x, &y)?.0)),
        };
        Ok(Resolved {
            x,
            y,
            rules: Arc::new(rules),
            family,
            actions,
            refine,
        })
    }
}

/// A configuration turned into library values.
pub struct Resolved {
    pub x: Arc<Carrier>,
    pub y: Arc<Carrier>,
    pub rules: Arc<RuleSystem>,
    pub family: Option<FamilyKind>,
    pub actions: Option<ActionPair>,
    pub refine: Option<Arc<RuleSystem>>,
}

fn elem(c: &Carrier, r: &ElemRef, field: &str) -> Result<Elem, CliError> {
    match r {
        ElemRef::Index(i) if (*i as usize) < c.len() => Ok(*i as Elem),
        ElemRef::Index(i) => Err(cfg_err(field, format!("index {i} is out of range for {c}"))),
        ElemRef::Label(l) => c
            .index_of(l)
            .ok_or_else(|| cfg_err(field, format!("`{l}` is not an element of {c}"))),
    }
}

fn elems(c: &Carrier, rs: &[ElemRef], field: &str) -> Result<Vec<Elem>, CliError> {
    rs.iter()
        .enumerate()
        .map(|(i, r)| elem(c, r, &format!("{field}[{i}]")))
        .collect()
}

impl CarrierSpec {
    pub fn build(&self, field: &str) -> Result<Carrier, CliError> {
        let e = |sub: &str, err: gentensor::Error| cfg_err(&format!("{field}.{sub}"), err);
        let labels = match (&self.labels, self.size) {
            (Some(l), Some(n)) if l.len() != n => {
                return Err(cfg_err(
                    &format!("{field}.labels"),
                    format!("{} labels for size {n}", l.len()),
                ))
            }
            (Some(l), _) => Some(l.clone()),
            (None, Some(n)) => Some((0..n).map(|i| i.to_string()).collect()),
            (None, None) => None,
        };
        let labels = || {
            labels
                .clone()
                .ok_or_else(|| cfg_err(field, "give `size` or `labels`"))
        };
        let base = match self.kind.as_str() {
            "plain" => Carrier::plain(labels()?).map_err(|err| e("labels", err))?,
            "chain" => Carrier::chain_labeled(labels()?).map_err(|err| e("labels", err))?,
            "lattice" => {
                let meet = self
                    .meet
                    .as_ref()
                    .ok_or_else(|| cfg_err(field, "a lattice needs `meet`"))?;
                let ls = labels()?;
                let plain = Carrier::plain(ls.clone()).map_err(|err| e("labels", err))?;
                let rows = meet
                    .iter()
                    .enumerate()
                    .map(|(i, row)| elems(&plain, row, &format!("{field}.meet[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Carrier::lattice(ls, &rows).map_err(|err| e("meet", err))?
            }
            "modring" => {
                if self.labels.is_some() {
                    return Err(cfg_err(
                        &format!("{field}.labels"),
                        "modring labels are its residues",
                    ));
                }
                let p = self
                    .size
                    .ok_or_else(|| cfg_err(field, "a modring needs `size`"))?;
                Carrier::modring(p).map_err(|err| e("size", err))?
            }
            other => {
                return Err(cfg_err(
                    &format!("{field}.kind"),
                    format!("unknown kind `{other}` (plain, chain, lattice, modring)"),
                ))
            }
        };
        if self.meet.is_some() && self.kind != "lattice" {
            return Err(cfg_err(
                &format!("{field}.meet"),
                "only lattices take a meet table",
            ));
        }
        if self.reversed {
            return base.dual().map_err(|err| e("reversed", err));
        }
        Ok(base)
    }
}

impl RulesSpec {
    pub fn build(
        &self,
        field: &str,
        x: &Arc<Carrier>,
        y: &Arc<Carrier>,
    ) -> Result<(RuleSystem, Option<FamilyKind>), CliError> {
        match (&self.family, &self.x, &self.y) {
            (Some(f), None, None) => {
                let fam =
                    FamilyKind::from_str(f).map_err(|e| cfg_err(&format!("{field}.family"), e))?;
                let sys = fam
                    .rule_system(x.clone(), y.clone())
                    .map_err(|e| cfg_err(&format!("{field}.family"), e))?;
                Ok((sys, Some(fam)))
            }
            (None, Some(rx), Some(ry)) => {
                let xs = side(rx, x, &format!("{field}.x"))?;
                let ys = side(ry, y, &format!("{field}.y"))?;
                let sys =
                    RuleSystem::new(x.clone(), y.clone(), xs, ys).map_err(|e| cfg_err(field, e))?;
                Ok((sys, None))
            }
            _ => Err(cfg_err(
                field,
                "give either `family` or both `x` and `y` rule lists",
            )),
        }
    }
}

fn side(
    specs: &[RuleSpec],
    c: &Arc<Carrier>,
    field: &str,
) -> Result<Vec<RelationalRule>, CliError> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| s.build(c, &format!("{field}[{i}]")))
        .collect()
}

impl RuleSpec {
    pub fn build(&self, c: &Arc<Carrier>, field: &str) -> Result<RelationalRule, CliError> {
        let given = [
            self.builtin.is_some(),
            self.table.is_some(),
            self.tuples.is_some(),
            self.q_pairs.is_some(),
            self.midpoint.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(cfg_err(
                field,
                "give exactly one of builtin, table, tuples, q_pairs, midpoint",
            ));
        }
        if self.tuples.is_none() && (self.left.is_some() || self.right.is_some()) {
            return Err(cfg_err(field, "`left` and `right` only apply to `tuples`"));
        }
        let lib = |e: gentensor::Error| cfg_err(field, e);
        let rule = if let Some(b) = &self.builtin {
            let which =
                BuiltinOp::from_str(b).map_err(|e| cfg_err(&format!("{field}.builtin"), e))?;
            lift_binary_op(&BinaryOp::builtin(which, c.clone()).map_err(lib)?)
        } else if let Some(rows) = &self.table {
            let n = c.len();
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(cfg_err(
                    &format!("{field}.table"),
                    format!("must be {n}x{n}"),
                ));
            }
            let mut flat = Vec::with_capacity(n * n);
            for (i, row) in rows.iter().enumerate() {
                flat.extend(elems(c, row, &format!("{field}.table[{i}]"))?);
            }
            let name = self.name.clone().unwrap_or_else(|| "table".into());
            lift_binary_op(&BinaryOp::from_table(c.clone(), name, flat).map_err(lib)?)
        } else if let Some(ts) = &self.tuples {
            let left = self.left.unwrap_or(1);
            let right = self.right.unwrap_or(2);
            let tuples = ts
                .iter()
                .enumerate()
                .map(|(i, t)| elems(c, t, &format!("{field}.tuples[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let name = self.name.clone().unwrap_or_else(|| "tuples".into());
            RelationalRule::new(c.clone(), name, left, right, tuples).map_err(lib)?
        } else if let Some(qs) = &self.q_pairs {
            let mut pairs = Vec::new();
            for (i, p) in qs.iter().enumerate() {
                let f = format!("{field}.q_pairs[{i}]");
                match elems(c, p, &f)?.as_slice() {
                    [a, b] => pairs.push((*a, *b)),
                    _ => return Err(cfg_err(&f, "a pair has two elements")),
                }
            }
            let q = QRelation::new(c.clone(), pairs).map_err(lib)?;
            lift_binary_op(&alpha_from_q(&q))
        } else {
            if self.midpoint != Some(true) {
                return Err(cfg_err(
                    &format!("{field}.midpoint"),
                    "must be true when given",
                ));
            }
            midpoint_relation(c.clone()).map_err(lib)?
        };
        Ok(rule)
    }
}

fn group(
    spec: Option<&GroupSpec>,
    c: &Arc<Carrier>,
    field: &str,
    max_order: usize,
) -> Result<PermAction, CliError> {
    let Some(spec) = spec else {
        return Ok(PermAction::trivial(c.clone()));
    };
    if spec.translations {
        if !spec.generators.is_empty() {
            return Err(cfg_err(
                field,
                "give `generators` or `translations`, not both",
            ));
        }
        return PermAction::translations(c.clone())
            .map_err(|e| cfg_err(&format!("{field}.translations"), e));
    }
    let gens = spec
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let f = format!("{field}.generators[{i}]");
            let images = elems(c, g, &f)?;
            if images.len() != c.len() {
                return Err(cfg_err(&f, format!("needs {} images", c.len())));
            }
            Perm::new(images).map_err(|e| cfg_err(&f, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    PermAction::generated(c.clone(), gens, max_order).map_err(|e| match e {
        e if e.is_resource_limit() => CliError::Resource(format!("{field}: {e}")),
        e => cfg_err(field, e),
    })
}
