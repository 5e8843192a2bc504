use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use gentensor::action::{invariance_audit, well_defined_audit, ActionPair};
use gentensor::canon::{canon_oracle_audit_with, Canonicalizer, FamilyKind};
use gentensor::quotient::{
    census, class_representative, is_entangled, qualifier, refinement_check,
};
use gentensor::structlab::{
    audit_associativity, audit_commutativity, audit_three_way, enumerate_ops_audit,
};
use gentensor::{Carrier, ClassIndex, Error, RuleSystem, Word, WordSpace};

use crate::cache::{Cache, CacheStatus, SaturationRequest};
use crate::config::{Resolved, RulesSpec, RunConfig};
use crate::{AuditArgs, CliError, Command, CsvTable, Outcome, Theorem};

const MAX_LISTED: usize = 20;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn need_config(cfg: Option<&RunConfig>, command: &str) -> Result<(RunConfig, Resolved), CliError> {
    let cfg = cfg.ok_or_else(|| CliError::Config(format!("`{command}` needs --config")))?;
    let resolved = cfg.resolve()?;
    Ok((cfg.clone(), resolved))
}

fn need_family(r: &Resolved, command: &str) -> Result<FamilyKind, CliError> {
    r.family
        .ok_or_else(|| CliError::Config(format!("rules.family: `{command}` needs a rule family")))
}

fn saturate_with(
    cache: &Cache,
    cfg: &RunConfig,
    rules_spec: &RulesSpec,
    rules: Arc<RuleSystem>,
    bound: usize,
) -> Result<(ClassIndex, CacheStatus), CliError> {
    cache.saturate(SaturationRequest {
        x: &cfg.x,
        y: &cfg.y,
        rules_spec,
        rules,
        bound,
        opts: cfg.saturation_options(),
    })
}

fn combine(a: CacheStatus, b: CacheStatus) -> CacheStatus {
    match (a, b) {
        (CacheStatus::Disabled, _) | (_, CacheStatus::Disabled) => CacheStatus::Disabled,
        (CacheStatus::Hit, CacheStatus::Hit) => CacheStatus::Hit,
        _ => CacheStatus::Miss,
    }
}

fn idx_qualifier(idx: &ClassIndex) -> String {
    qualifier(idx.bound(), idx.stability())
}

fn parse_word(space: &WordSpace, text: &str) -> Result<Word, CliError> {
    space
        .parse(text)
        .map_err(|e| CliError::Config(format!("word `{text}`: {e}")))
}

pub fn run(command: &Command, cfg: Option<&RunConfig>, cache: &Cache) -> Result<Outcome, CliError> {
    match command {
        Command::Audit(args) => audit(args, cfg, cache),
        Command::Saturate => {
            let (cfg, r) = need_config(cfg, "saturate")?;
            let (idx, status) = saturate_with(cache, &cfg, &cfg.rules, r.rules.clone(), cfg.bound)?;
            Ok(saturate_report(&idx, status))
        }
        Command::Census => {
            let (cfg, r) = need_config(cfg, "census")?;
            let (idx, status) = saturate_with(cache, &cfg, &cfg.rules, r.rules.clone(), cfg.bound)?;
            let c = census(&idx);
            let mut results = to_value(&c);
            results["qualifier"] = json!(idx_qualifier(&idx));
            let rows = c
                .class_size_histogram
                .iter()
                .map(|(s, n)| vec![s.to_string(), n.to_string()])
                .collect();
            Ok(Outcome {
                results,
                csv: Some(CsvTable {
                    headers: vec!["class_size", "classes"],
                    rows,
                }),
                cache: status,
            })
        }
        Command::Entangled { words } => {
            let (cfg, r) = need_config(cfg, "entangled")?;
            let (idx, status) = saturate_with(cache, &cfg, &cfg.rules, r.rules.clone(), cfg.bound)?;
            let mut verdicts = Vec::new();
            let mut rows = Vec::new();
            for text in words {
                let w = parse_word(idx.space(), text)?;
                let v = is_entangled(&w, &idx).map_err(|e| match e {
                    Error::OutOfBound(_) => CliError::Config(format!(
                        "word `{text}` has {} pairs, above the bound {}",
                        w.len(),
                        idx.bound()
                    )),
                    e => e.into(),
                })?;
                let word = idx.space().format(&w);
                rows.push(vec![
                    word.clone(),
                    v.class_id.to_string(),
                    v.status.to_string(),
                    v.qualifier(),
                ]);
                verdicts.push(json!({
                    "word": word,
                    "class_id": v.class_id,
                    "status": v.status,
                    "qualifier": v.qualifier(),
                }));
            }
            Ok(Outcome {
                results: json!({ "verdicts": verdicts }),
                csv: Some(CsvTable {
                    headers: vec!["word", "class_id", "status", "qualifier"],
                    rows,
                }),
                cache: status,
            })
        }
        Command::Canon { words } => {
            let (_, r) = need_config(cfg, "canon")?;
            let family = need_family(&r, "canon")?;
            let canon = Canonicalizer::new(family, r.x.clone(), r.y.clone())?;
            let space = canon.space();
            let mut out = Vec::new();
            let mut rows = Vec::new();
            for text in words {
                let w = parse_word(space, text)?;
                let c = canon.canonicalize(&w)?;
                let (input_free, free) = (canon.is_free(&w)?, canon.is_free(&c)?);
                rows.push(vec![
                    space.format(&w),
                    space.format(&c),
                    input_free.to_string(),
                    free.to_string(),
                ]);
                out.push(json!({
                    "word": space.format(&w),
                    "canonical": space.format(&c),
                    "input_free": input_free,
                    "canonical_free": free,
                }));
            }
            Ok(Outcome {
                results: json!({
                    "family": family,
                    "freeness": family.freeness_name(),
                    "forms": out,
                }),
                csv: Some(CsvTable {
                    headers: vec!["word", "canonical", "input_free", "canonical_free"],
                    rows,
                }),
                cache: CacheStatus::Disabled,
            })
        }
        Command::ActionCheck => {
            let (cfg, r) = need_config(cfg, "action-check")?;
            let actions = r.actions.as_ref().ok_or_else(|| {
                CliError::Config("actions: `action-check` needs an [actions] table".into())
            })?;
            let (idx, status) = saturate_with(cache, &cfg, &cfg.rules, r.rules.clone(), cfg.bound)?;
            action_report(actions, &idx, status)
        }
        Command::Refine => {
            let (cfg, r) = need_config(cfg, "refine")?;
            let small_rules = r.refine.clone().ok_or_else(|| {
                CliError::Config("refine: `refine` needs a [refine] rule table".into())
            })?;
            let small_spec = cfg.refine.clone().expect("resolved refine has a spec");
            let (small, s1) = saturate_with(cache, &cfg, &small_spec, small_rules, cfg.bound)?;
            let (big, s2) = saturate_with(cache, &cfg, &cfg.rules, r.rules.clone(), cfg.bound)?;
            let rep = refinement_check(&small, &big)?;
            let space = big.space();
            let counterexample = rep.counterexample.as_ref().map(|c| {
                json!({
                    "first": space.format(&c.first),
                    "second": space.format(&c.second),
                    "big_classes": c.big_classes,
                })
            });
            let row = vec![
                rep.holds.to_string(),
                rep.small_classes.to_string(),
                rep.big_classes.to_string(),
                idx_qualifier(&small),
                idx_qualifier(&big),
            ];
            Ok(Outcome {
                results: json!({
                    "holds": rep.holds,
                    "small_classes": rep.small_classes,
                    "big_classes": rep.big_classes,
                    "counterexample": counterexample,
                    "small_qualifier": idx_qualifier(&small),
                    "big_qualifier": idx_qualifier(&big),
                }),
                csv: Some(CsvTable {
                    headers: vec![
                        "holds",
                        "small_classes",
                        "big_classes",
                        "small_qualifier",
                        "big_qualifier",
                    ],
                    rows: vec![row],
                }),
                cache: combine(s1, s2),
            })
        }
    }
}

fn saturate_report(idx: &ClassIndex, status: CacheStatus) -> Outcome {
    let space = idx.space();
    let mut classes = Vec::new();
    let mut rows = Vec::new();
    for c in idx.classes() {
        let rep = space.format(class_representative(c.id, idx).expect("class ids are valid"));
        rows.push(vec![
            c.id.to_string(),
            c.members.to_string(),
            c.min_size.to_string(),
            c.has_singleton.to_string(),
            rep.clone(),
        ]);
        classes.push(json!({
            "id": c.id,
            "members": c.members,
            "min_size": c.min_size,
            "separable": c.has_singleton,
            "representative": rep,
        }));
    }
    Outcome {
        results: json!({
            "bound": idx.bound(),
            "stability": idx.stability(),
            "qualifier": idx_qualifier(idx),
            "words": idx.universe().len(),
            "class_count": idx.classes().len(),
            "classes": classes,
        }),
        csv: Some(CsvTable {
            headers: vec!["id", "members", "min_size", "separable", "representative"],
            rows,
        }),
        cache: status,
    }
}

fn action_report(
    actions: &ActionPair,
    idx: &ClassIndex,
    status: CacheStatus,
) -> Result<Outcome, CliError> {
    let space = idx.space();
    let fmt_perm = |p: &gentensor::action::Perm| format!("{:?}", p.images());
    let mut results = json!({
        "g_order": actions.g.order(),
        "h_order": actions.h.order(),
        "group_pairs": actions.order(),
        "qualifier": idx_qualifier(idx),
    });
    let mut rows = Vec::new();
    match well_defined_audit(actions, idx) {
        Err(Error::Incompatible {
            rule,
            counterexample,
        }) => {
            results["compatible"] = json!(false);
            results["incompatibility"] = json!({ "rule": rule, "counterexample": counterexample });
        }
        Err(e) => return Err(e.into()),
        Ok(wd) => {
            results["compatible"] = json!(true);
            results["well_defined_violations"] = json!(wd.len());
            results["well_defined_examples"] = wd
                .iter()
                .take(MAX_LISTED)
                .map(|v| {
                    json!({
                        "z": space.format(&v.z), "z2": space.format(&v.z2),
                        "g": fmt_perm(&v.g), "h": fmt_perm(&v.h),
                        "image": space.format(&v.image), "image2": space.format(&v.image2),
                    })
                })
                .collect();
            for v in &wd {
                rows.push(vec![
                    "well-defined".into(),
                    space.format(&v.z),
                    fmt_perm(&v.g),
                    fmt_perm(&v.h),
                    space.format(&v.image),
                ]);
            }
            if wd.is_empty() {
                let inv = invariance_audit(actions, idx)?;
                results["invariance_violations"] = json!(inv.len());
                results["invariance_examples"] = inv
                    .iter()
                    .take(MAX_LISTED)
                    .map(|v| {
                        json!({
                            "representative": space.format(&v.representative),
                            "g": fmt_perm(&v.g), "h": fmt_perm(&v.h),
                            "image": space.format(&v.image),
                            "verdict": v.verdict, "image_verdict": v.image_verdict,
                        })
                    })
                    .collect();
                for v in &inv {
                    rows.push(vec![
                        "invariance".into(),
                        space.format(&v.representative),
                        fmt_perm(&v.g),
                        fmt_perm(&v.h),
                        space.format(&v.image),
                    ]);
                }
            }
        }
    }
    Ok(Outcome {
        results,
        csv: Some(CsvTable {
            headers: vec!["kind", "word", "g", "h", "image"],
            rows,
        }),
        cache: status,
    })
}

fn pairs_text(pairs: &[(u8, u8)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn audit(args: &AuditArgs, cfg: Option<&RunConfig>, cache: &Cache) -> Result<Outcome, CliError> {
    let plain = || Carrier::plain_sized(args.n).map_err(CliError::from);
    if args.count {
        let r = enumerate_ops_audit(&plain()?)?;
        let mut results = to_value(&r);
        results["matches_formulas"] = json!(r.matches_formulas());
        let row = vec![
            r.n.to_string(),
            r.total_ops.to_string(),
            r.identity_generator_ops.to_string(),
            r.formula_total.to_string(),
            r.formula_identity.to_string(),
        ];
        return Ok(Outcome {
            results,
            csv: Some(CsvTable {
                headers: vec![
                    "n",
                    "total_ops",
                    "identity_generator_ops",
                    "formula_total",
                    "formula_identity",
                ],
                rows: vec![row],
            }),
            cache: CacheStatus::Disabled,
        });
    }
    if args.canon {
        let (cfg, r) = need_config(cfg, "audit --canon")?;
        let family = need_family(&r, "audit --canon")?;
        let canon = Canonicalizer::new(family, r.x.clone(), r.y.clone())?;
        let oracle_bound = cfg.bound + family.detour_headroom();
        let (oracle, status) =
            saturate_with(cache, &cfg, &cfg.rules, r.rules.clone(), oracle_bound)?;
        let rep = canon_oracle_audit_with(&canon, &oracle, cfg.bound)?;
        let space = oracle.space();
        let mut results = to_value(&rep);
        results["unsound_examples"] = json!(rep
            .unsound_examples
            .iter()
            .map(|w| space.format(w))
            .collect::<Vec<_>>());
        results["entanglement"]["examples"] = json!(rep
            .entanglement
            .examples
            .iter()
            .map(|w| space.format(w))
            .collect::<Vec<_>>());
        results["uniqueness"]["examples"] = json!(rep
            .uniqueness
            .examples
            .iter()
            .map(|(a, b)| [space.format(a), space.format(b)])
            .collect::<Vec<_>>());
        results["qualifier"] = json!(idx_qualifier(&oracle));
        let row = vec![
            family.to_string(),
            rep.bound.to_string(),
            rep.oracle_bound.to_string(),
            rep.words.to_string(),
            rep.sound.to_string(),
            rep.free.to_string(),
            rep.idempotent.to_string(),
            rep.entanglement.agree.to_string(),
            rep.entanglement.disagree.to_string(),
        ];
        return Ok(Outcome {
            results,
            csv: Some(CsvTable {
                headers: vec![
                    "family",
                    "bound",
                    "oracle_bound",
                    "words",
                    "sound",
                    "free",
                    "idempotent",
                    "entanglement_agree",
                    "entanglement_disagree",
                ],
                rows: vec![row],
            }),
            cache: status,
        });
    }
    let theorem = args.theorem.expect("clap requires one audit mode");
    let c = plain()?;
    let (results, csv) = match theorem {
        Theorem::ThreeWay => {
            let r = audit_three_way(&c)?;
            let rows = r
                .counterexamples
                .iter()
                .map(|ce| {
                    vec![
                        format!("{:?}", ce.table),
                        ce.properties.psi_identity.to_string(),
                        ce.properties.conservative.to_string(),
                        ce.properties.alpha_q_form.to_string(),
                    ]
                })
                .collect();
            let mut v = to_value(&r);
            v["counterexample_count"] = json!(r.counterexamples.len());
            (
                v,
                CsvTable {
                    headers: vec!["table", "psi_identity", "conservative", "alpha_q_form"],
                    rows,
                },
            )
        }
        Theorem::Associativity => {
            let r = audit_associativity(&c)?;
            let rows = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.q_mask.to_string(),
                        pairs_text(&row.pairs),
                        row.associative.to_string(),
                        row.composition_closed.to_string(),
                        row.tournament.to_string(),
                        row.witness.map(|w| format!("{w:?}")).unwrap_or_default(),
                    ]
                })
                .collect();
            let mut v = to_value(&r);
            v["disagreement_count"] = json!(r.disagreements.len());
            (
                v,
                CsvTable {
                    headers: vec![
                        "q_mask",
                        "pairs",
                        "associative",
                        "composition_closed",
                        "tournament",
                        "witness",
                    ],
                    rows,
                },
            )
        }
        Theorem::Commutativity => {
            let r = audit_commutativity(&c)?;
            let rows = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.q_mask.to_string(),
                        pairs_text(&row.pairs),
                        row.commutative.to_string(),
                        row.q_is_diagonal.to_string(),
                    ]
                })
                .collect();
            let mut v = to_value(&r);
            v["discrepancy_count"] = json!(r.discrepancies.len());
            (
                v,
                CsvTable {
                    headers: vec!["q_mask", "pairs", "commutative", "q_is_diagonal"],
                    rows,
                },
            )
        }
    };
    let mut results = results;
    results["theorem"] = json!(theorem);
    Ok(Outcome {
        results,
        csv: Some(csv),
        cache: CacheStatus::Disabled,
    })
}
