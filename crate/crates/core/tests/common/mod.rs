//! Shared helpers for the integration tests: corpus access and a seeded
//! generator of small random models.

#![allow(dead_code)]

use std::path::PathBuf;

use cdmn::oracle::{brute_force_models, DEFAULT_ORACLE_LIMIT};
use cdmn::CompiledModel;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus_text(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).expect("corpus file")
}

pub fn compile(text: &str) -> CompiledModel {
    cdmn::compile_str(text).expect("model compiles")
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sort {
    Thing,
    Level,
    Bool,
}

struct Column {
    header: String,
    symbol: &'static str,
    sort: Sort,
}

struct Plan {
    things: usize,
    levels: Option<usize>,
    level_is_int: bool,
    unknown: Vec<&'static str>,
    weight: bool,
}

fn thing(i: usize) -> String {
    format!("T{i}")
}

fn level_value(p: &Plan, i: usize) -> String {
    if p.level_is_int {
        i.to_string()
    } else {
        format!("L{i}")
    }
}

/// Result sort of each optional unknown symbol.
fn symbol_sort(p: &Plan, s: &str) -> Sort {
    match s {
        "Color" | "Weight" => {
            if p.levels.is_some() {
                Sort::Level
            } else {
                Sort::Thing
            }
        }
        "Pick" => Sort::Thing,
        _ => Sort::Bool,
    }
}

fn columns(p: &Plan, two_vars: bool) -> Vec<Column> {
    let mut out = Vec::new();
    for &s in &p.unknown {
        let sort = symbol_sort(p, s);
        match s {
            "Color" => out.push(Column { header: "Color of x".into(), symbol: s, sort }),
            "Pick" => out.push(Column { header: "Pick".into(), symbol: s, sort }),
            "Red" => out.push(Column { header: "x is Red".into(), symbol: s, sort }),
            "Alarm" => out.push(Column { header: "Alarm".into(), symbol: s, sort }),
            "likes" if two_vars => out.push(Column { header: "x likes y".into(), symbol: s, sort }),
            _ => {}
        }
    }
    if p.weight {
        out.push(Column {
            header: "Weight of x".into(),
            symbol: "Weight",
            sort: symbol_sort(p, "Weight"),
        });
    }
    out
}

fn value_of(rng: &mut ChaCha8Rng, p: &Plan, sort: Sort) -> String {
    match sort {
        Sort::Thing => thing(rng.gen_range(0..p.things)),
        Sort::Level => level_value(p, rng.gen_range(0..p.levels.unwrap())),
        Sort::Bool => if rng.gen_bool(0.5) { "Yes" } else { "No" }.into(),
    }
}

fn input_cell(rng: &mut ChaCha8Rng, p: &Plan, sort: Sort, two_vars: bool) -> String {
    let n = match sort {
        Sort::Thing => p.things,
        Sort::Level => p.levels.unwrap(),
        Sort::Bool => 2,
    };
    match rng.gen_range(0..7) {
        0 | 1 => "-".into(),
        2 if sort != Sort::Bool => format!("not({})", value_of(rng, p, sort)),
        3 if sort != Sort::Bool && n > 1 => {
            let mut vals: Vec<String> = (0..n)
                .map(|i| match sort {
                    Sort::Thing => thing(i),
                    _ => level_value(p, i),
                })
                .collect();
            vals.shuffle(rng);
            vals.truncate(2);
            vals.join(", ")
        }
        4 if sort == Sort::Level && p.level_is_int => {
            let ops = ["<", "<=", ">", ">=", "="];
            format!("{} {}", ops.choose(rng).unwrap(), rng.gen_range(0..n))
        }
        5 if sort == Sort::Level && p.level_is_int && n > 1 => {
            let lo = rng.gen_range(0..n - 1);
            format!("[{lo}..{}]", rng.gen_range(lo + 1..n))
        }
        6 if sort == Sort::Thing => {
            let v = if two_vars && rng.gen_bool(0.5) { "y" } else { "x" };
            if rng.gen_bool(0.5) { v.to_string() } else { format!("not({v})") }
        }
        _ => value_of(rng, p, sort),
    }
}

fn constraint_output(rng: &mut ChaCha8Rng, p: &Plan, sort: Sort) -> String {
    match sort {
        Sort::Bool => value_of(rng, p, sort),
        Sort::Level if p.level_is_int && rng.gen_bool(0.3) => {
            format!("{} {}", ["<", ">="].choose(rng).unwrap(), rng.gen_range(0..p.levels.unwrap()))
        }
        _ if rng.gen_bool(0.3) => format!("not({})", value_of(rng, p, sort)),
        _ => value_of(rng, p, sort),
    }
}

/// Model text for a random problem: at most two types with at most four
/// elements, at most three tables with at most three rows. Returns `None`
/// when the draw does not compile or is too large for the oracle.
pub fn random_model(rng: &mut ChaCha8Rng, optimize: bool) -> Option<String> {
    let things = rng.gen_range(1..=4);
    let levels = if rng.gen_bool(0.7) { Some(rng.gen_range(1..=4)) } else { None };
    let level_is_int = rng.gen_bool(0.7);
    let mut pool = vec!["Color", "Pick", "Red", "Alarm", "likes"];
    pool.shuffle(rng);
    let count = rng.gen_range(1..=3);
    let unknown: Vec<&'static str> = pool.into_iter().take(count).collect();
    let plan = Plan {
        things,
        levels,
        level_is_int,
        unknown,
        weight: levels.is_some() && rng.gen_bool(0.4),
    };
    let p = &plan;

    let mut text = String::from("type: Types\nName | Type | Values\n");
    let elems: Vec<String> = (0..things).map(thing).collect();
    text += &format!("Thing | string | {}\n", elems.join(", "));
    if let Some(n) = levels {
        if level_is_int {
            text += &format!("Level | int | [0..{}]\n", n - 1);
        } else {
            let vals: Vec<String> = (0..n).map(|i| level_value(p, i)).collect();
            text += &format!("Level | string | {}\n", vals.join(", "));
        }
    }
    let res = |s: &str| match symbol_sort(p, s) {
        Sort::Level => "Level",
        _ => "Thing",
    };
    let mut funcs = Vec::new();
    let mut rels = Vec::new();
    let mut consts = Vec::new();
    let mut bools = Vec::new();
    for &s in &p.unknown {
        match s {
            "Color" => funcs.push(format!("Color of Thing | {}", res(s))),
            "Pick" => consts.push("Pick | Thing".to_string()),
            "Red" => rels.push("Thing is Red".to_string()),
            "likes" => rels.push("Thing likes Thing".to_string()),
            _ => bools.push("Alarm".to_string()),
        }
    }
    if p.weight {
        funcs.push(format!("Weight of Thing | {}", res("Weight")));
    }
    let numeric = levels.is_some() && level_is_int;
    let aggregate_allowed = optimize || rng.gen_bool(0.4);
    if aggregate_allowed {
        consts.push("Total | int".to_string());
    }
    if !funcs.is_empty() {
        text += &format!("\nfunction: Functions\nName | Type\n{}\n", funcs.join("\n"));
    }
    if !rels.is_empty() {
        text += &format!("\nrelation: Relations\nName\n{}\n", rels.join("\n"));
    }
    if !consts.is_empty() {
        text += &format!("\nconstant: Constants\nName | Type\n{}\n", consts.join("\n"));
    }
    if !bools.is_empty() {
        text += &format!("\nboolean: Booleans\nName\n{}\n", bools.join("\n"));
    }
    if p.weight {
        text += "\ndata: Weights\nThing || Weight of Thing\n";
        for e in &elems {
            text += &format!("{e} || {}\n", value_of(rng, p, symbol_sort(p, "Weight")));
        }
    }

    let tables = rng.gen_range(1..=3);
    let mut defined: Vec<&'static str> = Vec::new();
    let mut has_total = false;
    for t in 0..tables {
        let two_vars = rng.gen_bool(0.4);
        let cols = columns(p, two_vars);
        let intro = if two_vars { "Thing called x | Thing called y" } else { "Thing called x" };
        let intro_cells = if two_vars { 2 } else { 1 };
        let rows = rng.gen_range(1..=3);
        let kind = rng.gen_range(0..4);
        if kind == 0 && aggregate_allowed && !has_total {
            // aggregate into Total
            has_total = true;
            let policy = *["C+", "C#", "C<", "C>"].choose(rng).unwrap();
            let conds: Vec<&Column> = cols.iter().filter(|_| rng.gen_bool(0.5)).take(2).collect();
            let mut header = format!("{policy} | {intro}");
            for c in &conds {
                header += &format!(" | {}", c.header);
            }
            text += &format!("\ntable: Table {t}\n{header} || Total\n");
            for _ in 0..rows {
                let mut row = String::from("|");
                for _ in 0..intro_cells {
                    row += " - |";
                }
                for c in &conds {
                    row += &format!(" {} |", input_cell(rng, p, c.sort, two_vars));
                }
                let body = if policy == "C#" {
                    "1".to_string()
                } else if numeric && cols.iter().any(|c| c.header == "Color of x") && rng.gen_bool(0.6) {
                    ["Color of x", "Color of x + 1", "2 * Color of x"].choose(rng).unwrap().to_string()
                } else {
                    rng.gen_range(0..4).to_string()
                };
                text += &format!("{row}| {body}\n");
            }
            continue;
        }
        let decision = kind == 1 || kind == 2;
        let outputs: Vec<&Column> = if decision {
            cols.iter()
                .filter(|c| c.symbol != "Weight" && !defined.contains(&c.symbol))
                .take(1)
                .collect()
        } else {
            cols.iter().filter(|c| c.symbol != "Weight").take(1 + rng.gen_range(0..2)).collect()
        };
        if outputs.is_empty() {
            continue;
        }
        let inputs: Vec<&Column> = cols
            .iter()
            .filter(|c| outputs.iter().all(|o| o.symbol != c.symbol))
            .filter(|_| rng.gen_bool(0.6))
            .take(2)
            .collect();
        let policy = if decision { *["U", "A", "F"].choose(rng).unwrap() } else { "E*" };
        if decision {
            defined.push(outputs[0].symbol);
        }
        let mut header = format!("{policy} | {intro}");
        for c in &inputs {
            header += &format!(" | {}", c.header);
        }
        header += " ||";
        for (i, c) in outputs.iter().enumerate() {
            let default = if decision && rng.gen_bool(0.3) {
                format!(" default {}", value_of(rng, p, c.sort))
            } else {
                String::new()
            };
            header += &format!("{} {}{default}", if i == 0 { "" } else { " |" }, c.header);
        }
        text += &format!("\ntable: Table {t}\n{header}\n");
        for _ in 0..rows {
            let mut row = String::from("|");
            for _ in 0..intro_cells {
                row += " - |";
            }
            for c in &inputs {
                row += &format!(" {} |", input_cell(rng, p, c.sort, two_vars));
            }
            row += "|";
            for (i, c) in outputs.iter().enumerate() {
                let cell = if decision { value_of(rng, p, c.sort) } else { constraint_output(rng, p, c.sort) };
                row += &format!("{} {cell}", if i == 0 { "" } else { " |" });
            }
            text += &format!("{row}\n");
        }
    }

    if optimize {
        let objective = if has_total {
            "Total".to_string()
        } else if numeric && p.unknown.contains(&"Color") {
            "Color of T0".to_string()
        } else {
            return None;
        };
        let sense = if rng.gen_bool(0.5) { "minimize" } else { "maximize" };
        text += &format!("\nexecute\n{sense} {objective}\n");
    } else {
        text += "\nexecute\nget all models\n";
    }

    let model = cdmn::compile_str(&text).ok()?;
    if !model.diagnostics.is_empty() {
        return None;
    }
    // keep the oracle cheap
    brute_force_models(&model, 50_000.min(DEFAULT_ORACLE_LIMIT)).ok()?;
    Some(text)
}
