//! Text artifacts rendered from an abstraction result. Every function returns
//! file contents; nothing here touches the filesystem.

use std::fmt::Write as _;

use csta::analysis::{Counterfactual, CounterfactualReview, EpisodeTrace, PosteriorSeries};
use csta::tensor::marginal_visitation;
use csta::{AbstractionResult, StateAbstraction, TransitionDataset, TreeNode};

use crate::model::{round12, state_label};

fn num(v: f64) -> String {
    round12(v).to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "null".to_string(), num)
}

/// Indented split tree: each split prints its two branch conditions, leaves
/// print the state id after a colon.
pub fn tree_text(abstraction: &StateAbstraction, names: &[String]) -> String {
    fn walk(a: &StateAbstraction, names: &[String], node: usize, depth: usize, out: &mut String) {
        match &a.tree().nodes[node] {
            TreeNode::Leaf { state } => {
                if depth == 0 {
                    writeln!(out, "anywhere: {}", state_label(a, *state)).unwrap();
                }
            }
            TreeNode::Split {
                dim,
                threshold,
                lower,
                upper,
            } => {
                for (child, op) in [(*lower, "<"), (*upper, "≥")] {
                    write!(out, "{}{} {op} {threshold}", "  ".repeat(depth), names[*dim]).unwrap();
                    match &a.tree().nodes[child] {
                        TreeNode::Leaf { state } => writeln!(out, ": {}", state_label(a, *state)).unwrap(),
                        TreeNode::Split { .. } => {
                            out.push('\n');
                            walk(a, names, child, depth + 1, out);
                        }
                    }
                }
            }
        }
    }
    let mut out = String::new();
    walk(abstraction, names, 0, 0, &mut out);
    if let Some(te) = abstraction.terminal_index() {
        writeln!(out, "terminal: {}", state_label(abstraction, te)).unwrap();
    }
    out
}

pub fn semantic_key_text(abstraction: &StateAbstraction, labels: &[String]) -> String {
    let mut out = String::new();
    for (x, label) in labels.iter().enumerate() {
        writeln!(out, "{}: {label}", state_label(abstraction, x)).unwrap();
    }
    if let Some(te) = abstraction.terminal_index() {
        writeln!(out, "{}: episode terminated", state_label(abstraction, te)).unwrap();
    }
    out
}

fn state_header(abstraction: &StateAbstraction, prefix: &str) -> String {
    (0..abstraction.size())
        .map(|x| format!("{prefix}{}", state_label(abstraction, x)))
        .collect::<Vec<_>>()
        .join(",")
}

/// Window-by-state marginal visitation `sum_x' J[w, x, x']`.
pub fn visitation_csv(result: &AbstractionResult) -> String {
    let mut out = format!("window,{}\n", state_header(&result.abstraction, "x"));
    for (w, row) in marginal_visitation(&result.joint).iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        writeln!(out, "{},{}", w + 1, cells.join(",")).unwrap();
    }
    out
}

/// Conditional outbound distribution of state `x` in every window; rows with
/// no observed transitions are `null`.
pub fn outbound_csv(result: &AbstractionResult, x: usize) -> String {
    let mut out = format!("window,{}\n", state_header(&result.abstraction, "to_"));
    for w in 0..result.n() {
        let cells: Vec<String> = if result.conditional.is_empty_row(w, x) {
            vec!["null".to_string(); result.abstraction.size()]
        } else {
            result.conditional.row(w, x).iter().map(|&v| num(v)).collect()
        };
        writeln!(out, "{},{}", w + 1, cells.join(",")).unwrap();
    }
    out
}

fn hex_alpha(fraction: f64) -> String {
    format!("{:02x}", (fraction.clamp(0.0, 1.0) * 255.0).round() as u8)
}

/// Transition graph of window `w`. Node width and fill opacity scale with
/// marginal visitation; edge width and opacity scale with joint probability.
/// Edges below `threshold` are omitted.
pub fn graph_dot(result: &AbstractionResult, w: usize, threshold: f64) -> String {
    let a = &result.abstraction;
    let visitation = &marginal_visitation(&result.joint)[w];
    let max_visit = visitation.iter().copied().fold(0.0, f64::max);
    let joint = result.joint.slice(w);
    let max_edge = joint.iter().copied().fold(0.0, f64::max);
    let id = |x: usize| format!("\"{}\"", state_label(a, x));

    let mut out = String::new();
    writeln!(out, "digraph window_{} {{", w + 1).unwrap();
    writeln!(out, "  node [shape=circle, style=filled, fixedsize=true];").unwrap();
    for (x, &v) in visitation.iter().enumerate() {
        let rel = if max_visit > 0.0 { v / max_visit } else { 0.0 };
        writeln!(
            out,
            "  {} [label={}, width={}, fillcolor=\"#1f77b4{}\", tooltip=\"visitation {}\"];",
            id(x),
            id(x),
            num(0.4 + 1.2 * rel.sqrt()),
            hex_alpha(0.15 + 0.85 * rel),
            num(v)
        )
        .unwrap();
    }
    let size = a.size();
    for x in 0..size {
        for y in 0..size {
            let p = joint[x * size + y];
            if p <= 0.0 || p < threshold {
                continue;
            }
            let rel = if max_edge > 0.0 { p / max_edge } else { 0.0 };
            writeln!(
                out,
                "  {} -> {} [label=\"{}\", penwidth={}, color=\"#000000{}\"];",
                id(x),
                id(y),
                num(p),
                num(0.5 + 4.5 * rel),
                hex_alpha(0.15 + 0.85 * rel)
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// Per-step log posterior for every window, then the same values relative to
/// the episode's true window. Eliminated entries are `null`.
pub fn posterior_csv(result: &AbstractionResult, trace: &EpisodeTrace, series: &PosteriorSeries) -> String {
    let n = result.n();
    let log_cols: Vec<String> = (1..=n).map(|w| format!("log_w{w}")).collect();
    let rel_cols: Vec<String> = (1..=n).map(|w| format!("rel_w{w}")).collect();
    let mut out = format!("t,state,true_window,{},{}\n", log_cols.join(","), rel_cols.join(","));
    for (t, &x) in trace.path.iter().enumerate() {
        let logs: Vec<String> = series.values.iter().map(|s| opt(s[t])).collect();
        let rels: Vec<String> = series.baseline.iter().map(|s| opt(s[t])).collect();
        writeln!(
            out,
            "{t},{},{},{},{}",
            state_label(&result.abstraction, x),
            series.true_window + 1,
            logs.join(","),
            rels.join(",")
        )
        .unwrap();
    }
    out
}

/// Ranked alternative successors with their normalised posterior over windows.
pub fn counterfactual_csv(result: &AbstractionResult, review: &CounterfactualReview) -> String {
    let n = result.n();
    let post_cols: Vec<String> = (1..=n).map(|w| format!("post_w{w}")).collect();
    let log_cols: Vec<String> = (1..=n).map(|w| format!("log_w{w}")).collect();
    let mut out = format!(
        "rank,from,successor,factual,distance,{},{}\n",
        post_cols.join(","),
        log_cols.join(",")
    );
    let a = &result.abstraction;
    for (rank, Counterfactual {
        successor,
        log_posterior,
        posterior,
        distance,
    }) in review.alternatives.iter().enumerate()
    {
        let post: Vec<String> = match posterior {
            Some(p) => p.iter().map(|&v| num(v)).collect(),
            None => vec!["null".to_string(); n],
        };
        let logs: Vec<String> = log_posterior.iter().map(|&v| opt(v)).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            rank + 1,
            state_label(a, review.from),
            state_label(a, *successor),
            *successor == review.factual,
            num(*distance),
            post.join(","),
            logs.join(",")
        )
        .unwrap();
    }
    out
}

/// Abstract path of the prototype episode with the raw coordinates of each step.
pub fn prototype_csv(
    result: &AbstractionResult,
    dataset: &TransitionDataset,
    episode_id: usize,
    trace: &EpisodeTrace,
    score: Option<f64>,
) -> String {
    let dim = dataset.dim();
    let coord_cols: Vec<String> = (1..=dim).map(|d| format!("s_{d}")).collect();
    let mut out = format!("episode,chain,score,t,state,{}\n", coord_cols.join(","));
    let records = dataset.records();
    let ep = &dataset.episodes()[episode_id];
    let mut coords: Vec<Option<&[f64]>> = ep.records.iter().map(|&r| Some(records[r].state.as_slice())).collect();
    if let Some(&last) = ep.records.last() {
        coords.push(records[last].successor.state());
    }
    for (t, (&x, c)) in trace.path.iter().zip(coords).enumerate() {
        let cells: Vec<String> = match c {
            Some(c) => c.iter().map(|v| v.to_string()).collect(),
            None => vec![String::new(); dim],
        };
        writeln!(
            out,
            "{},{},{},{t},{},{}",
            episode_id + 1,
            trace.chain,
            opt(score),
            state_label(&result.abstraction, x),
            cells.join(",")
        )
        .unwrap();
    }
    out
}
