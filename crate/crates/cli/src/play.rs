//! Terminal game: the strategy asks, the user answers on stdin.

use std::io::{self, BufRead, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use ulam_core::{Answer, GameState, Question, StrategyPlan};

/// Questions whose real members fit in this many are spelled out.
const LIST_LIMIT: usize = 32;

fn prompt(question: &Question, state: &GameState) -> String {
    let n = state.real_size();
    let members = match question {
        Question::Bit(_) if state.padded_size() > 64 => None,
        _ => Some(question.members(state.max_id())),
    };
    let mut text = match question {
        Question::Bit(bit) => format!("Is bit {bit} of (your number - 1) set?"),
        _ => "Is your number in this set?".to_string(),
    };
    if let Some(members) = members {
        let real: Vec<String> = members
            .iter()
            .filter(|&&id| id <= n)
            .map(u64::to_string)
            .collect();
        let tokens = members.len() - real.len();
        if real.len() <= LIST_LIMIT {
            let shown = if real.is_empty() {
                "none".to_string()
            } else {
                real.join(", ")
            };
            text.push_str(&format!(" [{shown}]"));
        }
        if tokens > 0 && !matches!(question, Question::Bit(_)) {
            text.push_str(&format!(" (plus {tokens} bookkeeping tokens)"));
        }
    }
    text
}

fn read_answer(lines: &mut impl Iterator<Item = io::Result<String>>) -> Result<Answer> {
    loop {
        print!("> ");
        io::stdout().flush()?;
        let Some(line) = lines.next() else {
            bail!("input ended before the game did")
        };
        match line?.trim().to_ascii_lowercase().as_str() {
            "y" | "yes" => return Ok(Answer::Yes),
            "n" | "no" => return Ok(Answer::No),
            "q" | "quit" => bail!("quit"),
            _ => println!("please answer y or n (q quits)"),
        }
    }
}

pub fn run(n: u64, transcript: Option<&Path>) -> Result<bool> {
    let mut plan = StrategyPlan::new(n)?;
    let mut state = plan.initial_state();
    println!(
        "Think of a number from 1 to {n}. Answer y or n; you may lie once. I need at most {} questions.",
        plan.q
    );
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    while state.real_live() > 0 {
        let Some((question, tag)) = plan.next_question(&mut state)? else {
            break;
        };
        println!(
            "Question {} of {}: {}",
            state.asked() + 1,
            plan.q,
            prompt(&question, &state)
        );
        let answer = read_answer(&mut lines)?;
        state.apply_answer_noted(&question, answer, Some(tag.to_string()))?;
        plan.on_answer(&state, answer)?;
        let s = state.summary();
        println!(
            "  consistent={} one-lie={} weight={}",
            s.a,
            s.b,
            s.weight()?
        );
    }
    let found = match state.identified() {
        Ok(Some(x)) => {
            println!("Your number is {x}. ({} questions)", state.asked());
            true
        }
        _ => {
            println!("No number from 1 to {n} fits these answers with at most one lie.");
            false
        }
    };
    if let Some(path) = transcript {
        std::fs::write(path, state.transcript().to_string())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(found)
}
