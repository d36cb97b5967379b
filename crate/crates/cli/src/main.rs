//! Command line front end: decide energy Büchi problems for weighted
//! Büchi automata and one-clock weighted timed Büchi automata.
//!
//! Exit codes are the machine contract: 0 feasible, 1 infeasible, 2 on
//! any parse, validation or guard failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use energy_buchi::automaton::{accumulate, EnergyConfig, Lasso, WeightedBuchiAutomaton};
use energy_buchi::decide::{buchi_energy, Decision};
use energy_buchi::degeneralize::degeneralize_full;
use energy_buchi::energy::{find_max_e, EnergyGraph};
use energy_buchi::format::{emit_wba, parse_wba, parse_wtba};
use energy_buchi::oracle::brute_force;
use energy_buchi::timed::{bound_clocks, check_timed, corner_point_abstraction};

const EXIT_FEASIBLE: u8 = 0;
const EXIT_INFEASIBLE: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "energy-buchi", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EnergyArgs {
    /// Initial credit c.
    #[arg(long)]
    credit: u32,
    /// Weak upper bound b.
    #[arg(long)]
    bound: u32,
}

impl EnergyArgs {
    fn config(&self) -> EnergyConfig {
        EnergyConfig::new(self.credit, self.bound)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide the energy Büchi problem for a weighted Büchi automaton.
    Check {
        /// Automaton document.
        input: PathBuf,
        #[command(flatten)]
        energy: EnergyArgs,
        /// Print the witness lasso and its energy trace.
        #[arg(long)]
        witness: bool,
    },
    /// Decide the problem for a one-clock weighted timed Büchi automaton.
    CheckTimed {
        input: PathBuf,
        #[command(flatten)]
        energy: EnergyArgs,
        /// Print the witness lasso over the abstraction.
        #[arg(long)]
        witness: bool,
        /// Drop the non-Zenoness requirement from the acceptance condition.
        #[arg(long)]
        allow_zeno: bool,
    },
    /// Write the corner-point abstraction of a timed automaton.
    Cpa {
        input: PathBuf,
        /// Output automaton document.
        #[arg(short, long)]
        output: PathBuf,
        /// Abstract the automaton as-is instead of bounding its clock first.
        #[arg(long)]
        no_bound_clocks: bool,
    },
    /// Fold all colors of an automaton into one by the counting construction.
    Degeneralize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the maximal attainable energy of every state.
    Maxenergy {
        input: PathBuf,
        #[command(flatten)]
        energy: EnergyArgs,
    },
    /// Decide by exhaustive search (small instances only).
    Oracle {
        input: PathBuf,
        #[command(flatten)]
        energy: EnergyArgs,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check {
            input,
            energy,
            witness,
        } => {
            let automaton = load_wba(&input)?;
            let decision = buchi_energy(&automaton, energy.config()).map_err(|e| e.to_string())?;
            report_decision(&automaton, energy.config(), &decision, witness);
            Ok(verdict_code(decision.feasible))
        }
        Command::CheckTimed {
            input,
            energy,
            witness,
            allow_zeno,
        } => {
            let timed = load_wtba(&input)?;
            let decision =
                check_timed(&timed, energy.config(), allow_zeno).map_err(|e| e.to_string())?;
            println!(
                "{}",
                if decision.feasible {
                    "feasible"
                } else {
                    "infeasible"
                }
            );
            if witness {
                // Witness ids refer to the abstraction the decision ran on.
                let cpa =
                    corner_point_abstraction(&bound_clocks(&timed)).map_err(|e| e.to_string())?;
                match &decision.witness {
                    Some(lasso) => print_witness(&cpa.automaton, energy.config(), lasso),
                    None => println!("no witness"),
                }
            }
            if decision.infimum_caveat {
                println!(
                    "note: strict clock constraints present; a positive verdict holds for \
                     every initial credit strictly above {}",
                    energy.credit
                );
            }
            Ok(verdict_code(decision.feasible))
        }
        Command::Cpa {
            input,
            output,
            no_bound_clocks,
        } => {
            let timed = load_wtba(&input)?;
            let prepared = if no_bound_clocks {
                timed
            } else {
                bound_clocks(&timed)
            };
            let cpa = corner_point_abstraction(&prepared).map_err(|e| e.to_string())?;
            write_output(&output, &emit_wba(&cpa.automaton))?;
            println!(
                "wrote abstraction with {} states and {} transitions",
                cpa.automaton.state_count,
                cpa.automaton.transitions.len()
            );
            Ok(ExitCode::from(EXIT_FEASIBLE))
        }
        Command::Degeneralize { input, output } => {
            let automaton = load_wba(&input)?;
            if automaton.color_count == 0 {
                return Err("degeneralization needs at least one color".into());
            }
            let folded = degeneralize_full(&automaton);
            write_output(&output, &emit_wba(&folded))?;
            println!(
                "wrote automaton with {} states over one color",
                folded.state_count
            );
            Ok(ExitCode::from(EXIT_FEASIBLE))
        }
        Command::Maxenergy { input, energy } => {
            let automaton = load_wba(&input)?;
            automaton.validate().map_err(|e| e.to_string())?;
            let result = find_max_e(
                &EnergyGraph::of_automaton(&automaton),
                automaton.initial,
                energy.config(),
            );
            println!("state\tenergy");
            for state in 0..automaton.state_count {
                match result.energy.get(state) {
                    Some(e) => println!("{state}\t{e}"),
                    None => println!("{state}\t-inf"),
                }
            }
            Ok(ExitCode::from(EXIT_FEASIBLE))
        }
        Command::Oracle { input, energy } => {
            let automaton = load_wba(&input)?;
            automaton.validate().map_err(|e| e.to_string())?;
            let feasible = brute_force(&automaton, energy.config()).map_err(|e| e.to_string())?;
            println!("{}", if feasible { "feasible" } else { "infeasible" });
            Ok(verdict_code(feasible))
        }
    }
}

fn verdict_code(feasible: bool) -> ExitCode {
    ExitCode::from(if feasible {
        EXIT_FEASIBLE
    } else {
        EXIT_INFEASIBLE
    })
}

fn load_wba(path: &Path) -> Result<WeightedBuchiAutomaton, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_wba(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_wtba(path: &Path) -> Result<energy_buchi::timed::TimedAutomaton, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_wtba(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), String> {
    fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn report_decision(
    automaton: &WeightedBuchiAutomaton,
    cfg: EnergyConfig,
    decision: &Decision,
    witness: bool,
) {
    println!(
        "{}",
        if decision.feasible {
            "feasible"
        } else {
            "infeasible"
        }
    );
    if !witness {
        return;
    }
    match &decision.witness {
        Some(lasso) => print_witness(automaton, cfg, lasso),
        None => println!("no witness"),
    }
}

/// Transition-id lists of the lasso plus the accumulated energies along
/// prefix and one cycle lap.
fn print_witness(automaton: &WeightedBuchiAutomaton, cfg: EnergyConfig, lasso: &Lasso) {
    let ids = |run: &[usize]| {
        run.iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("prefix: {}", ids(&lasso.prefix.0));
    println!("cycle: {}", ids(&lasso.cycle.0));
    let trace = accumulate(&lasso.weights_with_laps(automaton, 1), cfg);
    println!(
        "energies: {}",
        trace
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
}
