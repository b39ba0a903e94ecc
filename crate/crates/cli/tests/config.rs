use clap::Parser;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use qgeom_cli::config::{random_q, Cli, Command, QMode, RunConfig, Suite};

fn parse(args: &[&str]) -> Result<RunConfig, String> {
    let mut full = vec!["verify"];
    full.extend_from_slice(args);
    let cli = Cli::try_parse_from(full).map_err(|e| e.to_string())?;
    let Command::Derham(a) = cli.command else {
        panic!("expected derham");
    };
    RunConfig::from_args(Suite::Derham, &a).map_err(|e| e.to_string())
}

#[test]
fn defaults() {
    let cfg = parse(&["derham"]).unwrap();
    assert_eq!(cfg.q, QMode::Symbolic);
    assert_eq!((cfg.degree, cfg.spin_cutoff, cfg.n), (5, 3, 2));
    assert!(cfg.c.is_one() && cfg.hbar.is_zero());
}

#[test]
fn spin_cutoff_bound() {
    assert!(parse(&["derham", "--degree", "4", "--spin-cutoff", "3"]).is_ok());
    assert!(parse(&["derham", "--degree", "4", "--spin-cutoff", "4"]).is_err());
}

#[test]
fn excluded_q() {
    for q in ["0", "1", "-1", "2/2", "-3/3", "0/5"] {
        assert!(parse(&["derham", "--q", q]).is_err(), "{q}");
    }
    assert!(parse(&["derham", "--q", "-2/3"]).is_ok());
}

#[test]
fn random_mode_echoes_seed() {
    let cfg = parse(&["derham", "--q", "random", "--seed", "7"]).unwrap();
    assert_eq!(cfg.q, QMode::Random { seed: 7, value: random_q(7) });
    assert_eq!(cfg.echo()["seed"], 7);
    assert_eq!(cfg.echo()["q"], random_q(7).to_string());
}

proptest! {
    #[test]
    fn random_q_is_admissible(seed in any::<u64>()) {
        let q = random_q(seed);
        prop_assert!(!q.is_zero() && !q.abs().is_one());
        prop_assert_eq!(q.clone(), random_q(seed));
        // p/r with p, r in [2, 97] before reduction
        let (p, r) = (q.numer().clone(), q.denom().clone());
        prop_assert!(p > 0.into() && r > 0.into() && p <= 97.into() && r <= 97.into());
    }
}
