//! Quick tour of the public surface: simulate one coupled path, inspect
//! the martingale coefficients, and run a named verification suite.

use rwalk::verify::{run_suite, SuiteOptions, SUITE_NAMES};
use rwalk::walks::{build_coefficients, simulate_coupled, ReinforcementParams, StepLaw};

fn main() -> rwalk::Result<()> {
    // One coupled path: plain, reinforced, and counterbalanced walks share
    // the same step stream.
    let params = ReinforcementParams::new(0.3, StepLaw::Rademacher, 1000, 42).with_aux();
    let path = simulate_coupled(&params)?;
    println!(
        "n = {}: S = {}, S_hat = {}, S_check = {}",
        path.n,
        path.s[path.n],
        path.s_hat[path.n],
        path.s_check[path.n],
    );

    // Coefficient tables normalize the walks into martingales.
    let coeffs = build_coefficients(0.3, 10)?;
    println!("a_hat[1..=3] = {:?}", &coeffs.a_hat_slice()[..3]);
    println!("a_check[1..=3] = {:?}", &coeffs.a_check_slice()?[..3]);

    // Named suites bundle the statistical checks; a small budget keeps the
    // demo fast while the defaults reproduce the full gate.
    println!("available suites: {}", SUITE_NAMES.join(", "));
    let options = SuiteOptions { seed: Some(7), n_paths: Some(500) };
    let report = run_suite("reinforced-variance", &options)?;
    println!("{}", report.to_json());
    println!("suite passed: {}", report.passed());

    // Errors are ordinary values with readable messages.
    let bad = ReinforcementParams::new(1.5, StepLaw::Rademacher, 10, 0);
    if let Err(err) = simulate_coupled(&bad) {
        println!("rejected p = 1.5: {err}");
    }
    if let Err(err) = run_suite("no-such-suite", &SuiteOptions::default()) {
        println!("rejected suite: {err}");
    }
    Ok(())
}
