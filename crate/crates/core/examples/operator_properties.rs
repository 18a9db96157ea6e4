//! Shift, contraction and monotonicity of the optimistic operator on random agent states.

use focus_lab::cli::verify::operator_property_suite;

fn main() {
    let report = operator_property_suite(1000, 42);
    print!("{report}");
}
