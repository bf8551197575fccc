//! Max-threshold and Dörfler marking on the same indicator field.

use dropletfem::amr::{mark_doerfler, mark_max, DoerflerAccounting};
use dropletfem::estimator::ErrorField;

fn main() {
    let eta = vec![0.02, 0.5, 0.04, 0.3, 0.06, 0.01, 0.2, 0.05];
    let err = ErrorField::from_indicators(eta.clone(), 0.0);
    println!("eta = {eta:?}");
    for lambda in [0.1, 0.3, 0.5] {
        println!("max-threshold lambda = {lambda}: {:?}", mark_max(&err, lambda).marked);
    }
    for theta in [0.5, 0.9, 0.99] {
        let sq = mark_doerfler(&err, theta, DoerflerAccounting::SumOfSquares).marked;
        let lin = mark_doerfler(&err, theta, DoerflerAccounting::Sum).marked;
        println!("doerfler theta = {theta}: squares {sq:?}, plain sum {lin:?}");
    }
}
