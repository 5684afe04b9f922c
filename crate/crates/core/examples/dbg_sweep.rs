use sphq::space::{OdeSweepPlan, phi_closed_d3, phi_mehler_d2, SpaceModel};

fn main() {
    let s3 = SpaceModel::new(3).unwrap();
    let plan = OdeSweepPlan::new(&s3, 21.0);
    let targets = [0.5001, 1.0, 2.0, 5.0, 10.0, 20.0];
    for lambda in [0.0f64, 0.5, 5.0, 40.0] {
        let got = plan.sweep(lambda, &targets);
        let worst = targets.iter().zip(&got)
            .map(|(t, g)| (g - phi_closed_d3(lambda, *t)).abs())
            .fold(0.0f64, f64::max);
        println!("d3 l={lambda}: worst {worst:.3e}");
    }
    let s2 = SpaceModel::new(2).unwrap();
    let plan2 = OdeSweepPlan::new(&s2, 21.0);
    for lambda in [0.0f64, 1.3, 12.0, 40.0] {
        let got = plan2.sweep(lambda, &targets);
        let worst = targets.iter().zip(&got)
            .map(|(t, g)| (g - phi_mehler_d2(lambda, *t).unwrap()).abs())
            .fold(0.0f64, f64::max);
        println!("d2 l={lambda}: worst {worst:.3e}");
    }
}
