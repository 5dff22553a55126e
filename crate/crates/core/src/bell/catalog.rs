//! Named inequalities, all in `>= 0` form.

use super::{parse_symmetric, BellInequality, Scenario};

pub const F1: &str = "8 +(110) -(210) +(211) +(220) +(222) -2(331) -2(332)";
pub const F2: &str = "9 +(110) +2(220) -2(221) -(300) -(310) +(311) -2(322)";
pub const F3: &str = "9 -(210) +(211) +(220) +3(222) -(300) -(310) +(311) -2(322)";

fn scenario(n: usize, i: usize) -> Scenario {
    Scenario::new(n, i).expect("valid scenario")
}

/// `2 - <A1B1> - <A1B2> - <A2B1> + <A2B2> >= 0`.
pub fn chsh() -> BellInequality {
    BellInequality::from_terms(scenario(2, 2), 2, &[(&[1, 1], -1), (&[1, 2], -1), (&[2, 1], -1), (&[2, 2], 1)])
        .expect("valid coefficients")
}

/// `4 - [<A1> - <A2> + <B1> - <B2> - <(A1 - A2)(B1 - B2)> + <(A1 + A2)B3> + <A3(B1 + B2)>] >= 0`.
pub fn i3322() -> BellInequality {
    let lhs: [(&[usize], i64); 12] = [
        (&[1, 0], 1),
        (&[2, 0], -1),
        (&[0, 1], 1),
        (&[0, 2], -1),
        (&[1, 1], -1),
        (&[1, 2], 1),
        (&[2, 1], 1),
        (&[2, 2], -1),
        (&[1, 3], 1),
        (&[2, 3], 1),
        (&[3, 1], 1),
        (&[3, 2], 1),
    ];
    let terms: Vec<(&[usize], i64)> = lhs.iter().map(|&(m, c)| (m, -c)).collect();
    BellInequality::from_terms(scenario(2, 3), 4, &terms).expect("valid coefficients")
}

/// `2 - <A1B1C2> - <A1B2C1> - <A2B1C1> + <A2B2C2> >= 0`.
pub fn mermin() -> BellInequality {
    BellInequality::from_terms(
        scenario(3, 2),
        2,
        &[(&[1, 1, 2], -1), (&[1, 2, 1], -1), (&[2, 1, 1], -1), (&[2, 2, 2], 1)],
    )
    .expect("valid coefficients")
}

pub fn f1() -> BellInequality {
    parse_symmetric(F1, &scenario(3, 3)).expect("valid notation")
}

pub fn f2() -> BellInequality {
    parse_symmetric(F2, &scenario(3, 3)).expect("valid notation")
}

pub fn f3() -> BellInequality {
    parse_symmetric(F3, &scenario(3, 3)).expect("valid notation")
}
