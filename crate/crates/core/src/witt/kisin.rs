//! Symbolic Breuil–Kisin multipliers and their reduction mod u.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Unit factors that specialize to 1 at u = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnitToken {
    #[serde(rename = "E/E(0)")]
    EOverE0,
    #[serde(rename = "E_0/E_0(0)")]
    E0Ratio,
    #[serde(rename = "E_{d/2}/E_{d/2}(0)")]
    EHalfRatio,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BkComponent {
    pub index: u32,
    pub p_power: i32,
    pub pi_power: i32,
    pub units: Vec<(UnitToken, i32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BkSymbolic {
    pub d: u32,
    pub components: Vec<BkComponent>,
}

/// β̃_0 = p(E/E(0))(πE_0/E_0(0)), β̃_{d/2} = p(E/E(0))(πE_{d/2}/E_{d/2}(0))^{-1},
/// β̃_i = pE/E(0) otherwise.
pub fn bk_symbolic(d: u32) -> Result<BkSymbolic> {
    if d == 0 || d % 2 != 0 {
        return invalid(format!("residue degree d = {d} must be even and positive"));
    }
    let components = (0..d)
        .map(|i| {
            let mut units = vec![(UnitToken::EOverE0, 1)];
            let pi_power = if i == 0 {
                units.push((UnitToken::E0Ratio, 1));
                1
            } else if i == d / 2 {
                units.push((UnitToken::EHalfRatio, -1));
                -1
            } else {
                0
            };
            BkComponent { index: i, p_power: 1, pi_power, units }
        })
        .collect();
    Ok(BkSymbolic { d, components })
}

/// Sets u = 0 (every unit token becomes 1) and applies the index shift
/// i ↦ i + 1 from φ*. Returns (p-exponent, π-exponent) per component.
pub fn specialize_mod_u(bk: &BkSymbolic) -> Vec<(i32, i32)> {
    let d = bk.d as usize;
    let mut out = vec![(0, 0); d];
    for c in &bk.components {
        out[(c.index as usize + 1) % d] = (c.p_power, c.pi_power);
    }
    out
}
