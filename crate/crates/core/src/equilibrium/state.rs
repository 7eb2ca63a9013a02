use serde::{Deserialize, Serialize};

macro_rules! economy_state {
    ($($(#[$doc:meta])* $field:ident => $label:literal),* $(,)?) => {
        /// One period's endogenous variables.
        #[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
        pub struct EconomyState {
            $($(#[$doc])* pub $field: f64,)*
        }

        impl EconomyState {
            /// Column labels in storage order.
            pub const NAMES: &'static [&'static str] = &[$($label),*];
            pub const LEN: usize = Self::NAMES.len();

            pub fn to_vec(&self) -> Vec<f64> {
                vec![$(self.$field),*]
            }

            /// Inverse of [`EconomyState::to_vec`]. Panics on a short slice.
            pub fn from_slice(v: &[f64]) -> Self {
                let mut it = v.iter().copied();
                Self { $($field: it.next().expect("state slice too short"),)* }
            }

            /// Value by column label.
            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $($label => Some(self.$field),)*
                    _ => None,
                }
            }
        }
    };
}

economy_state! {
    c => "C",
    /// Money balance.
    m => "M",
    /// Mortgage principal.
    b => "B",
    n_h => "n_h",
    n_f => "n_f",
    y_h => "Y_h",
    y_f => "Y_f",
    p_h => "P_h",
    p_f => "P_f",
    k_h => "K_h",
    k_f => "K_f",
    l_h => "L_h",
    l_f => "L_f",
    i => "I",
    /// Public investment flow.
    g => "G",
    /// Hicks-neutral externality multiplier.
    phi => "Phi",
    w_h => "W_h",
    w_f => "W_f",
    pl_h => "PL_h",
    pl_f => "PL_f",
    r => "R",
    omega_h => "omega_h",
    omega_g => "omega_G",
    lambda => "lambda",
    gamma => "gamma",
    /// Labour-constraint multiplier.
    nu => "nu",
    deficit => "deficit",
    /// Depreciated stock of past public investment.
    g_cum => "G_cum",
}

impl EconomyState {
    pub fn gdp(&self) -> f64 {
        self.y_h + self.y_f
    }

    /// Market value of sector h output.
    pub fn value_h(&self) -> f64 {
        self.p_h * self.y_h
    }

    pub fn value_f(&self) -> f64 {
        self.p_f * self.y_f
    }

    pub fn capital(&self) -> f64 {
        self.k_h + self.k_f
    }

    pub fn wage_bill(&self) -> f64 {
        self.w_h * self.n_h + self.w_f * self.n_f
    }

    pub fn land_value(&self) -> f64 {
        self.pl_h * self.l_h + self.pl_f * self.l_f
    }

    /// Value by column label, also accepting derived series (`GDP`, `V_h`, `V_f`, `K`).
    pub fn series(&self, name: &str) -> Option<f64> {
        match name {
            "GDP" => Some(self.gdp()),
            "V_h" => Some(self.value_h()),
            "V_f" => Some(self.value_f()),
            "K" => Some(self.capital()),
            other => self.get(other),
        }
    }
}
