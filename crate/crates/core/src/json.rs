//! JSON number formatting: floats are written rounded to 12 significant digits.

/// Rounds to 12 significant digits; non-finite values pass through.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub mod sig12 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::round12(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }
}

pub mod sig12_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(|&x| super::round12(x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<f64>::deserialize(d)
    }
}

pub mod sig12_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        x.map(super::round12).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<f64>::deserialize(d)
    }
}

/// Complex numbers as `{"re": …, "im": …}`.
pub mod complex12 {
    use num_complex::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wire {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &Complex<f64>, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            re: super::round12(z.re),
            im: super::round12(z.im),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex<f64>, D::Error> {
        let w = Wire::deserialize(d)?;
        Ok(Complex::new(w.re, w.im))
    }
}

#[cfg(test)]
mod tests {
    use super::round12;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round12(0.811_278_124_459_132_8), 0.811_278_124_459);
        assert_eq!(round12(1.0), 1.0);
        assert_eq!(round12(-2.5e-13), -2.5e-13);
    }
}
