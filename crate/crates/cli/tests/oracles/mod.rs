pub mod phi;
pub mod script;

/// Fingerprint of an independent numpy transliteration of the gray1d RK4
/// script: 512 modes, dt = 0.2, 1000 steps. Pairs are (quantity, value).
pub const NUMPY_FINGERPRINT: [(&str, f64); 7] = [
    ("min u", 0.025863014721321298),
    ("max v", 2.9400894649916953),
    ("sum u", 390.03872277300366),
    ("sum v", 127.1836647126265),
    ("u[100]", 0.9987611541996997),
    ("v[300]", 2.052048177435478),
    ("v[256]", 0.31862931274444817),
];

pub fn fingerprint(u: &[f64], v: &[f64]) -> [f64; 7] {
    [
        u.iter().cloned().fold(f64::INFINITY, f64::min),
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        u.iter().sum(),
        v.iter().sum(),
        u[100],
        v[300],
        v[256],
    ]
}
