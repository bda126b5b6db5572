//! Second-order jets: a scalar together with its exact gradient and Hessian
//! in three variables. Used to derive strong-form loads of smooth fields.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, ..Default::default() }
    }

    /// The coordinate `x_i` at the point `x`.
    pub fn var(x: [f64; 3], i: usize) -> Self {
        let mut d = [0.0; 3];
        d[i] = 1.0;
        Jet { v: x[i], d, h: [[0.0; 3]; 3] }
    }

    pub fn point(x: [f64; 3]) -> [Jet; 3] {
        [Jet::var(x, 0), Jet::var(x, 1), Jet::var(x, 2)]
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet::constant(f0);
        for i in 0..3 {
            out.d[i] = f1 * self.d[i];
            for j in 0..3 {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.d[i] * self.d[j];
            }
        }
        out
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut r = self;
        r.v += o.v;
        for i in 0..3 {
            r.d[i] += o.d[i];
            for j in 0..3 {
                r.h[i][j] += o.h[i][j];
            }
        }
        r
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut r = Jet::constant(self.v * o.v);
        for i in 0..3 {
            r.d[i] = self.d[i] * o.v + self.v * o.d[i];
            for j in 0..3 {
                r.h[i][j] = self.h[i][j] * o.v
                    + self.d[i] * o.d[j]
                    + o.d[i] * self.d[j]
                    + self.v * o.h[i][j];
            }
        }
        r
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        let mut r = self;
        r.v *= s;
        for i in 0..3 {
            r.d[i] *= s;
            for j in 0..3 {
                r.h[i][j] *= s;
            }
        }
        r
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        let mut r = self;
        r.v += s;
        r
    }
}
