//! Error-free transformations and a compensated dot-product accumulator.

/// `a + b = s + e` exactly.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// `a * b = p + e` exactly.
#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub fn new(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::renorm(s, e + self.lo + o.lo)
    }

    pub fn add_f64(self, x: f64) -> Dd {
        let (s, e) = two_sum(self.hi, x);
        Dd::renorm(s, e + self.lo)
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(Dd { hi: -o.hi, lo: -o.lo })
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Sum of products accumulated in roughly twice the working precision.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Dot2 {
    s: f64,
    c: f64,
}

impl Dot2 {
    #[inline]
    pub fn add_prod(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        let (s, q) = two_sum(self.s, p);
        self.s = s;
        self.c += q + e;
    }

    #[inline]
    pub fn add(&mut self, a: f64) {
        let (s, q) = two_sum(self.s, a);
        self.s = s;
        self.c += q;
    }

    pub fn value(self) -> f64 {
        self.s + self.c
    }
}
