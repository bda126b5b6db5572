//! Quadrature rules on tetrahedra in barycentric form; weights are fractions of the volume.

/// Symmetric 4-point rule, exact for quadratics.
pub const QUAD4: [([f64; 4], f64); 4] = {
    const A: f64 = 0.585_410_196_624_968_5;
    const B: f64 = 0.138_196_601_125_010_5;
    [
        ([A, B, B, B], 0.25),
        ([B, A, B, B], 0.25),
        ([B, B, A, B], 0.25),
        ([B, B, B, A], 0.25),
    ]
};

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Collapsed-cube product of 4-point Gauss–Legendre rules (64 points), exact
/// for polynomials of total degree 5.
pub fn conical_rule() -> Vec<([f64; 4], f64)> {
    let g: Vec<(f64, f64)> = GL4_NODES
        .iter()
        .zip(GL4_WEIGHTS)
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    let mut out = Vec::with_capacity(64);
    for &(xi, wa) in &g {
        for &(eta, wb) in &g {
            for &(zeta, wc) in &g {
                let x = xi;
                let y = (1.0 - xi) * eta;
                let z = (1.0 - xi) * (1.0 - eta) * zeta;
                let w = 6.0 * wa * wb * wc * (1.0 - xi).powi(2) * (1.0 - eta);
                out.push(([1.0 - x - y - z, x, y, z], w));
            }
        }
    }
    out
}
