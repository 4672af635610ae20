//! Cross-checks the noise stack against a second, straight-line
//! implementation written independently of the library internals.

use voidfill_core::masks::{fbm_raw, perlin_noise, Pcg32, PerlinParams};

/// Reference PCG32 (XSH-RR output, stream derived from the seed).
struct RefRng {
    state: u64,
    inc: u64,
}

impl RefRng {
    fn new(seed: u64) -> RefRng {
        let inc = (seed << 1) | 1;
        let mut r = RefRng { state: 0, inc };
        r.next();
        r.state = r.state.wrapping_add(seed);
        r.next();
        r
    }

    fn next(&mut self) -> u32 {
        let old = self.state;
        self.state = old
            .wrapping_mul(6364136223846793005)
            .wrapping_add(self.inc);
        let xorshifted = (((old >> 18) ^ old) >> 27) as u32;
        let rot = (old >> 59) as u32;
        xorshifted.rotate_right(rot)
    }

    fn below(&mut self, n: usize) -> usize {
        self.next() as usize % n
    }
}

fn ref_perm(base: u64) -> [u8; 256] {
    let mut perm = [0u8; 256];
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i as u8;
    }
    let mut rng = RefRng::new(base);
    let mut i = 255usize;
    while i >= 1 {
        let j = rng.below(i + 1);
        perm.swap(i, j);
        i -= 1;
    }
    perm
}

fn ref_grad(perm: &[u8; 256], xi: i64, yi: i64) -> (f64, f64) {
    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;
    let table = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (S, S),
        (-S, S),
        (S, -S),
        (-S, -S),
    ];
    let xw = xi.rem_euclid(256) as usize;
    let yw = yi.rem_euclid(256) as usize;
    let h = perm[(perm[xw] as usize + yw) % 256];
    table[(h % 8) as usize]
}

fn ref_perlin(perm: &[u8; 256], x: f64, y: f64) -> f64 {
    let xi = x.floor() as i64;
    let yi = y.floor() as i64;
    let xf = x - x.floor();
    let yf = y - y.floor();
    let fade = |t: f64| t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
    let dot = |gx: f64, gy: f64, dx: f64, dy: f64| gx * dx + gy * dy;
    let (g00x, g00y) = ref_grad(perm, xi, yi);
    let (g10x, g10y) = ref_grad(perm, xi + 1, yi);
    let (g01x, g01y) = ref_grad(perm, xi, yi + 1);
    let (g11x, g11y) = ref_grad(perm, xi + 1, yi + 1);
    let d00 = dot(g00x, g00y, xf, yf);
    let d10 = dot(g10x, g10y, xf - 1.0, yf);
    let d01 = dot(g01x, g01y, xf, yf - 1.0);
    let d11 = dot(g11x, g11y, xf - 1.0, yf - 1.0);
    let (u, v) = (fade(xf), fade(yf));
    let a = d00 + u * (d10 - d00);
    let b = d01 + u * (d11 - d01);
    a + v * (b - a)
}

fn ref_fbm(size: usize, p: &PerlinParams) -> Vec<f64> {
    let perm = ref_perm(p.base);
    let mut out = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..size {
            let mut acc = 0.0;
            for k in 0..p.octaves {
                let freq = p.lacunarity.powi(k as i32) / p.scale;
                let amp = p.persistence.powi(k as i32);
                acc += amp * ref_perlin(&perm, i as f64 * freq, j as f64 * freq);
            }
            out[i * size + j] = acc;
        }
    }
    out
}

#[test]
fn pcg32_matches_reference() {
    for seed in [0u64, 1, 42, u64::MAX] {
        let mut a = Pcg32::new(seed);
        let mut b = RefRng::new(seed);
        for _ in 0..64 {
            assert_eq!(a.next_u32(), b.next());
        }
    }
}

#[test]
fn fbm_matches_reference_implementation() {
    let cases = [
        PerlinParams {
            scale: 48.0,
            octaves: 4,
            persistence: 0.5,
            lacunarity: 2.0,
            base: 0,
            threshold: None,
        },
        PerlinParams {
            scale: 17.5,
            octaves: 1,
            persistence: 0.7,
            lacunarity: 1.9,
            base: 12345,
            threshold: None,
        },
        PerlinParams {
            scale: 96.0,
            octaves: 3,
            persistence: 0.45,
            lacunarity: 2.2,
            base: u64::MAX,
            threshold: None,
        },
    ];
    for p in &cases {
        let got = fbm_raw(64, p);
        let want = ref_fbm(64, p);
        for (a, b) in got.values.iter().zip(&want) {
            // powi vs running product: allow tiny accumulation slack.
            assert!((a - b).abs() <= 1e-12, "{a} vs {b} for base {}", p.base);
        }
    }
}

#[test]
fn normalized_noise_spans_unit_interval() {
    let p = PerlinParams::default();
    let (g, degenerate) = perlin_noise(128, &p).unwrap();
    assert!(!degenerate);
    let min = g.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = g.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(min, 0.0);
    assert_eq!(max, 1.0);
}
