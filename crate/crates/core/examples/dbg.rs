use minsurf::convex_integration::*;
use minsurf::numerics::C64;

fn main() {
    let n = 129;
    let f_of = |t: f64| -> [C64; 2] {
        let th = std::f64::consts::PI * t;
        [C64::new(th.cos(), 0.0), C64::new(th.sin(), 0.0)]
    };
    let mut f0 = ArcPath::<2> {
        samples: vec![[C64::new(0.0, 0.0); 2]; n],
        derivs: vec![[C64::new(0.0, 0.0); 2]; n],
    };
    for k in 0..n {
        f0.samples[k] = f_of(k as f64 / (n - 1) as f64);
    }
    let w = 0.1;
    let ss = |x: f64| -> f64 {
        let b = |y: f64| if y <= 0.0 { 0.0 } else { (-1.0f64 / y).exp() };
        b(x) / (b(x) + b(1.0 - x))
    };
    let deriv = move |t: f64| -> [C64; 2] {
        let fa = f_of(0.0);
        let fb = f_of(1.0);
        let sa = ss(1.0 - t / w);
        let sb = ss(1.0 - (1.0 - t) / w);
        [fa[0] * sa + fb[0] * sb, fa[1] * sa + fb[1] * sb]
    };
    let mut big = ArcPath::<2> {
        samples: vec![[C64::new(0.0, 0.0); 2]; n],
        derivs: vec![[C64::new(0.0, 0.0); 2]; n],
    };
    for c in 0..2 {
        let cum = minsurf::numerics::quad::gauss_cumulative(&|t| deriv(t)[c], n, 1.0);
        for k in 0..n {
            big.samples[k][c] = cum[k];
        }
    }
    for k in 0..n {
        big.derivs[k] = deriv(k as f64 / (n - 1) as f64);
    }
    let q = QuadricConstraint { c: vec![C64::new(1.0, 0.0); n] };
    match ci_quadric_path(&f0, &big, &q, 1e-1, &CiOptions::default()) {
        Ok((out, rep)) => {
            println!("ok sup={:.3e} periods={}", rep.sup_deviation, rep.periods);
            for k in (0..out.len()).step_by(out.len() / 16) {
                let t = k as f64 / (out.len() - 1) as f64;
                let b0 = big.value(t);
                let d = ((out.samples[k][0] - b0[0]).norm_sqr()
                    + (out.samples[k][1] - b0[1]).norm_sqr())
                .sqrt();
                println!("t={t:.3} dev={d:.4e}");
            }
        }
        Err(e) => println!("err {e}"),
    }
}
